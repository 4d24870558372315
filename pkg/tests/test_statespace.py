import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stationary_lab.statespace import (
    BudgetExceededError,
    SimplexLattice,
    enumerate_states,
    is_boundary,
    lattice_distance,
    state_count,
)


def test_enumerate_two_types():
    assert enumerate_states(2, 2) == [(2, 0), (1, 1), (0, 2)]


def test_enumerate_unit_vectors():
    assert enumerate_states(3, 1) == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]


def test_enumerate_count_matches_stars_and_bars():
    states = enumerate_states(3, 60)
    assert len(states) == math.comb(62, 2) == 1891
    assert all(sum(s) == 60 for s in states)
    assert len(set(states)) == 1891


@pytest.mark.parametrize("n,N", [(1, 5), (0, 5), (2, 0), (3, -1)])
def test_enumerate_rejects_bad_sizes(n, N):
    with pytest.raises(ValueError):
        enumerate_states(n, N)


@given(st.integers(2, 4), st.integers(1, 25))
@settings(max_examples=40, deadline=None)
def test_index_round_trip(n, N):
    space = SimplexLattice(n, N)
    for k, s in enumerate(space.states):
        assert space.index[s] == k
    assert space.size == state_count(n, N)


@given(st.integers(2, 4), st.integers(1, 12))
@settings(max_examples=25, deadline=None)
def test_neighbor_symmetry(n, N):
    space = SimplexLattice(n, N)
    neighbor_sets = {s: {t for _, t in space.neighbors(s)} for s in space.states}
    for s, nbrs in neighbor_sets.items():
        for t in nbrs:
            assert s in neighbor_sets[t]


def test_neighbors_interior_and_boundary():
    space = SimplexLattice(2, 2)
    assert dict(space.neighbors((1, 1))) == {(0, 1): (2, 0), (1, 0): (0, 2)}
    assert dict(space.neighbors((2, 0))) == {(1, 0): (1, 1)}
    interior = SimplexLattice(3, 9).neighbors((3, 3, 3))
    assert len(interior) == 6


def test_is_boundary():
    assert is_boundary((2, 0))
    assert not is_boundary((1, 1))
    assert not is_boundary((20, 20, 20))


def test_boundary_mask_matches_predicate():
    space = SimplexLattice(3, 5)
    for k, s in enumerate(space.states):
        assert space.boundary_mask[k] == is_boundary(s)


def test_lattice_distance_counts_swap_moves():
    assert lattice_distance((3, 3, 3), (3, 3, 3)) == 0
    assert lattice_distance((4, 2, 3), (3, 3, 3)) == 1
    assert lattice_distance((5, 1, 3), (3, 3, 3)) == 2
    space = SimplexLattice(3, 9)
    k = space.index[(3, 3, 3)]
    ball = space.ball(k, 1)
    assert len(ball) == 7  # six moves plus the state itself
    assert all(space.distance(k, j) <= 1 for j in ball)


def test_budget_guardrail():
    with pytest.raises(BudgetExceededError) as err:
        SimplexLattice(3, 2000, max_states=500_000)
    assert err.value.size == math.comb(2002, 2)


def test_move_targets_feasibility():
    space = SimplexLattice(2, 3)
    targets = space.move_targets(0, 1)  # type 1 gains from type 2
    for k, s in enumerate(space.states):
        if s[1] == 0:
            assert targets[k] == -1
        else:
            assert space.states[targets[k]] == (s[0] + 1, s[1] - 1)
