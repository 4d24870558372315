import math

import numpy as np
import pytest

from stationary_lab.dynamics import FitnessLandscape, Incentive, MutationRule
from stationary_lab.processes import (
    CycleSpace,
    ProcessModel,
    TransitionRow,
    VariablePopulationSpace,
    build_kernel,
    cycle_kernel,
    cycle_row,
    incentive_kernel,
    incentive_row,
    kfold_kernel,
    step_birth_curve,
    variable_population_kernel,
    variable_population_row,
    wright_fisher_kernel,
    wright_fisher_row,
)
from stationary_lab.statespace import BudgetExceededError

from conftest import ZERO_DIAG_GAME, HAWK_DOVE, NEUTRAL2, make_model


# ---------------------------------------------------------------------------
# incentive process rows
# ---------------------------------------------------------------------------


def test_incentive_row_neutral_no_mutation():
    model = make_model(NEUTRAL2, mu=0.0, N=3)
    row = incentive_row(model, (1, 2))
    assert row.probability((2, 1)) == pytest.approx(2 / 9, abs=1e-15)
    assert row.probability((0, 3)) == pytest.approx(2 / 9, abs=1e-15)
    assert row.probability((1, 2)) == pytest.approx(5 / 9, abs=1e-15)


def test_incentive_row_neutral_half_mutation():
    model = make_model(NEUTRAL2, mu=0.5, N=3)
    row = incentive_row(model, (1, 2))
    assert row.probability((2, 1)) == pytest.approx(1 / 3, abs=1e-15)


def test_incentive_row_fixation_absorbing_without_mutation():
    model = make_model(NEUTRAL2, mu=0.0, N=5)
    row = incentive_row(model, (5, 0))
    assert row.probability((5, 0)) == pytest.approx(1.0, abs=1e-15)
    assert len(row.entries) == 1


def test_transition_row_validation():
    with pytest.raises(ValueError):
        TransitionRow(source=(1, 1), entries=(((2, 0), 0.7), ((0, 2), 0.7)))
    with pytest.raises(ValueError):
        TransitionRow(source=(1, 1), entries=(((2, 0), 0.5), ((2, 0), 0.5)))


@pytest.mark.parametrize("mu", [0.0, 0.01, 0.5])
def test_incentive_kernel_rows_stochastic(mu, rng):
    game = rng.uniform(0.2, 2.0, (3, 3))
    kern = build_kernel(make_model(game, kind="q-fermi", beta=0.8, mu=mu, N=8))
    sums = np.asarray(kern.matrix.sum(axis=1)).ravel()
    assert np.max(np.abs(sums - 1.0)) < 1e-12
    assert kern.matrix.data.min() >= 0.0


def test_incentive_kernel_support_is_lattice_adjacent():
    kern = build_kernel(make_model(HAWK_DOVE, kind="q-fermi", N=12, mu=0.05))
    coo = kern.matrix.tocoo()
    for r, c in zip(coo.row, coo.col):
        if r != c:
            assert kern.space.distance(int(r), int(c)) == 1


def test_incentive_kernel_matches_row_function():
    model = make_model(HAWK_DOVE, mu=0.2, N=6)
    kern = incentive_kernel(model)
    for k, s in enumerate(kern.states):
        assert dict(kern.row(k).entries) == pytest.approx(dict(incentive_row(model, s).entries))


def test_type_swap_symmetry_for_symmetric_game():
    kern = build_kernel(make_model(HAWK_DOVE, mu=0.1, N=9))
    T = kern.dense()
    idx = kern.index
    for (i, j) in kern.states:
        for (ti, tj), p in dict(kern.row(idx[(i, j)]).entries).items():
            swapped = T[idx[(j, i)], idx[(tj, ti)]]
            assert swapped == pytest.approx(p, abs=1e-14)


# ---------------------------------------------------------------------------
# Wright-Fisher rows
# ---------------------------------------------------------------------------


def test_wf_row_fair_binomial():
    model = make_model(NEUTRAL2, mu=0.0, N=2, process="wright-fisher")
    row = wright_fisher_row(model, (1, 1))  # p = (1/2, 1/2)
    assert row.probability((2, 0)) == pytest.approx(0.25, abs=1e-12)
    assert row.probability((1, 1)) == pytest.approx(0.5, abs=1e-12)
    assert row.probability((0, 2)) == pytest.approx(0.25, abs=1e-12)


def test_wf_row_degenerate_concentrates():
    model = make_model(NEUTRAL2, mu=0.0, N=4, process="wright-fisher")
    row = wright_fisher_row(model, (4, 0))  # p = (1, 0)
    assert row.probability((4, 0)) == pytest.approx(1.0, abs=1e-15)


def test_wf_row_multinomial_coefficient():
    # constant landscape scaled to p = (1/2, 1/4, 1/4) via projection incentive
    game = np.tile(np.array([[0.5], [0.25], [0.25]]), (1, 3))
    model = make_model(game, kind="projection", mu=0.0, N=2, process="wright-fisher")
    row = wright_fisher_row(model, (2, 0, 0))
    assert row.probability((1, 1, 0)) == pytest.approx(2 * 0.5 * 0.25, abs=1e-12)
    assert row.probability((0, 1, 1)) == pytest.approx(2 * 0.25 * 0.25, abs=1e-12)


def test_wf_kernel_dense_support_and_sums():
    kern = build_kernel(make_model(HAWK_DOVE, kind="q-fermi", mu=0.1, N=14,
                                   process="wright-fisher"))
    T = kern.dense()
    assert T.shape == (15, 15)
    assert np.all(T > 0.0)  # strictly positive p: every state reachable
    assert np.max(np.abs(T.sum(axis=1) - 1.0)) < 1e-12


def test_wf_lazy_kernel_matches_materialized():
    model = make_model(HAWK_DOVE, kind="q-fermi", mu=0.1, N=10, process="wright-fisher")
    dense = wright_fisher_kernel(model)
    lazy = wright_fisher_kernel(model, max_dense_entries=10)
    assert lazy.matrix is None
    v = np.random.default_rng(7).dirichlet(np.ones(dense.size))
    assert np.allclose(lazy.matvec_left(v), dense.matvec_left(v), atol=1e-14)
    assert dict(lazy.row(3).entries) == pytest.approx(dict(dense.row(3).entries))


def test_log_multinomial_exact_small_N():
    from stationary_lab.processes import _log_multinomial_coeffs

    counts = np.array([[3, 2, 1], [6, 0, 0], [2, 2, 2]])
    out = _log_multinomial_coeffs(counts, 6)
    expect = [math.log(60), 0.0, math.log(90)]
    assert np.allclose(out, expect, atol=1e-13)


# ---------------------------------------------------------------------------
# k-fold
# ---------------------------------------------------------------------------


def test_kfold_one_is_base_kernel():
    base = build_kernel(make_model(HAWK_DOVE, mu=0.2, N=4))
    k1 = kfold_kernel(base, 1)
    assert np.allclose(k1.dense(), base.dense(), atol=0)


def test_kfold_two_matches_explicit_square():
    base = build_kernel(make_model(ZERO_DIAG_GAME, mu=0.3, N=2))
    T = base.dense()
    explicit = T @ T
    assert np.allclose(kfold_kernel(base, 2).dense(), explicit, atol=1e-15)


def test_kfold_equals_repeated_application(rng):
    base = build_kernel(make_model(HAWK_DOVE, mu=0.1, N=6))
    k = 5
    Tk = kfold_kernel(base, k)
    v = rng.dirichlet(np.ones(base.size))
    stepped = v.copy()
    for _ in range(k):
        stepped = base.matvec_left(stepped)
    assert np.allclose(Tk.matvec_left(v), stepped, atol=1e-12)


def test_kfold_rejects_bad_k():
    base = build_kernel(make_model(HAWK_DOVE, mu=0.1, N=4))
    with pytest.raises(ValueError):
        kfold_kernel(base, 0)
    with pytest.raises(ValueError):
        make_model(HAWK_DOVE, process="k-fold", k=0)


# ---------------------------------------------------------------------------
# variable population size
# ---------------------------------------------------------------------------


def test_variable_space_enumeration():
    space = VariablePopulationSpace(3)
    assert space.states[:5] == [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert space.size == 2 + 3 + 4


def test_variable_row_birth_certain_at_one():
    model = make_model(NEUTRAL2, mu=0.0, N=5, process="variable-population",
                       birth_curve=step_birth_curve(5))
    row = variable_population_row(model, (1, 0))
    assert dict(row.entries) == pytest.approx({(2, 0): 1.0})


def test_variable_row_death_certain_at_cap():
    model = make_model(NEUTRAL2, mu=0.0, N=4, process="variable-population",
                       birth_curve=step_birth_curve(4))
    row = variable_population_row(model, (3, 1))
    assert row.probability((2, 1)) == pytest.approx(0.75, abs=1e-15)
    assert row.probability((3, 0)) == pytest.approx(0.25, abs=1e-15)


def test_variable_row_four_branches():
    model = make_model(NEUTRAL2, mu=0.0, N=4, process="variable-population",
                       birth_curve=step_birth_curve(4))
    row = variable_population_row(model, (1, 1))  # p = abar = (1/2, 1/2)
    expect = {(2, 1): 0.25, (1, 2): 0.25, (0, 1): 0.25, (1, 0): 0.25}
    assert dict(row.entries) == pytest.approx(expect)


def test_variable_row_rejects_out_of_range():
    model = make_model(NEUTRAL2, N=4, process="variable-population",
                       birth_curve=step_birth_curve(4))
    with pytest.raises(ValueError):
        variable_population_row(model, (0, 0))
    with pytest.raises(ValueError):
        variable_population_row(model, (4, 1))


def test_variable_kernel_rows_stochastic():
    kern = build_kernel(make_model(HAWK_DOVE, mu=0.05, N=8,
                                   process="variable-population",
                                   birth_curve=step_birth_curve(8)))
    sums = np.asarray(kern.matrix.sum(axis=1)).ravel()
    assert np.max(np.abs(sums - 1.0)) < 1e-12


def test_variable_curve_endpoint_validation():
    bad = lambda M: 0.5  # birth possible at M=N, would overflow the cap
    model = make_model(NEUTRAL2, mu=0.1, N=4, process="variable-population", birth_curve=bad)
    with pytest.raises(ValueError):
        variable_population_kernel(model)


# ---------------------------------------------------------------------------
# cycle graph
# ---------------------------------------------------------------------------


def test_cycle_space_rotation_classes():
    space = CycleSpace(4)
    assert space.size == 16
    # two-arc configurations with arcs (2, 2) form one class of four rotations
    canon = space.canonical(space.index[(1, 1, 0, 0)])
    members = space.rotation_classes[canon]
    assert len(members) == 4
    assert all(space.is_two_arc(c) for c in members)
    # the alternating configuration has period two
    assert len(space.rotation_classes[space.canonical(space.index[(1, 0, 1, 0)])]) == 2


def test_cycle_alternating_self_loop_is_mutation_mass():
    # every faithful reproduction changes the alternating configuration
    mu = 0.2
    model = make_model(HAWK_DOVE, mu=mu, N=4, process="cycle-graph")
    row = cycle_row(model, (1, 0, 1, 0))
    assert row.probability((1, 0, 1, 0)) == pytest.approx(mu, abs=1e-14)


def test_cycle_segregated_changes_only_at_interface():
    model = make_model(HAWK_DOVE, mu=0.0, N=6, process="cycle-graph")
    src = (1, 1, 1, 0, 0, 0)
    row = cycle_row(model, src)
    for target, prob in row.entries:
        if target == src:
            continue
        flips = [v for v in range(6) if target[v] != src[v]]
        assert len(flips) == 1
        v = flips[0]
        # the flipped vertex is adjacent to the arc interface
        assert src[(v - 1) % 6] != src[(v + 1) % 6]


def test_cycle_rows_stochastic_and_cap():
    kern = cycle_kernel(make_model(HAWK_DOVE, mu=0.1, N=6, process="cycle-graph"))
    sums = np.asarray(kern.matrix.sum(axis=1)).ravel()
    assert np.max(np.abs(sums - 1.0)) < 1e-12
    with pytest.raises(BudgetExceededError):
        CycleSpace(15)


def test_cycle_requires_two_types():
    game3 = np.ones((3, 3))
    with pytest.raises(ValueError):
        make_model(game3, mu=0.1, N=4, process="cycle-graph")


# ---------------------------------------------------------------------------
# build_kernel dispatch and guardrails
# ---------------------------------------------------------------------------


def test_build_kernel_sizes():
    kern = build_kernel(make_model(np.ones((3, 3)), kind="q-fermi", mu=0.1, N=60))
    assert kern.size == 1891
    row_lengths = np.diff(kern.matrix.indptr)
    assert row_lengths.max() <= 7  # n(n-1) moves plus the self-loop

    kern4 = build_kernel(make_model(np.ones((4, 4)), kind="q-fermi", mu=0.1, N=40))
    assert kern4.size == math.comb(43, 3) == 12341

    wf = build_kernel(make_model(HAWK_DOVE, mu=0.1, N=100, process="wright-fisher"))
    assert wf.size == 101
    assert np.all(wf.dense() > 0)


def test_build_kernel_budget():
    with pytest.raises(BudgetExceededError):
        build_kernel(make_model(np.ones((3, 3)), mu=0.1, N=3000))
