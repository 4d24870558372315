"""Lattice of population states for n types and population size N.

A population state is a tuple of non-negative integer counts summing to N,
i.e. a point of the discretized probability simplex. States are enumerated
in descending lexicographic order so that downstream output is diff-stable,
and indexed densely 0..S-1 with S = C(N+n-1, n-1).
"""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np

__all__ = [
    "SimplexLattice",
    "enumerate_states",
    "is_boundary",
    "lattice_distance",
    "state_count",
]


class BudgetExceededError(RuntimeError):
    """State space larger than the configured desk-scale budget."""

    def __init__(self, size, budget):
        super().__init__(
            f"state space has {size} states, exceeding the budget of {budget}"
        )
        self.size = size
        self.budget = budget


def state_count(n: int, N: int) -> int:
    """Number of states: compositions of N into n non-negative parts."""
    return math.comb(N + n - 1, n - 1)


def _compositions(n, N):
    if n == 1:
        yield (N,)
        return
    for first in range(N, -1, -1):
        for rest in _compositions(n - 1, N - first):
            yield (first,) + rest


def enumerate_states(n: int, N: int) -> list[tuple[int, ...]]:
    """Enumerate all population states in descending lexicographic order.

    Parameters
    ----------
    n : int
        Number of types, n >= 2.
    N : int
        Population size, N >= 1.

    Returns
    -------
    list of tuple
        Exactly C(N+n-1, n-1) count vectors, each summing to N.
    """
    if n < 2:
        raise ValueError(f"need at least 2 types, got n={n}")
    if N < 1:
        raise ValueError(f"population size must be >= 1, got N={N}")
    return list(_compositions(n, N))


def is_boundary(state) -> bool:
    """True iff some type is absent (any count equals 0)."""
    return any(c == 0 for c in state)


def lattice_distance(a, b) -> int:
    """Minimal number of single-individual swap moves between two states.

    Each move shifts one individual from one type to another, so the
    graph distance is half the L1 distance between count vectors.
    """
    return sum(abs(x - y) for x, y in zip(a, b)) // 2


class SimplexLattice:
    """Indexed state space with adjacency moves for fixed n and N.

    Adjacent states differ by a move (alpha, beta): one individual of type
    beta replaced by one of type alpha. Interior states have exactly
    n*(n-1) neighbors; boundary states fewer (moves that would drive a
    count negative are infeasible).

    All attributes are immutable after construction; instances are safe to
    share across threads.
    """

    def __init__(self, n: int, N: int, max_states: int = 500_000):
        size = state_count(n, N)
        if size > max_states:
            raise BudgetExceededError(size, max_states)
        self.n = n
        self.N = N
        self.states = enumerate_states(n, N)
        self.size = len(self.states)
        self.index = {s: k for k, s in enumerate(self.states)}
        #: (S, n) integer count matrix in enumeration order.
        self.counts = np.array(self.states, dtype=np.int64)
        #: (S, n) normalized distributions abar = counts / N.
        self.abar = self.counts / float(N)
        # moves[(alpha, beta)] -> (S,) target index, -1 where infeasible
        self._moves = {}
        for alpha in range(n):
            for beta in range(n):
                if alpha == beta:
                    continue
                targets = np.full(self.size, -1, dtype=np.int64)
                for k, s in enumerate(self.states):
                    if s[beta] > 0:
                        t = list(s)
                        t[alpha] += 1
                        t[beta] -= 1
                        targets[k] = self.index[tuple(t)]
                self._moves[(alpha, beta)] = targets

    def __len__(self):
        return self.size

    def __repr__(self):
        return f"SimplexLattice(n={self.n}, N={self.N}, size={self.size})"

    @property
    def move_pairs(self):
        """Ordered (alpha, beta) pairs, alpha != beta."""
        return list(self._moves.keys())

    def move_targets(self, alpha: int, beta: int) -> np.ndarray:
        """Target state index per source state for move (alpha, beta); -1 infeasible."""
        return self._moves[(alpha, beta)]

    def neighbors(self, state):
        """All feasible (move, neighbor state) pairs of a state.

        The move (alpha, beta) means type alpha gains the individual that
        type beta loses.
        """
        k = self.index[tuple(state)]
        out = []
        for (alpha, beta), targets in self._moves.items():
            t = targets[k]
            if t >= 0:
                out.append(((alpha, beta), self.states[t]))
        return out

    @cached_property
    def adjacency(self) -> list[np.ndarray]:
        """Neighbor index arrays per state, in deterministic move order."""
        lists = [[] for _ in range(self.size)]
        for (alpha, beta), targets in self._moves.items():
            for k in range(self.size):
                if targets[k] >= 0:
                    lists[k].append(targets[k])
        return [np.array(v, dtype=np.int64) for v in lists]

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        """(S,) boolean, True where some count is zero."""
        return (self.counts == 0).any(axis=1)

    def ball(self, k: int, radius: int) -> list[int]:
        """State indices within the given lattice radius of state k."""
        if radius <= 0:
            return [k]
        frontier = {k}
        seen = {k}
        for _ in range(radius):
            nxt = set()
            for j in frontier:
                for t in self.adjacency[j]:
                    if t not in seen:
                        seen.add(int(t))
                        nxt.add(int(t))
            frontier = nxt
        return sorted(seen)

    def distance(self, j: int, k: int) -> int:
        """Lattice distance (number of swap moves) between states j and k."""
        return lattice_distance(self.states[j], self.states[k])
