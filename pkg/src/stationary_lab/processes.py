"""Transition kernels for the five process kinds.

Every kernel exposes per-state sparse transition rows over its state space:

incentive            birth-death on the simplex lattice, birth proportional
                     to the mutated incentive, death uniformly random
wright-fisher        generational multinomial resampling from p(abar)
k-fold               k-th power of the incentive kernel
variable-population  two-type birth/death chain with a coin-flip birth curve
cycle-graph          two-type incentive process on the vertices of a cycle

Rows always sum to one (within 1e-12) and are validated at build time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .dynamics import Incentive, MutationRule, selection_probabilities
from .statespace import BudgetExceededError, SimplexLattice

__all__ = [
    "ProcessModel",
    "TransitionKernel",
    "TransitionRow",
    "VariablePopulationSpace",
    "CycleSpace",
    "build_kernel",
    "incentive_kernel",
    "wright_fisher_kernel",
    "kfold_kernel",
    "variable_population_kernel",
    "cycle_kernel",
    "incentive_row",
    "wright_fisher_row",
    "variable_population_row",
    "cycle_row",
    "step_birth_curve",
    "sigmoid_birth_curve",
]

ROW_TOL = 1e-12
#: |row sum - 1| bound for the analytic multinomial identity check.
WF_ROWSUM_TOL = 1e-10

PROCESS_KINDS = ("incentive", "wright-fisher", "k-fold", "variable-population", "cycle-graph")


@dataclass(frozen=True)
class TransitionRow:
    """One sparse transition row: entries are (target state, probability)."""

    source: tuple
    entries: tuple

    def __post_init__(self):
        probs = np.array([p for _, p in self.entries])
        targets = [t for t, _ in self.entries]
        if len(set(targets)) != len(targets):
            raise ValueError(f"duplicate targets in row of {self.source}")
        if np.any(probs < -ROW_TOL) or np.any(probs > 1.0 + ROW_TOL):
            raise ValueError(f"transition probability outside [0, 1] at {self.source}")
        if abs(probs.sum() - 1.0) > ROW_TOL:
            raise ValueError(
                f"row of {self.source} sums to {probs.sum():.17g}, expected 1"
            )

    def probability(self, target) -> float:
        for t, p in self.entries:
            if t == target:
                return p
        return 0.0


@dataclass(frozen=True)
class ProcessModel:
    """A process kind plus its parameters; builds a transition kernel."""

    kind: str
    incentive: Incentive
    mutation: MutationRule
    N: int
    k: int = 1
    birth_curve: Optional[Callable[[int], float]] = None
    degenerate: str = "population"
    max_states: int = 500_000
    cycle_cap: int = 14

    def __post_init__(self):
        if self.kind not in PROCESS_KINDS:
            raise ValueError(f"unknown process kind {self.kind!r}")
        if self.kind == "k-fold" and self.k < 1:
            raise ValueError(f"k-fold requires k >= 1, got k={self.k}")
        if self.kind in ("variable-population", "cycle-graph") and self.n != 2:
            raise ValueError(f"{self.kind} process is restricted to n=2 types")

    @property
    def n(self) -> int:
        return self.incentive.n

    def selection(self, abar):
        return selection_probabilities(
            self.incentive, self.mutation, abar, N=self.N, degenerate=self.degenerate
        )


class TransitionKernel:
    """Assembled row-stochastic kernel over an indexed state space.

    The matrix is CSR; `space` provides the state list, index, counts and
    lattice adjacency used by solvers and stability analysis. Immutable
    after construction.
    """

    def __init__(self, space, matrix, kind: str, model: Optional[ProcessModel] = None):
        self.space = space
        self.matrix = sp.csr_matrix(matrix)
        self.kind = kind
        self.model = model
        self._validate()

    def _validate(self):
        data = self.matrix.data
        if data.size and (data.min() < -ROW_TOL or data.max() > 1.0 + ROW_TOL):
            raise ValueError("transition probabilities outside [0, 1]")
        rowsums = np.asarray(self.matrix.sum(axis=1)).ravel()
        worst = np.max(np.abs(rowsums - 1.0)) if rowsums.size else 0.0
        if worst > ROW_TOL:
            raise ValueError(f"kernel rows must sum to 1; worst deviation {worst:.3e}")

    @property
    def size(self) -> int:
        return self.space.size

    @property
    def states(self):
        return self.space.states

    @property
    def index(self):
        return self.space.index

    def row(self, k: int) -> TransitionRow:
        lo, hi = self.matrix.indptr[k], self.matrix.indptr[k + 1]
        entries = tuple(
            (self.states[j], float(p))
            for j, p in zip(self.matrix.indices[lo:hi], self.matrix.data[lo:hi])
        )
        return TransitionRow(source=self.states[k], entries=entries)

    def rows(self):
        for k in range(self.size):
            yield self.row(k)

    def matvec_left(self, v: np.ndarray) -> np.ndarray:
        """v @ T for a probability row-vector v."""
        return v @ self.matrix

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def __repr__(self):
        return f"TransitionKernel(kind={self.kind!r}, size={self.size})"


# ---------------------------------------------------------------------------
# incentive process
# ---------------------------------------------------------------------------


def _simplex_selection(model: ProcessModel, space: SimplexLattice) -> np.ndarray:
    """Selection distribution p(abar) at every lattice state, (S, n)."""
    if model.mutation.is_constant:
        return selection_probabilities(
            model.incentive, model.mutation, space.abar,
            N=model.N, degenerate=model.degenerate,
        )
    return np.vstack([
        selection_probabilities(
            model.incentive, model.mutation, space.abar[k],
            N=model.N, degenerate=model.degenerate,
        )
        for k in range(space.size)
    ])


def incentive_kernel(model: ProcessModel, space: Optional[SimplexLattice] = None) -> TransitionKernel:
    """Birth-death kernel: T[a, a + i_ab] = p_alpha(abar) * abar_beta."""
    if space is None:
        space = SimplexLattice(model.n, model.N, max_states=model.max_states)
    p = _simplex_selection(model, space)
    S = space.size
    rows, cols, vals = [], [], []
    offsum = np.zeros(S)
    src = np.arange(S)
    for (alpha, beta) in space.move_pairs:
        targets = space.move_targets(alpha, beta)
        prob = p[:, alpha] * space.abar[:, beta]
        feasible = (targets >= 0) & (prob > 0.0)
        rows.append(src[feasible])
        cols.append(targets[feasible])
        vals.append(prob[feasible])
        offsum += np.where(feasible, prob, 0.0)
    if np.any(offsum > 1.0 + ROW_TOL):
        k = int(np.argmax(offsum))
        raise ValueError(
            f"off-diagonal mass {offsum[k]:.17g} > 1 at state {space.states[k]}"
        )
    self_loop = np.clip(1.0 - offsum, 0.0, 1.0)
    rows.append(src)
    cols.append(src)
    vals.append(self_loop)
    M = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(S, S),
    )
    return TransitionKernel(space, M, "incentive", model)


def incentive_row(model: ProcessModel, state) -> TransitionRow:
    """Single incentive-process transition row at an integer state."""
    state = tuple(int(c) for c in state)
    abar = np.array(state, dtype=float) / model.N
    p = model.selection(abar)
    n = model.n
    entries = []
    offsum = 0.0
    for alpha in range(n):
        for beta in range(n):
            if alpha == beta or state[beta] == 0:
                continue
            prob = p[alpha] * abar[beta]
            if prob > 0.0:
                t = list(state)
                t[alpha] += 1
                t[beta] -= 1
                entries.append((tuple(t), prob))
                offsum += prob
    entries.append((state, max(0.0, 1.0 - offsum)))
    return TransitionRow(source=state, entries=tuple(entries))


# ---------------------------------------------------------------------------
# Wright-Fisher process
# ---------------------------------------------------------------------------


def _log_multinomial_coeffs(counts: np.ndarray, N: int) -> np.ndarray:
    """log of N! / prod_i b_i! per row of counts; exact integers for N <= 170."""
    if N <= 170:
        out = np.empty(len(counts))
        fact = [math.factorial(i) for i in range(N + 1)]
        for k, b in enumerate(counts):
            denom = 1
            for c in b:
                denom *= fact[c]
            out[k] = math.log(fact[N] // denom)
        return out
    from scipy.special import gammaln

    return gammaln(N + 1) - gammaln(counts + 1).sum(axis=1)


_NEG_INF_SUB = -1e30  # stands in for log(0); exp underflows to exactly 0


def _wf_log_rows(p: np.ndarray, counts: np.ndarray, logC: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        logp = np.log(p)
    logp = np.where(np.isneginf(logp), _NEG_INF_SUB, logp)
    return logC[None, :] + logp @ counts.T.astype(float)


def wright_fisher_kernel(
    model: ProcessModel,
    space: Optional[SimplexLattice] = None,
    max_dense_entries: int = 50_000_000,
) -> TransitionKernel:
    """Multinomial kernel: T[a, b] = (N choose b) * prod_i p_i(abar)^b_i.

    Rows are dense over the whole lattice. When S^2 exceeds the memory
    budget a lazily-evaluated kernel is returned instead of a materialized
    matrix.
    """
    if space is None:
        space = SimplexLattice(model.n, model.N, max_states=model.max_states)
    p = _simplex_selection(model, space)
    logC = _log_multinomial_coeffs(space.counts, model.N)
    if space.size**2 > max_dense_entries:
        return LazyWrightFisherKernel(space, p, logC, model)
    with np.errstate(under="ignore"):
        T = np.exp(_wf_log_rows(p, space.counts, logC))
    rowsums = T.sum(axis=1)
    worst = np.max(np.abs(rowsums - 1.0))
    if worst > WF_ROWSUM_TOL:
        raise ValueError(f"multinomial row sums deviate from 1 by {worst:.3e}")
    T /= rowsums[:, None]
    return TransitionKernel(space, T, "wright-fisher", model)


class LazyWrightFisherKernel:
    """Wright-Fisher kernel with rows generated on demand (over-budget spaces).

    Implements the same solver-facing surface as TransitionKernel
    (matvec_left, row, size, states) without materializing S x S storage.
    """

    kind = "wright-fisher"

    def __init__(self, space, p, logC, model, chunk: int = 256):
        self.space = space
        self.model = model
        self.matrix = None
        self._p = p
        self._logC = logC
        self._chunk = chunk

    @property
    def size(self):
        return self.space.size

    @property
    def states(self):
        return self.space.states

    @property
    def index(self):
        return self.space.index

    def _rows_block(self, lo: int, hi: int) -> np.ndarray:
        with np.errstate(under="ignore"):
            block = np.exp(_wf_log_rows(self._p[lo:hi], self.space.counts, self._logC))
        return block / block.sum(axis=1, keepdims=True)

    def row(self, k: int) -> TransitionRow:
        probs = self._rows_block(k, k + 1)[0]
        entries = tuple(
            (self.states[j], float(probs[j])) for j in np.nonzero(probs)[0]
        )
        return TransitionRow(source=self.states[k], entries=entries)

    def matvec_left(self, v: np.ndarray) -> np.ndarray:
        out = np.zeros(self.size)
        for lo in range(0, self.size, self._chunk):
            hi = min(lo + self._chunk, self.size)
            out += v[lo:hi] @ self._rows_block(lo, hi)
        return out


def wright_fisher_row(model: ProcessModel, state) -> TransitionRow:
    """Single Wright-Fisher transition row at an integer state."""
    space = SimplexLattice(model.n, model.N, max_states=model.max_states)
    k = space.index[tuple(int(c) for c in state)]
    p = model.selection(space.abar[k])
    logC = _log_multinomial_coeffs(space.counts, model.N)
    with np.errstate(under="ignore"):
        probs = np.exp(_wf_log_rows(p[None, :], space.counts, logC))[0]
    total = probs.sum()
    if abs(total - 1.0) > WF_ROWSUM_TOL:
        raise ValueError(f"multinomial row sums to {total:.17g}")
    probs /= total
    entries = tuple((space.states[j], float(probs[j])) for j in np.nonzero(probs)[0])
    return TransitionRow(source=tuple(int(c) for c in state), entries=entries)


# ---------------------------------------------------------------------------
# k-fold incentive process
# ---------------------------------------------------------------------------


def kfold_kernel(model_or_kernel, k: Optional[int] = None) -> TransitionKernel:
    """Kernel of the k-fold process: the k-th power of the incentive kernel."""
    if isinstance(model_or_kernel, TransitionKernel):
        base = model_or_kernel
        if k is None:
            raise ValueError("k required when passing a kernel")
    else:
        model = model_or_kernel
        k = model.k if k is None else k
        base = incentive_kernel(ProcessModel(
            kind="incentive", incentive=model.incentive, mutation=model.mutation,
            N=model.N, degenerate=model.degenerate, max_states=model.max_states,
        ))
    if k < 1:
        raise ValueError(f"k-fold requires k >= 1, got k={k}")
    if k == 1:
        return TransitionKernel(base.space, base.matrix, "k-fold", base.model)
    Tk = np.linalg.matrix_power(base.dense(), k)
    return TransitionKernel(base.space, Tk, "k-fold", base.model)


# ---------------------------------------------------------------------------
# variable population size
# ---------------------------------------------------------------------------


def step_birth_curve(N: int) -> Callable[[int], float]:
    """Birth certain at M=1, fair coin for 1 < M < N, death certain at M=N."""

    def birth(M: int) -> float:
        if M <= 1:
            return 1.0
        if M >= N:
            return 0.0
        return 0.5

    return birth


def sigmoid_birth_curve(N: int, steepness: float = 10.0) -> Callable[[int], float]:
    """S-curve birth probability, pinned to 1 at M=1 and 0 at M=N."""

    def birth(M: int) -> float:
        if M <= 1:
            return 1.0
        if M >= N:
            return 0.0
        x = (M - 1) / (N - 1)
        return 1.0 / (1.0 + math.exp(steepness * (x - 0.5)))

    return birth


class VariablePopulationSpace:
    """Two-type states (a1, a2) with 1 <= a1 + a2 <= N.

    Enumeration: total size ascending, then first count descending.
    Adjacency is the process's own moves: one count changes by one.
    """

    def __init__(self, N: int):
        if N < 2:
            raise ValueError(f"maximum population size must be >= 2, got N={N}")
        self.n = 2
        self.N = N
        self.states = [
            (a1, M - a1) for M in range(1, N + 1) for a1 in range(M, -1, -1)
        ]
        self.size = len(self.states)
        self.index = {s: k for k, s in enumerate(self.states)}
        self.counts = np.array(self.states, dtype=np.int64)
        self.totals = self.counts.sum(axis=1)
        #: per-state distribution over types, normalized by the state's own total
        self.abar = self.counts / self.totals[:, None]

    def __len__(self):
        return self.size

    @cached_property
    def adjacency(self) -> list[np.ndarray]:
        out = []
        for (a1, a2) in self.states:
            nbrs = []
            for t in ((a1 + 1, a2), (a1 - 1, a2), (a1, a2 + 1), (a1, a2 - 1)):
                k = self.index.get(t)
                if k is not None:
                    nbrs.append(k)
            out.append(np.array(nbrs, dtype=np.int64))
        return out

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        return (self.counts == 0).any(axis=1)

    def ball(self, k: int, radius: int) -> list[int]:
        frontier, seen = {k}, {k}
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
        """Moves are single count changes, so distance is the L1 count gap."""
        return int(np.abs(self.counts[j] - self.counts[k]).sum())


def variable_population_row(model: ProcessModel, state) -> TransitionRow:
    """Coin-flip birth/death row: birth adds type i w.p. birth(M) * p_i,
    death removes a uniformly random individual w.p. (1 - birth(M)) * abar_i."""
    a1, a2 = (int(c) for c in state)
    M = a1 + a2
    if not 1 <= M <= model.N:
        raise ValueError(f"state {state} has total {M} outside [1, {model.N}]")
    birth = model.birth_curve or step_birth_curve(model.N)
    g = float(birth(M))
    if not 0.0 <= g <= 1.0:
        raise ValueError(f"birth curve value {g} outside [0, 1] at M={M}")
    if M == model.N and g > 0.0:
        raise ValueError(f"birth curve must vanish at M=N={model.N}")
    if M == 1 and g < 1.0:
        raise ValueError("birth curve must equal 1 at M=1")
    abar = np.array([a1, a2], dtype=float) / M
    entries = []
    if g > 0.0:
        p = model.selection(abar)
        if p[0] > 0.0:
            entries.append(((a1 + 1, a2), g * p[0]))
        if p[1] > 0.0:
            entries.append(((a1, a2 + 1), g * p[1]))
    if g < 1.0:
        if a1 > 0:
            entries.append(((a1 - 1, a2), (1.0 - g) * abar[0]))
        if a2 > 0:
            entries.append(((a1, a2 - 1), (1.0 - g) * abar[1]))
    return TransitionRow(source=(a1, a2), entries=tuple(entries))


def variable_population_kernel(model: ProcessModel) -> TransitionKernel:
    space = VariablePopulationSpace(model.N)
    rows, cols, vals = [], [], []
    for k, s in enumerate(space.states):
        for target, prob in variable_population_row(model, s).entries:
            rows.append(k)
            cols.append(space.index[target])
            vals.append(prob)
    M = sp.coo_matrix((vals, (rows, cols)), shape=(space.size, space.size))
    return TransitionKernel(space, M, "variable-population", model)


# ---------------------------------------------------------------------------
# cycle graph
# ---------------------------------------------------------------------------


class CycleSpace:
    """Binary type assignments on the vertices of an N-cycle.

    States are tuples of type indices (0/1) per vertex, enumerated by the
    integer value of the bit string. Rotation classes support consolidated
    reporting of the stationary distribution.
    """

    def __init__(self, N: int, cap: int = 14):
        if N < 2:
            raise ValueError(f"cycle needs N >= 2 vertices, got {N}")
        if N > cap:
            raise BudgetExceededError(2**N, 2**cap)
        self.n = 2
        self.N = N
        self.size = 2**N
        self.states = [self._bits(c) for c in range(self.size)]
        self.index = {s: c for c, s in enumerate(self.states)}
        ones = np.array([sum(s) for s in self.states], dtype=np.int64)
        #: per-configuration type counts (count of type 0, count of type 1)
        self.counts = np.stack([N - ones, ones], axis=1)
        self.abar = self.counts / float(N)

    def _bits(self, c: int) -> tuple:
        return tuple((c >> v) & 1 for v in range(self.N))

    def __len__(self):
        return self.size

    @cached_property
    def adjacency(self) -> list[np.ndarray]:
        out = []
        for c in range(self.size):
            out.append(np.array([c ^ (1 << v) for v in range(self.N)], dtype=np.int64))
        return out

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        return (self.counts == 0).any(axis=1)

    def ball(self, k: int, radius: int) -> list[int]:
        frontier, seen = {k}, {k}
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
        """Hamming distance between configurations (single-vertex flips)."""
        return bin(j ^ k).count("1")

    def rotate(self, c: int, r: int) -> int:
        mask = self.size - 1
        return ((c >> r) | (c << (self.N - r))) & mask

    def canonical(self, c: int) -> int:
        """Smallest integer over all cyclic rotations of the configuration."""
        return min(self.rotate(c, r) for r in range(self.N))

    @cached_property
    def rotation_classes(self) -> dict[int, list[int]]:
        classes: dict[int, list[int]] = {}
        for c in range(self.size):
            classes.setdefault(self.canonical(c), []).append(c)
        return classes

    def consolidate(self, s: np.ndarray) -> dict[int, float]:
        """Sum a distribution over configurations into rotation classes."""
        out: dict[int, float] = {}
        for canon, members in self.rotation_classes.items():
            out[canon] = float(sum(s[m] for m in members))
        return out

    def arc_count(self, c: int) -> int:
        """Number of maximal same-type arcs around the cycle (0 for pure states)."""
        bits = self.states[c]
        boundaries = sum(bits[v] != bits[(v + 1) % self.N] for v in range(self.N))
        return boundaries

    def is_two_arc(self, c: int) -> bool:
        """True iff the configuration is two segregated arcs (exactly 2 interfaces)."""
        return self.arc_count(c) == 2

    def arc_sizes(self, c: int) -> tuple[int, int]:
        """(count of type 0, count of type 1); meaningful for two-arc configs."""
        return tuple(self.counts[c])


def cycle_row(model: ProcessModel, config, space: Optional[CycleSpace] = None) -> TransitionRow:
    """Birth-death row on cycle configurations.

    A parent vertex u is chosen with probability phibar_{type(u)} / a_{type(u)},
    the offspring type is drawn from the mutation row of the parent type, and
    the offspring replaces a uniformly chosen cycle-neighbor of u.
    """
    if space is None:
        space = CycleSpace(model.N, cap=model.cycle_cap)
    config = tuple(int(b) for b in config)
    c = space.index[config]
    abar = space.abar[c]
    counts = space.counts[c]
    phibar = _cycle_phibar(model, abar)
    M = model.mutation.matrix(abar)
    probs: dict[int, float] = {}
    N = model.N
    for u in range(N):
        t = config[u]
        if counts[t] == 0:  # pragma: no cover - type present by construction
            continue
        parent = phibar[t] / counts[t]
        if parent == 0.0:
            continue
        for v in ((u - 1) % N, (u + 1) % N):
            for offspring in (0, 1):
                w = parent * 0.5 * M[t, offspring]
                if w == 0.0:
                    continue
                target = c & ~(1 << v) | (offspring << v)
                probs[target] = probs.get(target, 0.0) + w
    entries = tuple((space.states[t], p) for t, p in sorted(probs.items()))
    return TransitionRow(source=config, entries=entries)


def _cycle_phibar(model: ProcessModel, abar: np.ndarray) -> np.ndarray:
    from .dynamics import _normalize_phi, incentive_phi

    phi = incentive_phi(model.incentive, abar, N=model.N)
    phibar = _normalize_phi(model.incentive, abar, phi, model.degenerate)
    # types with no vertices cannot parent; renormalize over present types
    present = abar > 0.0
    phibar = np.where(present, phibar, 0.0)
    total = phibar.sum()
    if total <= 0.0:
        raise ValueError(f"no present type has positive incentive at abar={abar}")
    return phibar / total


def cycle_kernel(model: ProcessModel) -> TransitionKernel:
    space = CycleSpace(model.N, cap=model.cycle_cap)
    rows, cols, vals = [], [], []
    for c in range(space.size):
        for target, prob in cycle_row(model, space.states[c], space).entries:
            rows.append(c)
            cols.append(space.index[target])
            vals.append(prob)
    M = sp.coo_matrix((vals, (rows, cols)), shape=(space.size, space.size))
    return TransitionKernel(space, M, "cycle-graph", model)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def build_kernel(model: ProcessModel, **kw):
    """Build the full kernel for any process kind (deterministic rows)."""
    if model.kind == "incentive":
        return incentive_kernel(model, **kw)
    if model.kind == "wright-fisher":
        return wright_fisher_kernel(model, **kw)
    if model.kind == "k-fold":
        return kfold_kernel(model, **kw)
    if model.kind == "variable-population":
        return variable_population_kernel(model, **kw)
    if model.kind == "cycle-graph":
        return cycle_kernel(model, **kw)
    raise ValueError(f"unknown process kind {model.kind!r}")  # pragma: no cover
