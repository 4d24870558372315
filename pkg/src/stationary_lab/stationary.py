"""Stationary distributions and balance diagnostics.

Two solver routes are kept deliberately independent so they can oracle each
other: the exact detailed-balance product along a birth-death line, and
plain left power iteration. Balance checks (detailed and global) and
lattice-adjacency extremum classification live here too.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.special import logsumexp

__all__ = [
    "StationaryResult",
    "ExtremumReport",
    "NonConvergenceError",
    "ZeroTransitionError",
    "exact_stationary",
    "power_iteration",
    "solve_stationary",
    "detailed_balance_check",
    "global_balance_residual",
    "flow_residuals",
    "find_extrema",
]

#: Dense matvec fast path for chains at or below this many states.
_DENSE_CUTOFF = 512


class NonConvergenceError(RuntimeError):
    """Power iteration hit max_iters before reaching the tolerance."""

    def __init__(self, residual, iterations):
        super().__init__(
            f"no convergence after {iterations} iterations; achieved residual {residual:.3e}"
        )
        self.residual = residual
        self.iterations = iterations


class ZeroTransitionError(ValueError):
    """A transition on the exact-product path is zero."""


@dataclass
class StationaryResult:
    """Stationary probabilities with solver metadata."""

    probabilities: np.ndarray
    method: str
    residual: float
    iterations: int

    def __post_init__(self):
        s = np.asarray(self.probabilities, dtype=float)
        if np.any(s < 0.0):
            raise ValueError("stationary probabilities must be non-negative")
        if abs(s.sum() - 1.0) > 1e-10:
            raise ValueError(f"stationary probabilities sum to {s.sum():.17g}")
        self.probabilities = s

    def __getitem__(self, k):
        return self.probabilities[k]


def _band_transitions(kernel):
    """Up/down transitions along the two-type enumeration line.

    Returns (up, down): up[j] = T[j, j+1], down[j] = T[j+1, j]. Requires a
    tridiagonal kernel (support only on the line's nearest neighbors).
    """
    T = kernel.matrix.tocoo()
    S = kernel.size
    if np.any(np.abs(T.row - T.col) > 1):
        raise ValueError("exact product requires a tridiagonal (birth-death) kernel")
    dense_band = {(int(r), int(c)): float(v) for r, c, v in zip(T.row, T.col, T.data)}
    up = np.array([dense_band.get((j, j + 1), 0.0) for j in range(S - 1)])
    down = np.array([dense_band.get((j + 1, j), 0.0) for j in range(S - 1)])
    return up, down


def exact_stationary(kernel) -> StationaryResult:
    """Detailed-balance product solution for a two-type birth-death chain.

    s_j is proportional to the product of up/down transition ratios along
    the line, accumulated in log space so that ratios spanning hundreds of
    orders of magnitude stay finite.
    """
    space = kernel.space
    if getattr(space, "n", None) != 2 or not hasattr(space, "abar"):
        raise ValueError("exact product solution applies to two-type chains only")
    up, down = _band_transitions(kernel)
    if np.any(up <= 0.0) or np.any(down <= 0.0):
        j = int(np.argmin(np.minimum(up, down)))
        raise ZeroTransitionError(
            f"zero transition between states {space.states[j]} and {space.states[j + 1]}"
        )
    logw = np.concatenate([[0.0], np.cumsum(np.log(up) - np.log(down))])
    s = np.exp(logw - logsumexp(logw))
    s /= s.sum()
    residual = float(np.abs(kernel.matvec_left(s) - s).sum())
    return StationaryResult(s, "exact-product", residual, iterations=0)


def power_iteration(
    kernel,
    tol: float = 1e-13,
    max_iters: int = 1_000_000,
    initial: Optional[np.ndarray] = None,
    damping: float = 0.0,
) -> StationaryResult:
    """Left power iteration s <- s T until the L1 step change is below tol.

    The reported residual is ||sT - s||_1 for the returned vector, checked
    against tol after the step criterion fires. `damping` mixes in the
    identity (s <- (1-damping) sT + damping s), which leaves the fixed
    point unchanged and restores convergence for periodic chains.

    Raises NonConvergenceError after max_iters, carrying the residual
    achieved so far.
    """
    S = kernel.size
    if initial is None:
        v = np.full(S, 1.0 / S)
    else:
        v = np.asarray(initial, dtype=float)
        v = v / v.sum()

    # v @ T recast as T^t @ v on a prepared operand: dense for small chains,
    # transposed CSR otherwise; falls back to the kernel's own matvec (lazy rows)
    if kernel.matrix is None:
        matvec = kernel.matvec_left
    elif S <= _DENSE_CUTOFF and S <= 512:
        Tt = np.ascontiguousarray(kernel.matrix.toarray().T)
        matvec = Tt.dot
    else:
        Tt = kernel.matrix.T.tocsr()
        matvec = Tt.dot

    last_residual = np.inf
    for it in range(1, max_iters + 1):
        w = matvec(v)
        if damping > 0.0:
            w = (1.0 - damping) * w + damping * v
        w /= w.sum()
        step = float(np.abs(w - v).sum())
        v = w
        if step <= tol:
            residual = float(np.abs(matvec(v) - v).sum())
            last_residual = residual
            if residual <= tol:
                return StationaryResult(np.maximum(v, 0.0), "power-iteration", residual, it)
    raise NonConvergenceError(min(last_residual, step), max_iters)


def solve_stationary(kernel, method: str = "auto", **kw) -> StationaryResult:
    """Dispatch to the exact product (two-type incentive chains) or power iteration."""
    if method == "exact":
        return exact_stationary(kernel)
    if method == "power":
        return power_iteration(kernel, **kw)
    if method == "auto":
        if getattr(kernel.space, "n", None) == 2 and kernel.kind == "incentive":
            try:
                return exact_stationary(kernel)
            except (ValueError, ZeroTransitionError):
                pass
        if kernel.kind == "variable-population":
            kw.setdefault("damping", 0.5)  # birth/death alternation makes the chain periodic
        return power_iteration(kernel, **kw)
    raise ValueError(f"unknown solver method {method!r}")


def detailed_balance_check(kernel, s: np.ndarray, tol: float = 1e-8):
    """Max violation of s_a T_ab = s_b T_ba over adjacent pairs.

    Returns (balanced, worst) with balanced true iff worst <= tol.
    """
    s = np.asarray(s, dtype=float)
    F = sp.diags(s) @ kernel.matrix
    asym = (F - F.T).tocoo()
    worst = float(np.max(np.abs(asym.data))) if asym.data.size else 0.0
    return worst <= tol, worst


def global_balance_residual(kernel, s: np.ndarray) -> float:
    """Max over states of |s_a * outflow - inflow| with self-loops excluded."""
    s = np.asarray(s, dtype=float)
    diag = kernel.matrix.diagonal() if kernel.matrix is not None else _lazy_diagonal(kernel)
    outflow = s * (1.0 - diag)
    inflow = kernel.matvec_left(s) - s * diag
    return float(np.max(np.abs(outflow - inflow)))


def _lazy_diagonal(kernel):
    return np.array([kernel.row(k).probability(kernel.states[k]) for k in range(kernel.size)])


def flow_residuals(kernel) -> np.ndarray:
    """|sum_b T_a^b - sum_b T_b^a| over off-diagonal neighbors, per state.

    Both sums exclude the self-loop, so the residual reduces to
    |1 - column sum|; states where it vanishes are probability flow neutral.
    """
    colsums = kernel.matvec_left(np.ones(kernel.size))
    return np.abs(1.0 - colsums)


@dataclass
class ExtremumReport:
    """Per-state classification under lattice adjacency.

    classes[k] is one of "local-max", "local-min", "neither"; plateau marks
    states whose whole neighborhood ties (reported as "neither").
    """

    classes: list
    plateau: np.ndarray
    maxima: list
    minima: list
    flow_residual: Optional[np.ndarray] = None
    states: list = field(default_factory=list)

    @property
    def max_states(self):
        return [self.states[k] for k in self.maxima] if self.states else self.maxima

    @property
    def min_states(self):
        return [self.states[k] for k in self.minima] if self.states else self.minima


def find_extrema(
    values: np.ndarray,
    space=None,
    kernel=None,
    rtol: float = 1e-9,
    atol: float = 0.0,
) -> ExtremumReport:
    """Classify every state as a local max, local min, or neither.

    A local maximum is >= all lattice neighbors and strictly greater than
    at least one; minima dually. Ties are resolved with a relative
    tolerance, and all-tied neighborhoods (plateaus) are classified
    "neither" with a plateau annotation. NaN values (undefined landscape
    points, e.g. relative entropy on the boundary) are skipped: a NaN state
    is "neither" and NaN neighbors are excluded from comparisons.
    """
    if space is None:
        if kernel is None:
            raise ValueError("need a state space or a kernel")
        space = kernel.space
    values = np.asarray(values, dtype=float)
    S = len(values)
    classes = []
    plateau = np.zeros(S, dtype=bool)
    maxima, minima = [], []
    adjacency = space.adjacency
    for k in range(S):
        if not np.isfinite(values[k]):
            classes.append("neither")
            continue
        nbrs = adjacency[k]
        nbr_vals = values[nbrs]
        nbr_vals = nbr_vals[np.isfinite(nbr_vals)]
        if nbr_vals.size == 0:
            classes.append("neither")
            plateau[k] = True
            continue
        diffs = values[k] - nbr_vals
        scale = max(abs(float(values[k])), float(np.max(np.abs(nbr_vals))))
        tie = rtol * scale + atol
        greater = diffs > tie
        less = diffs < -tie
        if not less.any() and greater.any():
            classes.append("local-max")
            maxima.append(k)
        elif not greater.any() and less.any():
            classes.append("local-min")
            minima.append(k)
        else:
            classes.append("neither")
            if not greater.any() and not less.any():
                plateau[k] = True
    flow = flow_residuals(kernel) if kernel is not None else None
    return ExtremumReport(
        classes=classes,
        plateau=plateau,
        maxima=maxima,
        minima=minima,
        flow_residual=flow,
        states=list(space.states),
    )
