"""Stability notions: expected next state, divergence landscapes, ISS
candidates, stationary stability, and the theorem-verification harness.

A state is an ISS candidate when the selection distribution fixes it,
p(abar) = abar; it is stationary stable when the stationary distribution is
locally maximal there. The divergence family interpolates half squared
Euclidean distance (d=0) and relative entropy (d=1); D_d(a) measures the
distance from the expected next state E(abar) to abar.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dynamics import selection_probabilities
from .processes import ProcessModel, TransitionKernel, build_kernel
from .stationary import (
    ExtremumReport,
    StationaryResult,
    find_extrema,
    flow_residuals,
    solve_stationary,
)

__all__ = [
    "divergence",
    "chi_squared",
    "expected_state",
    "expected_state_batch",
    "expected_from_row",
    "iss_residuals",
    "iss_candidates",
    "refine_candidates",
    "StabilityReport",
    "stability_report",
    "TheoremVerdict",
    "theorem_check",
]


# ---------------------------------------------------------------------------
# divergence family and chi-squared distance
# ---------------------------------------------------------------------------


def divergence(d: float, x, y) -> Optional[float]:
    """One-parameter distance between distributions x and y.

    d=0 is half squared Euclidean distance, d=1 is relative entropy
    sum x_i log(x_i / y_i), and 0<d<1 interpolates between them. Returns
    None where the value is undefined (d=1 off the interior). The result is
    0 iff x = y and strictly increases in d for fixed x != y.
    """
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"divergence parameter must lie in [0, 1], got {d}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if d == 0.0:
        return float(0.5 * np.sum((x - y) ** 2))
    if d == 1.0:
        if np.any(x <= 0.0) or np.any(y <= 0.0):
            return None
        return float(np.sum(x * np.log1p((x - y) / y)))
    return float(_intermediate_terms(d, x, y).sum())


def _intermediate_terms(d: float, x, y) -> np.ndarray:
    """Per-component contributions for 0 < d < 1.

    The literal bracket cancels catastrophically when x is within float
    noise of y, so near-equal components switch to the exact second-order
    form (1/2) y^{-d} (x - y)^2.
    """
    e = 2.0 - d
    delta = x - y
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = ((x**e - y**e) / e - y ** (1.0 - d) * delta) / (1.0 - d)
        quad = 0.5 * y ** (-d) * delta**2
    near = np.abs(delta) <= 1e-4 * y
    return np.where(near, np.where(delta == 0.0, 0.0, quad), exact)


def chi_squared(x, y) -> Optional[float]:
    """Chi-squared distance sum (x_i - y_i)^2 / x_i; None on zero denominators."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x == 0.0):
        return None
    return float(np.sum((x - y) ** 2 / x))


def _divergence_rows(d: float, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Row-wise divergence, NaN where undefined."""
    if d == 0.0:
        return 0.5 * np.sum((X - Y) ** 2, axis=1)
    if d == 1.0:
        out = np.full(len(X), np.nan)
        ok = (X > 0.0).all(axis=1) & (Y > 0.0).all(axis=1)
        if ok.any():
            out[ok] = np.sum(X[ok] * np.log1p((X[ok] - Y[ok]) / Y[ok]), axis=1)
        return out
    return _intermediate_terms(d, X, Y).sum(axis=1)


def _chi_squared_rows(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    out = np.full(len(X), np.nan)
    ok = (X > 0.0).all(axis=1)
    if ok.any():
        out[ok] = np.sum((X[ok] - Y[ok]) ** 2 / X[ok], axis=1)
    return out


# ---------------------------------------------------------------------------
# expected next state
# ---------------------------------------------------------------------------


def _expected_map(model: ProcessModel, abar: np.ndarray) -> np.ndarray:
    """One-step expected distribution of the incentive process (continuous)."""
    p = selection_probabilities(
        model.incentive, model.mutation, abar, N=model.N, degenerate=model.degenerate
    )
    return ((model.N - 1) * np.asarray(abar, dtype=float) + p) / model.N


def expected_state(model: ProcessModel, state) -> np.ndarray:
    """Expected distribution after one step of the process, E(abar).

    Incentive process: E = ((N-1) abar + p(abar)) / N. Wright-Fisher:
    E = p(abar). k-fold: the incentive map iterated k times. Variable
    population: expected counts over all targets normalized by the
    expected total.
    """
    state = tuple(int(c) for c in state)
    if model.kind == "variable-population":
        from .processes import variable_population_row

        row = variable_population_row(model, state)
        counts = np.array([t for t, _ in row.entries], dtype=float)
        probs = np.array([p for _, p in row.entries])
        expected_counts = probs @ counts
        return expected_counts / expected_counts.sum()
    abar = np.array(state, dtype=float) / model.N
    if model.kind == "wright-fisher":
        return selection_probabilities(
            model.incentive, model.mutation, abar, N=model.N, degenerate=model.degenerate
        )
    if model.kind == "k-fold":
        for _ in range(model.k):
            abar = _expected_map(model, abar)
        return abar
    return _expected_map(model, abar)


def expected_state_batch(model: ProcessModel, kernel) -> np.ndarray:
    """E(abar) at every state of the kernel's space, (S, n)."""
    space = kernel.space
    if model.kind == "variable-population":
        counts = space.counts.astype(float)
        expected_counts = kernel.matrix @ counts
        return expected_counts / expected_counts.sum(axis=1, keepdims=True)
    if model.kind == "cycle-graph":
        raise ValueError("expected distribution is not defined for cycle configurations")
    X = np.array(space.abar, dtype=float)
    if model.kind == "wright-fisher":
        return _batch_selection(model, X)
    reps = model.k if model.kind == "k-fold" else 1
    for _ in range(reps):
        X = ((model.N - 1) * X + _batch_selection(model, X)) / model.N
    return X


def _batch_selection(model: ProcessModel, X: np.ndarray) -> np.ndarray:
    if model.mutation.is_constant:
        return selection_probabilities(
            model.incentive, model.mutation, X, N=model.N, degenerate=model.degenerate
        )
    return np.vstack([
        selection_probabilities(
            model.incentive, model.mutation, X[k], N=model.N, degenerate=model.degenerate
        )
        for k in range(len(X))
    ])


def expected_from_row(row, N: int) -> np.ndarray:
    """E(abar) recomputed from an explicit transition row (the neighbor-
    weighted sum form); cross-checks the closed form."""
    counts = np.array([t for t, _ in row.entries], dtype=float)
    probs = np.array([p for _, p in row.entries])
    return (probs @ counts) / N


# ---------------------------------------------------------------------------
# ISS candidates
# ---------------------------------------------------------------------------


def iss_residuals(model: ProcessModel, space) -> np.ndarray:
    """L1 residual ||p(abar) - abar||_1 per state of the space."""
    X = np.array(space.abar, dtype=float)
    P = _batch_selection(model, X)
    return np.abs(P - X).sum(axis=1)


def iss_candidates(
    model: ProcessModel,
    space,
    tolerance: Optional[float] = None,
    refine: bool = False,
):
    """Lattice states that locally minimize the ISS residual, below tolerance.

    Returns (candidates, residuals, roots): candidate states, the residual
    array, and (when refine is set on a two-type model) continuous roots of
    p_1(x) - x = 0 located by bisection between lattice sign changes.
    Existence is not guaranteed; the candidate list may be empty.
    """
    if tolerance is None:
        tolerance = model.n / model.N
    res = iss_residuals(model, space)
    report = find_extrema(res, space=space)
    cands = [space.states[k] for k in report.minima if res[k] < tolerance]
    roots = refine_candidates(model) if refine and model.n == 2 else None
    return cands, res, roots


def refine_candidates(model: ProcessModel, grid: Optional[int] = None, tol: float = 1e-12):
    """Continuous ISS roots for two-type models: solve p_1(x) = x by bisection."""

    def g(x: float) -> float:
        abar = np.array([x, 1.0 - x])
        p = selection_probabilities(
            model.incentive, model.mutation, abar, N=model.N, degenerate=model.degenerate
        )
        return float(p[0] - x)

    m = grid or max(model.N, 64)
    xs = np.linspace(0.0, 1.0, m + 1)[1:-1]  # interior grid
    vals = [g(x) for x in xs]
    roots = []
    for i in range(len(xs) - 1):
        a, b, ga, gb = xs[i], xs[i + 1], vals[i], vals[i + 1]
        if ga == 0.0:
            roots.append(float(a))
            continue
        if ga * gb < 0.0:
            lo, hi, glo = a, b, ga
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                gm = g(mid)
                if gm == 0.0:
                    lo = hi = mid
                elif glo * gm < 0.0:
                    hi = mid
                else:
                    lo, glo = mid, gm
            roots.append(0.5 * (lo + hi))
    if vals and vals[-1] == 0.0:
        roots.append(float(xs[-1]))
    return roots


# ---------------------------------------------------------------------------
# stability report
# ---------------------------------------------------------------------------


@dataclass
class StabilityReport:
    """Joined per-state stability diagnostics plus summary lists."""

    model: ProcessModel
    kernel: TransitionKernel
    stationary: StationaryResult
    extrema: ExtremumReport
    expected: np.ndarray
    divergences: dict
    chi2: np.ndarray
    iss_residual: np.ndarray
    iss_candidates: list
    continuous_roots: Optional[list]
    dd_minima: dict
    flow_residual: np.ndarray

    @property
    def states(self):
        return self.kernel.states

    @property
    def stationary_stable(self) -> list:
        """States where the stationary distribution is locally maximal."""
        return [self.states[k] for k in self.extrema.maxima]

    @property
    def stationary_minima(self) -> list:
        return [self.states[k] for k in self.extrema.minima]

    def dd_min_states(self, d: float) -> list:
        return [self.states[k] for k in self.dd_minima[d].minima]


def stability_report(
    model: ProcessModel,
    kernel=None,
    method: str = "auto",
    tol: float = 1e-13,
    max_iters: Optional[int] = None,
    divergences: Sequence[float] = (0.0, 0.5, 1.0),
    iss_tolerance: Optional[float] = None,
    refine: bool = False,
    stationary: Optional[StationaryResult] = None,
) -> StabilityReport:
    """Solve the chain and join every per-state stability diagnostic.

    Propagates solver non-convergence. Divergence columns are NaN where the
    quantity is undefined (relative entropy off the interior).
    """
    if model.kind == "cycle-graph":
        raise ValueError(
            "stability reports are for simplex-state processes; "
            "use the cycle space's consolidation helpers directly"
        )
    if kernel is None:
        kernel = build_kernel(model)
    if max_iters is None:
        max_iters = 100_000 if model.kind == "wright-fisher" else 1_000_000
    if stationary is None:
        stationary = solve_stationary(kernel, method=method, tol=tol, max_iters=max_iters)
    s = stationary.probabilities
    extrema = find_extrema(s, kernel=kernel)
    expected = expected_state_batch(model, kernel)
    X = np.array(kernel.space.abar, dtype=float)
    dd = {float(d): _divergence_rows(float(d), expected, X) for d in divergences}
    chi2 = _chi_squared_rows(expected, X)
    cands, iss_res, roots = iss_candidates(
        model, kernel.space, tolerance=iss_tolerance, refine=refine
    )
    dd_minima = {d: find_extrema(vals, space=kernel.space) for d, vals in dd.items()}
    return StabilityReport(
        model=model,
        kernel=kernel,
        stationary=stationary,
        extrema=extrema,
        expected=expected,
        divergences=dd,
        chi2=chi2,
        iss_residual=iss_res,
        iss_candidates=cands,
        continuous_roots=roots,
        dd_minima=dd_minima,
        flow_residual=flow_residuals(kernel),
    )


# ---------------------------------------------------------------------------
# theorem harness
# ---------------------------------------------------------------------------


@dataclass
class TheoremVerdict:
    """Outcome of checking stationary extrema against divergence minima.

    Violations are data, not errors: each entry records an extremum with no
    divergence minimum within the radius, or a flow residual above the
    bound.
    """

    label: str
    passed: bool
    checked: int
    violations: list = field(default_factory=list)
    worst_offset: int = 0
    worst_flow: float = 0.0

    def __bool__(self):
        return self.passed


def _theorem_label(model: ProcessModel) -> str:
    if model.kind == "wright-fisher":
        return "wright-fisher-global-max"
    if model.kind == "k-fold":
        return "k-fold-extrema"
    if model.n == 2 and model.kind == "incentive":
        return "two-type-extrema"
    return "flow-neutral-extrema"


def theorem_check(
    report: StabilityReport,
    radius: int = 1,
    d_boundary: float = 0.0,
    d_interior: float = 1.0,
    flow_tol: Optional[float] = None,
    include_minima: bool = True,
) -> TheoremVerdict:
    """Check that stationary extrema sit on divergence minima.

    Every stationary local max (and min, unless disabled) must lie within
    the given lattice radius of a local minimum of D_{d_boundary}; interior
    extrema are additionally checked against D_{d_interior} (relative
    entropy by default, which is undefined on the boundary). Flow residuals
    at extrema are compared against flow_tol when given. Only locations are
    compared, never magnitudes.
    """
    space = report.kernel.space
    extrema = list(report.extrema.maxima)
    if include_minima:
        extrema += list(report.extrema.minima)
    boundary = getattr(space, "boundary_mask", np.zeros(space.size, dtype=bool))

    def offset_to(minima: list, k: int) -> int:
        if not minima:
            return np.iinfo(np.int32).max
        return min(space.distance(k, m) for m in minima)

    violations = []
    worst_offset = 0
    worst_flow = 0.0
    for k in extrema:
        d_sel = d_boundary if boundary[k] else d_interior
        if d_sel not in report.dd_minima:
            d_sel = d_boundary
        off = offset_to(report.dd_minima[d_sel].minima, k)
        worst_offset = max(worst_offset, off if off < np.iinfo(np.int32).max else radius + 1)
        if off > radius:
            violations.append({
                "state": space.states[k],
                "kind": "no-divergence-minimum",
                "d": d_sel,
                "offset": None if off == np.iinfo(np.int32).max else int(off),
            })
        flow = float(report.flow_residual[k])
        worst_flow = max(worst_flow, flow)
        if flow_tol is not None and flow > flow_tol:
            violations.append({
                "state": space.states[k],
                "kind": "flow-residual",
                "flow": flow,
            })
    return TheoremVerdict(
        label=_theorem_label(report.model),
        passed=not violations,
        checked=len(extrema),
        violations=violations,
        worst_offset=int(worst_offset),
        worst_flow=worst_flow,
    )
