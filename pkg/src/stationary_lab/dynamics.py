"""Fitness landscapes, incentive functions, mutation rules, and the
incentive-proportionate selection distribution p(abar).

Incentive kinds
---------------
projection      phi_i = f_i(abar)
replicator      phi_i = abar_i * f_i(abar)
q-replicator    phi_i = abar_i**q * f_i(abar)
q-fermi         phi_i = abar_i**q * exp(beta*f_i) / sum_j abar_j**q * exp(beta*f_j)
best-reply      phi_i = abar_i * BR_i(abar), BR uniform over the argmax of f

The selection distribution combines the normalized incentive with a
row-stochastic mutation matrix M: p_i = sum_k phibar_k * M[k, i].
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

__all__ = [
    "FitnessLandscape",
    "Incentive",
    "MutationRule",
    "DegenerateIncentiveError",
    "incentive_values",
    "selection_distribution",
    "fitness_of_abar",
    "incentive_phi",
    "selection_probabilities",
]

INCENTIVE_KINDS = ("projection", "replicator", "q-replicator", "q-fermi", "best-reply")

#: Row-stochasticity slack for mutation matrices and probability outputs.
PROB_TOL = 1e-12


class DegenerateIncentiveError(ValueError):
    """Incentive vector unusable: negative entries, or all-zero with no fallback."""


@dataclass(frozen=True)
class FitnessLandscape:
    """Game-matrix fitness landscape f(abar).

    With self-interaction (the default), f(abar) = A @ abar. Without
    self-interaction an individual does not play against itself:
    f_i(a) = (sum_j A[i,j]*a_j - A[i,i]) / (N - 1), which reproduces the
    standard two-type formulas f_1(i) = (a(i-1) + b(N-i))/(N-1) and
    f_2(i) = (c*i + d(N-i-1))/(N-1).
    """

    matrix: np.ndarray
    self_interaction: bool = True

    def __post_init__(self):
        A = np.asarray(self.matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"game matrix must be square, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ValueError("game matrix entries must be finite")
        object.__setattr__(self, "matrix", A)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, abar: np.ndarray, N: Optional[int] = None) -> np.ndarray:
        """Fitness vector at distribution abar (batched if abar is 2-D)."""
        abar = np.asarray(abar, dtype=float)
        if self.self_interaction:
            return abar @ self.matrix.T
        if N is None:
            raise ValueError("population size N required without self-interaction")
        a = abar * N
        return (a @ self.matrix.T - np.diag(self.matrix)) / (N - 1)


def neutral_landscape(n: int) -> FitnessLandscape:
    """Constant landscape f = 1 (the neutral game, all payoffs one)."""
    return FitnessLandscape(np.ones((n, n)))


@dataclass(frozen=True)
class Incentive:
    """An incentive kind bound to a fitness landscape.

    Parameters q (q-replicator, q-fermi) and beta (q-fermi selection
    intensity) are ignored by kinds that do not use them. q-replicator at
    q=1 is the replicator incentive; q=0 is the projection incentive;
    q-fermi at q=0 is the logit incentive.
    """

    kind: str
    landscape: FitnessLandscape
    q: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.kind not in INCENTIVE_KINDS:
            raise ValueError(
                f"unknown incentive kind {self.kind!r}; expected one of {INCENTIVE_KINDS}"
            )

    @property
    def n(self) -> int:
        return self.landscape.n

    def with_params(self, **kw) -> "Incentive":
        return replace(self, **kw)


def _uniform_matrix(mu: float, n: int) -> np.ndarray:
    M = np.full((n, n), mu / (n - 1))
    np.fill_diagonal(M, 1.0 - mu)
    return M


def _check_row_stochastic(M: np.ndarray):
    if np.any(M < -PROB_TOL) or np.any(M > 1.0 + PROB_TOL):
        raise ValueError("mutation matrix entries must lie in [0, 1]")
    rowsums = M.sum(axis=1)
    if np.max(np.abs(rowsums - 1.0)) > PROB_TOL:
        raise ValueError(f"mutation matrix rows must sum to 1, got sums {rowsums}")


@dataclass(frozen=True)
class MutationRule:
    """Map from a population distribution to a row-stochastic mutation matrix.

    Constant rules wrap a fixed matrix; state-dependent rules wrap a
    callable abar -> matrix. Every produced matrix is validated to be
    row-stochastic within 1e-12.
    """

    constant: Optional[np.ndarray] = None
    state_dependent: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if (self.constant is None) == (self.state_dependent is None):
            raise ValueError("exactly one of constant / state_dependent required")
        if self.constant is not None:
            M = np.asarray(self.constant, dtype=float)
            _check_row_stochastic(M)
            object.__setattr__(self, "constant", M)

    @classmethod
    def uniform(cls, mu: float, n: int) -> "MutationRule":
        """Uniform rule: M_ij = mu/(n-1) off-diagonal, M_ii = 1 - mu."""
        if not 0.0 <= mu <= 1.0:
            raise ValueError(f"mutation rate must lie in [0, 1], got {mu}")
        return cls(constant=_uniform_matrix(mu, n), label=f"uniform(mu={mu:g})")

    @classmethod
    def pairwise(cls, mu12: float, mu21: float) -> "MutationRule":
        """Two-type rule with asymmetric rates 1->2 and 2->1."""
        M = np.array([[1.0 - mu12, mu12], [mu21, 1.0 - mu21]])
        return cls(constant=M, label=f"pairwise(mu12={mu12:g}, mu21={mu21:g})")

    @classmethod
    def from_matrix(cls, M) -> "MutationRule":
        return cls(constant=np.asarray(M, dtype=float), label="matrix")

    @classmethod
    def from_function(cls, fn, label="state-dependent") -> "MutationRule":
        return cls(state_dependent=fn, label=label)

    def matrix(self, abar=None) -> np.ndarray:
        if self.constant is not None:
            return self.constant
        M = np.asarray(self.state_dependent(np.asarray(abar, dtype=float)), dtype=float)
        _check_row_stochastic(M)
        return M

    @property
    def is_constant(self) -> bool:
        return self.constant is not None


# ---------------------------------------------------------------------------
# incentive evaluation on continuous distributions
# ---------------------------------------------------------------------------


def fitness_of_abar(inc: Incentive, abar: np.ndarray, N: Optional[int] = None) -> np.ndarray:
    return inc.landscape(abar, N=N)


def _power(abar, q):
    # np.power gives 0**0 = 1, the projection convention on the boundary.
    if q < 0 and np.any(abar <= 0.0):
        raise ValueError("q-replicator with q < 0 requires an interior state")
    return np.power(abar, q)


def incentive_phi(inc: Incentive, abar: np.ndarray, N: Optional[int] = None) -> np.ndarray:
    """Raw incentive vector phi(abar); batched when abar is 2-D.

    q-fermi output is already normalized (rows sum to 1); other kinds are
    unnormalized. Raises if the result is non-finite.
    """
    abar = np.asarray(abar, dtype=float)
    f = fitness_of_abar(inc, abar, N=N)
    if inc.kind == "projection":
        phi = np.array(f, copy=True)
    elif inc.kind == "replicator":
        phi = abar * f
    elif inc.kind == "q-replicator":
        phi = _power(abar, inc.q) * f
    elif inc.kind == "q-fermi":
        z = inc.beta * f
        z = z - z.max(axis=-1, keepdims=True)  # overflow guard, cancels in the ratio
        w = _power(abar, inc.q) * np.exp(z)
        phi = w / w.sum(axis=-1, keepdims=True)
    elif inc.kind == "best-reply":
        fmax = f.max(axis=-1, keepdims=True)
        ties = (f == fmax).astype(float)
        br = ties / ties.sum(axis=-1, keepdims=True)
        phi = abar * br
    else:  # pragma: no cover - guarded in __post_init__
        raise ValueError(inc.kind)
    if not np.all(np.isfinite(phi)):
        raise DegenerateIncentiveError(
            f"{inc.kind} incentive produced non-finite values at abar={abar}"
        )
    return phi


def _normalize_phi(inc: Incentive, abar: np.ndarray, phi: np.ndarray,
                   degenerate: str) -> np.ndarray:
    """Normalize phi to phibar, applying the configured degenerate fallback."""
    if np.any(phi < -PROB_TOL):
        raise DegenerateIncentiveError(
            f"{inc.kind} incentive produced negative values at abar={abar}"
        )
    phi = np.maximum(phi, 0.0)
    total = phi.sum(axis=-1, keepdims=True)
    if phi.ndim == 1:
        if total[0] > 0.0:
            return phi / total
        if inc.kind == "best-reply":
            # no best-response type present: uniform over the argmax set
            f = fitness_of_abar(inc, abar)
            ties = (f == f.max()).astype(float)
            return ties / ties.sum()
        if degenerate == "population":
            return np.array(abar, dtype=float)
        raise DegenerateIncentiveError(
            f"all-zero {inc.kind} incentive at abar={abar} and no fallback configured"
        )
    # batched
    out = np.empty_like(phi)
    ok = total[:, 0] > 0.0
    out[ok] = phi[ok] / total[ok]
    for i in np.nonzero(~ok)[0]:
        out[i] = _normalize_phi(inc, abar[i], phi[i], degenerate)
    return out


def selection_probabilities(
    inc: Incentive,
    rule: MutationRule,
    abar: np.ndarray,
    N: Optional[int] = None,
    degenerate: str = "population",
) -> np.ndarray:
    """Selection distribution p(abar) = phibar(abar) @ M(abar).

    Works on a single distribution or a batch (2-D abar; constant mutation
    rules only). `degenerate` controls the fallback at states where the
    incentive sums to zero: "population" reproduces proportionally to
    abar, "error" raises DegenerateIncentiveError.
    """
    abar = np.asarray(abar, dtype=float)
    phi = incentive_phi(inc, abar, N=N)
    phibar = _normalize_phi(inc, abar, phi, degenerate)
    if abar.ndim == 1:
        p = phibar @ rule.matrix(abar)
    else:
        if not rule.is_constant:
            p = np.stack([phibar[i] @ rule.matrix(abar[i]) for i in range(len(abar))])
        else:
            p = phibar @ rule.constant
    _validate_distribution(p)
    return p


def _validate_distribution(p: np.ndarray):
    if np.any(p < -PROB_TOL) or np.any(p > 1.0 + PROB_TOL):
        raise DegenerateIncentiveError(f"selection probabilities out of [0, 1]: {p}")
    sums = p.sum(axis=-1)
    if np.max(np.abs(sums - 1.0)) > PROB_TOL:
        raise DegenerateIncentiveError(f"selection probabilities do not sum to 1: {p}")


# ---------------------------------------------------------------------------
# state-tuple wrappers
# ---------------------------------------------------------------------------


def _as_abar(state):
    state = np.asarray(state, dtype=float)
    N = state.sum()
    return state / N, int(round(N))


def incentive_values(inc: Incentive, state) -> np.ndarray:
    """phi at an integer population state (per-type count vector)."""
    abar, N = _as_abar(state)
    return incentive_phi(inc, abar, N=N)


def selection_distribution(inc: Incentive, rule: MutationRule, state,
                           degenerate: str = "population") -> np.ndarray:
    """p(abar) at an integer population state."""
    abar, N = _as_abar(state)
    return selection_probabilities(inc, rule, abar, N=N, degenerate=degenerate)
