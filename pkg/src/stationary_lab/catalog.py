"""Named, versioned configurations: every game, parameter set, and figure
configuration used by the test battery, addressable by id from the CLI and
from tests.

Three-type entries cover the 48 canonical matrices of Bomze's
classification of 3x3 replicator phase portraits (Bomze 1983, with the 1995
additions). Entries whose matrices appear in figure captions carry
provenance "printed" and are pinned by tests; the remainder are transcribed
from the classification and carry provenance "transcribed".
"""

from __future__ import annotations

import difflib
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .dynamics import FitnessLandscape, Incentive, MutationRule
from .processes import ProcessModel, build_kernel, step_birth_curve

__all__ = ["CatalogEntry", "UnknownCatalogIdError", "get", "list_entries", "ids"]


class UnknownCatalogIdError(KeyError):
    """Unknown catalog id, with near matches for the error message."""

    def __init__(self, entry_id: str, suggestions):
        hint = f"; did you mean {', '.join(suggestions)}?" if suggestions else ""
        super().__init__(f"unknown catalog id {entry_id!r}{hint}")
        self.entry_id = entry_id
        self.suggestions = suggestions


@dataclass(frozen=True)
class CatalogEntry:
    """One named configuration: game, incentive, mutation, size, process."""

    id: str
    game: tuple
    incentive_kind: str = "replicator"
    q: float = 1.0
    beta: float = 1.0
    N: int = 100
    process: str = "incentive"
    #: mutation spec: {"uniform": mu} | {"pairwise": [mu12, mu21]} |
    #: {"matrix": rows} | {"scale": c} meaning mu = c * (3/2) / N
    mutation: dict = field(default_factory=lambda: {"uniform": 0.001})
    k: int = 1
    self_interaction: bool = True
    figures: tuple = ()
    provenance: str = "printed"
    note: str = ""

    @property
    def n(self) -> int:
        return len(self.game)

    def resolved_mu(self) -> Optional[float]:
        if "uniform" in self.mutation:
            return float(self.mutation["uniform"])
        if "scale" in self.mutation:
            return float(self.mutation["scale"]) * 1.5 / self.N
        return None

    def mutation_rule(self) -> MutationRule:
        m = self.mutation
        if "uniform" in m or "scale" in m:
            return MutationRule.uniform(self.resolved_mu(), self.n)
        if "pairwise" in m:
            mu12, mu21 = m["pairwise"]
            return MutationRule.pairwise(mu12, mu21)
        if "matrix" in m:
            return MutationRule.from_matrix(m["matrix"])
        raise ValueError(f"unrecognized mutation spec {m!r}")

    def incentive(self) -> Incentive:
        landscape = FitnessLandscape(
            np.array(self.game, dtype=float), self_interaction=self.self_interaction
        )
        return Incentive(self.incentive_kind, landscape, q=self.q, beta=self.beta)

    def model(self, **overrides) -> ProcessModel:
        entry = self.override(**overrides) if overrides else self
        kw = {}
        if entry.process == "variable-population":
            kw["birth_curve"] = step_birth_curve(entry.N)
        return ProcessModel(
            kind=entry.process,
            incentive=entry.incentive(),
            mutation=entry.mutation_rule(),
            N=entry.N,
            k=entry.k,
            **kw,
        )

    def build(self, **overrides):
        return build_kernel(self.model(**overrides))

    def override(self, **kw) -> "CatalogEntry":
        """Copy with replaced fields; `mu` is shorthand for uniform mutation."""
        if "mu" in kw:
            kw["mutation"] = {"uniform": kw.pop("mu")}
        return replace(self, **kw)

    def to_config(self) -> dict:
        return {
            "id": self.id,
            "game": [list(row) for row in self.game],
            "incentive": self.incentive_kind,
            "q": self.q,
            "beta": self.beta,
            "N": self.N,
            "process": self.process,
            "mutation": dict(self.mutation),
            "k": self.k,
            "self_interaction": self.self_interaction,
            "figures": list(self.figures),
            "provenance": self.provenance,
            "note": self.note,
        }

    @classmethod
    def from_config(cls, cfg: dict) -> "CatalogEntry":
        return cls(
            id=cfg["id"],
            game=tuple(tuple(row) for row in cfg["game"]),
            incentive_kind=cfg.get("incentive", "replicator"),
            q=cfg.get("q", 1.0),
            beta=cfg.get("beta", 1.0),
            N=cfg.get("N", 100),
            process=cfg.get("process", "incentive"),
            mutation=dict(cfg.get("mutation", {"uniform": 0.001})),
            k=cfg.get("k", 1),
            self_interaction=cfg.get("self_interaction", True),
            figures=tuple(cfg.get("figures", ())),
            provenance=cfg.get("provenance", "printed"),
            note=cfg.get("note", ""),
        )


# ---------------------------------------------------------------------------
# Bomze classification battery (3x3, zero diagonal).
#
# Entries 2, 7, 17, 20, 47 are printed in figure captions and are pinned by
# tests; the rest are transcribed from the cited classification and carry
# provenance "transcribed".
# ---------------------------------------------------------------------------

_PRINTED_BOMZE = {2, 7, 17, 20, 47}

_BOMZE = {
    1: ((0, 1, -1), (-1, 0, 1), (1, -1, 0)),
    2: ((0, 0, 1), (0, 0, 1), (1, 0, 0)),
    3: ((0, 0, 1), (0, 0, -1), (-1, 0, 0)),
    4: ((0, 0, 1), (0, 0, -1), (1, 0, 0)),
    5: ((0, 0, -1), (0, 0, -1), (-1, 0, 0)),
    6: ((0, 1, 1), (1, 0, 1), (-1, 1, 0)),
    7: ((0, 1, 1), (1, 0, 1), (1, 1, 0)),
    8: ((0, 1, -1), (1, 0, 1), (1, 1, 0)),
    9: ((0, 1, 1), (-1, 0, 1), (1, -1, 0)),
    10: ((0, -1, -1), (-1, 0, -1), (-1, -1, 0)),
    11: ((0, 1, 1), (1, 0, -1), (1, -1, 0)),
    12: ((0, 1, -1), (1, 0, -1), (-1, -1, 0)),
    13: ((0, 1, 1), (-1, 0, 1), (-1, -1, 0)),
    14: ((0, 1, -1), (-1, 0, -1), (1, 1, 0)),
    15: ((0, -1, 1), (1, 0, 1), (-1, 1, 0)),
    16: ((0, -1, 1), (1, 0, -1), (-1, 2, 0)),
    17: ((0, -1, 1), (1, 0, -1), (-1, 1, 0)),
    18: ((0, -2, 1), (1, 0, -1), (-1, 1, 0)),
    19: ((0, -1, 2), (1, 0, -1), (-1, 1, 0)),
    20: ((0, 0, 0), (0, 0, -1), (0, -1, 0)),
    21: ((0, 0, 0), (0, 0, 1), (0, 1, 0)),
    22: ((0, 0, 0), (0, 0, 1), (0, -1, 0)),
    23: ((0, 0, 0), (0, 0, -1), (0, 1, 0)),
    24: ((0, 0, 0), (1, 0, 1), (1, 1, 0)),
    25: ((0, 0, 0), (-1, 0, 1), (1, 1, 0)),
    26: ((0, 0, 0), (-1, 0, -1), (1, 1, 0)),
    27: ((0, 0, 0), (1, 0, 1), (-1, 1, 0)),
    28: ((0, 0, 0), (-1, 0, 1), (-1, 1, 0)),
    29: ((0, 0, 0), (-1, 0, -1), (-1, 1, 0)),
    30: ((0, 0, 0), (1, 0, -1), (1, -1, 0)),
    31: ((0, 0, 0), (-1, 0, -1), (-1, -1, 0)),
    32: ((0, 0, 1), (0, 0, 1), (-1, 0, 0)),
    33: ((0, 0, -1), (0, 0, 1), (1, 0, 0)),
    34: ((0, 0, -1), (0, 0, -1), (1, 0, 0)),
    35: ((0, 1, 1), (1, 0, 1), (1, -1, 0)),
    36: ((0, 1, 1), (1, 0, -1), (-1, 1, 0)),
    37: ((0, 1, 1), (-1, 0, -1), (-1, 1, 0)),
    38: ((0, 1, 1), (-1, 0, -1), (1, -1, 0)),
    39: ((0, -1, 1), (-1, 0, 1), (1, 1, 0)),
    40: ((0, -1, -1), (1, 0, 1), (1, -1, 0)),
    41: ((0, -1, -1), (-1, 0, 1), (1, 1, 0)),
    42: ((0, -1, -1), (1, 0, -1), (-1, 1, 0)),
    43: ((0, 2, 1), (2, 0, 1), (1, 1, 0)),
    44: ((0, 2, -1), (2, 0, 1), (1, 1, 0)),
    45: ((0, 2, 1), (2, 0, -1), (1, -1, 0)),
    46: ((0, 2, 0), (2, 0, 1), (1, 1, 0)),
    47: ((0, 2, 0), (2, 0, 0), (1, 1, 0)),
    48: ((0, 2, -1), (2, 0, -1), (1, 1, 0)),
}

_RSP = ((0, -1, 1), (1, 0, -1), (-1, 1, 0))

_M4 = ((0, 1, 1, 1), (1, 0, 1, 1), (1, 1, 0, 1), (0, 0, 0, 1))


def _bomze_entries() -> list:
    entries = []
    for k, game in sorted(_BOMZE.items()):
        figures = ("fig4", "fig7") if k in (2, 20, 47) else ()
        entries.append(CatalogEntry(
            id=f"bomze-{k}",
            game=game,
            incentive_kind="q-fermi",
            q=1.0,
            beta=1.0,
            N=60,
            mutation={"scale": 1.0},
            figures=figures,
            provenance="printed" if k in _PRINTED_BOMZE else "transcribed",
            note=f"classification portrait {k}",
        ))
    return entries


def _named_entries() -> list:
    return [
        CatalogEntry(
            id="closed-form-chain",
            game=((0, 1), (1, 0)),
            incentive_kind="replicator",
            N=10,
            mutation={"uniform": 0.1},
            note="two-type chain with a closed-form stationary distribution",
        ),
        CatalogEntry(
            id="fig2",
            game=((1, 2), (3, 1)),
            incentive_kind="replicator",
            N=100,
            mutation={"uniform": 0.001},
            figures=("fig2",),
            note="interior ESS near one third; transitions, relative entropy, stationary panels",
        ),
        CatalogEntry(
            id="coordination-two-maxima",
            game=((1, 0), (0, 1)),
            incentive_kind="replicator",
            N=100,
            mutation={"uniform": 6 / 25},
            note="large mutation forces two interior stationary maxima at 2/5 and 3/5",
        ),
        CatalogEntry(
            id="moran-r2",
            game=((2, 2), (1, 1)),
            incentive_kind="q-replicator",
            q=1.0,
            N=100,
            mutation={"uniform": 0.001},
            note="constant landscape with relative fitness 2; vary q across {0, 1, 2}",
        ),
        CatalogEntry(
            id="neutral-two-maxima",
            game=((1, 1), (1, 1)),
            incentive_kind="q-replicator",
            q=1.5,
            N=50,
            mutation={"uniform": 0.1},
            note="neutral landscape, q=1.5: two interior stationary maxima",
        ),
        CatalogEntry(
            id="mixed-boundary-interior",
            game=((20, 1), (7, 10)),
            incentive_kind="q-replicator",
            q=0.5,
            N=50,
            mutation={"pairwise": (0.1, 0.01)},
            note="asymmetric mutation: one interior and one boundary stationary maximum",
        ),
        CatalogEntry(
            id="rsp",
            game=_RSP,
            incentive_kind="q-fermi",
            q=1.0,
            beta=1.0,
            N=60,
            mutation={"scale": 1.0},
            figures=("fig5",),
            note="zero-sum rock-scissors-paper; not detail-balanced",
        ),
        CatalogEntry(
            id="bomze-7-as-printed",
            game=_BOMZE[7],
            incentive_kind="q-fermi",
            q=1.0,
            beta=0.1,
            N=60,
            mutation={"scale": 1.0},
            figures=("fig1",),
            note="all-ones off-diagonal matrix; stationary maximal at the barycenter",
        ),
        CatalogEntry(
            id="m4",
            game=_M4,
            incentive_kind="q-fermi",
            q=1.0,
            beta=1.0,
            N=40,
            mutation={"uniform": 1 / 40},
            figures=("fig6",),
            note="four-type example; plot boundary faces, the a4=0 face is distinct",
        ),
        CatalogEntry(
            id="wf-hump",
            game=((1, 2), (2, 1)),
            incentive_kind="q-fermi",
            q=1.0,
            beta=1.0,
            N=100,
            process="wright-fisher",
            mutation={"scale": 1.0},
            note="two-type Wright-Fisher with a central stationary mode",
        ),
        CatalogEntry(
            id="variable-pop",
            game=((1, 2), (2, 1)),
            incentive_kind="replicator",
            N=40,
            process="variable-population",
            mutation={"uniform": 0.01},
            figures=("fig8",),
            note="step birth curve; divergence minima along the balanced line",
        ),
        CatalogEntry(
            id="cycle-2x2",
            game=((1, 2), (2, 1)),
            incentive_kind="replicator",
            N=2,
            process="cycle-graph",
            mutation={"uniform": 1 / 3},
            note="smallest cycle; mixed configuration stationary stable at mu = 1/3",
        ),
    ]


_ENTRIES = {e.id: e for e in _named_entries() + _bomze_entries()}
assert len(_ENTRIES) == len(_named_entries()) + len(_bomze_entries())


def ids() -> list:
    return sorted(_ENTRIES)


def get(entry_id: str) -> CatalogEntry:
    """Look up an entry; unknown ids raise with near matches listed."""
    try:
        return _ENTRIES[entry_id]
    except KeyError:
        suggestions = difflib.get_close_matches(entry_id, _ENTRIES, n=3)
        raise UnknownCatalogIdError(entry_id, suggestions) from None


def list_entries(
    n: Optional[int] = None,
    process: Optional[str] = None,
    figure: Optional[str] = None,
) -> list:
    """Entries in deterministic (id-sorted) order, optionally filtered."""
    out = []
    for entry_id in ids():
        e = _ENTRIES[entry_id]
        if n is not None and e.n != n:
            continue
        if process is not None and e.process != process:
            continue
        if figure is not None and figure not in e.figures:
            continue
        out.append(e)
    return out
