"""Command-line front end.

Commands: stationary | stability | theorem-check | catalog | transitions.
Per-state results go to CSV (one-line header, 17-significant-digit floats,
byte-identical across runs for identical configs); summaries to JSON.
Exit codes: 0 success, 1 usage error, 2 solver non-convergence.
"""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from . import catalog as _catalog
from .dynamics import FitnessLandscape, Incentive, MutationRule
from .processes import ProcessModel, build_kernel, step_birth_curve
from .stability import stability_report, theorem_check
from .stationary import NonConvergenceError, find_extrema, flow_residuals, solve_stationary

USAGE_EXIT = 1
NONCONVERGENCE_EXIT = 2


def _fail_usage(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(USAGE_EXIT)


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and not np.isfinite(x)):
        return ""
    return f"{x:.17g}"


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(row))
    text = "\n".join(lines) + "\n"
    if path == "-":
        click.echo(text, nl=False)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _threads_default():
    return int(os.environ.get("STATIONARY_LAB_THREADS", "1"))


_PROCESS_ALIASES = {
    "incentive": "incentive",
    "moran": "incentive",
    "wf": "wright-fisher",
    "wright-fisher": "wright-fisher",
    "k-fold": "k-fold",
    "kfold": "k-fold",
    "variable": "variable-population",
    "variable-population": "variable-population",
    "cycle": "cycle-graph",
    "cycle-graph": "cycle-graph",
}


def _common_options(fn):
    opts = [
        click.option("--catalog", "catalog_id", default=None, help="catalog entry id"),
        click.option("--config", "config_path", default=None,
                     help="JSON config file; flags override file values"),
        click.option("--game", default=None, help="inline game matrix as JSON rows"),
        click.option("--process", default=None, help="|".join(sorted(set(_PROCESS_ALIASES)))),
        click.option("--N", "N", type=int, default=None),
        click.option("--incentive", "incentive_kind", default=None,
                     help="projection|replicator|q-replicator|q-fermi|best-reply"),
        click.option("--q", type=float, default=None),
        click.option("--beta", type=float, default=None),
        click.option("--mu", type=float, default=None, help="uniform mutation rate"),
        click.option("--mu12", type=float, default=None),
        click.option("--mu21", type=float, default=None),
        click.option("--mutation-matrix", default=None, help="full matrix as JSON rows"),
        click.option("--mu-scale", type=float, default=None,
                     help="c meaning mu = c * (3/2) / N"),
        click.option("--mu-exponent", type=float, default=None,
                     help="e meaning (2/3) mu = N^-e"),
        click.option("--k", type=int, default=None, help="fold count for k-fold"),
        click.option("--no-self-interaction", is_flag=True, default=False),
        click.option("--solver", type=click.Choice(["auto", "exact", "power"]), default="auto"),
        click.option("--tol", type=float, default=1e-13),
        click.option("--max-iters", type=int, default=None),
        click.option("--allow-absorbing", is_flag=True, default=False),
        click.option("--threads", type=int, default=_threads_default,
                     help="solver worker budget, default from STATIONARY_LAB_THREADS; "
                          "desk-scale solvers run single-threaded, output never "
                          "depends on it"),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _resolve_entry(catalog_id, config_path, game, process, N, incentive_kind, q, beta,
                   mu, mu12, mu21, mutation_matrix, mu_scale, mu_exponent, k,
                   no_self_interaction, allow_absorbing):
    if catalog_id is not None:
        try:
            entry = _catalog.get(catalog_id)
        except _catalog.UnknownCatalogIdError as exc:
            _fail_usage(str(exc.args[0]))
    elif config_path is not None:
        with open(config_path) as fh:
            entry = _catalog.CatalogEntry.from_config(json.load(fh))
    else:
        if game is None:
            _fail_usage("provide --catalog, --config, or an inline --game")
        entry = _catalog.CatalogEntry(
            id="inline", game=tuple(tuple(row) for row in json.loads(game)),
            mutation={"uniform": 0.0},
        )
    over = {}
    if game is not None and catalog_id is not None:
        over["game"] = tuple(tuple(row) for row in json.loads(game))
    if process is not None:
        if process not in _PROCESS_ALIASES:
            _fail_usage(f"unknown process {process!r}")
        over["process"] = _PROCESS_ALIASES[process]
    if N is not None:
        if N < 1:
            _fail_usage(f"population size must be >= 1, got {N}")
        over["N"] = N
    if incentive_kind is not None:
        over["incentive_kind"] = incentive_kind
    if q is not None:
        over["q"] = q
    if beta is not None:
        over["beta"] = beta
    if k is not None:
        if k < 1:
            _fail_usage(f"k must be >= 1, got {k}")
        over["k"] = k
        if "process" not in over and entry.process == "incentive":
            over["process"] = "k-fold"
    if no_self_interaction:
        over["self_interaction"] = False

    mutation_flags = [mu is not None, mu12 is not None or mu21 is not None,
                      mutation_matrix is not None, mu_scale is not None,
                      mu_exponent is not None]
    if sum(mutation_flags) > 1:
        _fail_usage("give at most one of --mu, --mu12/--mu21, --mutation-matrix, "
                    "--mu-scale, --mu-exponent")
    if mu is not None:
        if not 0.0 <= mu <= 1.0:
            _fail_usage(f"mutation rate must lie in [0, 1], got {mu}")
        over["mutation"] = {"uniform": mu}
    elif mu12 is not None or mu21 is not None:
        if mu12 is None or mu21 is None:
            _fail_usage("--mu12 and --mu21 must be given together")
        for v in (mu12, mu21):
            if not 0.0 <= v <= 1.0:
                _fail_usage(f"mutation rate must lie in [0, 1], got {v}")
        over["mutation"] = {"pairwise": (mu12, mu21)}
    elif mutation_matrix is not None:
        over["mutation"] = {"matrix": json.loads(mutation_matrix)}
    elif mu_scale is not None:
        over["mutation"] = {"scale": mu_scale}
    elif mu_exponent is not None:
        n_eff = over.get("N", entry.N)
        over["mutation"] = {"uniform": 1.5 * n_eff ** (-mu_exponent)}

    entry = entry.override(**over) if over else entry
    resolved = entry.resolved_mu()
    if resolved is not None:
        if not 0.0 <= resolved <= 1.0:
            _fail_usage(f"mutation rate must lie in [0, 1], got {resolved:g}")
        if resolved == 0.0 and not allow_absorbing:
            _fail_usage(
                "mu=0 makes the chain absorbing and the stationary distribution "
                "may not exist; pass --allow-absorbing to proceed"
            )
    return entry


def _is_cycle_space(space) -> bool:
    return hasattr(space, "rotation_classes")


def _state_header(space) -> list:
    n = space.counts.shape[1]
    cols = [f"a{i + 1}" for i in range(n)]
    if _is_cycle_space(space):
        return ["config"] + cols
    return cols


def _state_cells(space, k: int) -> list:
    cells = [str(c) for c in space.counts[k]]
    if _is_cycle_space(space):
        return ["".join(str(b) for b in space.states[k])] + cells
    return cells


def _solve(kernel, solver, tol, max_iters, kind):
    if max_iters is None:
        max_iters = 100_000 if kind == "wright-fisher" else 1_000_000
    try:
        return solve_stationary(kernel, method=solver, tol=tol, max_iters=max_iters)
    except NonConvergenceError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(NONCONVERGENCE_EXIT)


@click.group()
def main():
    """Evolutionary Markov chains: stationary distributions and stability."""


@main.command("stationary")
@_common_options
@click.option("--output", "-o", default="-", help="CSV path (default stdout)")
def cmd_stationary(output, solver, tol, max_iters, threads, **cfg):
    """Per-state stationary probabilities with extremum classification."""
    entry = _resolve_entry(**cfg)
    model = entry.model()
    kernel = build_kernel(model)
    result = _solve(kernel, solver, tol, max_iters, model.kind)
    s = result.probabilities
    extrema = find_extrema(s, kernel=kernel)
    flow = extrema.flow_residual
    header = _state_header(kernel.space) + ["stationary", "extremum", "flow_residual"]
    rows = []
    for kdx in range(kernel.size):
        rows.append(_state_cells(kernel.space, kdx)
                    + [_fmt(s[kdx]), extrema.classes[kdx], _fmt(flow[kdx])])
    _write_csv(output, header, rows)


@main.command("stability")
@_common_options
@click.option("--divergences", default="0,0.5,1", help="comma list from {0, 0.5, 1}")
@click.option("--radius", type=int, default=1, help="theorem-check lattice radius")
@click.option("--refine/--no-refine", default=False,
              help="bisect continuous ISS roots (two-type chains)")
@click.option("--output", "-o", default="-", help="CSV path (default stdout)")
@click.option("--summary", default=None, help="JSON summary path")
def cmd_stability(output, summary, divergences, radius, refine, solver, tol, max_iters,
                  threads, **cfg):
    """Stability report: divergences, ISS residuals, theorem verdicts."""
    entry = _resolve_entry(**cfg)
    model = entry.model()
    d_list = []
    for tok in divergences.split(","):
        tok = tok.strip()
        if tok:
            d = float(tok)
            if not 0.0 <= d <= 1.0:
                _fail_usage(f"divergence parameter must lie in [0, 1], got {d}")
            d_list.append(d)
    try:
        report = stability_report(
            model, method=solver, tol=tol, max_iters=max_iters,
            divergences=d_list, refine=refine,
        )
    except NonConvergenceError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(NONCONVERGENCE_EXIT)
    except ValueError as exc:
        _fail_usage(str(exc))
    verdict = theorem_check(report, radius=radius)
    space = report.kernel.space
    header = _state_header(space) + ["stationary", "extremum", "flow_residual"]
    header += [f"D_{d:g}" for d in d_list] + ["chi_squared", "iss_residual"]
    s = report.stationary.probabilities
    rows = []
    for kdx in range(space.size):
        row = _state_cells(space, kdx)
        row += [_fmt(s[kdx]), report.extrema.classes[kdx], _fmt(report.flow_residual[kdx])]
        row += [_fmt(report.divergences[d][kdx]) for d in d_list]
        row += [_fmt(report.chi2[kdx]), _fmt(report.iss_residual[kdx])]
        rows.append(row)
    _write_csv(output, header, rows)
    payload = {
        "config": entry.to_config(),
        "solver": {
            "method": report.stationary.method,
            "residual": report.stationary.residual,
            "iterations": report.stationary.iterations,
        },
        "iss_candidates": [list(stt) for stt in report.iss_candidates],
        "continuous_roots": report.continuous_roots,
        "stationary_stable": [list(stt) for stt in report.stationary_stable],
        "stationary_minima": [list(stt) for stt in report.stationary_minima],
        "dd_minima": {
            f"{d:g}": [list(stt) for stt in report.dd_min_states(d)] for d in d_list
        },
        "theorem": {
            "label": verdict.label,
            "passed": verdict.passed,
            "checked": verdict.checked,
            "worst_offset": verdict.worst_offset,
            "worst_flow": verdict.worst_flow,
            "violations": [
                {**v, "state": list(v["state"])} for v in verdict.violations
            ],
        },
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if summary is None:
        if output != "-":
            click.echo(text)
    else:
        with open(summary, "w") as fh:
            fh.write(text + "\n")


@main.command("theorem-check")
@click.option("--suite", default=None, help="JSON suite file: list of {catalog, overrides, radius}")
@click.option("--radius", type=int, default=1)
@click.option("--tol", type=float, default=1e-13)
@click.option("--output", "-o", default="-", help="verdict table CSV (default stdout)")
def cmd_theorem_check(suite, radius, tol, output):
    """Aggregate theorem verdicts over a suite of catalog configurations."""
    if suite is None:
        rows_spec = [
            {"catalog": "fig2"},
            {"catalog": "fig2", "overrides": {"process": "k-fold", "k": 2}},
            {"catalog": "fig2", "overrides": {"process": "k-fold", "k": 100}},
            {"catalog": "closed-form-chain"},
            {"catalog": "moran-r2"},
            {"catalog": "wf-hump"},
        ]
    else:
        with open(suite) as fh:
            rows_spec = json.load(fh)
    header = ["config", "theorem", "verdict", "worst_offset", "worst_flow_residual"]
    rows = []
    any_fail = False
    for item in rows_spec:
        cid = item.get("catalog")
        try:
            entry = _catalog.get(cid)
        except _catalog.UnknownCatalogIdError as exc:
            _fail_usage(str(exc.args[0]))
        entry = entry.override(**item.get("overrides", {}))
        r = item.get("radius", radius)
        try:
            report = stability_report(entry.model(), tol=tol)
        except NonConvergenceError as exc:
            click.echo(f"error ({cid}): {exc}", err=True)
            sys.exit(NONCONVERGENCE_EXIT)
        except ValueError as exc:
            _fail_usage(f"{cid}: {exc}")
        verdict = theorem_check(report, radius=r)
        expected_fail = bool(item.get("expect_violations", False))
        if not verdict.passed and not expected_fail:
            any_fail = True
        rows.append([
            entry.id, verdict.label,
            "pass" if verdict.passed else "fail",
            str(verdict.worst_offset), _fmt(verdict.worst_flow),
        ])
    _write_csv(output, header, rows)
    if any_fail:
        sys.exit(NONCONVERGENCE_EXIT)


@main.command("catalog")
@click.argument("entry_id", required=False)
@click.option("--n", type=int, default=None, help="filter by type count")
@click.option("--process", default=None, help="filter by process kind")
@click.option("--figure", default=None, help="filter by figure tag")
def cmd_catalog(entry_id, n, process, figure):
    """List catalog entries, or print one entry's full config as JSON."""
    if entry_id:
        try:
            entry = _catalog.get(entry_id)
        except _catalog.UnknownCatalogIdError as exc:
            _fail_usage(str(exc.args[0]))
        click.echo(json.dumps(entry.to_config(), indent=2, sort_keys=True))
        return
    if process is not None:
        process = _PROCESS_ALIASES.get(process, process)
    for e in _catalog.list_entries(n=n, process=process, figure=figure):
        figs = ",".join(e.figures) if e.figures else "-"
        click.echo(f"{e.id:26s} n={e.n} N={e.N:<4d} {e.process:20s} {figs:10s} {e.provenance}")


@main.command("transitions")
@_common_options
@click.option("--output", "-o", default="-", help="CSV path (default stdout)")
def cmd_transitions(output, solver, tol, max_iters, threads, **cfg):
    """Dump every kernel row as (source, target, probability) triples."""
    entry = _resolve_entry(**cfg)
    model = entry.model()
    kernel = build_kernel(model)
    space = kernel.space
    if _is_cycle_space(space):
        header = ["src_config", "dst_config", "probability"]
        joiner = lambda st: ["".join(str(b) for b in st)]  # noqa: E731
    else:
        n = space.counts.shape[1]
        header = [f"src_a{i + 1}" for i in range(n)] + [f"dst_a{i + 1}" for i in range(n)]
        header.append("probability")
        joiner = lambda st: [str(c) for c in st]  # noqa: E731
    rows = []
    for kdx in range(kernel.size):
        row = kernel.row(kdx)
        for target, prob in row.entries:
            rows.append(joiner(row.source) + joiner(target) + [_fmt(prob)])
    _write_csv(output, header, rows)


if __name__ == "__main__":
    main()
