import numpy as np
import pytest

from stationary_lab.dynamics import FitnessLandscape, Incentive, MutationRule
from stationary_lab.processes import ProcessModel


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = {}
    for status, flag in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(status, []):
            name = rep.nodeid.split("::")[-1]
            if name.startswith("test_criterion_"):
                tag = name.split("_")[2]
                lines[tag] = flag if lines.get(tag) != "FAIL" else "FAIL"
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for tag in sorted(lines, key=lambda t: (len(t), t)):
            terminalreporter.write_line(f"criterion {tag}: {lines[tag]}")


def make_model(game, kind="replicator", q=1.0, beta=1.0, mu=0.1, N=10,
               process="incentive", mutation=None, **kw):
    """Small-model helper so unit tests stay one-liners."""
    game = np.asarray(game, dtype=float)
    inc = Incentive(kind, FitnessLandscape(game), q=q, beta=beta)
    rule = mutation if mutation is not None else MutationRule.uniform(mu, game.shape[0])
    return ProcessModel(kind=process, incentive=inc, mutation=rule, N=N, **kw)


NEUTRAL2 = ((1.0, 1.0), (1.0, 1.0))
HAWK_DOVE = ((1.0, 2.0), (2.0, 1.0))  # symmetric coexistence game, interior rest point
ZERO_DIAG_GAME = ((0.0, 1.0), (1.0, 0.0))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
