import json

import numpy as np
import pytest
from click.testing import CliRunner

from stationary_lab.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args, **kw):
    result = runner.invoke(main, list(args), catch_exceptions=False, **kw)
    return result


def test_stationary_fig2_csv(runner, tmp_path):
    out = tmp_path / "fig2.csv"
    result = invoke(runner, "stationary", "--catalog", "fig2", "-o", str(out))
    assert result.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "a1,a2,stationary,extremum,flow_residual"
    assert len(lines) == 102  # header + one row per state
    rows = [line.split(",") for line in lines[1:]]
    probs = {(int(r[0]), int(r[1])): float(r[2]) for r in rows}
    assert max(probs, key=probs.get) == (33, 67)


def test_csv_byte_identical_across_runs(runner, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        invoke(runner, "stationary", "--catalog", "closed-form-chain", "-o", str(path))
    assert a.read_bytes() == b.read_bytes()


def test_row_count_matches_state_space(runner, tmp_path):
    out = tmp_path / "rsp12.csv"
    result = invoke(runner, "stationary", "--catalog", "rsp", "--N", "12", "-o", str(out))
    assert result.exit_code == 0
    assert len(out.read_text().splitlines()) == 1 + 91  # C(14, 2) states


def test_invalid_mu_is_usage_error(runner):
    result = invoke(runner, "stationary", "--catalog", "fig2", "--mu", "1.5")
    assert result.exit_code == 1
    assert "mutation rate" in result.output


def test_zero_mu_needs_explicit_flag(runner, tmp_path):
    result = invoke(runner, "stationary", "--catalog", "fig2", "--mu", "0")
    assert result.exit_code == 1
    assert "absorbing" in result.output
    out = tmp_path / "abs.csv"
    ok = invoke(runner, "stationary", "--catalog", "closed-form-chain", "--N", "6", "--mu", "0",
                "--allow-absorbing", "-o", str(out))
    assert ok.exit_code == 0


def test_unknown_catalog_id(runner):
    result = invoke(runner, "stationary", "--catalog", "fig2000")
    assert result.exit_code == 1
    assert "did you mean" in result.output


def test_stability_summary_fig2(runner, tmp_path):
    out = tmp_path / "stab.csv"
    summary = tmp_path / "stab.json"
    result = invoke(runner, "stability", "--catalog", "fig2", "--refine",
                    "-o", str(out), "--summary", str(summary))
    assert result.exit_code == 0
    header = out.read_text().splitlines()[0].split(",")
    assert header == ["a1", "a2", "stationary", "extremum", "flow_residual",
                      "D_0", "D_0.5", "D_1", "chi_squared", "iss_residual"]
    payload = json.loads(summary.read_text())
    assert [33, 67] in payload["stationary_stable"]
    assert payload["theorem"]["passed"] is True
    assert payload["solver"]["method"] == "exact-product"
    # relative entropy is undefined at the fixation rows: empty cells
    first_row = out.read_text().splitlines()[1].split(",")
    assert first_row[header.index("D_1")] == ""


def test_stability_divergence_selection(runner, tmp_path):
    out = tmp_path / "d0.csv"
    result = invoke(runner, "stability", "--catalog", "closed-form-chain", "--divergences", "0",
                    "-o", str(out))
    assert result.exit_code == 0
    assert "D_0" in out.read_text().splitlines()[0]
    assert "D_1" not in out.read_text().splitlines()[0]
    bad = invoke(runner, "stability", "--catalog", "closed-form-chain", "--divergences", "2")
    assert bad.exit_code == 1


def test_transitions_dump(runner, tmp_path):
    out = tmp_path / "trans.csv"
    result = invoke(runner, "transitions", "--catalog", "closed-form-chain", "--N", "3", "-o", str(out))
    assert result.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "src_a1,src_a2,dst_a1,dst_a2,probability"
    # every row of the 4-state chain appears with its self-loop and moves
    sources = {tuple(map(int, line.split(",")[:2])) for line in lines[1:]}
    assert sources == {(3, 0), (2, 1), (1, 2), (0, 3)}


def test_theorem_check_default_suite(runner, tmp_path):
    out = tmp_path / "verdicts.csv"
    result = invoke(runner, "theorem-check", "-o", str(out))
    assert result.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "config,theorem,verdict,worst_offset,worst_flow_residual"
    verdicts = [line.split(",")[2] for line in lines[1:]]
    assert verdicts and all(v == "pass" for v in verdicts)


def test_theorem_check_suite_file(runner, tmp_path):
    suite = tmp_path / "suite.json"
    suite.write_text(json.dumps([
        {"catalog": "fig2"},
        {"catalog": "neutral-two-maxima", "expect_violations": True},
    ]))
    out = tmp_path / "verdicts.csv"
    result = invoke(runner, "theorem-check", "--suite", str(suite), "-o", str(out))
    assert result.exit_code == 0
    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps([{"catalog": "nope"}]))
    bad = invoke(runner, "theorem-check", "--suite", str(missing))
    assert bad.exit_code == 1


def test_catalog_listing_and_entry(runner):
    result = invoke(runner, "catalog")
    assert result.exit_code == 0
    assert "fig2" in result.output
    entry = invoke(runner, "catalog", "fig2")
    cfg = json.loads(entry.output)
    assert cfg["game"] == [[1, 2], [3, 1]]
    filtered = invoke(runner, "catalog", "--figure", "fig4")
    assert set(filtered.output.split()) & {"bomze-2", "bomze-20", "bomze-47"}


def test_mu_scale_and_exponent_flags(runner, tmp_path):
    out = tmp_path / "scale.csv"
    result = invoke(runner, "stationary", "--catalog", "rsp", "--N", "9",
                    "--mu-scale", "2.0", "-o", str(out))
    assert result.exit_code == 0
    result = invoke(runner, "stationary", "--catalog", "rsp", "--N", "9",
                    "--mu-exponent", "1.0", "-o", str(out))
    assert result.exit_code == 0
    both = invoke(runner, "stationary", "--catalog", "rsp", "--mu", "0.1",
                  "--mu-scale", "1.0")
    assert both.exit_code == 1


def test_inline_game_and_kfold(runner, tmp_path):
    out = tmp_path / "inline.csv"
    result = invoke(runner, "stationary", "--game", "[[1,2],[2,1]]", "--N", "6",
                    "--mu", "0.2", "--k", "2", "-o", str(out))
    assert result.exit_code == 0
    assert len(out.read_text().splitlines()) == 8


def test_nonconvergence_exit_code(runner):
    result = invoke(runner, "stationary", "--catalog", "rsp", "--N", "12",
                    "--solver", "power", "--max-iters", "3")
    assert result.exit_code == 2
    assert "residual" in result.output


def test_cycle_process_csv(runner, tmp_path):
    out = tmp_path / "cycle.csv"
    result = invoke(runner, "stationary", "--catalog", "cycle-2x2", "--N", "4",
                    "--mu", "0.25", "-o", str(out))
    assert result.exit_code == 0
    assert len(out.read_text().splitlines()) == 17  # header + 2^4 configurations
