import subprocess

import pytest


def run_lab(*args):
    """Invoke the producer CLI; the CSV files are the only interface used."""
    proc = subprocess.run(
        ["stationary-lab", *args], capture_output=True, text=True, timeout=600,
    )
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory):
    """CSV fixtures produced once per session by the stationary-lab CLI."""
    d = tmp_path_factory.mktemp("csv")
    run_lab("stability", "--catalog", "fig2", "-o", str(d / "fig2.csv"),
            "--summary", str(d / "fig2.json"))
    run_lab("transitions", "--catalog", "fig2", "-o", str(d / "fig2_transitions.csv"))
    run_lab("stability", "--catalog", "rsp", "-o", str(d / "rsp.csv"),
            "--summary", str(d / "rsp.json"))
    run_lab("stability", "--catalog", "m4", "-o", str(d / "m4.csv"),
            "--summary", str(d / "m4.json"))
    return d
