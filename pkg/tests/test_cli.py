import csv
import json
import subprocess
import sys

import pytest

from tauberlab.cli import EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, main, stream

TOY = {"semigroup": {"generator": "explicit", "norms": [2, 3], "x_max": 1e4}}


def run_cli(tmp_path, command, cfg=None, *extra):
    args = [command, "--out", str(tmp_path)]
    if cfg is not None:
        tmp_path.mkdir(parents=True, exist_ok=True)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(cfg))
        args += ["--config", str(path)]
    return main(args + list(extra))


def outputs(path, command):
    return (path / f"{command}.csv").read_bytes(), (path / f"{command}.json").read_bytes()


def test_rl_check_deterministic(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    cfg = {"n_functions": 20}
    assert run_cli(a, "rl-check", cfg, "--seed", "7") == EXIT_OK
    assert run_cli(b, "rl-check", cfg, "--seed", "7", "--threads", "3") == EXIT_OK
    assert run_cli(c, "rl-check", cfg, "--seed", "8") == EXIT_OK
    assert outputs(a, "rl-check") == outputs(b, "rl-check")
    assert outputs(a, "rl-check")[0] != outputs(c, "rl-check")[0]
    assert b"\r" not in outputs(a, "rl-check")[0]


def test_identities_toy(tmp_path):
    assert run_cli(tmp_path, "identities", TOY) == EXIT_OK
    summary = json.loads((tmp_path / "identities.json").read_text())
    assert summary["status"] == "ok" and summary["summary"]["max_deviation"] < 1e-9


def test_violation_exit(tmp_path):
    assert run_cli(tmp_path, "identities", TOY, "--tolerance", "-1") == EXIT_VIOLATION
    summary = json.loads((tmp_path / "identities.json").read_text())
    assert summary["violations"] == ["identities.csv:row 2", "identities.csv:row 3"]


def test_pnt_row(tmp_path):
    cfg = {"semigroup": {"generator": "classical", "x_max": 1e6}}
    assert run_cli(tmp_path, "pnt", cfg) == EXIT_OK
    rows = list(csv.DictReader((tmp_path / "pnt.csv").open()))
    assert rows[-1]["x"] == "1000000" and rows[-1]["count"] == "78498"
    summary = json.loads((tmp_path / "pnt.json").read_text())["summary"]
    assert {"delta_used", "fitted_exponent", "r_squared"} <= set(summary)


@pytest.mark.parametrize("command", ["pvar", "tauber", "semigroup-build", "mertens"])
def test_commands_run(tmp_path, command):
    cfg = {"n_functions": 5} if command == "pvar" else {}
    assert run_cli(tmp_path, command, cfg) == EXIT_OK
    assert (tmp_path / f"{command}.csv").read_text().count("\n") > 1


def test_zeta_scan_subset(tmp_path):
    cfg = {"lemmas": ["growth", "line_growth"], "semigroup": {"generator": "classical", "x_max": 1e4}}
    assert run_cli(tmp_path, "zeta-scan", cfg) == EXIT_OK
    summary = json.loads((tmp_path / "zeta-scan.json").read_text())["summary"]
    assert set(summary["fitted_constants"]) == {"growth", "line_growth"}


def test_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == EXIT_USAGE
    assert run_cli(tmp_path, "zeta-scan", {"lemmas": ["zeros"]}) == EXIT_USAGE
    assert run_cli(tmp_path, "identities", {"semigroup": {"x_max": 10}}) == EXIT_USAGE
    assert run_cli(tmp_path, "tauber", {"signal": "unbounded"}) == EXIT_USAGE
    with pytest.raises(SystemExit):
        main(["pvar", "--seed", "-1"])


def test_streams_independent():
    a = stream(5, "pvar").uniform(size=4)
    assert (a == stream(5, "pvar").uniform(size=4)).all()
    assert not (a == stream(5, "rl-check").uniform(size=4)).any()


def test_module_entry(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "tauberlab", "identities", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
