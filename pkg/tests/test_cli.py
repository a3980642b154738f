"""Command line tests, driving swflow.cli.main(argv) in process.

Covers exit codes (0 green, 1 check failure, 2 usage or config errors),
artifact placement, config loading with overrides, sweeps and the
informational listings.
"""

import json
import os

import pytest

from swflow.cli import main

CONFIG = {
    "schema": "swflow-scenario/1",
    "name": "cli_pair",
    "kind": "subgradient",
    "horizon": 2.0,
    "integrator": {"scheme": "explicit", "h": 1e-3},
    "agents": {"count": 2, "dim": 1},
    "x0": [1.0, 0.0],
    "anchor": [0.5, 0.5],
    "modes": [
        {
            "name": "pair",
            "coupling": {"kind": "pnorm", "p": 2, "squared": True},
            "graph": {"edges": [[0, 1, 1.0]]},
        }
    ],
    "signal": {"kind": "constant"},
    "checks": [
        {"kind": "lyapunov"},
        {"kind": "consensus", "tol": 5e-2},
    ],
}


def write_config(tmp_path, payload, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_run_preset_green(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["run", "--preset", "example1_p2", "--out", str(out)])
    captured = capsys.readouterr()
    assert code == 0
    assert "all checks ok" in captured.out
    for suffix in ("_trace.csv", "_trace.json", "_report.json",
                   "_summary.txt"):
        assert (out / f"example1_p2{suffix}").exists()
    report = json.loads((out / "example1_p2_report.json").read_text())
    assert report["all_ok"] is True
    assert report["scenario"] == "example1_p2"


def test_run_reports_check_failure(tmp_path, capsys):
    # a tiny horizon leaves the consensus check unmet
    out = tmp_path / "out"
    code = main(["run", "--preset", "example1_p2", "--out", str(out),
                 "--horizon", "0.01"])
    captured = capsys.readouterr()
    assert code == 1
    assert "FAIL" in captured.out


def test_run_config_file(tmp_path, capsys):
    cfg = write_config(tmp_path, CONFIG)
    out = tmp_path / "out"
    code = main(["run", cfg, "--out", str(out)])
    captured = capsys.readouterr()
    assert code == 0
    assert "cli_pair" in captured.out
    assert (out / "cli_pair_report.json").exists()


def test_run_requires_exactly_one_source(tmp_path):
    cfg = write_config(tmp_path, CONFIG)
    with pytest.raises(SystemExit) as exc:
        main(["run", cfg, "--preset", "example1_p2"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["run"])
    assert exc.value.code == 2


def test_unknown_preset_exit_code(tmp_path, capsys):
    code = main(["run", "--preset", "bogus", "--out", str(tmp_path)])
    captured = capsys.readouterr()
    assert code == 2
    assert "unknown preset" in captured.err


def test_config_error_names_field(tmp_path, capsys):
    payload = {k: v for k, v in CONFIG.items() if k != "horizon"}
    cfg = write_config(tmp_path, payload)
    code = main(["run", cfg, "--out", str(tmp_path / "out")])
    captured = capsys.readouterr()
    assert code == 2
    assert "config error at horizon" in captured.err


def test_malformed_json_is_config_error(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    code = main(["run", str(path), "--out", str(tmp_path / "out")])
    captured = capsys.readouterr()
    assert code == 2
    assert "config error" in captured.err


def test_overrides_change_run(tmp_path):
    cfg = write_config(tmp_path, CONFIG)
    out = tmp_path / "out"
    code = main(["run", cfg, "--out", str(out), "--h", "2e-3",
                 "--horizon", "1.5"])
    assert code == 0
    report = json.loads((out / "cli_pair_report.json").read_text())
    assert report["h"] == 2e-3
    assert report["horizon"] == 1.5


def test_sweep_writes_report(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["sweep", "--preset", "example1_p2", "--out", str(out),
                 "--param", "h", "--values", "8e-3,4e-3,2e-3"])
    captured = capsys.readouterr()
    assert code == 0
    assert "estimated order" in captured.out
    path = out / "sweep_example1_p2_h.json"
    assert path.exists()
    report = json.loads(path.read_text())
    assert report["all_ok"] is True
    assert len(report["cells"]) == 3
    ratios = report["order_estimate"]["ratios"]
    assert all(0.4 <= r <= 0.6 for r in ratios)


def test_sweep_random_seeds(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["sweep", "--preset", "random", "--out", str(out),
                 "--param", "seed", "--values", "0,1,2"])
    capsys.readouterr()
    assert code == 0
    report = json.loads((out / "sweep_random_seed.json").read_text())
    assert len(report["cells"]) == 3
    assert report["all_ok"] is True


def test_presets_listing(capsys):
    code = main(["presets"])
    captured = capsys.readouterr()
    assert code == 0
    assert "example1_p2" in captured.out
    assert "counterexample_rotation" in captured.out


def test_info_names_backend(capsys):
    code = main(["info"])
    captured = capsys.readouterr()
    assert code == 0
    assert "stepping backend:" in captured.out
    assert "pure" in captured.out


def test_out_dir_env_fallback(tmp_path, monkeypatch, capsys):
    target = tmp_path / "env_out"
    monkeypatch.setenv("SWFLOW_OUT_DIR", str(target))
    monkeypatch.chdir(tmp_path)
    code = main(["run", "--preset", "example1_p2"])
    capsys.readouterr()
    assert code == 0
    assert (target / "example1_p2_report.json").exists()


def test_cli_outputs_deterministic(tmp_path, capsys):
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert main(["run", "--preset", "example2_infnorm",
                     "--out", str(out)]) == 0
    capsys.readouterr()
    csva = (outs[0] / "example2_infnorm_trace.csv").read_bytes()
    csvb = (outs[1] / "example2_infnorm_trace.csv").read_bytes()
    assert csva == csvb
    repa = (outs[0] / "example2_infnorm_report.json").read_bytes()
    repb = (outs[1] / "example2_infnorm_report.json").read_bytes()
    assert repa == repb
