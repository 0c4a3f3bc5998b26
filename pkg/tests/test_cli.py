import csv
import json

import numpy as np
import pytest

from gsliced.cli import main
from gsliced.experiments import CSV_HEADER

FAST = ["--replicates", "2", "-L", "5", "--jobs", "1"]


def write(path, arr):
    np.savetxt(path, arr, delimiter=",")
    return str(path)


@pytest.fixture
def data(tmp_path, rng):
    return (write(tmp_path / "a.csv", rng.normal(size=(40, 3))),
            write(tmp_path / "b.csv", rng.normal(1, 1, size=(30, 3))),
            write(tmp_path / "c.csv", rng.normal(size=(20, 2))))


def test_estimate_output_format(data, capsys):
    assert main(["estimate", data[0], data[1], "--kind", "wasserstein", "--p", "2", "--sigma", "3", "-L", "50"]) == 0
    out = capsys.readouterr().out.strip()
    fields = dict(kv.split("=") for kv in out.split())
    assert set(fields) == {"estimate", "stderr", "L", "sigma"}
    assert fields["L"] == "50" and float(fields["sigma"]) == 3.0 and float(fields["estimate"]) > 0


def test_estimate_identical_files_shared_key(tmp_path, data, capsys):
    copy = tmp_path / "copy.csv"
    copy.write_text(open(data[0]).read())
    assert main(["estimate", data[0], str(copy), "--shared-noise-key"]) == 0
    assert capsys.readouterr().out.startswith("estimate=0.0 ")


def test_estimate_dimension_mismatch_exit_2(data, capsys):
    assert main(["estimate", data[0], data[2]]) == 2
    err = capsys.readouterr().err
    assert "d=3" in err and "d=2" in err


def test_estimate_synthetic_and_exclusivity(data, capsys):
    assert main(["estimate", "--n", "50", "--d", "2"]) == 0
    assert main(["estimate", data[0], data[1], "--n", "5"]) == 2


def test_usage_errors_exit_2(capsys):
    assert main(["estimate", "--bogus"]) == 2
    assert main(["nope"]) == 2
    assert main(["estimate", "--sigma", "-1"]) == 2
    assert main(["estimate", "--kind", "wasserstein,mmd"]) == 2


def test_missing_file_exit_1(tmp_path, capsys):
    assert main(["estimate", str(tmp_path / "x.csv"), str(tmp_path / "y.csv")]) == 1


@pytest.mark.parametrize("cmd", ["estimate", "metric-check", "sweep-samples", "sweep-dim",
                                 "sweep-displacement", "sweep-projections", "sweep-noise"])
def test_help_lists_defaults(cmd, capsys):
    assert main([cmd, "--help"]) == 0
    out = capsys.readouterr().out
    for flag in ("--kind", "--sigma", "-L", "--seed", "--config"):
        assert flag in out
    assert "default" in out


def test_metric_check_passes_and_fault_injection(data, capsys):
    assert main(["metric-check", "-L", "10"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 4
    assert main(["metric-check", data[0], data[1], "-L", "10"]) == 0
    capsys.readouterr()
    assert main(["metric-check", "-L", "10", "--fault-negate"]) == 1
    cap = capsys.readouterr()
    assert "non-negativity: FAIL" in cap.out
    assert "non-negativity violated" in cap.err


def test_metric_check_sinkhorn_identity(capsys):
    assert main(["metric-check", "--kind", "sinkhorn", "-L", "2", "--n", "15"]) in (0, 1)
    assert "self-identity: PASS" in capsys.readouterr().out


def test_sweep_samples_schema(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["sweep-samples", "--grid", "16,32,64", "-o", str(out)] + FAST) == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 1 + 3 * 2
    meta = json.loads((tmp_path / "s.meta.json").read_text())
    assert meta["axis"] == "samples"
    assert "slope[wasserstein]" in capsys.readouterr().out


def test_sweep_projections_reference_in_grid_exit_2(tmp_path):
    assert main(["sweep-projections", "--grid", "10,100", "--L-ref", "100", "-o", str(tmp_path / "p.csv")]) == 2


def test_unwritable_output_exit_1_before_work(tmp_path, capsys, monkeypatch):
    import gsliced.cli as cli

    def boom(plan):
        raise AssertionError("sweep ran")

    monkeypatch.setattr(cli, "run_sweep", boom)
    assert main(["sweep-samples", "-o", str(tmp_path / "missing" / "s.csv")] + FAST) == 1
    assert "does not exist" in capsys.readouterr().err


def test_paper_scale_grid(monkeypatch, tmp_path):
    import gsliced.cli as cli
    seen = {}

    def fake(plan):
        seen["grid"] = plan.grid
        raise RuntimeError("stop")

    monkeypatch.setattr(cli, "run_sweep", fake)
    assert main(["sweep-samples", "--paper-scale", "-o", str(tmp_path / "s.csv")]) == 1
    assert max(seen["grid"]) == 25000


def test_config_file_precedence(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "opts.cfg"
    cfg.write_text("# options\nsigma = 0.5\nL = 7\n")
    assert main(["estimate", "--config", str(cfg), "--n", "20"]) == 0
    out = capsys.readouterr().out
    assert "L=7" in out and "sigma=0.5" in out
    assert main(["estimate", "--config", str(cfg), "--n", "20", "-L", "9"]) == 0
    assert "L=9" in capsys.readouterr().out
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense = 1\n")
    assert main(["estimate", "--config", str(bad)]) == 2


def test_seed_environment_variable(monkeypatch, capsys):
    monkeypatch.setenv("GSLICED_SEED", "11")
    main(["estimate", "--n", "20"])
    env_out = capsys.readouterr().out
    main(["estimate", "--n", "20", "--seed", "11"])
    assert capsys.readouterr().out == env_out
    main(["estimate", "--n", "20", "--seed", "12"])
    assert capsys.readouterr().out != env_out
