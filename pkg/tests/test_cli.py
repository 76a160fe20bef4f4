import csv
import json

import pytest

from ionaddress.cli import emit_plotdata, main, run_experiment
from ionaddress.config import build_config


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_orbits(tmp_path):
    assert main(["orbits", "--seed", "0", "--out", str(tmp_path)]) == 0

    orbits = json.loads((tmp_path / "orbits.json").read_text())
    manifest = json.loads((tmp_path / "orbits.json.manifest.json").read_text())
    assert len(orbits) == 6
    assert sum(len(o["members"]) for o in orbits) == 24
    assert all(o["sequence"]["residual_cost"] < 1e-9 for o in orbits)
    assert manifest["seed"] == 0
    assert len(manifest["config_hash"]) == 64
    assert manifest["config"]["kind"] == "orbits"


def test_synth_is_reproducible(tmp_path):
    args = ["synth", "--seed", "4", "--synth.targets=[\"X+\", \"Y-\"]"]

    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0

    first = (tmp_path / "a" / "sequence.json").read_bytes()
    assert first == (tmp_path / "b" / "sequence.json").read_bytes()
    assert json.loads(first)["residual_cost"] < 1e-9


def test_budget_rows_sum_to_total(tmp_path):
    code = main(
        [
            "budget",
            "--seed",
            "0",
            "--out",
            str(tmp_path),
            "--noise.preset=none",
            "--noise.t2_s=4.6",
        ]
    )

    assert code == 0
    rows = read_csv(tmp_path / "budget.csv")
    *sources, total = rows
    assert total["source"] == "total"
    assert float(total["clifford_error"]) == pytest.approx(
        sum(float(r["clifford_error"]) for r in sources)
    )
    assert float(total["clifford_error"]) == pytest.approx(0.414e-6, rel=0.1)


def test_missing_seed_is_a_configuration_error(tmp_path, capsys):
    assert main(["budget", "--out", str(tmp_path)]) == 2
    assert "seed" in capsys.readouterr().err


def test_unknown_override_is_a_configuration_error(tmp_path):
    assert main(["budget", "--seed", "0", "--out", str(tmp_path), "--noise.t3_s=1"]) == 2


def test_plotdata_without_results(tmp_path):
    assert main(["plotdata", str(tmp_path / "nothing")]) == 1


def test_plotdata_from_empty_directory(tmp_path):
    with pytest.raises(FileNotFoundError):
        emit_plotdata(tmp_path, tmp_path)


def test_rb_then_plotdata(tmp_path):
    results = tmp_path / "results"
    code = main(
        [
            "rb",
            "--seed",
            "1",
            "--out",
            str(results),
            "--noise.preset=none",
            "--noise.t2_s=1e-3",
            "--rb.lengths=[1, 10, 100]",
            "--rb.trials_per_length=2",
        ]
    )
    assert code == 0
    assert len(read_csv(results / "survival.csv")) == 6

    assert main(["plotdata", str(results), "--out", str(tmp_path / "figures")]) == 0

    rows = read_csv(tmp_path / "figures" / "fig1b.csv")
    assert [int(r["length"]) for r in rows] == [1, 10, 100]
    assert all(0 <= float(r["error"]) < 0.5 for r in rows)
    manifest = json.loads((tmp_path / "figures" / "fig1b.csv.manifest.json").read_text())
    assert manifest["seed"] == 1


def test_sweep_writes_figure_panels(tmp_path):
    code = main(
        [
            "sweep",
            "--seed",
            "0",
            "--out",
            str(tmp_path),
            "--sweep.variable=delay",
        ]
    )
    assert code == 0
    summary = json.loads((tmp_path / "sweep.json").read_text())
    assert summary["delay"]["recovered_t2_s"] == pytest.approx(4.6, rel=0.05)

    written = emit_plotdata(tmp_path, tmp_path)

    assert [p.name for p in written] == ["figS4_d.csv"]


def test_drift(tmp_path):
    trace = tmp_path / "trace.csv"
    trace.write_text("time_s,amp_scale\n0.0,1.0\n60.0,1.0005\n")
    code = main(
        [
            "drift",
            "--seed",
            "0",
            "--out",
            str(tmp_path),
            "--noise.preset=none",
            f"--drift.trace={trace}",
            "--drift.schedule=[0, 60]",
        ]
    )

    assert code == 0
    rows = read_csv(tmp_path / "drift.csv")
    assert [float(r["time_s"]) for r in rows] == [0.0, 60.0]
    assert float(rows[1]["amp_error"]) == pytest.approx(5e-4, rel=0.05)


def test_run_experiment_returns_written_files(tmp_path):
    config = build_config(
        {"kind": "budget", "seed": 0, "out": str(tmp_path), "noise": {"preset": "none"}}
    )

    paths = run_experiment(config)

    assert paths == [tmp_path / "budget.csv"]
    manifest = json.loads((tmp_path / "budget.csv.manifest.json").read_text())
    assert manifest["config_hash"] == config.config_hash
    assert manifest["started"] <= manifest["finished"]


def test_simultaneous_rb_uses_synth_settings(tmp_path):
    def mean_survival(out, *overrides):
        args = [
            "rb",
            "--seed",
            "2",
            "--out",
            str(tmp_path / out),
            "--noise.preset=none",
            "--noise.t2_s=1e-3",
            "--rb.mode=simultaneous",
            "--rb.lengths=[1, 2, 3]",
            "--rb.trials_per_length=1",
        ]
        assert main(args + list(overrides)) == 0
        rows = read_csv(tmp_path / out / "survival.csv")
        return sum(float(r["survival"]) for r in rows) / len(rows)

    default = mean_survival("default")
    long_delays = mean_survival("long", "--synth.delay_s=5e-5")

    assert long_delays < default - 0.05
