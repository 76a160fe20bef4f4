"""Command line experiment runner.

Each subcommand runs one kind of experiment and writes its result files
into the output directory, every one with a ``<name>.manifest.json``
beside it::

    ionaddress rb --config rb.json --seed 7 --rb.mode=simultaneous
    ionaddress plotdata results/ --out figures/

Exit status is 2 for an invalid configuration and 1 when an experiment
fails.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from collections import defaultdict
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ionaddress import __version__
from ionaddress.bench import (
    CompilationError,
    run_rb,
    write_fit_json,
    write_survival_csv,
)
from ionaddress.calib import (
    CalibrationError,
    acceptance_rb_config,
    calibrate_all,
    calibrate_amplitude,
    calibrate_detuning,
    calibrate_library,
    calibrate_zeeman_compensation,
    drift_monitor,
    read_drift_csv,
    write_history_csv,
)
from ionaddress.config import KINDS, ConfigError, ExperimentConfig, config_hash, load_config
from ionaddress.qsim import (
    IntegratorError,
    NoiseModel,
    Simulator,
    StateError,
    error_budget,
    motion_scan,
    sweep,
)
from ionaddress.synth import (
    OrbitLibrary,
    SynthesisError,
    orbit_classes,
    synthesize_library,
    synthesize_many,
    to_document,
)
from ionaddress.synth.exchange import dumps

log = logging.getLogger(__name__)

FIGURE_PANELS = {"detuning": "a", "amplitude": "b", "zeeman": "c", "delay": "d"}

FAILURES = (
    SynthesisError,
    CompilationError,
    CalibrationError,
    IntegratorError,
    StateError,
    ValueError,
    KeyError,
    OSError,
)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class Outputs:
    """Result files of one run; each gets a manifest when written."""

    def __init__(self, directory: Path, manifest: Dict[str, Any]) -> None:
        self.directory = directory
        self.manifest = manifest
        self.paths: List[Path] = []
        directory.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, writer: Callable[[Path], None]) -> Path:
        path = self.directory / name
        started = _now()
        writer(path)
        manifest = dict(self.manifest, started=started, finished=_now())
        manifest_path = path.with_name(name + ".manifest.json")
        manifest_path.write_text(dumps(manifest))
        log.info("Wrote %s", path)
        self.paths.append(path)
        return path

    def write_text(self, name: str, text: str) -> Path:
        return self.write(name, lambda p: p.write_text(text))

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        def writer(path: Path) -> None:
            with open(path, "w", newline="") as f:
                w = csv.writer(f, lineterminator="\n")
                w.writerow(header)
                w.writerows([_cell(v) for v in row] for row in rows)

        return self.write(name, writer)


def _cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value


def _simulator(config: ExperimentConfig, noise: Optional[NoiseModel] = None) -> Simulator:
    return Simulator(noise or config.noise, config.ions)


def run_synth(config: ExperimentConfig, out: Outputs) -> None:
    s = config.synth
    results = synthesize_many(
        s.targets,
        config.ions,
        s.solutions,
        n_pulses=s.n_pulses,
        seed=config.seed,
        tol=s.tol,
        max_restarts=s.max_restarts,
        duration=s.duration_s,
        ramp_time=s.ramp_s,
        inter_pulse_delay=s.delay_s,
    )
    if not results:
        raise SynthesisError(f"No pulse sequence below {s.tol:g} in {s.max_restarts} restarts")
    for i, result in enumerate(results):
        name = "sequence.json" if i == 0 else f"sequence_{i}.json"
        out.write_text(name, dumps(to_document(result)))


def _library(config: ExperimentConfig) -> OrbitLibrary:
    s = config.synth
    return synthesize_library(
        config.ions,
        config.seed,
        tol=s.tol,
        max_restarts=s.max_restarts,
        duration=s.duration_s,
        ramp_time=s.ramp_s,
        inter_pulse_delay=s.delay_s,
    )


def run_orbits(config: ExperimentConfig, out: Outputs) -> None:
    results = dict(_library(config))
    doc = [
        {
            "representative": list(orbit.representative),
            "members": [
                {"pair": list(pair), "shift_rad": shift} for pair, shift in orbit.members
            ],
            "sequence": to_document(results[orbit.representative]),
        }
        for orbit in orbit_classes()
    ]
    out.write_text("orbits.json", dumps(doc))


def run_rb_experiment(config: ExperimentConfig, out: Outputs) -> None:
    library = None
    if config.rb.mode == "simultaneous":
        library = _library(config)
    result = run_rb(config.rb, config.noise, config.ions, library)
    out.write("survival.csv", lambda p: write_survival_csv(result, p))
    if result.fits:
        out.write("fit.json", lambda p: write_fit_json(result, p))


def run_sweep(config: ExperimentConfig, out: Outputs) -> None:
    # sweeps start from a quiet qubit; the delay sweep keeps the dephasing
    summary = {}
    for variable, values in config.sweep.sweeps().items():
        base = NoiseModel(t2_s=config.noise.t2_s) if variable == "delay" else NoiseModel()
        result = sweep(variable, values, base, config.budget)
        out.write_csv(
            f"sweep_{variable}.csv",
            ("value", "error", "model"),
            [(p.value, p.error, p.model) for p in result.points],
        )
        summary[variable] = {
            "coefficients": list(result.coefficients),
            "recovered_t2_s": result.recovered_t2_s,
        }
    if config.sweep.variable == "all":
        ratios = config.sweep.motion_ratios
        depth = config.noise.motion.depth or replace(config.noise.motion, enabled=True).depth
        errors = motion_scan(ratios, depth, NoiseModel(), config.budget)
        out.write_csv("motion.csv", ("ratio", "error"), zip(ratios, errors))
    out.write_text("sweep.json", dumps(summary))


def run_calibrate(config: ExperimentConfig, out: Outputs) -> None:
    c = config.calibrate
    sim = _simulator(config)
    if c.routine == "acceptance":
        rb = acceptance_rb_config(config.seed, c.lengths, c.trials_per_length)
        _, states = calibrate_library(
            config.ions, config.noise, c.threshold, c.budget, config.seed, rb=rb
        )
        rows = [
            ("".join(s.representative), h["candidate"], h["error"], h["threshold"], int(h["accepted"]))
            for s in states
            for h in s.history()
        ]
        out.write_csv(
            "acceptance.csv", ("orbit", "candidate", "error", "threshold", "accepted"), rows
        )
        return
    if c.routine == "all":
        records = calibrate_all(sim)
    else:
        routine = {
            "detuning": calibrate_detuning,
            "zeeman": calibrate_zeeman_compensation,
            "amplitude": calibrate_amplitude,
        }[c.routine]
        records = [routine(sim)]
    out.write("calibration.csv", lambda p: write_history_csv(records, p))


def run_budget(config: ExperimentConfig, out: Outputs) -> None:
    budget = error_budget(config.noise, config.budget)
    rows: List[Tuple[Any, ...]] = [tuple(r) for r in budget.rows]
    rows.append(
        (
            "total",
            sum(r.pulse_error for r in budget.rows),
            sum(r.delay_error for r in budget.rows),
            budget.total,
        )
    )
    out.write_csv(
        "budget.csv", ("source", "pulse_error", "delay_error", "clifford_error"), rows
    )


def run_drift(config: ExperimentConfig, out: Outputs) -> None:
    d = config.drift
    noise = config.noise
    if d.trace is not None:
        noise = replace(noise, amp_drift=read_drift_csv(d.trace))
    series = drift_monitor(
        _simulator(config, noise), d.pulses_per_probe, d.schedule, d.turns, d.ions
    )
    out.write_csv(
        "drift.csv",
        ("time_s", "ion", "population", "amp_error", "pulse_error"),
        [tuple(p) for p in series],
    )


EXPERIMENTS: Dict[str, Callable[[ExperimentConfig, Outputs], None]] = {
    "synth": run_synth,
    "orbits": run_orbits,
    "rb": run_rb_experiment,
    "sweep": run_sweep,
    "calibrate": run_calibrate,
    "budget": run_budget,
    "drift": run_drift,
}

assert set(EXPERIMENTS) == set(KINDS)


def run_experiment(config: ExperimentConfig) -> List[Path]:
    """Run `config` and return the result files written."""
    doc = config.to_dict()
    out = Outputs(
        Path(config.out),
        {
            "config": doc,
            "config_hash": config_hash(doc),
            "seed": config.seed,
            "version": __version__,
        },
    )
    log.info("Running %s experiment with seed %d", config.kind, config.seed)
    EXPERIMENTS[config.kind](config, out)
    return out.paths


def _read_csv(path: Path) -> List[Dict[str, str]]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def _source_manifest(path: Path) -> Dict[str, Any]:
    manifest = path.with_name(path.name + ".manifest.json")
    if not manifest.exists():
        return {}
    doc = json.loads(manifest.read_text())
    return {k: doc.get(k) for k in ("config_hash", "seed")}


def _decay_rows(results: Path) -> Dict[int, List[Tuple[int, float, float]]]:
    fits = {}
    fit_path = results / "fit.json"
    if fit_path.exists():
        fits = {f["ion"]: f for f in json.loads(fit_path.read_text())["fits"]}
    survivals: Dict[Tuple[int, int], List[float]] = defaultdict(list)
    for row in _read_csv(results / "survival.csv"):
        survivals[int(row["ion"]), int(row["length"])].append(float(row["survival"]))
    rows: Dict[int, List[Tuple[int, float, float]]] = defaultdict(list)
    for (ion, m), values in sorted(survivals.items()):
        fit = fits.get(ion)
        if fit and fit["alpha"] is not None:
            model = 0.5 + (0.5 - fit["spam"]) * fit["alpha"] ** m
        else:
            model = float("nan")
        rows[ion].append((m, 1.0 - float(np.mean(values)), 1.0 - model))
    return rows


def emit_plotdata(results: Path, out_dir: Path) -> List[Path]:
    """Figure data from the result files found in `results`."""
    if not results.is_dir():
        raise FileNotFoundError(f"No results directory {results}")
    written: List[Path] = []

    def outputs(source: Path) -> Outputs:
        return Outputs(out_dir, dict(_source_manifest(source), version=__version__))

    survival = results / "survival.csv"
    if survival.exists():
        rows = _decay_rows(results)
        modes = {r["mode"] for r in _read_csv(survival)}
        if modes == {"single"}:
            (ion,) = rows
            written.append(
                outputs(survival).write_csv("fig1b.csv", ("length", "error", "fit"), rows[ion])
            )
        else:
            written.append(
                outputs(survival).write_csv(
                    "fig4b.csv",
                    ("ion", "length", "error", "fit"),
                    [(ion, *r) for ion in sorted(rows) for r in rows[ion]],
                )
            )

    acceptance = results / "acceptance.csv"
    if acceptance.exists():
        written.append(
            outputs(acceptance).write_csv(
                "figS2.csv",
                ("orbit", "candidate", "error", "threshold"),
                [
                    (r["orbit"], r["candidate"], r["error"], r["threshold"])
                    for r in _read_csv(acceptance)
                ],
            )
        )

    for variable, panel in FIGURE_PANELS.items():
        source = results / f"sweep_{variable}.csv"
        if source.exists():
            written.append(
                outputs(source).write_csv(
                    f"figS4_{panel}.csv",
                    (variable, "measured", "model"),
                    [(r["value"], r["error"], r["model"]) for r in _read_csv(source)],
                )
            )

    drift = results / "drift.csv"
    if drift.exists():
        written.append(
            outputs(drift).write_csv(
                "figS5.csv",
                ("time_s", "ion", "pulse_error"),
                [(r["time_s"], r["ion"], r["pulse_error"]) for r in _read_csv(drift)],
            )
        )

    if not written:
        raise FileNotFoundError(f"No result files to plot in {results}")
    return written


def _overrides(extra: Sequence[str]) -> List[str]:
    """Turn ``--noise.t2_s=4.6`` and ``--noise.t2_s 4.6`` into ``noise.t2_s=4.6``."""
    overrides = []
    args = list(extra)
    while args:
        arg = args.pop(0)
        if not arg.startswith("--"):
            raise ConfigError(arg, "expected --section.key=value")
        key = arg[2:]
        if "=" not in key:
            if not args:
                raise ConfigError(key, "missing value")
            key = f"{key}={args.pop(0)}"
        overrides.append(key)
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ionaddress",
        description="Addressed single-qubit gates with composite microwave pulses.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        sub = commands.add_parser(kind, help=f"run a {kind} experiment")
        sub.add_argument("--config", type=Path, help="JSON experiment configuration")
        sub.add_argument("--seed", type=int, help="random seed (required unless in config)")
        sub.add_argument("--out", help="output directory")
        sub.add_argument("-v", "--verbose", action="count", default=0)
    plot = commands.add_parser("plotdata", help="write figure data from result files")
    plot.add_argument("results", type=Path, help="directory with result files")
    plot.add_argument("--out", type=Path, help="output directory (default: results)")
    plot.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(
        level=(logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)],
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "plotdata":
            if extra:
                parser.error(f"unrecognized arguments: {' '.join(extra)}")
            emit_plotdata(args.results, args.out or args.results)
            return 0
        config = load_config(
            args.config, _overrides(extra), kind=args.command, seed=args.seed, out=args.out
        )
        run_experiment(config)
    except ConfigError as e:
        print(f"ionaddress: invalid configuration: {e}", file=sys.stderr)
        return 2
    except FAILURES as e:
        print(f"ionaddress: {args.command} failed: {e}", file=sys.stderr)
        return 1
    return 0
