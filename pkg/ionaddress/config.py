"""Experiment configuration.

A configuration is one JSON document::

    {
      "kind": "rb",
      "seed": 7,
      "out": "results",
      "ions": {"a_pi": [1.0, 1.25]},
      "noise": {"preset": "none", "t2_s": 4.6},
      "rb": {"lengths": [1, 10, 100, 1000], "trials_per_length": 10}
    }

Every section is optional except ``kind`` and ``seed``. The ``noise``
section starts from a preset (``reference`` or ``none``) and overrides
single fields. Values given on the command line as ``--noise.t2_s=4.6``
override the document.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple, Type, TypeVar, Union

from ionaddress.bench import RBConfig
from ionaddress.qsim import (
    CliffordStats,
    Motion,
    NoiseModel,
    Spectator,
    reference_noise,
)
from ionaddress.qsim.sweep import VARIABLES
from ionaddress.rotor import TargetGate
from ionaddress.synth import GATE_TARGETS, IonSet
from ionaddress.synth.optimize import RESTART_BUDGET, TOLERANCE
from ionaddress.synth.pulse import ADDRESSING_PULSE_DURATION, INTER_PULSE_DELAY, RAMP_TIME

KINDS = ("synth", "orbits", "rb", "sweep", "calibrate", "budget", "drift")

NOISE_PRESETS = ("reference", "none")

CALIBRATIONS = ("all", "detuning", "zeeman", "amplitude", "acceptance")

DEFAULT_SWEEPS: Dict[str, Tuple[float, ...]] = {
    "detuning": (-100.0, -50.0, -20.0, -10.0, 10.0, 20.0, 50.0, 100.0),
    "amplitude": (-1e-3, -5e-4, -2e-4, -1e-4, 1e-4, 2e-4, 5e-4, 1e-3),
    "zeeman": (-100.0, -50.0, -20.0, -10.0, 10.0, 20.0, 50.0, 100.0),
    "delay": (0.0, 5e-6, 1e-5, 2e-5, 5e-5, 1e-4),
}


class ConfigError(ValueError):
    """Raised when a configuration field is missing or invalid."""

    def __init__(self, field: str, reason: str) -> None:
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


@dataclass(frozen=True)
class SynthConfig:
    targets: Tuple[TargetGate, ...] = (GATE_TARGETS["X+"], GATE_TARGETS["Y+"])
    n_pulses: Optional[int] = None
    tol: float = TOLERANCE
    max_restarts: int = RESTART_BUDGET
    solutions: int = 1
    duration_s: float = ADDRESSING_PULSE_DURATION
    ramp_s: float = RAMP_TIME
    delay_s: float = INTER_PULSE_DELAY

    def __post_init__(self) -> None:
        if self.solutions < 1:
            raise ValueError(f"Need at least one solution, got {self.solutions}")
        if self.max_restarts < 1:
            raise ValueError(f"Need at least one restart, got {self.max_restarts}")


@dataclass(frozen=True)
class SweepConfig:
    variable: str = "all"
    values: Tuple[float, ...] = ()
    motion_ratios: Tuple[float, ...] = (1.5, 3.1, 6.3, 12.7)

    def __post_init__(self) -> None:
        if self.variable != "all" and self.variable not in VARIABLES:
            raise ValueError(
                f"Unknown sweep variable {self.variable!r}; expected all or one of {sorted(VARIABLES)}"
            )
        if self.variable == "all" and self.values:
            raise ValueError("Sweep values need a single variable")

    def sweeps(self) -> Dict[str, Tuple[float, ...]]:
        if self.variable == "all":
            return dict(DEFAULT_SWEEPS)
        return {self.variable: self.values or DEFAULT_SWEEPS[self.variable]}


@dataclass(frozen=True)
class CalibrateConfig:
    routine: str = "all"
    threshold: float = 5e-5
    budget: int = 20
    lengths: Tuple[int, ...] = (1, 10, 30, 100)
    trials_per_length: int = 2

    def __post_init__(self) -> None:
        if self.routine not in CALIBRATIONS:
            raise ValueError(f"Unknown calibration {self.routine!r}; expected one of {CALIBRATIONS}")
        if not self.threshold > 0:
            raise ValueError(f"Threshold must be positive, got {self.threshold}")
        if self.budget < 1:
            raise ValueError(f"Candidate budget must be at least 1, got {self.budget}")


@dataclass(frozen=True)
class DriftConfig:
    pulses_per_probe: int = 101
    turns: Optional[int] = None
    ions: Tuple[int, ...] = (0,)
    schedule: Tuple[float, ...] = (0.0, 60.0, 120.0, 180.0, 240.0, 300.0)
    trace: Optional[str] = None

    def __post_init__(self) -> None:
        if self.pulses_per_probe < 1:
            raise ValueError(f"Probe needs at least one pulse, got {self.pulses_per_probe}")
        if not self.ions:
            raise ValueError("Drift monitoring needs at least one ion")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int
    out: str = "."
    ions: IonSet = field(default_factory=IonSet)
    noise: NoiseModel = field(default_factory=reference_noise)
    rb: RBConfig = field(default_factory=RBConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    calibrate: CalibrateConfig = field(default_factory=CalibrateConfig)
    drift: DriftConfig = field(default_factory=DriftConfig)
    budget: CliffordStats = field(default_factory=CliffordStats)

    def to_dict(self) -> Dict[str, Any]:
        d: Dict[str, Any] = {
            f.name: asdict(getattr(self, f.name))
            for f in fields(self)
            if f.name not in ("kind", "seed", "out", "noise")
        }
        d["synth"]["targets"] = [t._asdict() for t in self.synth.targets]
        d.update(kind=self.kind, seed=self.seed, out=self.out, noise=self.noise.to_dict())
        return d

    @property
    def config_hash(self) -> str:
        return config_hash(self.to_dict())


def config_hash(doc: Mapping[str, Any]) -> str:
    """SHA-256 of the canonical JSON form.

    >>> config_hash({"b": 1, "a": [1.5]}) == config_hash({"a": [1.5], "b": 1})
    True
    """
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"), default=_jsonable)
    return hashlib.sha256(text.encode()).hexdigest()


def _jsonable(value: object) -> object:
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def parse_value(text: str) -> Any:
    """JSON if it parses, the bare string otherwise.

    >>> parse_value("4.6"), parse_value("[1, 10]"), parse_value("simultaneous")
    (4.6, [1, 10], 'simultaneous')
    """
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(doc: Mapping[str, Any], overrides: Iterable[str]) -> Dict[str, Any]:
    """Set dotted keys, given as ``noise.t2_s=4.6``, on a copy of `doc`.

    >>> apply_overrides({"noise": {"t2_s": 1.0}}, ["noise.t2_s=4.6", "seed=3"])
    {'noise': {'t2_s': 4.6}, 'seed': 3}
    """
    result: Dict[str, Any] = json.loads(json.dumps(doc))
    for item in overrides:
        key, sep, text = item.partition("=")
        if not sep or not key:
            raise ConfigError(item, "expected key=value")
        *path, last = key.split(".")
        node = result
        for i, part in enumerate(path):
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(".".join(path[: i + 1]), "not a section")
            node = child
        node[last] = parse_value(text)
    return result


def load_document(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as e:
        raise ConfigError(str(path), e.strerror or "cannot read") from e
    except json.JSONDecodeError as e:
        raise ConfigError(str(path), f"invalid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ConfigError(str(path), "expected a JSON object")
    return doc


T = TypeVar("T")


def _section(name: str, cls: Type[T], doc: Any, base: Optional[T] = None) -> T:
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(name, "expected an object")
    known = {f.name for f in fields(cls)}  # type: ignore[arg-type]
    for key in doc:
        if key not in known:
            raise ConfigError(f"{name}.{key}", "unknown key")
    values = {k: tuple(v) if isinstance(v, list) else v for k, v in doc.items()}
    try:
        if base is not None:
            return replace(base, **values)  # type: ignore[type-var]
        return cls(**values)
    except (TypeError, ValueError) as e:
        raise ConfigError(name, str(e)) from e


def _target(name: str, item: Any) -> TargetGate:
    if isinstance(item, str):
        if item not in GATE_TARGETS:
            raise ConfigError(name, f"unknown gate {item!r}; expected one of {sorted(GATE_TARGETS)}")
        return GATE_TARGETS[item]
    if isinstance(item, dict):
        try:
            return TargetGate(float(item["theta"]), float(item.get("phi", 0.0)), float(item.get("delta", 0.0)))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(name, f"target needs numeric theta, phi, delta ({e})") from e
    raise ConfigError(name, "target must be a gate name or {theta, phi, delta}")


def _synth(doc: Any) -> SynthConfig:
    doc = dict(doc or {})
    targets = doc.pop("targets", None)
    config = _section("synth", SynthConfig, doc)
    if targets is None:
        return config
    if not isinstance(targets, list) or not targets:
        raise ConfigError("synth.targets", "expected a non-empty list")
    return replace(
        config, targets=tuple(_target(f"synth.targets.{i}", t) for i, t in enumerate(targets))
    )


def _float(name: str, value: Any) -> float:
    if value in ("inf", "Infinity"):
        return math.inf
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(name, f"expected a number, got {value!r}") from None


def _noise(doc: Any) -> NoiseModel:
    doc = dict(doc or {})
    preset = doc.pop("preset", "reference")
    if preset not in NOISE_PRESETS:
        raise ConfigError("noise.preset", f"expected one of {NOISE_PRESETS}")
    base = reference_noise() if preset == "reference" else NoiseModel()
    if "t2_s" in doc:
        doc["t2_s"] = _float("noise.t2_s", doc["t2_s"])
    if "spectators" in doc:
        items = doc["spectators"]
        if not isinstance(items, list):
            raise ConfigError("noise.spectators", "expected a list")
        doc["spectators"] = [
            _section(f"noise.spectators.{i}", Spectator, s) for i, s in enumerate(items)
        ]
    if "motion" in doc:
        doc["motion"] = _section("noise.motion", Motion, doc["motion"], base.motion)
    if "amp_drift" in doc:
        try:
            doc["amp_drift"] = tuple((float(t), float(s)) for t, s in doc["amp_drift"])
        except (TypeError, ValueError) as e:
            raise ConfigError("noise.amp_drift", "expected [[time_s, amp_scale], ...]") from e
    return _section("noise", NoiseModel, doc, base)


def build_config(doc: Mapping[str, Any]) -> ExperimentConfig:
    """Validate a configuration document."""
    known = {f.name for f in fields(ExperimentConfig)}
    for key in doc:
        if key not in known:
            raise ConfigError(key, "unknown key")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ConfigError("kind", f"expected one of {', '.join(KINDS)}, got {kind!r}")
    seed = doc.get("seed")
    if seed is None:
        raise ConfigError("seed", "a seed is required")
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed", f"expected a non-negative integer, got {seed!r}")
    out = doc.get("out", ".")
    if not isinstance(out, str):
        raise ConfigError("out", "expected a directory name")

    rb_doc = dict(doc.get("rb") or {})
    if "seed" in rb_doc:
        raise ConfigError("rb.seed", "set the top-level seed instead")
    rb_doc["seed"] = seed
    return ExperimentConfig(
        kind=kind,
        seed=seed,
        out=out,
        ions=_section("ions", IonSet, doc.get("ions")),
        noise=_noise(doc.get("noise")),
        rb=_section("rb", RBConfig, rb_doc),
        synth=_synth(doc.get("synth")),
        sweep=_section("sweep", SweepConfig, doc.get("sweep")),
        calibrate=_section("calibrate", CalibrateConfig, doc.get("calibrate")),
        drift=_section("drift", DriftConfig, doc.get("drift")),
        budget=_section("budget", CliffordStats, doc.get("budget")),
    )


def load_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Iterable[str] = (),
    **settings: Any,
) -> ExperimentConfig:
    """Read `path` (if any), replace top-level keys with the `settings`
    that are not None, then apply `overrides`."""
    doc = load_document(path) if path is not None else {}
    for key, value in settings.items():
        if value is not None:
            doc[key] = value
    return build_config(apply_overrides(doc, overrides))
