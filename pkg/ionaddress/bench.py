"""Randomized benchmarking on the simulated qubits.

A sequence of ``m`` random Cliffords is closed by one more Clifford that
makes the whole sequence a Pauli rotation, so a perfect run ends in a
known basis state. The probability of finding it decays as

    P(m) = 0.5 + (0.5 - spam) * alpha**m

and the error per gate is ``(1 - alpha) / 2``.

In simultaneous mode each ion gets its own Clifford stream. The streams
are compiled to generator gates, the shorter one is padded with identity
gates, and every aligned gate pair becomes one addressed pulse sequence
from an orbit library.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import (
    Dict,
    Hashable,
    Iterable,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from ionaddress.clifford import GENERATOR_PHASES, CliffordTable, build_clifford_table
from ionaddress.qsim import (
    DEFAULT_SETTINGS,
    Channel,
    IntegratorSettings,
    NoiseModel,
    QubitState,
    apply_channel,
    delay_channel,
    propagate_delay,
    run_sequence,
    sequence_channel,
)
from ionaddress.synth import IDENTITY, IonSet, OrbitLibrary, Pulse, PulseSequence
from ionaddress.synth.pulse import INTER_PULSE_DELAY, PULSE_DURATION, RAMP_TIME

log = logging.getLogger(__name__)

MODES = ("single", "simultaneous")
GATE_METRICS = ("clifford", "addressed_gate")

# survivals spread less than this carry no decay
DEGENERATE = 1e-12

FIT_CONVENTION = (
    "P(m) = 0.5 + (0.5 - spam) * alpha**m; error_per_gate = (1 - alpha) / 2; "
    "least squares weighted by binomial shot noise when shots are set, unweighted otherwise"
)

SURVIVAL_HEADER = ("mode", "ion", "length", "trial", "survival")


class CompilationError(Exception):
    """Raised when a gate stream cannot be compiled to pulses."""


@dataclass(frozen=True)
class RBConfig:
    lengths: Tuple[int, ...] = (1, 10, 100, 1000)
    trials_per_length: int = 10
    seed: int = 0
    mode: str = "single"
    gate_metric: str = "clifford"
    ion: int = 0
    shots: Optional[int] = None
    spam_reference: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "lengths", tuple(int(m) for m in self.lengths))
        if not self.lengths or self.lengths[0] < 1:
            raise ValueError(f"Sequence lengths must be at least 1, got {self.lengths}")
        if any(b <= a for a, b in zip(self.lengths, self.lengths[1:])):
            raise ValueError(f"Sequence lengths must increase strictly, got {self.lengths}")
        if self.trials_per_length < 1:
            raise ValueError(f"Need at least one trial per length, got {self.trials_per_length}")
        if self.mode not in MODES:
            raise ValueError(f"Unknown RB mode {self.mode!r}")
        if self.gate_metric not in GATE_METRICS:
            raise ValueError(f"Unknown gate metric {self.gate_metric!r}")
        if self.shots is not None and self.shots < 1:
            raise ValueError(f"Shot count must be positive, got {self.shots}")
        if self.workers < 1:
            raise ValueError(f"Worker count must be positive, got {self.workers}")


class RBSequence(NamedTuple):
    """Clifford indices in time order, the last one closing the sequence."""

    cliffords: Tuple[int, ...]
    pauli: int
    expected: int


def trial_rng(seed: int, length: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, length, trial)))


def gen_rb_sequence(
    m: int, rng: np.random.Generator, table: Optional[CliffordTable] = None
) -> RBSequence:
    """``m`` uniform Cliffords and a closing Clifford; the total is a Pauli.

    The expected outcome from ``|0>`` is 1 for X(pi) and Y(pi), 0 for the
    identity and Z(pi).
    """
    if m < 1:
        raise ValueError(f"Sequence length must be at least 1, got {m}")
    table = table or build_clifford_table()
    cliffords = [int(c) for c in rng.integers(len(table), size=m)]
    total = 0
    for c in cliffords:
        total = table.multiply(c, total)
    pauli_pos = int(rng.integers(4))
    pauli = table.paulis[pauli_pos]
    closing = table.multiply(pauli, table.inverse_index[total])
    expected = 1 if pauli_pos in (1, 2) else 0
    return RBSequence(tuple(cliffords) + (closing,), pauli, expected)


def clifford_stream(
    cliffords: Iterable[int], table: Optional[CliffordTable] = None
) -> Tuple[str, ...]:
    """Generator gates of a Clifford sequence, in time order."""
    table = table or build_clifford_table()
    return tuple(g for c in cliffords for g in table.words[c])


def generator_pulse(
    generator: str,
    a_pi: float,
    duration: float = PULSE_DURATION,
    ramp_time: float = RAMP_TIME,
) -> Pulse:
    return Pulse(a_pi / 2, GENERATOR_PHASES[generator], duration, ramp_time)


def compile_single(
    cliffords: Iterable[int],
    a_pi: float = 1.0,
    table: Optional[CliffordTable] = None,
    duration: float = PULSE_DURATION,
    ramp_time: float = RAMP_TIME,
    inter_pulse_delay: float = INTER_PULSE_DELAY,
) -> PulseSequence:
    """One pi/2 pulse per generator; the identity compiles to no pulses."""
    return PulseSequence(
        tuple(
            generator_pulse(g, a_pi, duration, ramp_time)
            for g in clifford_stream(cliffords, table)
        ),
        inter_pulse_delay,
    )


def pulses_per_clifford(table: Optional[CliffordTable] = None) -> float:
    return (table or build_clifford_table()).mean_word_length


def pad_streams(
    words_ion0: Sequence[str], words_ion1: Sequence[str]
) -> List[Tuple[str, str]]:
    """Align two generator streams, padding the shorter with identities."""
    n = max(len(words_ion0), len(words_ion1))
    a = tuple(words_ion0) + (IDENTITY,) * (n - len(words_ion0))
    b = tuple(words_ion1) + (IDENTITY,) * (n - len(words_ion1))
    return list(zip(a, b))


def compile_simultaneous(
    words_ion0: Sequence[str], words_ion1: Sequence[str], library: OrbitLibrary
) -> List[PulseSequence]:
    """One addressed pulse sequence per aligned gate pair."""
    compiled = []
    for pair in pad_streams(words_ion0, words_ion1):
        if pair == (IDENTITY, IDENTITY):
            raise CompilationError("Identity on both ions is never compiled")
        try:
            compiled.append(library.sequence_for(pair))
        except KeyError as e:
            raise CompilationError(e.args[0]) from e
    return compiled


class SurvivalRecord(NamedTuple):
    mode: str
    ion: int
    length: int
    trial: int
    survival: float


class DecayFit(NamedTuple):
    error_per_gate: float
    error_stderr: float
    spam: float
    alpha: float
    degenerate: bool = False


def _decay(m: np.ndarray, amplitude: float, rate: float) -> np.ndarray:
    return 0.5 + amplitude * np.exp(-rate * m)


FAILED_FIT = DecayFit(math.nan, math.inf, math.nan, math.nan, True)


def fit_decay(
    lengths: Sequence[float],
    survivals: Sequence[float],
    sigma: Optional[Sequence[float]] = None,
) -> DecayFit:
    """Least-squares fit of the RB decay, weighted by `sigma` if given.

    The decay is fitted as ``exp(-rate * m)`` with ``alpha = exp(-rate)``,
    starting from a log-linear fit. Survivals that do not decay towards
    0.5 (the fit fails, the rate comes out negative, the amplitude is not
    positive or the covariance is not finite) give ``FAILED_FIT``, whose
    error per gate is NaN.

    >>> m = np.array([1, 10, 100, 1000])
    >>> fit = fit_decay(m, 0.5 + 0.49 * (1 - 2e-4) ** m)
    >>> round(fit.error_per_gate, 12), round(fit.spam, 9)
    (0.0001, 0.01)
    """
    m = np.asarray(lengths, dtype=float)
    p = np.asarray(survivals, dtype=float)
    if len(np.unique(m)) < 3:
        raise ValueError("Fitting a decay needs at least three distinct lengths")
    if np.ptp(p) < DEGENERATE:
        return DecayFit(0.0, math.inf, 1.0 - float(np.mean(p)), 1.0, True)

    y = np.clip(p - 0.5, 1e-12, None)
    slope, intercept = np.polyfit(m, np.log(y), 1)
    p0 = (math.exp(intercept), max(-slope, 0.0))
    try:
        with warnings.catch_warnings(), np.errstate(over="ignore", invalid="ignore"):
            warnings.simplefilter("ignore", OptimizeWarning)
            params, cov = curve_fit(
                _decay,
                m,
                p,
                p0=p0,
                sigma=sigma,
                absolute_sigma=sigma is not None,
                xtol=1e-12,
                ftol=1e-12,
                maxfev=10000,
            )
    except (RuntimeError, ValueError) as e:
        log.info("Decay fit failed: %s", e)
        return FAILED_FIT
    amplitude, rate = (float(v) for v in params)
    if not (rate >= 0 and amplitude > 0 and np.all(np.isfinite(cov))):
        log.info("No decay in survivals (amplitude %.3g, rate %.3g)", amplitude, rate)
        return FAILED_FIT
    alpha = math.exp(-rate)
    return DecayFit(
        error_per_gate=(1.0 - alpha) / 2,
        error_stderr=alpha * math.sqrt(cov[1, 1]) / 2,
        spam=0.5 - amplitude,
        alpha=alpha,
    )


class _Runner:
    """Runs gate segments on one ion, reusing composed channels when the
    noise is static."""

    def __init__(
        self,
        noise: NoiseModel,
        a_pi: float,
        settings: IntegratorSettings,
        as_delays: bool = False,
    ) -> None:
        self.noise = noise
        self.a_pi = a_pi
        self.settings = settings
        self.as_delays = as_delays
        self.static = not noise.amp_drift and noise.frame_tracking
        self._channels: Dict[Hashable, Channel] = {}

    def _channel(self, key: Hashable, seq: PulseSequence) -> Channel:
        channel = self._channels.get(key)
        if channel is None:
            if self.as_delays:
                channel = delay_channel(seq.duration, self.noise)
            else:
                channel = sequence_channel(seq, self.a_pi, self.noise, self.settings)
            self._channels[key] = channel
        return channel

    def run(self, segments: Iterable[Tuple[Hashable, PulseSequence]]) -> QubitState:
        state = QubitState.ground(self.noise.dims, self.noise.spam)
        for key, seq in segments:
            if self.static:
                state = apply_channel(state, self._channel(key, seq))
            elif self.as_delays:
                state = propagate_delay(state, seq.duration, self.noise)
            else:
                state = run_sequence(state, seq, self.a_pi, self.noise, self.settings)
        return state.check()


@dataclass
class _Job:
    config: RBConfig
    noise: NoiseModel
    ions: IonSet
    library: Optional[OrbitLibrary]
    settings: IntegratorSettings
    runners: Dict[int, _Runner] = field(default_factory=dict)

    def runner(self, ion: int) -> _Runner:
        if ion not in self.runners:
            self.runners[ion] = _Runner(
                self.noise, self.ions.a_pi[ion], self.settings, self.config.spam_reference
            )
        return self.runners[ion]

    def survival(
        self,
        ion: int,
        segments: List[Tuple[Hashable, PulseSequence]],
        expected: int,
        rng: np.random.Generator,
    ) -> float:
        state = self.runner(ion).run(segments)
        outcome = 0 if self.config.spam_reference else expected
        p = min(max(state.population(outcome), 0.0), 1.0)
        if self.config.shots:
            p = rng.binomial(self.config.shots, p) / self.config.shots
        return p

    def trial(self, length: int, trial: int) -> List[SurvivalRecord]:
        config = self.config
        rng = trial_rng(config.seed, length, trial)
        table = build_clifford_table()
        if config.mode == "single":
            rb = gen_rb_sequence(length, rng, table)
            a_pi = self.ions.a_pi[config.ion]
            segments: List[Tuple[Hashable, PulseSequence]] = [
                (c, compile_single((c,), a_pi, table)) for c in rb.cliffords
            ]
            gates = sum(len(seq) for _, seq in segments)
            metric = length if config.gate_metric == "clifford" else gates
            p = self.survival(config.ion, segments, rb.expected, rng)
            return [SurvivalRecord(config.mode, config.ion, metric, trial, p)]

        if self.library is None:
            raise CompilationError("Simultaneous RB needs an orbit library")
        rbs = [gen_rb_sequence(length, rng, table) for _ in range(2)]
        streams = [clifford_stream(rb.cliffords, table) for rb in rbs]
        pairs = pad_streams(*streams)
        segments = list(zip(pairs, compile_simultaneous(*streams, self.library)))
        metric = length if config.gate_metric == "clifford" else len(pairs)
        return [
            SurvivalRecord(
                config.mode, ion, metric, trial, self.survival(ion, segments, rb.expected, rng)
            )
            for ion, rb in enumerate(rbs)
        ]


def _run_trial(job: _Job, length: int, trial: int) -> List[SurvivalRecord]:
    return job.trial(length, trial)


@dataclass(frozen=True)
class RBResult:
    config: RBConfig
    records: Tuple[SurvivalRecord, ...]
    fits: Tuple[Tuple[int, DecayFit], ...]

    @property
    def ions(self) -> Tuple[int, ...]:
        return tuple(sorted({r.ion for r in self.records}))

    def survival(self, ion: int) -> Tuple[np.ndarray, np.ndarray]:
        """Lengths and survivals of all trials on `ion`."""
        rs = [r for r in self.records if r.ion == ion]
        return np.array([r.length for r in rs]), np.array([r.survival for r in rs])

    def mean_survival(self, ion: int) -> Dict[int, float]:
        lengths, survivals = self.survival(ion)
        return {
            int(m): float(np.mean(survivals[lengths == m])) for m in np.unique(lengths)
        }

    def fit(self, ion: int) -> DecayFit:
        return dict(self.fits)[ion]

    @property
    def average_error(self) -> float:
        return float(np.mean([f.error_per_gate for _, f in self.fits]))

    def spam(self, ion: int) -> float:
        """Reference-measured SPAM in reference mode, fitted otherwise."""
        if self.config.spam_reference:
            return 1.0 - float(np.mean(self.survival(ion)[1]))
        return self.fit(ion).spam


def _sigma(survivals: np.ndarray, shots: Optional[int]) -> Optional[np.ndarray]:
    """Binomial shot noise per survival; None, an unweighted fit, without shots."""
    if not shots:
        return None
    return np.sqrt(np.clip(survivals * (1 - survivals), 1.0 / shots, None) / shots)


def run_rb(
    config: RBConfig,
    noise: NoiseModel,
    ions: IonSet = IonSet(),
    library: Optional[OrbitLibrary] = None,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
) -> RBResult:
    """Run every (length, trial); trials are independent and seeded."""
    if config.mode == "simultaneous":
        if library is None:
            raise CompilationError("Simultaneous RB needs an orbit library")
        if library.ions != ions:
            raise CompilationError("Orbit library was synthesized for a different ion set")
    elif not 0 <= config.ion < len(ions):
        raise ValueError(f"No ion {config.ion} in a set of {len(ions)}")

    job = _Job(config, noise, ions, library, settings)
    tasks = [(m, t) for m in config.lengths for t in range(config.trials_per_length)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            chunks = list(
                executor.map(
                    _run_trial, [job] * len(tasks), *zip(*tasks)
                )
            )
    else:
        chunks = [job.trial(m, t) for m, t in tasks]
    records = tuple(r for chunk in chunks for r in chunk)

    fits = []
    if not config.spam_reference and len(config.lengths) >= 3:
        for ion in sorted({r.ion for r in records}):
            rs = [r for r in records if r.ion == ion]
            survivals = np.array([r.survival for r in rs])
            fit = fit_decay(
                [r.length for r in rs], survivals, _sigma(survivals, config.shots)
            )
            log.info("Ion %d: error per gate %.3g", ion, fit.error_per_gate)
            fits.append((ion, fit))
    return RBResult(config, records, tuple(fits))


def write_survival_csv(result: RBResult, path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SURVIVAL_HEADER)
        for r in result.records:
            writer.writerow((r.mode, r.ion, r.length, r.trial, repr(r.survival)))


def _finite(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def fit_summary(result: RBResult) -> Dict[str, object]:
    """Fit parameters per ion; values a failed fit cannot give are null."""
    return {
        "convention": FIT_CONVENTION,
        "fits": [
            {
                "ion": ion,
                "error_per_gate": _finite(fit.error_per_gate),
                "error_stderr": _finite(fit.error_stderr),
                "spam": _finite(fit.spam),
                "alpha": _finite(fit.alpha),
            }
            for ion, fit in result.fits
        ],
    }


def write_fit_json(result: RBResult, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(fit_summary(result), indent=2, sort_keys=True) + "\n")
