"""Noise knobs of the qubit simulator.

Frequencies are in Hz, times in seconds. A default `NoiseModel` is
noiseless; `reference_noise` returns the parameter set used for the
single-qubit error budget.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, fields, replace
from typing import Optional, Tuple

# Budget sources, in budget order
SOURCES: Tuple[str, ...] = (
    "decoherence",
    "motion",
    "leakage",
    "amplitude",
    "detuning",
    "zeeman",
    "spectator",
)


@dataclass(frozen=True)
class Spectator:
    """A nearby transition, driven off-resonantly from qubit `level`."""

    detuning_hz: float
    relative_rabi: float = 1.0
    level: int = 0

    def __post_init__(self) -> None:
        if self.level not in (0, 1):
            raise ValueError(f"Spectators couple to qubit level 0 or 1, not {self.level}")


@dataclass(frozen=True)
class Motion:
    """Classical Rabi modulation by thermal motion of one mode.

    Without an explicit `rel_amp_mod`, the modulation depth follows from the
    Lamb-Dicke parameter and the mean occupation: the classical amplitude
    of a thermal state is ``sqrt(2 (2 nbar + 1))`` ground-state widths.
    """

    enabled: bool = False
    mode_freq_hz: float = 5.66e6
    rel_amp_mod: Optional[float] = None
    eta: float = 8e-4
    nbar: float = 23.0

    def __post_init__(self) -> None:
        if self.enabled and not self.mode_freq_hz > 0:
            raise ValueError(
                f"Mode frequency must be positive, got {self.mode_freq_hz}"
            )

    @property
    def depth(self) -> float:
        if not self.enabled:
            return 0.0
        if self.rel_amp_mod is not None:
            return self.rel_amp_mod
        return self.eta * math.sqrt(2 * (2 * self.nbar + 1))


@dataclass(frozen=True)
class NoiseModel:
    """Error sources of a driven qubit.

    ``drive_offset_hz`` and ``zeeman_comp_hz`` are what the control system
    applies; the others describe the qubit. ``amp_drift`` is a trace of
    ``(time_s, amp_scale)`` samples, replayed with a zero-order hold; when
    given it overrides ``amp_scale``.
    """

    detuning_hz: float = 0.0
    t2_s: float = math.inf
    amp_scale: float = 1.0
    amp_drift: Tuple[Tuple[float, float], ...] = ()
    zeeman_shift_hz: float = 0.0
    zeeman_comp_hz: float = 0.0
    drive_offset_hz: float = 0.0
    spectators: Tuple[Spectator, ...] = ()
    leakage_per_s: float = 0.0
    motion: Motion = field(default_factory=Motion)
    spam: float = 0.0
    frame_tracking: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "spectators", tuple(self.spectators))
        object.__setattr__(
            self,
            "amp_drift",
            tuple(sorted((float(t), float(s)) for t, s in self.amp_drift)),
        )
        if not self.t2_s > 0:
            raise ValueError(f"T2 must be positive, got {self.t2_s}")
        if self.leakage_per_s < 0:
            raise ValueError(f"Leakage rate must not be negative, got {self.leakage_per_s}")
        if not 0 <= self.spam <= 1:
            raise ValueError(f"SPAM error must be a probability, got {self.spam}")

    @property
    def dims(self) -> int:
        return 2 + len(self.spectators)

    @property
    def dephasing_rate(self) -> float:
        """Phase-flip rate: half the coherence decay rate ``1/T2``."""
        return 0.5 / self.t2_s

    @property
    def pulse_detuning_hz(self) -> float:
        """Qubit detuning from the drive while a pulse is on."""
        return (
            self.detuning_hz
            - self.drive_offset_hz
            + self.zeeman_shift_hz
            - self.zeeman_comp_hz
        )

    @property
    def delay_detuning_hz(self) -> float:
        """Qubit detuning in the tracked frame between pulses."""
        return self.detuning_hz - self.drive_offset_hz

    def amp_scale_at(self, time_s: float) -> float:
        """Amplitude scale in force at `time_s`.

        >>> NoiseModel(amp_drift=((0.0, 1.0), (10.0, 1.001))).amp_scale_at(12.0)
        1.001
        """
        if not self.amp_drift:
            return self.amp_scale
        times = [t for t, _ in self.amp_drift]
        i = max(bisect.bisect_right(times, time_s) - 1, 0)
        return self.amp_drift[i][1]

    def at(self, time_s: float) -> NoiseModel:
        """The model with drift resolved at `time_s`; hashable and static."""
        if not self.amp_drift:
            return self
        return replace(self, amp_scale=self.amp_scale_at(time_s), amp_drift=())

    def only(self, source: str) -> NoiseModel:
        """Keep one budget source, switch all others off.

        A compensating control travels with the source it compensates,
        so a source can be the residual of a calibration.
        """
        if source not in SOURCES:
            raise ValueError(f"Unknown noise source {source!r}")
        quiet = NoiseModel(frame_tracking=self.frame_tracking)
        if source == "decoherence":
            return replace(quiet, t2_s=self.t2_s)
        if source == "motion":
            return replace(quiet, motion=self.motion)
        if source == "leakage":
            return replace(quiet, leakage_per_s=self.leakage_per_s)
        if source == "amplitude":
            return replace(quiet, amp_scale=self.amp_scale, amp_drift=self.amp_drift)
        if source == "detuning":
            return replace(
                quiet,
                detuning_hz=self.detuning_hz,
                drive_offset_hz=self.drive_offset_hz,
            )
        if source == "zeeman":
            return replace(
                quiet,
                zeeman_shift_hz=self.zeeman_shift_hz,
                zeeman_comp_hz=self.zeeman_comp_hz,
            )
        return replace(quiet, spectators=self.spectators)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["spectators"] = [vars(s).copy() for s in self.spectators]
        d["motion"] = vars(self.motion).copy()
        d["amp_drift"] = [list(p) for p in self.amp_drift]
        return d


def reference_noise() -> NoiseModel:
    """Single-qubit parameter set behind the error budget.

    Dephasing and leakage are measured values. The amplitude, detuning and
    Zeeman entries are typical day-to-day offsets from their calibrated
    values. The four spectators sit symmetrically around the qubit, so
    their light shifts cancel; the net drive-induced shift is carried by
    the Zeeman entry.
    """
    return NoiseModel(
        detuning_hz=30.0,
        t2_s=4.6,
        amp_scale=1.0 + 3.0e-4,
        zeeman_shift_hz=283.0,
        zeeman_comp_hz=230.0,
        spectators=(
            Spectator(100e6, 1.0, 0),
            Spectator(-100e6, 1.0, 0),
            Spectator(100e6, 1.0, 1),
            Spectator(-100e6, 1.0, 1),
        ),
        leakage_per_s=0.02,
        motion=Motion(enabled=True),
    )
