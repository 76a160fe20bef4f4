"""Pulses, pulse trains and the ideal (area rule) rotations they drive.

A pulse of amplitude ``A`` and phase ``phi`` rotates ion ``k`` by
``theta_k = pi * A / a_pi[k]`` about the equatorial axis at azimuth
``phi``. All ions see the same phase; only the angle differs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence, Tuple

import numpy as np

from ionaddress.rotor import (
    TWO_PI,
    Rotation,
    equatorial_quats,
    quat_multiply,
    rot_from_axis_angle,
)

# Single-qubit pi/2 pulse shape: 600 ns with two 120 ns sin^2 ramps
PULSE_DURATION = 600e-9
RAMP_TIME = 120e-9
INTER_PULSE_DELAY = 2e-6

# Addressing pulses are longer: four of them make one addressed gate
ADDRESSING_PULSE_DURATION = 2.12e-6


@dataclass(frozen=True)
class Pulse:
    """A single shaped microwave pulse.

    Amplitude is in the units of the ions' pi-pulse amplitudes. A negative
    amplitude is folded into the phase:

    >>> Pulse(-1.0, 0.0).normalized()
    Pulse(amplitude=1.0, phase=3.141592653589793, duration=6e-07, ramp_time=1.2e-07)
    """

    amplitude: float
    phase: float
    duration: float = PULSE_DURATION
    ramp_time: float = RAMP_TIME

    def __post_init__(self) -> None:
        if not self.duration > 0:
            raise ValueError(f"Pulse duration must be positive, got {self.duration}")
        if self.ramp_time < 0 or 2 * self.ramp_time > self.duration:
            raise ValueError(
                f"Ramp time {self.ramp_time} does not fit in a {self.duration} s pulse"
            )

    def normalized(self) -> Pulse:
        if self.amplitude < 0:
            return replace(
                self, amplitude=-self.amplitude, phase=(self.phase + math.pi) % TWO_PI
            )
        return replace(self, phase=self.phase % TWO_PI)

    @property
    def effective_duration(self) -> float:
        """Area of the envelope: each sin^2 ramp counts for half its length."""
        return self.duration - self.ramp_time


@dataclass(frozen=True)
class PulseSequence:
    """A time ordered pulse train. All pulses share one temporal shape."""

    pulses: Tuple[Pulse, ...]
    inter_pulse_delay: float = INTER_PULSE_DELAY

    def __post_init__(self) -> None:
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if self.inter_pulse_delay < 0:
            raise ValueError(
                f"Inter-pulse delay must not be negative, got {self.inter_pulse_delay}"
            )
        shapes = {(p.duration, p.ramp_time) for p in self.pulses}
        if len(shapes) > 1:
            raise ValueError("All pulses in a sequence need the same temporal shape")

    @classmethod
    def from_arrays(
        cls,
        amplitudes: Iterable[float],
        phases: Iterable[float],
        duration: float = PULSE_DURATION,
        ramp_time: float = RAMP_TIME,
        inter_pulse_delay: float = INTER_PULSE_DELAY,
    ) -> PulseSequence:
        return cls(
            tuple(
                Pulse(float(a), float(p), duration, ramp_time).normalized()
                for a, p in zip(amplitudes, phases)
            ),
            inter_pulse_delay,
        )

    def __len__(self) -> int:
        return len(self.pulses)

    def __iter__(self) -> Iterator[Pulse]:
        return iter(self.pulses)

    def __add__(self, other: PulseSequence) -> PulseSequence:
        return PulseSequence(self.pulses + other.pulses, self.inter_pulse_delay)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([p.amplitude for p in self.pulses])

    @property
    def phases(self) -> np.ndarray:
        return np.array([p.phase for p in self.pulses])

    @property
    def duration(self) -> float:
        """Total time including the delay after every pulse."""
        return sum(p.duration + self.inter_pulse_delay for p in self.pulses)


@dataclass(frozen=True)
class IonSet:
    """Per-ion pi-pulse amplitudes.

    >>> IonSet.from_ratios(1.0, 0.80).a_pi
    (1.0, 1.25)
    """

    a_pi: Tuple[float, ...] = field(default=(1.0, 1.25))

    def __post_init__(self) -> None:
        object.__setattr__(self, "a_pi", tuple(float(a) for a in self.a_pi))
        if not self.a_pi:
            raise ValueError("An ion set needs at least one ion")
        if any(not a > 0 for a in self.a_pi):
            raise ValueError(f"Pi-pulse amplitudes must be positive, got {self.a_pi}")

    @classmethod
    def from_ratios(cls, a_pi0: float, *ratios: float) -> IonSet:
        """Build from ion 0's pi amplitude and the other ions' Rabi ratios."""
        return cls((a_pi0,) + tuple(a_pi0 / r for r in ratios))

    def __len__(self) -> int:
        return len(self.a_pi)

    def ratio(self, k: int) -> float:
        """Rabi frequency of ion `k` relative to ion 0."""
        return self.a_pi[0] / self.a_pi[k]


def _check_a_pi(a_pi_k: float) -> None:
    if not a_pi_k > 0:
        raise ValueError(f"Pi-pulse amplitude must be positive, got {a_pi_k}")


def ideal_pulse_rotation(pulse: Pulse, a_pi_k: float) -> Rotation:
    """Rotation driven by `pulse` on an ion with pi amplitude `a_pi_k`."""
    _check_a_pi(a_pi_k)
    return rot_from_axis_angle(pulse.phase, math.pi * pulse.amplitude / a_pi_k)


def sequence_quats(
    amplitudes: np.ndarray, phases: np.ndarray, a_pi: Sequence[float]
) -> np.ndarray:
    """Net rotation quaternion of a pulse train for every ion, shape (ions, 4).

    The first pulse is applied first.
    """
    a_pi = np.asarray(a_pi, dtype=float)
    q = np.zeros((len(a_pi), 4))
    q[:, 0] = 1.0
    for amplitude, phase in zip(amplitudes, phases):
        pulse_q = equatorial_quats(np.full(len(a_pi), phase), math.pi * amplitude / a_pi)
        q = quat_multiply(pulse_q, q)
    return q


def sequence_rotation(seq: PulseSequence, a_pi_k: float) -> Rotation:
    """Net rotation of `seq` on one ion, first pulse applied first."""
    _check_a_pi(a_pi_k)
    if not seq.pulses:
        raise ValueError("Cannot compute the rotation of an empty pulse sequence")
    q = sequence_quats(seq.amplitudes, seq.phases, (a_pi_k,))[0]
    return Rotation.from_quat(q)


def shift_phases(seq: PulseSequence, delta_axis: float) -> PulseSequence:
    """Add `delta_axis` to every pulse phase.

    Every realized gate ``G`` becomes ``Rz(delta) G Rz(-delta)``.
    """
    return replace(
        seq,
        pulses=tuple(
            replace(p, phase=(p.phase + delta_axis) % TWO_PI) for p in seq.pulses
        ),
    )
