"""Error versus one gate parameter, with a least-squares error model.

Offsets of detuning, amplitude and pulse-on Zeeman compensation are
expected to cost quadratically; inter-pulse delay costs linearly, and the
slope gives the dephasing time back: a unit error grows by ``dt/(3 T2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ionaddress.qsim.budget import CliffordStats, unit_errors
from ionaddress.qsim.noise import NoiseModel
from ionaddress.qsim.propagate import DEFAULT_SETTINGS, IntegratorSettings

Point = Tuple[NoiseModel, CliffordStats]


def _detuning(noise: NoiseModel, stats: CliffordStats, x: float) -> Point:
    return replace(noise, detuning_hz=noise.detuning_hz + x), stats


def _amplitude(noise: NoiseModel, stats: CliffordStats, x: float) -> Point:
    return replace(noise, amp_scale=noise.amp_scale + x), stats


def _zeeman(noise: NoiseModel, stats: CliffordStats, x: float) -> Point:
    return replace(noise, zeeman_comp_hz=noise.zeeman_comp_hz + x), stats


def _delay(noise: NoiseModel, stats: CliffordStats, x: float) -> Point:
    return noise, replace(stats, delay_s=x)


# variable name -> (how to apply a value, degree of the error model)
VARIABLES: Dict[str, Tuple[Callable[[NoiseModel, CliffordStats, float], Point], int]] = {
    "detuning": (_detuning, 2),
    "amplitude": (_amplitude, 2),
    "zeeman": (_zeeman, 2),
    "delay": (_delay, 1),
}


class SweepPoint(NamedTuple):
    value: float
    error: float
    model: float


@dataclass(frozen=True)
class SweepResult:
    variable: str
    points: Tuple[SweepPoint, ...]
    coefficients: Tuple[float, ...]

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.points])

    @property
    def errors(self) -> np.ndarray:
        return np.array([p.error for p in self.points])

    @property
    def recovered_t2_s(self) -> Optional[float]:
        """Dephasing time implied by a delay sweep's slope."""
        if self.variable != "delay":
            return None
        slope = self.coefficients[0]
        return 1.0 / (3.0 * slope) if slope > 0 else math.inf

    def loglog_slope(self) -> float:
        """Power law exponent over the points with a positive value."""
        keep = self.values > 0
        slope, _ = np.polyfit(np.log(self.values[keep]), np.log(self.errors[keep]), 1)
        return float(slope)


def sweep(
    variable: str,
    values: Sequence[float],
    noise: NoiseModel = NoiseModel(),
    stats: CliffordStats = CliffordStats(),
    settings: IntegratorSettings = DEFAULT_SETTINGS,
) -> SweepResult:
    """Unit error (pi/2 pulse and delay) at each offset of `variable`."""
    try:
        apply, degree = VARIABLES[variable]
    except KeyError:
        raise ValueError(f"Unknown sweep variable {variable!r}") from None
    if len(values) <= degree:
        raise ValueError(f"A {variable} sweep needs more than {degree} points")
    errors = []
    for x in values:
        point_noise, point_stats = apply(noise, stats, x)
        errors.append(unit_errors(point_noise, point_stats, settings)[1])
    coefficients = np.polyfit(values, errors, degree)
    model = np.polyval(coefficients, values)
    return SweepResult(
        variable,
        tuple(SweepPoint(float(x), e, float(m)) for x, e, m in zip(values, errors, model)),
        tuple(float(c) for c in coefficients),
    )


def sweep_detuning(values_hz: Sequence[float], **kwargs) -> SweepResult:
    return sweep("detuning", values_hz, **kwargs)


def sweep_amplitude(offsets: Sequence[float], **kwargs) -> SweepResult:
    return sweep("amplitude", offsets, **kwargs)


def sweep_zeeman(values_hz: Sequence[float], **kwargs) -> SweepResult:
    return sweep("zeeman", values_hz, **kwargs)


def sweep_delay(delays_s: Sequence[float], **kwargs) -> SweepResult:
    return sweep("delay", delays_s, **kwargs)


def motion_scan(
    ratios: Sequence[float],
    depth: float,
    noise: NoiseModel = NoiseModel(),
    stats: CliffordStats = CliffordStats(),
    settings: IntegratorSettings = DEFAULT_SETTINGS,
) -> Tuple[float, ...]:
    """Pulse error against the ratio of mode frequency to Rabi frequency."""
    rabi_hz = 0.25 / (stats.pulse_s - stats.ramp_s)
    errors = []
    for ratio in ratios:
        motion = replace(
            noise.motion, enabled=True, mode_freq_hz=ratio * rabi_hz, rel_amp_mod=depth
        )
        errors.append(unit_errors(replace(noise, motion=motion), stats, settings)[0])
    return tuple(errors)
