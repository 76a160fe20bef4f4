"""Calibration of the controller knobs against a simulated qubit.

Each routine runs the probe experiment a calibration would run on
hardware, and only reads populations:

* amplitude: return probability after ``N`` pi/2 pulses, with ``N``
  growing geometrically up to 1024;
* detuning: population transfer of a weak, long pi pulse against drive
  frequency;
* Zeeman compensation: return probability after 800 pi/2 pulses of
  alternating phase against the pulse-on detuning.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import replace
from pathlib import Path
from typing import Iterable, Iterator, List, NamedTuple, Sequence, Union

import numpy as np

from ionaddress.calib.search import (
    CalibrationError,
    curvature,
    maximize_bounded,
    refine,
    scan,
    scan_then_refine,
)
from ionaddress.qsim import Motion, Simulator
from ionaddress.synth.pulse import INTER_PULSE_DELAY, Pulse

log = logging.getLogger(__name__)

AMPLITUDE_REPETITIONS = (4, 16, 64, 256, 1024)

# Smallest return probability change the readout resolves
READOUT_RESOLUTION = 1e-3

DETUNING_PROBE_S = 2e-3
ZEEMAN_PROBE_PULSES = 800

HISTORY_HEADER = ("step", "parameter", "value", "residual")


class CalibrationRecord(NamedTuple):
    parameter: str
    value: float
    residual: float
    iterations: int
    step: int = 0
    uncertainty: float = math.nan


def _pi2(sim: Simulator, ion: int, phase: float = 0.0) -> Pulse:
    return Pulse(sim.a_pi(ion) / 2, phase)


def _amplitude_probe(sim: Simulator, n: int, ion: int):
    pulse = _pi2(sim, ion)

    def return_probability(correction: float) -> float:
        probe = replace(sim, amp_correction=correction)
        return probe.repeat([pulse], n, ion, INTER_PULSE_DELAY).p0

    return return_probability


def iter_amplitude_stages(
    sim: Simulator,
    init_scale: float = 1.0,
    repetitions: Sequence[int] = AMPLITUDE_REPETITIONS,
    ion: int = 0,
) -> Iterator[CalibrationRecord]:
    """One record per repetition count, each refining the last.

    A stage with ``N`` pulses brackets the amplitude correction to
    ``+-1/N`` around the previous estimate. Its uncertainty is the
    correction offset that lowers the return probability by the readout
    resolution, so it shrinks as ``1/N``.
    """
    if not init_scale > 0:
        raise ValueError(f"Initial amplitude scale must be positive, got {init_scale}")
    correction = 1.0 / init_scale
    for n in repetitions:
        if n < 4 or n % 4:
            raise ValueError(f"Repetition counts must be multiples of 4, got {n}")
        f = _amplitude_probe(sim, n, ion)
        width = correction / n
        result = maximize_bounded(f, correction - width, correction + width, width * 1e-5)
        if not result.converged:
            raise CalibrationError(f"Amplitude search with {n} pulses did not converge")
        correction = result.x
        bend = curvature(f, correction, width * 0.05)
        uncertainty = (
            math.sqrt(2 * READOUT_RESOLUTION / -bend) / correction**2
            if bend < 0
            else math.inf
        )
        log.debug("Amplitude stage N=%d: scale %.9f", n, 1.0 / correction)
        yield CalibrationRecord(
            "amplitude", 1.0 / correction, 1.0 - result.fx, result.iterations, n, uncertainty
        )


def calibrate_amplitude(
    sim: Simulator,
    init_scale: float = 1.0,
    repetitions: Sequence[int] = AMPLITUDE_REPETITIONS,
    ion: int = 0,
) -> CalibrationRecord:
    """Recover the drive amplitude scale; apply it as ``1/value``."""
    records = list(iter_amplitude_stages(sim, init_scale, repetitions, ion))
    last = records[-1]
    return last._replace(iterations=sum(r.iterations for r in records))


def _weak_probe(sim: Simulator) -> Simulator:
    # the weak pulse shifts the qubit by a negligible amount
    return sim.with_noise(zeeman_shift_hz=0.0, zeeman_comp_hz=0.0, motion=Motion())


def transfer_lineshape(
    sim: Simulator,
    offsets_hz: Iterable[float],
    duration: float = DETUNING_PROBE_S,
    ion: int = 0,
) -> np.ndarray:
    """Population transferred by a square pi pulse at each drive offset."""
    probe = _weak_probe(sim)
    pulse = Pulse(sim.a_pi(ion), 0.0, duration, 0.0)
    return np.array(
        [
            probe.with_controls(drive_offset_hz=f).pulse(probe.ground(), pulse, ion).p1
            for f in offsets_hz
        ]
    )


def _half_width(grid: np.ndarray, values: np.ndarray, best: int) -> float:
    half = values[best] / 2
    left, right = best, best
    while left > 0 and values[left] > half:
        left -= 1
    while right < len(values) - 1 and values[right] > half:
        right += 1
    if values[left] > half or values[right] > half:
        return math.inf

    def crossing(i: int, j: int) -> float:
        return float(np.interp(half, [values[i], values[j]], [grid[i], grid[j]]))

    return (crossing(right, right - 1) - crossing(left, left + 1)) / 2


def calibrate_detuning(
    sim: Simulator,
    duration: float = DETUNING_PROBE_S,
    window_hz: float = 2000.0,
    step_hz: float = 50.0,
    tol_hz: float = 0.01,
    ion: int = 0,
) -> CalibrationRecord:
    """Drive offset that maximizes transfer of a weak pi pulse.

    The uncertainty reported is the half width of the transfer peak.
    """
    center = sim.noise.drive_offset_hz
    grid = center + np.arange(-window_hz, window_hz + step_hz / 2, step_hz)

    def transfer(f: float) -> float:
        return float(transfer_lineshape(sim, [f], duration, ion)[0])

    s = scan(transfer, grid)
    if s.values[s.best] < 0.5:
        raise CalibrationError("No transfer peak in the detuning scan")
    result = refine(transfer, s, tol_hz)
    if not result.converged:
        raise CalibrationError("Detuning search did not converge")
    return CalibrationRecord(
        "detuning",
        result.x,
        1.0 - result.fx,
        result.iterations,
        uncertainty=_half_width(s.grid, s.values, s.best),
    )


def zeeman_return_probability(
    sim: Simulator, comp_hz: float, pulses: int = ZEEMAN_PROBE_PULSES, ion: int = 0
) -> float:
    """Return probability after `pulses` pi/2 pulses of alternating phase."""
    probe = sim.with_controls(zeeman_comp_hz=comp_hz)
    block = [_pi2(sim, ion, 0.0), _pi2(sim, ion, math.pi)]
    return probe.repeat(block, pulses // 2, ion, INTER_PULSE_DELAY).p0


def calibrate_zeeman_compensation(
    sim: Simulator,
    pulses: int = ZEEMAN_PROBE_PULSES,
    window_hz: float = 1000.0,
    step_hz: float = 50.0,
    tol_hz: float = 0.01,
    ion: int = 0,
) -> CalibrationRecord:
    """Pulse-on detuning that best compensates the AC Zeeman shift."""
    if pulses < 2 or pulses % 2:
        raise ValueError(f"Need an even number of probe pulses, got {pulses}")
    center = sim.noise.zeeman_comp_hz
    grid = center + np.arange(-window_hz, window_hz + step_hz / 2, step_hz)
    result = scan_then_refine(
        lambda c: zeeman_return_probability(sim, c, pulses, ion), grid, tol_hz
    )
    if not result.converged:
        raise CalibrationError("Zeeman compensation search did not converge")
    return CalibrationRecord("zeeman_comp", result.x, 1.0 - result.fx, result.iterations)


def apply_calibration(sim: Simulator, record: CalibrationRecord) -> Simulator:
    """Set the controller knob a calibration record is about."""
    if record.parameter == "amplitude":
        return sim.with_controls(amp_correction=1.0 / record.value)
    if record.parameter == "detuning":
        return sim.with_controls(drive_offset_hz=record.value)
    if record.parameter == "zeeman_comp":
        return sim.with_controls(zeeman_comp_hz=record.value)
    raise ValueError(f"Unknown calibration parameter {record.parameter!r}")


def calibrate_all(sim: Simulator, ion: int = 0) -> List[CalibrationRecord]:
    """Detuning, then Zeeman compensation, then amplitude; each applied
    before the next."""
    records = []
    for step, routine in enumerate(
        (calibrate_detuning, calibrate_zeeman_compensation, calibrate_amplitude)
    ):
        record = routine(sim, ion=ion)._replace(step=step)
        sim = apply_calibration(sim, record)
        log.info("Calibrated %s: %.9g", record.parameter, record.value)
        records.append(record)
    return records


def write_history_csv(
    records: Iterable[CalibrationRecord], path: Union[str, Path]
) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(HISTORY_HEADER)
        for r in records:
            writer.writerow((r.step, r.parameter, repr(r.value), repr(r.residual)))
