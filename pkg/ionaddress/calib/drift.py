"""Amplitude drift monitoring.

A probe applies ``n`` identical pulses whose total rotation is an odd
number ``q`` of quarter turns on each ion. Near such a rotation the
excited population is most sensitive to the amplitude:

    2 P1 - 1 = +-sin(q pi delta / 2)

with ``+`` when ``q % 4 == 1``. Inverting this gives the relative
amplitude error ``delta``, which is reported together with the error it
causes on a single pi/2 pulse, ``(pi delta / 2)**2 / 6``.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import replace
from pathlib import Path
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

from ionaddress.calib.search import CalibrationError
from ionaddress.qsim import Simulator
from ionaddress.synth.pulse import INTER_PULSE_DELAY, Pulse

log = logging.getLogger(__name__)

DRIFT_HEADER = ("time_s", "amp_scale")

# populations closer than this to 0 or 1 cannot be inverted reliably
BRANCH_EDGE = 0.999


class DriftPoint(NamedTuple):
    time_s: float
    ion: int
    population: float
    amp_error: float
    pulse_error: float


def quarter_turns(
    sim: Simulator,
    pulses: int,
    turns: Optional[int] = None,
    ions: Sequence[int] = (0,),
) -> Tuple[int, ...]:
    """Quarter turns made by the probe on each of `ions`.

    Ion 0 makes `turns` (default one per pulse); the others follow from
    their Rabi ratios and must also come out odd.

    >>> from ionaddress.synth import IonSet
    >>> quarter_turns(Simulator(ions=IonSet((1.0, 223 / 177))), 100, 223, (0, 1))
    (223, 177)
    """
    if pulses < 1:
        raise ValueError(f"Probe needs at least one pulse, got {pulses}")
    q0 = pulses if turns is None else turns
    counts = []
    for k in ions:
        q = q0 * sim.ions.ratio(k)
        if abs(q - round(q)) > 1e-9 or round(q) % 2 == 0:
            raise ValueError(f"Ion {k} makes {q:g} quarter turns; need an odd number")
        counts.append(int(round(q)))
    return tuple(counts)


def amplitude_error(population: float, turns: int) -> float:
    """Relative amplitude error from the excited population after `turns`
    quarter turns.

    >>> amplitude_error(0.5, 101)
    0.0
    """
    x = 2.0 * population - 1.0
    if abs(x) > BRANCH_EDGE:
        raise CalibrationError(
            f"Population {population:.6f} is outside the invertible branch"
        )
    sign = 1.0 if turns % 4 == 1 else -1.0
    return sign * 2.0 / (turns * math.pi) * math.asin(x)


def pulse_error(amp_error: float) -> float:
    return (math.pi * amp_error / 2) ** 2 / 6


def probe(
    sim: Simulator,
    time_s: float,
    pulses: int,
    turns: Optional[int] = None,
    ions: Sequence[int] = (0,),
) -> List[DriftPoint]:
    """Run one probe at `time_s` and infer the amplitude error per ion."""
    counts = quarter_turns(sim, pulses, turns, ions)
    amplitude = counts[0] / pulses * sim.a_pi(0) / 2
    resolved = replace(sim, noise=sim.noise.at(time_s))
    points = []
    for ion, q in zip(ions, counts):
        state = resolved.repeat(
            [Pulse(amplitude, 0.0)], pulses, ion, INTER_PULSE_DELAY, resolved.ground(time_s)
        )
        delta = amplitude_error(state.p1, q)
        points.append(DriftPoint(time_s, ion, state.p1, delta, pulse_error(delta)))
    return points


def drift_monitor(
    sim: Simulator,
    pulses_per_probe: int = 101,
    schedule: Iterable[float] = (0.0,),
    turns: Optional[int] = None,
    ions: Sequence[int] = (0,),
) -> List[DriftPoint]:
    """Probe at every time of `schedule`; one point per ion and time."""
    series = []
    for t in schedule:
        points = probe(sim, t, pulses_per_probe, turns, ions)
        log.debug("Drift at %.3f s: %s", t, [p.amp_error for p in points])
        series.extend(points)
    return series


def read_drift_csv(path: Union[str, Path]) -> Tuple[Tuple[float, float], ...]:
    """Read a ``time_s,amp_scale`` trace for `NoiseModel.amp_drift`."""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != DRIFT_HEADER:
            raise ValueError(f"Drift trace {path} must have header {','.join(DRIFT_HEADER)}")
        return tuple((float(row["time_s"]), float(row["amp_scale"])) for row in reader)


def write_drift_csv(trace: Sequence[Tuple[float, float]], path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(DRIFT_HEADER)
        for t, s in trace:
            writer.writerow((repr(float(t)), repr(float(s))))
