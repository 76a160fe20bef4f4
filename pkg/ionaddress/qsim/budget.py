"""Single-qubit error budget.

Every noise source is simulated on its own for one gate unit: a pi/2
pulse followed by the inter-pulse delay. The unit error is scaled by the
average number of pulses in a Clifford gate.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Tuple

from ionaddress.qsim.noise import SOURCES, NoiseModel
from ionaddress.qsim.propagate import (
    DEFAULT_SETTINGS,
    IntegratorSettings,
    average_infidelity,
    propagate_delay,
    propagate_pulse,
)
from ionaddress.qsim.state import QubitState
from ionaddress.rotor import X90
from ionaddress.synth.pulse import INTER_PULSE_DELAY, PULSE_DURATION, RAMP_TIME, Pulse

log = logging.getLogger(__name__)

PULSES_PER_CLIFFORD = 2.2


@dataclass(frozen=True)
class CliffordStats:
    pulses_per_clifford: float = PULSES_PER_CLIFFORD
    pulse_s: float = PULSE_DURATION
    delay_s: float = INTER_PULSE_DELAY
    ramp_s: float = RAMP_TIME

    def __post_init__(self) -> None:
        if self.pulses_per_clifford < 0 or self.delay_s < 0:
            raise ValueError("Pulse count and delay must not be negative")

    @property
    def pulse(self) -> Pulse:
        """The pi/2 pulse, on an ion with unit pi amplitude."""
        return Pulse(0.5, 0.0, self.pulse_s, self.ramp_s)


def unit_errors(
    noise: NoiseModel,
    stats: CliffordStats = CliffordStats(),
    settings: IntegratorSettings = DEFAULT_SETTINGS,
) -> Tuple[float, float]:
    """Average infidelity of the pulse alone, and of pulse plus delay."""
    pulse = stats.pulse

    def pulse_only(state: QubitState) -> QubitState:
        return propagate_pulse(state, pulse, 1.0, noise, settings)

    def unit(state: QubitState) -> QubitState:
        return propagate_delay(pulse_only(state), stats.delay_s, noise)

    return (
        average_infidelity(pulse_only, X90, noise.dims),
        average_infidelity(unit, X90, noise.dims),
    )


class BudgetRow(NamedTuple):
    source: str
    pulse_error: float
    delay_error: float
    clifford_error: float


@dataclass(frozen=True)
class ErrorBudget:
    rows: Tuple[BudgetRow, ...]
    stats: CliffordStats

    @property
    def total(self) -> float:
        return sum(r.clifford_error for r in self.rows)

    def row(self, source: str) -> BudgetRow:
        for r in self.rows:
            if r.source == source:
                return r
        raise KeyError(source)

    def total_without(self, *sources: str) -> float:
        return sum(r.clifford_error for r in self.rows if r.source not in sources)

    def records(self) -> List[Dict[str, object]]:
        return [r._asdict() for r in self.rows]


def error_budget(
    noise: NoiseModel,
    stats: CliffordStats = CliffordStats(),
    settings: IntegratorSettings = DEFAULT_SETTINGS,
) -> ErrorBudget:
    """Per-source error per Clifford, one source at a time."""
    quiet = NoiseModel(frame_tracking=noise.frame_tracking)
    rows = []
    for source in SOURCES:
        isolated = noise.only(source)
        if isolated == quiet:
            rows.append(BudgetRow(source, 0.0, 0.0, 0.0))
            continue
        pulse_error, unit_error = unit_errors(isolated, stats, settings)
        log.info("Source %s: %.3g per unit", source, unit_error)
        rows.append(
            BudgetRow(
                source,
                pulse_error,
                unit_error - pulse_error,
                stats.pulses_per_clifford * unit_error,
            )
        )
    return ErrorBudget(tuple(rows), stats)
