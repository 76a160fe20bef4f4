"""Gate pairs that share one pulse sequence.

Shifting every pulse phase of a sequence by ``delta`` turns each realized
gate ``G`` into ``Rz(delta) G Rz(-delta)``. Under quarter turns the gates
``X+, Y+, X-, Y-`` cycle into each other and ``I`` stays put, so the 25
ordered pairs over ``{X+, X-, Y+, Y-, I}`` fall into a handful of orbits.
Only one sequence per orbit needs synthesizing.

>>> len(gate_pairs()), len(orbit_classes())
(25, 6)
"""
from __future__ import annotations

import logging
import math
from typing import Dict, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from ionaddress.rotor import TargetGate, compose, rz
from ionaddress.synth.optimize import RESTART_BUDGET, TOLERANCE, SynthesisResult, synthesize
from ionaddress.synth.pulse import (
    ADDRESSING_PULSE_DURATION,
    INTER_PULSE_DELAY,
    RAMP_TIME,
    IonSet,
    PulseSequence,
    shift_phases,
)

log = logging.getLogger(__name__)

IDENTITY = "I"

# In representative order: the smallest member of an orbit represents it
GATE_ALPHABET: Tuple[str, ...] = ("X+", "X-", "Y+", "Y-", IDENTITY)

GATE_TARGETS: Dict[str, TargetGate] = {
    "X+": TargetGate(math.pi / 2, 0.0),
    "X-": TargetGate(math.pi / 2, math.pi),
    "Y+": TargetGate(math.pi / 2, math.pi / 2),
    "Y-": TargetGate(math.pi / 2, 3 * math.pi / 2),
    IDENTITY: TargetGate(0.0, 0.0),
}

AXIS_SHIFTS: Tuple[float, ...] = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)

GatePair = Tuple[str, str]


def shifted_gate(gate: str, delta_axis: float) -> str:
    """Name of ``Rz(delta) G Rz(-delta)`` for a gate of the alphabet.

    >>> shifted_gate("X+", math.pi / 2), shifted_gate("Y+", math.pi / 2)
    ('Y+', 'X-')
    """
    r = compose(rz(delta_axis), compose(GATE_TARGETS[gate].rotation(), rz(-delta_axis)))
    for name in GATE_ALPHABET:
        if GATE_TARGETS[name].rotation() == r:
            return name
    raise ValueError(f"Axis shift {delta_axis} takes {gate} out of the gate alphabet")


def gate_pairs(alphabet: Sequence[str] = GATE_ALPHABET) -> List[GatePair]:
    return [(a, b) for a in alphabet for b in alphabet]


def _rank(pair: GatePair) -> Tuple[int, int]:
    return GATE_ALPHABET.index(pair[0]), GATE_ALPHABET.index(pair[1])


class Orbit(NamedTuple):
    """Gate pairs reachable from `representative` by an axis shift.

    `members` maps each pair to the shift that takes the representative's
    sequence to it.
    """

    representative: GatePair
    members: Tuple[Tuple[GatePair, float], ...]

    def shift_for(self, pair: GatePair) -> float:
        for member, shift in self.members:
            if member == pair:
                return shift
        raise KeyError(pair)


def orbit_classes(alphabet: Sequence[str] = GATE_ALPHABET) -> List[Orbit]:
    """Partition ordered gate pairs under simultaneous axis shifts.

    ``(I, I)`` is left out: identity padding only ever pads one ion.
    """
    remaining = set(gate_pairs(alphabet)) - {(IDENTITY, IDENTITY)}
    orbits: List[Orbit] = []
    for pair in sorted(remaining, key=_rank):
        if pair not in remaining:
            continue
        members: Dict[GatePair, float] = {}
        for shift in AXIS_SHIFTS:
            member = (shifted_gate(pair[0], shift), shifted_gate(pair[1], shift))
            members.setdefault(member, shift)
        remaining.difference_update(members)
        orbits.append(
            Orbit(pair, tuple(sorted(members.items(), key=lambda m: _rank(m[0]))))
        )
    return orbits


class OrbitLibrary:
    """One synthesized sequence per orbit, at a fixed ion set.

    >>> library = OrbitLibrary(IonSet())
    >>> library.sequence_for(("X+", "Y+"))
    Traceback (most recent call last):
    ...
    KeyError: "No sequence for orbit ('X+', 'Y+')"
    """

    def __init__(
        self,
        ions: IonSet,
        results: Optional[Mapping[GatePair, SynthesisResult]] = None,
    ) -> None:
        self.ions = ions
        self.orbits = orbit_classes()
        self._orbit_of = {
            member: orbit for orbit in self.orbits for member, _ in orbit.members
        }
        self._results: Dict[GatePair, SynthesisResult] = {}
        for rep, result in (results or {}).items():
            self.set(rep, result)

    def set(self, representative: GatePair, result: SynthesisResult) -> None:
        if representative not in {o.representative for o in self.orbits}:
            raise ValueError(f"{representative} is not an orbit representative")
        if result.ions != self.ions:
            raise ValueError("Sequence was synthesized for a different ion set")
        self._results[representative] = result

    def copy(self) -> OrbitLibrary:
        return OrbitLibrary(self.ions, self._results)

    def __contains__(self, representative: object) -> bool:
        return representative in self._results

    def __iter__(self) -> Iterator[Tuple[GatePair, SynthesisResult]]:
        return iter(sorted(self._results.items(), key=lambda r: _rank(r[0])))

    def __len__(self) -> int:
        return len(self._results)

    @property
    def complete(self) -> bool:
        return all(o.representative in self._results for o in self.orbits)

    def orbit_of(self, pair: GatePair) -> Orbit:
        try:
            return self._orbit_of[pair]
        except KeyError:
            raise KeyError(f"No orbit for gate pair {pair}") from None

    def sequence_for(self, pair: GatePair) -> PulseSequence:
        """The representative's sequence, shifted to realize `pair`."""
        orbit = self.orbit_of(pair)
        result = self._results.get(orbit.representative)
        if result is None:
            raise KeyError(f"No sequence for orbit {orbit.representative}")
        return shift_phases(result.sequence, orbit.shift_for(pair))


def synthesize_library(
    ions: IonSet,
    seed: int = 0,
    n_pulses: int = 4,
    tol: float = TOLERANCE,
    max_restarts: int = RESTART_BUDGET,
    duration: float = ADDRESSING_PULSE_DURATION,
    ramp_time: float = RAMP_TIME,
    inter_pulse_delay: float = INTER_PULSE_DELAY,
    max_amplitude: Optional[float] = None,
) -> OrbitLibrary:
    """Synthesize every orbit representative for a two-ion set."""
    if len(ions) != 2:
        raise ValueError(f"Orbit libraries address ion pairs, got {len(ions)} ions")
    library = OrbitLibrary(ions)
    for orbit in library.orbits:
        rep = orbit.representative
        result = synthesize(
            (GATE_TARGETS[rep[0]], GATE_TARGETS[rep[1]]),
            ions,
            n_pulses=n_pulses,
            seed=seed,
            tol=tol,
            max_restarts=max_restarts,
            duration=duration,
            ramp_time=ramp_time,
            inter_pulse_delay=inter_pulse_delay,
            max_amplitude=max_amplitude,
        ).check()
        log.info("Orbit %s: residual %.3g", rep, result.residual_cost)
        library.set(rep, result)
    return library
