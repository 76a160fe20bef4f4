"""Acceptance testing of synthesized sequences.

Exact sequences for a gate pair are not unique, and each one amplifies
coherent errors differently. Candidates are measured one at a time with
simultaneous randomized benchmarking until one falls below the threshold.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from ionaddress.bench import RBConfig, run_rb
from ionaddress.calib.search import CalibrationError
from ionaddress.qsim import DEFAULT_SETTINGS, IntegratorSettings, NoiseModel
from ionaddress.synth import (
    GATE_TARGETS,
    IonSet,
    OrbitLibrary,
    SynthesisResult,
    iter_solutions,
    synthesize_library,
)
from ionaddress.synth.orbits import GatePair

log = logging.getLogger(__name__)

ACCEPTANCE_THRESHOLD = 5e-5
ACCEPTANCE_LENGTHS = (1, 10, 30, 100)
CANDIDATE_BUDGET = 20


class Candidate(NamedTuple):
    index: int
    result: SynthesisResult
    error: float


@dataclass
class AcceptanceLoopState:
    representative: GatePair
    threshold: float = ACCEPTANCE_THRESHOLD
    candidates: List[Candidate] = field(default_factory=list)
    accepted: Optional[Candidate] = None

    def add(self, candidate: Candidate) -> bool:
        """Record a measured candidate; accept it when below threshold.

        A NaN error (a failed decay fit) is never accepted.
        """
        if self.accepted is not None:
            raise ValueError("A candidate was already accepted")
        self.candidates.append(candidate)
        if math.isfinite(candidate.error) and candidate.error < self.threshold:
            self.accepted = candidate
            return True
        return False

    @property
    def best(self) -> Optional[Candidate]:
        measured = [c for c in self.candidates if math.isfinite(c.error)]
        return min(measured, key=lambda c: c.error, default=None)

    def check(self) -> AcceptanceLoopState:
        if self.accepted is None:
            best = self.best
            raise CalibrationError(
                f"No candidate for {self.representative} below {self.threshold:g} "
                f"after {len(self.candidates)} tries"
                + (f" (best {best.error:.3g})" if best else "")
            )
        return self

    def history(self) -> List[Dict[str, object]]:
        return [
            {
                "candidate": c.index,
                "error": c.error,
                "threshold": self.threshold,
                "accepted": c is self.accepted,
            }
            for c in self.candidates
        ]


def measure_candidate(
    representative: GatePair,
    result: SynthesisResult,
    library: OrbitLibrary,
    noise: NoiseModel,
    rb: RBConfig,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
) -> float:
    """Average simultaneous RB error per addressed gate, with `result`
    standing in for its orbit."""
    trial = library.copy()
    trial.set(representative, result)
    return run_rb(rb, noise, library.ions, trial, settings).average_error


def acceptance_rb_config(
    seed: int,
    lengths: Sequence[int] = ACCEPTANCE_LENGTHS,
    trials_per_length: int = 2,
) -> RBConfig:
    return RBConfig(
        lengths=tuple(lengths),
        trials_per_length=trials_per_length,
        seed=seed,
        mode="simultaneous",
        gate_metric="addressed_gate",
    )


def acceptance_loop(
    representative: GatePair,
    ions: IonSet,
    noise: NoiseModel,
    threshold: float = ACCEPTANCE_THRESHOLD,
    budget: int = CANDIDATE_BUDGET,
    seed: int = 0,
    library: Optional[OrbitLibrary] = None,
    rb: Optional[RBConfig] = None,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
    max_amplitude: Optional[float] = None,
) -> AcceptanceLoopState:
    """Try candidate sequences for one orbit until one passes.

    Candidates are the distinct exact solutions, in restart order, for
    seed `seed`. The other orbits keep their sequences from `library`
    (synthesized with the same seed when not given). `max_amplitude` bounds
    the candidate pulses as in `synthesize`. A loop that runs out
    of candidates returns with nothing accepted; see
    `AcceptanceLoopState.check`.
    """
    if not threshold > 0:
        raise ValueError(f"Threshold must be positive, got {threshold}")
    if budget < 1:
        raise ValueError(f"Candidate budget must be at least 1, got {budget}")
    if library is None:
        library = synthesize_library(ions, seed, max_amplitude=max_amplitude)
    rb = rb or acceptance_rb_config(seed)
    targets = (GATE_TARGETS[representative[0]], GATE_TARGETS[representative[1]])

    state = AcceptanceLoopState(representative, threshold)
    solutions = iter_solutions(targets, ions, seed=seed, max_amplitude=max_amplitude)
    for index, result in zip(range(budget), solutions):
        error = measure_candidate(representative, result, library, noise, rb, settings)
        log.info("Orbit %s candidate %d: error %.3g", representative, index, error)
        if state.add(Candidate(index, result, error)):
            break
    else:
        log.warning(
            "No candidate for %s below %.3g after %d tries",
            representative,
            threshold,
            len(state.candidates),
        )
    return state


def calibrate_library(
    ions: IonSet,
    noise: NoiseModel,
    threshold: float = ACCEPTANCE_THRESHOLD,
    budget: int = CANDIDATE_BUDGET,
    seed: int = 0,
    library: Optional[OrbitLibrary] = None,
    rb: Optional[RBConfig] = None,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
    max_amplitude: Optional[float] = None,
) -> Tuple[OrbitLibrary, List[AcceptanceLoopState]]:
    """Run the acceptance loop over every orbit, in representative order.

    Each accepted sequence replaces its orbit's entry before the next
    orbit is tested.
    """
    library = (library or synthesize_library(ions, seed, max_amplitude=max_amplitude)).copy()
    states = []
    for orbit in library.orbits:
        state = acceptance_loop(
            orbit.representative,
            ions,
            noise,
            threshold,
            budget,
            seed,
            library,
            rb,
            settings,
            max_amplitude,
        ).check()
        assert state.accepted is not None
        library.set(orbit.representative, state.accepted.result)
        states.append(state)
    return library, states
