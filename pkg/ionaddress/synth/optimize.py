"""Composite pulse synthesis.

The cost of a pulse train is the summed Hilbert-Schmidt distance, in SO(3),
between what the train does to each ion and what that ion should get:

    cost = sum_k || R_seq(a_pi[k]) - G_k ||_HS

Synthesis minimizes the stacked matrix differences with a trust region
least squares descent from random starting points. Pulse amplitudes are
kept in a box, by default up to twice the largest pi amplitude; pass
``max_amplitude=math.inf`` for an unconstrained (Levenberg-Marquardt)
search. Each restart draws from its own random stream, derived
from ``(seed, restart)``, so results do not depend on how many restarts ran before.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

from ionaddress.rotor import TWO_PI, TargetGate, distance_hs, quat_to_matrix
from ionaddress.synth.pulse import (
    ADDRESSING_PULSE_DURATION,
    INTER_PULSE_DELAY,
    RAMP_TIME,
    IonSet,
    PulseSequence,
    sequence_quats,
    sequence_rotation,
)

log = logging.getLogger(__name__)

TOLERANCE = 1e-9
RESTART_BUDGET = 200

# largest pulse amplitude, in units of the largest pi amplitude
AMPLITUDE_BOX = 2.0

# solutions closer than this (amplitude and phase vector) are the same
DISTINCT = 1e-6


class SynthesisError(Exception):
    """Raised when a synthesis result did not reach its tolerance."""


@dataclass(frozen=True)
class SynthesisResult:
    sequence: PulseSequence
    targets: Tuple[TargetGate, ...]
    ions: IonSet
    residual_cost: float
    per_ion_distance: Tuple[float, ...]
    attempts: int
    converged: bool

    def check(self) -> SynthesisResult:
        """Return self, or raise `SynthesisError` when not converged."""
        if not self.converged:
            raise SynthesisError(
                f"No pulse sequence below tolerance after {self.attempts} restarts "
                f"(best residual {self.residual_cost:.3g})"
            )
        return self


def required_pulse_count(n_ions: int) -> int:
    """Fewest pulses with enough freedom for `n_ions` arbitrary gates.

    Each gate has three parameters, each pulse two.

    >>> [required_pulse_count(n) for n in (1, 2, 3, 4)]
    [2, 3, 5, 6]
    """
    if n_ions < 1:
        raise ValueError(f"Need at least one ion, got {n_ions}")
    return math.ceil(3 * n_ions / 2)


def _check_targets(targets: Sequence[TargetGate], ions: IonSet) -> None:
    if len(targets) != len(ions):
        raise ValueError(
            f"Number of targets doesn't match the number of ions ({len(targets)} != {len(ions)})"
        )


def cost(seq: PulseSequence, targets: Sequence[TargetGate], ions: IonSet) -> float:
    """Summed SO(3) Hilbert-Schmidt distance over all ions."""
    _check_targets(targets, ions)
    return float(sum(per_ion_distance(seq, targets, ions)))


def per_ion_distance(
    seq: PulseSequence, targets: Sequence[TargetGate], ions: IonSet
) -> Tuple[float, ...]:
    _check_targets(targets, ions)
    return tuple(
        distance_hs(sequence_rotation(seq, a), t.rotation())
        for a, t in zip(ions.a_pi, targets)
    )


class _Problem:
    """Residual function for one synthesis problem."""

    def __init__(
        self,
        targets: Sequence[TargetGate],
        ions: IonSet,
        n_pulses: int,
        max_amplitude: Optional[float] = None,
    ) -> None:
        self.a_pi = np.array(ions.a_pi)
        self.n_pulses = n_pulses
        self.target_matrices = np.stack([t.rotation().matrix for t in targets])
        if max_amplitude is None:
            max_amplitude = AMPLITUDE_BOX * float(self.a_pi.max())
        if not max_amplitude > 0:
            raise ValueError(f"Amplitude bound must be positive, got {max_amplitude}")
        self.max_amplitude = max_amplitude

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.max_amplitude)

    def residuals(self, x: np.ndarray) -> np.ndarray:
        amplitudes, phases = x[: self.n_pulses], x[self.n_pulses :]
        q = sequence_quats(amplitudes, phases, self.a_pi)
        return (quat_to_matrix(q) - self.target_matrices).ravel()

    def start(self, rng: np.random.Generator) -> np.ndarray:
        high = self.max_amplitude if self.bounded else 2.0 * self.a_pi.max()
        amplitudes = rng.uniform(0.0, high, self.n_pulses)
        phases = rng.uniform(0.0, TWO_PI, self.n_pulses)
        return np.concatenate((amplitudes, phases))

    def solve(self, x0: np.ndarray) -> np.ndarray:
        n = self.n_pulses
        if self.bounded:
            lower = np.concatenate((np.zeros(n), np.full(n, -np.inf)))
            upper = np.concatenate((np.full(n, self.max_amplitude), np.full(n, np.inf)))
            method, bounds = "trf", (lower, upper)
        else:
            # Levenberg-Marquardt needs at least as many residuals as parameters
            method = "lm" if self.target_matrices.size >= x0.size else "trf"
            bounds = (np.full(2 * n, -np.inf), np.full(2 * n, np.inf))
        solution = least_squares(
            self.residuals,
            x0,
            xtol=1e-15,
            ftol=1e-15,
            gtol=1e-15,
            max_nfev=200 * x0.size,
            method=method,
            bounds=bounds,
        )
        return np.asarray(solution.x)


def restart_rng(seed: int, restart: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, restart)))


def _restarts(
    targets: Sequence[TargetGate],
    ions: IonSet,
    n_pulses: int,
    seed: int,
    max_restarts: int,
    duration: float,
    ramp_time: float,
    inter_pulse_delay: float,
    max_amplitude: Optional[float],
) -> Iterator[Tuple[int, PulseSequence, float]]:
    problem = _Problem(targets, ions, n_pulses, max_amplitude)
    for restart in range(max_restarts):
        x = problem.solve(problem.start(restart_rng(seed, restart)))
        seq = PulseSequence.from_arrays(
            x[:n_pulses], x[n_pulses:], duration, ramp_time, inter_pulse_delay
        )
        residual = cost(seq, targets, ions)
        log.debug("Restart %d: residual cost %.3g", restart, residual)
        yield restart, seq, residual


def synthesize(
    targets: Sequence[TargetGate],
    ions: IonSet,
    n_pulses: Optional[int] = None,
    seed: int = 0,
    tol: float = TOLERANCE,
    max_restarts: int = RESTART_BUDGET,
    duration: float = ADDRESSING_PULSE_DURATION,
    ramp_time: float = RAMP_TIME,
    inter_pulse_delay: float = INTER_PULSE_DELAY,
    max_amplitude: Optional[float] = None,
) -> SynthesisResult:
    """Find a pulse train driving ``targets[k]`` on ion ``k``.

    Restarts until the residual cost drops below `tol` or the restart budget
    is used up. The best train found is returned either way; check
    ``converged`` (or call ``check()``).

    For two ions the default is four pulses, one more than strictly needed.
    Amplitudes stay within `max_amplitude`, ``AMPLITUDE_BOX`` times the
    largest pi amplitude unless given.
    """
    targets = tuple(targets)
    _check_targets(targets, ions)
    if n_pulses is None:
        n_pulses = required_pulse_count(len(ions)) + (len(ions) == 2)
    if n_pulses < 1:
        raise ValueError(f"Need at least one pulse, got {n_pulses}")
    if n_pulses < required_pulse_count(len(ions)):
        log.warning(
            "%d pulses cannot reach %d arbitrary gates; expecting no convergence",
            n_pulses,
            len(ions),
        )

    best: Optional[Tuple[float, PulseSequence]] = None
    attempts = 0
    for restart, seq, residual in _restarts(
        targets,
        ions,
        n_pulses,
        seed,
        max_restarts,
        duration,
        ramp_time,
        inter_pulse_delay,
        max_amplitude,
    ):
        attempts = restart + 1
        if best is None or residual < best[0]:
            best = (residual, seq)
        if residual < tol:
            break

    assert best is not None, "Restart budget must allow at least one attempt"
    residual, seq = best
    converged = residual < tol
    if not converged:
        log.warning(
            "Failed to converge; best residual %.3g after %d restarts", residual, attempts
        )
    return SynthesisResult(
        sequence=seq,
        targets=targets,
        ions=ions,
        residual_cost=residual,
        per_ion_distance=per_ion_distance(seq, targets, ions),
        attempts=attempts,
        converged=converged,
    )


def iter_solutions(
    targets: Sequence[TargetGate],
    ions: IonSet,
    n_pulses: int = 4,
    seed: int = 0,
    tol: float = TOLERANCE,
    max_restarts: int = RESTART_BUDGET,
    duration: float = ADDRESSING_PULSE_DURATION,
    ramp_time: float = RAMP_TIME,
    inter_pulse_delay: float = INTER_PULSE_DELAY,
    max_amplitude: Optional[float] = None,
) -> Iterator[SynthesisResult]:
    """Yield distinct below-tolerance solutions, in restart order.

    Spare pulses leave room for many exact solutions; these are the
    candidates that acceptance testing picks from.
    """
    targets = tuple(targets)
    _check_targets(targets, ions)
    found: List[np.ndarray] = []
    for restart, seq, residual in _restarts(
        targets,
        ions,
        n_pulses,
        seed,
        max_restarts,
        duration,
        ramp_time,
        inter_pulse_delay,
        max_amplitude,
    ):
        if residual >= tol:
            continue
        key = np.concatenate((seq.amplitudes, np.cos(seq.phases), np.sin(seq.phases)))
        if any(np.max(np.abs(key - k)) < DISTINCT for k in found):
            continue
        found.append(key)
        yield SynthesisResult(
            sequence=seq,
            targets=targets,
            ions=ions,
            residual_cost=residual,
            per_ion_distance=per_ion_distance(seq, targets, ions),
            attempts=restart + 1,
            converged=True,
        )


def synthesize_many(
    targets: Sequence[TargetGate],
    ions: IonSet,
    count: int,
    n_pulses: Optional[int] = None,
    seed: int = 0,
    tol: float = TOLERANCE,
    max_restarts: int = RESTART_BUDGET,
    duration: float = ADDRESSING_PULSE_DURATION,
    ramp_time: float = RAMP_TIME,
    inter_pulse_delay: float = INTER_PULSE_DELAY,
    max_amplitude: Optional[float] = None,
) -> List[SynthesisResult]:
    """Up to `count` distinct solutions; fewer if the budget runs out."""
    if count < 1:
        raise ValueError(f"Need to ask for at least one solution, got {count}")
    if n_pulses is None:
        n_pulses = required_pulse_count(len(ions)) + (len(ions) == 2)
    solutions = []
    for result in iter_solutions(
        targets,
        ions,
        n_pulses,
        seed,
        tol,
        max_restarts,
        duration,
        ramp_time,
        inter_pulse_delay,
        max_amplitude,
    ):
        solutions.append(result)
        if len(solutions) == count:
            break
    else:
        log.warning("Found %d of %d distinct solutions", len(solutions), count)
    return solutions
