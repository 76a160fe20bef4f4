"""Pulse-level propagation of a driven qubit with spectator levels.

States live in the tracked rotating frame of the drive. Between pulses
that frame follows the Zeeman compensation the controller knows about,
so a delay evolves at the residual detuning only and the controller's
compensation shows up in ``frame_phase``.

Channels act on row-major vectorized density operators,
``vec(A rho B) = kron(A, B.T) @ vec(rho)``. Segments with a constant
Hamiltonian are exponentiated exactly; envelope ramps and motional
modulation are integrated with fixed-step fourth-order Runge-Kutta in the
interaction picture of the diagonal (detuning) part, with dephasing and
leakage split off after every step.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np
from scipy.linalg import expm

from ionaddress.qsim.noise import NoiseModel
from ionaddress.qsim.state import QubitState, StateError
from ionaddress.rotor import TWO_PI, Rotation
from ionaddress.synth.pulse import Pulse, PulseSequence

# Integration steps per period of the fastest frequency present
MIN_STEPS_PER_PERIOD = 50

# Phase quadrature points for averaging motional modulation
MOTION_PHASES = 8


class IntegratorError(Exception):
    """Raised when integration settings violate the step size rule."""


@dataclass(frozen=True)
class IntegratorSettings:
    max_step_s: float = 1e-9
    steps_per_period: int = MIN_STEPS_PER_PERIOD
    max_steps: int = 1_000_000
    motion_phases: int = MOTION_PHASES

    def __post_init__(self) -> None:
        if not self.max_step_s > 0:
            raise IntegratorError(f"Step size must be positive, got {self.max_step_s}")
        if self.steps_per_period < MIN_STEPS_PER_PERIOD:
            raise IntegratorError(
                f"Need at least {MIN_STEPS_PER_PERIOD} steps per period, "
                f"got {self.steps_per_period}"
            )
        if self.motion_phases < 1:
            raise IntegratorError("Motion averaging needs at least one phase point")


DEFAULT_SETTINGS = IntegratorSettings()


@dataclass(frozen=True)
class Channel:
    """Trace-decreasing linear map on vectorized density operators.

    ``retained`` is the fraction of population that stays in the system.
    """

    superop: np.ndarray
    retained: float
    duration: float

    @property
    def dims(self) -> int:
        return math.isqrt(self.superop.shape[0])

    def apply(self, rho: np.ndarray) -> np.ndarray:
        d = rho.shape[0]
        return (self.superop @ rho.reshape(-1)).reshape(d, d)

    def then(self, other: Channel) -> Channel:
        """This channel followed by `other`."""
        return Channel(
            other.superop @ self.superop,
            self.retained * other.retained,
            self.duration + other.duration,
        )

    @classmethod
    def identity(cls, dims: int) -> Channel:
        return cls(np.eye(dims * dims, dtype=complex), 1.0, 0.0)


def envelope(t: float, pulse: Pulse) -> float:
    """Relative Rabi rate at time `t` into `pulse`.

    >>> p = Pulse(1.0, 0.0, duration=600e-9, ramp_time=120e-9)
    >>> envelope(0.0, p), envelope(60e-9, p), envelope(120e-9, p)
    (0.0, 0.5, 1.0)
    """
    if not 0.0 <= t <= pulse.duration:
        raise StateError(f"Time {t} lies outside a {pulse.duration} s pulse")
    return round(_envelope(pulse.duration, pulse.ramp_time)(t), 15)


def _envelope(duration: float, ramp: float) -> Callable[[float], float]:
    if ramp == 0.0:
        return lambda t: 1.0

    def env(t: float) -> float:
        if t < ramp:
            return math.sin(math.pi * t / (2 * ramp)) ** 2
        if t > duration - ramp:
            return math.sin(math.pi * (duration - t) / (2 * ramp)) ** 2
        return 1.0

    return env


def _levels(noise: NoiseModel, detuning_hz: float) -> Tuple[np.ndarray, np.ndarray]:
    """Diagonal energies (rad/s) and dephasing signs of all levels."""
    delta = TWO_PI * detuning_hz
    energies = [delta / 2, -delta / 2]
    signs = [1.0, -1.0]
    for s in noise.spectators:
        energies.append(energies[s.level] + TWO_PI * s.detuning_hz)
        signs.append(signs[s.level])
    return np.array(energies), np.array(signs)


def _coupling(noise: NoiseModel, phase: float) -> np.ndarray:
    """Drive operator at unit Rabi rate."""
    d = noise.dims
    c = np.zeros((d, d), dtype=complex)
    c[0, 1] = 0.5 * np.exp(-1j * phase)
    for k, s in enumerate(noise.spectators, start=2):
        c[s.level, k] = 0.5 * s.relative_rabi * np.exp(-1j * phase)
    return c + c.conj().T


def _decay(noise: NoiseModel, signs: np.ndarray, dt: float) -> np.ndarray:
    """Diagonal of the dephasing and leakage superoperator over `dt`."""
    p = 0.5 * (1.0 - math.exp(-dt / noise.t2_s))
    flips = np.outer(signs, signs).ravel()
    return math.exp(-noise.leakage_per_s * dt) * ((1.0 - p) + p * flips)


def rabi_rate(pulse: Pulse, a_pi: float, noise: NoiseModel) -> float:
    """Peak Rabi rate in rad/s: the envelope area gives the area rule angle."""
    if not a_pi > 0:
        raise ValueError(f"Pi-pulse amplitude must be positive, got {a_pi}")
    return math.pi * noise.amp_scale * pulse.amplitude / (a_pi * pulse.effective_duration)


def _step_size(
    energies: np.ndarray, omega: float, noise: NoiseModel, settings: IntegratorSettings
) -> float:
    freqs = [np.ptp(energies) / TWO_PI, omega * (1 + noise.motion.depth) / TWO_PI]
    if noise.motion.depth:
        freqs.append(noise.motion.mode_freq_hz)
    f_max = max(freqs)
    if f_max == 0.0:
        return settings.max_step_s
    return min(settings.max_step_s, 1.0 / (settings.steps_per_period * f_max))


def _constant_segment(
    energies: np.ndarray,
    signs: np.ndarray,
    drive: np.ndarray,
    noise: NoiseModel,
    dt: float,
) -> np.ndarray:
    d = len(energies)
    h = np.diag(energies).astype(complex) + drive
    eye = np.eye(d)
    liouvillian = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    liouvillian += np.diag(
        noise.dephasing_rate * (np.outer(signs, signs).ravel() - 1.0)
        - noise.leakage_per_s
    )
    return expm(liouvillian * dt)


def _driven_segment(
    energies: np.ndarray,
    signs: np.ndarray,
    coupling: np.ndarray,
    rate: Callable[[float], float],
    t0: float,
    t1: float,
    step: float,
    noise: NoiseModel,
    settings: IntegratorSettings,
) -> np.ndarray:
    d = len(energies)
    n = max(1, math.ceil((t1 - t0) / step - 1e-9))
    if n > settings.max_steps:
        raise IntegratorError(
            f"Segment needs {n} steps, more than the limit of {settings.max_steps}"
        )
    h = (t1 - t0) / n
    gaps = energies[:, None] - energies[None, :]
    eye = np.eye(d, dtype=complex)
    dissipative = noise.t2_s < math.inf or noise.leakage_per_s > 0
    decay = _decay(noise, signs, h) if dissipative else None

    def generator(tau: float) -> np.ndarray:
        return -1j * rate(t0 + tau) * coupling * np.exp(1j * gaps * tau)

    u = eye.copy()
    superop = np.eye(d * d, dtype=complex)
    for i in range(n):
        tau = i * h
        k1 = generator(tau)
        mid = generator(tau + h / 2)
        k2 = mid @ (eye + h / 2 * k1)
        k3 = mid @ (eye + h / 2 * k2)
        k4 = generator(tau + h) @ (eye + h * k3)
        u_step = eye + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if decay is None:
            u = u_step @ u
        else:
            superop = decay[:, None] * (np.kron(u_step, u_step.conj()) @ superop)
    if decay is None:
        superop = np.kron(u, u.conj())
    free = np.exp(-1j * gaps.ravel() * (t1 - t0))
    return free[:, None] * superop


def _segments(pulse: Pulse, modulated: bool) -> List[Tuple[float, float, bool]]:
    """Time intervals of a pulse and whether each is time dependent."""
    t, r = pulse.duration, pulse.ramp_time
    if modulated:
        return [(0.0, t, True)]
    segments = []
    if r > 0:
        segments.append((0.0, r, True))
    if t - 2 * r > 0:
        segments.append((r, t - r, False))
    if r > 0:
        segments.append((t - r, t, True))
    return segments


@functools.lru_cache(maxsize=4096)
def pulse_channel(
    pulse: Pulse,
    a_pi: float,
    noise: NoiseModel,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
) -> Channel:
    """Channel of one pulse under static noise (no drift trace)."""
    if noise.amp_drift:
        raise ValueError("Resolve amplitude drift with NoiseModel.at() first")
    omega = rabi_rate(pulse, a_pi, noise)
    energies, signs = _levels(noise, noise.pulse_detuning_hz)
    coupling = _coupling(noise, pulse.phase)
    env = _envelope(pulse.duration, pulse.ramp_time)
    motion = noise.motion
    step = _step_size(energies, omega, noise, settings)

    def superop_for(rate: Callable[[float], float], modulated: bool) -> np.ndarray:
        superop = np.eye(noise.dims**2, dtype=complex)
        for t0, t1, driven in _segments(pulse, modulated):
            if driven:
                s = _driven_segment(
                    energies, signs, coupling, rate, t0, t1, step, noise, settings
                )
            else:
                s = _constant_segment(energies, signs, omega * coupling, noise, t1 - t0)
            superop = s @ superop
        return superop

    if motion.depth:
        w = TWO_PI * motion.mode_freq_hz
        phases = TWO_PI * np.arange(settings.motion_phases) / settings.motion_phases
        superop = sum(
            superop_for(
                lambda t, psi=psi: omega * env(t) * (1 + motion.depth * math.sin(w * t + psi)),
                True,
            )
            for psi in phases
        ) / len(phases)
    else:
        superop = superop_for(lambda t: omega * env(t), False)
    superop.flags.writeable = False
    retained = math.exp(-noise.leakage_per_s * pulse.duration)
    return Channel(superop, retained, pulse.duration)


@functools.lru_cache(maxsize=1024)
def delay_channel(dt: float, noise: NoiseModel) -> Channel:
    """Free evolution, dephasing and leakage over `dt`; exact."""
    if dt < 0:
        raise StateError(f"Delay must not be negative, got {dt}")
    energies, signs = _levels(noise, noise.delay_detuning_hz)
    # spectators are not driven between pulses and carry no phase reference
    energies[2:] = 0.0
    gaps = energies[:, None] - energies[None, :]
    diagonal = np.exp(-1j * gaps.ravel() * dt) * _decay(noise, signs, dt)
    superop = np.diag(diagonal)
    superop.flags.writeable = False
    return Channel(superop, math.exp(-noise.leakage_per_s * dt), dt)


def _effective_pulse(state: QubitState, pulse: Pulse, noise: NoiseModel) -> Pulse:
    if noise.frame_tracking or state.frame_phase == 0.0:
        return pulse
    return Pulse(
        pulse.amplitude,
        (pulse.phase - state.frame_phase) % TWO_PI,
        pulse.duration,
        pulse.ramp_time,
    )


def apply_channel(
    state: QubitState, channel: Channel, frame_phase: float = 0.0
) -> QubitState:
    rho = channel.apply(state.rho)
    return state.evolved(
        rho, state.trace * (1.0 - channel.retained), frame_phase, channel.duration
    )


def propagate_pulse(
    state: QubitState,
    pulse: Pulse,
    ion_a_pi: float,
    noise: NoiseModel,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
) -> QubitState:
    if state.dims != noise.dims:
        raise StateError(f"State has {state.dims} levels, noise model {noise.dims}")
    channel = pulse_channel(
        _effective_pulse(state, pulse, noise), ion_a_pi, noise.at(state.time_s), settings
    )
    return apply_channel(state, channel).check()


def propagate_delay(state: QubitState, dt: float, noise: NoiseModel) -> QubitState:
    if dt < 0:
        raise StateError(f"Delay must not be negative, got {dt}")
    if dt == 0:
        return state
    channel = delay_channel(dt, noise.at(state.time_s))
    return apply_channel(state, channel, -TWO_PI * noise.zeeman_comp_hz * dt).check()


def run_sequence(
    state: QubitState,
    seq: PulseSequence,
    ion_a_pi: float,
    noise: NoiseModel,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
) -> QubitState:
    """Each pulse followed by the sequence's inter-pulse delay."""
    for pulse in seq:
        state = propagate_pulse(state, pulse, ion_a_pi, noise, settings)
        state = propagate_delay(state, seq.inter_pulse_delay, noise)
    return state


def sequence_channel(
    seq: PulseSequence,
    ion_a_pi: float,
    noise: NoiseModel,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
) -> Channel:
    """Composed channel of `seq` under static, frame-tracked noise."""
    if noise.amp_drift or not noise.frame_tracking:
        raise ValueError("Sequence channels need static noise with frame tracking")
    channel = Channel.identity(noise.dims)
    delay = delay_channel(seq.inter_pulse_delay, noise)
    for pulse in seq:
        channel = channel.then(pulse_channel(pulse, ion_a_pi, noise, settings)).then(delay)
    return channel


def pauli_states() -> List[np.ndarray]:
    """The six eigenstates of X, Y and Z."""
    s = 1 / math.sqrt(2)
    return [
        np.array([1, 0], dtype=complex),
        np.array([0, 1], dtype=complex),
        np.array([s, s], dtype=complex),
        np.array([s, -s], dtype=complex),
        np.array([s, 1j * s], dtype=complex),
        np.array([s, -1j * s], dtype=complex),
    ]


def average_infidelity(
    evolve: Callable[[QubitState], QubitState], ideal: Rotation, dims: int = 2
) -> float:
    """Average gate infidelity of `evolve` against the rotation `ideal`.

    The six Pauli eigenstates form a state 2-design, so their mean state
    fidelity equals the Haar average.
    """
    u = ideal.su2
    fidelities = [
        evolve(QubitState.pure(psi, dims)).fidelity(u @ psi) for psi in pauli_states()
    ]
    return 1.0 - float(np.mean(fidelities))
