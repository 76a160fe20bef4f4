"""A simulated experiment: the true noise plus the controller's knobs.

Calibration routines only see what an experimenter sees: they set
controller knobs (drive offset, Zeeman compensation, amplitude
correction) and read out populations.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from ionaddress.qsim.noise import NoiseModel
from ionaddress.qsim.propagate import (
    DEFAULT_SETTINGS,
    Channel,
    IntegratorSettings,
    apply_channel,
    propagate_delay,
    propagate_pulse,
    sequence_channel,
)
from ionaddress.qsim.state import QubitState
from ionaddress.rotor import TWO_PI
from ionaddress.synth.pulse import IonSet, Pulse, PulseSequence


@dataclass
class Simulator:
    noise: NoiseModel = field(default_factory=NoiseModel)
    ions: IonSet = field(default_factory=IonSet)
    settings: IntegratorSettings = DEFAULT_SETTINGS
    amp_correction: float = 1.0

    def __post_init__(self) -> None:
        if not self.amp_correction > 0:
            raise ValueError(f"Amplitude correction must be positive, got {self.amp_correction}")

    def with_noise(self, **changes: object) -> Simulator:
        return replace(self, noise=replace(self.noise, **changes))

    def with_controls(
        self,
        drive_offset_hz: Optional[float] = None,
        zeeman_comp_hz: Optional[float] = None,
        amp_correction: Optional[float] = None,
    ) -> Simulator:
        noise = self.noise
        if drive_offset_hz is not None:
            noise = replace(noise, drive_offset_hz=drive_offset_hz)
        if zeeman_comp_hz is not None:
            noise = replace(noise, zeeman_comp_hz=zeeman_comp_hz)
        return replace(
            self,
            noise=noise,
            amp_correction=self.amp_correction if amp_correction is None else amp_correction,
        )

    def ground(self, time_s: float = 0.0) -> QubitState:
        state = QubitState.ground(self.noise.dims, self.noise.spam)
        return replace(state, time_s=time_s) if time_s else state

    def a_pi(self, ion: int) -> float:
        return self.ions.a_pi[ion]

    def commanded(self, pulse: Pulse) -> Pulse:
        if self.amp_correction == 1.0:
            return pulse
        return replace(pulse, amplitude=pulse.amplitude * self.amp_correction)

    def pulse(self, state: QubitState, pulse: Pulse, ion: int = 0) -> QubitState:
        return propagate_pulse(
            state, self.commanded(pulse), self.a_pi(ion), self.noise, self.settings
        )

    def delay(self, state: QubitState, dt: float) -> QubitState:
        return propagate_delay(state, dt, self.noise)

    def run(
        self,
        pulses: Iterable[Pulse],
        ion: int = 0,
        delay: float = 0.0,
        state: Optional[QubitState] = None,
    ) -> QubitState:
        """Apply `pulses` in order, each followed by `delay`."""
        state = self.ground() if state is None else state
        for p in pulses:
            state = self.delay(self.pulse(state, p, ion), delay)
        return state

    def run_sequence(
        self, seq: PulseSequence, ion: int = 0, state: Optional[QubitState] = None
    ) -> QubitState:
        return self.run(seq.pulses, ion, seq.inter_pulse_delay, state)

    def repeat(
        self,
        pulses: Sequence[Pulse],
        n: int,
        ion: int = 0,
        delay: float = 0.0,
        state: Optional[QubitState] = None,
    ) -> QubitState:
        """Apply the pulse block `n` times; one channel power when static."""
        if n < 0:
            raise ValueError(f"Repetition count must not be negative, got {n}")
        state = self.ground() if state is None else state
        noise = self.noise
        if noise.amp_drift or not noise.frame_tracking:
            for _ in range(n):
                state = self.run(pulses, ion, delay, state)
            return state
        seq = PulseSequence(tuple(self.commanded(p) for p in pulses), delay)
        block = sequence_channel(seq, self.a_pi(ion), noise, self.settings)
        power = Channel(
            np.linalg.matrix_power(block.superop, n),
            block.retained**n,
            block.duration * n,
        )
        frame = -TWO_PI * noise.zeeman_comp_hz * delay * len(seq) * n
        return apply_channel(state, power, frame).check()
