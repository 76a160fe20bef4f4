from ionaddress.qsim.budget import (
    PULSES_PER_CLIFFORD,
    BudgetRow,
    CliffordStats,
    ErrorBudget,
    error_budget,
    unit_errors,
)
from ionaddress.qsim.noise import SOURCES, Motion, NoiseModel, Spectator, reference_noise
from ionaddress.qsim.propagate import (
    DEFAULT_SETTINGS,
    Channel,
    IntegratorError,
    IntegratorSettings,
    apply_channel,
    average_infidelity,
    delay_channel,
    envelope,
    propagate_delay,
    propagate_pulse,
    pulse_channel,
    run_sequence,
    sequence_channel,
)
from ionaddress.qsim.simulator import Simulator
from ionaddress.qsim.state import QubitState, StateError
from ionaddress.qsim.sweep import (
    SweepPoint,
    SweepResult,
    motion_scan,
    sweep,
    sweep_amplitude,
    sweep_delay,
    sweep_detuning,
    sweep_zeeman,
)
