from ionaddress.synth.exchange import (
    dump_sequence,
    from_document,
    load_sequence,
    to_document,
)
from ionaddress.synth.optimize import (
    AMPLITUDE_BOX,
    SynthesisError,
    SynthesisResult,
    cost,
    iter_solutions,
    per_ion_distance,
    required_pulse_count,
    synthesize,
    synthesize_many,
)
from ionaddress.synth.orbits import (
    GATE_ALPHABET,
    GATE_TARGETS,
    IDENTITY,
    OrbitLibrary,
    Orbit,
    gate_pairs,
    orbit_classes,
    shifted_gate,
    synthesize_library,
)
from ionaddress.synth.pulse import (
    ADDRESSING_PULSE_DURATION,
    INTER_PULSE_DELAY,
    PULSE_DURATION,
    RAMP_TIME,
    IonSet,
    Pulse,
    PulseSequence,
    ideal_pulse_rotation,
    sequence_rotation,
    shift_phases,
)
