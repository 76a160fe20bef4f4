import math
from dataclasses import replace

import numpy as np
import pytest

from ionaddress.rotor import X90, X180, Y90, Rotation, TargetGate, compose, distance_hs, rz
from ionaddress.synth import (
    AMPLITUDE_BOX,
    GATE_TARGETS,
    IDENTITY,
    IonSet,
    Pulse,
    PulseSequence,
    SynthesisError,
    cost,
    dump_sequence,
    from_document,
    gate_pairs,
    ideal_pulse_rotation,
    load_sequence,
    orbit_classes,
    required_pulse_count,
    sequence_rotation,
    shift_phases,
    shifted_gate,
    synthesize,
    synthesize_many,
    to_document,
)
from ionaddress.synth.orbits import OrbitLibrary


X_PLUS = GATE_TARGETS["X+"]
Y_PLUS = GATE_TARGETS["Y+"]


@pytest.fixture(scope="module")
def xy_result():
    return synthesize((X_PLUS, Y_PLUS), IonSet.from_ratios(1.0, 0.80), seed=0)


def random_sequence(rng, n=4):
    return PulseSequence.from_arrays(
        rng.uniform(0, 2, n), rng.uniform(0, 2 * math.pi, n)
    )


def test_pi_amplitude_gives_pi_rotation():
    assert ideal_pulse_rotation(Pulse(1.0, 0.0), 1.0) == X180


def test_rotation_angle_scales_with_pi_amplitude():
    assert ideal_pulse_rotation(Pulse(1.0, math.pi / 2), 2.0) == Y90


def test_non_positive_pi_amplitude_is_rejected():
    with pytest.raises(ValueError):
        ideal_pulse_rotation(Pulse(1.0, 0.0), 0.0)


def test_negative_amplitude_folds_into_phase():
    pulse = Pulse(-0.5, 0.0)

    assert ideal_pulse_rotation(pulse.normalized(), 1.0) == ideal_pulse_rotation(
        pulse, 1.0
    )


def test_ramps_must_fit():
    with pytest.raises(ValueError):
        Pulse(1.0, 0.0, duration=100e-9, ramp_time=60e-9)


def test_sequence_rotation_is_time_ordered():
    seq = PulseSequence((Pulse(0.5, 0.0), Pulse(0.5, math.pi / 2)))

    assert sequence_rotation(seq, 1.0) == compose(Y90, X90)


def test_empty_sequence_has_no_rotation():
    with pytest.raises(ValueError):
        sequence_rotation(PulseSequence(()), 1.0)


def test_sequence_shapes_must_match():
    with pytest.raises(ValueError):
        PulseSequence((Pulse(0.5, 0.0), Pulse(0.5, 0.0, duration=1e-6)))


def test_cost_is_zero_for_exact_sequence():
    seq = PulseSequence((Pulse(0.5, 0.0),))
    ions = IonSet((1.0, 0.5))
    x_pi = TargetGate(math.pi, 0.0)

    assert cost(seq, (X_PLUS, x_pi), ions) == pytest.approx(0.0, abs=1e-12)


def test_cost_sums_distances():
    seq = PulseSequence((Pulse(0.5, 0.0),))
    ions = IonSet((1.0, 1.0))

    assert cost(seq, (X_PLUS, TargetGate(0.0)), ions) == pytest.approx(
        distance_hs(X90, TargetGate(0.0).rotation())
    )


def test_cost_needs_one_target_per_ion():
    with pytest.raises(ValueError):
        cost(PulseSequence((Pulse(0.5, 0.0),)), (X_PLUS,), IonSet((1.0, 1.25)))


def test_required_pulse_count():
    assert [required_pulse_count(n) for n in (2, 3, 4)] == [3, 5, 6]


def test_synthesize_two_ions(xy_result, ions):
    assert xy_result.converged
    assert xy_result.residual_cost < 1e-9
    assert len(xy_result.sequence) == 4
    assert sequence_rotation(xy_result.sequence, ions.a_pi[0]) == X_PLUS.rotation()
    assert sequence_rotation(xy_result.sequence, ions.a_pi[1]) == Y_PLUS.rotation()


def test_synthesize_is_deterministic(xy_result, ions):
    again = synthesize((X_PLUS, Y_PLUS), ions, seed=0)

    assert again.sequence == xy_result.sequence


def test_synthesized_phases_and_amplitudes_are_normalized(xy_result):
    assert all(a >= 0 for a in xy_result.sequence.amplitudes)
    assert all(0 <= p < 2 * math.pi for p in xy_result.sequence.phases)


def test_too_few_pulses_do_not_converge(ions):
    result = synthesize((X_PLUS, Y_PLUS), ions, n_pulses=2, max_restarts=20)

    assert not result.converged
    assert result.residual_cost > 1e-3
    assert result.attempts == 20
    with pytest.raises(SynthesisError):
        result.check()


def test_synthesize_three_ions():
    ions = IonSet.from_ratios(1.0, 0.80, 0.65)
    targets = (X_PLUS, Y_PLUS, GATE_TARGETS[IDENTITY])

    result = synthesize(targets, ions, seed=1)

    assert len(result.sequence) == required_pulse_count(3)
    assert result.check().residual_cost < 1e-9


def test_synthesize_many_gives_distinct_solutions(ions):
    solutions = synthesize_many((X_PLUS, Y_PLUS), ions, 3, seed=0)

    assert len(solutions) == 3
    assert all(s.residual_cost < 1e-9 for s in solutions)
    first, *others = solutions
    for other in others:
        assert other.sequence != first.sequence


def test_library_amplitudes_stay_in_box(library):
    bound = AMPLITUDE_BOX * max(library.ions.a_pi)

    for _, result in library:
        assert max(result.sequence.amplitudes) <= bound + 1e-12


def test_unbounded_synthesis(ions):
    result = synthesize((X_PLUS, Y_PLUS), ions, seed=0, max_amplitude=math.inf)

    assert result.check().residual_cost < 1e-9


def test_amplitude_bound_must_be_positive(ions):
    with pytest.raises(ValueError):
        synthesize((X_PLUS, Y_PLUS), ions, max_amplitude=0.0)


def test_phase_perturbation_changes_cost_linearly(xy_result):
    seq, ions = xy_result.sequence, xy_result.ions
    j, eps = int(np.argmax(seq.amplitudes)), 1e-4

    def perturbed(delta):
        pulses = list(seq.pulses)
        pulses[j] = replace(pulses[j], phase=pulses[j].phase + delta)
        return cost(replace(seq, pulses=tuple(pulses)), xy_result.targets, ions)

    slope = (perturbed(eps) + perturbed(-eps)) / (2 * eps)

    # d/d(phase) of one pulse is its commutator with the z generator
    generator = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    expected = 0.0
    for a_pi in ions.a_pi:
        matrices = [ideal_pulse_rotation(p, a_pi).matrix for p in seq.pulses]
        before = np.eye(3)
        for m in matrices[:j]:
            before = m @ before
        after = np.eye(3)
        for m in matrices[j + 1 :]:
            after = m @ after
        m = matrices[j]
        expected += np.linalg.norm(after @ (generator @ m - m @ generator) @ before)

    assert slope == pytest.approx(expected, rel=1e-5)


def random_targets(rng, n):
    targets = []
    for _ in range(n):
        q = rng.normal(size=4)
        targets.append(TargetGate.from_rotation(Rotation(*q)))
    return tuple(targets)


def random_ions(rng, n):
    ratios = rng.choice(np.linspace(0.5, 0.95, 10), n - 1, replace=False)
    return IonSet.from_ratios(1.0, *ratios)


def test_three_pulses_address_two_ions():
    converged = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        targets = random_targets(rng, 2)
        result = synthesize(
            targets,
            IonSet.from_ratios(1.0, 0.80),
            n_pulses=3,
            seed=seed,
            max_amplitude=math.inf,
        )
        converged += result.converged

    assert converged >= 95


@pytest.mark.parametrize("n_ions", [3, 4])
def test_minimal_pulse_count_addresses_many_ions(n_ions):
    converged = 0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        result = synthesize(
            random_targets(rng, n_ions),
            random_ions(rng, n_ions),
            n_pulses=required_pulse_count(n_ions),
            seed=seed,
            max_amplitude=math.inf,
        )
        converged += result.residual_cost < 1e-8

    assert converged >= 45


def test_two_pulses_never_address_two_ions():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        result = synthesize(
            random_targets(rng, 2),
            random_ions(rng, 2),
            n_pulses=2,
            seed=seed,
            max_restarts=10,
        )

        assert result.residual_cost > 1e-3


def test_shift_phases_conjugates_by_z_rotation():
    rng = np.random.default_rng(4)
    for _ in range(20):
        seq = random_sequence(rng)
        delta = rng.uniform(0, 2 * math.pi)
        expected = compose(
            rz(delta), compose(sequence_rotation(seq, 1.0), rz(-delta))
        )

        assert sequence_rotation(shift_phases(seq, delta), 1.0) == expected


def test_full_turn_shift_is_identity():
    seq = random_sequence(np.random.default_rng(5))

    assert sequence_rotation(shift_phases(seq, 2 * math.pi), 1.3) == sequence_rotation(
        seq, 1.3
    )


def test_quarter_shift_maps_xy_to_y_minus_x(xy_result, ions):
    shifted = shift_phases(xy_result.sequence, math.pi / 2)

    assert sequence_rotation(shifted, ions.a_pi[0]) == GATE_TARGETS["Y+"].rotation()
    assert sequence_rotation(shifted, ions.a_pi[1]) == GATE_TARGETS["X-"].rotation()


def test_shifted_gate_keeps_identity():
    assert shifted_gate(IDENTITY, math.pi / 2) == IDENTITY


def test_pairs_and_orbits():
    orbits = orbit_classes()

    assert len(gate_pairs()) == 25
    assert len(orbits) == 6
    members = [pair for orbit in orbits for pair, _ in orbit.members]
    assert len(members) == len(set(members)) == 24
    assert (IDENTITY, IDENTITY) not in members


def test_orbit_representatives():
    reps = {orbit.representative for orbit in orbit_classes()}

    assert reps == {
        ("X+", "X+"),
        ("X+", "X-"),
        ("X+", "Y+"),
        ("X+", "Y-"),
        ("X+", IDENTITY),
        (IDENTITY, "X+"),
    }


def test_library_realizes_every_pair(library):
    assert library.complete
    for orbit in library.orbits:
        for pair, _ in orbit.members:
            seq = library.sequence_for(pair)
            for a_pi, gate in zip(library.ions.a_pi, pair):
                assert distance_hs(
                    sequence_rotation(seq, a_pi), GATE_TARGETS[gate].rotation()
                ) < 1e-6


def test_library_rejects_foreign_ion_set(xy_result):
    library = OrbitLibrary(IonSet((1.0, 2.0)))

    with pytest.raises(ValueError):
        library.set(("X+", "Y+"), xy_result)


def test_library_rejects_non_representative(xy_result, ions):
    library = OrbitLibrary(ions)

    with pytest.raises(ValueError):
        library.set(("Y+", "X-"), xy_result)


def test_document_round_trip(xy_result, tmp_path):
    path = tmp_path / "sequence.json"
    dump_sequence(xy_result, path)

    loaded = load_sequence(path)

    assert loaded.sequence == xy_result.sequence
    assert loaded.targets == xy_result.targets
    assert loaded.converged


def test_document_fields(xy_result):
    doc = to_document(xy_result)

    assert set(doc) == {
        "duration_s",
        "ramp_s",
        "delay_s",
        "pulses",
        "targets",
        "a_pi",
        "residual_cost",
    }
    assert len(doc["pulses"]) == 4


def test_incomplete_document_is_rejected(xy_result):
    doc = to_document(xy_result)
    del doc["a_pi"]

    with pytest.raises(ValueError):
        from_document(doc)
