import csv
import json
import math
from collections import Counter
from dataclasses import replace

import numpy as np
import pytest

from ionaddress.bench import (
    FAILED_FIT,
    FIT_CONVENTION,
    SURVIVAL_HEADER,
    CompilationError,
    DecayFit,
    RBConfig,
    RBResult,
    clifford_stream,
    compile_simultaneous,
    compile_single,
    fit_decay,
    gen_rb_sequence,
    pad_streams,
    pulses_per_clifford,
    run_rb,
    trial_rng,
    write_fit_json,
    write_survival_csv,
)
from ionaddress.qsim import NoiseModel
from ionaddress.rotor import I, X180, compose, distance_hs
from ionaddress.synth import IDENTITY, OrbitLibrary, sequence_rotation


def net_rotation(table, cliffords):
    r = I
    for c in cliffords:
        r = compose(table.elements[c], r)
    return r


def test_sequence_closes_to_a_pauli(table):
    rng = np.random.default_rng(7)
    for m in (1, 2, 5, 50):
        rb = gen_rb_sequence(m, rng, table)

        assert len(rb.cliffords) == m + 1
        assert rb.pauli in table.paulis
        assert net_rotation(table, rb.cliffords) == table.elements[rb.pauli]


def test_expected_outcome_follows_pauli(table):
    rng = np.random.default_rng(8)
    for _ in range(50):
        rb = gen_rb_sequence(3, rng, table)
        flips = table.paulis.index(rb.pauli) in (1, 2)

        assert rb.expected == int(flips)


def test_cliffords_are_drawn_uniformly(table):
    rng = np.random.default_rng(9)
    draws = Counter()
    for _ in range(24):
        draws.update(gen_rb_sequence(1000, rng, table).cliffords[:-1])

    assert set(draws) == set(range(24))
    assert all(850 < n < 1150 for n in draws.values())


def test_sequence_length_must_be_positive():
    with pytest.raises(ValueError):
        gen_rb_sequence(0, np.random.default_rng(0))


def test_identity_compiles_to_nothing():
    assert len(compile_single((0,))) == 0


def test_x_pi_compiles_to_two_quarter_pulses(table):
    seq = compile_single((table.index_of(X180),))

    assert len(seq) == 2
    assert list(seq.amplitudes) == [0.5, 0.5]
    assert list(seq.phases) == [0.0, 0.0]


def test_pulse_count_matches_word_length(table):
    assert pulses_per_clifford(table) == pytest.approx(52 / 24)


def test_single_compilation_realizes_the_pauli(table):
    rng = np.random.default_rng(10)
    for _ in range(20):
        rb = gen_rb_sequence(6, rng, table)
        seq = compile_single(rb.cliffords, 1.25, table)
        if not len(seq):
            continue

        assert distance_hs(sequence_rotation(seq, 1.25), table.elements[rb.pauli]) < 1e-6


def test_simultaneous_compilation_realizes_both_paulis(table, library):
    rng = np.random.default_rng(11)
    for _ in range(5):
        rbs = [gen_rb_sequence(4, rng, table) for _ in range(2)]
        streams = [clifford_stream(rb.cliffords, table) for rb in rbs]

        compiled = compile_simultaneous(*streams, library)

        for a_pi, rb in zip(library.ions.a_pi, rbs):
            r = I
            for seq in compiled:
                r = compose(sequence_rotation(seq, a_pi), r)
            assert distance_hs(r, table.elements[rb.pauli]) < 1e-6


def test_padding_pads_the_shorter_stream():
    pairs = pad_streams(("X+", "Y-", "X+"), ("Y+",))

    assert pairs == [("X+", "Y+"), ("Y-", IDENTITY), ("X+", IDENTITY)]


def test_padding_never_pairs_two_identities(table):
    rng = np.random.default_rng(12)
    for _ in range(50):
        streams = [
            clifford_stream(gen_rb_sequence(3, rng, table).cliffords, table)
            for _ in range(2)
        ]
        assert (IDENTITY, IDENTITY) not in pad_streams(*streams)


def test_double_identity_is_not_compiled(library):
    with pytest.raises(CompilationError):
        compile_simultaneous((IDENTITY,), (IDENTITY,), library)


def test_missing_orbit_is_a_compilation_error(ions):
    with pytest.raises(CompilationError):
        compile_simultaneous(("X+",), ("Y+",), OrbitLibrary(ions))


def test_simultaneous_rb_needs_a_library(ions):
    with pytest.raises(CompilationError):
        run_rb(RBConfig(mode="simultaneous"), NoiseModel(), ions)


def test_config_validation():
    with pytest.raises(ValueError):
        RBConfig(lengths=(10, 1))
    with pytest.raises(ValueError):
        RBConfig(mode="sequential")
    with pytest.raises(ValueError):
        RBConfig(trials_per_length=0)


def test_noiseless_single_rb():
    result = run_rb(RBConfig(lengths=(1, 10, 100), trials_per_length=3), NoiseModel())
    _, survivals = result.survival(0)

    np.testing.assert_allclose(survivals, 1.0, atol=1e-9)
    assert result.fit(0).error_per_gate == pytest.approx(0.0, abs=1e-9)


def test_single_rb_is_reproducible():
    config = RBConfig(lengths=(1, 5, 20), trials_per_length=2, seed=3)
    noise = NoiseModel(t2_s=1e-3)

    assert run_rb(config, noise).records == run_rb(config, noise).records


def test_shot_sampling():
    config = RBConfig(lengths=(1, 10, 100), trials_per_length=2, shots=100)

    result = run_rb(config, NoiseModel(t2_s=1e-3))
    _, survivals = result.survival(0)

    np.testing.assert_allclose(survivals * 100, np.round(survivals * 100), atol=1e-9)
    assert result.records == run_rb(config, NoiseModel(t2_s=1e-3)).records


def test_worker_pool_matches_serial_run():
    config = RBConfig(lengths=(1, 5, 20), trials_per_length=2, seed=4)
    noise = NoiseModel(t2_s=1e-3)

    pooled = run_rb(replace(config, workers=2), noise)

    assert pooled.records == run_rb(config, noise).records


def test_dephasing_rb_error():
    config = RBConfig(lengths=(1, 10, 100, 1000), trials_per_length=5)

    result = run_rb(config, NoiseModel(t2_s=4.6))

    assert result.fit(0).error_per_gate == pytest.approx(0.42e-6, rel=0.2)


def test_addressed_gate_metric_counts_pulses(table):
    config = RBConfig(lengths=(1, 2, 4), trials_per_length=2, gate_metric="addressed_gate")

    result = run_rb(config, NoiseModel())

    pulses = [
        len(compile_single(gen_rb_sequence(m, trial_rng(0, m, t), table).cliffords))
        for m in config.lengths
        for t in range(config.trials_per_length)
    ]
    assert [r.length for r in result.records] == pulses


def test_spam_reference_is_flat():
    config = RBConfig(lengths=(1, 10, 100), trials_per_length=2, spam_reference=True)

    result = run_rb(config, NoiseModel(spam=0.01))
    _, survivals = result.survival(0)

    np.testing.assert_allclose(survivals, 0.99, atol=1e-12)
    assert result.fits == ()
    assert result.spam(0) == pytest.approx(0.01)


@pytest.mark.parametrize("error", [1.5e-6, 1.6e-5, 5.2e-5])
def test_fit_recovers_error_per_gate(error):
    m = np.array([1, 10, 100, 1000, 10000])
    survivals = 0.5 + 0.49 * (1 - 2 * error) ** m

    fit = fit_decay(m, survivals)

    assert fit.error_per_gate == pytest.approx(error, rel=0.01)
    assert fit.spam == pytest.approx(0.01, abs=1e-6)
    assert not fit.degenerate


def test_average_error_over_ions():
    result = RBResult(
        RBConfig(mode="simultaneous"),
        (),
        ((0, DecayFit(1.6e-5, 0.0, 0.0, 1 - 3.2e-5)), (1, DecayFit(5.2e-5, 0.0, 0.0, 1 - 1.04e-4))),
    )

    assert result.average_error == pytest.approx(3.4e-5)


def test_flat_survival_is_degenerate():
    fit = fit_decay([1, 10, 100], [1.0, 1.0, 1.0])

    assert fit.degenerate
    assert fit.alpha == 1.0
    assert fit.error_per_gate == 0.0
    assert fit.spam == 0.0


def test_growing_survival_is_a_failed_fit():
    fit = fit_decay([1, 10, 100], [0.6, 0.7, 0.9])

    assert fit.degenerate
    assert math.isnan(fit.error_per_gate)


def test_survival_below_half_is_a_failed_fit():
    fit = fit_decay([1, 10, 100, 300], [0.45, 0.40, 0.42, 0.41])

    assert fit is FAILED_FIT


def test_failed_fit_summary(tmp_path):
    result = RBResult(RBConfig(), (), ((0, FAILED_FIT),))

    write_fit_json(result, tmp_path / "fit.json")

    (fit,) = json.loads((tmp_path / "fit.json").read_text())["fits"]
    assert fit["ion"] == 0
    assert all(fit[k] is None for k in ("error_per_gate", "error_stderr", "spam", "alpha"))
    assert math.isnan(result.average_error)


def test_fit_convention_states_weighting():
    assert "weighted by binomial shot noise when shots are set" in FIT_CONVENTION


def test_fit_needs_three_lengths():
    with pytest.raises(ValueError):
        fit_decay([1, 10, 10], [0.9, 0.8, 0.8])


def test_result_files(tmp_path):
    result = run_rb(RBConfig(lengths=(1, 10, 100), trials_per_length=2), NoiseModel(t2_s=1e-3))

    write_survival_csv(result, tmp_path / "survival.csv")
    write_fit_json(result, tmp_path / "fit.json")

    with open(tmp_path / "survival.csv", newline="") as f:
        rows = list(csv.reader(f))
    assert tuple(rows[0]) == SURVIVAL_HEADER
    assert len(rows) == 1 + 6
    summary = json.loads((tmp_path / "fit.json").read_text())
    assert summary["convention"] == FIT_CONVENTION
    assert set(summary["fits"][0]) == {"ion", "error_per_gate", "error_stderr", "spam", "alpha"}


def test_noiseless_simultaneous_rb(ions, library):
    config = RBConfig(lengths=(1, 2, 4), trials_per_length=2, mode="simultaneous")

    result = run_rb(config, NoiseModel(), ions, library)

    assert result.ions == (0, 1)
    for ion in result.ions:
        np.testing.assert_allclose(result.survival(ion)[1], 1.0, atol=1e-8)
