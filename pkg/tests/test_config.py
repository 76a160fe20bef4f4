import json
import math

import pytest

from ionaddress.config import (
    ConfigError,
    SweepConfig,
    apply_overrides,
    build_config,
    load_config,
)
from ionaddress.qsim import NoiseModel, reference_noise
from ionaddress.rotor import TargetGate
from ionaddress.synth import GATE_TARGETS


def test_seed_is_required():
    with pytest.raises(ConfigError) as e:
        build_config({"kind": "rb"})

    assert e.value.field == "seed"


@pytest.mark.parametrize("seed", [-1, 1.5, True, "7"])
def test_seed_must_be_a_non_negative_integer(seed):
    with pytest.raises(ConfigError) as e:
        build_config({"kind": "rb", "seed": seed})

    assert e.value.field == "seed"


def test_unknown_kind():
    with pytest.raises(ConfigError) as e:
        build_config({"kind": "tomography", "seed": 1})

    assert e.value.field == "kind"


def test_unknown_key_is_named():
    with pytest.raises(ConfigError) as e:
        build_config({"kind": "rb", "seed": 1, "noise": {"t3_s": 1.0}})

    assert e.value.field == "noise.t3_s"


def test_unknown_section():
    with pytest.raises(ConfigError) as e:
        build_config({"kind": "rb", "seed": 1, "tomography": {}})

    assert e.value.field == "tomography"


def test_invalid_value_names_its_section():
    with pytest.raises(ConfigError) as e:
        build_config({"kind": "rb", "seed": 1, "rb": {"lengths": [10, 1]}})

    assert e.value.field == "rb"


def test_rb_seed_comes_from_top_level():
    config = build_config({"kind": "rb", "seed": 7, "rb": {"lengths": [1, 10, 100]}})

    assert config.rb.seed == 7
    assert config.rb.lengths == (1, 10, 100)
    with pytest.raises(ConfigError):
        build_config({"kind": "rb", "seed": 7, "rb": {"seed": 3}})


def test_defaults():
    config = build_config({"kind": "budget", "seed": 0})

    assert config.noise == reference_noise()
    assert config.ions.a_pi == (1.0, 1.25)
    assert config.out == "."


def test_quiet_preset_with_overrides():
    config = build_config(
        {"kind": "budget", "seed": 0, "noise": {"preset": "none", "t2_s": 4.6}}
    )

    assert config.noise == NoiseModel(t2_s=4.6)


def test_infinite_t2():
    config = build_config({"kind": "budget", "seed": 0, "noise": {"t2_s": "inf"}})

    assert config.noise.t2_s == math.inf


def test_unknown_preset():
    with pytest.raises(ConfigError) as e:
        build_config({"kind": "budget", "seed": 0, "noise": {"preset": "loud"}})

    assert e.value.field == "noise.preset"


def test_nested_noise_sections():
    config = build_config(
        {
            "kind": "budget",
            "seed": 0,
            "noise": {
                "preset": "none",
                "spectators": [{"detuning_hz": 1e8, "level": 1}],
                "motion": {"enabled": True, "rel_amp_mod": 0.01},
                "amp_drift": [[0, 1.0], [60, 1.001]],
            },
        }
    )

    assert config.noise.spectators[0].level == 1
    assert config.noise.motion.depth == 0.01
    assert config.noise.amp_drift == ((0.0, 1.0), (60.0, 1.001))


def test_targets_by_name_or_angles():
    config = build_config(
        {"kind": "synth", "seed": 0, "synth": {"targets": ["X-", {"theta": 1.0, "phi": 0.5}]}}
    )

    assert config.synth.targets == (GATE_TARGETS["X-"], TargetGate(1.0, 0.5, 0.0))


def test_unknown_target_gate():
    with pytest.raises(ConfigError) as e:
        build_config({"kind": "synth", "seed": 0, "synth": {"targets": ["Z+"]}})

    assert e.value.field == "synth.targets.0"


def test_sweep_values_need_one_variable():
    with pytest.raises(ValueError):
        SweepConfig(values=(1.0, 2.0))
    assert SweepConfig("delay").sweeps() == {"delay": (0.0, 5e-6, 1e-5, 2e-5, 5e-5, 1e-4)}
    assert set(SweepConfig().sweeps()) == {"detuning", "amplitude", "zeeman", "delay"}


def test_overrides_create_sections():
    doc = apply_overrides({}, ["rb.lengths=[1, 10]", "rb.mode=simultaneous"])

    assert doc == {"rb": {"lengths": [1, 10], "mode": "simultaneous"}}


def test_override_needs_a_value():
    with pytest.raises(ConfigError):
        apply_overrides({}, ["noise.t2_s"])


def test_override_into_a_value_fails():
    with pytest.raises(ConfigError):
        apply_overrides({"seed": 1}, ["seed.value=2"])


def test_load_config_layers(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"kind": "rb", "seed": 1, "noise": {"t2_s": 1.0}}))

    config = load_config(path, ["noise.t2_s=4.6"], seed=5, out=None)

    assert config.seed == 5
    assert config.out == "."
    assert config.noise.t2_s == 4.6


def test_unreadable_config(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_config_hash_is_stable():
    doc = {"kind": "rb", "seed": 1, "rb": {"lengths": [1, 10, 100]}}

    assert build_config(doc).config_hash == build_config(dict(doc)).config_hash
    assert build_config(doc).config_hash != build_config(dict(doc, seed=2)).config_hash


def test_config_dict_is_json():
    config = build_config({"kind": "sweep", "seed": 3})

    doc = json.loads(json.dumps(config.to_dict()))

    assert doc["kind"] == "sweep"
    assert doc["noise"]["t2_s"] == 4.6
    assert doc["synth"]["targets"][0] == {"theta": math.pi / 2, "phi": 0.0, "delta": 0.0}
