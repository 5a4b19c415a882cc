import json

import pytest

from cfaging import (ConfigError, ExperimentSpec, ScenarioConfig, dbm_to_mw,
                     load_experiment_spec, load_scenario_config)


def test_defaults_are_valid():
    cfg = ScenarioConfig()
    assert cfg.M == 64 and cfg.N == 4 and cfg.K == 20
    assert cfg.estimation_instant == cfg.tau_p + 1


def test_dbm_conversion():
    assert dbm_to_mw(0.0) == 1.0
    assert dbm_to_mw(10.0) == pytest.approx(10.0)
    assert dbm_to_mw(-94.0) == pytest.approx(10.0 ** -9.4)


def test_scalar_powers_broadcast():
    cfg = ScenarioConfig(K=4, tau_p=2, pilot_powers_dbm=10.0)
    assert cfg.pilot_powers_mw() == [pytest.approx(10.0)] * 4


def test_per_ue_list_length_checked():
    with pytest.raises(ConfigError, match="ue_velocities_kmh"):
        ScenarioConfig(K=4, tau_p=2, ue_velocities_kmh=[54.0, 212.0, 54.0])


def test_tau_p_must_be_below_k():
    with pytest.raises(ConfigError, match="tau_p"):
        ScenarioConfig(K=8, tau_p=8)
    with pytest.raises(ConfigError, match="tau_p"):
        ScenarioConfig(K=8, tau_p=0)


def test_tau_c_must_exceed_tau_p():
    with pytest.raises(ConfigError, match="tau_c"):
        ScenarioConfig(K=8, tau_p=4, tau_c=4)


def test_negative_velocity_rejected():
    with pytest.raises(ConfigError, match="ue_velocities_kmh"):
        ScenarioConfig(K=4, tau_p=2, ue_velocities_kmh=-1.0)


def test_load_json_scenario(tmp_path):
    p = tmp_path / "scn.json"
    p.write_text(json.dumps({"M": 8, "N": 2, "K": 4, "tau_p": 2, "tau_c": 20}))
    cfg = load_scenario_config(p)
    assert (cfg.M, cfg.N, cfg.K) == (8, 2, 4)


def test_load_toml_scenario(tmp_path):
    p = tmp_path / "scn.toml"
    p.write_text('M = 8\nN = 2\nK = 4\ntau_p = 2\ntau_c = 20\nseed = 7\n')
    cfg = load_scenario_config(p)
    assert cfg.seed == 7 and cfg.M == 8


def test_unknown_field_rejected(tmp_path):
    p = tmp_path / "scn.json"
    p.write_text(json.dumps({"M": 8, "antennas": 2}))
    with pytest.raises(ConfigError, match="antennas"):
        load_scenario_config(p)


def test_load_experiment_spec(tmp_path):
    p = tmp_path / "exp.json"
    p.write_text(json.dumps({
        "scenario": {"M": 8, "N": 2, "K": 4, "tau_p": 2, "tau_c": 20},
        "trials": 500,
        "sweep": {"adc_bits": ["inf", 2], "kappa": [0.0, 0.1],
                  "weight_schemes": ["lsfd", "sld"]},
    }))
    spec = load_experiment_spec(p)
    assert spec.trials == 500
    assert spec.sweep_adc_bits == ("inf", 2)
    assert spec.weight_schemes == ("lsfd", "sld")


def test_experiment_spec_missing_scenario(tmp_path):
    p = tmp_path / "exp.json"
    p.write_text(json.dumps({"trials": 10}))
    with pytest.raises(ConfigError, match="scenario"):
        load_experiment_spec(p)


def test_experiment_grid_must_be_nonempty():
    cfg = ScenarioConfig(K=4, tau_p=2)
    with pytest.raises(ConfigError, match="sweep"):
        ExperimentSpec(scenario=cfg, sweep_adc_bits=())


def test_experiment_rejects_unknown_scheme():
    cfg = ScenarioConfig(K=4, tau_p=2)
    with pytest.raises(ConfigError, match="weight_schemes"):
        ExperimentSpec(scenario=cfg, weight_schemes=("mmse",))


def test_experiment_rejects_bad_trials():
    cfg = ScenarioConfig(K=4, tau_p=2)
    with pytest.raises(ConfigError, match="trials"):
        ExperimentSpec(scenario=cfg, trials=0)
