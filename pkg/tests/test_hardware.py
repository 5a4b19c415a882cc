import numpy as np
import pytest

from cfaging import (AdcBank, ConfigError, DomainError, HardwareConfig,
                     HardwareProfile, ap_front_end, bits_to_rho, dac_out,
                     ue_rf_out)


def test_infinite_bits_is_ideal():
    assert bits_to_rho("inf") == 0.0
    assert bits_to_rho(float("inf")) == 0.0


def test_one_bit_matches_lloyd_max_oracle():
    # 1-bit Lloyd-Max distortion of a Gaussian input is 1 - 2/pi
    assert bits_to_rho(1) == pytest.approx(1.0 - 2.0 / np.pi, abs=5e-4)
    assert bits_to_rho(1) == 0.3634


def test_low_bit_table():
    assert [bits_to_rho(b) for b in (2, 3, 4, 5)] == [0.1175, 0.03454,
                                                      0.009497, 0.002499]


def test_asymptotic_formula_above_five_bits():
    assert bits_to_rho(6) == pytest.approx(np.pi * np.sqrt(3) / 2 * 2 ** -12)
    assert bits_to_rho(6) == pytest.approx(6.64e-4, rel=1e-2)


def test_bits_below_one_rejected():
    with pytest.raises(DomainError):
        bits_to_rho(0)


def test_adc_bank_validation():
    bank = AdcBank(a_diag=np.array([1.0, 0.6366]))
    assert np.allclose(bank.b_diag, [0.0, 0.6366 * 0.3634])
    with pytest.raises(ConfigError):
        AdcBank(a_diag=np.array([0.0, 0.5]))


def test_profile_from_config_broadcasts():
    hw = HardwareConfig(kappa_t=0.1, kappa_r=[0.1, 0.2], dac_bits=2,
                        adc_bits=[3, "inf"])
    prof = HardwareProfile.from_config(hw, M=2, N=2, K=3)
    assert np.allclose(prof.kappa_t, 0.1)
    assert np.allclose(prof.kappa_r, [0.1, 0.2])
    assert np.allclose(prof.dac_rho, bits_to_rho(2))
    assert np.allclose(prof.adc_rho[0], bits_to_rho(3))
    assert np.allclose(prof.adc_rho[1], 0.0)


def test_profile_per_antenna_bits_matrix():
    hw = HardwareConfig(adc_bits=[[1, 4], [2, 3]])
    prof = HardwareProfile.from_config(hw, M=2, N=2, K=2)
    expect = [[bits_to_rho(1), bits_to_rho(4)], [bits_to_rho(2), bits_to_rho(3)]]
    assert np.allclose(prof.adc_rho, expect)


def test_profile_rejects_wrong_lengths():
    with pytest.raises(ConfigError, match="adc_bits"):
        HardwareProfile.from_config(HardwareConfig(adc_bits=[1, 2, 3]), M=2, N=2, K=2)
    with pytest.raises(ConfigError, match="dac_bits"):
        HardwareProfile.from_config(HardwareConfig(dac_bits=[1, 2, 3]), M=2, N=2, K=2)


def test_profile_ideal():
    prof = HardwareProfile.ideal(M=3, N=2, K=4)
    assert np.all(prof.alpha_d == 1.0)
    assert np.all(prof.adc_a == 1.0)
    assert np.all(prof.adc_b == 0.0)


def test_dac_noise_variance_and_gain():
    rho_d = 0.3634
    rng = np.random.default_rng(0)
    T = 100_000
    symbols = np.exp(1j * rng.uniform(0, 2 * np.pi, T))
    s_dac, noise = dac_out(symbols, 1.0, rho_d, rng)
    var = rho_d * (1 - rho_d)  # 0.3634 * 0.6366 = 0.23135
    assert var == pytest.approx(0.23135, abs=1e-4)
    assert np.var(noise) == pytest.approx(var, rel=0.03)
    assert np.allclose(s_dac - noise, (1 - rho_d) * symbols)


def test_dac_noise_uncorrelated_with_symbol():
    rng = np.random.default_rng(1)
    T = 100_000
    symbols = np.exp(1j * rng.uniform(0, 2 * np.pi, T))
    _, noise = dac_out(symbols, 1.0, 0.1175, rng)
    corr = np.abs(np.vdot(symbols, noise)) / T / np.sqrt(np.var(noise))
    assert corr <= 3.0 / np.sqrt(T)


def test_rf_out_ideal_is_identity():
    rng = np.random.default_rng(2)
    s = np.array([1.0 + 2j, -0.5j])
    assert np.array_equal(ue_rf_out(s, 1.0, 0.0, rng), s)


def test_rf_out_power_and_independence():
    rng = np.random.default_rng(3)
    T = 100_000
    s = np.exp(1j * rng.uniform(0, 2 * np.pi, T))
    out = ue_rf_out(s, 1.0, 0.1, rng)
    assert np.mean(np.abs(out) ** 2) == pytest.approx(1.01, rel=0.02)
    xi = out - s
    corr = np.abs(np.vdot(s, xi)) / T / np.sqrt(np.var(xi))
    assert corr <= 3.0 / np.sqrt(T)


def test_front_end_ideal_adds_only_thermal_noise():
    rng = np.random.default_rng(4)
    T = 50_000
    sigma2 = 0.25
    y = np.ones((T, 2), dtype=complex)
    ch = np.ones((T, 1, 2), dtype=complex)
    out = ap_front_end(y, ch, np.array([1.0]), 0.0, AdcBank(np.ones(2)),
                       sigma2, rng)
    z = out - y
    assert np.var(z) == pytest.approx(sigma2, rel=0.03)
    assert np.abs(z.mean()) <= 3 * np.sqrt(sigma2 / (T * 2))


def test_front_end_conditional_rf_noise_variance():
    # single antenna, single UE, |h|^2 = 1, unit conditional power: W = 1,
    # receive-EVM variance is kappa_r^2 = 0.01
    rng = np.random.default_rng(5)
    T = 100_000
    y = np.zeros((T, 1), dtype=complex)
    ch = np.ones((T, 1, 1), dtype=complex)
    out = ap_front_end(y, ch, np.array([1.0]), 0.1, AdcBank(np.ones(1)),
                       0.0, rng)
    assert np.var(out) == pytest.approx(0.01, rel=0.03)


def test_front_end_quantization_noise_uncorrelated():
    rng = np.random.default_rng(6)
    T = 100_000
    a = 1.0 - 0.1175
    ch = np.ones((T, 1, 1), dtype=complex)
    s = (rng.standard_normal(T) + 1j * rng.standard_normal(T)) / np.sqrt(2)
    y_rf = s[:, None] * ch[:, 0]            # unit-power symbol through |h| = 1
    out = ap_front_end(y_rf, ch, np.array([1.0]), 0.0,
                       AdcBank(np.array([a])), 0.0, rng)
    # with kappa_r = 0 and sigma^2 = 0 the quantizer input is y_rf itself,
    # so the residual out - a y_rf is exactly the injected quantization noise
    q = out - a * y_rf
    assert np.var(q) == pytest.approx(a * (1 - a), rel=0.03)
    corr = np.abs(np.vdot(y_rf, q)) / T
    assert corr <= 3 * np.sqrt(np.var(q) * np.var(y_rf) / T)


def test_front_end_dimension_mismatch():
    rng = np.random.default_rng(7)
    with pytest.raises(ConfigError):
        ap_front_end(np.zeros((3, 2)), np.zeros((3, 1, 3)), np.array([1.0]),
                     0.0, AdcBank(np.ones(2)), 0.1, rng)
    with pytest.raises(ConfigError):
        ap_front_end(np.zeros((3, 2)), np.zeros((3, 2, 2)), np.array([1.0]),
                     0.0, AdcBank(np.ones(2)), 0.1, rng)
