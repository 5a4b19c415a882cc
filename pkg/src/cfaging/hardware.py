"""Bussgang-linearized DAC/ADC quantization and EVM-based RF distortion.

Distortion and quantization noises are drawn Gaussian conditioned on the
channel realization (the Bussgang/EVM statistical model); the conditional
covariances are computed analytically from the instantaneous channels,
never estimated from samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ConfigError
from .scenario import DomainError

# Lloyd-Max distortion factors for a uniform quantizer at low bit depths
_RHO_BY_BITS = {1: 0.3634, 2: 0.1175, 3: 0.03454, 4: 0.009497, 5: 0.002499}


def bits_to_rho(bits) -> float:
    """Quantizer distortion factor rho for a given bit depth (inf = ideal)."""
    if bits in ("inf", np.inf, float("inf")):
        return 0.0
    b = int(bits)
    if b < 1:
        raise DomainError(f"bit depth must be >= 1, got {bits}")
    if b <= 5:
        return _RHO_BY_BITS[b]
    return (np.pi * np.sqrt(3.0) / 2.0) * 2.0 ** (-2 * b)


@dataclass(frozen=True)
class AdcBank:
    """Per-antenna ADC linearization of one AP: gains A and noise factor B = A(I-A)."""

    a_diag: np.ndarray  # (N,) entries 1 - rho_a in (0, 1]

    def __post_init__(self):
        a = np.asarray(self.a_diag, dtype=float)
        if np.any(a <= 0) or np.any(a > 1):
            raise ConfigError("adc: diagonal of A must lie in (0, 1]")

    @property
    def b_diag(self) -> np.ndarray:
        a = np.asarray(self.a_diag)
        return a * (1.0 - a)


@dataclass(frozen=True)
class HardwareProfile:
    """Impairment levels of every UE transmit chain and AP receive chain."""

    kappa_t: np.ndarray   # (K,)
    kappa_r: np.ndarray   # (M,)
    dac_rho: np.ndarray   # (K,)
    adc_rho: np.ndarray   # (M, N)

    def __post_init__(self):
        if np.any(self.dac_rho < 0) or np.any(self.dac_rho >= 1):
            raise ConfigError("dac_rho: must lie in [0, 1)")
        if np.any(self.adc_rho < 0) or np.any(self.adc_rho >= 1):
            raise ConfigError("adc_rho: must lie in [0, 1)")
        if np.any(self.kappa_t < 0) or np.any(self.kappa_r < 0):
            raise ConfigError("kappa: EVM values must be >= 0")

    @property
    def alpha_d(self) -> np.ndarray:
        """(K,) DAC Bussgang gains 1 - rho_d."""
        return 1.0 - self.dac_rho

    @property
    def adc_a(self) -> np.ndarray:
        """(M, N) diagonal entries of the ADC gain matrices A_m."""
        return 1.0 - self.adc_rho

    @property
    def adc_b(self) -> np.ndarray:
        """(M, N) diagonal entries of B_m = A_m (I - A_m)."""
        a = self.adc_a
        return a * (1.0 - a)

    def adc_bank(self, m: int) -> AdcBank:
        return AdcBank(a_diag=self.adc_a[m])

    @classmethod
    def ideal(cls, M: int, N: int, K: int) -> "HardwareProfile":
        return cls(kappa_t=np.zeros(K), kappa_r=np.zeros(M),
                   dac_rho=np.zeros(K), adc_rho=np.zeros((M, N)))

    @classmethod
    def from_config(cls, hw, M: int, N: int, K: int) -> "HardwareProfile":
        """Expand a HardwareConfig: scalars broadcast, bit depths map to rho."""
        kappa_t = np.broadcast_to(np.asarray(hw.kappa_t, dtype=float), (K,)).copy()
        kappa_r = np.broadcast_to(np.asarray(hw.kappa_r, dtype=float), (M,)).copy()
        if hw.dac_rho is not None:
            dac_rho = np.broadcast_to(np.asarray(hw.dac_rho, dtype=float), (K,)).copy()
        else:
            bits = hw.dac_bits
            bits = [bits] * K if np.isscalar(bits) or bits == "inf" else list(bits)
            if len(bits) != K:
                raise ConfigError(f"dac_bits: expected scalar or list of length {K}")
            dac_rho = np.array([bits_to_rho(b) for b in bits])
        if hw.adc_rho is not None:
            adc_rho = np.broadcast_to(np.asarray(hw.adc_rho, dtype=float), (M, N)).copy()
        else:
            adc_rho = _expand_adc_bits(hw.adc_bits, M, N)
        return cls(kappa_t=kappa_t, kappa_r=kappa_r, dac_rho=dac_rho, adc_rho=adc_rho)


def _expand_adc_bits(bits, M: int, N: int) -> np.ndarray:
    if np.isscalar(bits) or bits == "inf":
        return np.full((M, N), bits_to_rho(bits))
    bits = list(bits)
    if len(bits) != M:
        raise ConfigError(f"adc_bits: expected scalar, per-AP list of length {M}, "
                          f"or {M}x{N} matrix")
    out = np.zeros((M, N))
    for m, row in enumerate(bits):
        if np.isscalar(row) or row == "inf":
            out[m, :] = bits_to_rho(row)
        else:
            row = list(row)
            if len(row) != N:
                raise ConfigError(f"adc_bits: row {m} must have {N} entries")
            out[m, :] = [bits_to_rho(b) for b in row]
    return out


def _cn(rng: np.random.Generator, var, shape) -> np.ndarray:
    """Circular complex normal draw with the given (broadcastable) variance."""
    std = np.sqrt(np.broadcast_to(np.asarray(var, dtype=float), shape) / 2.0)
    return std * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def dac_out(symbol: np.ndarray, power: float, rho_d: float, rng: np.random.Generator):
    """Bussgang DAC output for a unit-power symbol stream.

    Returns (s_dac, quant_noise) with s_dac = alpha sqrt(p) symbol + noise,
    noise ~ CN(0, rho alpha p) uncorrelated with the symbol.
    """
    symbol = np.asarray(symbol)
    alpha = 1.0 - rho_d
    noise = _cn(rng, rho_d * alpha * power, symbol.shape)
    return alpha * np.sqrt(power) * symbol + noise, noise


def ue_rf_out(s_dac: np.ndarray, s_dac_power: float, kappa_t: float,
              rng: np.random.Generator) -> np.ndarray:
    """EVM transmit distortion: adds CN(0, kappa_t^2 E{|s_dac|^2})."""
    s_dac = np.asarray(s_dac)
    return s_dac + _cn(rng, kappa_t ** 2 * s_dac_power, s_dac.shape)


def ap_front_end(y: np.ndarray, channels: np.ndarray, tx_powers: np.ndarray,
                 kappa_r: float, adc: AdcBank, sigma2: float,
                 rng: np.random.Generator) -> np.ndarray:
    """Impaired AP receive chain applied to a noiseless superposition.

    y: (..., N) sum_k h_k s_k; channels: (..., K, N) instantaneous channels;
    tx_powers: (K,) conditional per-UE received powers E{|s_RF,k|^2}.
    Adds receive-EVM distortion with the channel-conditioned diagonal
    covariance, AWGN, then the Bussgang ADC gain and quantization noise.
    """
    y = np.asarray(y)
    channels = np.asarray(channels)
    if channels.shape[-1] != y.shape[-1] or channels.shape[:-2] != y.shape[:-1]:
        raise ConfigError("ap_front_end: channel array does not match y")
    if len(tx_powers) != channels.shape[-2]:
        raise ConfigError("ap_front_end: tx_powers does not match channel count")
    w_diag = np.einsum("k,...kn->...n", np.asarray(tx_powers), np.abs(channels) ** 2)
    eta = _cn(rng, kappa_r ** 2 * w_diag, y.shape)
    z = _cn(rng, sigma2, y.shape)
    y_rf = y + eta + z
    s_diag = (1.0 + kappa_r ** 2) * w_diag + sigma2
    n_adc = _cn(rng, adc.b_diag * s_diag, y.shape)
    return adc.a_diag * y_rf + n_adc
