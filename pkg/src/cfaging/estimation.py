"""Phase-unaware LMMSE channel estimation from impaired, contaminated pilots.

The estimate of the channel at the estimation instant is linear in the
quantized pilot observation,

    h_hat_mk = alpha_dk sqrt(ptilde_k) rho_k R_bar_mk A_m Psi_mk y_m,

where Psi_mk is the inverse covariance of the pilot observation over the
co-pilot cohort. The DAC Bussgang gain alpha_dk is part of the estimator
gain so that E{h_hat h_hat^H} equals the estimate covariance Gamma_bar
and the estimate is orthogonal to the error (true LMMSE); the error
covariance is C = R_bar - Gamma_bar.

The estimator uses only long-term statistics (never the realized LoS
phases), so it is phase-unaware by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelBlock, NumericalError
from .config import ConfigError
from .hardware import HardwareProfile, ap_front_end, dac_out, ue_rf_out
from .scenario import Scenario


@dataclass(frozen=True)
class EstimateMoments:
    """Second-order statistics of the LMMSE estimate for every link.

    All arrays are indexed (m, k, ...). `pmap` is the estimator's linear
    map: h_hat = pmap @ y_pilot.
    """

    psi: np.ndarray        # (M, K, N, N) observation whitening matrix
    psi_inv: np.ndarray    # (M, K, N, N) pilot observation covariance
    pmap: np.ndarray       # (M, K, N, N)
    gamma_bar: np.ndarray  # (M, K, N, N) estimate covariance
    C: np.ndarray          # (M, K, N, N) error covariance
    rho_pilot: np.ndarray  # (K,) correlation between pilot and estimation instant


def _herm(X: np.ndarray) -> np.ndarray:
    return 0.5 * (X + X.conj().swapaxes(-1, -2))


def noise_shaping_diag(a_diag: np.ndarray, kappa_r: float) -> np.ndarray:
    """Diagonal weight of channel-conditioned receive noise after the ADC.

    Combines receive-EVM distortion through the ADC gain (kappa_r^2 A^2)
    with ADC quantization noise ((1 + kappa_r^2) B); the AWGN path reduces
    separately to sigma^2 A because A^2 + B = A.
    """
    b_diag = a_diag * (1.0 - a_diag)
    return kappa_r ** 2 * a_diag ** 2 + (1.0 + kappa_r ** 2) * b_diag


def psi_mk(rbar_cohort: list[np.ndarray], eff_powers: list[float],
           a_diag: np.ndarray, kappa_r: float, sigma2: float) -> np.ndarray:
    """Whitening matrix of the quantized pilot observation.

    rbar_cohort: total correlation matrices R_bar_mi of the co-pilot UEs;
    eff_powers: their effective pilot powers (1 + kappa_t^2) alpha_d ptilde.
    Returns the inverse of the observation covariance via Hermitian solve.
    """
    N = len(a_diag)
    nb = noise_shaping_diag(a_diag, kappa_r)
    cov = np.zeros((N, N), dtype=complex)
    for rbar, pw in zip(rbar_cohort, eff_powers):
        cov += pw * (a_diag[:, None] * rbar * a_diag[None, :])
        cov += pw * np.diag(nb * np.diag(rbar).real)
    cov += sigma2 * np.diag(a_diag)
    cov = _herm(cov)
    try:
        psi = np.linalg.solve(cov, np.eye(N, dtype=complex))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"pilot covariance is singular (cond={np.linalg.cond(cov):.3e})") from exc
    return _herm(psi)


def est_second_moments(scn: Scenario, profile: HardwareProfile) -> EstimateMoments:
    """Precompute Psi, the estimator map, and estimate/error covariances."""
    M, K, N = scn.cfg.M, scn.cfg.K, scn.cfg.N
    rho_p = scn.rho_pilot()
    alpha = profile.alpha_d
    eff = (1.0 + profile.kappa_t ** 2) * alpha * scn.pilot_p_mw  # (K,)

    psi = np.zeros((M, K, N, N), dtype=complex)
    psi_inv = np.zeros((M, K, N, N), dtype=complex)
    pmap = np.zeros((M, K, N, N), dtype=complex)
    gbar = np.zeros((M, K, N, N), dtype=complex)
    C = np.zeros((M, K, N, N), dtype=complex)

    for m in range(M):
        a_diag = profile.adc_a[m]
        per_cohort: dict[frozenset, np.ndarray] = {}
        for k in range(K):
            coh = scn.plan.cohort_of(k)
            if coh not in per_cohort:
                members = sorted(coh)
                per_cohort[coh] = psi_mk(
                    [scn.Rbar[m, i] for i in members],
                    [eff[i] for i in members],
                    a_diag, float(profile.kappa_r[m]), scn.sigma2_mw)
            psi[m, k] = per_cohort[coh]
            nb = noise_shaping_diag(a_diag, float(profile.kappa_r[m]))
            cov = np.zeros((N, N), dtype=complex)
            for i in sorted(coh):
                cov += eff[i] * (a_diag[:, None] * scn.Rbar[m, i] * a_diag[None, :])
                cov += eff[i] * np.diag(nb * np.diag(scn.Rbar[m, i]).real)
            cov += scn.sigma2_mw * np.diag(a_diag)
            psi_inv[m, k] = _herm(cov)
            gain = alpha[k] * np.sqrt(scn.pilot_p_mw[k]) * rho_p[k]
            pmap[m, k] = gain * (scn.Rbar[m, k] * a_diag[None, :]) @ psi[m, k]
            gbar[m, k] = _herm(pmap[m, k] @ psi_inv[m, k] @ pmap[m, k].conj().T)
            C[m, k] = _herm(scn.Rbar[m, k] - gbar[m, k])
            evmin = np.linalg.eigvalsh(C[m, k]).min()
            if evmin < -1e-6 * np.trace(scn.Rbar[m, k]).real:
                raise NumericalError(
                    f"error covariance indefinite at link ({m},{k}): min eig {evmin:.3e}")

    return EstimateMoments(psi=psi, psi_inv=psi_inv, pmap=pmap, gamma_bar=gbar,
                           C=C, rho_pilot=rho_p)


def lmmse(y_pilot: np.ndarray, pmap_mk: np.ndarray) -> np.ndarray:
    """Apply the estimator map to a pilot observation (linear in y)."""
    return np.einsum("ab,...b->...a", pmap_mk, y_pilot)


def rx_pilot(t: int, block: ChannelBlock, scn: Scenario, profile: HardwareProfile,
             rng: np.random.Generator) -> np.ndarray:
    """Impaired received pilot signal at every AP for pilot instant t.

    The channel block must hold the realized channels at instant t. Each
    cohort member's pilot passes through its DAC and transmit RF chain;
    the superposition passes through every AP's impaired front end.
    Returns an (M, N) array.
    """
    members = sorted(k for k in range(scn.cfg.K) if scn.plan.pilot_instant[k] == t)
    if not members:
        raise ConfigError(f"no UE transmits a pilot at instant {t}")
    h_t = block.h[t]  # (M, K, N)
    M, _, N = h_t.shape

    tx = np.zeros(scn.cfg.K, dtype=complex)
    cond_powers = np.zeros(scn.cfg.K)
    for k in members:
        s_dac, _ = dac_out(np.asarray(1.0 + 0j), scn.pilot_p_mw[k],
                           float(profile.dac_rho[k]), rng)
        s_rf = ue_rf_out(s_dac, float(profile.alpha_d[k]) * scn.pilot_p_mw[k],
                         float(profile.kappa_t[k]), rng)
        tx[k] = s_rf
        cond_powers[k] = (1.0 + profile.kappa_t[k] ** 2) * profile.alpha_d[k] * scn.pilot_p_mw[k]

    y = np.zeros((M, N), dtype=complex)
    for m in range(M):
        noiseless = np.einsum("k,kn->n", tx, h_t[m])
        y[m] = ap_front_end(noiseless, h_t[m], cond_powers,
                            float(profile.kappa_r[m]), profile.adc_bank(m),
                            scn.sigma2_mw, rng)
    return y
