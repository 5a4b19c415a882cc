"""Monte Carlo evaluation of the uplink disturbance decomposition.

Each trial draws the channels at the estimation instant, runs the impaired
pilot phase to form LMMSE estimates, then for every requested data instant
draws aged channels and all impairment noises and evaluates the statistics
whose moments the closed-form engine predicts: desired signal, beamforming
uncertainty, aging leakage, per-interferer inter-UE interference, transmit
DAC and RF distortion, receive RF distortion, ADC quantization, and
thermal noise. Powers are sample moments over trials.

The desired-signal mean is estimated from the conditional expectation of
the desired statistic given the estimation-instant channels (every pilot
noise and pilot innovation is zero-mean given those channels), which
leaves the estimand unchanged but removes most of the estimator variance;
the beamforming-uncertainty power still uses the full noisy statistic.

Trials are processed in batches. Batch b draws from a fresh generator
seeded with SeedSequence([seed, b]) and batches are reduced in index
order, so results are bit-identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import NumericalError, draw_phase_rician, psd_sqrt
from .estimation import EstimateMoments
from .hardware import HardwareProfile, _cn
from .scenario import Scenario


@dataclass(frozen=True)
class TermPowers:
    """Sample powers of every decomposition statistic.

    Arrays are (K, n_count) except iui, which is (K, K, n_count) and holds
    the contribution of each interferer i to each served UE k (the i = k
    entry exists but is not interference; see iui_total).
    """

    trials: int
    instants: np.ndarray
    ds: np.ndarray
    bu: np.ndarray
    ca: np.ndarray
    iui: np.ndarray
    dac: np.ndarray
    trf: np.ndarray
    rrf: np.ndarray
    adc: np.ndarray
    ns: np.ndarray

    @property
    def iui_total(self) -> np.ndarray:
        """(K, n_count) interference power, self term excluded."""
        total = self.iui.sum(axis=1)
        K = self.iui.shape[0]
        return total - self.iui[np.arange(K), np.arange(K), :]

    def denominator(self) -> np.ndarray:
        return (self.bu + self.ca + self.iui_total + self.dac + self.trf
                + self.rrf + self.adc + self.ns)


def local_combine(h_hat: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Local MR statistic conj(h_hat) . y over the antenna axis."""
    return np.einsum("...a,...a->...", h_hat.conj(), y)


def lsfd_combine(s_local: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Central weighting conj(w) . s over the AP axis (last axis of s)."""
    return np.einsum("...m,...m->...", np.conj(weights), s_local)


@dataclass(frozen=True)
class _BatchSums:
    """Raw per-batch sums; combined by addition in batch order."""

    trials: int
    z_sum: np.ndarray     # (K, Nn) complex, channel-conditioned statistic
    z_abs2: np.ndarray    # (K, Nn), full noisy statistic
    ca: np.ndarray
    iui: np.ndarray       # (K, K, Nn)
    dac: np.ndarray
    trf: np.ndarray
    rrf: np.ndarray
    adc: np.ndarray
    ns: np.ndarray

    def __add__(self, other: "_BatchSums") -> "_BatchSums":
        return _BatchSums(
            trials=self.trials + other.trials,
            z_sum=self.z_sum + other.z_sum, z_abs2=self.z_abs2 + other.z_abs2,
            ca=self.ca + other.ca, iui=self.iui + other.iui,
            dac=self.dac + other.dac, trf=self.trf + other.trf,
            rrf=self.rrf + other.rrf, adc=self.adc + other.adc,
            ns=self.ns + other.ns)


def _run_batch(scn: Scenario, profile: HardwareProfile, moments: EstimateMoments,
               weights: np.ndarray, instants: np.ndarray, seed: int,
               batch_idx: int, n_trials: int) -> _BatchSums:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, batch_idx])))
    M, K, N = scn.cfg.M, scn.cfg.K, scn.cfg.N
    T = n_trials
    Nn = len(instants)
    lam = scn.lam

    a_mn = profile.adc_a                     # (M, N)
    b_mn = profile.adc_b
    kr2 = profile.kappa_r[:, None] ** 2      # (M, 1)
    alpha = profile.alpha_d
    kt2 = profile.kappa_t ** 2
    pt, pd = scn.pilot_p_mw, scn.data_p_mw
    sig2 = scn.sigma2_mw
    eff_pilot = (1.0 + kt2) * alpha * pt
    eff_data = (1.0 + kt2) * alpha * pd
    sqrt_r = psd_sqrt(scn.R)                 # (M, K, N, N)

    h_lam = draw_phase_rician(scn.hbar, sqrt_r, rng, size=T)   # (T, M, K, N)

    # pilot phase: one impaired observation per occupied pilot instant.
    # hhat_cond holds the conditional mean of the estimate given the
    # estimation-instant channels (pilot noises and innovations averaged
    # out), used only for the low-variance desired-signal mean.
    hhat = np.zeros((T, M, K, N), dtype=complex)
    hhat_cond = np.zeros((T, M, K, N), dtype=complex)
    for t in sorted(set(int(x) for x in scn.plan.pilot_instant)):
        members = [k for k in range(K) if scn.plan.pilot_instant[k] == t]
        rho_p = np.array([scn.rho(k, lam - t) for k in members])
        rho_pb = np.sqrt(np.clip(1.0 - rho_p ** 2, 0.0, None))
        innov = draw_phase_rician(scn.hbar[:, members], sqrt_r[:, members], rng, size=T)
        v = rho_p[None, None, :, None] * h_lam[:, :, members] \
            + rho_pb[None, None, :, None] * innov
        nu = _cn(rng, (profile.dac_rho * alpha * pt)[members], (T, len(members)))
        xi = _cn(rng, (kt2 * alpha * pt)[members], (T, len(members)))
        s = (alpha * np.sqrt(pt))[members][None, :] + nu + xi       # (T, J)
        signal = np.einsum("tj,tmjn->tmn", s, v)
        w_cond = np.einsum("j,tmjn->tmn", eff_pilot[members], np.abs(v) ** 2)
        eta = _cn(rng, kr2[None] * w_cond, (T, M, N))
        z = _cn(rng, sig2, (T, M, N))
        q = _cn(rng, b_mn[None] * ((1.0 + kr2[None]) * w_cond + sig2), (T, M, N))
        y_t = a_mn[None] * (signal + eta + z) + q
        y_cond = a_mn[None] * np.einsum(
            "j,tmjn->tmn", (alpha * np.sqrt(pt))[members] * rho_p,
            h_lam[:, :, members])
        for k in members:
            hhat[:, :, k] = np.einsum("mab,tmb->tma", moments.pmap[:, k], y_t)
            hhat_cond[:, :, k] = np.einsum("mab,tmb->tma", moments.pmap[:, k],
                                           y_cond)

    g_lam = np.einsum("tmka,ma,tmka->tmk", hhat.conj(), a_mn, h_lam)
    g_lam_cond = np.einsum("tmka,ma,tmka->tmk", hhat_cond.conj(), a_mn, h_lam)

    z_sum = np.zeros((K, Nn), dtype=complex)
    z_abs2 = np.zeros((K, Nn))
    ca_s = np.zeros((K, Nn))
    iui_s = np.zeros((K, K, Nn))
    dac_s = np.zeros((K, Nn))
    trf_s = np.zeros((K, Nn))
    rrf_s = np.zeros((K, Nn))
    adc_s = np.zeros((K, Nn))
    ns_s = np.zeros((K, Nn))

    amp = alpha * np.sqrt(pd)                # (K,)
    for j, n in enumerate(instants):
        d_off = int(n) - lam
        ri = np.array([scn.rho(k, d_off) for k in range(K)])
        rib = np.sqrt(np.clip(1.0 - ri ** 2, 0.0, None))
        u = draw_phase_rician(scn.hbar, sqrt_r, rng, size=T)
        d = ri[None, None, :, None] * h_lam + rib[None, None, :, None] * u
        nu = _cn(rng, profile.dac_rho * alpha * pd, (T, K))
        xi = _cn(rng, kt2 * alpha * pd, (T, K))
        w_cond = np.einsum("k,tmkn->tmn", eff_data, np.abs(d) ** 2)
        eta = _cn(rng, kr2[None] * w_cond, (T, M, N))
        z = _cn(rng, sig2, (T, M, N))
        q = _cn(rng, b_mn[None] * ((1.0 + kr2[None]) * w_cond + sig2), (T, M, N))

        g_all = np.einsum("tmka,ma,tmia->tmki", hhat.conj(), a_mn, d)
        cu = np.einsum("tmka,ma,tmka->tmk", hhat.conj(), a_mn, u)
        rr = np.einsum("tmka,ma,tma->tmk", hhat.conj(), a_mn, eta)
        nz = np.einsum("tmka,ma,tma->tmk", hhat.conj(), a_mn, z)
        qq = np.einsum("tmka,tma->tmk", hhat.conj(), q)

        w_n = weights[:, j, :]               # (K, M)
        wc = np.conj(w_n)
        ga = np.einsum("km,tmki->tki", wc, g_all)

        z_stat = amp[None, :] * ri[None, :] * np.einsum("km,tmk->tk", wc, g_lam)
        z_cond = amp[None, :] * ri[None, :] * np.einsum("km,tmk->tk", wc,
                                                        g_lam_cond)
        z_sum[:, j] = z_cond.sum(axis=0)
        z_abs2[:, j] = (np.abs(z_stat) ** 2).sum(axis=0)
        ca_stat = amp[None, :] * rib[None, :] * np.einsum("km,tmk->tk", wc, cu)
        ca_s[:, j] = (np.abs(ca_stat) ** 2).sum(axis=0)
        iui_s[:, :, j] = ((amp[None, None, :] * np.abs(ga)) ** 2).sum(axis=0)
        dac_s[:, j] = (np.abs(np.einsum("tki,ti->tk", ga, nu)) ** 2).sum(axis=0)
        trf_s[:, j] = (np.abs(np.einsum("tki,ti->tk", ga, xi)) ** 2).sum(axis=0)
        rrf_s[:, j] = (np.abs(np.einsum("km,tmk->tk", wc, rr)) ** 2).sum(axis=0)
        adc_s[:, j] = (np.abs(np.einsum("km,tmk->tk", wc, qq)) ** 2).sum(axis=0)
        ns_s[:, j] = (np.abs(np.einsum("km,tmk->tk", wc, nz)) ** 2).sum(axis=0)

    return _BatchSums(trials=T, z_sum=z_sum, z_abs2=z_abs2, ca=ca_s, iui=iui_s,
                      dac=dac_s, trf=trf_s, rrf=rrf_s, adc=adc_s, ns=ns_s)


def _run_batch_args(args) -> _BatchSums:
    return _run_batch(*args)


def mc_term_powers(scn: Scenario, profile: HardwareProfile, moments: EstimateMoments,
                   weights: np.ndarray, instants=None, trials: int = 20000,
                   seed: int = 0, batch: int = 1000, workers: int = 1) -> TermPowers:
    """Sample decomposition powers over `trials` channel realizations.

    weights: (K, n_count, M) central combining weights per UE and instant,
    aligned with `instants` (defaults to every data instant of the
    scenario). The DAC noise of the served UE's own symbol is folded into
    the DAC statistic; its interferer entry iui[k, k] is excluded from
    iui_total.
    """
    if instants is None:
        instants = scn.data_instants
    instants = np.asarray(instants, dtype=int)
    weights = np.asarray(weights, dtype=complex)
    K, M = scn.cfg.K, scn.cfg.M
    if weights.shape != (K, len(instants), M):
        raise ValueError(f"weights: expected shape {(K, len(instants), M)}, "
                         f"got {weights.shape}")
    if trials < 2:
        raise ValueError("trials: need at least 2 for variance estimates")

    sizes = [batch] * (trials // batch)
    if trials % batch:
        sizes.append(trials % batch)
    arg_list = [(scn, profile, moments, weights, instants, seed, b, sz)
                for b, sz in enumerate(sizes)]

    if workers <= 1 or len(arg_list) == 1:
        parts = [_run_batch_args(a) for a in arg_list]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_batch_args, arg_list))

    total = parts[0]
    for p in parts[1:]:
        total = total + p

    T = total.trials
    ds = np.abs(total.z_sum / T) ** 2
    bu = total.z_abs2 / T - ds
    return TermPowers(trials=T, instants=instants, ds=ds, bu=np.maximum(bu, 0.0),
                      ca=total.ca / T, iui=total.iui / T, dac=total.dac / T,
                      trf=total.trf / T, rrf=total.rrf / T, adc=total.adc / T,
                      ns=total.ns / T)


def mc_sinr(powers: TermPowers) -> np.ndarray:
    """(K, n_count) effective SINR from sampled powers."""
    den = powers.denominator()
    if np.any(den <= 0):
        raise NumericalError("sampled disturbance power is non-positive; "
                             "increase the trial count")
    return powers.ds / den


def mc_se(powers: TermPowers, tau_c: int) -> np.ndarray:
    """(K,) spectral efficiency from sampled powers."""
    return np.log2(1.0 + mc_sinr(powers)).sum(axis=1) / tau_c
