"""Deterministic effective-SINR evaluation from long-term statistics.

The uplink estimate of UE k at data instant n, after local combining with
the channel estimate and central weighting across APs, decomposes into a
deterministic desired part plus seven zero-mean, mutually uncorrelated
disturbance statistics: beamforming-gain uncertainty, channel aging,
inter-UE interference, transmit-side DAC and RF distortion, receive RF
distortion, ADC quantization, and thermal noise. Each disturbance power is
a quadratic form w^H X w in the central combining weights, where X is an
M x M matrix (diagonal for the terms that are independent across APs)
assembled from a small set of per-link trace tables. Everything here is
computed in closed form; no channel realizations are drawn.

The trace tables couple co-pilot UEs through the shared pilot observation:
a fourth-moment correction for the quadratic statistic of a phase-rotated
LoS-plus-Gaussian vector, a diagonal correction from channel-conditioned
receive noise, and rank-one cross-AP terms from the scalar transmit noises
that all APs hear identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import NumericalError
from .config import ConfigError
from .estimation import EstimateMoments, est_second_moments, noise_shaping_diag
from .hardware import HardwareProfile
from .scenario import Scenario

TERM_KEYS = ("DS", "BU", "CA", "IUI", "DACTRF", "RRF", "ADC", "NS")


@dataclass(frozen=True)
class TraceTables:
    """Per-link scalar statistics feeding the disturbance quadratic forms.

    Index order is (m, k, i): AP, served UE, interfering UE. The (m, k)
    tables describe the estimate of UE k at AP m alone.
    """

    t1: np.ndarray       # (M, K, K) tr(A Rbar_i A GammaBar_k), Gaussian base
    t2: np.ndarray       # (M, K, K) tr(A P_k^H A Rbar_i), cross-AP rank-one factor
    excess: np.ndarray   # (M, K, K) fourth-moment excess of the co-pilot coupling
    w1: np.ndarray       # (M, K, K) conditional-noise coupling, linear in Psi
    r1_rrf: np.ndarray   # (M, K, K) receive-EVM noise through the estimate covariance
    r1_adc: np.ndarray   # (M, K, K) quantization noise through the estimate covariance
    r2_rrf: np.ndarray   # (M, K, K) co-pilot correction of the receive-EVM power
    r2_adc: np.ndarray   # (M, K, K) co-pilot correction of the quantization power
    g2: np.ndarray       # (M, K) tr(A GammaBar_k), desired-signal gain
    q2: np.ndarray       # (M, K) tr(A^2 GammaBar_k), thermal noise through the ADC gain
    b2: np.ndarray       # (M, K) tr(B GammaBar_k), thermal noise re-quantized


@dataclass(frozen=True)
class ClosedFormTerms:
    """Disturbance matrices of one (UE, instant) pair.

    The SINR with weights w is  ds_coef |w^H delta|^2  over
    w^H (bu + iui + dactrf) w + sum(|w|^2 (ca + rrf + adc + ns)).
    """

    delta: np.ndarray    # (M,) real: per-AP mean combined gain
    ds_coef: float       # alpha_dk^2 p_k
    bu: np.ndarray       # (M, M)
    ca: np.ndarray       # (M,) diagonal only
    iui: np.ndarray      # (M, M)
    dactrf: np.ndarray   # (M, M)
    rrf: np.ndarray      # (M,)
    adc: np.ndarray      # (M,)
    ns: np.ndarray       # (M,)

    @property
    def denom(self) -> np.ndarray:
        """Full M x M denominator matrix (all disturbance terms)."""
        return self.bu + self.iui + self.dactrf + np.diag(self.ca + self.rrf
                                                          + self.adc + self.ns)


def precompute_tables(scn: Scenario, profile: HardwareProfile,
                      moments: EstimateMoments) -> TraceTables:
    M, K = scn.beta.shape
    t1 = np.zeros((M, K, K))
    t2 = np.zeros((M, K, K), dtype=complex)
    excess = np.zeros((M, K, K))
    w1 = np.zeros((M, K, K))
    r1_rrf = np.zeros((M, K, K))
    r1_adc = np.zeros((M, K, K))
    r2_rrf = np.zeros((M, K, K))
    r2_adc = np.zeros((M, K, K))
    g2 = np.zeros((M, K))
    q2 = np.zeros((M, K))
    b2 = np.zeros((M, K))

    for m in range(M):
        a = profile.adc_a[m]
        b = a * (1.0 - a)
        kr = float(profile.kappa_r[m])
        nb = noise_shaping_diag(a, kr)
        w_rrf = kr ** 2 * a ** 2
        w_adc = (1.0 + kr ** 2) * b
        Rb = scn.Rbar[m]                      # (K, N, N)
        Rn = scn.R[m]                         # (K, N, N)
        hb = scn.hbar[m]                      # (K, N)
        hb2 = np.abs(hb) ** 2                 # (K, N)
        rb_diag = np.einsum("iaa->ia", Rb).real
        # |Rbar_i[a,b]|^2 - |hbar_i[a]|^2 |hbar_i[b]|^2, the pure-NLoS part
        d2 = np.abs(Rb) ** 2 - hb2[:, :, None] * hb2[:, None, :]

        for k in range(K):
            P = moments.pmap[m, k]
            G = moments.gamma_bar[m, k]
            gd = np.einsum("aa->a", G).real
            theta = a[:, None] * P.conj().T * a[None, :]
            phi = P.conj().T * a[None, :]
            pa = P * a[None, :]

            t1[m, k] = np.einsum("a,iab,b,ba->i", a, Rb, a, G).real
            t2[m, k] = np.einsum("ab,iba->i", theta, Rb)
            tr_tr = np.einsum("ab,iba->i", theta, Rn)          # tr(Theta R_i)
            hth = np.einsum("ia,ab,ib->i", hb.conj(), theta, hb)
            excess[m, k] = (tr_tr * np.conj(t2[m, k]) + hth * np.conj(tr_tr)).real

            phi_rb = np.einsum("ab,iba->ia", phi, Rb)          # diag(Phi Rbar_i)
            phi_hb = np.einsum("ab,ib->ia", phi, hb)
            w1[m, k] = np.einsum("a,ia->i", nb,
                                 np.abs(phi_rb) ** 2 - np.abs(phi_hb) ** 2 * hb2)

            r1_rrf[m, k] = np.einsum("a,a,ia->i", w_rrf, gd, rb_diag)
            r1_adc[m, k] = np.einsum("a,a,ia->i", w_adc, gd, rb_diag)

            pa_rb = np.einsum("ab,iba->ia", pa, Rb)            # diag(P A Rbar_i)
            pa_hb = np.einsum("ab,ib->ia", pa, hb)
            d4 = np.abs(pa_rb) ** 2 - np.abs(pa_hb) ** 2 * hb2
            inner = np.einsum("b,ab,iab->ia", nb, np.abs(P) ** 2, d2)
            r2_rrf[m, k] = np.einsum("a,ia->i", w_rrf, d4 + inner)
            r2_adc[m, k] = np.einsum("a,ia->i", w_adc, d4 + inner)

            g2[m, k] = float(a @ gd)
            q2[m, k] = float((a * a) @ gd)
            b2[m, k] = float(b @ gd)

    return TraceTables(t1=t1, t2=t2, excess=excess, w1=w1, r1_rrf=r1_rrf,
                       r1_adc=r1_adc, r2_rrf=r2_rrf, r2_adc=r2_adc,
                       g2=g2, q2=q2, b2=b2)


class ClosedFormEngine:
    """Assembles the disturbance quadratic forms from the trace tables."""

    def __init__(self, scn: Scenario, profile: HardwareProfile,
                 moments: EstimateMoments | None = None):
        self.scn = scn
        self.profile = profile
        self.moments = moments if moments is not None else est_second_moments(scn, profile)
        self.tables = precompute_tables(scn, profile, self.moments)
        K = scn.cfg.K
        alpha = profile.alpha_d
        kt2 = profile.kappa_t ** 2
        self.rho_p = self.moments.rho_pilot
        self.eff_pilot = (1.0 + kt2) * alpha * scn.pilot_p_mw       # (K,)
        self.eff_data = (1.0 + kt2) * alpha * scn.data_p_mw
        self.w_iui = alpha ** 2 * scn.data_p_mw
        self.w_txn_data = (profile.dac_rho + kt2) * alpha * scn.data_p_mw
        self.w_txn_pilot = (profile.dac_rho + kt2) * alpha * scn.pilot_p_mw
        self.ecoef = self.eff_pilot * self.rho_p ** 2
        self.coh_mask = np.zeros((K, K))
        for k in range(K):
            for i in scn.plan.cohort_of(k):
                self.coh_mask[k, i] = 1.0

    def _rho_data(self, n: int) -> np.ndarray:
        d = int(n) - self.scn.lam
        if d < 0:
            raise ConfigError(f"data instant {n} precedes the estimation instant")
        return np.array([self.scn.rho(i, d) for i in range(self.scn.cfg.K)])

    def terms(self, k: int, n: int) -> ClosedFormTerms:
        scn, tb = self.scn, self.tables
        ri = self._rho_data(n)
        rk = float(ri[k])
        coh = self.coh_mask[k]
        # per-interferer coupling coefficient of the co-pilot corrections
        ccoef = coh * self.ecoef * ri ** 2                           # (K,)

        c_diag = tb.t1[:, k, :] + ccoef[None, :] * (tb.excess[:, k, :] + tb.w1[:, k, :])
        t2k = tb.t2[:, k, :]                                         # (M, K)

        def coupled(weights: np.ndarray) -> np.ndarray:
            """w^H X w matrix for sum_i weights_i C_i (diag + rank-one off-diag)."""
            mat = (t2k * (weights * ccoef)[None, :]) @ t2k.conj().T
            np.fill_diagonal(mat, c_diag @ weights)
            return mat

        wi = self.w_iui.copy()
        wi[k] = 0.0
        iui = coupled(wi)
        dactrf = coupled(self.w_txn_data)

        ds_coef = float(self.profile.alpha_d[k] ** 2 * scn.data_p_mw[k])
        # the uncertainty statistic involves the estimation-instant channel
        # itself, so its pilot-coupling correction carries no data-lag factor
        bu_diag = ds_coef * rk ** 2 * (
            tb.t1[:, k, k] + self.ecoef[k] * (tb.excess[:, k, k] + tb.w1[:, k, k])
            - tb.g2[:, k] ** 2)
        bu = (ds_coef * rk ** 2 * self.w_txn_pilot[k] * self.rho_p[k] ** 2
              * np.outer(t2k[:, k], t2k[:, k].conj()))
        np.fill_diagonal(bu, bu_diag)

        ca = ds_coef * (1.0 - rk ** 2) * tb.t1[:, k, k]
        rrf = (tb.r1_rrf[:, k, :] + ccoef[None, :] * tb.r2_rrf[:, k, :]) @ self.eff_data
        adc = ((tb.r1_adc[:, k, :] + ccoef[None, :] * tb.r2_adc[:, k, :]) @ self.eff_data
               + scn.sigma2_mw * tb.b2[:, k])
        ns = scn.sigma2_mw * tb.q2[:, k]

        return ClosedFormTerms(delta=rk * tb.g2[:, k], ds_coef=ds_coef,
                               bu=bu, ca=ca, iui=iui, dactrf=dactrf,
                               rrf=rrf, adc=adc, ns=ns)

    def optimal_weights(self, k: int, n: int,
                        terms: ClosedFormTerms | None = None) -> np.ndarray:
        t = terms if terms is not None else self.terms(k, n)
        return optimal_weights(t.denom, t.delta)

    def term_powers(self, k: int, n: int, weights: np.ndarray,
                    terms: ClosedFormTerms | None = None) -> dict:
        t = terms if terms is not None else self.terms(k, n)
        w = np.asarray(weights, dtype=complex)
        aw2 = np.abs(w) ** 2

        def qf(X: np.ndarray) -> float:
            return float(np.real(w.conj() @ X @ w))

        return {
            "DS": t.ds_coef * float(np.abs(w.conj() @ t.delta) ** 2),
            "BU": qf(t.bu),
            "CA": float(aw2 @ t.ca),
            "IUI": qf(t.iui),
            "DACTRF": qf(t.dactrf),
            "RRF": float(aw2 @ t.rrf),
            "ADC": float(aw2 @ t.adc),
            "NS": float(aw2 @ t.ns),
        }

    def sinr(self, k: int, n: int, weights: np.ndarray | None = None) -> float:
        t = self.terms(k, n)
        if weights is None:
            weights = optimal_weights(t.denom, t.delta)
        p = self.term_powers(k, n, weights, terms=t)
        denom = sum(p[key] for key in TERM_KEYS if key != "DS")
        if denom <= 0:
            raise NumericalError(f"non-positive disturbance power for UE {k} at n={n}")
        return p["DS"] / denom

    def se_table(self, scheme="lsfd"):
        """SINR and weights over every data instant.

        scheme: 'lsfd' (per-instant optimal central weights), 'sld' (uniform
        1/M), or a (K, n_count, M) array of explicit weights. Returns
        (sinr (K, n_count), weights (K, n_count, M)).
        """
        scn = self.scn
        K, M = scn.cfg.K, scn.cfg.M
        instants = scn.data_instants
        sinr = np.zeros((K, len(instants)))
        wout = np.zeros((K, len(instants), M), dtype=complex)
        for j, n in enumerate(instants):
            for k in range(K):
                t = self.terms(k, int(n))
                if isinstance(scheme, str):
                    if scheme == "lsfd":
                        w = optimal_weights(t.denom, t.delta)
                    elif scheme == "sld":
                        w = np.full(M, 1.0 / M, dtype=complex)
                    else:
                        raise ConfigError(f"weight scheme: unknown scheme {scheme!r}")
                else:
                    w = np.asarray(scheme)[k, j]
                p = self.term_powers(k, int(n), w, terms=t)
                sinr[k, j] = p["DS"] / sum(p[key] for key in TERM_KEYS if key != "DS")
                wout[k, j] = w
        return sinr, wout


def optimal_weights(denom: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """SINR-maximizing central weights, unit-norm: solve denom w = delta."""
    try:
        w = np.linalg.solve(denom, delta.astype(complex))
    except np.linalg.LinAlgError as exc:
        raise NumericalError("disturbance matrix is singular; cannot form "
                             "optimal central weights") from exc
    nrm = np.linalg.norm(w)
    if nrm == 0 or not np.isfinite(nrm):
        raise NumericalError("optimal central weights are degenerate")
    return w / nrm


def closed_form_se(scn: Scenario, profile: HardwareProfile,
                   moments: EstimateMoments | None = None, scheme="lsfd"):
    """Per-UE spectral efficiency averaged over the data interval.

    Returns (se (K,), sinr (K, n_count), weights (K, n_count, M)); se_k is
    (1/tau_c) sum_n log2(1 + SINR_kn).
    """
    eng = ClosedFormEngine(scn, profile, moments)
    sinr, weights = eng.se_table(scheme)
    se = np.log2(1.0 + sinr).sum(axis=1) / scn.cfg.tau_c
    return se, sinr, weights


def rayleigh_reference_sinr(scn: Scenario, n: int | None = None,
                   weights: np.ndarray | None = None) -> np.ndarray:
    """Reference SINR for the ideal-hardware, uncorrelated-Rayleigh special case.

    Written directly from the simplified per-AP effective gains
    gamma_mk = ptilde_k rho_k^2 beta_mk^2 / (sum_{j in cohort} ptilde_j
    beta_mj + sigma^2), with pilot contamination only from other cohort
    members. Serves as an independent cross-check of the general engine and
    is only valid when the scenario is uncorrelated Rayleigh. n=None means
    no aging (rho = 1 everywhere); weights default to uniform 1/M.
    """
    if not scn.cfg.iid_rayleigh:
        raise ConfigError("rayleigh_reference_sinr: scenario must be uncorrelated Rayleigh")
    M, K, N = scn.cfg.M, scn.cfg.K, scn.cfg.N
    beta = scn.beta
    pt = scn.pilot_p_mw
    pd = scn.data_p_mw
    rho_p = scn.rho_pilot()
    if n is None:
        ri = np.ones(K)
    else:
        d = int(n) - scn.lam
        ri = np.array([scn.rho(i, d) for i in range(K)])

    gamma = np.zeros((M, K))
    for k in range(K):
        coh = sorted(scn.plan.cohort_of(k))
        psi = beta[:, coh] @ pt[coh] + scn.sigma2_mw
        gamma[:, k] = pt[k] * rho_p[k] ** 2 * beta[:, k] ** 2 / psi

    if weights is None:
        w = np.full((K, M), 1.0 / M, dtype=complex)
    else:
        w = np.asarray(weights, dtype=complex).reshape(K, M)

    sinr = np.zeros(K)
    for k in range(K):
        aw2 = np.abs(w[k]) ** 2
        num = pd[k] * ri[k] ** 2 * np.abs(w[k].conj() @ (N * gamma[:, k])) ** 2
        den = float(aw2 @ (N * gamma[:, k] * (beta @ pd)))
        den += scn.sigma2_mw * float(aw2 @ (N * gamma[:, k]))
        for i in sorted(scn.plan.cohort_of(k)):
            if i == k:
                continue
            den += (N ** 2 * pd[i] * ri[i] ** 2
                    * np.abs(w[k].conj() @ np.sqrt(gamma[:, k] * gamma[:, i])) ** 2)
        sinr[k] = num / den
    return sinr
