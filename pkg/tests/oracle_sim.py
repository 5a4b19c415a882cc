"""Independent straight-line simulation used as a test oracle.

Everything here is written directly from the signal model, on purpose
without reusing the library's Monte Carlo engine, so the two paths can
disagree if either is wrong. Only the estimator map (pmap) is taken from
the library, since that map is itself the object under test elsewhere.
"""

import numpy as np


def _sqrtm(R):
    evals, evecs = np.linalg.eigh(0.5 * (R + R.conj().swapaxes(-1, -2)))
    return (evecs * np.sqrt(np.clip(evals, 0.0, None))[..., None, :]) \
        @ evecs.conj().swapaxes(-1, -2)


def _cn(rng, var, shape):
    std = np.sqrt(np.broadcast_to(np.asarray(var, dtype=float), shape) / 2.0)
    return std * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _rician(rng, hbar, sqrt_r, T):
    shape = (T,) + hbar.shape
    phi = rng.uniform(-np.pi, np.pi, size=shape[:-1])
    g = _cn(rng, 1.0, shape)  # CN(0, I) entries
    nlos = np.einsum("...ab,...b->...a", np.broadcast_to(sqrt_r, shape + shape[-1:]), g)
    return hbar * np.exp(1j * phi)[..., None] + nlos


def pilot_sim(scn, profile, pmap, T, seed):
    """Simulate the pilot phase from scratch; returns (h_lam, h_hat).

    h_lam: (T, M, K, N) channels at the estimation instant.
    h_hat: (T, M, K, N) LMMSE estimates formed by applying pmap to the
    impaired received pilots.
    """
    rng = np.random.default_rng(seed)
    M, K, N = scn.cfg.M, scn.cfg.K, scn.cfg.N
    alpha = profile.alpha_d
    kt2 = profile.kappa_t ** 2
    pt = scn.pilot_p_mw
    sqrt_r = _sqrtm(scn.R)
    a_mn = profile.adc_a
    b_mn = a_mn * (1.0 - a_mn)

    h_lam = _rician(rng, scn.hbar, sqrt_r, T)
    h_hat = np.zeros((T, M, K, N), dtype=complex)
    for t in sorted(set(int(x) for x in scn.plan.pilot_instant)):
        members = [k for k in range(K) if scn.plan.pilot_instant[k] == t]
        # channels realized at the pilot instant, anchored at the estimation instant
        v = np.zeros((T, M, len(members), N), dtype=complex)
        for j, k in enumerate(members):
            rho = scn.rho(k, scn.lam - t)
            fresh = _rician(rng, scn.hbar[:, k], sqrt_r[:, k], T)
            v[:, :, j] = rho * h_lam[:, :, k] + np.sqrt(1.0 - rho ** 2) * fresh
        # per-UE transmit chain on the (unit) pilot symbol
        s = np.zeros((T, len(members)), dtype=complex)
        cond_p = np.zeros(len(members))
        for j, k in enumerate(members):
            nu = _cn(rng, profile.dac_rho[k] * alpha[k] * pt[k], (T,))
            xi = _cn(rng, kt2[k] * alpha[k] * pt[k], (T,))
            s[:, j] = alpha[k] * np.sqrt(pt[k]) + nu + xi
            cond_p[j] = (1.0 + kt2[k]) * alpha[k] * pt[k]
        clean = np.einsum("tj,tmjn->tmn", s, v)
        w_cond = np.einsum("j,tmjn->tmn", cond_p, np.abs(v) ** 2)
        kr2 = profile.kappa_r[:, None] ** 2
        eta = _cn(rng, kr2[None] * w_cond, (T, M, N))
        z = _cn(rng, scn.sigma2_mw, (T, M, N))
        q = _cn(rng, b_mn[None] * ((1.0 + kr2[None]) * w_cond + scn.sigma2_mw),
                (T, M, N))
        y = a_mn[None] * (clean + eta + z) + q
        for k in members:
            h_hat[:, :, k] = np.einsum("mab,tmb->tma", pmap[:, k], y)
    return h_lam, h_hat


def decomposition_sim(scn, profile, pmap, weights_k, k, n, T, seed):
    """Per-trial samples of every decomposition statistic of UE k at instant n.

    weights_k: (M,) central weights. Returns a dict of per-trial complex
    sample arrays keyed like the closed-form term names (DS holds the raw
    desired statistic whose mean gives the DS power and whose spread gives
    BU).
    """
    rng = np.random.default_rng(seed)
    M, K, N = scn.cfg.M, scn.cfg.K, scn.cfg.N
    alpha = profile.alpha_d
    kt2 = profile.kappa_t ** 2
    pd = scn.data_p_mw
    sqrt_r = _sqrtm(scn.R)
    a_mn = profile.adc_a
    b_mn = a_mn * (1.0 - a_mn)

    h_lam, h_hat = pilot_sim(scn, profile, pmap, T, seed)
    # reuse the pilot draws above but a fresh stream for the data instant
    rng = np.random.default_rng((seed, 1))

    d_off = int(n) - scn.lam
    ri = np.array([scn.rho(i, d_off) for i in range(K)])
    rib = np.sqrt(1.0 - ri ** 2)
    u = _rician(rng, scn.hbar, sqrt_r, T)
    d = ri[None, None, :, None] * h_lam + rib[None, None, :, None] * u
    nu = _cn(rng, profile.dac_rho * alpha * pd, (T, K))
    xi = _cn(rng, kt2 * alpha * pd, (T, K))
    cond_p = (1.0 + kt2) * alpha * pd
    w_cond = np.einsum("k,tmkn->tmn", cond_p, np.abs(d) ** 2)
    kr2 = profile.kappa_r[:, None] ** 2
    eta = _cn(rng, kr2[None] * w_cond, (T, M, N))
    z = _cn(rng, scn.sigma2_mw, (T, M, N))
    q = _cn(rng, b_mn[None] * ((1.0 + kr2[None]) * w_cond + scn.sigma2_mw), (T, M, N))

    wc = np.conj(np.asarray(weights_k))
    hk = h_hat[:, :, k]                        # (T, M, N)

    def combine(x_mn):
        """conj(w) . (h_hat_k^H A x) over APs for a per-AP vector signal."""
        return np.einsum("m,tma,ma,tma->t", wc, hk.conj(), a_mn, x_mn)

    out = {}
    out["DS"] = alpha[k] * np.sqrt(pd[k]) * ri[k] * combine(h_lam[:, :, k])
    out["CA"] = alpha[k] * np.sqrt(pd[k]) * rib[k] * combine(u[:, :, k])
    dac = np.zeros(T, dtype=complex)
    trf = np.zeros(T, dtype=complex)
    iui_each = {}
    for i in range(K):
        gi = combine(d[:, :, i])
        if i != k:
            iui_each[i] = alpha[i] * np.sqrt(pd[i]) * gi
        dac += gi * nu[:, i]
        trf += gi * xi[:, i]
    out["IUI_each"] = iui_each
    out["DAC"] = dac
    out["TRF"] = trf
    out["RRF"] = combine(eta)
    out["NS"] = combine(z)
    out["ADC"] = np.einsum("m,tma,tma->t", wc, hk.conj(), q)
    return out
