"""Network geometry, long-term channel statistics, and temporal correlation.

A Scenario bundles everything that stays fixed over a resource block:
AP/UE placement, per-link Rician statistics, the pilot schedule, and the
Jakes temporal-correlation profile of every UE. It is immutable after
construction and safe to share across concurrent trial workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz
from scipy.special import j0

from .config import ConfigError, ScenarioConfig

SPEED_OF_LIGHT = 299_792_458.0


class DomainError(ValueError):
    """An operation was called outside its domain (e.g. non-positive distance)."""


@dataclass(frozen=True)
class LinkStats:
    """Long-term statistics of one AP-UE link."""

    beta: float                 # linear large-scale gain
    rician_k: float             # linear Rician factor
    aoa_rad: float              # angle of arrival
    hbar: np.ndarray            # (N,) LoS component
    R: np.ndarray               # (N, N) NLoS correlation, Hermitian PSD
    Rbar: np.ndarray            # (N, N) total correlation hbar hbar^H + R


@dataclass(frozen=True)
class PilotPlan:
    """Round-robin pilot schedule: instant per UE and co-pilot cohorts."""

    pilot_instant: np.ndarray   # (K,) ints in 1..tau_p
    cohorts: tuple              # per-UE frozenset of UEs sharing its instant

    def cohort_of(self, k: int) -> frozenset:
        return self.cohorts[k]


@dataclass(frozen=True)
class Scenario:
    cfg: ScenarioConfig
    ap_pos: np.ndarray          # (M, 2)
    ue_pos: np.ndarray          # (K, 2)
    distances: np.ndarray       # (M, K)
    beta: np.ndarray            # (M, K)
    rician_k: np.ndarray        # (M, K)
    aoa: np.ndarray             # (M, K)
    hbar: np.ndarray            # (M, K, N) complex
    R: np.ndarray               # (M, K, N, N) complex Hermitian PSD
    Rbar: np.ndarray            # (M, K, N, N)
    plan: PilotPlan
    pilot_p_mw: np.ndarray      # (K,)
    data_p_mw: np.ndarray       # (K,)
    sigma2_mw: float
    doppler_hz: np.ndarray      # (K,)

    @property
    def lam(self) -> int:
        """Estimation instant (one past the training interval)."""
        return self.cfg.tau_p + 1

    @property
    def data_instants(self) -> np.ndarray:
        return np.arange(self.lam, self.cfg.tau_c + 1)

    def link(self, m: int, k: int) -> LinkStats:
        return LinkStats(
            beta=float(self.beta[m, k]),
            rician_k=float(self.rician_k[m, k]),
            aoa_rad=float(self.aoa[m, k]),
            hbar=self.hbar[m, k],
            R=self.R[m, k],
            Rbar=self.Rbar[m, k],
        )

    def rho(self, k: int, n_offset) -> np.ndarray | float:
        """Temporal correlation of UE k at a sample offset (Jakes)."""
        rho, _ = temporal_rho_fd(self.doppler_hz[k], self.cfg.sample_period_s, n_offset)
        return rho

    def rho_pilot(self) -> np.ndarray:
        """(K,) correlation between each UE's pilot instant and the estimation instant."""
        lags = self.lam - self.plan.pilot_instant
        return np.array([self.rho(k, int(lags[k])) for k in range(self.cfg.K)])


def steering_vector(psi: float, n_antennas: int) -> np.ndarray:
    """Unit-modulus ULA response [1, e^{j psi}, ..., e^{j (N-1) psi}]."""
    if n_antennas < 1:
        raise DomainError("n_antennas must be >= 1")
    return np.exp(1j * psi * np.arange(n_antennas))


def aoa_to_phase(aoa_rad: float, spacing_wl: float = 0.5) -> float:
    """Per-antenna phase increment of a plane wave from the given angle."""
    return 2.0 * np.pi * spacing_wl * np.sin(aoa_rad)


def local_scattering(aoa_rad: float, asd_deg: float, n_antennas: int,
                     spacing_wl: float = 0.5, n_quad: int = 200) -> np.ndarray:
    """Local-scattering spatial correlation with Gaussian angular spread.

    Entry (p, q) is the average of exp(j 2 pi spacing (p-q) sin(aoa + delta))
    over delta ~ N(0, asd^2), computed by Gauss-Hermite quadrature. The
    result is Hermitian Toeplitz with unit diagonal; eigenvalues are clipped
    at zero to enforce PSD against quadrature round-off.
    """
    if asd_deg <= 0:
        raise DomainError("asd_deg must be positive")
    if n_antennas < 1:
        raise DomainError("n_antennas must be >= 1")
    asd = np.deg2rad(asd_deg)
    # Gauss-Hermite nodes for weight exp(-x^2): delta = sqrt(2) asd x
    nodes, weights = np.polynomial.hermite.hermgauss(n_quad)
    delta = np.sqrt(2.0) * asd * nodes
    w = weights / np.sqrt(np.pi)
    phases = 2.0 * np.pi * spacing_wl * np.sin(aoa_rad + delta)  # (Q,)
    ant = np.arange(n_antennas)
    first_row = (np.exp(1j * np.outer(ant, phases)) * w).sum(axis=1)  # E{e^{j n phase}}
    R = toeplitz(first_row, first_row.conj())
    R = 0.5 * (R + R.conj().T)
    # clip tiny negative eigenvalues from quadrature error
    evals, evecs = np.linalg.eigh(R)
    if evals.min() < -1e-10 * max(np.trace(R).real, 1.0):
        raise RuntimeError("local_scattering produced a non-PSD matrix beyond tolerance")
    evals = np.clip(evals, 0.0, None)
    R = (evecs * evals) @ evecs.conj().T
    return 0.5 * (R + R.conj().T)


def pathloss_db(d_m: float) -> float:
    """Large-scale gain in dB for a 3GPP-style urban model."""
    return -30.5 - 36.7 * np.log10(d_m)


def rician_factor(d_m: float) -> float:
    """Distance-dependent linear Rician factor 10^{1.3 - 0.003 d}."""
    return 10.0 ** (1.3 - 0.003 * d_m)


def link_stats(d_m: float, aoa_rad: float, cfg: ScenarioConfig) -> LinkStats:
    """Long-term statistics of a single link at distance d_m."""
    if d_m <= 0:
        raise DomainError(f"distance must be positive, got {d_m}")
    beta = 10.0 ** (pathloss_db(d_m) / 10.0)
    if cfg.iid_rayleigh:
        kf = 0.0
        R = beta * np.eye(cfg.N, dtype=complex)
        hbar = np.zeros(cfg.N, dtype=complex)
    else:
        kf = rician_factor(d_m)
        hbar = np.sqrt(kf * beta / (kf + 1.0)) * steering_vector(
            aoa_to_phase(aoa_rad, cfg.antenna_spacing_wl), cfg.N)
        R = (beta / (kf + 1.0)) * local_scattering(
            aoa_rad, cfg.asd_deg, cfg.N, cfg.antenna_spacing_wl)
    Rbar = np.outer(hbar, hbar.conj()) + R
    return LinkStats(beta=beta, rician_k=kf, aoa_rad=aoa_rad, hbar=hbar, R=R,
                     Rbar=0.5 * (Rbar + Rbar.conj().T))


def assign_pilots(n_ues: int, tau_p: int) -> PilotPlan:
    """Deterministic round-robin pilot assignment: t_k = 1 + (k mod tau_p)."""
    if not (1 <= tau_p < n_ues):
        raise ConfigError(f"tau_p: need 1 <= tau_p < K, got tau_p={tau_p}, K={n_ues}")
    instants = 1 + (np.arange(n_ues) % tau_p)
    cohorts = tuple(
        frozenset(int(i) for i in np.flatnonzero(instants == instants[k]))
        for k in range(n_ues)
    )
    return PilotPlan(pilot_instant=instants, cohorts=cohorts)


def temporal_rho_fd(doppler_hz: float, sample_period_s: float, n_offset):
    """Jakes correlation rho = J0(2 pi f_d T_s n) and rho_bar = sqrt(1 - rho^2)."""
    n = np.asarray(n_offset, dtype=float)
    if np.any(n < 0):
        raise DomainError("sample offset must be >= 0")
    rho = j0(2.0 * np.pi * doppler_hz * sample_period_s * n)
    rho_bar = np.sqrt(np.clip(1.0 - rho * rho, 0.0, None))
    if np.isscalar(n_offset) or np.ndim(n_offset) == 0:
        return float(rho), float(rho_bar)
    return rho, rho_bar


def temporal_rho(v_kmh: float, carrier_hz: float, sample_period_s: float, n_offset):
    """Same as temporal_rho_fd but parameterized by UE velocity in km/h."""
    fd = (v_kmh / 3.6) * carrier_hz / SPEED_OF_LIGHT
    return temporal_rho_fd(fd, sample_period_s, n_offset)


def build_scenario(cfg: ScenarioConfig) -> Scenario:
    """Draw geometry from the master seed and populate all link statistics.

    Deterministic for a fixed config: the same seed yields bit-identical
    scenarios.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed, 0])))
    ap_pos = rng.uniform(0.0, cfg.area_side_m, size=(cfg.M, 2))
    ue_pos = rng.uniform(0.0, cfg.area_side_m, size=(cfg.K, 2))
    diff = ap_pos[:, None, :] - ue_pos[None, :, :]
    distances = np.maximum(np.hypot(diff[..., 0], diff[..., 1]), cfg.min_dist_m)
    aoa = np.arctan2(-diff[..., 1], -diff[..., 0])  # AP-to-UE bearing

    M, K, N = cfg.M, cfg.K, cfg.N
    beta = np.zeros((M, K))
    kfac = np.zeros((M, K))
    hbar = np.zeros((M, K, N), dtype=complex)
    R = np.zeros((M, K, N, N), dtype=complex)
    Rbar = np.zeros((M, K, N, N), dtype=complex)
    for m in range(M):
        for k in range(K):
            st = link_stats(float(distances[m, k]), float(aoa[m, k]), cfg)
            beta[m, k] = st.beta
            kfac[m, k] = st.rician_k
            hbar[m, k] = st.hbar
            R[m, k] = st.R
            Rbar[m, k] = st.Rbar

    plan = assign_pilots(K, cfg.tau_p)
    velocities = np.asarray(cfg.velocities_kmh())
    doppler = (velocities / 3.6) * cfg.carrier_hz / SPEED_OF_LIGHT
    return Scenario(
        cfg=cfg, ap_pos=ap_pos, ue_pos=ue_pos, distances=distances,
        beta=beta, rician_k=kfac, aoa=aoa, hbar=hbar, R=R, Rbar=Rbar,
        plan=plan,
        pilot_p_mw=np.asarray(cfg.pilot_powers_mw()),
        data_p_mw=np.asarray(cfg.data_powers_mw()),
        sigma2_mw=cfg.noise_mw,
        doppler_hz=doppler,
    )
