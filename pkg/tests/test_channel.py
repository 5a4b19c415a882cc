import numpy as np
import pytest

from cfaging import (ChannelBlock, NumericalError, ScenarioConfig, age_channel,
                     draw_initial, draw_phase_rician, dump_block, link_stats,
                     load_block, psd_sqrt)


def _stats():
    cfg = ScenarioConfig(M=4, N=3, K=4, tau_p=2, tau_c=20)
    return link_stats(80.0, 0.5, cfg)


def test_psd_sqrt_identity():
    assert np.allclose(psd_sqrt(np.eye(3)), np.eye(3))


def test_psd_sqrt_diagonal():
    assert np.allclose(psd_sqrt(np.diag([4.0, 1.0])), np.diag([2.0, 1.0]))


def test_psd_sqrt_reconstructs_random_psd():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    R = X @ X.conj().T
    S = psd_sqrt(R)
    assert np.max(np.abs(S @ S.conj().T - R)) <= 1e-10 * np.trace(R).real


def test_psd_sqrt_rank_deficient():
    h = np.array([1.0, 1j])
    R = np.outer(h, h.conj())  # rank one
    S = psd_sqrt(R)
    assert np.allclose(S @ S.conj().T, R, atol=1e-12)


def test_psd_sqrt_rejects_indefinite():
    with pytest.raises(NumericalError):
        psd_sqrt(np.diag([1.0, -0.5]))


def test_phase_rician_moments():
    st = _stats()
    rng = np.random.default_rng(1)
    T = 100_000
    h = draw_phase_rician(st.hbar, psd_sqrt(st.R), rng, size=T)
    # phase averages out: per-entry standard error is sqrt(Rbar_aa / T)
    se_mean = np.sqrt(np.diag(st.Rbar).real / T)
    assert np.all(np.abs(h.mean(axis=0)) <= 3 * se_mean)
    cov = np.einsum("ta,tb->ab", h, h.conj()) / T
    se_cov = 3 * np.sqrt(np.outer(np.diag(st.Rbar).real, np.diag(st.Rbar).real) / T)
    assert np.all(np.abs(cov - st.Rbar) <= 3 * se_cov)


def test_draw_initial_shape():
    st = _stats()
    h = draw_initial(st, np.random.default_rng(0))
    assert h.shape == (3,)


def test_age_zero_lag_returns_same_channel():
    st = _stats()
    rng = np.random.default_rng(2)
    h0 = draw_initial(st, rng)
    assert np.array_equal(age_channel(h0, 1.0, st, rng), h0)


def test_age_full_decorrelation_is_fresh_draw():
    st = _stats()
    rng = np.random.default_rng(3)
    T = 50_000
    h0 = draw_phase_rician(st.hbar, psd_sqrt(st.R), rng, size=T)
    hn = np.stack([age_channel(h0[t], 0.0, st, rng) for t in range(1000)])
    cross = np.einsum("ta,tb->ab", hn, h0[:1000].conj()) / 1000
    scale = np.sqrt(np.outer(np.diag(st.Rbar).real, np.diag(st.Rbar).real))
    assert np.all(np.abs(cross) <= 4 * scale / np.sqrt(1000))


def test_age_cross_covariance_is_rho_rbar():
    # E{h[n] h0^H} = rho Rbar: only the rho h0 term correlates because the
    # LoS phase is redrawn independently at every instant
    st = _stats()
    rng = np.random.default_rng(4)
    T = 100_000
    rho = 0.8
    h0 = draw_phase_rician(st.hbar, psd_sqrt(st.R), rng, size=T)
    innov = draw_phase_rician(st.hbar, psd_sqrt(st.R), rng, size=T)
    hn = rho * h0 + np.sqrt(1 - rho ** 2) * innov
    cross = np.einsum("ta,tb->ab", hn, h0.conj()) / T
    scale = np.sqrt(np.outer(np.diag(st.Rbar).real, np.diag(st.Rbar).real))
    assert np.all(np.abs(cross - rho * st.Rbar) <= 3 * 2 * scale / np.sqrt(T))


def test_block_reconstructs_bit_exact():
    rng = np.random.default_rng(5)
    M, K, N = 2, 3, 2
    block = ChannelBlock(reference_instant=5)
    block.h[5] = rng.standard_normal((M, K, N)) + 1j * rng.standard_normal((M, K, N))
    innov = rng.standard_normal((M, K, N)) + 1j * rng.standard_normal((M, K, N))
    block.store_aged(9, np.array([0.9, 0.5, 1.0]), innov)
    assert block.reconstructs(9)
    assert block.reconstructs(5)


def test_block_dump_load_round_trip(tmp_path):
    rng = np.random.default_rng(6)
    block = ChannelBlock(reference_instant=3)
    for n in (3, 7):
        block.h[n] = rng.standard_normal((2, 2, 2)) + 1j * rng.standard_normal((2, 2, 2))
    path = tmp_path / "block.bin"
    dump_block(block, path)
    loaded = load_block(path)
    assert loaded.reference_instant == 3
    for n in (3, 7):
        assert np.array_equal(loaded.h[n], block.h[n])


def test_load_rejects_bad_magic(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"NOPE" + b"\x00" * 40)
    with pytest.raises(ValueError):
        load_block(path)
