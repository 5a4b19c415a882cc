"""Correlated Rician channel realizations with random LoS phase and aging.

A channel draw at the reference instant is h = hbar e^{j phi} + R^{1/2} g
with phi ~ Uniform[-pi, pi) and g circular complex normal. Aged copies at
offset n combine the reference draw with an independent innovation,

    h[n] = rho h[0] + sqrt(1 - rho^2) (hbar e^{j phi_n} + f),

where the LoS phase is redrawn at every instant.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np


class NumericalError(RuntimeError):
    pass


def psd_sqrt(R: np.ndarray) -> np.ndarray:
    """Hermitian square root S of a PSD matrix, S S^H = R.

    Eigen-based so that rank-deficient matrices (pure-LoS links) are handled.
    """
    R = np.asarray(R)
    evals, evecs = np.linalg.eigh(0.5 * (R + R.conj().swapaxes(-1, -2)))
    tr = np.trace(R, axis1=-2, axis2=-1).real
    if np.any(evals < -1e-8 * np.maximum(tr[..., None], 1e-300)):
        raise NumericalError("matrix has a negative eigenvalue beyond tolerance")
    evals = np.clip(evals, 0.0, None)
    return (evecs * np.sqrt(evals)[..., None, :]) @ evecs.conj().swapaxes(-1, -2)


def draw_phase_rician(hbar: np.ndarray, sqrt_R: np.ndarray, rng: np.random.Generator,
                      size: int | None = None) -> np.ndarray:
    """Draw hbar e^{j phi} + S g with uniform phase and g ~ CN(0, I).

    hbar: (..., N), sqrt_R: (..., N, N). With `size` given, a leading trial
    axis is prepended.
    """
    hbar = np.asarray(hbar)
    shape = hbar.shape if size is None else (size,) + hbar.shape
    phi = rng.uniform(-np.pi, np.pi, size=shape[:-1])
    g = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    nlos = np.einsum("...ab,...b->...a", np.broadcast_to(sqrt_R, shape + shape[-1:]), g)
    return hbar * np.exp(1j * phi)[..., None] + nlos


def draw_initial(stats, rng: np.random.Generator) -> np.ndarray:
    """One channel realization for a single link at the reference instant."""
    return draw_phase_rician(stats.hbar, psd_sqrt(stats.R), rng)


def age_channel(h0: np.ndarray, rho_n: float, stats, rng: np.random.Generator) -> np.ndarray:
    """Aged channel at the offset whose temporal correlation is rho_n."""
    rho_bar = np.sqrt(max(0.0, 1.0 - rho_n * rho_n))
    if rho_bar == 0.0:
        return h0.copy()
    innovation = draw_phase_rician(stats.hbar, psd_sqrt(stats.R), rng)
    return rho_n * h0 + rho_bar * innovation


@dataclass
class ChannelBlock:
    """Realized channels of one trial at the instants the engines need.

    h maps instant -> (M, K, N) array. For aged instants the innovation and
    correlation used are kept so that the aging recombination can be checked
    bit-exactly.
    """

    reference_instant: int
    h: dict = field(default_factory=dict)            # instant -> (M, K, N)
    innovations: dict = field(default_factory=dict)  # instant -> (M, K, N)
    rho: dict = field(default_factory=dict)          # instant -> (K,) per-UE rho

    def store_aged(self, instant: int, rho_k: np.ndarray, innovation: np.ndarray):
        """Materialize h[instant] from the reference draw and an innovation."""
        h0 = self.h[self.reference_instant]
        rho = np.asarray(rho_k)[None, :, None]
        rho_bar = np.sqrt(np.clip(1.0 - rho * rho, 0.0, None))
        self.h[instant] = rho * h0 + rho_bar * innovation
        self.innovations[instant] = innovation
        self.rho[instant] = np.asarray(rho_k)

    def reconstructs(self, instant: int) -> bool:
        """True when the stored components recombine to the stored channel bit-exactly."""
        if instant == self.reference_instant:
            return True
        rho = self.rho[instant][None, :, None]
        rho_bar = np.sqrt(np.clip(1.0 - rho * rho, 0.0, None))
        recombined = rho * self.h[self.reference_instant] + rho_bar * self.innovations[instant]
        return np.array_equal(recombined, self.h[instant])


_MAGIC = b"CFCB"
_VERSION = 1


def dump_block(block: ChannelBlock, path) -> None:
    """Binary dump: versioned header then row-major little-endian float64 pairs."""
    instants = sorted(block.h)
    first = block.h[instants[0]]
    M, K, N = first.shape
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<IIIII", _VERSION, M, K, N, len(instants)))
        f.write(struct.pack(f"<{len(instants)}i", *instants))
        for n in instants:
            arr = np.ascontiguousarray(block.h[n], dtype=np.complex128)
            inter = np.empty(arr.size * 2)
            inter[0::2] = arr.real.ravel()
            inter[1::2] = arr.imag.ravel()
            f.write(inter.astype("<f8").tobytes())


def load_block(path) -> ChannelBlock:
    with open(path, "rb") as f:
        if f.read(4) != _MAGIC:
            raise ValueError("not a channel block dump")
        version, M, K, N, n_inst = struct.unpack("<IIIII", f.read(20))
        if version != _VERSION:
            raise ValueError(f"unsupported dump version {version}")
        instants = struct.unpack(f"<{n_inst}i", f.read(4 * n_inst))
        block = ChannelBlock(reference_instant=instants[0])
        for n in instants:
            flat = np.frombuffer(f.read(16 * M * K * N), dtype="<f8")
            block.h[n] = (flat[0::2] + 1j * flat[1::2]).reshape(M, K, N)
    return block
