"""Channel configuration and random block sampling for the Rayleigh
block-fading model y = sqrt(snr/n_t) * h @ x + noise.

Entries of h, x, and the noise are IID circularly symmetric complex Gaussian
with unit total variance (1/2 per real and imaginary part).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelConfig:
    """One operating point: antenna counts, blocklength, and linear SNR.

    n_t >= n_r is the standing assumption of every formula here, and the
    output density needs n_b >= n_r.  The conditional-entropy closed form
    (and everything built on it) additionally requires n_b >= n_t, checked
    where it is consumed so that density-only use of short blocks stays
    possible.
    """

    n_t: int
    n_r: int
    n_b: int
    snr: float

    def __post_init__(self):
        for name in ("n_t", "n_r", "n_b"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise ValueError(f"{name} must be an integer, got {v!r}")
            if v < 1:
                raise ValueError(f"{name} must be >= 1, got {v}")
        if self.n_t < self.n_r:
            raise ValueError(
                f"n_t >= n_r required, got n_t={self.n_t} < n_r={self.n_r}")
        if self.n_b < self.n_r:
            raise ValueError(
                f"n_b >= n_r required, got n_b={self.n_b} < n_r={self.n_r}")
        if not (isinstance(self.snr, (int, float)) and math.isfinite(self.snr)
                and self.snr > 0):
            raise ValueError(f"snr must be positive and finite, got {self.snr!r}")
        object.__setattr__(self, "snr", float(self.snr))

    @property
    def rho(self) -> float:
        """Per-transmit-antenna SNR ratio snr / n_t."""
        return self.snr / self.n_t


@dataclass(frozen=True)
class BlockSample:
    """One fading block: channel h (n_r x n_t), input x (n_t x n_b),
    output y (n_r x n_b)."""

    h: np.ndarray
    x: np.ndarray
    y: np.ndarray


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """IID CN(0, 1) array: real and imaginary parts each N(0, 1/2)."""
    z = rng.standard_normal(size=tuple(shape) + (2,))
    return math.sqrt(0.5) * (z[..., 0] + 1j * z[..., 1])


def sample_block(config: ChannelConfig, rng: np.random.Generator) -> BlockSample:
    """Draw one (h, x, y) realization of the block-fading channel."""
    h = complex_gaussian(rng, (config.n_r, config.n_t))
    x = complex_gaussian(rng, (config.n_t, config.n_b))
    noise = complex_gaussian(rng, (config.n_r, config.n_b))
    y = math.sqrt(config.rho) * (h @ x) + noise
    return BlockSample(h=h, x=x, y=y)


def sample_gram_spectra(config: ChannelConfig, rng: np.random.Generator,
                        count: int) -> np.ndarray:
    """Ascending Gram spectra of `count` independent output blocks.

    Returns a (count, n_r) array of the eigenvalues of y @ y^H.  This is the
    Monte-Carlo hot path; blocks are drawn in one vectorized batch and the
    (h, x) realizations are discarded.
    """
    n_t, n_r, n_b = config.n_t, config.n_r, config.n_b
    h = complex_gaussian(rng, (count, n_r, n_t))
    x = complex_gaussian(rng, (count, n_t, n_b))
    noise = complex_gaussian(rng, (count, n_r, n_b))
    y = math.sqrt(config.rho) * (h @ x) + noise
    if n_r == 1:
        d = np.einsum("bij,bij->b", y.real, y.real)
        d += np.einsum("bij,bij->b", y.imag, y.imag)
        return d[:, None]
    gram = y @ np.conj(np.swapaxes(y, 1, 2))
    return np.maximum(np.linalg.eigvalsh(gram), 0.0)


def coherence_blocklength(f_m: float, t_s: float) -> int:
    """Blocklength in symbols for a rectangular Doppler spectrum of maximum
    frequency f_m (Hz) and symbol period t_s (s): floor(1/(2 f_m t_s)),
    clamped below at 1."""
    if not (f_m > 0 and math.isfinite(f_m)):
        raise ValueError(f"f_m must be positive, got {f_m!r}")
    if not (t_s > 0 and math.isfinite(t_s)):
        raise ValueError(f"t_s must be positive, got {t_s!r}")
    return max(1, math.floor(1.0 / (2.0 * f_m * t_s)))


def snr_db_to_linear(db: float) -> float:
    """dB -> linear power ratio."""
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    """Linear power ratio -> dB; requires x > 0."""
    if not (x > 0):
        raise ValueError(f"dB conversion requires a positive ratio, got {x!r}")
    return 10.0 * math.log10(x)
