"""Closed-form scalar rates for the block-fading model.

Everything here reduces to one primitive: the expected log-determinant
E[log2 det(I + rho*W)] of a complex Wishart matrix W with m antennas and
n >= m samples.  Evaluated with the conditional entropy of the output
(role of the channel played by the input matrix, m=n_t, n=n_b) it gives
h(Y|X); evaluated with the fading matrix (m=min(n_t,n_r), n=max) it gives
the perfect-CSI ergodic capacity.

The triple sum behind that closed form alternates in sign, with individual
terms up to ~1e20 at the largest supported sizes while the result stays
O(100) bits.  The coefficient of each exponential integral order is
therefore accumulated in exact rational arithmetic, and whenever the
remaining float cancellation would still cost more than ~9 significant
digits the final dot product is re-evaluated in mpmath with enough working
precision to absorb it.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import mpmath as mp

from .errors import UnsupportedSizeError
from .model import ChannelConfig
from .specfun import scaled_eq_family

LOG2E = math.log2(math.e)
LOG2_PI_E = math.log2(math.pi * math.e)

MAX_ANTENNAS = 8
MAX_SAMPLES = 1024

# float64 path keeps >= ~9 significant digits up to this term/result ratio
_COND_LIMIT = 3e5


@lru_cache(maxsize=64)
def _eq_coefficients(m: int, n: int) -> tuple:
    """Exact rational coefficients c_q with the closed form equal to
    log2(e) * sum_q c_q * e^x E_{q+1}(x), x = 1/rho.

    Collapses the alternating (i, j, l) triple sum per integral order, which
    removes all coefficient-level cancellation exactly.
    """
    diff = [Fraction(0)] * (n + m)
    for i in range(m):
        for j in range(i + 1):
            f2j = math.factorial(2 * j)
            for ell in range(2 * j + 1):
                num = (math.comb(2 * i - 2 * j, i - j)
                       * math.comb(2 * j + 2 * n - 2 * m, 2 * j - ell)
                       * f2j * math.factorial(n - m + ell))
                den = (2 ** (2 * i - ell) * math.factorial(j)
                       * math.factorial(ell) * math.factorial(n - m + j))
                c = Fraction(num, den)
                if ell % 2:
                    c = -c
                # the q-sum runs 0..L: add c on that whole prefix
                diff[0] += c
                diff[n - m + ell + 1] -= c
    out = []
    acc = Fraction(0)
    for q in range(n + m - 1):
        acc += diff[q]
        out.append(acc)
    return tuple(out)


def _scaled_eq_cf_mp(q: int, x) -> "mp.mpf":
    """e^x E_q(x) for x > 1 by modified Lentz in mp working precision.

    mp.expint itself loses most of its working digits for moderate orders
    (internal cancellation), so the anchor must come from this forward-stable
    continued fraction instead.
    """
    tiny = mp.mpf(10) ** (-(mp.mp.dps + 60))
    b = x + q
    c = 1 / tiny
    d = 1 / b
    h = d
    for i in range(1, 100_000):
        a = -i * (q - 1 + i)
        b += 2
        d = a * d + b
        if d == 0:
            d = tiny
        c = b + a / c
        if c == 0:
            c = tiny
        d = 1 / d
        delta = c * d
        h *= delta
        if abs(delta - 1) < mp.eps:
            return h
    raise ArithmeticError(f"mp continued fraction for E_{q}({x}) stalled")


def _scaled_family_mp(q_max: int, x: float):
    """Anchored-recurrence family e^x E_q(x) in mpmath's working precision."""
    xm = mp.mpf(x)
    out = [mp.mpf(0)] * (q_max + 1)
    out[0] = 1 / xm
    if q_max == 0:
        return out
    if x <= 1.0:
        out[1] = mp.exp(xm) * mp.e1(xm)
        for q in range(1, q_max):
            out[q + 1] = (1 - xm * out[q]) / q
        return out
    anchor = min(q_max, max(1, int(math.ceil(x))))
    out[anchor] = _scaled_eq_cf_mp(anchor, xm)
    for q in range(anchor, 1, -1):
        out[q - 1] = (1 - (q - 1) * out[q]) / xm
    for q in range(anchor, q_max):
        out[q + 1] = (1 - xm * out[q]) / q
    return out


def wishart_logdet_mean(m: int, n: int, rho: float) -> float:
    """E[log2 det(I_m + rho * G G^H)] in bits, G an m x n IID CN(0,1) matrix.

    Exact-coefficient evaluation of the closed form; falls back to extended
    precision when the alternating sum would cancel away float64 accuracy.
    """
    if not (isinstance(m, int) and isinstance(n, int)):
        raise ValueError(f"m and n must be integers, got {m!r}, {n!r}")
    if m < 1 or n < m:
        raise ValueError(f"requires n >= m >= 1, got m={m}, n={n}")
    if m > MAX_ANTENNAS or n > MAX_SAMPLES:
        raise UnsupportedSizeError(
            f"supported sizes are m <= {MAX_ANTENNAS}, n <= {MAX_SAMPLES}; "
            f"got m={m}, n={n}")
    if not (rho > 0 and math.isfinite(rho)):
        raise ValueError(f"rho must be positive and finite, got {rho!r}")

    x = 1.0 / rho
    coeffs = _eq_coefficients(m, n)
    scaled = scaled_eq_family(len(coeffs), x)
    terms = [float(c) * scaled[q + 1] for q, c in enumerate(coeffs)]
    total = math.fsum(terms)
    worst = max(abs(t) for t in terms)
    if worst <= _COND_LIMIT * abs(total):
        return LOG2E * total

    cond = worst / max(abs(total), 1e-300)
    with mp.workdps(40 + int(math.log10(cond))):
        family = _scaled_family_mp(len(coeffs), x)
        acc = mp.fsum(mp.mpf(c.numerator) / c.denominator * family[q + 1]
                      for q, c in enumerate(coeffs))
        return float(mp.log(mp.e, 2) * acc)


def cond_entropy(config: ChannelConfig) -> float:
    """h(Y|X) in bits, total per fading block.  Requires n_b >= n_t."""
    if config.n_b < config.n_t:
        raise ValueError(
            f"conditional-entropy closed form needs n_b >= n_t, got "
            f"n_b={config.n_b} < n_t={config.n_t}")
    return config.n_r * (config.n_b * LOG2_PI_E
                         + wishart_logdet_mean(config.n_t, config.n_b, config.rho))


def ergodic_capacity(n_t: int, n_r: int, snr: float) -> float:
    """Perfect-CSI ergodic capacity in bits/s/Hz at the given linear SNR."""
    return wishart_logdet_mean(min(n_t, n_r), max(n_t, n_r), snr / n_t)


def perfect_csi_capacity(config: ChannelConfig) -> float:
    """Perfect-CSI ergodic capacity at the configured SNR (no n_b dependence)."""
    return ergodic_capacity(config.n_t, config.n_r, config.snr)


def high_snr_slope_capacity(config: ChannelConfig) -> float:
    """High-SNR slope of the no-CSI capacity, bits/s/Hz per 3 dB."""
    nmin = min(config.n_t, config.n_r)
    return nmin * (1.0 - nmin / config.n_b)


def high_snr_slope_pilot(config: ChannelConfig) -> float:
    """High-SNR slope of pilot-based transmission, bits/s/Hz per 3 dB."""
    nmin = min(config.n_t, config.n_r)
    return nmin * (1.0 - config.n_t / config.n_b)


def mi_lower_bound(config: ChannelConfig) -> float:
    """Pilot-free lower bound on the Gaussian-input mutual information,
    bits/s/Hz.  May be negative (vacuous) at high SNR / short blocks."""
    penalty = (config.n_t * config.n_r / config.n_b) * math.log2(
        1.0 + config.snr * config.n_b / config.n_t)
    return perfect_csi_capacity(config) - penalty
