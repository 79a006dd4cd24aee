"""Spectral efficiencies of pilot-based transmission.

Both schemes estimate the channel from pilot symbols and then treat the
estimate as the true channel: the estimation error degrades the effective
SNR fed to the perfect-CSI capacity, and the pilot symbols cost a (1 - n_p/
n_b) overhead factor.  The uniform-power scheme optimizes the integer pilot
count; the power-boosted scheme fixes n_p = n_t and applies the closed-form
optimal boost, which requires n_b > 2 n_t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .closedform import ergodic_capacity
from .errors import UnsupportedRegimeError
from .model import ChannelConfig, linear_to_db


@dataclass(frozen=True)
class PilotResult:
    """One pilot-scheme operating point.

    se_bits = (1 - n_p/n_b) * C(effective_snr), by construction.
    """

    se_bits: float
    n_p: int
    effective_snr: float
    boosted: bool


def pilot_se_uniform(config: ChannelConfig) -> PilotResult:
    """Best spectral efficiency over the integer pilot count, equal pilot and
    data power.  Ties break toward fewer pilots."""
    n_t, n_b, snr = config.n_t, config.n_b, config.snr
    if n_b < n_t:
        raise ValueError(f"pilot schemes need n_b >= n_t, got n_b={n_b}")
    best = None
    for n_p in range(n_t, n_b + 1):
        eff = (snr * snr * n_p / n_t) / (1.0 + snr * (1.0 + n_p / n_t))
        se = (1.0 - n_p / n_b) * ergodic_capacity(n_t, config.n_r, eff)
        if best is None or se > best.se_bits:
            best = PilotResult(se_bits=se, n_p=n_p, effective_snr=eff,
                               boosted=False)
    return best


def pilot_boost_factor(config: ChannelConfig) -> float:
    """Optimal pilot power-boost parameter (>= 1) for n_p = n_t."""
    n_t, n_b, snr = config.n_t, config.n_b, config.snr
    if n_b <= 2 * n_t:
        raise UnsupportedRegimeError(
            f"pilot power boosting requires n_b > 2*n_t, got n_b={n_b}, "
            f"n_t={n_t} (short-block variants are out of scope)")
    return (n_b * snr + n_t) / (n_b * snr * (n_b - 2 * n_t) / (n_b - n_t))


def pilot_se_boosted(config: ChannelConfig) -> PilotResult:
    """Spectral efficiency with n_p = n_t pilots at the closed-form optimal
    power boost.  Requires n_b > 2*n_t."""
    n_t, n_b, snr = config.n_t, config.n_b, config.snr
    gamma = pilot_boost_factor(config)
    eff = (n_b * snr / (n_b - 2 * n_t)) * (math.sqrt(gamma)
                                           - math.sqrt(gamma - 1.0)) ** 2
    se = (1.0 - n_t / n_b) * ergodic_capacity(n_t, config.n_r, eff)
    return PilotResult(se_bits=se, n_p=n_t, effective_snr=eff, boosted=True)


def min_energy_per_bit(curve) -> tuple[float, float]:
    """Grid point of an (snr, mi_bits) curve minimizing energy per bit.

    Returns (snr_at_min, Eb/N0 in dB).  Points with mi_bits <= 0 are ignored;
    raises if none are positive.  The minimum is taken over the given grid
    only (no extrapolation).
    """
    ratios = [(snr / mi, snr) for snr, mi in curve if mi > 0]
    if not ratios:
        raise ValueError("no points with positive rate in the curve")
    best_ratio, best_snr = min(ratios)
    return best_snr, linear_to_db(best_ratio)
