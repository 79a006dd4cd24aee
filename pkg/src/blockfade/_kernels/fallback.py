"""Pure-Python/scipy implementation of the hot kernels.

Same contracts as the compiled module: `ftilde` evaluates the exponentially
rescaled density integrand

    e^{-x} f_k(x) = int_0^inf exp{-x n_t/(z snr + n_t) - z}
                    * z^{k-1+n_t-n_r} (n_t/snr)^{k-1}
                    / (z snr/n_t + 1)^{n_b+1-n_r} dz

to a relative tolerance, and `neg_log_density_batch` maps batches of sorted
Gram spectra to -ln p(Y).
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from blockfade.errors import QuadratureError

BACKEND = "python"

_LN_PI = math.log(math.pi)

STATUS_OK = 0
STATUS_DEGENERATE = 1
STATUS_QUADRATURE = 2
STATUS_SIGN = 3


def _tail_bound(a_pow: int, c_geom: float, son: float, t: float) -> float:
    """Upper bound on the integrand mass beyond t.

    Uses Gamma(a+1, t) = a! e^-t sum_{m<=a} t^m/m! together with the
    monotone factor (t*snr/n_t + 1)^-c at its left endpoint.
    """
    s = 1.0
    term = 1.0
    for m in range(1, a_pow + 1):
        term *= t / m
        s += term
    return math.exp(math.lgamma(a_pow + 1.0) - t + math.log(s)
                    - c_geom * math.log1p(t * son))


def _worst_interval(info):
    last = info["last"]
    i = int(np.argmax(info["elist"][:last]))
    return float(info["alist"][i]), float(info["blist"][i])


def _ftilde_raw(x, k, n_t, n_r, n_b, snr, rtol, max_subdiv):
    """Integral without the (n_t/snr)^(k-1) row prefactor."""
    a_pow = k - 1 + n_t - n_r
    c_geom = float(n_b + 1 - n_r)
    son = snr / n_t

    def integrand(z):
        e = -x * n_t / (z * snr + n_t) - z - c_geom * math.log1p(z * son)
        if a_pow > 0:
            if z <= 0.0:
                return 0.0
            e += a_pow * math.log(z)
        return math.exp(e)

    zs = (math.sqrt(x * n_t * snr) - n_t) / snr
    zs = max(0.0, zs)
    t_hi = max(40.0, 2.0 * a_pow + 20.0, zs + 30.0 * math.sqrt(zs + 1.0))
    pts = [p for p in (0.3 * zs, zs, 3.0 * zs) if 0.0 < p < t_hi] or None

    total, _, info, *rest = integrate.quad(
        integrand, 0.0, t_hi, points=pts, epsabs=0.0, epsrel=rtol,
        limit=max(50, max_subdiv), full_output=1)
    if rest:
        raise QuadratureError(f"quadrature failed on [0, {t_hi}]: {rest[0]}",
                              worst_interval=_worst_interval(info))
    # extend until the analytic tail bound is negligible
    for _ in range(64):
        if _tail_bound(a_pow, c_geom, son, t_hi) <= 1e-3 * rtol * total:
            return total
        piece, _, info, *rest = integrate.quad(
            integrand, t_hi, 2.0 * t_hi, epsabs=0.0, epsrel=rtol,
            limit=max(50, max_subdiv), full_output=1)
        if rest:
            raise QuadratureError(
                f"quadrature failed on [{t_hi}, {2 * t_hi}]: {rest[0]}",
                worst_interval=_worst_interval(info))
        total += piece
        t_hi *= 2.0
    raise QuadratureError(
        f"tail of density integrand not exhausted by z = {t_hi}",
        worst_interval=(t_hi, 2.0 * t_hi))


def _validate(x, k, n_t, n_r, n_b, snr):
    if not (x >= 0.0 and math.isfinite(x)):
        raise ValueError(f"x must be finite and >= 0, got {x!r}")
    if not 1 <= k <= n_r:
        raise ValueError(f"k must lie in [1, n_r={n_r}], got {k}")
    if n_t < n_r or n_b < n_r:
        raise ValueError(
            f"requires n_t >= n_r and n_b >= n_r, got ({n_t}, {n_r}, {n_b})")
    if not (snr > 0 and math.isfinite(snr)):
        raise ValueError(f"snr must be positive, got {snr!r}")


def ftilde(x, k, n_t, n_r, n_b, snr, rtol=1e-9, max_subdiv=200):
    """Exponentially rescaled density integral e^{-x} f_k(x)."""
    _validate(x, k, n_t, n_r, n_b, snr)
    pref = (n_t / snr) ** (k - 1)
    return pref * _ftilde_raw(x, k, n_t, n_r, n_b, snr, rtol, max_subdiv)


def ftilde_many(xs, k, n_t, n_r, n_b, snr, rtol=1e-9, max_subdiv=200):
    xs = np.asarray(xs, dtype=np.float64)
    return np.array([ftilde(float(x), k, n_t, n_r, n_b, snr, rtol, max_subdiv)
                     for x in xs])


def _hermite_eval(knots, vals, ders, x):
    """Cubic Hermite interpolation with precomputed knot derivatives."""
    idx = np.clip(np.searchsorted(knots, x, side="right") - 1, 0, len(knots) - 2)
    x0 = knots[idx]
    h = knots[idx + 1] - x0
    t = (x - x0) / h
    t2 = t * t
    t3 = t2 * t
    return ((2 * t3 - 3 * t2 + 1) * vals[idx]
            + h * (t3 - 2 * t2 + t) * ders[idx]
            + (-2 * t3 + 3 * t2) * vals[idx + 1]
            + h * (t3 - t2) * ders[idx + 1])


def neg_log_density_batch(d, n_t, n_r, n_b, snr, rtol, max_subdiv, gap_coeff,
                          knots=None, values=None, derivs=None, x_max=-1.0):
    """-ln p(Y) for a (B, n_r) batch of ascending Gram spectra.

    Returns (neg_lnp, status) with per-sample status codes: 0 ok,
    1 degenerate spectrum, 2 quadrature failure, 3 nonpositive determinant
    ratio.  Failed samples carry NaN.
    """
    d = np.ascontiguousarray(d, dtype=np.float64)
    batch, nr = d.shape
    if nr != n_r:
        raise ValueError(f"spectrum width {nr} != n_r {n_r}")
    out = np.full(batch, np.nan)
    status = np.zeros(batch, dtype=np.int8)

    gap_tol = gap_coeff * np.maximum(1.0, d[:, -1])
    if nr > 1:
        status[np.diff(d, axis=1).min(axis=1) < gap_tol] = STATUS_DEGENERATE

    # ln Ztilde[b, i, j] = ln ftilde_{i+1}(d[b, j])
    ln_z = np.empty((batch, nr, nr))
    if knots is not None:
        inside = d <= x_max
        for i in range(nr):
            ln_z[:, i, :] = _hermite_eval(knots, values[i], derivs[i], d)
    else:
        inside = np.zeros_like(d, dtype=bool)
    lpref = [(i) * math.log(n_t / snr) for i in range(nr)]
    for b in range(batch):
        if status[b]:
            continue
        for j in range(nr):
            if inside[b, j]:
                continue
            try:
                raw = [_ftilde_raw(d[b, j], i + 1, n_t, n_r, n_b, snr, rtol,
                                   max_subdiv) for i in range(nr)]
            except QuadratureError:
                status[b] = STATUS_QUADRATURE
                break
            with np.errstate(divide="ignore"):
                ln_z[b, :, j] = np.log(raw) + lpref

    ok = status == STATUS_OK
    if np.any(ok):
        lz = ln_z[ok]
        col_max = lz.max(axis=1)  # (n_ok, n_r)
        bad_col = ~np.isfinite(col_max).all(axis=1)
        scaled = np.exp(lz - col_max[:, None, :])
        scaled[~np.isfinite(scaled)] = 0.0
        sign, logdet = np.linalg.slogdet(scaled)
        lnp = logdet + col_max.sum(axis=1)
        dk = d[ok]
        for i in range(nr):
            for j in range(i + 1, nr):
                lnp -= np.log(dk[:, j] - dk[:, i])
        lnp -= n_b * nr * _LN_PI
        lnp -= sum(math.lgamma(n_t - k + 1) for k in range(1, nr + 1))
        res = -lnp
        res[(sign <= 0) | bad_col] = np.nan
        out[ok] = res
        sub = status[ok]
        sub[(sign <= 0) | bad_col] = STATUS_SIGN
        status[ok] = sub
    return out, status
