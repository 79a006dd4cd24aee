"""Exponential integrals E_q, exponentially scaled variants, and exact
combinatorial coefficients.

The scaled form ``e^x * E_q(x)`` is the workhorse: every closed-form rate in
this package multiplies E_{q+1}(x) by e^x, and for low SNR the argument x can
reach several hundred, where the unscaled value underflows.  Evaluation
strategy:

* x <= 1: power series for e^x*E_1(x), then upward recurrence in q
  (error damping factor x/q <= 1).
* x > 1: modified-Lentz continued fraction at an anchor order near x,
  downward recurrence below the anchor (damping q/x), upward above it
  (damping x/q).

All members of a family share one recurrence chain, so consecutive orders
satisfy E_{q+1}(x) = (e^-x - x*E_q(x))/q to rounding accuracy by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_EULER_GAMMA = 0.57721566490153286060651209008240243
_CF_MAX_ITER = 500
_CF_TINY = 1e-300


@dataclass(frozen=True)
class SignedLogValue:
    """A real number carried as sign * exp(log_magnitude).

    ``sign`` is -1, 0, or +1; a zero value uses ``sign=0`` with
    ``log_magnitude=-inf``.
    """

    sign: int
    log_magnitude: float

    @classmethod
    def from_real(cls, value: float) -> "SignedLogValue":
        if value == 0.0:
            return cls(0, -math.inf)
        return cls(1 if value > 0 else -1, math.log(abs(value)))

    def to_real(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    def __mul__(self, other: "SignedLogValue") -> "SignedLogValue":
        if self.sign == 0 or other.sign == 0:
            return SignedLogValue(0, -math.inf)
        return SignedLogValue(self.sign * other.sign,
                              self.log_magnitude + other.log_magnitude)

    def __add__(self, other: "SignedLogValue") -> "SignedLogValue":
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        hi, lo = self, other
        if lo.log_magnitude > hi.log_magnitude:
            hi, lo = lo, hi
        diff = lo.log_magnitude - hi.log_magnitude  # <= 0
        if hi.sign == lo.sign:
            return SignedLogValue(hi.sign, hi.log_magnitude + math.log1p(math.exp(diff)))
        rest = -math.expm1(diff)  # 1 - exp(diff) in [0, 1)
        if rest == 0.0:
            return SignedLogValue(0, -math.inf)
        return SignedLogValue(hi.sign, hi.log_magnitude + math.log(rest))

    def __neg__(self) -> "SignedLogValue":
        return SignedLogValue(-self.sign, self.log_magnitude)


def _scaled_e1_series(x: float) -> float:
    """e^x * E_1(x) for 0 < x <= 1 via the standard entire-series expansion."""
    total = -_EULER_GAMMA - math.log(x)
    term = 1.0
    for k in range(1, 40):
        term *= -x / k
        add = -term / k
        total += add
        if abs(add) < 1e-18 * abs(total):
            break
    return math.exp(x) * total


def _scaled_eq_cf(q: int, x: float) -> float:
    """e^x * E_q(x) for x > 1, q >= 1, by modified Lentz continued fraction."""
    b = x + q
    c = 1.0 / _CF_TINY
    d = 1.0 / b
    h = d
    for i in range(1, _CF_MAX_ITER):
        a = -i * (q - 1 + i)
        b += 2.0
        d = a * d + b
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = b + a / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise ArithmeticError(f"continued fraction for E_{q}({x}) did not converge")


def scaled_eq_family(q_max: int, x: float) -> list[float]:
    """[e^x*E_0(x), ..., e^x*E_{q_max}(x)], consistent under the q-recurrence."""
    if x <= 0.0 or not math.isfinite(x):
        raise ValueError(f"exponential integral requires x > 0, got {x}")
    if q_max < 0:
        raise ValueError(f"order must be >= 0, got {q_max}")
    out = [0.0] * (q_max + 1)
    out[0] = 1.0 / x
    if q_max == 0:
        return out
    if x <= 1.0:
        out[1] = _scaled_e1_series(x)
        for q in range(1, q_max):
            out[q + 1] = (1.0 - x * out[q]) / q
        return out
    anchor = min(q_max, max(1, math.ceil(x)))
    out[anchor] = _scaled_eq_cf(anchor, x)
    for q in range(anchor, 1, -1):  # downward: E_{q-1} from E_q
        out[q - 1] = (1.0 - (q - 1) * out[q]) / x
    for q in range(anchor, q_max):
        out[q + 1] = (1.0 - x * out[q]) / q
    return out


def scaled_exp_integral(q: int, x: float) -> float:
    """e^x * E_q(x); finite and accurate even for x of several hundred."""
    return scaled_eq_family(q, x)[q]


def exp_integral_eq(q: int, x: float) -> float:
    """E_q(x) = integral of t^-q e^{-xt} over t in [1, inf)."""
    return scaled_exp_integral(q, x) * math.exp(-x)


def exp_integral_e1(x: float) -> float:
    """E_1(x), the classical exponential integral."""
    return exp_integral_eq(1, x)


def log_factorial(n: int) -> float:
    """ln(n!)."""
    if n < 0:
        raise ValueError(f"factorial argument must be >= 0, got {n}")
    return math.lgamma(n + 1.0)


def binomial(n: int, k: int) -> int:
    """Exact binomial coefficient; 0 outside 0 <= k <= n."""
    if n < 0:
        raise ValueError(f"binomial requires n >= 0, got {n}")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)
