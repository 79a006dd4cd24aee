import math

import pytest

from blockfade.closedform import (LOG2_PI_E, cond_entropy, ergodic_capacity,
                                  high_snr_slope_capacity,
                                  high_snr_slope_pilot, mi_lower_bound,
                                  perfect_csi_capacity, wishart_logdet_mean)
from blockfade.errors import UnsupportedSizeError
from blockfade.model import ChannelConfig, snr_db_to_linear

from oracles import cond_entropy_mc, e1_defining_integral, wishart_logdet_mc


def _cf_scaled_e1_mp(x):
    """Modified-Lentz e^x E_1(x) in mp precision (test-local anchor)."""
    import mpmath as mp
    tiny = mp.mpf(10) ** (-(mp.mp.dps + 60))
    b = x + 1
    c = 1 / tiny
    d = 1 / b
    h = d
    for i in range(1, 100_000):
        a = -i * i
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
    raise ArithmeticError("cf stalled")

LOG2E = math.log2(math.e)


class TestWishartLogdetMean:
    def test_scalar_unit(self):
        """m=n=1, rho=1 collapses to e * E_1(1) * log2(e)."""
        expected = math.e * e1_defining_integral(1.0) * LOG2E
        assert wishart_logdet_mean(1, 1, 1.0) == pytest.approx(expected,
                                                               rel=1e-12)

    def test_scalar_four_samples(self):
        """m=1, n=4 is log2(e) * e * (E_1 + E_2 + E_3 + E_4)(1)."""
        e1 = e1_defining_integral(1.0)
        e2 = math.exp(-1) - e1
        e3 = (math.exp(-1) - e2) / 2
        e4 = (math.exp(-1) - e3) / 3
        expected = LOG2E * math.e * (e1 + e2 + e3 + e4)
        assert wishart_logdet_mean(1, 4, 1.0) == pytest.approx(expected,
                                                               rel=1e-12)
        assert wishart_logdet_mean(1, 4, 1.0) == pytest.approx(
            2.2103758486089132, rel=1e-12)

    @pytest.mark.parametrize("m,n,rho", [(2, 10, 5.0), (2, 4, 0.5),
                                         (3, 7, 2.0)])
    def test_monte_carlo_oracle(self, m, n, rho):
        """Inside the 99% CI of a brute-force Wishart sample average."""
        mc, stderr = wishart_logdet_mc(m, n, rho, 100_000, seed=2024)
        assert wishart_logdet_mean(m, n, rho) == pytest.approx(mc,
                                                               abs=2.576 * stderr)

    def test_strictly_increasing_in_rho(self):
        for m, n in [(1, 1), (2, 5), (3, 20)]:
            vals = [wishart_logdet_mean(m, n, r)
                    for r in (0.01, 0.1, 1.0, 10.0, 100.0)]
            assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_nondecreasing_in_n(self):
        for m in (1, 2, 3):
            vals = [wishart_logdet_mean(m, n, 1.0) for n in range(m, 21)]
            assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_low_snr_vanishes(self):
        assert wishart_logdet_mean(2, 6, 1e-9) == pytest.approx(0.0, abs=1e-6)

    def test_size_caps(self):
        with pytest.raises(UnsupportedSizeError):
            wishart_logdet_mean(9, 20, 1.0)
        with pytest.raises(UnsupportedSizeError):
            wishart_logdet_mean(2, 1025, 1.0)
        with pytest.raises(ValueError):
            wishart_logdet_mean(3, 2, 1.0)
        with pytest.raises(ValueError):
            wishart_logdet_mean(1, 1, 0.0)

    def test_largest_supported_sizes_finite(self):
        v = wishart_logdet_mean(8, 1024, 1.0)
        assert math.isfinite(v) and v > 0
        v = wishart_logdet_mean(8, 1024, 1e-4)
        assert math.isfinite(v) and v > 0

    def test_extended_precision_corner(self):
        """Heavy-cancellation corner vs an independent 70-digit evaluation.

        The naive sum loses ~10 digits in float64 here; the implementation
        must still deliver full accuracy.
        """
        import mpmath as mp
        m, n, rho = 8, 64, 0.01
        with mp.workdps(70):
            x = mp.mpf(1) / rho
            fam = [mp.mpf(0)] * (n + m)
            fam[1] = _cf_scaled_e1_mp(x)
            for q in range(1, n + m - 1):
                fam[q + 1] = (1 - x * fam[q]) / q
            total = mp.mpf(0)
            for i in range(m):
                for j in range(i + 1):
                    for ell in range(2 * j + 1):
                        c = (mp.mpf(math.comb(2 * i - 2 * j, i - j))
                             * math.comb(2 * j + 2 * n - 2 * m, 2 * j - ell)
                             * mp.factorial(2 * j) * mp.factorial(n - m + ell)
                             / (mp.mpf(2) ** (2 * i - ell) * mp.factorial(j)
                                * mp.factorial(ell) * mp.factorial(n - m + j)))
                        if ell % 2:
                            c = -c
                        total += c * sum(fam[1:n - m + ell + 2])
            expected = float(mp.log(mp.e, 2) * total)
        assert wishart_logdet_mean(m, n, rho) == pytest.approx(expected,
                                                               rel=1e-12)


class TestCondEntropy:
    def test_siso_reference(self):
        c = ChannelConfig(1, 1, 1, 1.0)
        expected = LOG2_PI_E + math.e * e1_defining_integral(1.0) * LOG2E
        assert cond_entropy(c) == pytest.approx(expected, rel=1e-12)
        assert cond_entropy(c) == pytest.approx(3.9545385526321682, rel=1e-12)

    def test_noise_floor_at_vanishing_snr(self):
        """Excess over the noise-only entropy ~ log2(e) n_r n_b snr."""
        c = ChannelConfig(1, 1, 4, 1e-6)
        floor = c.n_r * c.n_b * LOG2_PI_E
        excess = cond_entropy(c) - floor
        assert 0.0 <= excess < 1e-5
        assert excess == pytest.approx(LOG2E * c.n_r * c.n_b * c.snr, rel=0.01)

    def test_monte_carlo_oracle(self):
        c = ChannelConfig(2, 2, 10, 1.0)
        mc, stderr = cond_entropy_mc(2, 2, 10, 1.0, 100_000, seed=77)
        assert cond_entropy(c) == pytest.approx(mc, abs=2.576 * stderr)

    def test_definitional_identity(self):
        c = ChannelConfig(2, 1, 7, 3.0)
        lhs = (cond_entropy(c) - c.n_r * c.n_b * LOG2_PI_E) / c.n_r
        assert lhs == pytest.approx(wishart_logdet_mean(c.n_t, c.n_b, c.rho),
                                    rel=5e-15)


class TestPerfectCsiCapacity:
    def test_siso_at_0db(self):
        c = ChannelConfig(1, 1, 4, 1.0)
        expected = math.e * e1_defining_integral(1.0) * LOG2E
        assert perfect_csi_capacity(c) == pytest.approx(expected, rel=1e-12)

    def test_siso_at_10db(self):
        c = ChannelConfig(1, 1, 4, 10.0)
        expected = math.exp(0.1) * e1_defining_integral(0.1) * LOG2E
        assert perfect_csi_capacity(c) == pytest.approx(expected, rel=1e-11)
        assert perfect_csi_capacity(c) == pytest.approx(2.906514808414805,
                                                        rel=1e-11)

    def test_no_blocklength_dependence(self):
        a = perfect_csi_capacity(ChannelConfig(2, 1, 2, 4.0))
        b = perfect_csi_capacity(ChannelConfig(2, 1, 500, 4.0))
        assert a == b

    def test_min_max_reduction(self):
        """(n_t, n_r) enters only through {min, max} and the snr/n_t scale."""
        snr = 3.0
        assert ergodic_capacity(2, 1, snr) == wishart_logdet_mean(1, 2, snr / 2)
        assert ergodic_capacity(3, 2, snr) == wishart_logdet_mean(2, 3, snr / 3)

    def test_high_snr_slope(self):
        """Numerical slope between 30 and 40 dB approaches min(n_t, n_r)
        bits/s/Hz per 3 dB."""
        for n_t, n_r in [(1, 1), (2, 2), (2, 1)]:
            c30 = ergodic_capacity(n_t, n_r, snr_db_to_linear(30.0))
            c40 = ergodic_capacity(n_t, n_r, snr_db_to_linear(40.0))
            slope = (c40 - c30) / (10.0 / 3.0)
            assert slope == pytest.approx(min(n_t, n_r), rel=0.05)


class TestSlopes:
    def test_symmetric_case(self):
        c = ChannelConfig(2, 2, 10, 1.0)
        assert high_snr_slope_capacity(c) == pytest.approx(1.6)
        assert high_snr_slope_pilot(c) == pytest.approx(1.6)

    def test_excess_transmit_antennas(self):
        c = ChannelConfig(2, 1, 10, 1.0)
        assert high_snr_slope_capacity(c) == pytest.approx(0.9)
        assert high_snr_slope_pilot(c) == pytest.approx(0.8)

    def test_long_block_limit(self):
        c = ChannelConfig(1, 1, 1000, 1.0)
        assert high_snr_slope_capacity(c) == pytest.approx(0.999)
        assert high_snr_slope_pilot(c) == pytest.approx(0.999)
        c = ChannelConfig(1, 1, 1_000_000, 1.0)
        assert high_snr_slope_capacity(c) == pytest.approx(1.0, abs=2e-6)
        assert high_snr_slope_pilot(c) == pytest.approx(1.0, abs=2e-6)


class TestMiLowerBound:
    def test_reference_point(self):
        c = ChannelConfig(1, 1, 10, 1.0)
        expected = (math.e * e1_defining_integral(1.0) * LOG2E
                    - 0.1 * math.log2(11.0))
        assert mi_lower_bound(c) == pytest.approx(expected, rel=1e-12)
        assert mi_lower_bound(c) == pytest.approx(0.51440422040715623,
                                                  rel=1e-12)

    def test_approaches_capacity_for_long_blocks(self):
        c = ChannelConfig(1, 1, 1_000_000, 1.0)
        # penalty term is still evaluated even though n_b > the closed-form
        # sample cap applies only to the Wishart sum over n_b, not here
        gap = perfect_csi_capacity(c) - mi_lower_bound(c)
        assert 0.0 < gap < 3e-5

    def test_may_be_negative(self):
        # vacuous regime: penalty (n_t n_r/n_b) log2(1+snr n_b/n_t) outgrows
        # the capacity when n_b = n_t at high snr
        assert mi_lower_bound(ChannelConfig(2, 2, 2, 100.0)) < 0.0
        assert math.isfinite(mi_lower_bound(ChannelConfig(2, 2, 4, 100.0)))
