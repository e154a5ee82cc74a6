"""Error function and inverse: oracle comparison and round-trip contracts."""

import math

import numpy as np
import pytest

from sempool.errors import ErfInvDomain
from sempool.theory import erf, erfinv, normal_cdf


def erf_series_oracle(x: float) -> float:
    """Independent Maclaurin-series erf: (2/sqrt(pi)) sum (-1)^n x^(2n+1) / (n!(2n+1)).

    Converges everywhere; summed with fsum until terms vanish.  Good to
    ~1e-14 for |x| <= 3, which covers every oracle comparison below.
    """
    terms = []
    term = x
    n = 0
    while abs(term) > 1e-22:
        terms.append(term / (2 * n + 1))
        n += 1
        term *= -x * x / n
        if n > 200:
            break
    return 2.0 / math.sqrt(math.pi) * math.fsum(terms)


class TestErf:
    def test_zero(self):
        assert erf(0.0) == 0.0

    def test_value_at_one_vs_series_oracle(self):
        oracle = erf_series_oracle(1.0)
        assert abs(oracle - 0.8427007929497149) < 1e-14
        assert abs(erf(1.0) - oracle) < 1e-14

    def test_matches_series_oracle_on_grid(self):
        for x in np.linspace(-3.0, 3.0, 61):
            assert abs(erf(float(x)) - erf_series_oracle(float(x))) < 5e-14

    def test_odd(self):
        for x in np.linspace(0.0, 5.0, 101):
            assert erf(float(-x)) == -erf(float(x))

    def test_monotone_increasing(self):
        # Strict within [-5, 5]; beyond that double precision saturates and
        # adjacent values tie, so only non-decrease is checkable.
        xs = np.linspace(-5.0, 5.0, 1001)
        values = [erf(float(x)) for x in xs]
        assert all(b > a for a, b in zip(values, values[1:]))
        wide = [erf(float(x)) for x in np.linspace(-6.5, 6.5, 1001)]
        assert all(b >= a for a, b in zip(wide, wide[1:]))

    def test_range(self):
        for x in (-50.0, -3.0, 0.5, 40.0):
            assert -1.0 <= erf(x) <= 1.0


class TestErfInv:
    def test_zero(self):
        assert erfinv(0.0) == 0.0

    def test_round_trip_tolerance(self):
        worst = 0.0
        for y in np.linspace(-0.999999, 0.999999, 20001):
            y = float(y)
            worst = max(worst, abs(erf(erfinv(y)) - y))
        assert worst <= 1e-12

    def test_inverse_direction(self):
        for x in np.linspace(-3.0, 3.0, 301):
            x = float(x)
            assert abs(erfinv(erf(x)) - x) <= 1e-10 * max(1.0, abs(x))

    def test_odd(self):
        for y in (0.1, 0.5, 0.9, 0.99999):
            assert erfinv(-y) == pytest.approx(-erfinv(y), abs=1e-15)

    @pytest.mark.parametrize("bad", [1.0, -1.0, 1.5, -2.0, 7.0])
    def test_domain_error(self, bad):
        with pytest.raises(ErfInvDomain):
            erfinv(bad)


class TestNormalCdf:
    def test_standard_midpoint(self):
        assert normal_cdf(0.0) == pytest.approx(0.5, abs=1e-15)

    def test_location_scale(self):
        assert normal_cdf(2.0, mean=2.0, std=3.0) == pytest.approx(0.5, abs=1e-15)
        assert normal_cdf(1.0, mean=0.0, std=1.0) == pytest.approx(
            0.5 + 0.5 * erf(1.0 / math.sqrt(2.0)), abs=1e-15
        )

    def test_tail_stays_positive(self):
        # erfc-based evaluation keeps deep tails nonzero instead of rounding to 0.
        assert 0.0 < normal_cdf(-20.0) < 1e-80
