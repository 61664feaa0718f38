import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from seqscores.normal import DomainError, _ad_limit_cdf, anderson_darling_n01, density, phi, phi_inverse
from conftest import WORKED_Z


def mp_phi(z):
    # independent high-precision oracle
    with mpmath.workdps(40):
        return float(mpmath.ncdf(z))


class TestPhi:
    def test_center(self):
        assert phi(0.0) == 0.5

    def test_against_high_precision(self):
        for z in (-8.0, -3.3, -1.0, -0.1, 0.4, 1.959964, 2.5, 6.0):
            assert abs(phi(z) - mp_phi(z)) <= 1e-15 * max(1.0, 1.0 / mp_phi(z))

    def test_975_quantile(self):
        with mpmath.workdps(40):
            root = float(mpmath.findroot(lambda z: mpmath.ncdf(z) - mpmath.mpf("0.975"), 1.96))
        assert abs(root - 1.959964) < 1e-6
        assert round(phi(1.959964), 6) == 0.975

    def test_quartile(self):
        assert round(phi(-0.6745), 4) == 0.25

    def test_rejects_non_finite(self):
        with pytest.raises(DomainError):
            phi(float("nan"))
        with pytest.raises(DomainError):
            phi(np.array([0.0, np.inf]))

    def test_density(self):
        assert density(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))

    @given(st.floats(-30, 30), st.floats(-30, 30))
    def test_monotone(self, a, b):
        lo, hi = min(a, b), max(a, b)
        assert phi(lo) <= phi(hi)


class TestPhiInverse:
    def test_examples(self):
        assert phi_inverse(0.5) == 0.0
        assert round(phi_inverse(0.75), 4) == 0.6745
        assert round(phi_inverse(0.9375), 4) == 1.5341

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            phi_inverse(p)

    def test_round_trip_grid(self):
        p = np.concatenate([np.logspace(-10, np.log10(0.5), 50_000), 1 - np.logspace(-10, np.log10(0.5), 50_000)])
        err = np.abs(phi(phi_inverse(p)) - p)
        assert err.max() <= 1e-12

    def test_strictly_increasing(self):
        p = np.linspace(1e-10, 1 - 1e-10, 100_001)
        assert np.all(np.diff(phi_inverse(p)) > 0)

    def test_scalar_matches_array(self):
        p = np.array([1e-9, 0.01, 0.3, 0.5, 0.77, 0.999])
        assert np.allclose(phi_inverse(p), [phi_inverse(float(x)) for x in p], rtol=0, atol=1e-15)

    @given(st.floats(0.01, 0.99))
    def test_odd_symmetry(self, p):
        # away from the tails the rounding of 1 - p costs less than 1e-12 in z
        assert abs(phi_inverse(1 - p) + phi_inverse(p)) <= 1e-12

    def test_odd_symmetry_dyadic(self):
        # dyadic p make 1 - p exact, so the identity can be checked to 1e-12
        for k in range(1, 1024):
            p = k / 2048
            assert abs(phi_inverse(1 - p) + phi_inverse(p)) <= 1e-12


class TestAndersonDarling:
    def test_limit_cdf_known_points(self):
        # standard case-0 critical values
        assert 1 - _ad_limit_cdf(2.492) == pytest.approx(0.05, abs=1e-3)
        assert 1 - _ad_limit_cdf(1.933) == pytest.approx(0.10, abs=1e-3)
        assert 1 - _ad_limit_cdf(3.857) == pytest.approx(0.01, abs=1e-3)

    def test_worked_scores_not_rejected(self):
        res = anderson_darling_n01(WORKED_Z)
        assert res.statistic >= 0
        assert res.p_value > 0.05
        assert res.n == 10

    def test_normal_sample(self):
        res = anderson_darling_n01(np.random.default_rng(3).standard_normal(1000))
        assert 0.001 < res.p_value < 1

    def test_uniform_sample_rejected(self):
        res = anderson_darling_n01(np.random.default_rng(3).random(1000))
        assert res.p_value < 0.001

    def test_too_small(self):
        with pytest.raises(ValueError):
            anderson_darling_n01([0.1] * 7)

    def test_ties_allowed(self):
        res = anderson_darling_n01([0.0] * 4 + [1.0] * 4)
        assert 0 <= res.p_value <= 1

    def test_null_uniformity(self):
        rng = np.random.default_rng(2024)
        rejected = sum(anderson_darling_n01(rng.standard_normal(200)).p_value < 0.05 for _ in range(2000))
        assert 0.03 <= rejected / 2000 <= 0.07
