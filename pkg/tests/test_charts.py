import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from seqscores.charts import (CusumMean, CusumMeanConfig, CusumVariance, CusumVarianceConfig, Ewma, EwmaConfig,
                              cusum_variance_k, ewma_limit, sample_variance)
from seqscores.scoring import IndividualScorer
from conftest import WORKED_STREAM, WORKED_Z

scores = st.lists(st.floats(-5, 5), min_size=1, max_size=60)


class TestCusumMean:
    EXPECTED = [0, 0.4245, 0, 0, 0.2744, 1.4074, 1.9490, 3.2331, 2.7009, 2.5766]

    def test_worked_path(self):
        chart = CusumMean(0.25, 7.267)
        for z in WORKED_Z:
            chart.step(z)
        path = [round(v, 4) + 0.0 for _, v, _ in chart.verdict.statistic_path]
        assert path == self.EXPECTED
        assert not chart.verdict.signaled and chart.verdict.signal_step is None

    def test_worked_path_full_precision(self):
        chart = CusumMean(0.25, 7.267)
        for s in IndividualScorer().score_many(WORKED_STREAM):
            chart.step(s.z)
        path = [v for _, v, _ in chart.verdict.statistic_path]
        assert np.allclose(path, self.EXPECTED, atol=5e-4, rtol=0)

    def test_zero_stream(self):
        chart = CusumMean(0.5, 1.0)
        for _ in range(100):
            chart.step(0.0)
        assert chart.c_plus == 0.0 and not chart.verdict.signaled

    def test_one_step_exceedance(self):
        chart = CusumMean(0.25, 3.0)
        res = chart.step(3.0 + 0.25 + 1)
        assert res.signal and chart.verdict.signal_step == 1

    def test_lower(self):
        chart = CusumMean(0.5, 1.0, side="lower")
        chart.step(-1.0)
        res = chart.step(-1.5)
        assert res.statistic == -1.5 and res.limit == -1.0 and res.signal

    def test_no_reset_after_signal(self):
        chart = CusumMean(0.0, 1.0)
        for z in (2.0, 2.0, 2.0):
            chart.step(z)
        assert chart.verdict.signal_step == 1 and chart.c_plus == 6.0

    def test_change_point(self):
        chart = CusumMean(0.25, 100.0)
        for z in (0.0, -1.0, 0.5, 1.0, 2.0):
            chart.step(z)
        assert chart.change_point == 2

    @given(scores)
    def test_mirror(self, zs):
        a, b = CusumMean(0.0, 1e9, side="both"), CusumMean(0.0, 1e9, side="both")
        for z in zs:
            a.step(z)
            b.step(-z)
            assert a.c_plus == -b.c_minus and a.c_minus == -b.c_plus
            assert a.c_plus - abs(a.c_minus) == -(b.c_plus - abs(b.c_minus))

    def test_invalid(self):
        with pytest.raises(ValueError):
            CusumMean(0.25, 0.0)
        with pytest.raises(ValueError):
            CusumMean(-1.0, 1.0)
        with pytest.raises(ValueError):
            CusumMean(side="middle")


class TestCusumVariance:
    def test_identical_scores(self):
        chart = CusumVariance(0.793, -1.645)
        chart.step([0.3] * 5)
        assert chart.c_minus == pytest.approx(-0.793)

    def test_signal_at_batch_three(self):
        chart = CusumVariance(0.793, -1.645)
        results = [chart.step([1.0] * 10) for _ in range(3)]
        assert [r.signal for r in results] == [False, False, True]
        assert chart.c_minus == pytest.approx(-2.379)
        assert chart.verdict.signal_step == 3

    def test_variance_equal_to_k_never_signals(self):
        # two scores at +-d have sample variance 2 d^2
        k = 0.793
        d = math.sqrt(k / 2)
        chart = CusumVariance(k, -0.1)
        chart.step([0.0, 0.0])
        for _ in range(200):
            assert not chart.step([d, -d]).signal or chart.verdict.signal_step == 1
        assert chart.c_minus == pytest.approx(-k)

    def test_balanced_never_signals(self):
        k = 0.5
        d = math.sqrt(k / 2)
        chart = CusumVariance(k, -1e-9)
        for _ in range(500):
            chart.step([d, -d])
        assert not chart.verdict.signaled

    def test_change_point(self):
        chart = CusumVariance(1.0, -10.0)
        for s in ([0, 3], [0, 0.1], [0, 0.2], [0, 0]):
            chart.step(s)
        assert chart.change_point == 1

    def test_errors(self):
        with pytest.raises(ValueError):
            CusumVariance(0.793, 1.0)
        with pytest.raises(ValueError):
            sample_variance([1.0])


class TestCusumVarianceK:
    def test_reference_value(self):
        assert round(cusum_variance_k(1.0, 0.8), 3) == 0.793

    def test_symmetric(self):
        assert cusum_variance_k(0.8, 1.0) == pytest.approx(cusum_variance_k(1.0, 0.8), rel=1e-15)

    def test_limit(self):
        s = 1.3
        assert cusum_variance_k(s * (1 + 1e-6), s) == pytest.approx(s * s, rel=1e-5)

    def test_equal(self):
        with pytest.raises(ValueError):
            cusum_variance_k(1.0, 1.0)


class TestEwma:
    def test_asymptote(self):
        assert round(ewma_limit(10_000, 0.1, 2.714, 10), 4) == 0.1969

    def test_limits_increase_and_converge(self):
        lims = [ewma_limit(i, 0.1, 2.714, 10) for i in range(1, 501)]
        # strictly increasing until (1 - lam)^(2i) drops below double precision
        assert all(b > a for a, b in zip(lims[:150], lims[1:150]))
        assert all(b >= a for a, b in zip(lims, lims[1:]))
        assert abs(lims[-1] - 2.714 * math.sqrt(0.1 / 1.9) / math.sqrt(10)) < 1e-12

    def test_lambda_one(self):
        chart = Ewma(1.0, 2.0, m=4)
        chart.step([1, 2, 3, 4])
        res = chart.step([0, 0, 0, 2])
        assert res.statistic == 0.5 and res.limit == 1.0

    def test_zero_scores(self):
        chart = Ewma(0.2, 1.0, m=2)
        for _ in range(50):
            chart.step([0.0, 0.0])
        assert chart.u == 0.0 and not chart.verdict.signaled

    def test_rho_zero_signals_immediately(self):
        chart = Ewma(0.1, 0.0, m=1)
        assert chart.step(0.3).signal

    def test_errors(self):
        with pytest.raises(ValueError):
            Ewma(lam=0.0)
        with pytest.raises(ValueError):
            Ewma(m=2).step([1.0])


class TestEngines:
    def test_replay(self):
        zs = np.random.default_rng(1).standard_normal(200)
        paths = []
        for _ in range(2):
            chart = CusumMean(0.25, 4.0, side="both")
            for z in zs:
                chart.step(z)
            paths.append(chart.verdict.statistic_path)
        assert paths[0] == paths[1]

    @pytest.mark.parametrize("config", [CusumMeanConfig(0.25, 3.0), CusumMeanConfig(0.25, 3.0, "both"),
                                        CusumVarianceConfig(0.793, -1.0, 5), EwmaConfig(0.2, 2.0, 5)])
    def test_vectorised_matches_engine(self, config):
        rng = np.random.default_rng(4)
        x = config.draw_normal(rng, (30, 80))
        first, _ = config.run_lengths(x[:, :40])
        first2, _ = config.run_lengths(x[:, :40])
        assert np.array_equal(first, first2)
        for r in range(30):
            engine = config.engine()
            for t in range(80):
                if isinstance(config, CusumVarianceConfig):
                    # a batch whose sample variance equals the drawn summary
                    d = math.sqrt(x[r, t] / 2)
                    engine.step([d, -d])
                else:
                    engine.step([x[r, t]] * config.m if isinstance(config, EwmaConfig) else x[r, t])
            expect = engine.verdict.signal_step - 1 if engine.verdict.signaled else -1
            full, _ = config.run_lengths(x[r:r + 1])
            assert full[0] == expect

    def test_vectorised_state_carries(self):
        config = EwmaConfig(0.1, 1.5, 10)
        x = config.draw_normal(np.random.default_rng(9), (50, 100))
        whole, _ = config.run_lengths(x)
        a, state = config.run_lengths(x[:, :37])
        b, _ = config.run_lengths(x[:, 37:], state)
        merged = np.where(a >= 0, a, np.where(b >= 0, b + 37, -1))
        assert np.array_equal(whole, merged)
