import numpy as np
import pytest

from seqscores.calibration import (ArlEstimate, CalibrationError, CalibrationTarget, StreamModel, calibrate_limit,
                                   check_compatible, compare_sns_vs_normal, estimate_arl)
from seqscores.charts import CusumMeanConfig, CusumVarianceConfig, EwmaConfig
from seqscores.normal import phi_inverse


class TestEstimate:
    @pytest.mark.parametrize("config, lo, hi", [
        (CusumMeanConfig(0.25, 5.597), 180, 220),
        (EwmaConfig(0.1, 2.714, 10), 333, 407),
        (CusumVarianceConfig(0.793, -1.645, 10), 333, 407),
    ])
    def test_bands(self, config, lo, hi):
        est = estimate_arl(config, replications=4000, seed=3)
        assert lo <= est.mean_rl <= hi
        assert est.valid and est.std_error > 0

    def test_geometric_run_length(self):
        # lambda = 1, m = 1: each step signals independently with probability 2(1 - Phi(rho))
        rho = float(phi_inverse(0.9))
        est = estimate_arl(EwmaConfig(1.0, rho, 1), replications=20_000, seed=1)
        assert est.mean_rl == pytest.approx(5.0, rel=0.03)

    def test_reproducible(self):
        a = estimate_arl(CusumMeanConfig(0.5, 3.0), replications=1000, seed=9)
        b = estimate_arl(CusumMeanConfig(0.5, 3.0), replications=1000, seed=9)
        assert a == b and a.run_lengths == b.run_lengths
        c = estimate_arl(CusumMeanConfig(0.5, 3.0), replications=1000, seed=10)
        assert c.run_lengths != a.run_lengths

    def test_parallel_degree_irrelevant(self):
        cfg = CusumMeanConfig(0.5, 3.0)
        serial = estimate_arl(cfg, replications=1500, seed=2)
        parallel = estimate_arl(cfg, replications=1500, seed=2, n_jobs=3)
        assert serial.run_lengths == parallel.run_lengths
        model = StreamModel("sns", "exponential")
        assert estimate_arl(cfg, model, 130, seed=2).run_lengths == \
            estimate_arl(cfg, model, 130, seed=2, n_jobs=2).run_lengths

    @pytest.mark.parametrize("make", [lambda h: CusumMeanConfig(0.25, h), lambda r: EwmaConfig(0.1, r, 10)])
    def test_crn_monotone(self, make):
        limits = [1.0, 1.5, 2.0, 2.7, 3.5]
        runs = [np.array(estimate_arl(make(v), replications=600, seed=4, cap=5000).run_lengths) for v in limits]
        for a, b in zip(runs, runs[1:]):
            assert np.all(b >= a)

    def test_crn_monotone_variance(self):
        runs = [np.array(estimate_arl(CusumVarianceConfig(0.793, h, 10), replications=600, seed=4).run_lengths)
                for h in (-0.5, -1.0, -1.645, -2.5)]
        for a, b in zip(runs, runs[1:]):
            assert np.all(b >= a)

    def test_censoring(self):
        est = estimate_arl(EwmaConfig(0.1, 1e6, 1), replications=100, cap=50)
        assert est.censored_fraction == 1.0 and not est.valid and est.mean_rl == 50

    def test_shift_shortens_runs(self):
        cfg = CusumMeanConfig(0.25, 5.597)
        ic = estimate_arl(cfg, replications=1000, seed=5)
        oc = estimate_arl(cfg, StreamModel(shift=1.0, change_point=1), replications=1000, seed=5)
        assert oc.mean_rl < ic.mean_rl / 5

    def test_from_run_lengths(self):
        est = ArlEstimate.from_run_lengths([1, 2, 3, 10], cap=10)
        assert est.mean_rl == 4.0 and est.censored_fraction == 0.25 and est.replications == 4

    def test_errors(self):
        with pytest.raises(ValueError):
            estimate_arl(CusumMeanConfig(), replications=10)
        with pytest.raises(ValueError):
            StreamModel("sns", "gamma")


class TestSns:
    def test_distribution_free_individual(self):
        cfg = CusumMeanConfig(0.25, 3.0)
        runs = {d: estimate_arl(cfg, StreamModel("sns", d), 120, seed=7).run_lengths
                for d in ("normal", "exponential", "cauchy", "uniform")}
        assert len(set(runs.values())) == 1

    def test_distribution_free_batched(self):
        cfg = CusumVarianceConfig(0.793, -1.0, 4)
        a = estimate_arl(cfg, StreamModel("sns", "normal", "batched"), 100, seed=1).run_lengths
        b = estimate_arl(cfg, StreamModel("sns", "lognormal", "batched"), 100, seed=1).run_lengths
        assert a == b

    def test_distribution_free_conditional(self):
        cfg = EwmaConfig(0.2, 2.0, 5)
        kw = dict(variant="conditional-batched", f_theta=0.3)
        a = estimate_arl(cfg, StreamModel("sns", "normal", **kw), 100, seed=1).run_lengths
        b = estimate_arl(cfg, StreamModel("sns", "exponential", **kw), 100, seed=1).run_lengths
        assert a == b

    def test_compare_reports_ratio(self):
        cmp = compare_sns_vs_normal(CusumMeanConfig(0.25, 3.0), "exponential", replications=150, seed=3)
        assert cmp.ratio == cmp.sns.mean_rl / cmp.normal.mean_rl > 0

    def test_compare_censored(self):
        cmp = compare_sns_vs_normal(EwmaConfig(0.1, 1e6, 1), replications=100, cap=30)
        assert not cmp.normal.valid and not cmp.sns.valid

    def test_incompatible(self):
        with pytest.raises(ValueError):
            estimate_arl(CusumVarianceConfig(), StreamModel("sns", variant="individual"), 100)
        with pytest.raises(ValueError):
            check_compatible(CusumMeanConfig(), "batched", 5)
        with pytest.raises(ValueError):
            check_compatible(CusumVarianceConfig(m=10), "batched", 5)
        with pytest.raises(ValueError):
            check_compatible(EwmaConfig(m=10), "individual", None)
        check_compatible(EwmaConfig(m=1), "conditional-individual", None)


class TestCalibrate:
    def test_ewma_two(self):
        # ARL 2 means per-step signal probability 1/2, i.e. rho = Phi^-1(0.75)
        rho, est = calibrate_limit(CalibrationTarget(EwmaConfig(1.0, 1.0, 1), 2.0), seed=1,
                                   bracket=(0.1, 3.0), replications=20_000)
        assert abs(rho - 0.6745) < 0.03
        assert abs(est.mean_rl - 2) / 2 <= 0.02

    @pytest.mark.slow
    def test_cusum_mean_500(self):
        h, est = calibrate_limit(CalibrationTarget(CusumMeanConfig(0.25), 500), seed=1, replications=4000)
        assert abs(h - 7.267) / 7.267 <= 0.05
        assert abs(est.mean_rl - 500) / 500 <= 0.02

    @pytest.mark.slow
    def test_cusum_variance_370(self):
        h, _ = calibrate_limit(CalibrationTarget(CusumVarianceConfig(0.793, m=10), 370), seed=1,
                               replications=4000)
        assert abs(h + 1.645) / 1.645 <= 0.07

    def test_bad_bracket(self):
        with pytest.raises(CalibrationError, match="does not straddle"):
            calibrate_limit(CalibrationTarget(CusumMeanConfig(0.25), 500), bracket=(1.0, 2.0), replications=200)

    def test_target_must_exceed_one(self):
        with pytest.raises(ValueError):
            CalibrationTarget(CusumMeanConfig(), 1.0)
