import math

import numpy as np
import pytest
from scipy import special as sc

from celldiv.division import run_in_window, snapshot_at
from celldiv.geometry import Box, ConstantRule, GeometryError, IntrinsicVolumeRule, Mondrian
from celldiv import stats as st
from celldiv.streams import stream


class TestKolmogorov:
    def test_sf_matches_scipy(self):
        for lam in (0.3, 0.5, 0.8, 1.0, 1.5, 2.0):
            assert st.kolmogorov_sf(lam) == pytest.approx(float(sc.kolmogorov(lam)), abs=1e-10)

    def test_calibration_under_null(self):
        # with correct p-values the rejection rate at level 0.05 is 0.05
        reps = 200
        rejections = 0
        for i in range(reps):
            x = stream(31, 0, i).exponential(0.5, size=10_000)
            if st.ks_test(x, st.Exp(2.0), level=0.05).p_value < 0.05:
                rejections += 1
        sigma = math.sqrt(0.05 * 0.95 / reps)
        assert abs(rejections / reps - 0.05) < 4 * sigma

    def test_two_sample_identical_is_zero(self):
        x = stream(31, 1).normal(size=500)
        res = st.ks_test(x, st.Empirical(x))
        assert res.statistic == 0.0
        assert res.p_value == 1.0

    def test_powermax_matches_max_of_uniforms(self):
        rng = stream(31, 2)
        x = rng.random((5000, 4)).max(axis=1)
        assert st.ks_test(x, st.PowerMax(4)).passed

    def test_gamma_cdf_against_closed_form(self):
        # Gamma(2, r) has cdf 1 - exp(-r x)(1 + r x)
        rng = stream(31, 3)
        x = rng.gamma(2.0, 1.0 / 3.0, size=4000)
        assert st.ks_test(x, st.Gamma(2.0, 3.0)).passed

    def test_needs_enough_samples(self):
        with pytest.raises(GeometryError):
            st.ks_test([1.0] * 10, st.Exp(1.0))

    def test_deterministic(self):
        x = stream(31, 4).exponential(size=1000)
        assert st.ks_test(x, st.Exp(1.0)) == st.ks_test(x, st.Exp(1.0))


class TestCvReport:
    def test_exponential_is_one(self):
        x = stream(31, 5).exponential(size=100_000)
        assert st.cv_report(x, bootstrap=100).cv == pytest.approx(1.0, abs=0.05)

    def test_product_of_two_exponentials_is_three(self):
        rng = stream(31, 6)
        x = rng.exponential(size=100_000) * rng.exponential(size=100_000)
        assert st.cv_report(x, bootstrap=100).cv == pytest.approx(3.0, abs=0.15)

    def test_constant_is_zero(self):
        assert st.cv_report(np.full(500, 2.5)).cv == 0.0

    def test_validation(self):
        with pytest.raises(GeometryError):
            st.cv_report(np.ones(50))
        with pytest.raises(GeometryError):
            st.cv_report(np.zeros(200) - 1.0)

    def test_deterministic(self):
        x = stream(31, 7).exponential(size=1000)
        assert st.cv_report(x) == st.cv_report(x)


class TestPoissonCountTest:
    def test_poisson_counts_pass(self):
        counts = stream(31, 8).poisson(50.0, size=2000)
        assert st.poisson_count_test(counts, 50.0).passed

    def test_all_zero_against_zero_mean(self):
        assert st.poisson_count_test(np.zeros(300), 0.0).passed

    def test_yule_counts_overdispersed(self):
        # binary birth process counts at t=1 have mean e-1 but a geometric
        # law, so they fail the Poisson(e-1) test
        sq = Box((0.0, 0.0), (1.0, 1.0))
        phi = Mondrian((0.5, 0.5))
        counts = [
            run_in_window(sq, ConstantRule(1.0), phi, 1.0, stream(31, 9, i)).n_events()
            for i in range(400)
        ]
        res = st.poisson_count_test(np.array(counts, dtype=float), math.e - 1.0)
        assert not res.passed
        assert res.statistic > 1.5  # strongly overdispersed

    def test_needs_enough_replicates(self):
        with pytest.raises(GeometryError):
            st.poisson_count_test(np.ones(100), 1.0)


@pytest.fixture(scope="module")
def snapshot():
    sq = Box((0.0, 0.0), (1.0, 1.0))
    phi = Mondrian((0.5, 0.5))
    log = run_in_window(sq, IntrinsicVolumeRule(2), phi, 40.0, stream(31, 10))
    return snapshot_at(log, 40.0), sq


class TestTypicalCellSampling:
    def test_zero_margin_keeps_all(self, snapshot):
        snap, sq = snapshot
        assert len(st.typical_cell_samples(snap, sq, 0.0)) == len(snap.cells)

    def test_straddling_cell_included_whole(self, snapshot):
        snap, sq = snapshot
        margin = 0.1
        sampled = st.typical_cell_samples(snap, sq, margin)
        # the rule keys on the reference point only: cells reaching past the
        # eroded window stay in the sample, uncut
        for c in sampled:
            lo = c.geometry.lower
            assert all(a + margin <= x <= b - margin for a, x, b in zip(sq.lower, lo, sq.upper))
        assert any(c.geometry.upper[0] > 1.0 - margin for c in sampled)

    def test_margin_validation(self, snapshot):
        snap, sq = snapshot
        with pytest.raises(GeometryError):
            st.typical_cell_samples(snap, sq, 0.5)
        with pytest.raises(GeometryError):
            st.typical_cell_samples(snap, sq, -0.1)

    def test_one_dim_minus_sampling_mean(self):
        # 1-d calibration: interval splitting at rate t has typical length
        # 1/t; the minus-sampled mean must agree within 3 bootstrap SE
        seg = Box((0.0,), (50.0,))
        phi = Mondrian((1.0,))
        t = 3.0
        log = run_in_window(seg, IntrinsicVolumeRule(1), phi, t, stream(31, 11))
        vols = st.minus_sampled_volumes(snapshot_at(log, t), seg, 1.0)
        rng = stream(31, 12)
        boot = np.array([np.mean(rng.choice(vols, size=len(vols))) for _ in range(1000)])
        assert abs(np.mean(vols) - 1.0 / t) < 3 * np.std(boot)


class TestScalingCheck:
    @staticmethod
    def gamma_sampler(t, rng):
        # stand-in for a zero-cell volume with the Gamma(2, t) law
        return rng.gamma(2.0) / t

    def test_equal_times_sanity(self):
        res = st.scaling_check(self.gamma_sampler, 2.0, 2.0, 2000, stream(31, 13))
        assert res.passed

    def test_scaled_passes_unscaled_fails(self):
        assert st.scaling_check(self.gamma_sampler, 1.0, 4.0, 2000, stream(31, 14)).passed
        control = st.scaling_check(self.gamma_sampler, 1.0, 4.0, 2000, stream(31, 15), scale=False)
        assert not control.passed

    def test_needs_enough_reps(self):
        with pytest.raises(GeometryError):
            st.scaling_check(self.gamma_sampler, 1.0, 4.0, 100, stream(31, 16))
