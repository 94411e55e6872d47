import math
from collections import Counter

import numpy as np
import pytest

from celldiv.geometry import (
    Box,
    ConstantRule,
    GeometryError,
    IntrinsicVolumeRule,
    Mondrian,
    SumOfSidesRule,
)
from celldiv.hyperplanes import (
    build_zero_cell_chain,
    explosion_diagnostic,
    sample_axis_chain,
    sample_marked_hyperplanes,
)
from celldiv import stats as st
from celldiv.streams import stream

PHI2 = Mondrian((0.5, 0.5))


class TestMarkedHyperplanes:
    def test_mean_count(self):
        # unit cube with uniform weights has hit rate 1, so the mean count
        # over the interval (0, 2) is 2
        cube = Box((0, 0, 0), (1, 1, 1))
        phi = Mondrian((1 / 3, 1 / 3, 1 / 3))
        n_rep = 4000
        counts = [
            len(sample_marked_hyperplanes(cube, 0.0, 2.0, phi, stream(55, 0, i)))
            for i in range(n_rep)
        ]
        sigma = math.sqrt(2.0 / n_rep)
        assert abs(np.mean(counts) - 2.0) < 4 * sigma

    def test_invalid_interval(self):
        cube = Box((0, 0, 0), (1, 1, 1))
        phi = Mondrian((1 / 3, 1 / 3, 1 / 3))
        with pytest.raises(GeometryError):
            sample_marked_hyperplanes(cube, 1.0, 1.0, phi, stream(55, 1))
        with pytest.raises(GeometryError):
            sample_marked_hyperplanes(cube, -0.5, 1.0, phi, stream(55, 1))

    def test_axis_weighting_and_order(self):
        z = Box((0, 0), (2, 3))
        marked = sample_marked_hyperplanes(z, 0.0, 400.0, PHI2, stream(55, 2))
        births = [m.birth for m in marked]
        assert births == sorted(births)
        frac = np.mean([m.plane.axis == 1 for m in marked])
        sigma = math.sqrt(0.6 * 0.4 / len(marked))
        assert abs(frac - 0.6) < 4 * sigma


class TestAxisChain:
    def test_first_position_mean(self):
        # x_0 is exponential with parameter p_k
        n = 20_000
        xs = [sample_axis_chain(0, 1, 0.5, 1, stream(55, 3, i)).positions[0] for i in range(n)]
        sigma = 2.0 / math.sqrt(n)
        assert abs(np.mean(xs) - 2.0) < 4 * sigma

    def test_second_time_mean(self):
        # t_1 uniform on (0, t_0) with t_0 uniform on (0,1): mean 1/4
        n = 20_000
        ts = [sample_axis_chain(0, 1, 0.5, 2, stream(55, 4, i)).times[1] for i in range(n)]
        var = 1.0 / 9.0 - 1.0 / 16.0
        sigma = math.sqrt(var / n)
        assert abs(np.mean(ts) - 0.25) < 4 * sigma

    def test_monotone(self):
        ch = sample_axis_chain(1, -1, 0.3, 200, stream(55, 5))
        assert all(a < b for a, b in zip(ch.positions, ch.positions[1:]))
        assert all(a > b for a, b in zip(ch.log_times, ch.log_times[1:]))

    def test_validation(self):
        with pytest.raises(GeometryError):
            sample_axis_chain(0, 0, 0.5, 3, stream(55, 6))
        with pytest.raises(GeometryError):
            sample_axis_chain(0, 1, 0.5, 0, stream(55, 6))


class TestZeroCellChain:
    def test_top_time_and_ratio_law(self):
        # the merged top time is the maximum of 2d uniforms (cdf r^(2d)),
        # and so is every backward time ratio
        n = 4000
        t0s = np.empty(n)
        ratios = np.empty(n)
        for i in range(n):
            times = build_zero_cell_chain(PHI2, 2, stream(55, 7, i)).times
            t0s[i] = times[0]
            ratios[i] = times[1] / times[0]
        assert st.ks_test(t0s, st.PowerMax(4)).passed
        assert st.ks_test(ratios, st.PowerMax(4)).passed

    def test_growth_and_origin(self):
        chain = build_zero_cell_chain(PHI2, 300, stream(55, 8))
        sos = chain.sum_of_sides()
        assert np.all(np.diff(sos) > 0)
        assert np.all(np.diff(chain.log_times) < 0)
        for i in (0, 100, 299):
            b = chain.box(i)
            assert b.contains((0.0, 0.0), strict=True)
        # nesting: each box contains the previous one
        prev = chain.box(0)
        for i in range(1, 300):
            cur = chain.box(i)
            assert all(cl <= pl for cl, pl in zip(cur.lower, prev.lower))
            assert all(cu >= pu for cu, pu in zip(cur.upper, prev.upper))
            prev = cur

    def test_merged_times_are_union_of_chain_times(self):
        # no event is lost: the merged jump times are exactly the union of
        # the consumed prefixes of the four directed chains
        chain = build_zero_cell_chain(PHI2, 120, stream(55, 9))
        merged = sorted(chain.log_times, reverse=True)
        consumed = Counter(chain.labels)
        pooled = []
        for key, ch in chain.axis_chains.items():
            pooled.extend(ch.log_times[: consumed.get(key, 0)])
        assert len(pooled) == len(merged)
        assert sorted(pooled, reverse=True) == merged

    def test_label_symmetry(self):
        # with uniform weights all 2d directed labels are equally likely
        counts = Counter()
        n_chains = 400
        per = 30
        for i in range(n_chains):
            counts.update(build_zero_cell_chain(PHI2, per, stream(55, 10, i)).labels)
        total = n_chains * per
        p = 1.0 / 4.0
        sigma = math.sqrt(p * (1 - p) * total)
        for key in ((0, 1), (0, -1), (1, 1), (1, -1)):
            assert abs(counts[key] - p * total) < 4 * sigma


class TestExplosionDiagnostic:
    def test_constant_rule_diverges_exactly(self):
        chain = build_zero_cell_chain(PHI2, 400, stream(55, 11))
        rep = explosion_diagnostic(chain, ConstantRule(1.0))
        assert rep.verdict == "diverging"
        assert all(rep.partial_sums[j] == j + 1 for j in range(rep.depth))

    def test_sum_of_sides_converges(self):
        chain = build_zero_cell_chain(PHI2, 400, stream(55, 12))
        rep = explosion_diagnostic(chain, SumOfSidesRule())
        assert rep.verdict == "converging"
        assert np.all(np.diff(rep.partial_sums) >= 0)
        # increments are bounded by the first inverse rate (sizes grow backwards)
        assert np.all(rep.increments <= rep.increments[0] + 1e-15)

    def test_volume_rule_converges(self):
        chain = build_zero_cell_chain(PHI2, 400, stream(55, 13))
        assert explosion_diagnostic(chain, IntrinsicVolumeRule(2)).verdict == "converging"

    def test_shallow_chain_inconclusive(self):
        chain = build_zero_cell_chain(PHI2, 1, stream(55, 14))
        assert explosion_diagnostic(chain, ConstantRule(1.0)).verdict == "inconclusive"
