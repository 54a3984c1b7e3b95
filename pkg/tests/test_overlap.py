import math

import numpy as np
import pytest
from scipy import integrate, stats

from ovlstat import (
    DegenerateVariance,
    InvalidInput,
    OverlapMethod,
    build_common_histograms,
    ecdf,
    gssmd,
    ovl_histogram,
    ovl_kde,
    ovl_parametric_normal,
    sturges_bins,
)
from ovlstat.overlap import normal_cdf

# quad of min(N(0,1), N(2,1)) pdfs; frozen from the oracle below
OVL_SHIFT2 = 0.31731050786291415


def quad_min_normal_pdfs(d, s=1.0):
    f = lambda x: min(stats.norm.pdf(x, 0, s), stats.norm.pdf(x, d, s))  # noqa: E731
    mid = d / 2
    return integrate.quad(f, -np.inf, mid)[0] + integrate.quad(f, mid, np.inf)[0]


def test_frozen_oracle_value():
    assert quad_min_normal_pdfs(2.0) == pytest.approx(OVL_SHIFT2, abs=1e-10)


class TestSturges:
    @pytest.mark.parametrize("n,k", [(1024, 11), (1000, 11), (1, 1), (2, 2), (3, 3), (100, 8), (10**5, 18)])
    def test_values(self, n, k):
        assert sturges_bins(n) == k

    def test_matches_ceil_formula(self):
        for n in range(1, 5000):
            assert sturges_bins(n) == math.ceil(1 + math.log2(n) - 1e-12)

    def test_zero(self):
        with pytest.raises(InvalidInput):
            sturges_bins(0)


class TestCommonHistograms:
    def test_identical(self):
        ha, hb = build_common_histograms([0, 1, 2, 3], [0, 1, 2, 3], 2)
        np.testing.assert_array_equal(ha.masses, [0.5, 0.5])
        np.testing.assert_array_equal(hb.masses, [0.5, 0.5])
        np.testing.assert_array_equal(ha.edges, hb.edges)

    def test_disjoint(self):
        ha, hb = build_common_histograms([0, 0, 0], [1, 1, 1], 2)
        np.testing.assert_array_equal(ha.masses, [1, 0])
        np.testing.assert_array_equal(hb.masses, [0, 1])

    def test_zero_range(self):
        ha, hb = build_common_histograms([5, 5, 5], [5, 5, 5], 4)
        assert ha.bins == 1
        np.testing.assert_array_equal(ha.masses, [1])
        np.testing.assert_array_equal(hb.masses, [1])
        assert ha.edges[0] < 5 < ha.edges[1]

    def test_invariants(self, rng):
        for _ in range(100):
            a, b = rng.normal(0, 1, 50), rng.normal(1, 2, 70)
            k = int(rng.integers(1, 30))
            ha, hb = build_common_histograms(a, b, k)
            assert ha.masses.sum() == pytest.approx(1, abs=1e-9)
            assert hb.masses.sum() == pytest.approx(1, abs=1e-9)
            assert np.all(np.diff(ha.edges) > 0)
            assert ha.edges[0] == min(a.min(), b.min())
            assert ha.edges[-1] == max(a.max(), b.max())

    def test_matches_numpy_histogram(self, rng):
        a, b = rng.normal(0, 1, 500), rng.normal(0.5, 1, 400)
        ha, hb = build_common_histograms(a, b, 9)
        ref, _ = np.histogram(a, bins=ha.edges)
        np.testing.assert_allclose(ha.masses, ref / a.size)


class TestOvlHistogram:
    def test_identical(self, rng):
        x = rng.standard_normal(100)
        assert ovl_histogram(x, x).ovl == 1.0

    def test_disjoint(self):
        assert ovl_histogram([0, 0, 0], [10, 10, 10], 2).ovl == 0.0

    def test_auto_bins_use_smaller_group(self, rng):
        est = ovl_histogram(rng.standard_normal(1000), rng.standard_normal(100))
        assert est.params["bins"] == sturges_bins(100)
        assert est.method is OverlapMethod.HISTOGRAM

    def test_large_sample_accuracy(self):
        r = np.random.default_rng(2)
        a, b = r.normal(0, 1, 10**5), r.normal(2, 1, 10**5)
        assert ovl_histogram(a, b).ovl == pytest.approx(OVL_SHIFT2, abs=0.03)

    def test_bad_bins(self):
        with pytest.raises(InvalidInput):
            ovl_histogram([1, 2], [3, 4], 0)


class TestOvlParametric:
    def test_equal_means(self):
        assert ovl_parametric_normal([0, 1, 2], [1, 0, 2]).ovl == 1.0

    def test_shift_two(self):
        # means 0 and 2, pooled sd exactly 1
        a, b = [-1.0, 0.0, 1.0], [1.0, 2.0, 3.0]
        est = ovl_parametric_normal(a, b)
        assert est.params["pooled_sd"] == 1.0
        assert est.ovl == pytest.approx(OVL_SHIFT2, abs=1e-12)

    def test_shift_ten(self):
        est = ovl_parametric_normal([-1.0, 0.0, 1.0], [9.0, 10.0, 11.0])
        assert est.ovl == pytest.approx(5.733031437583611e-07, rel=1e-6)

    def test_normal_cdf_accuracy(self):
        for x in np.linspace(-8, 8, 161):
            assert normal_cdf(x) == pytest.approx(stats.norm.cdf(x), rel=1e-12, abs=1e-300)

    def test_degenerate(self):
        with pytest.raises(DegenerateVariance):
            ovl_parametric_normal([1, 1], [2, 2])

    def test_too_small(self):
        with pytest.raises(InvalidInput):
            ovl_parametric_normal([1], [2, 3])

    def test_monotone_in_shift(self):
        base = np.array([-1.0, 0.0, 1.0])
        vals = [ovl_parametric_normal(base, base + d).ovl for d in np.linspace(0, 6, 25)]
        assert all(x > y for x, y in zip(vals, vals[1:]))


class TestOvlKde:
    def test_identical(self, rng):
        x = rng.standard_normal(200)
        assert ovl_kde(x, x).ovl == pytest.approx(1.0, abs=1e-9)

    def test_disjoint_clusters(self, rng):
        est = ovl_kde(rng.normal(0, 1, 500), rng.normal(100, 1, 500))
        assert est.ovl < 1e-3

    def test_accuracy(self):
        r = np.random.default_rng(4)
        est = ovl_kde(r.normal(0, 1, 10**4), r.normal(2, 1, 10**4))
        assert est.ovl == pytest.approx(OVL_SHIFT2, abs=0.03)
        assert est.params["grid_points"] == 512

    def test_fixed_bandwidth(self, rng):
        est = ovl_kde(rng.normal(0, 1, 100), rng.normal(1, 1, 100), bandwidth=0.3)
        assert est.params["bandwidth_a"] == est.params["bandwidth_b"] == 0.3

    @pytest.mark.parametrize("h", [0, -1.0, math.nan])
    def test_bad_bandwidth(self, h):
        with pytest.raises(InvalidInput):
            ovl_kde([0, 1, 2], [1, 2, 3], bandwidth=h)


class TestGssmd:
    def test_identical(self, rng):
        x = rng.standard_normal(100)
        for m in ("histogram", "parametric", "kde"):
            assert gssmd(x, x, method=m) == pytest.approx(0, abs=1e-9)

    def test_saturation_at_shift_ten(self):
        r = np.random.default_rng(5)
        assert gssmd(r.normal(10, 1, 1000), r.normal(0, 1, 1000)) == pytest.approx(1, abs=0.02)

    def test_swap_negates(self, rng):
        a, b = rng.normal(1, 1, 300), rng.normal(0, 1, 300)
        for m in ("histogram", "parametric", "kde"):
            assert gssmd(b, a, method=m) == -gssmd(a, b, method=m)

    def test_tie_counts_as_positive(self):
        assert gssmd([0, 2], [1, 1], bins=2) >= 0

    def test_unknown_method(self):
        with pytest.raises(InvalidInput):
            gssmd([1, 2], [3, 4], method="nope")

    def test_mean_increases_with_shift(self):
        r = np.random.default_rng(6)
        means = []
        for d in (0, 1, 2, 5, 10):
            vals = [gssmd(r.normal(d, 1, 1000), r.normal(0, 1, 1000)) for _ in range(200)]
            means.append(np.mean(vals))
        assert all(x < y for x, y in zip(means, means[1:]))

    def test_estimators_agree_on_large_normal(self):
        r = np.random.default_rng(8)
        for d in (0, 1, 2, 3):
            a, b = r.normal(d, 1, 10**5), r.normal(0, 1, 10**5)
            diff = ovl_histogram(a, b).ovl - ovl_parametric_normal(a, b).ovl
            assert abs(diff) < 0.05


class TestEcdf:
    def test_count(self):
        assert ecdf([1, 2, 3])(2) == pytest.approx(2 / 3)

    def test_bounds(self):
        f = ecdf([1, 2, 3])
        assert f(0.999) == 0
        assert f(3) == 1
        assert f(1e9) == 1

    def test_uniform_ks(self):
        x = np.random.default_rng(9).uniform(size=1000)
        f = ecdf(x)
        s = np.sort(x)
        i = np.arange(1, 1001)
        # sup over both sides of each jump
        d = max(np.max(i / 1000 - s), np.max(s - (i - 1) / 1000))
        assert d < 0.06
        np.testing.assert_allclose(f(s), i / 1000)

    def test_quantile(self):
        f = ecdf(np.arange(1, 101))
        assert f.quantile(0.95) == 95
        assert f.quantile(0.0) == 1
        assert f.quantile(1.0) == 100
