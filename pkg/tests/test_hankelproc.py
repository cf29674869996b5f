import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from hankeldet.errors import DomainError, OutOfStripError
from hankeldet.hankelproc import (
    GROUPS,
    ProcessParams,
    all_terms,
    beta_layout,
    cumulant_bound_check,
    draw_pool,
    exact_cgf,
    exact_cgf_strip,
    exact_covariance,
    exact_cumulant,
    exact_mean,
    floor_index,
    group_cumulants,
    sample_path,
    small_instance_oracle,
)
from hankeldet.specfun import polygamma
from hankeldet.streams import child_stream


def fd_derivative(f, m, h):
    def central(step):
        return sum((-1) ** k * math.comb(m, k) * f((m / 2 - k) * step) for k in range(m + 1)) / step**m

    return (4 * central(h / 2) - central(h)) / 3


def beta_fn(a, b):
    return math.exp(special.betaln(a, b))


class TestIndices:
    def test_floor_decimal(self):
        assert floor_index(10, 0.3) == 3
        assert floor_index(100, 0.29) == 29
        assert floor_index(7, 1.0) == 7
        assert floor_index(7, 0.0) == 0

    def test_domain(self):
        with pytest.raises(DomainError):
            floor_index(3, 1.5)
        with pytest.raises(DomainError):
            ProcessParams(0, 3)
        with pytest.raises(DomainError):
            ProcessParams(2, 3, ((0.5, 1.2),))


class TestLayout:
    def test_shapes(self):
        lay = beta_layout(1, 1)
        assert lay.p_shape(1, 0) == (3.0, 3.0)
        assert lay.p_shape(2, 0) == (2.0, 2.0)
        assert beta_layout(2, 3).r_shape(1, 2) == (9.0, 1.0)

    def test_positive(self):
        lay = beta_layout(5, 7)
        for arr in (lay.p_a, lay.p_b, lay.r_a, lay.r_b):
            assert np.all(arr > 0)
        assert np.all(lay.r_b >= 0.5)

    def test_r_index(self):
        with pytest.raises(IndexError):
            beta_layout(2, 3).r_shape(1, 0)


class TestExact:
    def test_mean_small(self):
        params = ProcessParams(1, 1)
        ref = (special.digamma(2) - special.digamma(4)) + 2 * (special.digamma(3) - special.digamma(6))
        assert ref == pytest.approx(-2.4, abs=1e-14)
        assert exact_mean(params, 1.0, 1.0) == pytest.approx(-2.4, rel=1e-14)

    def test_mean_zero_convention(self):
        params = ProcessParams(5, 4)
        assert exact_mean(params, 1.0, 0.1) == 0.0
        assert exact_mean(params, 0.2, 1.0) == 0.0
        assert exact_cumulant(3, params, 0.0, 0.5) == 0.0

    def test_variance_small(self):
        ref = 13 / 36 + 2 * polygamma(1, 3.0) - 4 * polygamma(1, 6.0)
        assert ref == pytest.approx(0.4257, abs=1e-4)
        assert exact_cumulant(2, ProcessParams(1, 1), 1.0, 1.0) == pytest.approx(ref, rel=1e-14)

    def test_variance_order_n(self):
        k2 = exact_cumulant(2, ProcessParams(200, 20), 1.0, 1.0)
        assert abs(k2 / 200 - 0.5) <= 0.15 * 0.5

    def test_groups_sum(self):
        params = ProcessParams(6, 4)
        for m in (1, 2, 3):
            g = group_cumulants(m, params, 0.75, 0.5)
            assert sum(g.values()) == pytest.approx(exact_cumulant(m, params, 0.75, 0.5), rel=1e-13)

    def test_p1_has_no_r_terms(self):
        g = group_cumulants(2, ProcessParams(4, 1), 1.0, 1.0)
        assert g["S"] == 0.0 and g["S'"] == 0.0

    def test_zero_weight_terms_dropped(self):
        tr = all_terms(ProcessParams(3, 3), 1.0, 1.0)
        assert np.all((tr.wa > 0) | (tr.wb > 0))


class TestCGF:
    def test_zero(self):
        assert exact_cgf(0.0, ProcessParams(3, 2), 1.0, 1.0) == 0.0

    def test_small_instance(self):
        # B(3,2)/B(2,2) = 1/2 and B(4,4)/B(3,3) = 3/14
        ref = math.log(beta_fn(3, 2) / beta_fn(2, 2)) + math.log(beta_fn(4, 4) / beta_fn(3, 3))
        assert ref == pytest.approx(math.log(3 / 28), abs=1e-14)
        assert exact_cgf(1.0, ProcessParams(1, 1), 1.0, 1.0) == pytest.approx(ref, rel=1e-13)

    def test_strip(self):
        params = ProcessParams(1, 1)
        lo, hi = exact_cgf_strip(params, 1.0, 1.0)
        # binding term: p ~ beta(2, 2) with weight 1 on log X
        assert lo == pytest.approx(-2.0) and hi == math.inf
        with pytest.raises(OutOfStripError) as err:
            exact_cgf(-2.1, params, 1.0, 1.0)
        assert err.value.z_min == pytest.approx(-2.0)

    def test_empty_strip(self):
        assert exact_cgf_strip(ProcessParams(2, 2), 1.0, 0.0) == (-math.inf, math.inf)

    @pytest.mark.parametrize("n,p,s,t", [(1, 1, 1.0, 1.0), (3, 2, 1.0, 0.7), (5, 4, 0.5, 1.0)])
    def test_derivatives(self, n, p, s, t):
        params = ProcessParams(n, p)
        f = lambda z: exact_cgf(z, params, s, t)
        for m, h in ((1, 1e-2), (2, 1e-2), (3, 5e-2)):
            assert fd_derivative(f, m, h) == pytest.approx(exact_cumulant(m, params, s, t), rel=1e-5)


class TestCovariance:
    def test_diagonal_is_variance(self):
        params = ProcessParams(7, 5)
        for pt in ((1.0, 1.0), (0.6, 0.4)):
            assert exact_covariance(params, pt, pt) == pytest.approx(exact_cumulant(2, params, *pt), rel=1e-12)

    def test_symmetric(self):
        params = ProcessParams(7, 5)
        a, b = (1.0, 0.5), (0.4, 1.0)
        assert exact_covariance(params, a, b) == pytest.approx(exact_covariance(params, b, a), rel=1e-14)

    def test_zero_point(self):
        assert exact_covariance(ProcessParams(4, 4), (1.0, 1.0), (0.0, 1.0)) == 0.0

    def test_against_samples(self):
        params = ProcessParams(6, 3, ((1.0, 1.0), (0.7, 0.5)))
        vals = np.array([sample_path(child_stream(3, r, "cov"), params).values for r in range(6000)])
        emp = np.cov(vals.T)[0, 1]
        ref = exact_covariance(params, (1.0, 1.0), (0.7, 0.5))
        # SE of a sample covariance ~ sqrt((var1 var2 + cov^2) / R)
        se = math.sqrt((vals[:, 0].var() * vals[:, 1].var() + emp**2) / vals.shape[0])
        assert abs(emp - ref) <= 4 * se


class TestBounds:
    def test_example(self):
        rep = cumulant_bound_check(2, ProcessParams(50, 10), 1.0, 1.0)
        assert rep.ok, [c.name for c in rep.checks if not c.ok]
        assert set(rep.cumulants) == set(GROUPS)

    @pytest.mark.parametrize("m", range(1, 7))
    @pytest.mark.parametrize("n,p", [(10, 5), (10, 20), (50, 5), (50, 20)])
    def test_r_group_bounds(self, m, n, p):
        # sandwich and growth bounds for the r-terms hold on the whole grid
        rep = cumulant_bound_check(m, ProcessParams(n, p), 1.0, 1.0)
        bad = [c.name for c in rep.checks if not c.ok and not c.name.startswith("T ")]
        assert bad == []

    @pytest.mark.parametrize("m", range(2, 7))
    @pytest.mark.parametrize("n,p", [(10, 5), (10, 20), (50, 5), (50, 20)])
    def test_p_group_bounds_from_second_order(self, m, n, p):
        rep = cumulant_bound_check(m, ProcessParams(n, p), 1.0, 1.0)
        assert rep.ok

    def test_p_group_mean_is_quadratic_in_n(self):
        # the first cumulant of the p-terms grows like n^2 p, so no n p bound holds at m = 1
        k = [group_cumulants(1, ProcessParams(n, 5), 1.0, 1.0)["T"] for n in (50, 100)]
        assert k[1] / k[0] == pytest.approx(4.0, rel=0.05)
        assert not cumulant_bound_check(1, ProcessParams(50, 5), 1.0, 1.0).ok

    def test_empty_r_groups(self):
        rep = cumulant_bound_check(3, ProcessParams(10, 5), 0.2, 1.0)
        empty = [c for c in rep.checks if c.name.startswith("empty")]
        assert len(empty) == 2 and all(c.ok for c in empty)


class TestSampling:
    def test_zero_convention(self):
        params = ProcessParams(4, 3, ((1.0, 0.2), (0.3, 1.0), (0.0, 0.0)))
        path = sample_path(np.random.default_rng(0), params)
        np.testing.assert_array_equal(path.values, 0.0)

    def test_groups_sum_to_value(self):
        params = ProcessParams(5, 4, ((1.0, 1.0), (0.5, 0.6)))
        path = sample_path(np.random.default_rng(1), params)
        total = sum(path.groups[g] for g in GROUPS)
        np.testing.assert_allclose(total, path.values, rtol=1e-13)

    def test_coupling_subset(self):
        # the (0.5, t) value reuses a subset of the terms summed at (1, t)
        params = ProcessParams(6, 4, ((1.0, 1.0), (0.5, 1.0)))
        lay = beta_layout(6, 4)
        pool = draw_pool(child_stream(5, 0, "path"), lay)
        path = sample_path(child_stream(5, 0, "path"), params)
        lp, lp1, lr, _ = pool
        m = 6
        i = np.arange(1, m + 1)
        even, odd = 2 * i - 1, 2 * i - 2
        for col, q in ((0, 4), (1, 2)):
            v = (m - i + 1) @ lp[even, :q].sum(1) + (m - i) @ lp1[even, :q].sum(1)
            v += (m - i + 1) @ (lp[odd, :q] + lp1[odd, :q]).sum(1)
            v += (m - i) @ lr[even, : q - 1].sum(1) + (m - i + 1) @ lr[odd, : q - 1].sum(1)
            assert path.values[col] == pytest.approx(v, rel=1e-13)

    def test_lineage(self):
        path = sample_path(np.random.default_rng(3), ProcessParams(2, 2), replication=7, lineage=(11, 7))
        assert path.replication == 7 and path.lineage == (11, 7)

    def test_small_mean(self):
        params = ProcessParams(1, 1)
        vals = np.array([sample_path(child_stream(1, r, "mean"), params).values[0] for r in range(20000)])
        se = math.sqrt(exact_cumulant(2, params, 1.0, 1.0) / vals.size)
        assert abs(vals.mean() + 2.4) <= 4 * se

    def test_moments_on_grid(self):
        grid = ((1.0, 1.0), (0.6, 1.0), (1.0, 0.35), (0.2, 0.5))
        params = ProcessParams(20, 5, grid)
        reps = 10000
        vals = np.array([sample_path(child_stream(2, r, "grid"), params).values for r in range(reps)])
        for k, (s, t) in enumerate(grid):
            k2 = exact_cumulant(2, params, s, t)
            k4 = exact_cumulant(4, params, s, t)
            assert abs(vals[:, k].mean() - exact_mean(params, s, t)) <= 4 * math.sqrt(k2 / reps)
            assert abs(vals[:, k].var(ddof=1) - k2) <= 4 * math.sqrt((k4 + 2 * k2**2) / reps)

    @settings(max_examples=25, deadline=None)
    @given(n=st.integers(1, 6), p=st.integers(1, 5), seed=st.integers(0, 2**31))
    def test_deterministic(self, n, p, seed):
        params = ProcessParams(n, p, ((1.0, 1.0), (0.5, 0.5)))
        a = sample_path(np.random.default_rng(seed), params).values
        b = sample_path(np.random.default_rng(seed), params).values
        np.testing.assert_array_equal(a, b)


class TestOracle:
    def test_rejects_large(self):
        with pytest.raises(DomainError):
            small_instance_oracle(np.random.default_rng(0), 4, 1, 100)

    @pytest.mark.parametrize("n,p", [(1, 1), (1, 2)])
    def test_small(self, n, p):
        rep = small_instance_oracle(child_stream(4, 0, f"oracle-{n}-{p}"), n, p, 1500)
        assert rep.ok, (rep.ks_pvalue, rep.mean_z)

    def test_subgrid(self):
        # at t = 0.5 only floor(2 * 0.5) = 1 outer term enters
        rep = small_instance_oracle(child_stream(4, 0, "oracle-sub"), 2, 2, 800, s=1.0, t=0.5)
        assert rep.exact_mean == pytest.approx(exact_mean(ProcessParams(2, 2), 1.0, 0.5))
        assert rep.exact_mean != pytest.approx(exact_mean(ProcessParams(2, 2), 1.0, 1.0))
        assert rep.ok, (rep.ks_pvalue, rep.mean_z)
