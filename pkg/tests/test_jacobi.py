import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from hankeldet.errors import BoundaryError, DomainError
from hankeldet.jacobi import (
    JBEParams,
    SamplerStats,
    bartlett_wishart,
    decompose_subblock_dets,
    exact_logdet_cumulant,
    fast_beta_shapes,
    sample_beta,
    sample_jbe,
    sample_log_beta,
    sample_subblock_dets_fast,
)
from hankeldet.stats import beta_cdf, ks_test, ks_two_sample


def within(x, mean, var, k=4.0):
    x = np.asarray(x)
    return abs(x.mean() - mean) <= k * math.sqrt(var / x.size)


class TestBetaSampler:
    def test_uniform_mean(self):
        x = sample_beta(np.random.default_rng(1), 1.0, 1.0, size=10**5)
        assert within(x, 0.5, 1 / 12)

    def test_mean(self):
        x = sample_beta(np.random.default_rng(2), 2.0, 3.0, size=10**5)
        assert within(x, 0.4, 2 * 3 / (25 * 6))

    def test_arcsine_ks(self):
        x = sample_beta(np.random.default_rng(3), 0.5, 0.5, size=10**4)
        arcsine = lambda v: 2 / math.pi * np.arcsin(np.sqrt(np.clip(v, 0, 1)))
        stat, _ = ks_test(x, arcsine)
        assert stat < 1.628 / math.sqrt(x.size)

    def test_tiny_shapes_stay_inside(self):
        x = sample_beta(np.random.default_rng(4), 0.01, 0.01, size=10**4)
        assert np.all((x > 0) & (x < 1))

    def test_log_pair_consistent(self):
        lx, l1mx, _ = sample_log_beta(np.random.default_rng(5), np.full(1000, 3.0), np.full(1000, 0.5))
        np.testing.assert_allclose(np.exp(lx) + np.exp(l1mx), 1.0, rtol=1e-12)

    def test_bad_shape(self):
        with pytest.raises(DomainError):
            sample_beta(np.random.default_rng(0), 0.0, 1.0)

    def test_deterministic(self):
        a = sample_beta(np.random.default_rng(9), 2.0, 2.0, size=50)
        b = sample_beta(np.random.default_rng(9), 2.0, 2.0, size=50)
        np.testing.assert_array_equal(a, b)


class TestJBE:
    def test_params(self):
        with pytest.raises(DomainError):
            JBEParams(3, 1.0, 4.0)
        with pytest.raises(DomainError):
            JBEParams(0, 1.0, 1.0)
        JBEParams(3, 1.01, 1.01)

    def test_wishart_mean(self):
        rng = np.random.default_rng(6)
        w = np.mean([bartlett_wishart(rng, 3, 5.5) for _ in range(4000)], axis=0)
        np.testing.assert_allclose(w, 5.5 * np.eye(3), atol=0.3)

    def test_inside_unit_cube(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            ev = np.linalg.eigvalsh(sample_jbe(rng, JBEParams(3, 1.2, 1.5)))
            assert ev[0] > 0 and ev[-1] < 1

    def test_p1_is_beta(self):
        rng = np.random.default_rng(8)
        x = np.array([sample_jbe(rng, JBEParams(1, 2.5, 1.5))[0, 0] for _ in range(3000)])
        _, pval = ks_test(x, beta_cdf(2.5, 1.5))
        assert pval > 0.01

    def test_det_mean(self):
        rng = np.random.default_rng(10)
        d = np.array([np.linalg.det(sample_jbe(rng, JBEParams(2, 2.0, 2.0))) for _ in range(20000)])
        ref = (2 / 4) * (1.5 / 3.5)
        assert ref == pytest.approx(0.2142857, abs=1e-7)
        assert within(d, ref, d.var())

    def test_logdet_mean(self):
        rng = np.random.default_rng(11)
        ld = np.array([np.linalg.slogdet(sample_jbe(rng, JBEParams(2, 2.0, 2.0)))[1] for _ in range(20000)])
        ref = sum(special.digamma(2 - i / 2) - special.digamma(4 - i / 2) for i in range(2))
        assert within(ld, ref, exact_logdet_cumulant(2, JBEParams(2, 2.0, 2.0)))

    def test_upper_left_marginal(self):
        # the leading (p-1) block of JBE_p(g, d) is JBE_{p-1}(g, d)
        rng = np.random.default_rng(12)
        full, sub = JBEParams(3, 2.5, 3.0), JBEParams(2, 2.5, 3.0)
        reps = 20000
        ld = np.empty(reps)
        ldi = np.empty(reps)
        for r in range(reps):
            v = sample_jbe(rng, full)[:2, :2]
            ld[r] = np.linalg.slogdet(v)[1]
            ldi[r] = np.linalg.slogdet(np.eye(2) - v)[1]
        for x, which in ((ld, "u"), (ldi, "iu")):
            k2 = exact_logdet_cumulant(2, sub, which)
            k4 = exact_logdet_cumulant(4, sub, which)
            assert within(x, exact_logdet_cumulant(1, sub, which), k2)
            assert abs(x.var(ddof=1) - k2) <= 4 * math.sqrt((k4 + 2 * k2**2) / reps)

    def test_independence(self):
        rng = np.random.default_rng(13)
        params = JBEParams(3, 3.0, 3.0)
        reps = 10000
        last = np.empty(reps)
        head = np.empty(reps)
        for r in range(reps):
            d = decompose_subblock_dets(sample_jbe(rng, params))
            last[r] = math.log(d.p1[-1])
            head[r] = d.logdet_u[-2]
        corr = np.corrcoef(last, head)[0, 1]
        assert abs(corr) <= 4 / math.sqrt(reps)


class TestDecompose:
    def test_diagonal(self):
        d = decompose_subblock_dets(np.diag([0.5, 0.5]))
        np.testing.assert_allclose(d.p1, [0.5, 0.5], rtol=1e-14)
        np.testing.assert_allclose(d.p2, [1.0], rtol=1e-14)

    def test_hand_example(self):
        d = decompose_subblock_dets([[0.5, 0.25], [0.25, 0.5]])
        np.testing.assert_allclose(d.p1, [0.5, 0.375], rtol=1e-14)
        np.testing.assert_allclose(d.p2, [0.6], rtol=1e-14)

    def test_half_identity(self):
        d = decompose_subblock_dets(0.5 * np.eye(3))
        np.testing.assert_allclose(d.p1, [0.5] * 3, rtol=1e-14)
        np.testing.assert_allclose(d.p2, [1.0, 1.0], rtol=1e-14)

    def test_boundary(self):
        with pytest.raises(BoundaryError):
            decompose_subblock_dets(np.diag([1.0, 0.5]))
        with pytest.raises(BoundaryError):
            decompose_subblock_dets(np.diag([0.5, 0.0]))

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**31), p=st.integers(1, 5))
    def test_identity(self, seed, p):
        U = sample_jbe(np.random.default_rng(seed), JBEParams(p, p / 2 + 0.3, p / 2 + 1.0))
        d = decompose_subblock_dets(U)
        for a, b in ((1, 0), (0, 1), (2, 3)):
            assert d.identity_residual(a, b) <= 1e-10
        assert np.all((d.p1 > 0) & (d.p1 < 1))
        assert np.all((d.p2 > 0) & (d.p2 <= 1 + 1e-12))


class TestFastPath:
    def test_shapes(self):
        (a1, b1), (a2, b2) = fast_beta_shapes(JBEParams(3, 4.0, 4.0))
        np.testing.assert_array_equal(a1, [4.0, 3.5, 3.0])
        np.testing.assert_array_equal(b1, [4.0, 4.0, 4.0])
        np.testing.assert_array_equal(a2, [3.5, 3.0])
        np.testing.assert_array_equal(b2, [0.5, 1.0])

    def test_p1_single_draw(self):
        d = sample_subblock_dets_fast(np.random.default_rng(0), JBEParams(1, 2.0, 3.0))
        assert d.p1.shape == (1,) and d.p2.shape == (0,)
        assert d.logdet_u[0] == pytest.approx(math.log(d.p1[0]))

    def test_identity_exact(self):
        d = sample_subblock_dets_fast(np.random.default_rng(1), JBEParams(4, 3.0, 2.5))
        assert d.identity_residual(2, 3) <= 1e-12

    def test_mean_p3(self):
        rng = np.random.default_rng(14)
        params = JBEParams(3, 4.0, 4.0)
        stats = SamplerStats()
        ld = np.array([sample_subblock_dets_fast(rng, params, stats).logdet_u[-1] for _ in range(20000)])
        ref = sum(special.digamma(4 - i / 2) - special.digamma(8 - i / 2) for i in range(3))
        assert exact_logdet_cumulant(1, params) == pytest.approx(ref, rel=1e-13)
        assert within(ld, ref, exact_logdet_cumulant(2, params))
        assert stats.redrawn == 0

    def test_two_paths_agree(self):
        rng = np.random.default_rng(15)
        params = JBEParams(2, 2.5, 2.0)
        reps = 3000
        direct = [decompose_subblock_dets(sample_jbe(rng, params)) for _ in range(reps)]
        fast = [sample_subblock_dets_fast(rng, params) for _ in range(reps)]
        for attr in ("logdet_u", "logdet_iu"):
            a = np.array([getattr(d, attr)[-1] for d in direct])
            b = np.array([getattr(d, attr)[-1] for d in fast])
            assert ks_two_sample(a, b)[1] > 0.001

    def test_bartlett_diagonal(self):
        # squared Cholesky diagonals of U are beta(g - (i-1)/2, d)
        rng = np.random.default_rng(16)
        g = d = 2.0
        sq = np.array([np.diag(np.linalg.cholesky(sample_jbe(rng, JBEParams(2, g, d)))) ** 2 for _ in range(10000)])
        for i in range(2):
            a = g - i / 2
            assert within(sq[:, i], a / (a + d), a * d / ((a + d) ** 2 * (a + d + 1)))
