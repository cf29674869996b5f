"""The Hankel determinant process H_n(s, t).

With m = floor(n t), q = floor(p s) and alpha_i = (p + 1)/2 * (2n - i + 2),

    H_n(s, t) = sum_{i=1}^{m} {
        sum_{j=1}^{q-1} (m - i) log r_{2i,j} + (m - i + 1) log r_{2i-1,j}
      + sum_{j=0}^{q-1} (m - i + 1) log p_{2i,j} + (m - i) log(1 - p_{2i,j})
      + sum_{j=0}^{q-1} (m - i + 1) log(p_{2i-1,j} (1 - p_{2i-1,j}))
    }

for independent p_{i,j} ~ beta(alpha_i - j/2, alpha_i) and
r_{i,j} ~ beta(alpha_i - j/2, j/2).  Everything exact (mean, cumulants,
CGF, covariance) is a finite polygamma / log-gamma sum over these terms.

The four partial sums used by the cumulant bounds are

    S  : r-terms with even first index     S' : r-terms with odd first index
    T  : p-terms with even first index     T' : p-terms with odd first index
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import BoundaryError, DomainError, OutOfStripError
from .jacobi import JBEParams, SamplerStats, sample_jbe, sample_log_beta
from .logbeta import cgf_strip, weighted_cgf_array, weighted_cumulant
from .momentspace import CanonicalSequence, canonical_to_moments, cholesky_logdet, hankel_log_det_dense
from .specfun import Check, polygamma

GROUPS = ("S", "S'", "T", "T'")
BOUND_SLACK = 1e-9


def floor_index(size, x):
    """floor(size * x) for x given as a decimal, e.g. floor(10 * 0.3) = 3.

    ``x`` is read through its shortest repr so that binary rounding of
    values like 0.3 does not lose an index.
    """
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"grid coordinate must lie in [0, 1], got {x}")
    return math.floor(size * Fraction(str(float(x))))


@dataclass(frozen=True)
class ProcessParams:
    n: int
    p: int
    grid: tuple = ((1.0, 1.0),)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1 or int(self.p) != self.p or self.p < 1:
            raise DomainError(f"n and p must be positive integers, got ({self.n}, {self.p})")
        grid = tuple((float(s), float(t)) for s, t in self.grid)
        for s, t in grid:
            if not (0.0 <= s <= 1.0 and 0.0 <= t <= 1.0):
                raise DomainError(f"grid point {(s, t)} outside [0, 1]^2")
        object.__setattr__(self, "grid", grid)

    def indices(self, s, t):
        """(floor(n t), floor(p s))."""
        return floor_index(self.n, t), floor_index(self.p, s)


@dataclass(frozen=True)
class BetaLayout:
    """Shape tables; row i-1 belongs to first index i = 1..2n.

    ``p_a[i-1, j]``, ``p_b[i-1, j]`` for j = 0..p-1 and ``r_a[i-1, j-1]``,
    ``r_b[i-1, j-1]`` for j = 1..p-1.
    """

    n: int
    p: int
    p_a: np.ndarray
    p_b: np.ndarray
    r_a: np.ndarray
    r_b: np.ndarray

    def p_shape(self, i, j):
        return float(self.p_a[i - 1, j]), float(self.p_b[i - 1, j])

    def r_shape(self, i, j):
        if j < 1:
            raise IndexError("r-variables start at j = 1")
        return float(self.r_a[i - 1, j - 1]), float(self.r_b[i - 1, j - 1])


def beta_layout(n, p):
    if n < 1 or p < 1:
        raise DomainError("n and p must be >= 1")
    i = np.arange(1, 2 * n + 1, dtype=float)[:, None]
    alpha = (p + 1) / 2.0 * (2 * n - i + 2)
    j0 = np.arange(p, dtype=float)[None, :]
    j1 = np.arange(1, p, dtype=float)[None, :]
    p_a = alpha - j0 / 2.0
    p_b = np.broadcast_to(alpha, p_a.shape).copy()
    r_a = alpha - j1 / 2.0
    r_b = np.broadcast_to(j1 / 2.0, r_a.shape).copy()
    return BetaLayout(n, p, p_a, p_b, r_a, r_b)


# ---------------------------------------------------------------------------
# Term lists
# ---------------------------------------------------------------------------


@dataclass
class Terms:
    """Independent weighted log-beta terms wa log X + wb log(1 - X)."""

    a: np.ndarray
    b: np.ndarray
    wa: np.ndarray
    wb: np.ndarray

    @classmethod
    def empty(cls):
        e = np.empty(0)
        return cls(e, e, e, e)

    @classmethod
    def concat(cls, parts):
        parts = list(parts)
        if not parts:
            return cls.empty()
        return cls(*(np.concatenate([getattr(t, f) for t in parts]) for f in ("a", "b", "wa", "wb")))

    def __len__(self):
        return self.a.size


def group_terms(layout: BetaLayout, s, t):
    """The four term groups of H_n(s, t); zero-weight terms are dropped."""
    m = floor_index(layout.n, t)
    q = floor_index(layout.p, s)
    out = {g: Terms.empty() for g in GROUPS}
    if m == 0 or q == 0:
        return out
    i = np.arange(1, m + 1)
    even, odd = 2 * i - 1, 2 * i - 2  # 0-based rows for first index 2i, 2i-1
    w_hi = (m - i + 1).astype(float)
    w_lo = (m - i).astype(float)

    def build(rows, shp_a, shp_b, ncols, wa, wb):
        a = shp_a[rows, :ncols]
        b = shp_b[rows, :ncols]
        wa = np.broadcast_to(wa[:, None], a.shape)
        wb = np.broadcast_to(wb[:, None], a.shape)
        keep = (wa != 0) | (wb != 0)
        return Terms(a[keep], b[keep], wa[keep], wb[keep])

    zero = np.zeros(m)
    if q > 1:
        out["S"] = build(even, layout.r_a, layout.r_b, q - 1, w_lo, zero)
        out["S'"] = build(odd, layout.r_a, layout.r_b, q - 1, w_hi, zero)
    out["T"] = build(even, layout.p_a, layout.p_b, q, w_hi, w_lo)
    out["T'"] = build(odd, layout.p_a, layout.p_b, q, w_hi, w_hi)
    return out


def all_terms(params: ProcessParams, s, t):
    return Terms.concat(group_terms(beta_layout(params.n, params.p), s, t).values())


# ---------------------------------------------------------------------------
# Exact analytics
# ---------------------------------------------------------------------------


def _cumulant_of(m, terms: Terms):
    if len(terms) == 0:
        return 0.0
    return float(np.sum(weighted_cumulant(m, terms.a, terms.b, terms.wa, terms.wb)))


def exact_cumulant(m, params: ProcessParams, s, t):
    """m-th cumulant of H_n(s, t) as a polygamma sum."""
    return _cumulant_of(m, all_terms(params, s, t))


def exact_mean(params: ProcessParams, s, t):
    return exact_cumulant(1, params, s, t)


def group_cumulants(m, params: ProcessParams, s, t):
    terms = group_terms(beta_layout(params.n, params.p), s, t)
    return {g: _cumulant_of(m, terms[g]) for g in GROUPS}


def exact_cgf_strip(params: ProcessParams, s, t):
    """Open z-interval on which log E exp(z H_n(s, t)) is finite."""
    tr = all_terms(params, s, t)
    if len(tr) == 0:
        return -math.inf, math.inf
    return cgf_strip(tr.a, tr.b, tr.wa, tr.wb)


def exact_cgf(z, params: ProcessParams, s, t):
    """log E exp(z H_n(s, t)); ``OutOfStripError`` outside the strip."""
    tr = all_terms(params, s, t)
    if len(tr) == 0:
        return 0.0
    lo, hi = cgf_strip(tr.a, tr.b, tr.wa, tr.wb)
    if not lo < z < hi:
        try:
            weighted_cgf_array(z, tr.a, tr.b, tr.wa, tr.wb)
        except OutOfStripError as exc:
            raise OutOfStripError(f"{exc}; admissible strip is ({lo}, {hi})", lo, hi) from None
    return weighted_cgf_array(z, tr.a, tr.b, tr.wa, tr.wb)


def _weight_tables(layout: BetaLayout, s, t):
    """Full-size weight arrays (wp_x, wp_1mx, wr_x) for the point (s, t)."""
    n2, p = 2 * layout.n, layout.p
    wpx = np.zeros((n2, p))
    wp1 = np.zeros((n2, p))
    wr = np.zeros((n2, max(p - 1, 0)))
    m = floor_index(layout.n, t)
    q = floor_index(layout.p, s)
    if m == 0 or q == 0:
        return wpx, wp1, wr
    i = np.arange(1, m + 1)
    even, odd = 2 * i - 1, 2 * i - 2
    wpx[even, :q] = (m - i + 1)[:, None]
    wp1[even, :q] = (m - i)[:, None]
    wpx[odd, :q] = (m - i + 1)[:, None]
    wp1[odd, :q] = (m - i + 1)[:, None]
    if q > 1:
        wr[even, : q - 1] = (m - i)[:, None]
        wr[odd, : q - 1] = (m - i + 1)[:, None]
    return wpx, wp1, wr


def exact_covariance(params: ProcessParams, point1, point2):
    """Cov(H_n(s1, t1), H_n(s2, t2)) under the shared beta pool.

    For one X ~ beta(a, b) entering with weights (x1, y1) and (x2, y2):
    x1 x2 psi_1(a) + y1 y2 psi_1(b) - (x1 + y1)(x2 + y2) psi_1(a + b).
    """
    lay = beta_layout(params.n, params.p)
    w1 = _weight_tables(lay, *point1)
    w2 = _weight_tables(lay, *point2)
    x1, y1 = w1[0], w1[1]
    x2, y2 = w2[0], w2[1]
    tri_a = polygamma(1, lay.p_a)
    tri_b = polygamma(1, lay.p_b)
    tri_ab = polygamma(1, lay.p_a + lay.p_b)
    cov = np.sum(x1 * x2 * tri_a + y1 * y2 * tri_b - (x1 + y1) * (x2 + y2) * tri_ab)
    if lay.p > 1:
        r1, r2 = w1[2], w2[2]
        cov += np.sum(r1 * r2 * (polygamma(1, lay.r_a) - polygamma(1, lay.r_a + lay.r_b)))
    return float(cov)


# ---------------------------------------------------------------------------
# Cumulant bounds
# ---------------------------------------------------------------------------


@dataclass
class BoundReport:
    m: int
    n: int
    p: int
    s: float
    t: float
    cumulants: dict
    checks: list

    @property
    def ok(self):
        return all(c.ok for c in self.checks)


def cumulant_bound_check(m, params: ProcessParams, s, t, slack=BOUND_SLACK):
    """Exact group cumulants against the sandwich and growth bounds."""
    from .asympt import shifted_power_integral, weighted_kernel_power

    n, p = params.n, params.p
    q = floor_index(p, s)
    kap = group_cumulants(m, params, s, t)
    fact = math.factorial
    scale = n * (q - 1) * q / (p + 1) ** m * fact(m - 1) / 4
    sign = (-1) ** m
    checks = []
    tag = f"m={m}, n={n}, p={p}, s={s}, t={t}"
    if scale > 0:
        base = weighted_kernel_power(m, t)
        lo_s = shifted_power_integral(m, t - 2 / n, t - 2 / n, 1.0)
        lo_s2 = shifted_power_integral(m, t - 2 / n, t - 1 / n, 1 + 1 / n)
        hi = 1 + m / p
        checks.append(Check(f"sandwich S ({tag})", sign * kap["S"] / scale, lo_s, hi * base, slack))
        checks.append(Check(f"sandwich S' ({tag})", sign * kap["S'"] / scale, lo_s2, hi * (base + 1 / n), slack))
    else:
        # q <= 1: both r-groups are empty sums
        checks.append(Check(f"empty S ({tag})", kap["S"], 0.0, 0.0, slack))
        checks.append(Check(f"empty S' ({tag})", kap["S'"], 0.0, 0.0, slack))
    s_max = max(abs(kap["S"]), abs(kap["S'"]))
    checks.append(Check(f"S growth ({tag})", s_max, None, 2 * fact(m + 1) * n * p ** (2 - m), slack))
    t_max = max(abs(kap["T"]), abs(kap["T'"]))
    fine = 6 * 4**m * fact(m + 1) * p ** (-m) * (n * p + (math.log(n) + 1) * p**2)
    coarse = 12 * 4**m * fact(m + 1) * n * p ** (2 - m)
    checks.append(Check(f"T growth ({tag})", t_max, None, fine, slack))
    checks.append(Check(f"T growth, coarse ({tag})", t_max, None, coarse, slack))
    return BoundReport(m, n, p, s, t, kap, checks)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


@dataclass
class ProcessPath:
    """One replication of H_n on the grid, with its four partial sums."""

    values: np.ndarray
    grid: tuple
    replication: int = 0
    lineage: tuple = ()
    groups: dict = field(default_factory=dict)
    redrawn: int = 0


def draw_pool(rng, layout: BetaLayout):
    """All beta logs of one replication: (log p, log(1 - p), log r, redraws)."""
    lp, lp1, r1 = sample_log_beta(rng, layout.p_a, layout.p_b)
    if layout.p > 1:
        lr, _, r2 = sample_log_beta(rng, layout.r_a, layout.r_b)
    else:
        lr, r2 = np.zeros((2 * layout.n, 0)), 0
    return lp, lp1, lr, r1 + r2


def _evaluate(layout, pool, grid):
    lp, lp1, lr, _ = pool
    # prefix sums over j, so every grid point reads one column
    cp = np.cumsum(lp, axis=1)
    cp1 = np.cumsum(lp1, axis=1)
    cr = np.cumsum(lr, axis=1)
    values = np.zeros(len(grid))
    groups = {g: np.zeros(len(grid)) for g in GROUPS}
    for k, (s, t) in enumerate(grid):
        m = floor_index(layout.n, t)
        q = floor_index(layout.p, s)
        if m == 0 or q == 0:
            continue
        i = np.arange(1, m + 1)
        even, odd = 2 * i - 1, 2 * i - 2
        w_hi = m - i + 1
        w_lo = m - i
        g = groups
        g["T"][k] = w_hi @ cp[even, q - 1] + w_lo @ cp1[even, q - 1]
        g["T'"][k] = w_hi @ (cp[odd, q - 1] + cp1[odd, q - 1])
        if q > 1:
            g["S"][k] = w_lo @ cr[even, q - 2]
            g["S'"][k] = w_hi @ cr[odd, q - 2]
        values[k] = g["S"][k] + g["S'"][k] + g["T"][k] + g["T'"][k]
    return values, groups


def sample_path(rng, params: ProcessParams, replication=0, lineage=()):
    """One replication of {H_n(s, t)} on ``params.grid`` from a single beta pool."""
    layout = beta_layout(params.n, params.p)
    pool = draw_pool(rng, layout)
    values, groups = _evaluate(layout, pool, params.grid)
    return ProcessPath(values, params.grid, replication, tuple(lineage), groups, pool[3])


# ---------------------------------------------------------------------------
# Matrix-path oracle
# ---------------------------------------------------------------------------


@dataclass
class OracleReport:
    n: int
    p: int
    s: float
    t: float
    reps: int
    matrix_values: np.ndarray
    fast_values: np.ndarray
    ks_stat: float
    ks_pvalue: float
    mean_matrix: float
    mean_fast: float
    mean_se: float
    exact_mean: float
    rejected: int
    redrawn: int
    alpha: float = 0.001

    @property
    def mean_z(self):
        return (self.mean_matrix - self.mean_fast) / self.mean_se if self.mean_se > 0 else 0.0

    @property
    def ok(self):
        return self.ks_pvalue > self.alpha and abs(self.mean_z) <= 4.0


def _subblock_logdet_product(canon, m, q):
    """Product formula restricted to the leading q x q subblocks of U_i."""
    eye = np.eye(q)
    total = 0.0
    for i in range(1, m + 1):
        u_odd = canon[2 * i - 1][:q, :q]
        u_even = canon[2 * i][:q, :q]
        total += (m - i + 1) * (cholesky_logdet(u_odd) + cholesky_logdet(eye - u_odd) + cholesky_logdet(u_even))
        if m - i:
            total += (m - i) * cholesky_logdet(eye - u_even)
    return total


def matrix_path_value(rng, n, p, s, t, stats: SamplerStats):
    """H_n(s, t) through canonical moments drawn from the Jacobi ensembles.

    U_i ~ JBE_p(e (N - i + 1), e (N - i + 1)), e = (p + 1)/2, N = 2n + 1.  At
    s = 1 the value is the dense log det of the reconstructed lower Hankel
    matrix of order 2 floor(n t); for s < 1 the subblock product is used.
    """
    m = floor_index(n, t)
    q = floor_index(p, s)
    if m == 0 or q == 0:
        return 0.0
    e = (p + 1) / 2.0
    big_n = 2 * n + 1
    while True:
        canon = [sample_jbe(rng, JBEParams(p, e * (big_n - i + 1), e * (big_n - i + 1)), stats) for i in range(1, 2 * m + 1)]
        c = CanonicalSequence(p, tuple(canon))
        try:
            if q == p:
                return hankel_log_det_dense(canonical_to_moments(c), m)
            return _subblock_logdet_product(c, m, q)
        except BoundaryError:
            stats.rejected += 1


def small_instance_oracle(rng, n, p, reps, s=1.0, t=1.0, alpha=0.001):
    """Compare the matrix path with the fast beta path at one (s, t)."""
    from .stats import ks_two_sample

    if n > 3 or p > 3:
        raise DomainError("the matrix-path oracle is meant for n, p <= 3")
    stats = SamplerStats()
    params = ProcessParams(n, p, ((s, t),))
    layout = beta_layout(n, p)
    mat = np.empty(reps)
    fast = np.empty(reps)
    redrawn = 0
    for r in range(reps):
        mat[r] = matrix_path_value(rng, n, p, s, t, stats)
        pool = draw_pool(rng, layout)
        fast[r] = _evaluate(layout, pool, params.grid)[0][0]
        redrawn += pool[3]
    if np.all(mat == 0) and np.all(fast == 0):
        stat, pval = 0.0, 1.0
    else:
        stat, pval = ks_two_sample(mat, fast)
    se = math.sqrt(mat.var(ddof=1) / reps + fast.var(ddof=1) / reps)
    return OracleReport(
        n, p, s, t, reps, mat, fast, stat, pval,
        float(mat.mean()), float(fast.mean()), se,
        exact_mean(params, s, t), stats.rejected, redrawn, alpha,
    )
