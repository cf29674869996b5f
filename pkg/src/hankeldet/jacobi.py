"""Real Jacobi-beta ensemble: samplers and the subblock determinant chain.

``sample_jbe`` draws U with density proportional to

    det(U)^(gamma - (p+1)/2) det(I - U)^(delta - (p+1)/2),   0 < U < I,

as U = (A + B)^{-1/2} A (A + B)^{-1/2} for independent Wisharts
A ~ W_p(I, 2 gamma), B ~ W_p(I, 2 delta) built by Bartlett factorisation.

The determinants of the leading subblocks U^[j] factor into independent
beta variables: p_{i,1} ~ beta(gamma - i/2, delta) for i = 0..p-1 and
p_{i,2} ~ beta(delta - i/2, i/2) for i = 1..p-1, with

    log det U^[j]       = sum_{i<j} log p_{i,1}
    log det(I - U^[j])  = sum_{i<j} log(1 - p_{i,1}) + sum_{1<=i<j} log p_{i,2}.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import BoundaryError, DomainError
from .momentspace import symmetrize

EIG_MARGIN = 1e-14


@dataclass(frozen=True)
class JBEParams:
    p: int
    gamma: float
    delta: float

    def __post_init__(self):
        if self.p < 1:
            raise DomainError("matrix size must be >= 1")
        lim = (self.p - 1) / 2
        if not (self.gamma > lim and self.delta > lim):
            raise DomainError(f"need gamma, delta > {lim} for p={self.p}, got ({self.gamma}, {self.delta})")


@dataclass
class SubblockDets:
    """Subblock log-determinants and the beta factors behind them.

    ``logdet_u[j-1]`` is log det U^[j]; ``p1[i]`` is p_{i,1}; ``p2[i-1]`` is p_{i,2}.
    """

    logdet_u: np.ndarray
    logdet_iu: np.ndarray
    p1: np.ndarray
    p2: np.ndarray

    def identity_residual(self, a, b):
        """Max deviation of a log det U^[j] + b log det(I - U^[j]) from the
        beta-product expansion, over j = 1..p."""
        log1 = np.log(self.p1)
        log1m = np.log1p(-self.p1)
        log2 = np.log(self.p2)
        terms = a * log1 + b * log1m
        terms[1:] += b * log2
        rhs = np.cumsum(terms)
        lhs = a * self.logdet_u + b * self.logdet_iu
        return float(np.max(np.abs(lhs - rhs)))


@dataclass
class SamplerStats:
    rejected: int = 0
    redrawn: int = 0
    extra: dict = field(default_factory=dict)


def _log_beta_pair(rng, a, b):
    """Draw X ~ beta(a, b) via two gammas; return (X, log X, log(1-X), redraws).

    Draws where X rounds to exactly 0 or 1 are redrawn.
    """
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    if np.any(a <= 0) or np.any(b <= 0):
        raise DomainError("beta shapes must be positive")
    g1 = rng.standard_gamma(a)
    g2 = rng.standard_gamma(b)
    redraws = 0
    while True:
        s = g1 + g2
        x = g1 / s
        bad = (x <= 0) | (x >= 1) | ~np.isfinite(x)
        if not np.any(bad):
            break
        redraws += int(np.count_nonzero(bad))
        g1 = np.where(bad, rng.standard_gamma(a), g1) if g1.ndim else rng.standard_gamma(a)
        g2 = np.where(bad, rng.standard_gamma(b), g2) if g2.ndim else rng.standard_gamma(b)
    ls = np.log(s)
    return x, np.log(g1) - ls, np.log(g2) - ls, redraws


def sample_beta(rng, a, b, size=None):
    """beta(a, b) draws via the gamma-ratio construction."""
    if size is not None:
        a = np.broadcast_to(np.asarray(a, dtype=float), size)
        b = np.broadcast_to(np.asarray(b, dtype=float), size)
    x, _, _, _ = _log_beta_pair(rng, a, b)
    return float(x) if np.ndim(x) == 0 else x


def sample_log_beta(rng, a, b):
    """(log X, log(1 - X), redraw count) for X ~ beta(a, b), elementwise."""
    _, lx, l1mx, redraws = _log_beta_pair(rng, a, b)
    return lx, l1mx, redraws


def bartlett_wishart(rng, p, dof):
    """W_p(I, dof) for real dof > p - 1 via the Bartlett factor L (A = L L^T)."""
    if dof <= p - 1:
        raise DomainError(f"degrees of freedom {dof} must exceed {p - 1}")
    L = np.zeros((p, p))
    # chi^2_{dof - i} = 2 * Gamma((dof - i)/2)
    L[np.diag_indices(p)] = np.sqrt(2.0 * rng.standard_gamma((dof - np.arange(p)) / 2.0))
    rows, cols = np.tril_indices(p, -1)
    L[rows, cols] = rng.standard_normal(rows.size)
    return L @ L.T


def sample_jbe(rng, params: JBEParams, stats: SamplerStats | None = None):
    """One draw from JBE_p(gamma, delta) as a symmetric p x p array."""
    p = params.p
    while True:
        A = bartlett_wishart(rng, p, 2 * params.gamma)
        B = bartlett_wishart(rng, p, 2 * params.delta)
        w, v = np.linalg.eigh(A + B)
        r = (v / np.sqrt(w)) @ v.T
        U = symmetrize(r @ A @ r)
        ev = np.linalg.eigvalsh(U)
        if ev[0] > EIG_MARGIN and ev[-1] < 1 - EIG_MARGIN:
            return U
        if stats is not None:
            stats.rejected += 1


def decompose_subblock_dets(U):
    """Beta factors of the leading-subblock determinants of 0 < U < I."""
    U = np.asarray(U, dtype=float)
    p = U.shape[0]
    eye = np.eye(p)
    logdet_u = np.empty(p)
    logdet_iu = np.empty(p)
    for j in range(1, p + 1):
        s1, l1 = np.linalg.slogdet(U[:j, :j])
        s2, l2 = np.linalg.slogdet(eye[:j, :j] - U[:j, :j])
        if s1 <= 0 or s2 <= 0:
            raise BoundaryError(f"subblock {j} of U or I - U is not positive definite")
        logdet_u[j - 1] = l1
        logdet_iu[j - 1] = l2
    log_p1 = np.diff(logdet_u, prepend=0.0)
    p1 = np.exp(log_p1)
    # log p_{i,2} = log det(I - U^[i+1]) - log det(I - U^[i]) - log(1 - p_{i,1})
    log_p2 = np.diff(logdet_iu)[: p - 1] - np.log1p(-p1[1:])
    return SubblockDets(logdet_u, logdet_iu, p1, np.exp(log_p2))


def fast_beta_shapes(params: JBEParams):
    """Shapes ((a1, b1) for p_{i,1}, i=0..p-1; (a2, b2) for p_{i,2}, i=1..p-1)."""
    i1 = np.arange(params.p)
    i2 = np.arange(1, params.p)
    return (
        (params.gamma - i1 / 2.0, np.full(params.p, float(params.delta))),
        (params.delta - i2 / 2.0, i2 / 2.0),
    )


def sample_subblock_dets_fast(rng, params: JBEParams, stats: SamplerStats | None = None):
    """Draw the beta factors directly: O(p) beta variables, no matrices."""
    (a1, b1), (a2, b2) = fast_beta_shapes(params)
    x1, l1, l1m, r1 = _log_beta_pair(rng, a1, b1)
    if params.p > 1:
        x2, l2, _, r2 = _log_beta_pair(rng, a2, b2)
    else:
        x2, l2, r2 = np.empty(0), np.empty(0), 0
    if stats is not None:
        stats.redrawn += r1 + r2
    logdet_u = np.cumsum(l1)
    iu_terms = l1m.copy()
    iu_terms[1:] += l2
    return SubblockDets(logdet_u, np.cumsum(iu_terms), x1, x2)


def exact_logdet_cumulant(m, params: JBEParams, which="u", j=None):
    """m-th cumulant of log det U^[j] (``which="u"``) or log det(I - U^[j])."""
    from .logbeta import weighted_cumulant

    j = params.p if j is None else j
    (a1, b1), (a2, b2) = fast_beta_shapes(params)
    a1, b1, a2, b2 = a1[:j], b1[:j], a2[: j - 1], b2[: j - 1]
    if which == "u":
        return float(np.sum(weighted_cumulant(m, a1, b1, 1.0, 0.0)))
    if which == "iu":
        total = np.sum(weighted_cumulant(m, a1, b1, 0.0, 1.0))
        if j > 1:
            total += np.sum(weighted_cumulant(m, a2, b2, 1.0, 0.0))
        return float(total)
    raise ValueError(f"which must be 'u' or 'iu', got {which!r}")
