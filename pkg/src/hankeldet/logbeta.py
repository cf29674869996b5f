"""Cumulants, central moments and CGFs of logarithms of beta variables.

For X ~ beta(a, b) and Y = wa*log(X) + wb*log(1 - X) the cumulant
generating function is

    K(z) = log B(a + wa z, b + wb z) - log B(a, b),

so every cumulant is a short polygamma combination.  The special cases
Y = log X and Y = log(X(1 - X)) get their own helpers.
"""

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, OutOfStripError
from .specfun import binomial, log_beta_fn, polygamma


@dataclass(frozen=True)
class BetaParams:
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError(f"beta shapes must be positive, got ({self.a}, {self.b})")


@dataclass(frozen=True)
class CumulantVector:
    """Cumulants kappa_1..kappa_m; ``values[0]`` is kappa_1."""

    values: tuple

    @property
    def order(self):
        return len(self.values)

    def __getitem__(self, m):
        # 1-based, like the cumulant index
        if m < 1 or m > self.order:
            raise IndexError(m)
        return self.values[m - 1]


def _check_order(m):
    if int(m) != m or m < 1:
        raise DomainError(f"cumulant order must be an integer >= 1, got {m!r}")
    return int(m)


def weighted_cumulant(m, a, b, wa, wb):
    """m-th cumulant of wa*log X + wb*log(1 - X), X ~ beta(a, b).

    Vectorised over array-valued ``a, b, wa, wb``.  Terms with zero weight
    are skipped so that their shapes are never evaluated.
    """
    m = _check_order(m)
    a, b, wa, wb = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, wa, wb)))
    out = wa**m * polygamma(m - 1, a) - (wa + wb) ** m * polygamma(m - 1, a + b)
    nz = wb != 0
    if nz.any():
        out = np.array(out, dtype=float, copy=True)
        out[nz] += wb[nz] ** m * polygamma(m - 1, b[nz])
    return float(out) if out.ndim == 0 else out


def log_beta_cumulant(m, p: BetaParams):
    """kappa_m(log X) = psi_{m-1}(a) - psi_{m-1}(a + b)."""
    m = _check_order(m)
    return polygamma(m - 1, p.a) - polygamma(m - 1, p.a + p.b)


def log_beta_sym_cumulant(m, p: BetaParams):
    """kappa_m(log(X(1-X))) = psi_{m-1}(a) + psi_{m-1}(b) - 2^m psi_{m-1}(a+b)."""
    m = _check_order(m)
    return polygamma(m - 1, p.a) + polygamma(m - 1, p.b) - 2**m * polygamma(m - 1, p.a + p.b)


def weighted_log_beta_cgf(z, wa, wb, p: BetaParams):
    """log E[X^(wa z) (1-X)^(wb z)] for X ~ beta(a, b)."""
    a2 = p.a + wa * z
    b2 = p.b + wb * z
    if not (a2 > 0 and b2 > 0):
        raise OutOfStripError(
            f"z={z} outside the CGF domain: shifted shapes ({a2}, {b2}) must be positive"
        )
    if z == 0:
        return 0.0
    return log_beta_fn(a2, b2) - log_beta_fn(p.a, p.b)


def weighted_cgf_array(z, a, b, wa, wb):
    """Sum of weighted log-beta CGFs over arrays of independent terms.

    Computed as a sum of log-gamma differences; raises ``OutOfStripError``
    if any shifted shape is nonpositive.
    """
    a, b, wa, wb = (np.asarray(v, dtype=float) for v in (a, b, wa, wb))
    a2 = a + wa * z
    b2 = b + wb * z
    bad = (a2 <= 0) | (b2 <= 0)
    if bad.any():
        i = int(np.argmax(bad))
        raise OutOfStripError(
            f"z={z} outside the CGF domain (term {i}: shapes {a[i]}, {b[i]}, weights {wa[i]}, {wb[i]})"
        )
    g = special.gammaln
    total = (g(a2) - g(a)) + (g(b2) - g(b)) - (g(a2 + b2) - g(a + b))
    return float(np.sum(total))


def cgf_strip(a, b, wa, wb):
    """Open interval (z_lo, z_hi) on which every shifted shape stays positive."""
    a, b, wa, wb = (np.asarray(v, dtype=float) for v in (a, b, wa, wb))
    lo, hi = -np.inf, np.inf
    for shape, w in ((a, wa), (b, wb)):
        pos = w > 0
        if pos.any():
            lo = max(lo, float(np.max(-shape[pos] / w[pos])))
        neg = w < 0
        if neg.any():
            hi = min(hi, float(np.min(-shape[neg] / w[neg])))
    return lo, hi


def cumulants_to_central_moments(k: CumulantVector):
    """Central moments mu_2..mu_m from cumulants via

        mu_n = kappa_n + sum_{j=2}^{n-2} C(n-1, j-1) kappa_j mu_{n-j}.

    kappa_1 is ignored.  Returns a list whose first entry is mu_2.
    """
    m = k.order
    if m < 2:
        raise DomainError("need cumulants up to order >= 2")
    mu = {0: 1.0, 1: 0.0}
    for n in range(2, m + 1):
        acc = k[n]
        for j in range(2, n - 1):
            acc += binomial(n - 1, j - 1) * k[j] * mu[n - j]
        mu[n] = acc
    return [mu[n] for n in range(2, m + 1)]


def log_beta_cumulants(p: BetaParams, order, symmetric=False):
    f = log_beta_sym_cumulant if symmetric else log_beta_cumulant
    return CumulantVector(tuple(f(m, p) for m in range(1, order + 1)))


def moment_bound(n, M):
    """Bound constant (n! 2^{n/2} (M^1)^{-(n-1)/2} (1 + 1/M) + n)^n.

    For a, b >= M and Y = log X, X ~ beta(a, b): |mu_n| <= bound * mu_2^{n/2}.
    """
    c = special.factorial(n) * 2 ** (n / 2) * min(M, 1.0) ** (-(n - 1) / 2) * (1 + 1 / M)
    return float((c + n) ** n)


def standardized_moment_ratio(p: BetaParams, n, symmetric=False):
    """|mu_n| / mu_2^{n/2} computed exactly from cumulants."""
    mus = cumulants_to_central_moments(log_beta_cumulants(p, n, symmetric))
    return abs(mus[n - 2]) / mus[0] ** (n / 2)
