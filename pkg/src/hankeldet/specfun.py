"""Log-gamma, digamma and polygamma functions.

``polygamma`` is evaluated by shifting the argument upward with the
recurrence psi_k(x + 1) = psi_k(x) + (-1)^k k! x^-(k+1) and then summing the
Euler-Maclaurin asymptotic series.  All functions accept scalars or numpy
arrays and return the same shape.

The ``check_*`` helpers evaluate classical polygamma inequalities (sandwich
bounds, difference bounds, log-convexity) so they can be asserted at run
time with a small absolute slack.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

import numpy as np
from scipy import special

from .errors import DomainError

MAX_ORDER = 16
_N_BERNOULLI = 12
DEFAULT_SLACK = 1e-9


def _bernoulli_even(count):
    # Akiyama-Tanigawa; returns B_2, B_4, ..., B_{2*count}
    n_max = 2 * count
    a = [Fraction(0)] * (n_max + 1)
    out = []
    for m in range(n_max + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        if m >= 2 and m % 2 == 0:
            out.append(a[0])
    return out


_B2J = [float(b) for b in _bernoulli_even(_N_BERNOULLI)]


def _as_positive_array(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"{name} must be positive, got {x!r}")
    return arr


def log_gamma(x):
    """Return log Gamma(x) for x > 0."""
    arr = _as_positive_array(x)
    out = special.gammaln(arr)
    return float(out) if out.ndim == 0 else out


def _asymptotic(k, z):
    if k == 0:
        out = np.log(z) - 0.5 / z
        z2inv = 1.0 / (z * z)
        zp = np.ones_like(z)
        for j, b in enumerate(_B2J, start=1):
            zp = zp * z2inv
            out = out - b / (2 * j) * zp
        return out
    sign = 1.0 if k % 2 == 1 else -1.0
    zk = z**k
    out = factorial(k - 1) / zk + factorial(k) / (2.0 * zk * z)
    z2inv = 1.0 / (z * z)
    zp = 1.0 / zk
    for j, b in enumerate(_B2J, start=1):
        zp = zp * z2inv
        out = out + b * (factorial(2 * j + k - 1) / factorial(2 * j)) * zp
    return sign * out


def polygamma(k, x):
    """Polygamma function psi_k(x) = d^{k+1}/dx^{k+1} log Gamma(x).

    ``k`` is a nonnegative integer no larger than ``MAX_ORDER``; ``x`` must be
    positive.  Relative accuracy is about 1e-14 away from the zero of the
    digamma function.
    """
    if int(k) != k or k < 0:
        raise DomainError(f"order must be a nonnegative integer, got {k!r}")
    k = int(k)
    if k > MAX_ORDER:
        raise DomainError(f"order {k} exceeds supported maximum {MAX_ORDER}")
    z = _as_positive_array(x).copy()
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    threshold = 10.0 + k
    shift_sum = np.zeros_like(z)
    mask = z < threshold
    while mask.any():
        shift_sum[mask] += z[mask] ** -(k + 1)
        z[mask] += 1.0
        mask = z < threshold
    # psi_k(x) = psi_k(x + N) - (-1)^k k! sum_{j<N} (x + j)^-(k+1)
    out = _asymptotic(k, z) - (-1) ** k * factorial(k) * shift_sum
    return float(out[0]) if scalar else out


def digamma(x):
    return polygamma(0, x)


def trigamma(x):
    return polygamma(1, x)


def log_beta_fn(a, b):
    """log B(a, b) = log Gamma(a) + log Gamma(b) - log Gamma(a + b)."""
    a = _as_positive_array(a, "a")
    b = _as_positive_array(b, "b")
    out = special.gammaln(a) + special.gammaln(b) - special.gammaln(a + b)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Inequalities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    """One evaluated inequality ``lower <= value <= upper``.

    A missing side is ``None``.  ``ok`` already includes the slack.
    """

    name: str
    value: float
    lower: float | None
    upper: float | None
    slack: float

    @property
    def ok(self):
        if self.lower is not None and self.value < self.lower - self.slack:
            return False
        if self.upper is not None and self.value > self.upper + self.slack:
            return False
        return True


def check_bound_psi(n, z, slack=DEFAULT_SLACK):
    """(n-1)! z^-n <= |psi_n(z)| <= n! z^-n (1 + 1/z) for n >= 1."""
    v = abs(polygamma(n, z))
    return Check(
        f"bound_psi(n={n}, z={z})",
        v,
        factorial(n - 1) * z**-n,
        factorial(n) * z**-n * (1 + 1 / z),
        slack,
    )


def check_bound_psi_diff(a, b, slack=DEFAULT_SLACK):
    """b/(a(a+b)) <= psi_1(a) - psi_1(a+b) <= (1 + 2/a) b/(a(a+b))."""
    v = polygamma(1, a) - polygamma(1, a + b)
    base = b / (a * (a + b))
    return Check(f"bound_psi_diff(a={a}, b={b})", v, base, (1 + 2 / a) * base, slack)


def check_bound_psik_diff(k, a, b, slack=DEFAULT_SLACK):
    """|psi_k(a) - psi_k(a+b)| <= (k+1)! min(a,b) a^-(k+1) (1 + 1/a)."""
    v = abs(polygamma(k, a) - polygamma(k, a + b))
    bound = factorial(k + 1) * min(a, b) * a ** -(k + 1) * (1 + 1 / a)
    return Check(f"bound_psik_diff(k={k}, a={a}, b={b})", v, None, bound, slack)


def check_var_first_order(a, b, slack=DEFAULT_SLACK):
    """|psi_1(a) - psi_1(a+b) - b/(a(a+b))| <= 4/a^2."""
    v = abs(polygamma(1, a) - polygamma(1, a + b) - b / (a * (a + b)))
    return Check(f"var_first_order(a={a}, b={b})", v, None, 4 / a**2, slack)


def check_bnd_var(a, b, slack=DEFAULT_SLACK):
    """|psi_1(a) + psi_1(b) - 4 psi_1(a+b)| <= (6 + (a-b)^2/(a^b)) (a^b)^-2."""
    m = min(a, b)
    v = abs(polygamma(1, a) + polygamma(1, b) - 4 * polygamma(1, a + b))
    return Check(f"bnd_var(a={a}, b={b})", v, None, (6 + (a - b) ** 2 / m) / m**2, slack)


def check_log_conv(n, a, b, slack=DEFAULT_SLACK):
    """|psi_n((a+b)/2)| <= sqrt(|psi_n(a) psi_n(b)|)."""
    v = abs(polygamma(n, 0.5 * (a + b)))
    bound = np.sqrt(abs(polygamma(n, a) * polygamma(n, b)))
    return Check(f"log_conv(n={n}, a={a}, b={b})", v, None, float(bound), slack)


def check_recurrence(k, x, rtol=1e-11):
    """psi_k(x+1) - psi_k(x) = (-1)^k k! x^-(k+1), as a relative check."""
    lhs = polygamma(k, x + 1) - polygamma(k, x)
    rhs = (-1) ** k * factorial(k) * x ** -(k + 1)
    return Check(f"recurrence(k={k}, x={x})", lhs, rhs - rtol * abs(rhs), rhs + rtol * abs(rhs), 0.0)


PSI_GRID_N = (1, 2, 3, 4, 5, 6)
PSI_GRID_Z = (0.5, 1.0, 2.0, 5.0, 10.0, 100.0)
PAIR_GRID = (0.5, 1.0, 2.0, 3.5, 10.0, 50.0)


def inequality_suite(slack=DEFAULT_SLACK):
    """Evaluate every polygamma inequality on the standard grids."""
    checks = []
    for n in PSI_GRID_N:
        for z in PSI_GRID_Z:
            checks.append(check_bound_psi(n, z, slack))
    for a in PAIR_GRID:
        for b in PAIR_GRID:
            checks.append(check_bound_psi_diff(a, b, slack))
            checks.append(check_var_first_order(a, b, slack))
            checks.append(check_bnd_var(a, b, slack))
            for k in PSI_GRID_N:
                checks.append(check_bound_psik_diff(k, a, b, slack))
                checks.append(check_log_conv(k, a, b, slack))
    return checks


def binomial(n, k):
    """Binomial coefficient; exact integers up to n = 20, log-gamma above."""
    if n <= 20:
        return comb(n, k)
    return float(np.exp(special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)))
