"""Limit objects for the Hankel determinant process.

Everything here is a function of (s, t) in [0, 1]^2 built from the ratio
r_t(y) = (t - y)/(1 - y) on [0, t]:

    kernel_c(t1, t2)         = int_0^{t1^t2} (t1 - y)(t2 - y)/(1 - y)^2 dy
    weighted_kernel_power(m) = int_0^t r_t(y)^m dy
    ldp_lambda(lam)          = -(s^2/2) int_0^t log(1 + lam r_t(y)) dy

and the rate functions derived from them.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError

QUAD_EPS = 1e-13


def _quad(f, lo, hi):
    val, _ = integrate.quad(f, lo, hi, epsabs=QUAD_EPS, epsrel=QUAD_EPS, limit=200)
    return val


def _check_unit(**kw):
    for k, v in kw.items():
        if not 0.0 <= v <= 1.0:
            raise DomainError(f"{k} must lie in [0, 1], got {v}")


@dataclass(frozen=True)
class KernelValue:
    t1: float
    t2: float
    s1: float
    s2: float
    c: float

    @property
    def limit_cov(self):
        return min(self.s1, self.s2) ** 2 * self.c / 2


@dataclass(frozen=True)
class RateEval:
    x: float
    value: float
    argmax_lambda: float | None = None


def kernel_c(t1, t2):
    """Closed form of int_0^{t1^t2} (t1-y)(t2-y)/(1-y)^2 dy.

    With a = 1 - t1, b = 1 - t2 and u = 1 - y the integrand is
    1 - (a+b)/u + ab/u^2, which integrates to
    t + (a+b) log(max(a,b)) + min(a,b) - ab,  t = t1 ^ t2.
    """
    _check_unit(t1=t1, t2=t2)
    a, b = 1.0 - t1, 1.0 - t2
    t = min(t1, t2)
    hi = max(a, b)
    log_term = 0.0 if a + b == 0 else (a + b) * math.log(hi)
    return t + log_term + min(a, b) - a * b


def kernel_c_quad(t1, t2):
    """Same integral by adaptive quadrature (independent check)."""
    _check_unit(t1=t1, t2=t2)
    t = min(t1, t2)
    if t == 0:
        return 0.0
    return _quad(lambda y: (t1 - y) * (t2 - y) / (1 - y) ** 2, 0.0, t)


def kernel(s1, t1, s2, t2):
    return KernelValue(t1, t2, s1, s2, kernel_c(t1, t2))


def _ratio(t):
    return lambda y: (t - y) / (1.0 - y)


@lru_cache(maxsize=4096)
def weighted_kernel_power(m, t):
    """int_0^t ((t - y)/(1 - y))^m dy."""
    _check_unit(t=t)
    if m < 0:
        raise DomainError("power must be nonnegative")
    if t == 0:
        return 0.0
    if t == 1:
        return 1.0
    r = _ratio(t)
    return _quad(lambda y: r(y) ** m, 0.0, t)


def shifted_power_integral(m, upper, num_shift, den_shift):
    """int_0^upper ((num_shift - y)/(den_shift - y))^m dy, or 0 if upper <= 0."""
    if upper <= 0:
        return 0.0
    return _quad(lambda y: ((num_shift - y) / (den_shift - y)) ** m, 0.0, upper)


def lln_limit(s, t):
    """-(s^2/2) (t + (1 - t) log(1 - t)), continuous at t = 1."""
    _check_unit(s=s, t=t)
    tail = 0.0 if t == 1 else (1 - t) * math.log1p(-t)
    return -(s**2) / 2 * (t + tail)


def mod_gaussian_speed(params, s, t):
    """(exact, asymptotic) speed for ``params`` (a ProcessParams):
    (p/n)^{2/3} kappa_2(H_n(s,t)) and n^{1/3} p^{2/3} (s^2/2) int_0^t r^2."""
    from .hankelproc import exact_cumulant

    n, p = params.n, params.p
    k2 = exact_cumulant(2, params, s, t)
    exact = (p / n) ** (2 / 3) * k2
    asym = n ** (1 / 3) * p ** (2 / 3) * s**2 / 2 * weighted_kernel_power(2, t)
    return exact, asym


def mod_gaussian_psi(z, s, t):
    """exp(-z^3 (s^2/6) int_0^t r^3)."""
    return math.exp(-(z**3) * s**2 / 6 * weighted_kernel_power(3, t))


def moderate_rate(x, s, t):
    """x^2 / (s^2 int_0^t r^2)."""
    _check_unit(s=s, t=t)
    denom = s**2 * weighted_kernel_power(2, t)
    if denom == 0:
        raise DomainError("moderate rate is degenerate for s = 0 or t = 0")
    return x**2 / denom


def gaussian_rate(x, s, t):
    """x^2 / (2 sigma^2) with the CLT variance sigma^2 = (s^2/2) c(t, t)."""
    var = s**2 / 2 * kernel_c(t, t)
    if var == 0:
        raise DomainError("degenerate variance")
    return x**2 / (2 * var)


def ldp_lambda(lam, s, t):
    """Limiting scaled CGF -(s^2/2) int_0^t log(1 + lam r_t(y)) dy, lam > -1/t."""
    _check_unit(s=s, t=t)
    if t == 0:
        return 0.0
    if lam <= -1.0 / t:
        raise DomainError(f"lambda must exceed -1/t = {-1.0 / t}, got {lam}")
    if t == 1:
        return -(s**2) / 2 * math.log1p(lam)
    r = _ratio(t)
    return -(s**2) / 2 * _quad(lambda y: math.log1p(lam * r(y)), 0.0, t)


def ldp_lambda_quad(lam, s, t):
    """ldp_lambda without the t = 1 shortcut."""
    if lam <= -1.0 / t:
        raise DomainError(f"lambda must exceed -1/t = {-1.0 / t}, got {lam}")
    return -(s**2) / 2 * _quad(lambda y: math.log1p(lam * (t - y) / (1.0 - y)), 0.0, t)


def ldp_lambda_series(lam, s, t, terms=40):
    """Power series sum_j (-1)^{j+1} lam^j / j * int_0^t r^j, times -(s^2/2).

    Only convergent for |lam| * t < 1.
    """
    total = sum((-1) ** (j + 1) * lam**j / j * weighted_kernel_power(j, t) for j in range(1, terms + 1))
    return -(s**2) / 2 * total


# The maximiser of lam x - Lambda(lam) can sit extremely close to the pole
# lam = -1/t (the slope diverges only logarithmically there), closer than a
# double can resolve next to -1/t.  The search therefore runs in the gap
# g = lam + 1/t = e^u, using the cancellation-free form
#
#     1 + lam r_t(y) = y (1 - t) / (t (1 - y)) + g r_t(y) = y a(y) + g r_t(y),
#
# and integrates in v = log y so that any g > 0 is representable.

V_TAIL = 50.0


def _log_pieces(v, t):
    y = math.exp(v)
    log_a = math.log1p(-t) - math.log(t) - math.log1p(-y)
    r = (t - y) / (1.0 - y)
    return log_a, r


def _gap_slope_integral(u, t):
    """int_0^t r / (1 + lam r) dy at lam = -1/t + e^u."""
    if t == 1:
        return math.exp(-u)

    def h(v):
        log_a, r = _log_pieces(v, t)
        if r <= 0:
            return 0.0
        # r / (a + e^{u - v} r), arranged to avoid overflow
        if v >= u:
            return r / (math.exp(log_a) + math.exp(u - v) * r)
        w = math.exp(v - u)
        return r * w / (math.exp(log_a) * w + r)

    top = math.log(t)
    lo = min(u, top) - V_TAIL
    knee = u + math.log(t) - (math.log1p(-t) - math.log(t))
    pts = [knee] if lo < knee < top else None
    val, _ = integrate.quad(h, lo, top, epsabs=QUAD_EPS, epsrel=QUAD_EPS, limit=400, points=pts)
    return val


def _gap_log_integral(u, t):
    """int_0^t log(1 + lam r) dy at lam = -1/t + e^u."""
    if t == 1:
        return u

    def f(v):
        log_a, r = _log_pieces(v, t)
        first = v + log_a
        inner = first if r <= 0 else float(np.logaddexp(first, u + math.log(r)))
        return inner * math.exp(v)

    top = math.log(t)
    lo = min(u, top) - V_TAIL
    knee = u + math.log(t) - (math.log1p(-t) - math.log(t))
    pts = [knee] if lo < knee < top else None
    val, _ = integrate.quad(f, lo, top, epsabs=QUAD_EPS, epsrel=QUAD_EPS, limit=400, points=pts)
    return val


def _gap_slope(u, x, s, t):
    # d/dlam [lam x - Lambda(lam)] at lam = -1/t + e^u; decreasing in u
    return x + s**2 / 2 * _gap_slope_integral(u, t)


def ldp_rate(x, s, t):
    """Fenchel-Legendre transform sup_{lam > -1/t} (lam x - Lambda(lam)).

    The objective is concave in lam; its slope tends to +inf at lam = -1/t
    and to x as lam -> inf, so the supremum is +inf for x >= 0 and
    otherwise attained at the root of the slope.
    """
    _check_unit(s=s, t=t)
    if s == 0 or t == 0:
        raise DomainError("rate function is degenerate for s = 0 or t = 0")
    if x >= 0:
        return RateEval(x, math.inf, None)
    lo, hi = -1.0, 1.0
    while _gap_slope(lo, x, s, t) <= 0:
        lo *= 2.0
        if lo < -1e6:
            raise ArithmeticError("could not bracket the maximiser near the pole")
    while _gap_slope(hi, x, s, t) > 0:
        hi *= 2.0
        if hi > 700:
            return RateEval(x, math.inf, None)
    u = optimize.brentq(_gap_slope, lo, hi, args=(x, s, t), xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=500)
    lam = -1.0 / t + math.exp(u)
    value = lam * x + s**2 / 2 * _gap_log_integral(u, t)
    return RateEval(x, max(value, 0.0), lam)


def ldp_rate_t1(x, s):
    """Closed form of the t = 1 rate: -x - s^2/2 + s^2 log s - (s^2/2) log(-2x).

    This is the transform of -(s^2/2) log(1 + lam); the maximiser is
    lam* = -1 - s^2/(2x).
    """
    if x >= 0:
        return math.inf
    return -x - s**2 / 2 + s**2 * math.log(s) - s**2 / 2 * math.log(-2 * x)


def ldp_rate_t1_plus_log(x, s):
    """The variant -(x + s^2/2) + s^2 log s + (s^2/2) log(-2x).

    Kept only to document that the ``+ log`` sign does not match the
    numeric transform.  It is not a rate function: at x = -s^2/2 it equals
    2 s^2 log s, which is negative for s < 1.
    """
    if x >= 0:
        return math.inf
    return -(x + s**2 / 2) + s**2 * math.log(s) + s**2 / 2 * math.log(-2 * x)


def tail_asymptotic(x, params, s, t):
    """(1/(|x| sqrt(2 pi t_n))) exp(-t_n x^2/2 - x^3 (s^2/6) int_0^t r^3).

    ``params`` is either the speed t_n itself or a ProcessParams, in which
    case the exact speed is used.
    """
    if isinstance(params, (int, float)):
        speed = float(params)
    else:
        speed = mod_gaussian_speed(params, s, t)[0]
    if speed <= 0:
        raise DomainError("speed t_n must be positive")
    if x == 0:
        raise DomainError("tail approximation undefined at x = 0")
    cubic = x**3 * s**2 / 6 * weighted_kernel_power(3, t)
    return math.exp(-speed * x**2 / 2 - cubic) / (abs(x) * math.sqrt(2 * math.pi * speed))
