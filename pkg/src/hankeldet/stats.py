"""Kolmogorov-Smirnov tests with asymptotic p-values.

Thin wrappers over scipy that enforce a minimum sample size, plus a few
reference CDFs used by the experiments.
"""

import numpy as np
from scipy import stats as _st

from .errors import DomainError

MIN_SIZE = 50


def _check_size(x, name="sample"):
    x = np.asarray(x, dtype=float)
    if x.size < MIN_SIZE:
        raise DomainError(f"{name} has {x.size} points; KS needs at least {MIN_SIZE}")
    return x


def ks_test(sample, cdf):
    """One-sample KS statistic and asymptotic Kolmogorov p-value."""
    x = _check_size(sample)
    res = _st.kstest(x, cdf, method="asymp")
    return float(res.statistic), float(res.pvalue)


def ks_two_sample(a, b):
    """Two-sample KS statistic and asymptotic p-value."""
    a = _check_size(a, "first sample")
    b = _check_size(b, "second sample")
    res = _st.ks_2samp(a, b, method="asymp")
    return float(res.statistic), float(res.pvalue)


def normal_cdf(x):
    return _st.norm.cdf(x)


def uniform_cdf(x):
    return np.clip(x, 0.0, 1.0)


def beta_cdf(a, b):
    return lambda x: _st.beta.cdf(x, a, b)
