"""Estimators and test statistics for the validation experiments."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr

from .paths import CadlagPath, DomainError, sup_diff

# asymptotic Kolmogorov quantiles c(alpha)
KS_C = {0.10: 1.224, 0.05: 1.358, 0.01: 1.628, 0.001: 1.949}


def _sample(x, name="sample") -> np.ndarray:
    a = np.asarray(x, dtype=float).ravel()
    if a.size == 0:
        raise DomainError(f"{name} is empty")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} has non-finite values")
    return a


def two_sample_ks(a, b) -> float:
    """``sup_x |F_a(x) - F_b(x)|`` over the merged sample."""
    a = np.sort(_sample(a, "a"))
    b = np.sort(_sample(b, "b"))
    x = np.concatenate((a, b))
    fa = np.searchsorted(a, x, side="right") / a.size
    fb = np.searchsorted(b, x, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def one_sample_ks(x, cdf) -> float:
    """Kolmogorov distance between the empirical cdf of ``x`` and ``cdf``."""
    x = np.sort(_sample(x))
    m = x.size
    F = np.asarray(cdf(x), dtype=float)
    upper = np.arange(1, m + 1) / m - F
    lower = F - np.arange(m) / m
    return float(max(upper.max(), lower.max()))


def normal_cdf(scale: float, loc: float = 0.0):
    return lambda x: ndtr((np.asarray(x, dtype=float) - loc) / scale)


def ks_critical(m: int, n: "int | None" = None, alpha: float = 0.01) -> float:
    """Large-sample critical value; one-sample when ``n`` is None."""
    c = KS_C[alpha]
    if n is None:
        return c / math.sqrt(m)
    return c * math.sqrt((m + n) / (m * n))


def empirical_cov2(pairs) -> np.ndarray:
    """Unbiased 2x2 sample covariance of an ``(R, 2)`` array of pairs."""
    x = np.asarray(pairs, dtype=float)
    if x.ndim != 2 or x.shape[1] != 2:
        raise DomainError("pairs must have shape (R, 2)")
    if x.shape[0] < 2:
        raise DomainError("need at least two pairs")
    return np.cov(x, rowvar=False, ddof=1)


def theoretical_cov2(f0: float, t1: float, t2: float) -> np.ndarray:
    """Covariance of ``(B(f0 t1), B(f0 t2))`` for a standard Brownian motion."""
    if not 0 < t1 <= t2:
        raise DomainError("need 0 < t1 <= t2")
    return f0 * np.array([[t1, t1], [t1, t2]])


def sup_dev_from_line(path: CadlagPath, slope: float, T: float) -> float:
    """``sup_{t<=T} |path(t) - slope t|``, left limits included."""
    return sup_diff(path, CadlagPath.line(slope, path.horizon), T)


def variance_order(samples, predicted: float) -> float:
    """Sample variance over the predicted variance."""
    x = _sample(samples)
    if x.size < 2:
        raise DomainError("need at least two samples")
    return float(np.var(x, ddof=1) / predicted)


def standard_error(samples) -> float:
    x = _sample(samples)
    return float(np.std(x, ddof=1) / math.sqrt(x.size))
