"""
Grid sampler for the limiting diffusion.

The free limit is ``sqrt(f0) W1(t) - sqrt(var S) / E[S]**1.5 W2(t) + f0' t**2 / 2``
with independent standard Brownian motions ``W1, W2``; the queue-length limit
is its reflection at zero. Brownian increments are exact Gaussians on the grid,
so the only discretization error is the running minimum taken over grid
points instead of continuous time.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .models import ArrivalModel, ServiceModel


@dataclass(frozen=True)
class LimitParams:
    f0: float
    f0p: float
    mean_service: float
    var_service: float

    def __post_init__(self):
        if not self.f0 > 0:
            raise ValueError("f0 must be positive")
        if self.var_service < 0:
            raise ValueError("service variance must be nonnegative")
        if self.f0p > 0:
            raise ValueError("f0p must be nonpositive when the density peaks at zero")

    @classmethod
    def from_models(cls, arrival: ArrivalModel, service: ServiceModel) -> "LimitParams":
        return cls(arrival.density_at_zero, arrival.density_slope_at_zero, service.mean, service.variance)

    @property
    def service_noise(self) -> float:
        """Coefficient of the service Brownian motion, ``sigma / E[S]**1.5``."""
        return np.sqrt(self.var_service) / self.mean_service ** 1.5


@dataclass(frozen=True, eq=False)
class GridPath:
    """Values on the uniform grid ``k * step``; ``values`` may hold a batch of
    paths along its leading axes."""

    step: float
    values: np.ndarray

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("grid step must be positive")
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError("grid values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def times(self) -> np.ndarray:
        return self.step * np.arange(self.values.shape[-1])

    @property
    def horizon(self) -> float:
        return self.step * (self.values.shape[-1] - 1)

    def at(self, t: float) -> np.ndarray:
        """Linear interpolation between the neighbouring grid points."""
        x = t / self.step
        k = min(int(np.floor(x + 1e-9)), self.values.shape[-1] - 1)
        w = x - k
        if k + 1 >= self.values.shape[-1] or abs(w) < 1e-9:
            return self.values[..., k]
        return (1.0 - w) * self.values[..., k] + w * self.values[..., k + 1]


def _grid_size(T: float, step: float) -> int:
    return int(np.ceil(T / step - 1e-9))


def _brownian(rng: np.random.Generator, k: int, step: float, size) -> np.ndarray:
    shape = (k,) if size is None else (*np.atleast_1d(size), k)
    w = np.cumsum(rng.standard_normal(shape) * np.sqrt(step), axis=-1)
    return np.concatenate((np.zeros(shape[:-1] + (1,)), w), axis=-1)


def sample_free_limit(p: LimitParams, T: float, step: float, rng: np.random.Generator,
                      size: Optional[int] = None) -> GridPath:
    """Sample the free limit on ``[0, T]``; ``size`` draws a batch of paths."""
    k = _grid_size(T, step)
    t = step * np.arange(k + 1)
    w1 = _brownian(rng, k, step, size)
    w2 = _brownian(rng, k, step, size)
    x = np.sqrt(p.f0) * w1 - p.service_noise * w2 + 0.5 * p.f0p * t ** 2
    return GridPath(step, x)


def reflect_grid(x: GridPath) -> GridPath:
    """``q_k = x_k - min(0, min_{j<=k} x_j)`` along the last axis."""
    low = np.minimum(np.minimum.accumulate(x.values, axis=-1), 0.0)
    return GridPath(x.step, x.values - low)


def equivalent_variance(p: LimitParams) -> float:
    """Variance rate of the single Brownian motion equal in law to the noise
    of the free limit; ``E[S^2] / E[S]^3`` under heavy traffic."""
    return p.f0 + p.var_service / p.mean_service ** 3


def sample_single_bm_limit(p: LimitParams, T: float, step: float, rng: np.random.Generator,
                           size: Optional[int] = None, sigma: Optional[float] = None) -> GridPath:
    """``sigma W(t) + f0' t**2 / 2`` with ``sigma**2 = equivalent_variance(p)``
    unless ``sigma`` is given."""
    if sigma is None:
        sigma = np.sqrt(equivalent_variance(p))
    k = _grid_size(T, step)
    t = step * np.arange(k + 1)
    return GridPath(step, sigma * _brownian(rng, k, step, size) + 0.5 * p.f0p * t ** 2)
