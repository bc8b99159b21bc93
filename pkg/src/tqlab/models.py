"""
Arrival-time and service-time distribution families.

Arrival models expose the quantities the heavy-traffic limit depends on: the
cdf ``F_T``, the density at zero ``f_T(0)`` and its slope ``f_T'(0)``. Service
models expose the first two moments. Both parse from short spec strings such
as ``exp:1.0``, ``unif:0,2``, ``tri:0,2``, ``det:1``, ``gamma:2,0.5``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np


class ModelError(ValueError):
    pass


def _parse(spec: str) -> Tuple[str, Tuple[float, ...]]:
    try:
        family, _, rest = spec.strip().partition(":")
        params = tuple(float(p) for p in rest.split(",")) if rest.strip() else ()
    except ValueError as exc:
        raise ModelError(f"cannot parse model spec {spec!r}") from exc
    return family.strip().lower(), params


def _fmt(x: float) -> str:
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


@dataclass(frozen=True)
class ArrivalModel:
    """Law of a customer's arrival clock ``T``.

    ``family`` is one of ``"exp"`` (rate), ``"unif"`` (support ``[0, b]``) or
    ``"tri"`` (density ``2(b - t)/b**2`` on ``[0, b]``).
    """

    family: str
    param: float

    def __post_init__(self):
        if self.family not in ("exp", "unif", "tri"):
            raise ModelError(f"unknown arrival family {self.family!r}")
        if not self.param > 0:
            raise ModelError("arrival parameter must be positive")

    @classmethod
    def exponential(cls, rate: float) -> "ArrivalModel":
        return cls("exp", rate)

    @classmethod
    def uniform(cls, b: float) -> "ArrivalModel":
        return cls("unif", b)

    @classmethod
    def triangular(cls, b: float) -> "ArrivalModel":
        return cls("tri", b)

    @classmethod
    def parse(cls, spec: str) -> "ArrivalModel":
        family, params = _parse(spec)
        family = {"exponential": "exp", "uniform": "unif", "triangular": "tri"}.get(family, family)
        if family == "exp" and len(params) == 1:
            return cls.exponential(params[0])
        if family in ("unif", "tri") and len(params) in (1, 2):
            if len(params) == 2 and params[0] != 0.0:
                raise ModelError(f"{family} arrivals must start at 0 so that f_T(0) is the maximum density")
            return cls(family, params[-1])
        raise ModelError(f"cannot parse arrival spec {spec!r}")

    @property
    def spec(self) -> str:
        if self.family == "exp":
            return f"exp:{_fmt(self.param)}"
        return f"{self.family}:0,{_fmt(self.param)}"

    def cdf(self, t):
        t = np.maximum(np.asarray(t, dtype=float), 0.0)
        if self.family == "exp":
            out = -np.expm1(-self.param * t)
        elif self.family == "unif":
            out = np.minimum(t / self.param, 1.0)
        else:
            x = np.minimum(t / self.param, 1.0)
            out = x * (2.0 - x)
        return float(out) if out.ndim == 0 else out

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        if self.family == "exp":
            out = -np.log1p(-u) / self.param
        elif self.family == "unif":
            out = u * self.param
        else:
            out = self.param * (1.0 - np.sqrt(1.0 - u))
        return float(out) if out.ndim == 0 else out

    @property
    def density_at_zero(self) -> float:
        if self.family == "exp":
            return self.param
        if self.family == "unif":
            return 1.0 / self.param
        return 2.0 / self.param

    @property
    def density_slope_at_zero(self) -> float:
        if self.family == "exp":
            return -self.param ** 2
        if self.family == "unif":
            return 0.0
        return -2.0 / self.param ** 2

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """``n`` i.i.d. arrival clocks, sorted."""
        return np.sort(self.ppf(rng.random(n)))

    def sample_window(self, n: int, window: float, rng: np.random.Generator) -> np.ndarray:
        """Sorted arrival clocks of ``n`` customers that fall in ``[0, window]``.

        Draws the count from Binomial(n, F(window)) and the clocks from the law
        conditioned on ``T <= window``; this has exactly the law of sampling
        all ``n`` clocks and discarding the late ones, at a cost proportional
        to the number kept.
        """
        p = self.cdf(window)
        k = int(rng.binomial(n, p))
        return np.sort(self.ppf(p * rng.random(k)))


@dataclass(frozen=True)
class ServiceModel:
    """Law of a service requirement ``S``.

    Families: ``"exp"`` (rate), ``"det"`` (value), ``"gamma"`` (shape,
    scale), ``"unif"`` (a, b).
    """

    family: str
    params: Tuple[float, ...]

    def __post_init__(self):
        arity = {"exp": 1, "det": 1, "gamma": 2, "unif": 2}
        if self.family not in arity:
            raise ModelError(f"unknown service family {self.family!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(self.params) != arity[self.family]:
            raise ModelError(f"{self.family} service needs {arity[self.family]} parameter(s)")
        if self.family == "unif":
            a, b = self.params
            if not 0 <= a < b:
                raise ModelError("uniform service needs 0 <= a < b")
        elif not all(p > 0 for p in self.params):
            raise ModelError("service parameters must be positive")

    @classmethod
    def exponential(cls, rate: float) -> "ServiceModel":
        return cls("exp", (rate,))

    @classmethod
    def deterministic(cls, value: float) -> "ServiceModel":
        return cls("det", (value,))

    @classmethod
    def gamma(cls, shape: float, scale: float) -> "ServiceModel":
        return cls("gamma", (shape, scale))

    @classmethod
    def uniform(cls, a: float, b: float) -> "ServiceModel":
        return cls("unif", (a, b))

    @classmethod
    def parse(cls, spec: str) -> "ServiceModel":
        family, params = _parse(spec)
        family = {"exponential": "exp", "deterministic": "det", "uniform": "unif"}.get(family, family)
        return cls(family, params)

    @property
    def spec(self) -> str:
        return f"{self.family}:" + ",".join(_fmt(p) for p in self.params)

    @property
    def mean(self) -> float:
        p = self.params
        if self.family == "exp":
            return 1.0 / p[0]
        if self.family == "det":
            return p[0]
        if self.family == "gamma":
            return p[0] * p[1]
        return 0.5 * (p[0] + p[1])

    @property
    def second_moment(self) -> float:
        p = self.params
        if self.family == "exp":
            return 2.0 / p[0] ** 2
        if self.family == "det":
            return p[0] ** 2
        if self.family == "gamma":
            return p[0] * (p[0] + 1.0) * p[1] ** 2
        a, b = p
        return (a * a + a * b + b * b) / 3.0

    @property
    def variance(self) -> float:
        p = self.params
        # closed forms avoid cancellation in second_moment - mean**2
        if self.family == "exp":
            return 1.0 / p[0] ** 2
        if self.family == "det":
            return 0.0
        if self.family == "gamma":
            return p[0] * p[1] ** 2
        return (p[1] - p[0]) ** 2 / 12.0

    def sample(self, m: int, rng: np.random.Generator) -> np.ndarray:
        """``m`` i.i.d. service requirements in generation order."""
        p = self.params
        if self.family == "exp":
            return rng.exponential(1.0 / p[0], m)
        if self.family == "det":
            return np.full(m, p[0])
        if self.family == "gamma":
            return rng.gamma(p[0], p[1], m)
        return rng.uniform(p[0], p[1], m)


def heavy_traffic_gap(arrival: ArrivalModel, service: ServiceModel) -> float:
    """``E[S] f_T(0) - 1``; zero when the system is critically loaded at time 0."""
    return service.mean * arrival.density_at_zero - 1.0


def sample_arrival_times(arrival: ArrivalModel, n: int, rng: np.random.Generator) -> np.ndarray:
    return arrival.sample(n, rng)


def sample_service_times(service: ServiceModel, m: int, rng: np.random.Generator) -> np.ndarray:
    return service.sample(m, rng)


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for the replication identified by ``keys``.

    ``(seed, keys)`` fully determines the stream, so replications can run in
    any order or in parallel and still reproduce bit for bit.
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)))
