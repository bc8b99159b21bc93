"""
Pre-limit processes of the transitory queue.

Everything is built from one :class:`QueueRealization` (sorted arrival clocks
and service requirements in FCFS order) with the exact path algebra of
:mod:`tqlab.paths`. Unscaled time is the time of the clocks ``T_i``; service
requirement ``S_i`` occupies the server for ``S_i / n`` time units.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Optional, TextIO, Tuple

import numpy as np

from .models import ArrivalModel, ServiceModel
from .paths import TIME_TOL, CadlagPath, DomainError, compose, reflect

DIFFUSION_TIME_EXP = -1.0 / 3.0
GRID_DENSITY = 512


@dataclass(frozen=True, eq=False)
class QueueRealization:
    """Arrival clocks and service requirements of one simulated system.

    Only the customers that arrive before ``horizon`` need to be materialized;
    ``n`` is the population size used in every scaling.
    """

    n: int
    arrival_times: np.ndarray
    service_times: np.ndarray
    horizon: float
    extra_services: Optional[Callable[[int], np.ndarray]] = None

    def __post_init__(self):
        T = np.asarray(self.arrival_times, dtype=float)
        S = np.asarray(self.service_times, dtype=float)
        if T.size != S.size:
            raise ValueError("need one service requirement per arrival")
        if T.size > self.n:
            raise ValueError("more arrivals than the population size")
        if T.size and (np.any(np.diff(T) < 0) or T[0] <= 0):
            raise ValueError("arrival times must be positive and sorted")
        if np.any(S < 0):
            raise ValueError("service requirements must be nonnegative")
        object.__setattr__(self, "arrival_times", T)
        object.__setattr__(self, "service_times", S)

    @property
    def partial_sums(self) -> np.ndarray:
        """Server time needed by the first ``m`` customers, ``m = 0..K``."""
        return np.concatenate(([0.0], np.cumsum(self.service_times) / self.n))

    def to_csv(self, stream: TextIO) -> None:
        """Audit dump with columns ``i,T_i,S_i,D_i``."""
        D = departure_times(self)
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["i", "T_i", "S_i", "D_i"])
        for i, (t, s, d) in enumerate(zip(self.arrival_times, self.service_times, D), start=1):
            writer.writerow([i, repr(float(t)), repr(float(s)), repr(float(d))])


def simulate(arrival: ArrivalModel, service: ServiceModel, n: int, horizon: float,
             rng: np.random.Generator, window: bool = True) -> QueueRealization:
    """Draw a realization; with ``window`` only customers arriving by ``horizon`` are drawn."""
    if window:
        T = arrival.sample_window(n, horizon, rng)
    else:
        T = arrival.sample(n, rng)
    S = service.sample(T.size, rng)
    return QueueRealization(n, T, S, horizon, extra_services=lambda m: service.sample(m, rng))


def simulate_scaled(arrival: ArrivalModel, service: ServiceModel, n: int, scaled_horizon: float,
                    rng: np.random.Generator) -> QueueRealization:
    """Realization covering diffusion time ``[0, scaled_horizon]``."""
    return simulate(arrival, service, n, scaled_horizon * n ** DIFFUSION_TIME_EXP, rng)


def arrival_counting(r: QueueRealization) -> CadlagPath:
    return CadlagPath.step(r.arrival_times, 1.0, r.horizon)


def renewal_counting(r: QueueRealization, t_max: float) -> CadlagPath:
    """``S^n(t) = max{m >= 0 : S_1 + ... + S_m <= n t}`` on ``[0, t_max]``.

    Extends the service sequence through ``r.extra_services`` when the
    materialized requirements run out before ``t_max``.
    """
    P = r.partial_sums[1:]
    total = P[-1] if P.size else 0.0
    if total < t_max - TIME_TOL:
        if r.extra_services is None:
            raise DomainError(f"service pool covers [0, {total}] only, need {t_max}")
        chunks = [r.service_times]
        while total < t_max - TIME_TOL:
            extra = np.asarray(r.extra_services(max(64, r.service_times.size)), dtype=float)
            chunks.append(extra)
            total += extra.sum() / r.n
        P = np.cumsum(np.concatenate(chunks)) / r.n
    # a partial sum equal to t_max up to round-off still counts
    P = P[P <= t_max + TIME_TOL]
    return CadlagPath.step(P, 1.0, max(t_max, P[-1] if P.size else 0.0))


def cumulative_input(r: QueueRealization, A: CadlagPath) -> CadlagPath:
    """``C^n(t)``: work (in server time) brought by the arrivals up to ``t``."""
    counts = np.rint(A.right_values).astype(int)
    return CadlagPath(A.breakpoints, r.partial_sums[counts], np.zeros_like(A.slopes), A.horizon)


def netput(C: CadlagPath) -> CadlagPath:
    return C - CadlagPath.line(1.0, C.horizon)


def busy_idle(N: CadlagPath) -> Tuple[CadlagPath, CadlagPath]:
    """Cumulative busy time ``B = t - psi(N)`` and idle time ``I = psi(N)``."""
    _, idle = reflect(N)
    return CadlagPath.line(1.0, N.horizon) - idle, idle


def workload(N: CadlagPath) -> CadlagPath:
    return reflect(N)[0]


def queue_length(A: CadlagPath, SB: CadlagPath) -> CadlagPath:
    """``Q = A - S(B)``, with ``SB`` the served-customer count ``S(B(t))``."""
    return A - SB


def departure_times(r: QueueRealization) -> np.ndarray:
    """FCFS departures by the Lindley recursion ``D_i = max(T_i, D_{i-1}) + S_i/n``."""
    D = np.empty(r.arrival_times.size)
    last = 0.0
    for i, (t, s) in enumerate(zip(r.arrival_times, r.service_times)):
        last = max(t, last) + s / r.n
        D[i] = last
    return D


def queue_length_oracle(r: QueueRealization) -> CadlagPath:
    """Event-driven queue length, independent of the reflection map."""
    D = departure_times(r)
    times = np.concatenate((r.arrival_times, D))
    sizes = np.concatenate((np.ones(D.size), -np.ones(D.size)))
    return CadlagPath.step(times, sizes, r.horizon)


def free_process(A: CadlagPath, SB: CadlagPath, B: CadlagPath, f0: float, mean_service: float,
                 rate_scale: float = 1.0) -> CadlagPath:
    """Free process whose reflection is the queue length.

    ``X = A - S(B) + rate_scale * (B / E[S] - f0 t)``. With ``rate_scale = 1``
    the reflection term is ``f0 t - B / E[S]``; with ``rate_scale = n`` the
    drift is expressed in customers, matching the diffusion-scaled free
    process.
    """
    fluid = B / mean_service - CadlagPath.line(f0, B.horizon)
    return A - SB + rate_scale * fluid


def virtual_wait(C: CadlagPath, B: CadlagPath) -> CadlagPath:
    return C - B


def diffusion_scale(path: CadlagPath, n: int, space_exp: float, time_exp: float = DIFFUSION_TIME_EXP,
                    horizon: Optional[float] = None) -> CadlagPath:
    """``u -> n**space_exp * path(u * n**time_exp)``.

    ``space_exp`` is -1/3 for the diffusion-scaled queue length, -2/3 for the
    fluid-scaled arrival count, +1/3 for the fluid-scaled busy time and +2/3
    for the diffusion-scaled virtual waiting time.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    factor = float(n) ** time_exp
    if horizon is not None and horizon * factor > path.horizon * (1 + TIME_TOL) + TIME_TOL:
        raise DomainError(f"scaled horizon {horizon} needs unscaled {horizon * factor} > {path.horizon}")
    return path.rescale(factor, float(n) ** space_exp, horizon)


def _grid(horizon: float, density: int = GRID_DENSITY) -> np.ndarray:
    k = int(np.floor(horizon * density + 1e-9))
    g = np.arange(k + 1) / density
    return g if g[-1] >= horizon - 1e-12 else np.append(g, horizon)


def _scaled_horizon(path: CadlagPath, n: int, horizon: Optional[float]) -> float:
    return path.horizon * float(n) ** (1.0 / 3.0) if horizon is None else float(horizon)


def centered_arrival(A: CadlagPath, arrival: ArrivalModel, n: int, horizon: Optional[float] = None,
                     beta: float = 2.0 / 3.0, alpha: float = 1.0 / 3.0) -> CadlagPath:
    """``n**beta * (A(t n**-alpha) / n - F_T(t n**-alpha))`` as a path.

    The smooth centering is interpolated on a grid of 512 points per unit
    of scaled time; at grid points the value is exact.
    """
    if horizon is None:
        horizon = A.horizon * float(n) ** alpha
    jumps = diffusion_scale(A, n, beta - 1.0, -alpha, horizon)
    g = _grid(horizon)
    smooth = CadlagPath.interpolate(g, -float(n) ** beta * arrival.cdf(g * float(n) ** -alpha), horizon)
    return jumps + smooth


def centered_service(S: CadlagPath, service: ServiceModel, n: int, horizon: Optional[float] = None) -> CadlagPath:
    """``n**(2/3) * (S(t n**-1/3) / n - t n**-1/3 / E[S])``."""
    horizon = _scaled_horizon(S, n, horizon)
    counts = diffusion_scale(S, n, -1.0 / 3.0, horizon=horizon)
    return counts - CadlagPath.line(float(n) ** (1.0 / 3.0) / service.mean, horizon)


def drift_curve(arrival: ArrivalModel, n: int, grid) -> CadlagPath:
    """``n**(2/3) * (F_T(t n**-1/3) - f_T(0) t n**-1/3)`` interpolated on ``grid``.

    ``grid`` is either an increasing array starting at 0 or a scaled horizon,
    in which case the default grid density is used.
    """
    g = _grid(float(grid)) if np.ndim(grid) == 0 else np.asarray(grid, dtype=float)
    h = g * float(n) ** (-1.0 / 3.0)
    values = float(n) ** (2.0 / 3.0) * (arrival.cdf(h) - arrival.density_at_zero * h)
    return CadlagPath.interpolate(g, values)


@dataclass(frozen=True, eq=False)
class QueueProcesses:
    """All unscaled processes of one realization."""

    A: CadlagPath
    C: CadlagPath
    N: CadlagPath
    B: CadlagPath
    I: CadlagPath
    L: CadlagPath
    S: CadlagPath
    SB: CadlagPath
    Q: CadlagPath

    @property
    def W(self) -> CadlagPath:
        return virtual_wait(self.C, self.B)

    def free(self, f0: float, mean_service: float, rate_scale: float = 1.0) -> CadlagPath:
        return free_process(self.A, self.SB, self.B, f0, mean_service, rate_scale)


def build_processes(r: QueueRealization) -> QueueProcesses:
    A = arrival_counting(r)
    C = cumulative_input(r, A)
    N = netput(C)
    L, I = reflect(N)
    B = CadlagPath.line(1.0, N.horizon) - I
    S = renewal_counting(r, max(B.terminal_value, 0.0))
    SB = compose(S, B)
    return QueueProcesses(A=A, C=C, N=N, B=B, I=I, L=L, S=S, SB=SB, Q=queue_length(A, SB))
