"""Seeded validation experiments.

Every replication draws from its own generator ``stream(seed, experiment_id,
n, rep)``, so serial and parallel runs give identical numbers. Limit samples
use ``n = 0``.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Callable, Dict, List, Sequence

import numpy as np

from .. import stats
from ..limit import (LimitParams, equivalent_variance, reflect_grid, sample_free_limit,
                     sample_single_bm_limit)
from ..models import stream
from ..paths import CadlagPath, integrate, max_discrepancy, reflect, sup_diff
from ..prelimit import (QueueRealization, arrival_counting, build_processes, centered_arrival,
                        diffusion_scale, queue_length_oracle, simulate_scaled)
from .config import ConfigError, ExperimentConfig
from .report import ExperimentReport

EXPERIMENT_IDS = {"convergence": 1, "fdd": 2, "lln": 3, "littles": 4, "equivalence": 5, "oracle": 6}
GAP_TOL = 1e-12
LIMIT_CHUNK = 1000


def worker_count() -> int:
    """Process count from ``TQLAB_THREADS`` (default 1, i.e. serial)."""
    raw = os.environ.get("TQLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"TQLAB_THREADS must be an integer, got {raw!r}") from None


def _fan_out(fn: Callable, items: Sequence, workers: int) -> List:
    """``[fn(x) for x in items]``, optionally across processes; order is kept."""
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


def _require_heavy_traffic(config: ExperimentConfig) -> None:
    gap = config.gap()
    if abs(gap) > GAP_TOL:
        raise ConfigError(f"heavy-traffic condition E[S] f_T(0) = 1 fails: gap = {gap:.6g}")


def _low_power(config: ExperimentConfig) -> bool:
    return config.replications < config.min_power_replications


def _realization(config: ExperimentConfig, experiment: str, n: int, rep: int, horizon: float) -> QueueRealization:
    rng = stream(config.seed, EXPERIMENT_IDS[experiment], n, rep)
    return simulate_scaled(config.arrival_model, config.service_model, n, horizon, rng)


def _add_trend(report: ExperimentReport, statistic: str, values: Dict[int, float], op: str, t=None,
               low_power: bool = False) -> None:
    """One row per n comparing against the previous n (infinity for the first)."""
    prev = math.inf
    for n, v in values.items():
        report.add(statistic, v, prev, op, n=n, t=t, low_power=low_power)
        prev = v


# ---------------------------------------------------------------- convergence

def _queue_marginals(config: ExperimentConfig, n: int, rep: int) -> np.ndarray:
    horizon = max(config.eval_times)
    p = build_processes(_realization(config, "convergence", n, rep, horizon))
    t = np.asarray(config.eval_times) * float(n) ** (-1.0 / 3.0)
    return float(n) ** (-1.0 / 3.0) * p.Q(t)


def _limit_marginals(sampler: Callable, count: int, times: Sequence[float], step: float,
                     rng: np.random.Generator) -> np.ndarray:
    """``(count, len(times))`` reflected limit values, drawn in chunks."""
    out = []
    remaining = count
    while remaining > 0:
        size = min(LIMIT_CHUNK, remaining)
        q = reflect_grid(sampler(max(times), step, rng, size=size))
        out.append(np.stack([q.at(t) for t in times], axis=-1))
        remaining -= size
    return np.concatenate(out, axis=0)


def run_convergence(config: ExperimentConfig) -> ExperimentReport:
    """KS distance between the scaled queue length and its reflected limit."""
    _require_heavy_traffic(config)
    report = ExperimentReport("convergence", config)
    params = LimitParams.from_models(config.arrival_model, config.service_model)
    rng = stream(config.seed, EXPERIMENT_IDS["convergence"], 0, 0)
    limit = _limit_marginals(partial(sample_free_limit, params), config.n_limit, config.eval_times,
                             config.step, rng)
    low = _low_power(config)
    workers = worker_count()
    ks: Dict[float, Dict[int, float]] = {t: {} for t in config.eval_times}
    prelimit = {}
    for n in config.n_values:
        q = np.array(_fan_out(partial(_queue_marginals, config, n), range(config.replications), workers))
        prelimit[n] = q
        for j, t in enumerate(config.eval_times):
            ks[t][n] = stats.two_sample_ks(q[:, j], limit[:, j])
    n_max = config.n_values[-1]
    for t in config.eval_times:
        _add_trend(report, "ks_nonincreasing", ks[t], "<=", t=t, low_power=low)
        report.add("ks", ks[t][n_max], config.ks_threshold(t), n=n_max, t=t, low_power=low)
    report.notes["low_power"] = low
    report.notes["limit_samples"] = config.n_limit
    report.samples.update(prelimit=prelimit, limit=limit)
    return report


# ---------------------------------------------------------------- fdd

def _arrival_fdd(config: ExperimentConfig, n: int, rep: int) -> np.ndarray:
    t1, t2 = config.fdd_times
    r = _realization(config, "fdd", n, rep, t2)
    A = arrival_counting(r)
    a = config.arrival_model
    right = centered_arrival(A, a, n, horizon=t2)
    wrong = centered_arrival(A, a, n, horizon=t2, beta=config.wrong_beta)
    return np.array([right(t1), right(t2), wrong(t1)])


def finite_n_covariance(arrival, n: int, t1: float, t2: float) -> np.ndarray:
    """Exact covariance of the centered count at finite ``n``.

    ``n**(1/3) F(w_i) (1 - F(w_j))`` with ``w = t n**(-1/3)``; it tends to the
    limit covariance at rate ``n**(-1/3)``.
    """
    F = arrival.cdf(np.array([t1, t2]) * float(n) ** (-1.0 / 3.0))
    lo = np.minimum.outer(F, F)
    hi = np.maximum.outer(F, F)
    return float(n) ** (1.0 / 3.0) * lo * (1.0 - hi)


def run_fdd(config: ExperimentConfig) -> ExperimentReport:
    """Two-time covariance, marginal law and variance order of the centered arrival count."""
    _require_heavy_traffic(config)
    report = ExperimentReport("fdd", config)
    t1, t2 = config.fdd_times
    f0 = config.arrival_model.density_at_zero
    target = stats.theoretical_cov2(f0, t1, t2)
    low = _low_power(config)
    workers = worker_count()
    draws = {}
    for n in config.n_values:
        x = np.array(_fan_out(partial(_arrival_fdd, config, n), range(config.replications), workers))
        draws[n] = x
        cov = stats.empirical_cov2(x[:, :2])
        for (i, j), name in (((0, 0), "cov_11"), ((0, 1), "cov_12"), ((1, 1), "cov_22")):
            report.add(f"{name}_abs_error", abs(cov[i, j] - target[i, j]), config.cov_tolerance, n=n,
                       low_power=low)
        m = x[:, 0]
        report.add("marginal_ks", stats.one_sample_ks(m, stats.normal_cdf(math.sqrt(f0 * t1))),
                   stats.ks_critical(m.size), n=n, t=t1, low_power=low)
        report.add("marginal_mean_z", abs(m.mean()) / stats.standard_error(m), config.mean_z_threshold,
                   n=n, t=t1, low_power=low)
        ratio = stats.variance_order(m, f0 * t1)
        report.add("variance_ratio_abs_error", abs(ratio - 1.0), config.variance_ratio_tolerance, n=n, t=t1,
                   low_power=low)
        # negative control: the same check on a mis-scaled count must fail
        wrong = stats.variance_order(x[:, 2], f0 * t1)
        report.add("wrong_exponent_log_ratio", abs(math.log(wrong)), math.log(2.0), ">", n=n, t=t1,
                   low_power=low)
        report.notes.setdefault("variance_ratio", {})[str(n)] = ratio
        report.notes.setdefault("wrong_exponent_variance_ratio", {})[str(n)] = wrong
    report.notes["target_covariance"] = target.tolist()
    report.notes["finite_n_covariance"] = {str(n): finite_n_covariance(config.arrival_model, n, t1, t2).tolist()
                                           for n in config.n_values}
    report.notes["low_power"] = low
    report.samples["draws"] = draws
    return report


# ---------------------------------------------------------------- lln

def _fluid_deviations(config: ExperimentConfig, n: int, rep: int) -> np.ndarray:
    T = config.scaled_horizon
    p = build_processes(_realization(config, "lln", n, rep, T))
    f0 = config.arrival_model.density_at_zero
    A = diffusion_scale(p.A, n, -2.0 / 3.0, horizon=T)
    B = diffusion_scale(p.B, n, 1.0 / 3.0, horizon=T)
    C = diffusion_scale(p.C, n, 1.0 / 3.0, horizon=T)
    return np.array([
        stats.sup_dev_from_line(A, f0, T),
        stats.sup_dev_from_line(B, 1.0, T),
        stats.sup_dev_from_line(C, 1.0, T),
        stats.sup_dev_from_line(A, f0 * config.lln_control_slope_factor, T),
    ])


def run_lln(config: ExperimentConfig) -> ExperimentReport:
    """Median sup-deviation of the fluid-scaled processes from their linear limits."""
    _require_heavy_traffic(config)
    report = ExperimentReport("lln", config)
    low = _low_power(config)
    workers = worker_count()
    names = ("arrival", "busy_time", "cumulative_input")
    medians = {name: {} for name in names}
    control = {}
    for n in config.n_values:
        d = np.array(_fan_out(partial(_fluid_deviations, config, n), range(config.replications), workers))
        med = np.median(d, axis=0)
        for k, name in enumerate(names):
            medians[name][n] = float(med[k])
        control[n] = float(med[3])
    n_max = config.n_values[-1]
    for name in names:
        _add_trend(report, f"{name}_median_decreasing", medians[name], "<", low_power=low)
        report.add(f"{name}_median_sup_dev", medians[name][n_max], config.lln_threshold, n=n_max, low_power=low)
    # negative control: a wrong slope keeps the deviation above the threshold
    report.add("control_misslope_arrival", control[n_max], config.lln_threshold, ">", n=n_max, low_power=low)
    report.notes["low_power"] = low
    report.samples["medians"] = medians
    return report


# ---------------------------------------------------------------- little's law

def littles_discrepancy(r: QueueRealization, mean_service: float, scaled_horizon: float) -> float:
    """``sup_{t <= T} |W_hat(t) - E[S] Q_hat(t)|`` for one realization."""
    n = r.n
    p = build_processes(r)
    W = diffusion_scale(p.W, n, 2.0 / 3.0, horizon=scaled_horizon)
    Q = diffusion_scale(p.Q, n, -1.0 / 3.0, horizon=scaled_horizon)
    return sup_diff(W, mean_service * Q, scaled_horizon)


def _littles_one(config: ExperimentConfig, n: int, rep: int) -> float:
    T = config.scaled_horizon
    return littles_discrepancy(_realization(config, "littles", n, rep, T), config.service_model.mean, T)


def run_littles_law(config: ExperimentConfig) -> ExperimentReport:
    """Median sup-distance between scaled virtual wait and mean service times queue length."""
    _require_heavy_traffic(config)
    report = ExperimentReport("littles", config)
    low = _low_power(config)
    workers = worker_count()
    medians = {}
    for n in config.n_values:
        d = _fan_out(partial(_littles_one, config, n), range(config.replications), workers)
        medians[n] = float(np.median(d))
    _add_trend(report, "median_decreasing", medians, "<", low_power=low)
    n_max = config.n_values[-1]
    report.add("median_sup_dev", medians[n_max], config.littles_threshold, n=n_max, low_power=low)
    report.notes["low_power"] = low
    report.samples["medians"] = medians
    return report


# ---------------------------------------------------------------- limit equivalence

def run_limit_equivalence(config: ExperimentConfig) -> ExperimentReport:
    """Two-BM limit against the single-BM construction, plus an inflated-noise control."""
    _require_heavy_traffic(config)
    report = ExperimentReport("equivalence", config)
    params = LimitParams.from_models(config.arrival_model, config.service_model)
    m = config.equivalence_samples
    key = EXPERIMENT_IDS["equivalence"]
    times = config.eval_times
    two = _limit_marginals(partial(sample_free_limit, params), m, times, config.step,
                           stream(config.seed, key, 0, 1))
    one = _limit_marginals(partial(sample_single_bm_limit, params), m, times, config.step,
                           stream(config.seed, key, 0, 2))
    sigma = config.control_inflation * math.sqrt(equivalent_variance(params))
    inflated = _limit_marginals(partial(sample_single_bm_limit, params, sigma=sigma), m, times, config.step,
                                stream(config.seed, key, 0, 3))
    low = m < config.min_power_replications
    for j, t in enumerate(times):
        report.add("ks_two_vs_single_bm", stats.two_sample_ks(two[:, j], one[:, j]), config.equivalence_threshold,
                   t=t, low_power=low)
        report.add("ks_control_inflated", stats.two_sample_ks(two[:, j], inflated[:, j]), stats.ks_critical(m, m),
                   ">", t=t, low_power=low)
    report.notes["equivalent_variance"] = equivalent_variance(params)
    report.notes["low_power"] = low
    report.samples.update(two_bm=two, single_bm=one, inflated=inflated)
    return report


# ---------------------------------------------------------------- oracle

IDENTITIES = ("queue_vs_event_oracle", "reflection_vs_event_oracle", "reflection_rate_scaled",
              "idle_identity", "workload_identity", "complementarity_queue", "complementarity_workload",
              "empties")


def _draw_instance(config: ExperimentConfig, index: int) -> QueueRealization:
    rng = stream(config.seed, EXPERIMENT_IDS["oracle"], 0, index)
    n = int(rng.integers(1, config.oracle_max_n + 1))
    T = config.arrival_model.sample(n, rng)
    S = config.service_model.sample(n, rng)
    # long enough for everyone to leave
    return QueueRealization(n, T, S, float(T[-1] + S.sum() / n + 1.0))


def check_identities(r: QueueRealization, f0: float, mean_service: float) -> Dict[str, float]:
    """Worst violation of each pathwise identity on one realization.

    The queue built from the reflection map is compared with the event
    oracle exactly; the rest are floating-point identities.
    """
    p = build_processes(r)
    oracle = queue_length_oracle(r)
    X = p.free(f0, mean_service)
    phi, psi = reflect(X)
    phi_n, _ = reflect(p.free(f0, mean_service, rate_scale=r.n))
    fluid = CadlagPath.line(f0, r.horizon) - p.B / mean_service
    return {
        "queue_vs_event_oracle": max_discrepancy(p.Q, oracle),
        "reflection_vs_event_oracle": max_discrepancy(phi, oracle),
        "reflection_rate_scaled": max_discrepancy(phi_n, oracle),
        "idle_identity": sup_diff(psi, fluid),
        "workload_identity": sup_diff(p.W, p.L),
        "complementarity_queue": abs(integrate(phi, psi)),
        "complementarity_workload": abs(integrate(p.L, p.I)),
        "empties": abs(p.Q.terminal_value),
    }


def _oracle_one(config: ExperimentConfig, index: int) -> Dict[str, float]:
    r = _draw_instance(config, index)
    out = check_identities(r, config.arrival_model.density_at_zero, config.service_model.mean)
    out["n"] = r.n
    return out


def run_oracle_suite(config: ExperimentConfig) -> ExperimentReport:
    """Pathwise identities on many small random realizations."""
    _require_heavy_traffic(config)
    report = ExperimentReport("oracle", config)
    results = _fan_out(partial(_oracle_one, config), range(config.oracle_instances), worker_count())
    tol = config.identity_tolerance
    first = None
    for name in IDENTITIES:
        # the reflection-map queue is integer valued and must match exactly
        limit = 0.0 if name == "queue_vs_event_oracle" else tol
        values = np.array([res[name] for res in results])
        bad = np.flatnonzero(values > limit)
        report.add(f"{name}_violations", bad.size, 0, "<=")
        report.add(f"{name}_max_error", values.max(initial=0.0), limit, "<=")
        if bad.size and (first is None or bad[0] < first["instance"]):
            first = {"instance": int(bad[0]), "n": int(results[bad[0]]["n"]), "identity": name,
                     "error": float(values[bad[0]])}
    report.notes["instances"] = len(results)
    report.notes["first_counterexample"] = first
    return report


RUNNERS = {
    "convergence": run_convergence,
    "fdd": run_fdd,
    "lln": run_lln,
    "littles": run_littles_law,
    "equivalence": run_limit_equivalence,
    "oracle": run_oracle_suite,
}


def run_experiment(name: str, config: ExperimentConfig) -> ExperimentReport:
    if name not in RUNNERS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {', '.join(RUNNERS)}")
    start = time.perf_counter()
    report = RUNNERS[name](config)
    report.wall_time = time.perf_counter() - start
    return report
