"""The ten acceptance criteria, run at full size with the shipped configs.

Each test records a one-line verdict that ``conftest.py`` prints in the
terminal summary, then asserts it. All runs are single-process so the
runtime budgets are measured serially.
"""
import os
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE
from oracles import brute_reflection, random_piecewise_path
from tqlab.harness import load_config, run_experiment
from tqlab.models import stream
from tqlab.paths import reflect, sup_diff

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
ARRIVALS = ["exp:1", "unif:0,1", "tri:0,2"]
SERVICES = ["exp:1", "det:1", "gamma:2,0.5", "unif:0.5,1.5"]

pytestmark = pytest.mark.acceptance


@pytest.fixture(scope="module", autouse=True)
def serial():
    old = os.environ.get("TQLAB_THREADS")
    os.environ["TQLAB_THREADS"] = "1"
    yield
    if old is None:
        del os.environ["TQLAB_THREADS"]
    else:
        os.environ["TQLAB_THREADS"] = old


_cache = {}


def run(name, cfg, **overrides):
    key = (name, cfg, tuple(sorted(overrides.items())))
    if key not in _cache:
        _cache[key] = run_experiment(name, load_config(CONFIGS / f"{cfg}.cfg", **overrides))
    return _cache[key]


def record(k, passed, detail):
    ACCEPTANCE[k] = (bool(passed), detail)
    assert passed, detail


def _fmt_rows(report, statistic):
    return ", ".join(f"n={r.n}:{r.value:.4g}" for r in report.rows if r.statistic == statistic)


def test_criterion_01_oracle_equivalence():
    start = time.perf_counter()
    failures = []
    for a in ARRIVALS:
        for s in SERVICES:
            rep = run_experiment("oracle", load_config(CONFIGS / "oracle.cfg", arrival=a, service=s))
            assert rep.notes["instances"] == 1000
            if not rep.all_passed:
                failures.append(f"{a}/{s}: {rep.notes['first_counterexample']}")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 30.0
    record(1, ok, f"12 family pairs x 1000 instances, {len(failures)} failing pairs, {elapsed:.1f} s (< 30 s)"
           + (f"; {failures[0]}" if failures else ""))


def test_criterion_02_reflection_property_suite():
    start = time.perf_counter()
    worst = dict(neg=0.0, decr=0.0, ident=0.0, brute=0.0)
    for k in range(10 ** 4):
        rng = stream(20240601, 2, k)
        f = random_piecewise_path(rng, int(rng.integers(1, 40)), horizon=float(rng.uniform(0.5, 3.0)))
        phi, psi = reflect(f)
        worst["neg"] = max(worst["neg"], -min(phi.right_values.min(), phi.end_values.min()))
        worst["decr"] = max(worst["decr"], -min(psi.slopes.min(), psi.jumps().min()))
        worst["ident"] = max(worst["ident"], sup_diff(phi - psi, f))
        t = np.union1d(np.linspace(0.0, f.horizon, 64), f.breakpoints)
        bphi, bpsi = brute_reflection(f, t)
        worst["brute"] = max(worst["brute"], np.abs(phi(t) - bphi).max(), np.abs(psi(t) - bpsi).max())
    elapsed = time.perf_counter() - start
    ok = (worst["neg"] <= 1e-12 and worst["decr"] <= 1e-12 and worst["ident"] <= 1e-12
          and worst["brute"] <= 1e-6 and elapsed < 60.0)
    record(2, ok, f"10^4 paths: min phi {-worst['neg']:.2g}, worst psi decrease {worst['decr']:.2g}, "
                  f"|phi - psi - f| {worst['ident']:.2g}, brute force {worst['brute']:.2g}, {elapsed:.1f} s")


def _convergence_detail(rep):
    parts = []
    for t in rep.config.eval_times:
        seq = [r.value for r in rep.rows if r.statistic == "ks_nonincreasing" and r.t == t]
        parts.append(f"t={t:g} KS " + " -> ".join(f"{v:.4f}" for v in seq)
                     + f" (<= {rep.config.ks_threshold(t):g})")
    return "; ".join(parts)


def test_criterion_03_convergence_parabolic_drift():
    rep = run("convergence", "convergence_exp")
    ok = rep.all_passed and rep.wall_time < 600
    record(3, ok, f"exp/exp {_convergence_detail(rep)}; {rep.wall_time:.0f} s")


def test_criterion_04_convergence_zero_drift():
    rep = run("convergence", "convergence_zero_drift")
    record(4, rep.all_passed, f"unif/det {_convergence_detail(rep)}")


def test_criterion_05_fdd_covariance():
    rep = run("fdd", "fdd")
    rows = [rep.row(s) for s in ("cov_11_abs_error", "cov_12_abs_error", "cov_22_abs_error")]
    exact = rep.notes["finite_n_covariance"]["100000"]
    record(5, all(r.passed for r in rows),
           "entry errors " + ", ".join(f"{r.value:.3f}" for r in rows) + " (<= 0.1); exact n=1e5 covariance "
           f"[[{exact[0][0]:.3f}, {exact[0][1]:.3f}], [., {exact[1][1]:.3f}]]")


def test_criterion_06_lln():
    zero = run("lln", "lln")
    exp = run("lln", "lln_exp")
    exp_decreasing = all(r.passed for r in exp.rows if r.statistic.endswith("_decreasing"))
    detail = (f"unif/det arrival {_fmt_rows(zero, 'arrival_median_decreasing')}, "
              f"busy {_fmt_rows(zero, 'busy_time_median_decreasing')}, "
              f"input {_fmt_rows(zero, 'cumulative_input_median_decreasing')}; "
              f"exp/exp decreasing={exp_decreasing}, n=1e5 arrival {exp.row('arrival_median_sup_dev').value:.3f}")
    record(6, zero.all_passed and exp_decreasing, detail)


def test_criterion_07_littles_law():
    rep = run("littles", "littles")
    record(7, rep.all_passed, f"medians {_fmt_rows(rep, 'median_decreasing')} (<= 0.25 at n=1e5)")


def test_criterion_08_limit_equivalence():
    rep = run("equivalence", "equivalence")
    same = [r for r in rep.rows if r.statistic == "ks_two_vs_single_bm"]
    ctrl = [r for r in rep.rows if r.statistic == "ks_control_inflated"]
    record(8, rep.all_passed, "KS " + ", ".join(f"t={r.t:g}:{r.value:.4f}" for r in same) + " (<= 0.033); "
           "inflated control " + ", ".join(f"t={r.t:g}:{r.value:.4f}>{r.threshold:.4f}" for r in ctrl))


def test_criterion_09_scaling_exponent():
    rep = run("fdd", "fdd")
    right = rep.row("variance_ratio_abs_error", n=100000)
    wrong_ratio = rep.notes["wrong_exponent_variance_ratio"]["100000"]
    wrong_flagged = abs(wrong_ratio - 1.0) > rep.config.variance_ratio_tolerance
    outside = not 0.5 <= wrong_ratio <= 2.0
    ok = right.passed and outside and wrong_flagged and rep.row("wrong_exponent_log_ratio", n=100000).passed
    ratio = rep.notes["variance_ratio"]["100000"]
    record(9, ok, f"variance ratio {ratio:.4f} (in [0.9, 1.1]); "
                  f"beta=1/2 ratio {wrong_ratio:.4f} (outside [0.5, 2], flagged)")


@pytest.mark.parametrize("name,cfg", [("convergence", "convergence_exp"), ("fdd", "fdd"), ("lln", "lln"),
                                      ("littles", "littles"), ("equivalence", "equivalence"),
                                      ("oracle", "oracle")])
def test_criterion_10_determinism(name, cfg, tmp_path):
    first = run(name, cfg).write(tmp_path / "first")
    again = run_experiment(name, load_config(CONFIGS / f"{cfg}.cfg")).write(tmp_path / "again")
    same = all(first[k].read_bytes() == again[k].read_bytes() for k in ("csv", "json"))
    done = ACCEPTANCE.get(10, (True, ""))
    ok = done[0] and same
    names = (done[1].split(": ", 1)[1] + ", " if done[1] else "") + f"{name}={'same' if same else 'DIFFERENT'}"
    record(10, ok, "byte-identical CSV and JSON on rerun: " + names)
