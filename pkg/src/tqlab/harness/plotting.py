"""Optional figures written next to the CSV/JSON outputs (``--figures``)."""
from __future__ import annotations

from pathlib import Path
from typing import List

import numpy as np

from .report import ExperimentReport


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _ecdf(ax, x, **kw):
    x = np.sort(np.asarray(x))
    ax.step(x, np.arange(1, x.size + 1) / x.size, where="post", **kw)


def _trend(ax, report: ExperimentReport, statistic: str, label: str, t=None):
    rows = [r for r in report.rows if r.statistic == statistic and (t is None or r.t == t)]
    ax.plot([r.n for r in rows], [r.value for r in rows], "o-", label=label)


def render_figures(report: ExperimentReport, out_dir) -> List[Path]:
    """Write PNG figures for ``report``; returns the written paths."""
    plt = _pyplot()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    name = report.experiment
    cfg = report.config

    def save(fig, suffix):
        path = out / f"{name}_{suffix}.png"
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    if name == "convergence":
        fig, ax = plt.subplots()
        for t in cfg.eval_times:
            _trend(ax, report, "ks_nonincreasing", f"t={t:g}", t=t)
            ax.axhline(cfg.ks_threshold(t), ls=":", color="grey")
        ax.set(xscale="log", xlabel="n", ylabel="two-sample KS")
        ax.legend()
        save(fig, "ks")
        fig, axes = plt.subplots(1, len(cfg.eval_times), squeeze=False)
        n_max = cfg.n_values[-1]
        for j, t in enumerate(cfg.eval_times):
            ax = axes[0, j]
            _ecdf(ax, report.samples["prelimit"][n_max][:, j], label=f"n={n_max}")
            _ecdf(ax, report.samples["limit"][:, j], label="limit")
            ax.set(title=f"t={t:g}", xlabel="queue length (scaled)")
            ax.legend()
        save(fig, "ecdf")
    elif name == "fdd":
        x = report.samples["draws"][cfg.n_values[-1]]
        fig, ax = plt.subplots()
        ax.scatter(x[:, 0], x[:, 1], s=2, alpha=0.3)
        ax.set(xlabel=f"A_hat({cfg.fdd_times[0]:g})", ylabel=f"A_hat({cfg.fdd_times[1]:g})")
        save(fig, "scatter")
    elif name in ("lln", "littles"):
        fig, ax = plt.subplots()
        medians = report.samples["medians"]
        series = medians.items() if name == "lln" else [("sup |W - E[S] Q|", medians)]
        for label, m in series:
            ax.plot(list(m), list(m.values()), "o-", label=label)
        ax.axhline(cfg.lln_threshold if name == "lln" else cfg.littles_threshold, ls=":", color="grey")
        ax.set(xscale="log", yscale="log", xlabel="n", ylabel="median sup deviation")
        ax.legend()
        save(fig, "medians")
    elif name == "equivalence":
        fig, axes = plt.subplots(1, len(cfg.eval_times), squeeze=False)
        for j, t in enumerate(cfg.eval_times):
            ax = axes[0, j]
            for key in ("two_bm", "single_bm", "inflated"):
                _ecdf(ax, report.samples[key][:, j], label=key)
            ax.set(title=f"t={t:g}")
            ax.legend()
        save(fig, "ecdf")
    return written
