"""Report rows and their CSV/JSON serialization."""
from __future__ import annotations

import csv
import json
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from .config import ExperimentConfig

CSV_COLUMNS = ["experiment", "n", "t", "statistic", "value", "threshold", "pass"]

_OPS = {"<=": operator.le, "<": operator.lt, ">": operator.gt, ">=": operator.ge}


@dataclass(frozen=True)
class Row:
    """One check: ``value <op> threshold``. ``passed`` is None when the run is
    too small for the check to mean anything."""

    experiment: str
    statistic: str
    value: float
    threshold: float
    op: str = "<="
    n: Optional[int] = None
    t: Optional[float] = None
    low_power: bool = False

    @property
    def passed(self) -> Optional[bool]:
        if self.low_power:
            return None
        return bool(_OPS[self.op](self.value, self.threshold))

    def csv_fields(self) -> list:
        flag = {True: "true", False: "false", None: "na"}[self.passed]
        return [self.experiment, "" if self.n is None else self.n, "" if self.t is None else _num(self.t),
                self.statistic, _num(self.value), _num(self.threshold), flag]


def _num(x: float) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


@dataclass
class ExperimentReport:
    experiment: str
    config: ExperimentConfig
    rows: List[Row] = field(default_factory=list)
    notes: Dict[str, object] = field(default_factory=dict)
    # raw draws kept in memory for figures; never serialized
    samples: Dict[str, object] = field(default_factory=dict, repr=False)
    wall_time: float = 0.0

    def add(self, statistic: str, value: float, threshold: float, op: str = "<=", n=None, t=None,
            low_power: bool = False) -> Row:
        row = Row(self.experiment, statistic, float(value), float(threshold), op, n, t, low_power)
        self.rows.append(row)
        return row

    @property
    def all_passed(self) -> bool:
        return all(r.passed is True for r in self.rows)

    def row(self, statistic: str, n=None, t=None) -> Row:
        for r in self.rows:
            if r.statistic == statistic and (n is None or r.n == n) and (t is None or r.t == t):
                return r
        raise KeyError((statistic, n, t))

    def summary(self) -> dict:
        return {
            "experiment": self.experiment,
            "config_hash": self.config.digest(),
            "seed": self.config.seed,
            "config": self.config.to_dict(),
            "all_passed": self.all_passed,
            "rows": [
                {"n": r.n, "t": r.t, "statistic": r.statistic, "value": r.value, "op": r.op,
                 "threshold": r.threshold if math.isfinite(r.threshold) else str(r.threshold),
                 "pass": r.passed}
                for r in self.rows
            ],
            "notes": self.notes,
        }

    def write(self, out_dir=None) -> Dict[str, Path]:
        """Write ``<experiment>.csv``, ``<experiment>.json`` and a timing sidecar.

        The CSV and JSON depend only on the configuration, so reruns are
        byte-identical; wall time goes to ``<experiment>.timing.json``.
        """
        out = Path(out_dir if out_dir is not None else self.config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {"csv": out / f"{self.experiment}.csv", "json": out / f"{self.experiment}.json",
                 "timing": out / f"{self.experiment}.timing.json"}
        with open(paths["csv"], "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for r in self.rows:
                writer.writerow(r.csv_fields())
        paths["json"].write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        paths["timing"].write_text(json.dumps({"experiment": self.experiment,
                                               "wall_time_s": round(self.wall_time, 3)}) + "\n")
        return paths

    def format(self) -> str:
        lines = []
        for r in self.rows:
            flag = {True: "PASS", False: "FAIL", None: "n/a "}[r.passed]
            where = " ".join(x for x in (f"n={r.n}" if r.n is not None else "",
                                         f"t={r.t:g}" if r.t is not None else "") if x)
            lines.append(f"{flag} {self.experiment:<12} {where:<16} {r.statistic:<34} "
                         f"{r.value:.6g} {r.op} {r.threshold:.6g}")
        return "\n".join(lines)
