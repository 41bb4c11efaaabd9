"""Monte Carlo experiment: random placements x current states x alpha.

For every instance a scenario is drawn from a seed derived from
``master_seed`` and the instance index. Each objective family is then
solved once with equal priorities ("before") and once per (state, alpha)
with outpatient priorities from the classifier ("after"):

* ``wsrmax``: before and after both maximize the weighted SINR sum.
* ``pf``: before maximizes sum ln SINR, after uses the hybrid objective
  (ln SINR for normal users, weighted SINR for outpatients).

The report keeps one row per (cell, user); all aggregates are recomputed
from those rows.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import runpy
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import bayes
from .allocator import AllocationProblem, Assignment, Objective, solve
from .bayes import CurrentState, MedicalRecord
from .scenario import ScenarioConfig, generate

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "ExperimentError",
    "instance_seed",
    "outpatient_deltas",
    "run_instance",
    "run_experiment",
    "write_outputs",
    "summarize",
]

log = logging.getLogger(__name__)

FAMILIES = ("wsrmax", "pf")
_OBJECTIVES = {
    ("wsrmax", "before"): Objective.WSRMAX,
    ("wsrmax", "after"): Objective.WSRMAX,
    ("pf", "before"): Objective.PF_BEFORE,
    ("pf", "after"): Objective.PF_AFTER,
}

RAW_COLUMNS = (
    "objective", "phase", "state", "alpha", "instance", "seed", "user",
    "outpatient", "delta", "priority", "rbs", "sinr", "sinr_db",
)


class ExperimentError(RuntimeError):
    """A cell of the experiment could not be solved."""


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    instances: int = 400
    alphas: tuple[float, ...] = (50.0, 500.0, 1000.0)
    states: tuple[CurrentState, ...] = field(default_factory=lambda: tuple(bayes.builtin_current_states()))
    objectives: tuple[str, ...] = FAMILIES
    records: tuple[str, ...] | None = None  # CSV paths, one per outpatient; None -> packaged records
    smoothing: float = 1.0
    master_seed: int = 20181

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "objectives", tuple(self.objectives))
        if self.instances < 1:
            raise ValueError("instances must be >= 1")
        if any(a < 0 or not math.isfinite(a) for a in self.alphas):
            raise ValueError("alphas must be finite and >= 0")
        if not self.states:
            raise ValueError("at least one current state is required")
        for o in self.objectives:
            if o not in FAMILIES:
                raise ValueError(f"unknown objective family {o!r}; expected one of {FAMILIES}")
        if self.records is not None and len(self.records) != self.scenario.num_outpatients:
            raise ValueError(
                f"{len(self.records)} records given for {self.scenario.num_outpatients} outpatients"
            )

    def load_records(self) -> list[MedicalRecord]:
        if self.records is None:
            recs = bayes.builtin_records()
            if len(recs) != self.scenario.num_outpatients:
                raise ValueError(
                    f"the packaged records cover 3 outpatients, config has {self.scenario.num_outpatients}; "
                    "pass records explicitly"
                )
            return recs
        return [bayes.read_record_csv(p) for p in self.records]

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "instances": self.instances,
            "alphas": list(self.alphas),
            "states": [list(s.levels) for s in self.states],
            "objectives": list(self.objectives),
            "records": None if self.records is None else list(self.records),
            "smoothing": self.smoothing,
            "master_seed": self.master_seed,
        }

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        """Build from JSON data. States may be given as level lists or as
        1-based indices into the built-in table; relative record paths are
        resolved against ``base_dir``."""
        d = dict(d)
        kwargs = {}
        if "scenario" in d:
            kwargs["scenario"] = ScenarioConfig.from_dict(d.pop("scenario"))
        if "states" in d:
            table = bayes.builtin_current_states()
            states = []
            for s in d.pop("states"):
                if isinstance(s, int):
                    if not 1 <= s <= len(table):
                        raise ValueError(f"state index {s} out of range 1..{len(table)}")
                    states.append(table[s - 1])
                else:
                    states.append(CurrentState(*s))
            kwargs["states"] = tuple(states)
        if d.get("records") is not None:
            recs = []
            for p in d.pop("records"):
                p = Path(p)
                if base_dir is not None and not p.is_absolute():
                    p = base_dir / p
                recs.append(str(p))
            kwargs["records"] = tuple(recs)
        else:
            d.pop("records", None)
        unknown = set(d) - {"instances", "alphas", "objectives", "smoothing", "master_seed"}
        if unknown:
            raise ValueError(f"unknown experiment config keys: {sorted(unknown)}")
        kwargs.update(d)
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        path = Path(path)
        return cls.from_dict(json.loads(path.read_text()), base_dir=path.parent)


def instance_seed(master_seed: int, instance: int) -> int:
    """64-bit scenario seed of ``instance``; independent of run order."""
    ss = np.random.SeedSequence([master_seed, instance])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def outpatient_deltas(config: ExperimentConfig) -> np.ndarray:
    """Stroke likelihood per (state, outpatient), shape ``(S, K - NU)``."""
    clfs = [bayes.train(r, config.smoothing) for r in config.load_records()]
    return np.array([[bayes.posterior(c, s) for c in clfs] for s in config.states])


@dataclass
class ExperimentReport:
    """Raw per-user rows plus the configuration that produced them.

    ``rows`` maps each name in :data:`RAW_COLUMNS` to a numpy array; the
    ``state`` and ``alpha`` columns are 0 and nan for before-phase rows.
    """

    config: ExperimentConfig
    deltas: np.ndarray
    rows: dict[str, np.ndarray]

    def __len__(self):
        return len(self.rows["sinr"])

    def select(self, **where) -> np.ndarray:
        """Boolean mask of rows matching all ``column=value`` filters."""
        mask = np.ones(len(self), dtype=bool)
        for col, val in where.items():
            data = self.rows[col]
            if isinstance(val, float) and math.isnan(val):
                mask &= np.isnan(data)
            else:
                mask &= data == val
        return mask

    def cells(self) -> int:
        return len(self) // self.config.scenario.num_users


def _cell_problems(config: ExperimentConfig, deltas: np.ndarray, family: str):
    """Yield (phase, state index (1-based, 0 = before), alpha, priorities)."""
    K = config.scenario.num_users
    NU = config.scenario.num_normal
    yield "before", 0, math.nan, np.ones(K)
    for si in range(len(config.states)):
        for alpha in config.alphas:
            up = np.ones(K)
            for j in range(K - NU):
                up[NU + j] = bayes.priority(float(deltas[si, j]), alpha, True)
            yield "after", si + 1, alpha, up


def run_instance(config: ExperimentConfig, deltas: np.ndarray, instance: int) -> list[tuple]:
    """Solve every cell of one instance; returns raw rows as tuples."""
    seed = instance_seed(config.master_seed, instance)
    scenario = generate(config.scenario, seed)
    K = config.scenario.num_users
    NU = config.scenario.num_normal
    rows = []
    for family in config.objectives:
        seen: list[Assignment] = []
        for phase, si, alpha, up in _cell_problems(config, deltas, family):
            problem = AllocationProblem(scenario, up, _OBJECTIVES[(family, phase)])
            try:
                result = solve(problem, warm_start=seen[-4:])
            except Exception as exc:
                raise ExperimentError(
                    f"instance {instance} (seed {seed}), {family}/{phase}, state {si}, alpha {alpha}: {exc}"
                ) from exc
            if result.assignment not in seen:
                seen.append(result.assignment)
            per_user = result.user_sinr()
            for k in range(K):
                vals = per_user.get(k, [])
                s = float(np.mean(vals)) if vals else math.nan
                rows.append((
                    family, phase, si, alpha, instance, seed, k + 1, k >= NU,
                    float(deltas[si - 1, k - NU]) if (phase == "after" and k >= NU) else math.nan,
                    float(up[k]), len(vals), s, 10.0 * math.log10(s) if s > 0 else math.nan,
                ))
    return rows


_DTYPES = {
    "objective": "U8", "phase": "U6", "state": np.int64, "alpha": float, "instance": np.int64,
    "seed": np.uint64, "user": np.int64, "outpatient": bool, "delta": float, "priority": float,
    "rbs": np.int64, "sinr": float, "sinr_db": float,
}


def _run_chunk(args):
    config, deltas, instances = args
    out = []
    for i in instances:
        out.extend(run_instance(config, deltas, i))
    return out


def run_experiment(config: ExperimentConfig, jobs: int = 1, progress=None) -> ExperimentReport:
    """Run all instances (in ``jobs`` worker processes) and collect rows in
    canonical order: instance, then objective family, then cell, then user."""
    deltas = outpatient_deltas(config)
    instances = list(range(config.instances))
    if jobs <= 1:
        all_rows = []
        for i in instances:
            all_rows.extend(run_instance(config, deltas, i))
            if progress is not None:
                progress(i + 1, config.instances)
    else:
        chunks = [instances[j::jobs] for j in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_chunk, [(config, deltas, c) for c in chunks]))
        by_instance: dict[int, list] = {}
        for part in parts:
            for row in part:
                by_instance.setdefault(row[4], []).append(row)
        all_rows = [row for i in instances for row in by_instance[i]]
    cols = list(zip(*all_rows)) if all_rows else [[] for _ in RAW_COLUMNS]
    rows = {name: np.array(col, dtype=_DTYPES[name]) for name, col in zip(RAW_COLUMNS, cols)}
    return ExperimentReport(config, deltas, rows)


# -- aggregation -------------------------------------------------------------------


def _cell_keys(report: ExperimentReport):
    cfg = report.config
    keys = []
    for family in cfg.objectives:
        keys.append((family, "before", 0, math.nan))
        for si in range(1, len(cfg.states) + 1):
            for alpha in cfg.alphas:
                keys.append((family, "after", si, alpha))
    return keys


def _cell_mask(report, family, phase, si, alpha):
    r = report.rows
    mask = (r["objective"] == family) & (r["phase"] == phase) & (r["state"] == si)
    if phase == "after":
        mask &= r["alpha"] == alpha
    return mask


def summarize(report: ExperimentReport) -> dict:
    """Per-cell statistics recomputed from the raw rows.

    For each (objective, phase, state, alpha) cell:

    * ``user_mean``: mean SINR of each user across instances;
    * ``population_mean``: mean over all (instance, user) rows;
    * ``op_above_average_rate``: per outpatient, the fraction of instances
      where its SINR is at least that instance's mean over users;
    * ``max_normal_decrease``: after-phase only, the largest relative drop of
      a normal user's mean SINR against the before phase.
    """
    K = report.config.scenario.num_users
    NU = report.config.scenario.num_normal
    n_inst = report.config.instances
    out = {"cells": []}
    before_means = {}
    for family, phase, si, alpha in _cell_keys(report):
        mask = _cell_mask(report, family, phase, si, alpha)
        order = np.lexsort((report.rows["user"][mask], report.rows["instance"][mask]))
        sinr = report.rows["sinr"][mask][order].reshape(n_inst, K)
        user_mean = sinr.mean(axis=0)
        inst_mean = sinr.mean(axis=1)
        above = (sinr[:, NU:] >= inst_mean[:, None]).mean(axis=0)
        cell = {
            "objective": family,
            "phase": phase,
            "state": si,
            "alpha": None if phase == "before" else alpha,
            "user_mean": user_mean.tolist(),
            "user_mean_db": (10 * np.log10(user_mean)).tolist(),
            "population_mean": float(sinr.mean()),
            "population_mean_db": float(10 * np.log10(sinr.mean())),
            "op_above_average_rate": above.tolist(),
        }
        if phase == "before":
            before_means[family] = user_mean
        else:
            base = before_means[family]
            drop = (base[:NU] - user_mean[:NU]) / base[:NU]
            cell["max_normal_decrease"] = float(drop.max())
        out["cells"].append(cell)
    return out


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return "" if math.isnan(x) else repr(float(x))
    return str(x)


def write_outputs(report: ExperimentReport, out_dir, plots: bool = True) -> list[Path]:
    """Write ``raw.csv``, ``summary.csv``, ``summary.json``, ``config.json``,
    the plotting script and (with ``plots``) its SVG charts."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    raw_path = out / "raw.csv"
    with open(raw_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RAW_COLUMNS)
        cols = [report.rows[c] for c in RAW_COLUMNS]
        for i in range(len(report)):
            w.writerow([_fmt(c[i].item() if hasattr(c[i], "item") else c[i]) for c in cols])
    written.append(raw_path)

    summary = summarize(report)
    K = report.config.scenario.num_users
    NU = report.config.scenario.num_normal
    summary_path = out / "summary.csv"
    with open(summary_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["objective", "phase", "state", "alpha", "user", "outpatient", "mean_sinr", "mean_sinr_db",
                    "population_mean_sinr"])
        for cell in summary["cells"]:
            for k in range(K):
                w.writerow([
                    cell["objective"], cell["phase"], cell["state"],
                    "" if cell["alpha"] is None else _fmt(cell["alpha"]),
                    k + 1, _fmt(k >= NU), _fmt(cell["user_mean"][k]), _fmt(cell["user_mean_db"][k]),
                    _fmt(cell["population_mean"]),
                ])
    written.append(summary_path)

    summary["config"] = report.config.to_dict()
    summary["deltas"] = report.deltas.tolist()
    json_path = out / "summary.json"
    json_path.write_text(json.dumps(summary, indent=1) + "\n")
    written.append(json_path)
    cfg_path = out / "config.json"
    cfg_path.write_text(json.dumps(report.config.to_dict(), indent=1) + "\n")
    written.append(cfg_path)

    script = out / "plot_summary.py"
    shutil.copyfile(Path(__file__).with_name("data") / "plot_summary.py", script)
    written.append(script)
    if plots:
        ns = runpy.run_path(str(script))
        written.extend(ns["plot_summary"](summary_path, out))
    return written
