"""Experiment runner, log files and post-hoc analysis.

Per run, two files are written under ``<out>/runs``:

``<run_id>.jsonl``
    One JSON object per line: a ``start`` event with the run configuration,
    one ``restart`` event per restart segment and a closing ``end`` event.
``<run_id>.csv``
    Best-so-far trajectory with header ``evaluation_index,best_f``; one row
    per improvement plus a final row at the last evaluation.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .benchmarks import PROBLEMS, make_problem
from .errors import ConfigError, IoError, ReportError
from .hill_valley import OFFLINE_N_T, HvConfig
from .redundancy import RestartRecord, RunLedger, classify, rrf
from .repelling import RepellingConfig, run_rr_cmaes
from .restarts import StrategyKind

log = logging.getLogger(__name__)

N_TARGETS = 51
TARGET_HIGH = 1e2
TARGET_LOW = 1e-8
RRF_COLUMNS = ["run_id", "function", "dimension", "instance", "strategy", "rrf",
               "n_restarts", "n_redundant"]
SUMMARY_COLUMNS = ["function", "dimension", "instance", "strategy", "n_runs", "mean",
                   "median", "q1", "q3"]


@dataclass
class ExperimentConfig:
    problems: list = field(default_factory=lambda: ["sphere"])
    dims: list = field(default_factory=lambda: [2])
    instances: list = field(default_factory=lambda: [0])
    strategy: str = "restart"
    repelling: bool = False
    c: float = 10.0
    gamma: float = 0.995
    sigma0: float | None = None
    budget: int | None = None
    runs: int = 50
    base_seed: int = 0
    out: str = "results"
    workers: int = 1
    # skip runs whose log already ends with an end event
    resume: bool = False

    def validate(self) -> "ExperimentConfig":
        for name in self.problems:
            if name not in PROBLEMS:
                raise ConfigError(f"unknown problem {name!r}", "problem")
        if not self.dims or any(int(d) < 1 for d in self.dims):
            raise ConfigError("dimensions must be >= 1", "dim")
        if not self.instances:
            raise ConfigError("at least one instance is required", "instances")
        StrategyKind.parse(self.strategy)
        if self.budget is not None and self.budget < 1:
            raise ConfigError("budget must be >= 1", "budget")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1", "runs")
        if self.repelling and not self.c > 0:
            raise ConfigError("coverage factor must be positive", "c")
        if self.repelling and not 0 < self.gamma < 1:
            raise ConfigError("shrinkage factor must lie in (0, 1)", "gamma")
        if self.sigma0 is not None and not self.sigma0 > 0:
            raise ConfigError("sigma0 must be positive", "sigma0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1", "workers")
        return self

    @property
    def label(self) -> str:
        kind = StrategyKind.parse(self.strategy).value
        return f"{kind}-rr-c{self.c:g}" if self.repelling else kind


@dataclass(frozen=True)
class RunSpec:
    run_id: str
    problem: str
    dim: int
    instance: int
    index: int
    seed: int
    strategy: str
    label: str
    repelling: bool
    c: float
    gamma: float
    sigma0: float
    budget: int


def run_seed(base_seed: int, problem: str, dim: int, instance: int, index: int) -> int:
    """Seed of one run; independent of strategy and repelling settings."""
    key = zlib.crc32(f"{problem}/{dim}/{instance}".encode())
    seq = np.random.SeedSequence([int(base_seed) & 0xFFFFFFFFFFFFFFFF, key, index])
    return int(seq.generate_state(1, np.uint64)[0])


def default_sigma0(problem) -> float:
    return float(0.2 * np.mean(problem.ub - problem.lb))


def plan_runs(cfg: ExperimentConfig) -> list[RunSpec]:
    cfg.validate()
    specs = []
    for name in cfg.problems:
        for d in cfg.dims:
            for inst in cfg.instances:
                problem = make_problem(name, int(d), int(inst))
                sigma0 = cfg.sigma0 if cfg.sigma0 is not None else default_sigma0(problem)
                budget = cfg.budget if cfg.budget is not None else 10_000 * int(d)
                for k in range(cfg.runs):
                    run_id = f"{name}-d{d}-i{inst}-{cfg.label}-r{k:03d}"
                    specs.append(RunSpec(run_id, name, int(d), int(inst), k,
                                         run_seed(cfg.base_seed, name, int(d), int(inst), k),
                                         StrategyKind.parse(cfg.strategy).value, cfg.label,
                                         cfg.repelling, cfg.c, cfg.gamma, sigma0, budget))
    return specs


def execute_run(spec: RunSpec) -> RunLedger:
    problem = make_problem(spec.problem, spec.dim, spec.instance)
    rep = RepellingConfig(spec.c, spec.gamma, spec.sigma0) if spec.repelling else None
    return run_rr_cmaes(problem, spec.strategy, rep, spec.budget, spec.seed,
                        sigma0=spec.sigma0, run_id=spec.run_id)


def _dump(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def write_run(spec: RunSpec, ledger: RunLedger, run_dir: Path) -> None:
    start = {"event": "start", **asdict(spec)}
    end = {
        "event": "end",
        "run_id": spec.run_id,
        "evals_total": ledger.B,
        "unrecorded_evals": ledger.unrecorded_evals,
        "n_restarts": len(ledger.records),
        "best_f": ledger.best_f,
        "best_x": None if ledger.best_x is None else [float(v) for v in ledger.best_x],
    }
    lines = [_dump(start)] + [_dump(e) for e in ledger.events] + [_dump(end)]
    (run_dir / f"{spec.run_id}.jsonl").write_text("\n".join(lines) + "\n")
    with open(run_dir / f"{spec.run_id}.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["evaluation_index", "best_f"])
        for i, value in ledger.trajectory:
            writer.writerow([i, repr(float(value))])


def _is_complete(path: Path) -> bool:
    try:
        lines = path.read_text().splitlines()
    except OSError:
        return False
    return bool(lines) and json.loads(lines[-1]).get("event") == "end"


def _run_and_write(args):
    spec, run_dir, resume = args
    if resume and _is_complete(Path(run_dir) / f"{spec.run_id}.jsonl"):
        return spec.run_id
    ledger = execute_run(spec)
    write_run(spec, ledger, Path(run_dir))
    return spec.run_id


def run_experiment(cfg: ExperimentConfig) -> list[str]:
    """Execute every run of ``cfg`` and write its logs; returns the run ids."""
    specs = plan_runs(cfg)
    run_dir = Path(cfg.out) / "runs"
    try:
        run_dir.mkdir(parents=True, exist_ok=True)
        probe = run_dir / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise IoError(f"output directory {run_dir} is not writable: {exc}") from exc
    jobs = [(s, str(run_dir), cfg.resume) for s in specs]
    log.info("running %d runs with %d worker(s)", len(jobs), cfg.workers)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(_run_and_write, jobs))
    return [_run_and_write(job) for job in jobs]


# ---------------------------------------------------------------------------
# reading logs


@dataclass
class RunLog:
    run_id: str
    start: dict
    restarts: list
    end: dict | None
    trajectory: list


def read_trajectory(path: Path) -> list[tuple[int, float]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return [(int(i), float(v)) for i, v in rows[1:]]


def read_run(path: Path) -> RunLog:
    path = Path(path)
    start, end, restarts = None, None, []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            event = json.loads(line)
            kind = event.get("event")
            if kind == "start":
                start = event
            elif kind == "restart":
                restarts.append(event)
            elif kind == "end":
                end = event
    run_id = start["run_id"] if start else path.stem
    traj_path = path.with_suffix(".csv")
    trajectory = read_trajectory(traj_path) if traj_path.exists() else []
    return RunLog(run_id, start or {}, restarts, end, trajectory)


def find_logs(source) -> list[Path]:
    source = Path(source)
    if source.is_file():
        return [source]
    run_dir = source / "runs" if (source / "runs").is_dir() else source
    return sorted(run_dir.glob("*.jsonl"))


def load_runs(source) -> list[RunLog]:
    paths = find_logs(source)
    if not paths:
        raise ReportError(f"no run logs found under {source}")
    return [read_run(p) for p in paths]


def ledger_from_log(run: RunLog, problem) -> RunLedger:
    records = [
        RestartRecord(
            index=e["restart_index"],
            x=np.array(e["mean"], dtype=float),
            f=float(e["f_mean"]),
            b=int(e["evals"]),
            criterion=e["criterion"],
            lambda_=int(e["lambda"]),
            sigma0=float(e["sigma0"]),
            evals_at_restart=int(e["evals_at_restart"]),
        )
        for e in run.restarts
    ]
    return RunLedger(records, int(run.end["evals_total"]), problem.x_star, problem.f_star,
                     unrecorded_evals=int(run.end.get("unrecorded_evals", 0)))


def _check_complete(runs: list[RunLog]) -> None:
    broken = []
    for run in runs:
        if not run.start or run.end is None:
            broken.append(run.run_id)
            continue
        spent = sum(int(e["evals"]) for e in run.restarts) + int(run.end["unrecorded_evals"])
        if spent != int(run.end["evals_total"]):
            broken.append(run.run_id)
    if broken:
        raise ReportError("incomplete or inconsistent run logs: " + ", ".join(broken))


def per_run_rrf(runs: list[RunLog], hv: HvConfig = HvConfig(OFFLINE_N_T)) -> list[dict]:
    """Classify every restart post hoc and return one row per run."""
    _check_complete(runs)
    problems = {}
    rows = []
    for run in runs:
        s = run.start
        key = (s["problem"], s["dim"], s["instance"])
        if key not in problems:
            problems[key] = make_problem(*key)
        problem = problems[key]
        ledger = classify(ledger_from_log(run, problem), problem, hv)
        rows.append({
            "run_id": run.run_id,
            "function": s["problem"],
            "dimension": s["dim"],
            "instance": s["instance"],
            "strategy": s["label"],
            "rrf": rrf(ledger),
            "n_restarts": len(ledger.records),
            "n_redundant": sum(bool(r.redundant) for r in ledger.records),
        })
    return rows


def summarize_rrf(rows: list[dict]) -> list[dict]:
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        key = (row["function"], row["dimension"], row["instance"], row["strategy"])
        groups.setdefault(key, []).append(row["rrf"])
    out = []
    for key in sorted(groups):
        vals = np.array(groups[key])
        q1, med, q3 = np.quantile(vals, [0.25, 0.5, 0.75])
        out.append(dict(zip(SUMMARY_COLUMNS, (*key, len(vals), float(vals.mean()), float(med),
                                              float(q1), float(q3)))))
    return out


def aggregate_rrf(source, hv: HvConfig = HvConfig(OFFLINE_N_T)) -> tuple[list[dict], list[dict]]:
    """``(per_run_rows, summary_rows)`` for the logs under ``source``."""
    rows = per_run_rrf(load_runs(source), hv)
    return rows, summarize_rrf(rows)


def write_table(rows: list[dict], columns: list[str], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


# ---------------------------------------------------------------------------
# ECDF


@dataclass
class EcdfCurve:
    evals: np.ndarray
    fraction: np.ndarray


def ecdf_targets(n: int = N_TARGETS, low: float = TARGET_LOW, high: float = TARGET_HIGH) -> np.ndarray:
    return np.logspace(math.log10(high), math.log10(low), n)


def best_at(trajectory, evals: np.ndarray) -> np.ndarray:
    """Best-so-far value after each evaluation count (``inf`` before the first)."""
    if not trajectory:
        return np.full(len(evals), np.inf)
    idx = np.array([i for i, _ in trajectory])
    val = np.array([v for _, v in trajectory])
    pos = np.searchsorted(idx, evals, side="right") - 1
    return np.where(pos >= 0, val[np.clip(pos, 0, None)], np.inf)


def default_grid(max_evals: int, n: int = 100) -> np.ndarray:
    return np.unique(np.round(np.logspace(0, math.log10(max(max_evals, 1)), n)).astype(int))


def compute_ecdf(trajectories, f_stars, targets=None, grid=None) -> EcdfCurve:
    """Fraction of (run, target) pairs attained at each evaluation count."""
    if len(trajectories) == 0:
        raise ReportError("no trajectories to aggregate")
    if len(f_stars) != len(trajectories):
        raise ReportError("need one optimum value per trajectory")
    targets = ecdf_targets() if targets is None else np.asarray(targets, dtype=float)
    if grid is None:
        last = max((t[-1][0] for t in trajectories if t), default=1)
        grid = default_grid(last)
    grid = np.asarray(grid)
    hits = np.zeros(len(grid))
    for traj, f_star in zip(trajectories, f_stars):
        err = best_at(traj, grid) - f_star
        hits += np.sum(err[:, None] <= targets[None, :], axis=1)
    return EcdfCurve(grid, hits / (len(trajectories) * len(targets)))


def ecdf_from_logs(source) -> dict[tuple, EcdfCurve]:
    """ECDF per (function, dimension, strategy) group, pooled over instances."""
    runs = load_runs(source)
    groups: dict[tuple, list] = {}
    for run in runs:
        s = run.start
        if not s:
            raise ReportError(f"run log {run.run_id} has no start record")
        groups.setdefault((s["problem"], s["dim"], s["label"]), []).append(run)
    curves = {}
    for key, members in sorted(groups.items()):
        f_stars = [make_problem(r.start["problem"], r.start["dim"], r.start["instance"]).f_star
                   for r in members]
        budget = max(int(r.start["budget"]) for r in members)
        curves[key] = compute_ecdf([r.trajectory for r in members], f_stars,
                                   grid=default_grid(budget))
    return curves


def write_ecdf(curves: dict[tuple, EcdfCurve], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["function", "dimension", "strategy", "evaluations", "fraction"])
        for (name, d, label), curve in curves.items():
            for e, v in zip(curve.evals, curve.fraction):
                writer.writerow([name, d, label, int(e), repr(float(v))])


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}", "config") from exc
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key = value", "config")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("_", "-")] = value
    return values


def cpu_count() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else 1)
