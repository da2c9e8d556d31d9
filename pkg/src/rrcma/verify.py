"""Invariant suites on small fixtures, shared by ``rrcma verify`` and the tests.

Every check returns ``(name, ok, detail)``.
"""
from __future__ import annotations

import filecmp
import math
import tempfile
from pathlib import Path

import numpy as np

from .benchmarks import make_problem
from .harness import ExperimentConfig, compute_ecdf, load_runs, run_experiment
from .hill_valley import HvConfig, hv_test
from .numerics import gamma_function, make_rng
from .redundancy import RestartRecord, RunLedger, rrf
from .repelling import (
    Archive,
    RepellingConfig,
    TabuPoint,
    archive_update,
    rejection_radius,
    rejects,
    run_rr_cmaes,
)


def check_radius_identities(tol: float = 1e-12):
    cases = [(1, V, V / 2) for V in (0.1, 1.0, 2.0, 7.5)]
    cases += [(2, math.pi, 1.0), (3, 4 * math.pi / 3, 1.0)]
    worst = max(abs(rejection_radius(V, d) - want) for d, V, want in cases)
    return "radius identities", worst <= tol, f"max error {worst:.2e}"


def check_gamma_recurrence(tol: float = 1e-10):
    zs = np.linspace(0.05, 12.0, 120)
    worst = max(
        abs(gamma_function(z + 1) - z * gamma_function(z)) / gamma_function(z + 1) for z in zs
    )
    return "gamma recurrence", worst <= tol, f"max relative error {worst:.2e}"


def check_rrf_fixture():
    records = [RestartRecord(i + 1, np.zeros(2), 0.0, 100, redundant=(i == 1)) for i in range(3)]
    value = rrf(RunLedger(records, 400, np.zeros(2), 0.0))
    return "rrf fixture", value == 0.25, f"rrf = {value!r}"


def check_hv_symmetry(n_pairs: int = 1000, seed: int = 0):
    rng = make_rng(seed, 101)
    mismatched = 0
    for name in ("himmelblau", "gallagher21", "uneven_trap"):
        problem = make_problem(name, 1 if name == "uneven_trap" else 2)
        lb, ub = problem.bounds
        for _ in range(n_pairs // 3 + 1):
            a, b = rng.uniform(lb, ub), rng.uniform(lb, ub)
            if hv_test(a, b, problem)[0] != hv_test(b, a, problem)[0]:
                mismatched += 1
    return "hill-valley symmetry", mismatched == 0, f"{mismatched} asymmetric pairs"


def replay_archive(events: list[dict], problem, hv: HvConfig = HvConfig()) -> list[str]:
    """Rebuild the tabu archive from restart events; return violations found."""
    archive = Archive(problem.volume)
    problems = []
    for e in events:
        if e.get("redundant_online") is None:
            continue
        before = len(archive)
        archive_update(archive, np.array(e["mean"]), float(e["f_mean"]), problem, hv)
        total = sum(p.n for p in archive.points)
        if total != archive.R:
            problems.append(f"restart {e['restart_index']}: sum n = {total}, R = {archive.R}")
        if len(archive) != e["archive_size"]:
            problems.append(f"restart {e['restart_index']}: archive size {len(archive)} "
                            f"vs logged {e['archive_size']}")
        if (len(archive) == before) != e["redundant_online"]:
            problems.append(f"restart {e['restart_index']}: merge decision differs")
    return problems


class ContainmentAudit:
    """Re-checks every accepted offspring against each tabu point separately."""

    def __init__(self, gamma: float):
        self.gamma = gamma
        self.checked = 0
        self.violations = 0

    def __call__(self, x, centers, radii, scale, C_inv, sigma):
        self.checked += 1
        # scale == gamma ** n_rej; log base gamma recovers n_rej
        n_rej = int(round(math.log(scale) / math.log(self.gamma))) if scale < 1 else 0
        for c, r in zip(centers, radii):
            if rejects(x, TabuPoint(c, 0.0), r, self.gamma, n_rej, C_inv, sigma):
                self.violations += 1
                return


def check_archive_and_containment(runs: int = 6, budget: int = 6000, seed: int = 0):
    violations: list[str] = []
    audited = contained = 0
    for name in ("himmelblau", "gallagher21"):
        problem = make_problem(name, 2)
        cfg = RepellingConfig(c=2.0)
        for k in range(runs):
            audit = ContainmentAudit(cfg.gamma)
            ledger = run_rr_cmaes(problem, "restart", cfg, budget, seed + k, audit=audit)
            violations += [f"{name}/{k} {v}" for v in replay_archive(ledger.events, problem)]
            audited += audit.checked
            contained += audit.checked - audit.violations
    archive_ok = not violations
    detail = "; ".join(violations[:3]) if violations else f"{2 * runs} runs replayed"
    return [
        ("archive sum n = R (replay)", archive_ok, detail),
        ("rejection containment", audited > 0 and contained == audited,
         f"{contained}/{audited} accepted offspring outside all tabu thresholds"),
    ]


def check_logs(out: Path):
    """Trajectory monotonicity, budget accounting and ECDF shape on written logs."""
    runs = load_runs(out)
    bad = []
    for run in runs:
        idx = [i for i, _ in run.trajectory]
        val = [v for _, v in run.trajectory]
        if any(b <= a for a, b in zip(idx, idx[1:])) or any(b > a for a, b in zip(val, val[1:])):
            bad.append(f"{run.run_id}: trajectory not monotone")
        spent = sum(e["evals"] for e in run.restarts) + run.end["unrecorded_evals"]
        if not idx or idx[-1] != run.end["evals_total"] or spent != run.end["evals_total"]:
            bad.append(f"{run.run_id}: evaluation accounting")
    problem_f = {r.run_id: make_problem(r.start["problem"], r.start["dim"], r.start["instance"]).f_star
                 for r in runs}
    curve = compute_ecdf([r.trajectory for r in runs], [problem_f[r.run_id] for r in runs])
    diffs = np.diff(curve.fraction)
    ecdf_ok = bool(np.all(diffs >= 0) and curve.fraction.min() >= 0 and curve.fraction.max() <= 1)
    return [
        ("trajectory monotonicity", not bad, "; ".join(bad[:3]) or f"{len(runs)} runs"),
        ("ecdf monotonicity", ecdf_ok, f"final fraction {curve.fraction[-1]:.3f}"),
    ]


def check_determinism_and_logs(seed: int = 0, runs: int = 3, budget: int = 3000):
    with tempfile.TemporaryDirectory() as tmp:
        dirs = []
        for rep in range(2):
            cfg = ExperimentConfig(problems=["himmelblau"], dims=[2], runs=runs, budget=budget,
                                   base_seed=seed, repelling=True, c=2.0,
                                   out=str(Path(tmp) / f"rep{rep}"))
            run_experiment(cfg)
            dirs.append(Path(cfg.out) / "runs")
        names = sorted(p.name for p in dirs[0].iterdir())
        _, mismatch, errors = filecmp.cmpfiles(dirs[0], dirs[1], names, shallow=False)
        results = [("seed determinism", not mismatch and not errors,
                    f"{len(names)} files compared, {len(mismatch) + len(errors)} differ")]
        results += check_logs(dirs[0])
    return results


def run_checks(seed: int = 0, hv_pairs: int = 1000) -> list[tuple[str, bool, str]]:
    results = [
        check_radius_identities(),
        check_gamma_recurrence(),
        check_rrf_fixture(),
        check_hv_symmetry(hv_pairs, seed),
    ]
    results += check_archive_and_containment(seed=seed)
    results += check_determinism_and_logs(seed)
    return results
