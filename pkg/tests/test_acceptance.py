"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Runs are shared between criteria through a session-wide log directory: the
harness skips runs whose log is already complete, and run seeds depend only on
(problem, dimension, instance, run index), so e.g. the plain Himmelblau runs of
criterion 3 are reused as the paired baseline of criterion 4.

Run ``pytest tests/test_acceptance.py -v`` to see the summary block, or
``python tests/test_acceptance.py`` for the criterion lines alone.
"""
from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np
import pytest

from rrcma.benchmarks import make_problem
from rrcma.harness import ExperimentConfig, cpu_count, per_run_rrf, read_run, run_experiment
from rrcma.hill_valley import HvConfig, hv_test
from rrcma.numerics import gamma_function, make_rng
from rrcma.redundancy import RestartRecord, RunLedger, rrf
from rrcma.repelling import rejection_radius
from rrcma import verify

RESULTS: list[str] = []
GALLAGHER_INSTANCES = [0, 1, 2, 3, 4]


def report(n: int, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'}  criterion {n}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


@pytest.fixture(scope="session")
def campaign(tmp_path_factory):
    return tmp_path_factory.mktemp("campaign")


def run_group(out: Path, **kw) -> list:
    """Run (or reuse) one experiment and return its parsed logs."""
    cfg = ExperimentConfig(out=str(out), resume=True, workers=cpu_count(), **kw)
    ids = run_experiment(cfg)
    return [read_run(out / "runs" / f"{rid}.jsonl") for rid in ids]


def rrf_values(runs) -> np.ndarray:
    return np.array([row["rrf"] for row in per_run_rrf(runs)])


def himmelblau_runs(out, runs, c=None):
    kw = dict(problems=["himmelblau"], dims=[2], instances=[0], runs=runs, budget=20_000,
              sigma0=2.0, strategy="restart")
    if c is not None:
        kw.update(repelling=True, c=c)
    return run_group(out, **kw)


def gallagher_runs(out, per_instance, c=None):
    kw = dict(problems=["gallagher21"], dims=[2], instances=GALLAGHER_INSTANCES,
              runs=per_instance, budget=20_000, sigma0=2.0, strategy="restart")
    if c is not None:
        kw.update(repelling=True, c=c)
    return run_group(out, **kw)


# ---------------------------------------------------------------------------


def test_criterion_1_unit_math():
    errs = [
        abs(rejection_radius(V, 1) - V / 2) for V in (0.5, 1.0, 3.0, 10.0)
    ] + [
        abs(rejection_radius(math.pi, 2) - 1.0),
        abs(rejection_radius(4 * math.pi / 3, 3) - 1.0),
    ]
    zs = np.linspace(0.1, 20, 200)
    gam = max(abs(gamma_function(z + 1) - z * gamma_function(z)) / gamma_function(z + 1)
              for z in zs)
    records = [RestartRecord(i + 1, np.zeros(2), 0.0, 100, redundant=(i == 1)) for i in range(3)]
    value = rrf(RunLedger(records, 400, np.zeros(2), 0.0))
    ok = max(errs) <= 1e-12 and gam <= 1e-10 and value == 0.25
    assert report(1, ok, f"radius identities max err {max(errs):.1e} (tol 1e-12), "
                         f"gamma recurrence max rel err {gam:.1e} (tol 1e-10), rrf fixture {value!r}")


def test_criterion_2_sphere_sanity(campaign):
    runs = run_group(campaign, problems=["sphere"], dims=[5], instances=[0], runs=50,
                     budget=25_000, sigma0=2.0)
    hits = sum(r.trajectory[-1][1] <= 1e-8 for r in runs)
    ok = hits >= math.ceil(0.95 * len(runs))
    assert report(2, ok, f"sphere d=5: {hits}/{len(runs)} runs reached 1e-8 (need >= 95%)")


def test_criterion_3_redundancy_exists(campaign):
    runs = himmelblau_runs(campaign, 100)
    rows = per_run_rrf(runs)
    mean = float(np.mean([r["rrf"] for r in rows]))
    most = max(r["n_redundant"] for r in rows)
    ok = mean > 0.10 and most >= 4
    assert report(3, ok, f"himmelblau naive restart, 100 runs: mean RRF {mean:.3f} (need > 0.10), "
                         f"max redundant restarts in one run {most} (need >= 4)")


def test_criterion_4_repelling_reduces(campaign):
    lines, ok = [], True
    for name, off_runs, on_runs in (
        ("himmelblau", himmelblau_runs(campaign, 50), himmelblau_runs(campaign, 50, c=2.0)),
        ("gallagher21", gallagher_runs(campaign, 10), gallagher_runs(campaign, 10, c=2.0)),
    ):
        off, on = rrf_values(off_runs), rrf_values(on_runs)
        ratio = on.mean() / off.mean() if off.mean() > 0 else math.inf
        ok &= bool(on.mean() <= 0.5 * off.mean())
        lines.append(f"{name} mean RRF off {off.mean():.3f} vs c=2 {on.mean():.3f} "
                     f"(ratio {ratio:.2f}, need <= 0.50; paired wins {int(np.sum(on < off))}/"
                     f"{len(on)})")
    assert report(4, ok, "; ".join(lines))


def test_criterion_5_coverage_trend(campaign):
    cs = [2.0, 10.0, 100.0, 1000.0]
    vals = [rrf_values(gallagher_runs(campaign, 10, c=c)) for c in cs]
    means = [v.mean() for v in vals]
    checks, literal = [], []
    ok = True
    for (c_lo, v_lo), (c_hi, v_hi) in zip(zip(cs, vals), zip(cs[1:], vals[1:])):
        se = math.sqrt(v_lo.var(ddof=1) / len(v_lo) + v_hi.var(ddof=1) / len(v_hi))
        # a lower factor should not show more redundancy than the next larger one
        good = v_lo.mean() <= v_hi.mean() + se
        ok &= good
        checks.append(f"c={c_lo:g}->{c_hi:g} {'ok' if good else 'violated'} (SE {se:.3f})")
        literal.append(v_hi.mean() <= v_lo.mean() + se)
    detail = ", ".join(f"c={c:g}: {m:.3f}" for c, m in zip(cs, means))
    assert report(5, ok, f"gallagher21 mean RRF {detail}; " + "; ".join(checks)
                  + f"; reading 'nonincreasing in c' holds on {sum(literal)}/3 pairs")


def test_criterion_6_weak_structure_ordering(campaign):
    med = {}
    for name in ("gallagher21", "rastrigin", "sphere"):
        runs = run_group(campaign, problems=[name], dims=[2], instances=GALLAGHER_INSTANCES,
                         runs=20, budget=20_000, sigma0=2.0, strategy="restart")
        med[name] = float(np.median(rrf_values(runs)))
    ok = med["gallagher21"] > med["rastrigin"] > med["sphere"] == 0.0
    assert report(6, ok, "median RRF gallagher21 {gallagher21:.3f} > rastrigin {rastrigin:.3f} "
                         "> sphere {sphere:.3f} (= 0), 100 runs each".format(**med))


def basin_labels(f, grid: np.ndarray) -> np.ndarray:
    """Steepest-descent basin label of every grid point (1-D, neighbour moves)."""
    vals = f(grid[:, None])
    n = len(grid)
    idx = np.arange(n)
    left = np.concatenate([[0], idx[:-1]])
    right = np.concatenate([idx[1:], [n - 1]])
    cand = np.stack([idx, left, right])
    nxt = cand[np.argmin(vals[cand], axis=0), idx]
    while True:
        jumped = nxt[nxt]
        if np.array_equal(jumped, nxt):
            return nxt
        nxt = jumped


def test_criterion_7_hill_valley_oracle():
    problem = make_problem("uneven_trap", 1, 0)
    grid = np.linspace(problem.lb[0], problem.ub[0], 300_001)
    labels = basin_labels(problem.evaluate, grid)
    rng = make_rng(2024, 7)
    pairs = rng.uniform(problem.lb[0], problem.ub[0], size=(500, 2))
    step = grid[1] - grid[0]

    def label(x):
        return labels[int(round((x - grid[0]) / step))]

    agree = same = 0
    for a, b in pairs:
        oracle = label(a) == label(b)
        hv = hv_test(np.array([a]), np.array([b]), problem, HvConfig(10))[0] == 1
        agree += oracle == hv
        same += oracle
    frac = agree / len(pairs)
    assert report(7, frac >= 0.95, f"uneven trap: hill-valley agrees with grid oracle on "
                                   f"{agree}/500 pairs ({frac:.1%}, need >= 95%; "
                                   f"{same} same-basin pairs)")


def test_criterion_8_property_suites(campaign):
    results = verify.run_checks(seed=0, hv_pairs=1000)
    # archive replay on logs written to disk by the campaign
    logs = himmelblau_runs(campaign, 50, c=2.0) + gallagher_runs(campaign, 10, c=2.0)
    problems = []
    for run in logs:
        s = run.start
        problem = make_problem(s["problem"], s["dim"], s["instance"])
        problems += verify.replay_archive(run.restarts, problem)
    results.append(("archive sum n = R (campaign logs)", not problems,
                    f"{len(logs)} logs replayed, {len(problems)} issues"))
    failed = [name for name, ok, _ in results if not ok]
    detail = ", ".join(name for name, _, _ in results)
    assert report(8, not failed, (f"failed: {', '.join(failed)}" if failed else "all passed")
                  + f" [{detail}]")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
