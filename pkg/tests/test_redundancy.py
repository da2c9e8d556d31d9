import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rrcma.benchmarks import HIMMELBLAU_MINIMA
from rrcma.errors import ConfigError
from rrcma.redundancy import RestartRecord, RunLedger, classify, is_redundant, rrf

A, B_, C_ = HIMMELBLAU_MINIMA[1], HIMMELBLAU_MINIMA[2], HIMMELBLAU_MINIMA[3]
X_STAR = HIMMELBLAU_MINIMA[0]


def ledger_at(points, problem, b=100, B=None):
    records = [RestartRecord(i + 1, np.array(p), problem(p), b) for i, p in enumerate(points)]
    return RunLedger(records, B if B is not None else b * len(points),
                     problem.x_star, problem.f_star)


class TestIsRedundant:
    def test_first_restart_never(self, himmelblau):
        led = ledger_at([A], himmelblau)
        assert is_redundant(1, led, himmelblau) is False

    def test_global_basin_never(self, himmelblau):
        led = ledger_at([X_STAR, X_STAR + 0.01, X_STAR], himmelblau)
        assert [is_redundant(r, led, himmelblau) for r in (1, 2, 3)] == [False] * 3

    def test_revisit_local(self, himmelblau):
        led = ledger_at([A, A + 1e-6], himmelblau)
        assert is_redundant(2, led, himmelblau) is True

    def test_distinct_locals(self, himmelblau):
        led = ledger_at([A, B_, C_], himmelblau)
        classify(led, himmelblau)
        assert [r.redundant for r in led.records] == [False, False, False]


class TestRrf:
    def test_fixture(self):
        records = [RestartRecord(i + 1, np.zeros(2), 0.0, 100, redundant=(i == 1)) for i in range(3)]
        assert rrf(RunLedger(records, 400, np.zeros(2), 0.0)) == 0.25

    def test_no_restarts(self):
        assert rrf(RunLedger([], 10, np.zeros(2), 0.0)) == 0.0

    def test_all_redundant(self):
        records = [RestartRecord(i + 1, np.zeros(2), 0.0, 50, redundant=True) for i in range(4)]
        assert rrf(RunLedger(records, 200, np.zeros(2), 0.0)) == 1.0

    def test_zero_budget(self):
        with pytest.raises(ConfigError):
            rrf(RunLedger([], 0, np.zeros(2), 0.0))

    def test_unresolved(self):
        with pytest.raises(ConfigError):
            rrf(RunLedger([RestartRecord(1, np.zeros(2), 0.0, 1)], 1, np.zeros(2), 0.0))

    @given(st.lists(st.integers(0, 3), min_size=1, max_size=12))
    def test_basin_count_identity(self, himmelblau, basins):
        # each record lands at one of the four Himmelblau minima (0 = global)
        points = [HIMMELBLAU_MINIMA[k] for k in basins]
        led = classify(ledger_at(points, himmelblau), himmelblau)
        value = rrf(led)
        assert 0.0 <= value <= 1.0
        n_red = sum(r.redundant for r in led.records)
        n_global = basins.count(0)
        distinct = len({k for k in basins if k != 0})
        assert len(basins) - n_red - n_global == distinct

    def test_order_does_not_change_basin_count(self, himmelblau):
        pts = [A, B_, A, X_STAR, B_, C_]
        for order in ([0, 1, 2, 3, 4, 5], [5, 4, 3, 2, 1, 0], [2, 0, 4, 1, 5, 3]):
            led = classify(ledger_at([pts[i] for i in order], himmelblau), himmelblau)
            assert sum(r.redundant for r in led.records) == 2
