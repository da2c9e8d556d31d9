import numpy as np
import pytest

from rrcma.benchmarks import (
    FIXED_DIMENSION,
    HIMMELBLAU_MINIMA,
    PROBLEMS,
    equal_maxima,
    globalize,
    is_local_minimum,
    make_problem,
    modified_himmelblau,
)
from rrcma.errors import ConfigError

ALL_2D = [n for n in PROBLEMS if FIXED_DIMENSION.get(n, 2) == 2]


class TestHimmelblau:
    x_star = np.array([3.0, 2.0])

    def test_global_zero(self):
        assert modified_himmelblau(self.x_star, self.x_star) == 0.0

    def test_local_value(self):
        x = np.array([-2.805118, 3.131312])
        assert modified_himmelblau(x, self.x_star) == pytest.approx(0.01, abs=1e-6)

    def test_origin(self):
        assert modified_himmelblau(np.zeros(2), self.x_star) == pytest.approx(170.01, abs=1e-12)

    def test_literal_variant(self):
        # first term enters unsquared: -11 + 49 + 0.01
        assert modified_himmelblau(np.zeros(2), self.x_star, literal=True) == pytest.approx(38.01)

    def test_minima_are_zeros(self):
        for m in HIMMELBLAU_MINIMA:
            assert abs(m[0] ** 2 + m[1] - 11) < 1e-9 and abs(m[0] + m[1] ** 2 - 7) < 1e-9

    def test_instance_picks_a_minimum(self):
        for seed in range(8):
            p = make_problem("himmelblau", 2, seed)
            assert min(np.linalg.norm(HIMMELBLAU_MINIMA - p.x_star, axis=1)) == 0.0
            assert sorted(f for _, f in p.local_optima) == pytest.approx([0.01] * 3)

    def test_vectorized(self):
        X = np.vstack([HIMMELBLAU_MINIMA, np.zeros(2)])
        out = modified_himmelblau(X, self.x_star)
        assert out.shape == (5,)
        assert out[0] == 0.0 and out[-1] == pytest.approx(170.01)


class TestGlobalize:
    def test_equal_maxima_lifted(self):
        peaks = np.array([[0.1 + 0.2 * i] for i in range(5)])
        p = globalize(equal_maxima, peaks[2], np.zeros(1), np.ones(1))
        vals = p.evaluate(peaks)
        assert vals[2] == pytest.approx(-1.0, abs=1e-12)
        np.testing.assert_allclose(np.delete(vals, 2), vals[2] + 0.01, atol=1e-12)

    def test_anchor(self):
        p = globalize(equal_maxima, np.array([0.3]))
        assert p(np.array([0.3])) == pytest.approx(-equal_maxima(np.array([0.3]))[0])

    def test_unsaturated_branch(self):
        f0 = lambda x: np.zeros(len(np.atleast_2d(x)))
        p = globalize(f0, np.zeros(2))
        x = np.array([np.sqrt(0.005), 0.0])
        assert p(x) == pytest.approx(0.005, abs=1e-15)

    def test_niching_global_unique(self):
        for name, d in (("uneven_trap", 1), ("equal_maxima", 1), ("six_hump_camel", 2),
                        ("shubert", 2), ("vincent", 2)):
            p = make_problem(name, d, 3)
            assert all(f > p.f_star for _, f in p.local_optima)


class TestCatalog:
    @pytest.mark.parametrize("name", ALL_2D)
    def test_optima_are_local_minima(self, name):
        p = make_problem(name, 2, 0)
        assert is_local_minimum(p, p.x_star)
        assert p(p.x_star) == pytest.approx(p.f_star, abs=1e-12)
        for x, fx in p.local_optima:
            assert p(x) == pytest.approx(fx, abs=1e-9)
            assert fx >= p.f_star
            assert is_local_minimum(p, x), (name, x)

    def test_rastrigin_lattice(self):
        p = make_problem("rastrigin", 2, 5)
        assert len(p.local_optima) > 20
        for x, _ in p.local_optima:
            z = p.transform.inverse(x[None, :])[0]
            np.testing.assert_allclose(z, np.round(z), atol=0.05)

    def test_sphere(self):
        p = make_problem("sphere", 5, 2)
        assert p.f_star == 0.0 and p.local_optima == ()
        np.testing.assert_array_equal(p.x_star, p.transform.translation)
        assert p(p.x_star) == pytest.approx(0.0, abs=1e-24)

    def test_determinism(self):
        X = np.random.default_rng(0).uniform(-5, 5, (50, 2))
        for name in ("sphere", "rastrigin", "gallagher21", "gallagher101", "himmelblau"):
            a, b = make_problem(name, 2, 4), make_problem(name, 2, 4)
            np.testing.assert_array_equal(a.evaluate(X), b.evaluate(X))

    def test_instances_differ(self):
        a, b = make_problem("gallagher21", 2, 0), make_problem("gallagher21", 2, 1)
        assert not np.array_equal(a.x_star, b.x_star)

    def test_x_star_inside_box(self):
        for name in ("sphere", "rastrigin", "gallagher21", "gallagher101"):
            for seed in range(5):
                p = make_problem(name, 3, seed)
                assert np.all(p.x_star > p.lb) and np.all(p.x_star < p.ub)

    def test_transform_round_trip(self):
        p = make_problem("rastrigin", 4, 1)
        Z = np.random.default_rng(1).standard_normal((10, 4))
        np.testing.assert_allclose(p.transform.inverse(p.transform(Z)), Z, atol=1e-12)

    def test_shubert_maxima(self):
        p = make_problem("shubert", 2)
        assert len(p.local_optima) == 17
        assert p.f_star == pytest.approx(-186.7309, abs=1e-3)

    def test_scalar_and_batch(self):
        p = make_problem("gallagher21", 2)
        x = np.array([0.5, -1.0])
        assert isinstance(p(x), float)
        assert p.evaluate(np.vstack([x, x])).shape == (2,)

    def test_volume(self):
        assert make_problem("sphere", 3).volume == pytest.approx(1000.0)
        assert make_problem("uneven_trap", 1).volume == pytest.approx(30.0)


class TestErrors:
    def test_unknown(self):
        with pytest.raises(ConfigError) as err:
            make_problem("ackley", 2)
        assert err.value.field == "problem"

    @pytest.mark.parametrize("name,d", [("himmelblau", 3), ("uneven_trap", 2), ("vincent", 4),
                                        ("sphere", 0)])
    def test_bad_dimension(self, name, d):
        with pytest.raises(ConfigError):
            make_problem(name, d)
