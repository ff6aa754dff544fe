import unittest

import numpy as np

from models.errors import RankDeficiencyError
from models.particle import make_particle
from models.sleigh import make_sleigh, normal_field
from models.snakeboard import distribution_basis, helper_a, helper_b, helper_c, make_snakeboard
from models.system import MechanicalSystem
from services.geometry_service import GeometryService

TOL = 1e-10


def _random_system(rng, index):
    n = int(rng.integers(2, 7))
    m = int(rng.integers(1, n))
    A = rng.normal(size=(n, n))
    M = A @ A.T + n * np.eye(n)
    mu0 = rng.normal(size=(m, n))
    B = rng.normal(size=(m, n))
    return MechanicalSystem(
        name=f"random{index}",
        n=n,
        m=m,
        metric=lambda q: M,
        constraints=lambda q: mu0 + 0.1 * B * np.sin(q)[None, :],
        constant_metric=True,
    )


class ProjectorAlgebraTests(unittest.TestCase):
    def test_invariants_on_random_instances(self):
        rng = np.random.default_rng(20240501)
        for i in range(200):
            sys = _random_system(rng, i)
            q = rng.normal(size=sys.n)
            res = GeometryService.invariant_residuals(sys, q)
            for key, value in res.items():
                self.assertLessEqual(value, TOL, msg=f"{sys.name} {key}={value:.3e}")

    def test_dual_reflection_preserves_kinetic_norm(self):
        rng = np.random.default_rng(42)
        for i in range(100):
            sys = _random_system(rng, i)
            q = rng.normal(size=sys.n)
            p = rng.normal(size=sys.n)
            pp = GeometryService.projectors_at(sys, q)
            M = sys.mass(q)
            reflected = GeometryService.dual_reflection(pp, p)
            before = float(p @ np.linalg.solve(M, p))
            after = float(reflected @ np.linalg.solve(M, reflected))
            self.assertLessEqual(abs(after - before), 1e-12 * before, msg=sys.name)

    def test_unconstrained_projectors(self):
        sys = MechanicalSystem(
            name="free2", n=2, m=0, metric=lambda q: np.eye(2), constraints=lambda q: np.zeros((0, 2))
        )
        pp = GeometryService.projectors_at(sys, np.zeros(2))
        np.testing.assert_array_equal(pp.Q_mat, np.zeros((2, 2)))
        np.testing.assert_array_equal(pp.R_mat, np.eye(2))
        self.assertEqual(GeometryService.constraint_residual(sys, np.zeros(2), np.ones(2)), 0.0)

    def test_dual_reflection_keeps_d_and_flips_d_perp(self):
        sys = make_particle()
        q = np.array([0.3, -0.8, 1.1])
        pp = GeometryService.projectors_at(sys, q)
        p = np.array([0.4, 1.2, -0.7])
        reflected = GeometryService.dual_reflection(pp, p)
        projected = GeometryService.dual_projection(pp, p)
        np.testing.assert_allclose(reflected + p, 2.0 * projected, atol=1e-14)
        # mu^T lambda restitue la composante D^perp
        lam = GeometryService.multipliers(pp, p)
        np.testing.assert_allclose(p - projected, pp.mu.T @ lam, atol=1e-14)


class ParticleGeometryTests(unittest.TestCase):
    def test_gram_and_projector(self):
        sys = make_particle()
        y = 0.6
        q = np.array([0.1, y, -0.2])
        self.assertAlmostEqual(GeometryService.gram_matrix(sys, q)[0, 0], 1.0 + y * y, places=14)
        mu = np.array([-y, 0.0, 1.0])
        expected = np.outer(mu, mu) / (1.0 + y * y)
        np.testing.assert_allclose(GeometryService.projectors_at(sys, q).Q_mat, expected, atol=1e-14)

    def test_constraint_residual_of_admissible_momentum(self):
        sys = make_particle()
        q = np.array([0.0, 2.0, 0.0])
        p = np.array([1.0, 0.5, 2.0])  # d_x + y d_z et d_y
        self.assertLess(GeometryService.constraint_residual(sys, q, p), 1e-15)


class SnakeboardGeometryTests(unittest.TestCase):
    def setUp(self):
        self.params = {"m": 1.3, "J": 0.8, "J0": 0.4, "J1": 0.25, "r": 0.6}
        self.sys = make_snakeboard(**self.params)

    def _closed_form_q(self, q):
        m, r = self.params["m"], self.params["r"]
        Jp = self.params["J"] + 2.0 * self.params["J1"]
        a, b, c = helper_a(q, r), helper_b(q, r), helper_c(q)
        den = Jp * c * c + m * (a * a + b * b)
        Q = np.zeros((5, 5))
        Q[:3, :3] = [
            [Jp * c * c + m * b * b, -m * a * b, -Jp * a * c],
            [-m * a * b, Jp * c * c + m * a * a, -Jp * b * c],
            [-m * a * c, -m * b * c, m * (a * a + b * b)],
        ]
        return Q / den

    def test_projector_matches_closed_form(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            q = np.array([rng.normal(), rng.normal(), rng.uniform(-np.pi, np.pi), rng.normal(), rng.uniform(-1.2, 1.2)])
            Q = GeometryService.projectors_at(self.sys, q).Q_mat
            np.testing.assert_allclose(Q, self._closed_form_q(q), atol=TOL)

    def test_distribution_basis_is_admissible(self):
        q = np.array([0.0, 0.0, 0.7, 0.2, -0.4])
        basis = distribution_basis(q, self.params["r"])
        np.testing.assert_allclose(self.sys.mu(q) @ basis, np.zeros((2, 3)), atol=1e-15)

    def test_rank_deficiency_at_right_angle(self):
        q = np.array([0.0, 0.0, 0.3, 0.0, np.pi / 2])
        with self.assertRaises(RankDeficiencyError):
            GeometryService.gram_matrix(self.sys, q)


class SleighGeometryTests(unittest.TestCase):
    def test_dual_projector_matches_closed_form(self):
        m, I, a = 1.0, 1.0, 0.2
        sys = make_sleigh(m, I, a)
        for theta in np.linspace(-3.0, 3.0, 13):
            q = np.array([0.5, -0.2, theta])
            s, c = np.sin(theta), np.cos(theta)
            k = a * m / (I + m * a * a)
            expected = np.array([[s * s, -s * c, k * s], [-s * c, c * c, -k * c], [0.0, 0.0, 0.0]])
            Q = GeometryService.projectors_at(sys, q).Q_mat
            np.testing.assert_allclose(Q.T, expected, atol=TOL)

    def test_gram_matrix(self):
        m, I, a = 2.0, 0.5, 0.3
        sys = make_sleigh(m, I, a)
        C = GeometryService.gram_matrix(sys, np.array([0.0, 0.0, 1.1]))
        self.assertAlmostEqual(C[0, 0], (I + m * a * a) / (m * I), places=12)

    def test_normal_field_spans_d_perp(self):
        sys = make_sleigh(1.0, 1.0, 0.2)
        q = np.array([0.0, 0.0, 0.4])
        pp = GeometryService.projectors_at(sys, q)
        field = normal_field(q, sys.params)
        np.testing.assert_allclose(pp.Q_mat @ field, field, atol=1e-12)
        z = pp.Z[:, 0]
        self.assertAlmostEqual(abs(z @ field) / (np.linalg.norm(z) * np.linalg.norm(field)), 1.0, places=12)

    def test_centered_sleigh_reduces_to_planar_block(self):
        sys = make_sleigh(1.0, 1.0, 0.0)
        self.assertTrue(sys.constant_metric)
        theta = 0.9
        Q = GeometryService.projectors_at(sys, np.array([0.0, 0.0, theta])).Q_mat
        s, c = np.sin(theta), np.cos(theta)
        np.testing.assert_allclose(Q[:2, :2], [[s * s, -s * c], [-s * c, c * c]], atol=1e-14)
        np.testing.assert_allclose(Q[2], np.zeros(3), atol=1e-14)
        np.testing.assert_allclose(Q[:, 2], np.zeros(3), atol=1e-14)


if __name__ == "__main__":
    unittest.main()
