import time
import unittest

import numpy as np

from app.validator import ValidationIssue
from models.errors import InitialConditionError, StepFailureError
from models.lagrangian import DiscreteForce
from models.oscillator import make_oscillator
from models.particle import make_particle, sections as particle_sections
from models.run_config import ForceConfig
from models.snakeboard import (
    control_force,
    default_v0,
    distribution_basis,
    make_snakeboard,
    sections as snakeboard_sections,
)
from models.states import GniState, StepConfig
from services.diagnostics_service import DiagnosticsService
from services.discretization_service import DiscretizationService
from services.geometry_service import GeometryService
from services.gni_service import GniService


def _max_residual(record) -> float:
    return float(np.max(record.constraint_residual))


class GniStepTests(unittest.TestCase):
    def test_particle_step_solves_linear_system(self):
        sys = make_particle()
        h = 0.01
        Ld = DiscretizationService.make_quadratic(np.eye(3), h)
        q0 = np.array([0.1, 0.2, 0.3])
        q1 = np.array([0.11, 0.215, 0.302])
        state = GniState(q_prev=q0, q_curr=q1, k=1, t=h)
        q2 = GniService.gni_step(sys, Ld, state, StepConfig(h=h)).q_curr

        x0, y0, z0 = q0
        x1, y1, z1 = q1
        A = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, y1], [-y1, 0.0, 1.0]])
        b = np.array([2 * y1 - y0, 2 * x1 - x0 + y1 * (2 * z1 - z0), z0 - y1 * x0])
        np.testing.assert_allclose(q2, np.linalg.solve(A, b), atol=1e-12)

    def test_snakeboard_step_matches_matrix_update(self):
        sys = make_snakeboard()
        h = 0.01
        Ld = DiscretizationService.make_quadratic(sys.mass(np.zeros(5)), h)
        q0 = np.array([0.0, 0.1, 0.2, 0.0, 0.3])
        q1 = q0 + h * np.array([0.5, -0.2, 0.4, 0.3, 0.1])
        state = GniState(q_prev=q0, q_curr=q1, k=1, t=h)
        q2 = GniService.gni_step(sys, Ld, state, StepConfig(h=h)).q_curr

        Q = GeometryService.projectors_at(sys, q1).Q_mat
        inertia = sys.mass(q1)
        update = np.eye(5) - 2.0 * np.linalg.solve(inertia, Q.T @ inertia)
        np.testing.assert_allclose(q2, update @ (q1 - q0) + q1, atol=1e-12)

    def test_step_must_match_lagrangian(self):
        sys = make_particle()
        Ld = DiscretizationService.make_quadratic(np.eye(3), 0.01)
        state = GniState(q_prev=np.zeros(3), q_curr=np.array([0.01, 0.01, 0.0]))
        with self.assertRaises(ValidationIssue):
            GniService.gni_step(sys, Ld, state, StepConfig(h=0.02))

    def test_newton_failure_carries_partial_record(self):
        sys = make_snakeboard()
        h = 0.01
        Ld = DiscretizationService.make_quadratic(sys.mass(np.zeros(5)), h)
        init = GniService.initialize_from_velocity(sys, Ld, np.zeros(5), default_v0(np.zeros(5), sys.params), StepConfig(h=h))
        cfg = StepConfig(h=h)
        with self.assertRaises(StepFailureError) as ctx:
            # force NaN : le résidu de Newton ne descend jamais sous le seuil
            GniService.gni_run(sys, Ld, init, cfg, 5, force=DiscreteForce("nan", lambda q, t: np.full(5, np.nan)))
        self.assertIsNotNone(ctx.exception.partial)
        self.assertEqual(ctx.exception.step, 1)
        self.assertEqual(len(ctx.exception.partial), 1)


class GniRunTests(unittest.TestCase):
    def test_particle_energy_and_horizontal_symmetry(self):
        sys = make_particle()
        h = 0.01
        Ld = DiscretizationService.make_quadratic(np.eye(3), h)
        cfg = StepConfig(h=h)
        init = GniService.initialize_from_velocity(sys, Ld, np.zeros(3), np.array([1.0, 1.0, 0.0]), cfg)
        started = time.perf_counter()
        record = GniService.gni_run(sys, Ld, init, cfg, 10_000)
        elapsed = time.perf_counter() - started

        self.assertLess(elapsed, 1.0)
        self.assertEqual(len(record), 10_001)
        H0 = record.energy[0]
        self.assertAlmostEqual(H0, 1.0, places=12)
        self.assertLessEqual(DiagnosticsService.energy_report(record).max_drift, 1e-10 * (1.0 + abs(H0)))
        self.assertLessEqual(_max_residual(record), 10.0 * cfg.newton_tol)

    def test_particle_horizontal_momentum_is_exact(self):
        sys = make_particle()
        h = 2.0 ** -7
        Ld = DiscretizationService.make_quadratic(np.eye(3), h)
        init = GniState(q_prev=np.zeros(3), q_curr=np.array([h, h, 0.0]), k=1, t=h)
        record = GniService.gni_run(sys, Ld, init, StepConfig(h=h), 10_000)
        series = DiagnosticsService.section_series(record, sys, Ld, particle_sections()["xi2"])
        values = series["jnh"]
        self.assertAlmostEqual(values[0], 1.0 / h, places=9)
        self.assertLessEqual(float(np.max(np.abs(values - values[0]))), 1e-12)
        steps_y = np.diff(record.positions(include_last=True)[:, 1])
        self.assertTrue(np.all(steps_y == steps_y[0]))

    def test_snakeboard_energy_and_momentum_equation(self):
        sys = make_snakeboard()
        h = 0.01
        Ld = DiscretizationService.make_quadratic(sys.mass(np.zeros(5)), h)
        cfg = StepConfig(h=h)
        q0 = np.array([0.0, 0.0, 0.0, 0.0, 0.3])
        init = GniService.initialize_from_velocity(sys, Ld, q0, default_v0(q0, sys.params), cfg)
        record = GniService.gni_run(sys, Ld, init, cfg, 1000)

        H0 = record.energy[0]
        self.assertLessEqual(DiagnosticsService.energy_report(record).max_drift, 1e-10 * (1.0 + abs(H0)))
        self.assertLessEqual(_max_residual(record), 10.0 * cfg.newton_tol)

        series = DiagnosticsService.section_series(record, sys, Ld, snakeboard_sections(sys.params)["se2"])
        self.assertLessEqual(float(np.max(np.abs(series["momentum_residual"]))), 1e-10)

    def test_snakeboard_energy_from_random_admissible_start(self):
        sys = make_snakeboard()
        h = 0.01
        Ld = DiscretizationService.make_quadratic(sys.mass(np.zeros(5)), h)
        cfg = StepConfig(h=h)
        rng = np.random.default_rng(1)
        q0 = np.array([rng.normal(), rng.normal(), rng.uniform(-np.pi, np.pi), rng.normal(), rng.uniform(-0.8, 0.8)])
        # phi' = 0 : sans contrôle phi reste constant, loin de pi/2
        coeffs = np.array([rng.normal(), 0.0, rng.normal()])
        v0 = distribution_basis(q0, sys.params["r"]) @ coeffs
        init = GniService.initialize_from_velocity(sys, Ld, q0, v0, cfg)
        record = GniService.gni_run(sys, Ld, init, cfg, 10_000)

        self.assertEqual(len(record), 10_001)
        H0 = record.energy[0]
        self.assertLessEqual(DiagnosticsService.energy_report(record).max_drift, 1e-10 * (1.0 + abs(H0)))
        np.testing.assert_allclose(record.q[:, 4], q0[4], atol=1e-12)

    def test_forced_snakeboard_keeps_average_constraint(self):
        sys = make_snakeboard()
        h = 0.01
        Ld = DiscretizationService.make_quadratic(sys.mass(np.zeros(5)), h)
        cfg = StepConfig(h=h)
        q0 = np.array([0.0, 0.0, 0.0, 0.0, 0.2])
        control = ForceConfig(amp_psi=1.0, amp_phi=-1.0, omega=1.0)
        # phi = 0.2 + 0.5 sin t : reste loin de pi/2
        init = GniService.initialize_from_velocity(sys, Ld, q0, default_v0(q0, sys.params, control), cfg)
        force = DiscreteForce("control", control_force(control.amp_psi, control.amp_phi, control.omega))
        record = GniService.gni_run(sys, Ld, init, cfg, 500, force)
        self.assertLessEqual(_max_residual(record), 10.0 * cfg.newton_tol)
        # le rotor reçoit de l'énergie
        self.assertGreater(DiagnosticsService.energy_report(record).max_drift, 1e-6)

    def test_average_momentum_is_projected_pre_momentum(self):
        sys = make_particle()
        h = 0.01
        Ld = DiscretizationService.make_quadratic(np.eye(3), h)
        cfg = StepConfig(h=h)
        init = GniService.initialize_from_velocity(sys, Ld, np.zeros(3), np.array([0.6, -0.8, 0.0]), cfg)
        record = GniService.gni_run(sys, Ld, init, cfg, 50)
        for k in range(len(record)):
            pp = GeometryService.projectors_at(sys, record.q[k])
            avg = DiagnosticsService.average_momentum(record.momentum(k))
            np.testing.assert_allclose(avg, GeometryService.dual_projection(pp, record.p_pre[k]), atol=1e-9)

    def test_unconstrained_reduces_to_stormer_verlet(self):
        sys = make_oscillator(1.0)
        h = 0.1
        Ld = DiscretizationService.make_symmetric_mechanical(np.eye(1), h, sys.v, sys.grad_v)
        cfg = StepConfig(h=h)
        init = GniService.initialize_from_velocity(sys, Ld, [1.0], [0.0], cfg)
        record = GniService.gni_run(sys, Ld, init, cfg, 1000)

        q, v = 1.0, 0.0
        expected = [q]
        for _ in range(1000):
            v_half = v - 0.5 * h * q
            q = q + h * v_half
            v = v_half - 0.5 * h * q
            expected.append(q)
        np.testing.assert_allclose(record.q[:, 0], expected[:1001], atol=1e-12)
        np.testing.assert_allclose(record.q_last[0], _verlet_next(expected, h), atol=1e-12)


def _verlet_next(expected, h):
    q_prev, q_curr = expected[-2], expected[-1]
    return 2.0 * q_curr - q_prev - h * h * q_curr


class InitialConditionTests(unittest.TestCase):
    def test_rejects_velocity_outside_distribution(self):
        sys = make_particle()
        Ld = DiscretizationService.make_quadratic(np.eye(3), 0.01)
        with self.assertRaises(InitialConditionError):
            GniService.initialize_from_velocity(sys, Ld, np.zeros(3), np.array([0.0, 0.0, 1.0]), StepConfig(h=0.01))

    def test_initial_pair_in_constraint_manifold(self):
        sys = make_particle()
        h = 0.01
        Ld = DiscretizationService.make_quadratic(np.eye(3), h)
        init = GniService.initialize_from_velocity(sys, Ld, np.zeros(3), np.array([1.0, 1.0, 0.0]), StepConfig(h=h))
        np.testing.assert_allclose(init.q_curr, [h, h, 0.0], atol=1e-15)
        self.assertTrue(GniService.in_initial_manifold(sys, Ld, init.q_prev, init.q_curr).inside)
        self.assertFalse(GniService.in_initial_manifold(sys, Ld, np.zeros(3), np.array([0.0, 0.0, h])).inside)


if __name__ == "__main__":
    unittest.main()
