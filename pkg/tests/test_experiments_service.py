import unittest
from dataclasses import replace

import numpy as np

from app.validator import ValidationIssue
from models.run_config import ForceConfig, RunConfig
from services.diagnostics_service import DiagnosticsService
from services.experiments_service import ExperimentsService


class InitialDataTests(unittest.TestCase):
    def test_model_defaults(self):
        sleigh = RunConfig(model="sleigh")
        init = ExperimentsService.initial_data(sleigh, ExperimentsService.bundle_for(sleigh))
        self.assertIsNone(init.v0)
        np.testing.assert_allclose(init.q1, [-0.2395, -0.0070, 0.0589])

        particle = RunConfig(model="particle")
        init = ExperimentsService.initial_data(particle, ExperimentsService.bundle_for(particle))
        np.testing.assert_allclose(init.v0, [1.0, 1.0, 0.0])

    def test_dimension_mismatch(self):
        cfg = RunConfig(model="particle", q0=(0.0, 0.0))
        with self.assertRaises(ValidationIssue) as ctx:
            ExperimentsService.initial_data(cfg, ExperimentsService.bundle_for(cfg))
        self.assertEqual(ctx.exception.field, "q0")


class RunMethodTests(unittest.TestCase):
    def test_all_methods_on_particle(self):
        cfg = RunConfig(model="particle", h=0.01, steps=20, ref_refine=4, dla_constraint="midpoint")
        for method in ("gni", "rattle", "dla", "reference"):
            record = ExperimentsService.run_method(cfg, method)
            self.assertEqual(record.method, method)
            self.assertEqual(len(record), 21)
            self.assertAlmostEqual(record.h, 0.01)

    def test_dla_needs_constraint_discretization(self):
        with self.assertRaises(ValidationIssue) as ctx:
            ExperimentsService.run_method(RunConfig(model="particle", steps=2), "dla")
        self.assertEqual(ctx.exception.field, "dla_constraint")
        with self.assertRaises(ValidationIssue):
            ExperimentsService.run_method(RunConfig(model="particle", steps=2, dla_constraint="trapezoid"), "dla")
        # sans contrainte, la discrétisation est inutile
        record = ExperimentsService.run_method(RunConfig(model="oscillator", steps=3), "dla")
        self.assertEqual(len(record), 4)

    def test_control_force_only_with_gni(self):
        cfg = RunConfig(model="snakeboard", steps=5, force=ForceConfig())
        self.assertEqual(len(ExperimentsService.run_method(cfg, "gni")), 6)
        with self.assertRaises(ValidationIssue):
            ExperimentsService.run_method(cfg, "rattle")

    def test_velocity_outside_distribution_is_a_config_error(self):
        cfg = RunConfig(model="particle", v0=(0.0, 0.0, 1.0), steps=2)
        with self.assertRaises(ValidationIssue) as ctx:
            ExperimentsService.run_method(cfg, "gni")
        self.assertEqual(ctx.exception.field, "v0")

    def test_rattle_pair_off_constraint_is_a_config_error(self):
        cfg = RunConfig(model="particle", q1=(0.0, 0.0, 0.01), steps=2)
        with self.assertRaises(ValidationIssue) as ctx:
            ExperimentsService.run_method(cfg, "rattle")
        self.assertEqual(ctx.exception.field, "q1")

    def test_sleigh_draws_a_loop(self):
        record = ExperimentsService.run_method(RunConfig(model="sleigh"), "gni")
        self.assertEqual(len(record), 151)
        xy = record.positions(include_last=True)[:, :2]
        crossings = DiagnosticsService.planar_self_intersections(xy)
        self.assertTrue(crossings)
        c = crossings[0]
        self.assertGreater(DiagnosticsService.loop_area(xy, c.i, c.j, c.point), 0.0)


class ConvergenceTests(unittest.TestCase):
    def test_gni_is_second_order_on_particle(self):
        cfg = RunConfig(model="particle", method="gni", steps=20, h_list=(0.02, 0.01, 0.005))
        table = ExperimentsService.convergence(cfg)
        self.assertAlmostEqual(table.t_final, 0.4)
        self.assertEqual([row.steps for row in table.rows], [20, 40, 80])
        self.assertIsNone(table.rows[0].order)
        for row in table.rows[1:]:
            self.assertGreaterEqual(row.order, 1.9)
        errors = [row.error for row in table.rows]
        self.assertGreater(errors[0], errors[1])
        self.assertGreater(errors[1], errors[2])

    def test_exact_methods_report_no_order(self):
        cfg = RunConfig(model="free", method="gni", steps=8, ref_refine=2, h_list=(0.125, 0.0625, 0.03125))
        table = ExperimentsService.convergence(cfg)
        self.assertTrue(all(row.order is None for row in table.rows))
        self.assertTrue(all(row.error < 1e-14 for row in table.rows))

    def test_step_must_divide_horizon(self):
        cfg = RunConfig(model="free", steps=10, h_list=(0.1, 0.03))
        with self.assertRaises(ValidationIssue) as ctx:
            ExperimentsService.convergence(cfg)
        self.assertEqual(ctx.exception.field, "h_list")


class CompareTests(unittest.TestCase):
    def test_sleigh_gni_against_dla(self):
        cfg = RunConfig(model="sleigh", methods=("gni", "dla"))
        report = ExperimentsService.compare(cfg)
        self.assertEqual(set(report.records), {"gni", "dla"})
        self.assertEqual(len(report.reference), 151)
        gni, dla = report.errors["gni"], report.errors["dla"]
        self.assertLessEqual(gni.rms, 10.0 * dla.rms)

        bundle = ExperimentsService.bundle_for(cfg)
        init = ExperimentsService.initial_data(cfg, bundle)
        coarse = ExperimentsService.run_method(
            replace(cfg, dla_constraint="coarse"), "dla", h=report.h, steps=150, init=init
        )
        coarse_err = DiagnosticsService.trajectory_errors(coarse.q, report.reference.q)
        self.assertGreaterEqual(coarse_err.rms, 10.0 * dla.rms)

    def test_energy_drift_per_method(self):
        cfg = RunConfig(model="particle", h=0.01, steps=2000, ref_refine=2, methods=("gni", "dla"))
        report = ExperimentsService.compare(cfg)
        self.assertEqual(set(report.drifts), {"reference", "gni", "dla"})
        H0 = report.records["gni"].energy[0]
        self.assertLessEqual(report.drifts["gni"], 1e-10 * (1.0 + abs(H0)))
        self.assertGreaterEqual(report.drifts["dla"], 1e-7)


if __name__ == "__main__":
    unittest.main()
