import unittest

import numpy as np

from app.validator import ValidationIssue
from models import particle, sleigh, snakeboard
from models.registry import MODELS, build_bundle, get_entry, resolve_params
from models.run_config import ForceConfig


class RegistryTests(unittest.TestCase):
    def test_shipped_models(self):
        self.assertEqual(set(MODELS), {"particle", "snakeboard", "sleigh", "oscillator", "free"})
        for name, entry in MODELS.items():
            self.assertEqual(entry.name, name)
            self.assertTrue(entry.default_v0 is not None or entry.default_q1 is not None, msg=name)

    def test_unknown_model(self):
        with self.assertRaises(ValidationIssue) as ctx:
            get_entry("bicycle")
        self.assertEqual(ctx.exception.field, "model")

    def test_params_override_and_rejection(self):
        entry = get_entry("sleigh")
        self.assertEqual(resolve_params(entry, {"a": "0.5"})["a"], 0.5)
        with self.assertRaises(ValidationIssue) as ctx:
            resolve_params(entry, {"mass": 2})
        self.assertEqual(ctx.exception.field, "params.mass")
        with self.assertRaises(ValidationIssue):
            build_bundle("sleigh", 0.1, {"m": "-1"})

    def test_bundle_contents(self):
        bundle = build_bundle("sleigh", 0.1)
        self.assertEqual(bundle.system.n, 3)
        self.assertEqual(set(bundle.dla_constraints), {"midpoint", "coarse"})
        self.assertEqual(set(bundle.sections), {"rotation", "heading"})
        self.assertAlmostEqual(bundle.lagrangian.h, 0.1)
        self.assertIsNone(bundle.force)

        unconstrained = build_bundle("oscillator", 0.1, {"k": 2})
        self.assertEqual(unconstrained.dla_constraints, {})
        self.assertEqual(unconstrained.system.params["k"], 2.0)

    def test_force_only_on_snakeboard(self):
        bundle = build_bundle("snakeboard", 0.01, force=ForceConfig(amp_psi=2.0, amp_phi=0.5, omega=3.0))
        f = bundle.force.fn(np.zeros(5), np.pi / 6.0)
        np.testing.assert_allclose(f, [0.0, 0.0, 0.0, 2.0 * np.sin(0.5 * np.pi), 0.5 * np.sin(0.5 * np.pi)])
        with self.assertRaises(ValidationIssue) as ctx:
            build_bundle("particle", 0.01, force=ForceConfig())
        self.assertEqual(ctx.exception.field, "force")


class SectionTests(unittest.TestCase):
    def _assert_horizontal(self, sys, secs, points):
        for name, sec in secs.items():
            for q in points:
                residual = sys.mu(q) @ sec.field_at(q)
                np.testing.assert_allclose(residual, 0.0, atol=1e-13, err_msg=name)

    def test_particle_sections_lie_in_distribution(self):
        rng = np.random.default_rng(5)
        self._assert_horizontal(particle.make_particle(), particle.sections(), rng.normal(size=(20, 3)))

    def test_snakeboard_section_lies_in_distribution(self):
        sys = snakeboard.make_snakeboard()
        rng = np.random.default_rng(6)
        points = rng.uniform(-1.0, 1.0, size=(20, 5))
        self._assert_horizontal(sys, snakeboard.sections(sys.params), points)

    def test_sleigh_sections_lie_in_distribution(self):
        rng = np.random.default_rng(7)
        self._assert_horizontal(sleigh.make_sleigh(), sleigh.sections(), rng.normal(size=(20, 3)))


class DefaultVelocityTests(unittest.TestCase):
    def test_snakeboard_default_velocity_is_admissible(self):
        sys = snakeboard.make_snakeboard()
        q0 = np.array(snakeboard.DEFAULT_Q0)
        for force in (None, ForceConfig()):
            v0 = snakeboard.default_v0(q0, sys.params, force)
            np.testing.assert_allclose(sys.mu(q0) @ v0, 0.0, atol=1e-14)
            self.assertEqual(v0[2], snakeboard.helper_c(q0))

    def test_forced_snakeboard_velocity_cancels_drift(self):
        params = snakeboard.DEFAULT_PARAMS
        force = ForceConfig(amp_psi=1.0, amp_phi=-1.0, omega=2.0)
        v0 = snakeboard.default_v0(np.array(snakeboard.DEFAULT_Q0), params, force)
        self.assertAlmostEqual(v0[3], -1.0 / (params["J0"] * 2.0))
        self.assertAlmostEqual(v0[4], 1.0 / (2.0 * params["J1"] * 2.0))

    def test_particle_basis_spans_distribution(self):
        q = np.array([0.4, -1.2, 3.0])
        basis = particle.distribution_basis(q)
        np.testing.assert_allclose(particle.make_particle().mu(q) @ basis, 0.0, atol=1e-15)


if __name__ == "__main__":
    unittest.main()
