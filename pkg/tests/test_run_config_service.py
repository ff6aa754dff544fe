import os
import tempfile
import unittest

from app.validator import ValidationIssue
from models.run_config import ForceConfig
from services.run_config_service import RunConfigService


class FromMappingTests(unittest.TestCase):
    def test_minimal_config_uses_defaults(self):
        cfg = RunConfigService.from_mapping({"model": "particle"})
        self.assertEqual(cfg.model, "particle")
        self.assertEqual(cfg.method, "gni")
        self.assertIsNone(cfg.h)
        self.assertIsNone(cfg.force)
        self.assertEqual(cfg.params, {})

    def test_full_config(self):
        cfg = RunConfigService.from_mapping(
            {
                "model": "Snakeboard",
                "method": "rk4",
                "h": "0.005",
                "steps": "200",
                "q0": "0, 0, 0, 0, 0.3",
                "t0": "1.5",
                "force.amp_phi": "-0.5",
                "params.J1": "2",
                "h_list": "0.02,0.01",
                "methods": "gni,dla",
            }
        )
        self.assertEqual(cfg.model, "snakeboard")
        self.assertEqual(cfg.method, "reference")
        self.assertEqual(cfg.h, 0.005)
        self.assertEqual(cfg.steps, 200)
        self.assertEqual(cfg.q0, (0.0, 0.0, 0.0, 0.0, 0.3))
        self.assertEqual(cfg.t0, 1.5)
        self.assertEqual(cfg.force, ForceConfig(amp_psi=ForceConfig().amp_psi, amp_phi=-0.5, omega=ForceConfig().omega))
        self.assertEqual(cfg.params, {"J1": 2.0})
        self.assertEqual(cfg.h_list, (0.02, 0.01))
        self.assertEqual(cfg.methods, ("gni", "dla"))

    def test_rejections(self):
        cases = [
            ({}, "model"),
            ({"model": "particle", "steps": "0"}, "steps"),
            ({"model": "particle", "steps": "2.5"}, "steps"),
            ({"model": "particle", "h": "-0.1"}, "h"),
            ({"model": "particle", "h": "nan"}, "h"),
            ({"model": "particle", "method": "euler"}, "method"),
            ({"model": "particle", "q0": "0,a,0"}, "q0[1]"),
            ({"model": "particle", "v0": "1,1,0", "q1": "0.1,0.1,0"}, "v0"),
            ({"model": "particle", "colour": "red"}, "colour"),
            ({"model": "particle", "methods": "gni"}, "methods"),
            ({"model": "particle", "newton_max_iter": "0"}, "newton_max_iter"),
            ({"model": "snakeboard", "force.omega": "0"}, "force.omega"),
        ]
        for raw, field in cases:
            with self.assertRaises(ValidationIssue, msg=str(raw)) as ctx:
                RunConfigService.from_mapping(raw)
            self.assertEqual(ctx.exception.field, field, msg=str(raw))


class FileTests(unittest.TestCase):
    def test_file_then_overrides(self):
        with tempfile.TemporaryDirectory() as folder:
            path = os.path.join(folder, "run.env")
            with open(path, "w", encoding="utf-8") as stream:
                stream.write("# particule\nmodel=particle\nh=0.02\nsteps=50\n")
            cfg = RunConfigService.load(path, {"steps": "10", "h": None})
        self.assertEqual(cfg.h, 0.02)
        self.assertEqual(cfg.steps, 10)

    def test_missing_file(self):
        with self.assertRaises(ValidationIssue) as ctx:
            RunConfigService.load("/nonexistent/run.env")
        self.assertEqual(ctx.exception.field, "config")


if __name__ == "__main__":
    unittest.main()
