import json
import os
import tempfile
import unittest
from unittest.mock import patch

from config import PRESETS, ExperimentConfig, build_config, get_runtime_config, load_config
from errors import InvalidConfigError, RunStoreError


class ConfigTests(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def _write(self, payload, name="cfg.json"):
        path = os.path.join(self.tmp.name, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(payload if isinstance(payload, str) else json.dumps(payload))
        return path

    def test_fig4_preset(self):
        config = load_config(preset="fig4")
        self.assertEqual((config.n, config.d, config.fe_budget, config.k, config.g), (300, 100, 50_000, 5, 10))
        self.assertEqual(config.seeds, list(range(1, 11)))
        self.assertEqual(config.mcs.delay_mode, "sum")
        self.assertTrue(config.pure_attention)

    def test_mcs300_is_an_alias_of_fig4(self):
        self.assertEqual(load_config(preset="mcs300"), load_config(preset="fig4"))

    def test_fig4_preset_overridable_to_hybrid(self):
        self.assertFalse(load_config(preset="fig4", overrides={"pure_attention": False}).pure_attention)

    def test_precedence_preset_file_flags(self):
        path = self._write({"n": 50, "k": 4, "mcs": {"data_bits": 1e6}})
        config = load_config(path, preset="fig4", overrides={"k": 3, "g": None})
        self.assertEqual(config.n, 50)
        self.assertEqual(config.k, 3)
        self.assertEqual(config.g, PRESETS["fig4"]["g"])
        self.assertEqual(config.mcs.data_bits, 1e6)
        self.assertEqual(config.mcs.bandwidth_hz, 1e6)

    def test_unknown_key_names_the_field(self):
        with self.assertRaises(InvalidConfigError) as ctx:
            build_config({"populaton": 10})
        self.assertEqual(ctx.exception.field, "populaton")

    def test_relations_validated(self):
        for bad in ({"n": 4, "k": 5}, {"d": 10, "g": 11}, {"d": 100, "fe_budget": 99}):
            with self.assertRaises(InvalidConfigError):
                build_config(bad)

    def test_power_box_validated(self):
        with self.assertRaises(InvalidConfigError):
            build_config({"mcs": {"p_lo": 1.0, "p_hi": 0.5}})

    def test_unknown_preset(self):
        with self.assertRaises(InvalidConfigError):
            load_config(preset="fig9")

    def test_malformed_json(self):
        with self.assertRaises(InvalidConfigError):
            load_config(self._write("{not json"))

    def test_missing_file(self):
        with self.assertRaises(RunStoreError):
            load_config(os.path.join(self.tmp.name, "absent.json"))

    def test_identity_excludes_output_location_and_seeds(self):
        a = ExperimentConfig(out_dir="x", seeds=[1])
        b = ExperimentConfig(out_dir="y", seeds=[2, 3])
        self.assertEqual(a.identity(), b.identity())
        self.assertNotIn("out_dir", a.identity())


class RuntimeConfigTests(unittest.TestCase):
    def test_defaults(self):
        with patch.dict(os.environ, {}, clear=True):
            runtime = get_runtime_config()
        self.assertEqual(runtime, {"max_workers": 1, "eval_workers": 1, "log_level": "INFO"})

    def test_values_clamped_and_bad_values_ignored(self):
        env = {"MOEA_MAX_WORKERS": "0", "MOEA_EVAL_WORKERS": "many", "MOEA_LOG_LEVEL": "debug"}
        with patch.dict(os.environ, env, clear=True):
            runtime = get_runtime_config()
        self.assertEqual(runtime["max_workers"], 1)
        self.assertEqual(runtime["eval_workers"], 1)
        self.assertEqual(runtime["log_level"], "DEBUG")


if __name__ == "__main__":
    unittest.main()
