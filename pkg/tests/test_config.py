"""Tests for the run configuration."""

import tempfile
import unittest
from pathlib import Path

from lumenplan.config import (
    CALIBRATED_BACKHAUL_PATH,
    CONFIG_KEYS,
    SCENARIO_NAMES,
    ConfigError,
    RunConfig,
    default_config,
    format_config,
    format_defaults,
    load_config,
    parse_config,
)


class TestParse(unittest.TestCase):
    """Tests for parsing configuration documents."""

    def test_defaults(self) -> None:
        """Test keys left out take their defaults."""
        config = parse_config("scenario = backhaul\n")
        self.assertIsInstance(config, RunConfig)
        self.assertEqual("backhaul", config.scenario)
        self.assertEqual(default_config("backhaul"), config)
        self.assertEqual((16,), config["backhaul.n_side"])
        self.assertEqual("auto", config["backhaul.per_beam_power_mw"])
        self.assertEqual("-", config.output_path)
        self.assertNotIn("coverage.resolution", config.values)

    def test_syntax(self) -> None:
        """Test comments, blank lines, whitespace, lists, and case-insensitive choices."""
        text = """
        # a comment
        scenario = Coverage   # trailing comment

        heatmap_format=PGM
        coverage.resolution = 50
        coverage.fov_deg = 30
        pd.material = Ge
        """
        config = parse_config(text, scenario="coverage")
        self.assertEqual("coverage", config.scenario)
        self.assertEqual("pgm", config.heatmap_format)
        self.assertEqual(50, config["coverage.resolution"])
        self.assertEqual(30.0, config["coverage.fov_deg"])
        self.assertEqual("off", default_config("coverage")["coverage.fov_deg"])
        self.assertEqual("ge", config["pd.material"])
        self.assertEqual((9, 16), parse_config("scenario = backhaul\nbackhaul.n_side = 9, 16")["backhaul.n_side"])
        for value, expected in [("1.5", 1.5), ("AUTO", "auto"), ("0", 0.0)]:
            with self.subTest(value=value):
                config = parse_config(f"scenario = backhaul\nbackhaul.per_beam_power_mw = {value}")
                self.assertEqual(expected, config["backhaul.per_beam_power_mw"])

    def test_errors(self) -> None:
        """Test each kind of invalid document reports the key and line."""
        for text, key, line in [
            ("scenario = safety\nfoo = 1", "foo", 2),
            ("scenario = safety\nscenario = safety", "scenario", 2),
            ("scenario safety", None, 1),
            ("scenario = party", "scenario", 1),
            ("safety.exposure_s = 10", "scenario", None),
            ("scenario = safety\nbackhaul.n_side = 9", "backhaul.n_side", 2),
            ("scenario = backhaul\nbackhaul.n_side = 33", "backhaul.n_side", 2),
            ("scenario = backhaul\nbackhaul.n_side = 9,,16", "backhaul.n_side", 2),
            ("scenario = backhaul\nbackhaul.n_side = 9.5", "backhaul.n_side", 2),
            ("scenario = backhaul\nbackhaul.mode = both\nbackhaul.mode = mimo", "backhaul.mode", 3),
            ("scenario = safety\nsafety.exposure_s = nan", "safety.exposure_s", 2),
            ("scenario = safety\nsafety.exposure_s =", "safety.exposure_s", 2),
            ("scenario = safety\nsafety.lambda_step_nm = 0", "safety.lambda_step_nm", 2),
            ("scenario = coverage\ncoverage.n_arrays = 8", "coverage.n_arrays", 2),
            ("scenario = coverage\ncoverage.fov_deg = on", "coverage.fov_deg", 2),
            ("scenario = coverage\nheatmap_format = png", "heatmap_format", 2),
        ]:
            with self.subTest(text=text), self.assertRaises(ConfigError) as e:
                parse_config(text)
            self.assertEqual(key, e.exception.key)
            self.assertEqual(line, e.exception.line)

    def test_messages(self) -> None:
        """Test errors render as line, key, and reason."""
        with self.assertRaises(ConfigError) as e:
            parse_config("scenario = backhaul\nbackhaul.n_side = 33")
        self.assertEqual("line 2: backhaul.n_side: value 33 out of range, must be at most 32", str(e.exception))
        with self.assertRaises(ConfigError) as e:
            parse_config("scenario = coverage\ncoverage.n_arrays = 8")
        self.assertEqual("line 2: coverage.n_arrays: value 8 must be a perfect square", str(e.exception))
        with self.assertRaises(ConfigError) as e:
            parse_config("safety.exposure_s = 10")
        self.assertEqual("scenario: missing required key", str(e.exception))
        with self.assertRaises(ConfigError) as e:
            parse_config("scenario = safety\nsafety.lambda_step_nm = 0")
        self.assertIn("must be above 0", str(e.exception))
        self.assertIsInstance(e.exception, ValueError)

    def test_scenario_mismatch(self) -> None:
        """Test a document for another scenario is refused."""
        with self.assertRaises(ConfigError) as e:
            parse_config("\nscenario = safety", scenario="backhaul")
        self.assertEqual("line 2: scenario: configuration is for safety, not backhaul", str(e.exception))

    def test_cross_key(self) -> None:
        """Test constraints that span several keys."""
        for text, key in [
            ("scenario = safety\nsafety.lambda_start_nm = 900\nsafety.lambda_end_nm = 800", "safety.lambda_start_nm"),
            ("scenario = backhaul\nbackhaul.waist_start_um = 60\nbackhaul.waist_end_um = 50", "backhaul.waist_start_um"),
            ("scenario = backhaul\nbackhaul.pd_half_side_mm = 6", "backhaul.pd_half_side_mm"),
            ("scenario = coverage\ncoverage.wall_margin_m = 2.5", "coverage.wall_margin_m"),
        ]:
            with self.subTest(key=key), self.assertRaises(ConfigError) as e:
                parse_config(text)
            self.assertEqual(key, e.exception.key)
            self.assertIsNone(e.exception.line)


class TestKeys(unittest.TestCase):
    """Tests for the documented keys."""

    def test_defaults_valid(self) -> None:
        """Test every default passes its own validation."""
        for name, entry in CONFIG_KEYS.items():
            with self.subTest(name=name):
                self.assertEqual(name, entry.name)
                self.assertEqual(entry.default, entry.parse(entry.format(entry.default)))
                self.assertTrue(entry.help)
                self.assertTrue(set(entry.scenarios) <= set(SCENARIO_NAMES))

    def test_format(self) -> None:
        """Test values render without trailing zeros."""
        self.assertEqual("30000", CONFIG_KEYS["safety.exposure_s"].format(30000.0))
        self.assertEqual("10,50,100", CONFIG_KEYS["safety.waists_um"].format((10.0, 50.0, 100.0)))
        self.assertEqual("0.25", CONFIG_KEYS["coverage.wall_margin_m"].format(0.25))
        self.assertEqual((10.0, 50.0), CONFIG_KEYS["safety.waists_um"].parse(" 10 , 50 "))


class TestDocuments(unittest.TestCase):
    """Tests for default, formatted, and loaded configurations."""

    def test_round_trip(self) -> None:
        """Test formatted configurations parse back unchanged."""
        for scenario in SCENARIO_NAMES:
            with self.subTest(scenario=scenario):
                config = default_config(scenario)
                self.assertEqual(config, parse_config(format_config(config)))
                self.assertEqual(config, parse_config(format_defaults(scenario)))
                self.assertEqual(hash(config), hash(parse_config(format_config(config))))
        with self.assertRaises(ConfigError):
            default_config("party")

    def test_format_defaults(self) -> None:
        """Test the defaults are listed with their help text."""
        text = format_defaults("materials")
        self.assertEqual(
            "# Scenario to run\nscenario = materials\n"
            "# Output file, - for standard output\noutput_path = -\n"
            "# How to rank band gap ranges\nmaterials.range_rule = midpoint\n",
            text,
        )
        coverage = format_defaults("coverage")
        self.assertIn("heatmap_format = csv\n", coverage)
        self.assertIn("coverage.fov_deg = off\n", coverage)
        self.assertNotIn("backhaul.", coverage)

    def test_updated(self) -> None:
        """Test overrides are revalidated."""
        config = default_config("coverage")
        updated = config.updated({"heatmap_format": "PGM", "output_path": "grid.pgm"})
        self.assertEqual("pgm", updated.heatmap_format)
        self.assertEqual("grid.pgm", updated.output_path)
        self.assertEqual("csv", config.heatmap_format)
        for overrides in [{"nope": 1}, {"coverage.resolution": 5}, {"coverage.wall_margin_m": 3.0}]:
            with self.subTest(overrides=overrides), self.assertRaises(ConfigError):
                config.updated(overrides)

    def test_calibrated_backhaul(self) -> None:
        """Test the shipped calibration loads."""
        config = load_config(CALIBRATED_BACKHAUL_PATH, scenario="backhaul")
        self.assertEqual((4, 9, 16, 25), config["backhaul.n_side"])
        self.assertEqual(80.0, config["pd.thermal_pa_per_sqrthz"])
        self.assertEqual(10.0, config["backhaul.rx_pitch_mm"])

    def test_load_errors(self) -> None:
        """Test files that are not UTF-8 are refused."""
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory).joinpath("bad.cfg")
            path.write_bytes(b"scenario = safety\n\xff\xfe")
            with self.assertRaises(ConfigError) as e:
                load_config(path)
            self.assertIn("UTF-8", str(e.exception))
            path.write_text("scenario = materials\nmaterials.range_rule = lower\n", encoding="utf-8")
            self.assertEqual("lower", load_config(path)["materials.range_rule"])
