"""Tests for the MIMO backhaul model."""

import unittest

import numpy as np

from lumenplan.backhaul import (
    BoundaryOutsideDomainError,
    ChannelMatrix,
    MimoBackhaulConfig,
    aggregate_rate,
    aggregate_rate_sweep,
    beam_power,
    channel_registry,
    gain_matrix,
    interference_to_noise,
    link_sinr,
    min_waist_for_target,
    regime_boundary,
)
from lumenplan.config import CALIBRATED_BACKHAUL_PATH, load_config
from lumenplan.detection import PhotodetectorModel, dco_ofdm_rate, electrical_snr
from lumenplan.safety import SafetyStandardParams, max_transmit_power
from lumenplan.scenarios import BackhaulScenario

UM = 1e-6
TBPS = 1e12


def calibrated(n_side: int = 16, **kwargs) -> MimoBackhaulConfig:
    """Build the calibrated link, which differs from the defaults in its thermal noise."""
    pd = PhotodetectorModel.from_material("si", active_area=25e-6, thermal_current_density=80e-12)
    return MimoBackhaulConfig(n_side=n_side, pd=pd, **kwargs)


class TestConfig(unittest.TestCase):
    """Tests for the link configuration."""

    def test_defaults(self) -> None:
        """Test the default geometry."""
        cfg = MimoBackhaulConfig()
        self.assertEqual(256, cfg.n_channels)
        self.assertEqual(10e-3, cfg.transmitter_pitch)
        self.assertEqual(12e-3, MimoBackhaulConfig(tx_pitch=12e-3).transmitter_pitch)
        self.assertEqual(25e-6, cfg.pd.active_area)
        self.assertAlmostEqual(9.0, cfg.link.gap_db, places=12)

    def test_validation(self) -> None:
        """Test invalid links are refused."""
        for kwargs in [
            {"n_side": 1},
            {"n_side": 33},
            {"link_distance": 0.0},
            {"rx_pitch": -1.0},
            {"pd_half_side": 6e-3},
            {"per_beam_power": "max"},
            {"per_beam_power": -1e-3},
        ]:
            with self.subTest(kwargs=kwargs), self.assertRaises(ValueError):
                MimoBackhaulConfig(**kwargs)

    def test_calibrated_file(self) -> None:
        """Test the shipped calibration builds the same links as this module."""
        scenario = BackhaulScenario(load_config(CALIBRATED_BACKHAUL_PATH, scenario="backhaul"))
        self.assertEqual((4, 9, 16, 25), scenario.config["backhaul.n_side"])
        for n_side in (4, 16):
            with self.subTest(n_side=n_side):
                link = scenario.link(n_side)
                self.assertEqual(n_side, link.n_side)
                self.assertAlmostEqual(80e-12, link.pd.thermal_current_density, delta=1e-20)
                self.assertAlmostEqual(
                    1.0, aggregate_rate(link, 60 * UM) / aggregate_rate(calibrated(n_side), 60 * UM), places=9
                )


class TestGainMatrix(unittest.TestCase):
    """Tests for the beam-to-photodiode gains."""

    def test_narrow_waist(self) -> None:
        """Test a 10 μm waist spreads each beam over the whole array."""
        gains = gain_matrix(MimoBackhaulConfig(), 10 * UM)
        self.assertEqual((256, 256), gains.gains.shape)
        self.assertAlmostEqual(5.4e-3, gains.diagonal.max(), delta=0.1e-3)
        self.assertLess(gains.diagonal.max(), 0.05)

    def test_wide_waist(self) -> None:
        """Test a 500 μm waist gives a nearly diagonal matrix."""
        gains = gain_matrix(MimoBackhaulConfig(), 500 * UM).gains
        np.testing.assert_allclose(0.99994, np.diag(gains), atol=1e-5)
        self.assertLess((gains - np.diag(np.diag(gains))).max(), 1e-30)

    def test_energy_conservation(self) -> None:
        """Test no beam delivers more than its power."""
        for waist in (1, 10, 37, 100, 500):
            with self.subTest(waist=waist):
                gains = gain_matrix(MimoBackhaulConfig(n_side=9), waist * UM).gains
                self.assertTrue(np.all(gains.sum(axis=0) <= 1.0))
                self.assertTrue(np.all(gains >= 0.0))

    def test_symmetry(self) -> None:
        """Test the gains respect the symmetry of the square arrays."""
        n = 5
        gains = gain_matrix(MimoBackhaulConfig(n_side=n), 30 * UM).gains.reshape(n, n, n, n)
        np.testing.assert_allclose(gains, gains.transpose(2, 3, 0, 1), rtol=1e-12)
        # mirror left-right, then swap rows and columns
        np.testing.assert_allclose(gains, gains[:, ::-1, :, ::-1], rtol=1e-12)
        np.testing.assert_allclose(gains, gains.transpose(1, 0, 3, 2), rtol=1e-12)
        # beam (0, 0) on photodiode (0, 1) equals beam (0, 0) on photodiode (1, 0)
        self.assertEqual(gains[0, 1, 0, 0], gains[1, 0, 0, 0])

    def test_waist_domain(self) -> None:
        """Test waists outside 1-500 μm are refused."""
        for waist in (0.5, 501.0):
            with self.subTest(waist=waist), self.assertRaises(ValueError):
                gain_matrix(MimoBackhaulConfig(), waist * UM)

    def test_channel_matrix_validation(self) -> None:
        """Test the gain matrix invariants."""
        for gains in [np.ones((2, 3)) * 0.1, -np.eye(2), np.full((2, 2), 0.6)]:
            with self.subTest(gains=gains), self.assertRaises(ValueError):
                ChannelMatrix(gains)

    def test_ideal_channel(self) -> None:
        """Test the ideal treatment drops the crosstalk."""
        gains = np.array([[0.5, 0.1], [0.2, 0.4]])
        np.testing.assert_array_equal([[0.5, 0.0], [0.0, 0.4]], channel_registry.lookup("ideal")(gains))
        self.assertIs(gains, channel_registry.lookup(None)(gains))


class TestRates(unittest.TestCase):
    """Tests for the aggregate rate of the calibrated link."""

    def test_beam_power(self) -> None:
        """Test the automatic power is the eye-safe maximum."""
        cfg = calibrated()
        expected = max_transmit_power(850, 50 * UM, SafetyStandardParams()).max_transmit_power
        self.assertEqual(expected, beam_power(cfg, 50 * UM))
        self.assertEqual(1e-3, beam_power(calibrated(per_beam_power=1e-3), 50 * UM))

    def test_decoupled_channels(self) -> None:
        """Test a nearly diagonal ideal link is n_side² copies of one link."""
        cfg = calibrated(n_side=4)
        power = beam_power(cfg, 500 * UM) * gain_matrix(cfg, 500 * UM).diagonal[0]
        single = dco_ofdm_rate(electrical_snr(power, cfg.pd, cfg.link.bandwidth), cfg.link)
        self.assertAlmostEqual(1.0, aggregate_rate(cfg, 500 * UM, "ideal") / (16 * single), places=9)

    def test_ideal_bounds_mimo(self) -> None:
        """Test interference only ever lowers the rate."""
        cfg = calibrated(n_side=9)
        rng = np.random.default_rng(7)
        for waist in rng.uniform(10, 100, size=20):
            with self.subTest(waist=waist):
                mimo = link_sinr(cfg, waist * UM, "mimo")
                ideal = link_sinr(cfg, waist * UM, "ideal")
                self.assertEqual((81,), mimo.shape)
                self.assertTrue(np.all(mimo <= ideal))

    def test_monotone_in_waist(self) -> None:
        """Test the aggregate rate grows with the waist for every array size."""
        waists = np.arange(10, 101, 5) * UM
        for n_side in (4, 9, 16, 25):
            with self.subTest(n_side=n_side):
                rates = aggregate_rate_sweep(calibrated(n_side), waists)
                self.assertTrue(np.all(np.diff(rates) >= 0))

    def test_sweep(self) -> None:
        """Test the sweep matches single evaluations."""
        cfg = calibrated(n_side=4)
        rates = aggregate_rate_sweep(cfg, [20 * UM, 60 * UM], mode="ideal")
        self.assertEqual(aggregate_rate(cfg, 60 * UM, "ideal"), rates[1])

    def test_gap(self) -> None:
        """Test the ideal-to-MIMO gap closes as the waist grows."""
        cfg = calibrated()
        waists = np.arange(30, 101, 5) * UM
        ideal = aggregate_rate_sweep(cfg, waists, "ideal")
        mimo = aggregate_rate_sweep(cfg, waists, "mimo")
        relative = (ideal - mimo) / ideal
        self.assertTrue(np.all(np.diff(relative) <= 0))
        self.assertAlmostEqual(0.016, relative[-1], delta=0.005)
        self.assertLess(relative[-1], 0.05)
        absolute = (ideal - mimo)[waists >= 55 * UM]
        self.assertTrue(np.all(np.diff(absolute) <= 0))

    def test_channel_count(self) -> None:
        """Test more channels carry more data once the link is noise-limited."""
        for waist in (80, 100):
            with self.subTest(waist=waist):
                rates = [aggregate_rate(calibrated(n_side), waist * UM) for n_side in (4, 9, 16, 25)]
                self.assertEqual(rates, sorted(rates))


class TestThresholds(unittest.TestCase):
    """Tests for the smallest waist reaching 1 Tb/s."""

    def test_thresholds(self) -> None:
        """Test the thresholds of the calibrated arrays."""
        thresholds = {}
        for n_side, expected in [(9, 79.1), (16, 57.75), (25, 47.8)]:
            with self.subTest(n_side=n_side):
                threshold = min_waist_for_target(calibrated(n_side), TBPS)
                self.assertIsNotNone(threshold)
                self.assertAlmostEqual(expected * UM, threshold, delta=1.0 * UM)
                thresholds[n_side] = threshold
        self.assertGreater(thresholds[9], thresholds[16])
        self.assertGreater(thresholds[16], thresholds[25])

    def test_threshold_reaches_target(self) -> None:
        """Test the returned waist reaches the target and 0.5 μm less does not."""
        cfg = calibrated()
        threshold = min_waist_for_target(cfg, TBPS)
        self.assertGreaterEqual(aggregate_rate(cfg, threshold), TBPS)
        self.assertLess(aggregate_rate(cfg, threshold - 0.5 * UM), TBPS)

    def test_infeasible(self) -> None:
        """Test a 4 by 4 array cannot reach 1 Tb/s."""
        self.assertIsNone(min_waist_for_target(calibrated(4), TBPS))

    def test_trivial_target(self) -> None:
        """Test a zero target is met at the lower end of the domain."""
        self.assertAlmostEqual(10 * UM, min_waist_for_target(calibrated(4), 0.0), delta=1e-12)


class TestRegimes(unittest.TestCase):
    """Tests for the crosstalk- and noise-limited regimes."""

    def test_boundary(self) -> None:
        """Test the calibrated link turns noise-limited in the upper half of the domain."""
        cfg = calibrated()
        boundary = regime_boundary(cfg)
        self.assertAlmostEqual(82.6 * UM, boundary, delta=1.0 * UM)
        self.assertGreaterEqual(boundary, 60 * UM)
        self.assertAlmostEqual(1.0, interference_to_noise(cfg, boundary), places=3)

    def test_ratio_decreasing(self) -> None:
        """Test the interference-to-noise ratio falls beyond its peak."""
        cfg = calibrated()
        ratios = [interference_to_noise(cfg, waist * UM) for waist in np.linspace(40, 100, 20)]
        self.assertTrue(np.all(np.diff(ratios) < 0))

    def test_always_noise_limited(self) -> None:
        """Test widely spaced photodiodes never see crosstalk."""
        with self.assertRaises(BoundaryOutsideDomainError) as e:
            regime_boundary(calibrated(n_side=4, rx_pitch=1.0))
        self.assertEqual("noise-limited", e.exception.regime)

    def test_always_crosstalk_limited(self) -> None:
        """Test the quiet default receiver is crosstalk-limited over the whole domain."""
        cfg = MimoBackhaulConfig(n_side=4)
        with self.assertRaises(BoundaryOutsideDomainError) as e:
            regime_boundary(cfg)
        self.assertEqual("crosstalk-limited", e.exception.regime)
        self.assertIn("crosstalk-limited throughout", str(e.exception))
