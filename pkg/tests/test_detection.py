"""Tests for detector materials, noise, and rates."""

import unittest

import numpy as np

from lumenplan.detection import (
    EV_NM,
    MATERIALS,
    OfdmLinkParams,
    PhotodetectorModel,
    covers_wavelength,
    cutoff_wavelength,
    dco_ofdm_rate,
    electrical_snr,
    material_noise_rank,
    noise_variance,
    sinr,
)

Q = 1.602176634e-19


class TestMaterials(unittest.TestCase):
    """Tests for the material table and ranking."""

    def test_cutoff(self) -> None:
        """Test cutoff wavelengths follow from the band gaps."""
        self.assertAlmostEqual(1239.84, EV_NM, places=2)
        silicon = PhotodetectorModel.from_material("si")
        self.assertAlmostEqual(1107.0, silicon.cutoff_nm, places=1)
        self.assertTrue(covers_wavelength(silicon, 950))
        self.assertTrue(covers_wavelength(silicon, 1107))
        self.assertFalse(covers_wavelength(silicon, 1310))
        self.assertTrue(covers_wavelength(PhotodetectorModel.from_material("germanium"), 1550))
        np.testing.assert_allclose(EV_NM / np.array([1.0, 2.0]), cutoff_wavelength(np.array([1.0, 2.0])))

    def test_material_overrides(self) -> None:
        """Test a detector can be built from a material with a measured band gap range."""
        pd = PhotodetectorModel.from_material(
            "InGaAs", rule="upper", material_kwargs={"band_gap_low": 0.75, "band_gap_high": 0.75}, active_area=1e-6
        )
        self.assertEqual("InGaAs", pd.material)
        self.assertEqual(0.75, pd.band_gap)
        self.assertAlmostEqual(EV_NM / 0.75, pd.cutoff_nm, places=9)
        self.assertEqual(1.43, PhotodetectorModel.from_material("InGaAs", rule="upper").band_gap)
        with self.assertRaises(ValueError):
            PhotodetectorModel.from_material("si", material_kwargs={"band_gap_low": 2.0})

    def test_midpoint_rank(self) -> None:
        """Test the noise ranking with band gap ranges collapsed to their centres."""
        ranked = material_noise_rank(PhotodetectorModel.from_material(m) for m in MATERIALS)
        self.assertEqual(["GaN", "GaAlAs", "GaAs", "Si", "InGaAs", "Ge"], [pd.material for pd in ranked])
        np.testing.assert_allclose([3.4, 1.79, 1.43, 1.12, 0.895, 0.67], [pd.band_gap for pd in ranked])

    def test_lower_rank(self) -> None:
        """Test the ranking with the narrowest gap of each range."""
        ranked = material_noise_rank(PhotodetectorModel.from_material(m, rule="lower") for m in MATERIALS)
        self.assertEqual(["GaN", "GaAs", "GaAlAs", "Si", "Ge", "InGaAs"], [pd.material for pd in ranked])

    def test_rank_ties(self) -> None:
        """Test equal band gaps keep their input order."""
        a = PhotodetectorModel(material="a", band_gap=1.0)
        b = PhotodetectorModel(material="b", band_gap=1.0)
        self.assertEqual([a, b], material_noise_rank([a, b]))
        self.assertEqual([b, a], material_noise_rank([b, a]))
        with self.assertRaises(ValueError):
            material_noise_rank([])

    def test_detector_validation(self) -> None:
        """Test invalid detectors are refused."""
        for kwargs in [
            {"band_gap": 0.0},
            {"band_gap": 1.1, "responsivity": 0.0},
            {"band_gap": 1.1, "responsivity": 1.6},
            {"band_gap": 1.1, "active_area": 0.0},
            {"band_gap": 1.1, "dark_current": -1e-9},
        ]:
            with self.subTest(kwargs=kwargs), self.assertRaises(ValueError):
                PhotodetectorModel(material="x", **kwargs)
        with self.assertRaises(KeyError):
            PhotodetectorModel.from_material("unobtainium")


class TestNoise(unittest.TestCase):
    """Tests for the receiver noise model."""

    def setUp(self) -> None:
        """Set up a detector with dark current."""
        self.pd = PhotodetectorModel(
            material="Si",
            band_gap=1.12,
            responsivity=0.5,
            thermal_current_density=10e-12,
            dark_current=1e-9,
        )

    def test_noise_variance(self) -> None:
        """Test shot, dark, and thermal noise add."""
        expected = 2 * Q * (0.5 * 1e-5 + 1e-9) * 1e9 + (10e-12) ** 2 * 1e9
        self.assertAlmostEqual(1.0, noise_variance(1e-5, self.pd, 1e9) / expected, places=12)

    def test_reference_receiver(self) -> None:
        """Test the default silicon receiver at the nadir of the room."""
        pd = PhotodetectorModel.from_material("si", active_area=2e-4)
        self.assertAlmostEqual(5.372e-13, noise_variance(3.8678e-5, pd, 5e9), delta=0.001e-13)

    def test_snr(self) -> None:
        """Test the SNR and that the SINR reduces to it without interferers."""
        snr = electrical_snr(1e-5, self.pd, 1e9)
        self.assertAlmostEqual(1.0, snr * noise_variance(1e-5, self.pd, 1e9) / (0.5e-5) ** 2, places=12)
        self.assertAlmostEqual(snr, sinr(1e-5, [], self.pd, 1e9), places=12)
        self.assertAlmostEqual(snr, sinr(1e-5, [0.0, 0.0], self.pd, 1e9), places=9)

    def test_sinr(self) -> None:
        """Test interferers add squared photocurrents and shot noise."""
        value = sinr(1e-5, [2e-6, 1e-6], self.pd, 1e9)
        noise = noise_variance(1.3e-5, self.pd, 1e9)
        interference = (0.5 * 2e-6) ** 2 + (0.5 * 1e-6) ** 2
        self.assertAlmostEqual(1.0, value * (noise + interference) / (0.5e-5) ** 2, places=12)

    def test_sinr_broadcasts(self) -> None:
        """Test interferers run along the last axis."""
        signal = np.array([1e-5, 2e-5])
        others = np.array([[1e-6, 0.0], [0.0, 1e-6]])
        values = sinr(signal, others, self.pd, 1e9)
        self.assertEqual((2,), values.shape)
        self.assertAlmostEqual(values[0], sinr(1e-5, [1e-6], self.pd, 1e9), places=9)


class TestRate(unittest.TestCase):
    """Tests for the DCO-OFDM rate."""

    def test_rate(self) -> None:
        """Test the rate at known SINRs."""
        self.assertAlmostEqual(25e9, dco_ofdm_rate(1023.0, OfdmLinkParams(bandwidth=5e9)), delta=1e-3)
        self.assertAlmostEqual(17.47e9, dco_ofdm_rate(1000.0, OfdmLinkParams.from_db(5e9, 9.0)), delta=0.01e9)
        self.assertEqual(0.0, dco_ofdm_rate(0.0, OfdmLinkParams(bandwidth=5e9)))
        np.testing.assert_allclose([0.0, 2.5e9], dco_ofdm_rate(np.array([0.0, 1.0]), OfdmLinkParams(bandwidth=5e9)))

    def test_link_params(self) -> None:
        """Test the SNR gap conversion and validation."""
        self.assertAlmostEqual(9.0, OfdmLinkParams.from_db(5e9, 9.0).gap_db, places=12)
        self.assertEqual(1.0, OfdmLinkParams.from_db(5e9, 0.0).gap)
        with self.assertRaises(ValueError):
            OfdmLinkParams(bandwidth=0.0)
        with self.assertRaises(ValueError):
            OfdmLinkParams(bandwidth=5e9, gap=0.5)
