"""Photodetector materials, receiver noise, and achievable rates.

The built-in material table lists the semiconductors commonly used for
photodetectors together with their band gaps. A wider band gap means less
thermal pair generation and therefore a quieter detector, so ranking
materials by noise is ranking them by descending band gap.

.. code-block:: python

    from lumenplan.detection import PhotodetectorModel, OfdmLinkParams, electrical_snr, dco_ofdm_rate

    pd = PhotodetectorModel.from_material("silicon", active_area=2e-4)
    link = OfdmLinkParams.from_db(bandwidth=5e9, gap_db=9.0)
    rate = dco_ofdm_rate(electrical_snr(38.7e-6, pd, link.bandwidth), link)
"""

from __future__ import annotations

import logging
import math
from collections.abc import Collection, Iterable, Sequence
from dataclasses import dataclass, replace
from typing import Any, Callable, Optional

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import e as ELEMENTARY_CHARGE
from scipy.constants import h as PLANCK

from .beam import ArrayLike
from .registry import BaseRegistry, FunctionRegistry, Hint, OptionalKwargs

__all__ = [
    # Materials
    "Material",
    "MaterialRegistry",
    "MATERIALS",
    "material_registry",
    "range_rule_registry",
    "midpoint_gap",
    "lower_gap",
    "upper_gap",
    # Types
    "PhotodetectorModel",
    "OfdmLinkParams",
    # Operations
    "cutoff_wavelength",
    "covers_wavelength",
    "material_noise_rank",
    "noise_variance",
    "electrical_snr",
    "sinr",
    "dco_ofdm_rate",
]

logger = logging.getLogger(__name__)

#: Photon energy times wavelength, in eV·nm
EV_NM = PLANCK * SPEED_OF_LIGHT / ELEMENTARY_CHARGE * 1e9

RangeRule = Callable[[float, float], float]


@dataclass(frozen=True)
class Material:
    """A detector semiconductor and its band gap range in eV."""

    name: str
    band_gap_low: float
    band_gap_high: float
    synonyms: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not 0 < self.band_gap_low <= self.band_gap_high:
            raise ValueError(f"invalid band gap range for {self.name}: {self.band_gap_low}-{self.band_gap_high}")

    def band_gap(self, rule: Hint[RangeRule] = None) -> float:
        """Collapse the band gap range to a single value.

        :param rule: A range rule, or the name of one in :data:`range_rule_registry`
        :returns: The band gap in eV
        """
        return range_rule_registry.lookup(rule)(self.band_gap_low, self.band_gap_high)


def midpoint_gap(low: float, high: float) -> float:
    """Use the centre of the band gap range."""
    return 0.5 * (low + high)


def lower_gap(low: float, high: float) -> float:
    """Use the narrowest band gap of the range."""
    return low


def upper_gap(low: float, high: float) -> float:
    """Use the widest band gap of the range."""
    return high


range_rule_registry: FunctionRegistry[RangeRule] = FunctionRegistry(
    [midpoint_gap, lower_gap, upper_gap], default=midpoint_gap, suffix="gap"
)


class MaterialRegistry(BaseRegistry[Material, Material]):
    """A registry of detector materials, keyed by chemical name and common name."""

    def extract_name(self, element: Material) -> str:
        """Get the name for a material."""
        return element.name

    def extract_synonyms(self, element: Material) -> Collection[str]:
        """Get the common names of a material."""
        return element.synonyms

    def lookup(self, query: Hint[Material], default: Optional[Material] = None) -> Material:
        """Lookup a material by name."""
        if query is None:
            return self._default(default)
        elif isinstance(query, str):
            return self._lookup_string(query)
        elif isinstance(query, Material):
            return query
        raise TypeError(f"Invalid material: {type(query)} - {query}")

    def make(self, query: Hint[Material], pos_kwargs: OptionalKwargs = None, **kwargs: Any) -> Material:
        """Lookup a material, optionally overriding some of its fields."""
        material = self.lookup(query)
        if pos_kwargs or kwargs:
            return replace(material, **(pos_kwargs or {}), **kwargs)
        return material


#: Common photodetector semiconductors, ordered by descending band gap
MATERIALS: tuple[Material, ...] = (
    Material("GaN", 3.4, 3.4, ("gallium nitride",)),
    Material("GaAlAs", 1.42, 2.16, ("aluminium gallium arsenide", "AlGaAs")),
    Material("GaAs", 1.43, 1.43, ("gallium arsenide",)),
    Material("Si", 1.12, 1.12, ("silicon",)),
    Material("Ge", 0.67, 0.67, ("germanium",)),
    Material("InGaAs", 0.36, 1.43, ("indium gallium arsenide",)),
)

material_registry = MaterialRegistry(MATERIALS, default=MATERIALS[3])


def cutoff_wavelength(band_gap: ArrayLike) -> ArrayLike:
    """Return the longest detectable wavelength in nm for a band gap in eV."""
    return np.divide(EV_NM, band_gap)


@dataclass(frozen=True)
class PhotodetectorModel:
    """A photodiode operated at a fixed wavelength."""

    #: The name of the semiconductor
    material: str
    #: Band gap in eV
    band_gap: float
    #: Photocurrent per unit optical power at the operating wavelength, in A/W
    responsivity: float = 0.6
    #: Effective collection area in m²
    active_area: float = 1e-6
    #: Input-referred thermal noise current density in A/√Hz
    thermal_current_density: float = 10e-12
    #: Dark current in A
    dark_current: float = 0.0

    def __post_init__(self) -> None:
        if not self.band_gap > 0:
            raise ValueError(f"band gap must be positive, got {self.band_gap}")
        if not 0 < self.responsivity <= 1.5:
            raise ValueError(f"responsivity must lie in (0, 1.5] A/W, got {self.responsivity}")
        if not self.active_area > 0:
            raise ValueError(f"active area must be positive, got {self.active_area}")
        if self.thermal_current_density < 0 or self.dark_current < 0:
            raise ValueError("noise densities and dark current must be non-negative")

    @classmethod
    def from_material(
        cls,
        material: Hint[Material],
        *,
        rule: Hint[RangeRule] = None,
        material_kwargs: OptionalKwargs = None,
        **kwargs: Any,
    ) -> PhotodetectorModel:
        """Build a detector from the material table.

        :param material: A material or its name in :data:`material_registry`
        :param rule: How to collapse a band gap range, see :data:`range_rule_registry`
        :param material_kwargs: Fields of the material to override, such as a measured band gap range
        :param kwargs: Remaining fields of the detector
        :returns: A detector
        """
        m = material_registry.make(material, material_kwargs)
        return cls(material=m.name, band_gap=m.band_gap(rule), **kwargs)

    @property
    def cutoff_nm(self) -> float:
        """The cutoff wavelength of the detector in nm."""
        return float(cutoff_wavelength(self.band_gap))


def covers_wavelength(pd: PhotodetectorModel, wavelength_nm: float) -> bool:
    """Return whether the detector responds at a wavelength given in nm."""
    return wavelength_nm <= pd.cutoff_nm


def material_noise_rank(materials: Iterable[PhotodetectorModel]) -> list[PhotodetectorModel]:
    """Order detectors from the lowest noise to the highest, i.e. by descending band gap.

    :param materials: The detectors to rank
    :returns: A new list, quietest first. Ties keep their input order.
    :raises ValueError: If no detectors are given
    """
    rv = sorted(materials, key=lambda pd: -pd.band_gap)
    if not rv:
        raise ValueError("cannot rank an empty list of detectors")
    return rv


@dataclass(frozen=True)
class OfdmLinkParams:
    """Bandwidth and SNR gap of a DCO-OFDM link."""

    #: Modulation bandwidth in Hz
    bandwidth: float
    #: Linear SNR gap to capacity
    gap: float = 1.0

    def __post_init__(self) -> None:
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        if not self.gap >= 1:
            raise ValueError(f"SNR gap must be at least 1 (0 dB), got {self.gap}")

    @classmethod
    def from_db(cls, bandwidth: float, gap_db: float) -> OfdmLinkParams:
        """Build link parameters with the SNR gap given in dB."""
        return cls(bandwidth=bandwidth, gap=10.0 ** (gap_db / 10.0))

    @property
    def gap_db(self) -> float:
        """The SNR gap in dB."""
        return 10.0 * math.log10(self.gap)


def noise_variance(p_rx: ArrayLike, pd: PhotodetectorModel, bandwidth: float) -> ArrayLike:
    """Return the photocurrent noise variance in A².

    :param p_rx: Total optical power incident on the detector in W
    :param pd: The detector
    :param bandwidth: Electrical bandwidth in Hz
    :returns: Shot noise on the photocurrent and dark current plus thermal noise
    """
    shot = 2.0 * ELEMENTARY_CHARGE * (np.multiply(pd.responsivity, p_rx) + pd.dark_current) * bandwidth
    return shot + pd.thermal_current_density**2 * bandwidth


def electrical_snr(p_rx: ArrayLike, pd: PhotodetectorModel, bandwidth: float) -> ArrayLike:
    """Return the electrical signal-to-noise ratio for a received optical power."""
    return np.multiply(pd.responsivity, p_rx) ** 2 / noise_variance(p_rx, pd, bandwidth)


def sinr(
    p_sig: ArrayLike,
    p_interferers: Sequence[float] | np.ndarray,
    pd: PhotodetectorModel,
    bandwidth: float,
) -> ArrayLike:
    """Return the electrical signal-to-interference-plus-noise ratio.

    Interfering beams add electrical power; all incident light contributes shot noise.

    :param p_sig: Optical power of the wanted beam in W
    :param p_interferers: Optical powers of the interfering beams in W, along the last axis
    :param pd: The detector
    :param bandwidth: Electrical bandwidth in Hz
    :returns: The SINR, with the shape of ``p_sig``
    """
    signal = np.asarray(p_sig, dtype=float)
    others = np.asarray(p_interferers, dtype=float)
    if others.size == 0:
        return electrical_snr(signal, pd, bandwidth)
    total = signal + others.sum(axis=-1)
    interference = ((pd.responsivity * others) ** 2).sum(axis=-1)
    return (pd.responsivity * signal) ** 2 / (noise_variance(total, pd, bandwidth) + interference)


def dco_ofdm_rate(sinr: ArrayLike, link: OfdmLinkParams) -> ArrayLike:
    """Return the achievable DCO-OFDM rate in bit/s.

    Hermitian symmetry halves the usable bandwidth.
    """
    return 0.5 * link.bandwidth * np.log2(1.0 + np.divide(sinr, link.gap))
