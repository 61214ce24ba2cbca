"""Class 1 eye-safety limits for continuous-wave infrared lasers.

The accessible emission limit (AEL) is the power allowed through the measurement
aperture at the most hazardous viewing position. A diverging beam overfills the
aperture, so the source itself may emit more than the AEL:
``max_transmit_power = ael / pupil_coupling``.

Only the long-exposure, point-source branch of the limits is modelled.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .beam import GaussianBeam, encircled_power

__all__ = [
    # Types
    "SafetyStandardParams",
    "SafetyAssessment",
    # Coefficients
    "coefficient_c4",
    "coefficient_c7",
    "class1_ael_cw",
    # Geometry
    "measurement_aperture",
    "pupil_coupling",
    "most_hazardous_position",
    # Solver
    "max_transmit_power",
    "max_transmit_power_curve",
    # Exceptions
    "WavelengthDomainError",
    "UnsupportedRegimeError",
]

logger = logging.getLogger(__name__)

#: Base of the retinal thermal AEL for 700-1400 nm, in W
AEL_BASE_W = 3.9e-4
#: AEL above 1400 nm, where the retina is shielded, in W
AEL_FAR_INFRARED_W = 1.0e-2
#: Shortest exposure handled by the CW long-exposure branch, in s
MIN_LONG_EXPOSURE_S = 100.0
#: Upper edge of the retinal hazard band, in nm
RETINAL_BAND_END_NM = 1400.0


class WavelengthDomainError(ValueError):
    """Raised when a wavelength falls outside the domain of a limit or coefficient."""

    def __init__(self, wavelength_nm: float, domain: tuple[float, float], quantity: str):
        """Initialize the error.

        :param wavelength_nm: The offending wavelength in nm
        :param domain: The closed interval of valid wavelengths in nm
        :param quantity: What was being evaluated
        """
        self.wavelength_nm = wavelength_nm
        self.domain = domain
        self.quantity = quantity

    def __str__(self) -> str:
        low, high = self.domain
        return f"{self.quantity} is defined for {low:g}-{high:g} nm, got {self.wavelength_nm:g} nm"


class UnsupportedRegimeError(ValueError):
    """Raised for exposures outside the continuous-wave long-exposure branch."""

    def __init__(self, exposure_s: float):
        """Initialize the error.

        :param exposure_s: The requested exposure duration in seconds
        """
        self.exposure_s = exposure_s

    def __str__(self) -> str:
        return (
            f"exposure of {self.exposure_s:g} s is shorter than {MIN_LONG_EXPOSURE_S:g} s;"
            " only long-exposure CW limits are supported"
        )


def _check_domain(wavelength_nm: float, domain: tuple[float, float], quantity: str) -> None:
    low, high = domain
    if not low <= wavelength_nm <= high:
        raise WavelengthDomainError(wavelength_nm, domain, quantity)


def coefficient_c4(wavelength_nm: float) -> float:
    """Return the C4 correction factor for 700-1400 nm.

    >>> coefficient_c4(700)
    1.0
    >>> coefficient_c4(1200)
    5.0
    """
    _check_domain(wavelength_nm, (700.0, RETINAL_BAND_END_NM), "C4")
    if wavelength_nm <= 1050:
        return 10.0 ** (0.002 * (wavelength_nm - 700.0))
    return 5.0


def coefficient_c7(wavelength_nm: float) -> float:
    """Return the C7 correction factor for 700-1400 nm.

    >>> coefficient_c7(1000)
    1.0
    >>> coefficient_c7(1300)
    8.0
    """
    _check_domain(wavelength_nm, (700.0, RETINAL_BAND_END_NM), "C7")
    if wavelength_nm <= 1150:
        return 1.0
    if wavelength_nm <= 1200:
        return 10.0 ** (0.018 * (wavelength_nm - 1150.0))
    return 8.0


def class1_ael_cw(wavelength_nm: float, exposure_s: float) -> float:
    """Return the Class 1 accessible emission limit in W for a long CW exposure.

    :param wavelength_nm: Wavelength in nm, in 700-1600
    :param exposure_s: Exposure duration in seconds, at least 100
    :returns: The AEL in W
    :raises UnsupportedRegimeError: For exposures shorter than 100 s
    :raises WavelengthDomainError: Outside 700-1600 nm
    """
    if exposure_s < MIN_LONG_EXPOSURE_S:
        raise UnsupportedRegimeError(exposure_s)
    _check_domain(wavelength_nm, (700.0, 1600.0), "the Class 1 AEL")
    if wavelength_nm <= RETINAL_BAND_END_NM:
        return AEL_BASE_W * coefficient_c4(wavelength_nm) * coefficient_c7(wavelength_nm)
    return AEL_FAR_INFRARED_W


@dataclass(frozen=True)
class SafetyStandardParams:
    """Measurement conditions for the Class 1 assessment."""

    #: Diameter of the pupil aperture used in the retinal hazard band, in m
    pupil_diameter: float = 7e-3
    #: Closest viewing distance from the source, in m
    measurement_distance: float = 0.1
    #: Exposure duration in s
    exposure_duration: float = 30000.0
    #: Wavelengths accepted by the solver, in nm
    wavelength_domain: tuple[float, float] = (700.0, 1600.0)
    #: Diameter of the limiting aperture above 1400 nm, in m
    far_infrared_aperture: float = 3.5e-3
    #: Length of the most-hazardous-position search beyond the closest distance, in m
    search_span: float = 2.0

    def __post_init__(self) -> None:
        if not self.pupil_diameter > 0 or not self.far_infrared_aperture > 0:
            raise ValueError("aperture diameters must be positive")
        if self.measurement_distance < 0:
            raise ValueError(f"measurement distance must be non-negative, got {self.measurement_distance}")
        if not self.exposure_duration > 0:
            raise ValueError(f"exposure duration must be positive, got {self.exposure_duration}")
        if not self.search_span > 0:
            raise ValueError(f"search span must be positive, got {self.search_span}")
        low, high = self.wavelength_domain
        if not 0 < low < high:
            raise ValueError(f"invalid wavelength domain {self.wavelength_domain}")


@dataclass(frozen=True)
class SafetyAssessment:
    """The outcome of a Class 1 assessment for one beam."""

    #: Accessible emission limit in W
    ael: float
    #: Distance of the most hazardous position from the source, in m
    mhp_distance: float
    #: Fraction of the beam power passing the measurement aperture at that distance
    pupil_coupling_eta: float
    #: The largest eye-safe source power in W
    max_transmit_power: float

    def __post_init__(self) -> None:
        if not 0 < self.pupil_coupling_eta <= 1:
            raise ValueError(f"pupil coupling must lie in (0, 1], got {self.pupil_coupling_eta}")
        if not math.isclose(self.max_transmit_power * self.pupil_coupling_eta, self.ael, rel_tol=1e-12):
            raise ValueError("max transmit power must equal the AEL divided by the pupil coupling")


def measurement_aperture(wavelength_nm: float, params: SafetyStandardParams) -> float:
    """Return the diameter of the measurement aperture at a wavelength."""
    if wavelength_nm <= RETINAL_BAND_END_NM:
        return params.pupil_diameter
    return params.far_infrared_aperture


def pupil_coupling(beam: GaussianBeam, z: float, params: SafetyStandardParams) -> float:
    """Return the fraction of a beam's power passing the measurement aperture at distance ``z``."""
    diameter = measurement_aperture(beam.wavelength * 1e9, params)
    return float(encircled_power(beam.with_power(1.0), z, 0.5 * diameter))


def most_hazardous_position(beam: GaussianBeam, params: SafetyStandardParams) -> float:
    """Find the viewing distance where the most power passes the measurement aperture.

    The search is bounded to ``[measurement_distance, measurement_distance + search_span]``.
    A beam diverging from a waist at the source is most hazardous at the closest distance.

    :param beam: The beam, with its waist at the source
    :param params: Measurement conditions
    :returns: The distance from the source in m
    """
    z_min = params.measurement_distance
    result = minimize_scalar(
        lambda z: -pupil_coupling(beam, z, params),
        bounds=(z_min, z_min + params.search_span),
        method="bounded",
        options={"xatol": 1e-6},
    )
    z_best = float(result.x)
    if pupil_coupling(beam, z_min, params) >= pupil_coupling(beam, z_best, params):
        return z_min
    logger.debug("most hazardous position %.6g m lies beyond the closest distance", z_best)
    return z_best


def max_transmit_power(wavelength_nm: float, waist_radius: float, params: SafetyStandardParams) -> SafetyAssessment:
    """Return the largest eye-safe transmit power of a beam.

    :param wavelength_nm: Wavelength in nm
    :param waist_radius: Waist radius of the beam at the source, in m
    :param params: Measurement conditions
    :returns: The full assessment
    :raises WavelengthDomainError: Outside the configured wavelength domain
    :raises UnsupportedRegimeError: For exposures shorter than 100 s
    """
    _check_domain(wavelength_nm, params.wavelength_domain, "the eye-safety assessment")
    ael = class1_ael_cw(wavelength_nm, params.exposure_duration)
    beam = GaussianBeam(wavelength=wavelength_nm * 1e-9, waist_radius=waist_radius)
    z = most_hazardous_position(beam, params)
    eta = pupil_coupling(beam, z, params)
    return SafetyAssessment(ael=ael, mhp_distance=z, pupil_coupling_eta=eta, max_transmit_power=ael / eta)


def max_transmit_power_curve(
    wavelengths_nm: Iterable[float], waist_radius: float, params: SafetyStandardParams
) -> np.ndarray:
    """Evaluate the largest eye-safe transmit power in W over a wavelength sweep."""
    return np.array(
        [max_transmit_power(wavelength, waist_radius, params).max_transmit_power for wavelength in wavelengths_nm]
    )
