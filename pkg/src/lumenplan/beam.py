"""Gaussian beam propagation and aperture coupling.

All lengths are in metres and all powers in watts. Functions that take
distances or radii accept scalars or :mod:`numpy` arrays and broadcast.
"""

from __future__ import annotations

import logging
import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass, replace
from typing import Union

import numpy as np
from scipy.integrate import IntegrationWarning, dblquad
from scipy.special import erf, erfc

__all__ = [
    # Types
    "GaussianBeam",
    "CircularAperture",
    "ArrayLike",
    # Propagation
    "rayleigh_range",
    "beam_radius",
    "divergence_half_angle",
    "intensity",
    "beam_frame_coordinates",
    # Coupling
    "encircled_power",
    "segment_fraction",
    "coupled_power_offset",
    "coupled_power_square",
    # Exceptions
    "QuadratureError",
]

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]
Vector = tuple[float, float, float]

#: Relative error the offset-disc quadrature must reach
QUADRATURE_RTOL = 1e-6
#: Absolute floor, as a fraction of the beam power, below which the quadrature error estimate is not checked
QUADRATURE_ATOL = 1e-14
_AXIS_TOLERANCE = 1e-12
_SQRT2 = math.sqrt(2.0)


class QuadratureError(ArithmeticError):
    """Raised when adaptive quadrature does not reach its error target."""

    def __init__(self, value: float, error: float, reason: str):
        """Initialize the error.

        :param value: The last estimate of the integral
        :param error: The absolute error estimate reported by the integrator
        :param reason: What went wrong
        """
        self.value = value
        self.error = error
        self.reason = reason

    def __str__(self) -> str:
        return f"quadrature failed ({self.reason}): estimate={self.value:.6g}, error={self.error:.3g}"


def _as_vector(values: Sequence[float]) -> Vector:
    if len(values) != 3:
        raise ValueError(f"expected a 3-vector, got {values!r}")
    x, y, z = (float(v) for v in values)
    return x, y, z


@dataclass(frozen=True)
class GaussianBeam:
    """A fundamental-mode Gaussian beam with its waist at ``origin``."""

    #: Wavelength in metres
    wavelength: float
    #: Radius of the beam waist in metres (the 1/e² intensity radius)
    waist_radius: float
    #: Optical power in watts
    power: float = 1.0
    #: Location of the waist
    origin: Vector = (0.0, 0.0, 0.0)
    #: Unit vector along the propagation direction
    axis: Vector = (0.0, 0.0, 1.0)

    def __post_init__(self) -> None:
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if not self.waist_radius > 0:
            raise ValueError(f"waist radius must be positive, got {self.waist_radius}")
        if not self.power >= 0:
            raise ValueError(f"power must be non-negative, got {self.power}")
        object.__setattr__(self, "origin", _as_vector(self.origin))
        object.__setattr__(self, "axis", _as_vector(self.axis))
        norm = math.sqrt(sum(c * c for c in self.axis))
        if abs(norm - 1.0) > _AXIS_TOLERANCE:
            raise ValueError(f"axis must be a unit vector, got norm {norm!r}")

    def steered(self, origin: Sequence[float], axis: Sequence[float]) -> GaussianBeam:
        """Return a copy of the beam moved to ``origin`` and pointed along ``axis``.

        The axis is normalized, so any non-zero direction is accepted. This is how an
        ideal steering lens is modelled: the waist and power are left untouched.

        :param origin: The new waist location
        :param axis: The new propagation direction (need not be normalized)
        :returns: A new beam
        :raises ValueError: If the axis is the zero vector
        """
        direction = np.asarray(axis, dtype=float)
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            raise ValueError("cannot steer a beam along the zero vector")
        return replace(self, origin=_as_vector(origin), axis=_as_vector(direction / norm))

    def with_power(self, power: float) -> GaussianBeam:
        """Return a copy of the beam carrying a different optical power."""
        return replace(self, power=power)


@dataclass(frozen=True)
class CircularAperture:
    """A circular aperture in the plane transverse to a beam."""

    #: Radius in metres
    radius: float
    #: Distance of the aperture centre from the beam axis
    lateral_offset: float = 0.0
    #: Distance from the waist along the beam axis
    axial_distance: float = 0.0

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError(f"aperture radius must be positive, got {self.radius}")
        if self.lateral_offset < 0:
            raise ValueError(f"lateral offset must be non-negative, got {self.lateral_offset}")
        if self.axial_distance < 0:
            raise ValueError(f"axial distance must be non-negative, got {self.axial_distance}")


def rayleigh_range(beam: GaussianBeam) -> float:
    """Return the Rayleigh range :math:`z_R = \\pi w_0^2 / \\lambda`."""
    return math.pi * beam.waist_radius**2 / beam.wavelength


def beam_radius(beam: GaussianBeam, z: ArrayLike) -> ArrayLike:
    """Return the 1/e² radius of the beam at an axial distance ``z`` from the waist."""
    return beam.waist_radius * np.sqrt(1.0 + (np.asarray(z) / rayleigh_range(beam)) ** 2)


def divergence_half_angle(beam: GaussianBeam) -> float:
    """Return the far-field divergence half angle in radians."""
    return beam.wavelength / (math.pi * beam.waist_radius)


def intensity(beam: GaussianBeam, r: ArrayLike, z: ArrayLike) -> ArrayLike:
    """Return the irradiance in W/m² at transverse radius ``r`` and axial distance ``z``."""
    w2 = np.asarray(beam_radius(beam, z)) ** 2
    return 2.0 * beam.power / (math.pi * w2) * np.exp(-2.0 * np.asarray(r) ** 2 / w2)


def beam_frame_coordinates(beam: GaussianBeam, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Express points in the frame of the beam.

    :param beam: The beam
    :param points: An array of shape ``(..., 3)`` of positions
    :returns: A pair of the signed axial distance from the waist and the
        squared transverse distance from the axis, both of shape ``(...)``
    """
    offsets = np.asarray(points, dtype=float) - np.asarray(beam.origin)
    axis = np.asarray(beam.axis)
    axial = offsets @ axis
    transverse = offsets - axial[..., np.newaxis] * axis
    return axial, np.einsum("...i,...i->...", transverse, transverse)


def encircled_power(beam: GaussianBeam, z: ArrayLike, a: ArrayLike) -> ArrayLike:
    """Return the power passing through a centred disc of radius ``a`` at distance ``z``."""
    w = beam_radius(beam, z)
    return beam.power * -np.expm1(-2.0 * np.asarray(a) ** 2 / np.asarray(w) ** 2)


def segment_fraction(lo: ArrayLike, hi: ArrayLike, w: ArrayLike) -> ArrayLike:
    """Return the fraction of a Gaussian beam's power between two transverse lines.

    The beam is centred on zero with 1/e² radius ``w``, so each transverse
    coordinate is normal with standard deviation ``w / 2``. Segments lying
    entirely on one side of the axis are evaluated with complementary error
    functions so that far-tail fractions keep their relative accuracy.

    :param lo: Lower edge(s) of the segment
    :param hi: Upper edge(s) of the segment, not below ``lo``
    :param w: Beam radius
    :returns: The captured fraction, in [0, 1]
    """
    u = _SQRT2 * np.asarray(lo, dtype=float) / w
    v = _SQRT2 * np.asarray(hi, dtype=float) / w
    with np.errstate(invalid="ignore"):
        right = 0.5 * (erfc(u) - erfc(v))
        left = 0.5 * (erfc(-v) - erfc(-u))
        middle = 0.5 * (erf(v) - erf(u))
    rv = np.where(u >= 0, right, np.where(v <= 0, left, middle))
    return np.clip(rv, 0.0, 1.0)


def coupled_power_square(
    beam: GaussianBeam,
    half_side: ArrayLike,
    offset_x: ArrayLike,
    offset_y: ArrayLike,
    z: ArrayLike,
) -> ArrayLike:
    """Return the power captured by an axis-aligned square aperture.

    The Gaussian profile separates over the two transverse axes, so the
    captured power is the product of two segment fractions.

    :param beam: The beam
    :param half_side: Half of the side length of the square
    :param offset_x: Offset of the square's centre from the beam axis along x
    :param offset_y: Offset of the square's centre from the beam axis along y
    :param z: Axial distance of the aperture plane from the waist
    :returns: Captured optical power in watts
    """
    w = beam_radius(beam, z)
    fx = segment_fraction(np.subtract(offset_x, half_side), np.add(offset_x, half_side), w)
    fy = segment_fraction(np.subtract(offset_y, half_side), np.add(offset_y, half_side), w)
    return beam.power * fx * fy


def coupled_power_offset(beam: GaussianBeam, aperture: CircularAperture) -> float:
    """Return the power captured by a circular aperture displaced from the beam axis.

    The integral runs in polar coordinates centred on the aperture, over half of
    the disc, and is doubled by the mirror symmetry about the line joining the
    aperture centre to the axis.

    :param beam: The beam
    :param aperture: The receiving aperture
    :returns: Captured optical power in watts
    :raises QuadratureError: If the integrator warns or its error estimate exceeds
        the relative tolerance
    """
    d = aperture.lateral_offset
    if d == 0.0:
        return float(encircled_power(beam, aperture.axial_distance, aperture.radius))
    # lengths in units of the local beam radius
    w = float(beam_radius(beam, aperture.axial_distance))
    offset = d / w
    radius = aperture.radius / w

    def _integrand(phi: float, u: float) -> float:
        r2 = offset * offset + u * u + 2.0 * offset * u * math.cos(phi)
        return 4.0 / math.pi * u * math.exp(-2.0 * r2)

    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            value, error = dblquad(_integrand, 0.0, radius, 0.0, math.pi, epsabs=QUADRATURE_ATOL, epsrel=1e-10)
        except IntegrationWarning as e:
            raise QuadratureError(float("nan"), float("nan"), str(e).splitlines()[0]) from e
    if error > QUADRATURE_RTOL * abs(value) + QUADRATURE_ATOL:
        raise QuadratureError(value, error, "relative error estimate above tolerance")
    logger.debug("offset coupling d/w=%g a/w=%g: %.12g (err %.2g)", offset, radius, value, error)
    return beam.power * min(max(value, 0.0), 1.0)
