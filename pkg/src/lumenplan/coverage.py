"""Room coverage of a ceiling access point built from arrays of steered VCSELs.

The access point holds ``n_arrays`` VCSEL arrays of ``beams_per_array`` lasers
each. Every laser is ideally steered to its own spot on the receiver plane; the
spots form a square, cell-centred grid over the floor and each array covers a
contiguous square block of it. A receiver is served by the beam that delivers
the most power and every other beam interferes.

Beam ``k`` belongs to array ``k // beams_per_array``. Arrays tile the floor in
row-major order, as do the beams inside each array's block.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Collection
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .beam import GaussianBeam, beam_frame_coordinates, intensity
from .detection import OfdmLinkParams, PhotodetectorModel, dco_ofdm_rate, sinr
from .registry import FunctionRegistry

__all__ = [
    # Types
    "RoomScenario",
    "ApArrayOfArrays",
    "CoverageGrid",
    # Interferer sets
    "interferers_registry",
    "all_interferers",
    "array_interferers",
    # Operations
    "build_access_point",
    "beam_targets",
    "steered_beam",
    "received_power_at",
    "point_rate",
    "coverage_map",
    "aggregate_ap_rate",
]

logger = logging.getLogger(__name__)

#: Number of receiver points evaluated per vectorized block
CHUNK_SIZE = 8192
RESOLUTION_LIMITS = (10, 2000)

InterfererRule = Callable[[np.ndarray, "ApArrayOfArrays"], np.ndarray]


def _default_receiver() -> PhotodetectorModel:
    return PhotodetectorModel.from_material("si", active_area=2e-4)


def _default_link() -> OfdmLinkParams:
    return OfdmLinkParams.from_db(bandwidth=5e9, gap_db=9.0)


def _default_beam() -> GaussianBeam:
    return GaussianBeam(wavelength=950e-9, waist_radius=5e-6, power=10e-3, axis=(0.0, 0.0, -1.0))


def _isqrt(n: int, what: str) -> int:
    root = math.isqrt(n)
    if root * root != n:
        raise ValueError(f"{what} must be a perfect square, got {n}")
    return root


@dataclass(frozen=True)
class RoomScenario:
    """A rectangular room with the access point on the ceiling and an upward-facing receiver."""

    #: Extents of the room along x, y and z in m
    room: tuple[float, float, float] = (5.0, 5.0, 3.0)
    #: Position of the access point, defaults to the centre of the ceiling
    ap_position: Optional[tuple[float, float, float]] = None
    #: Height of the receiver plane above the floor in m
    rx_plane_height: float = 0.0
    receiver: PhotodetectorModel = field(default_factory=_default_receiver)
    link: OfdmLinkParams = field(default_factory=_default_link)
    #: Receiver field of view as a half angle in rad, unlimited if None
    fov_half_angle: Optional[float] = None

    def __post_init__(self) -> None:
        x, y, z = self.room
        if min(x, y, z) <= 0:
            raise ValueError(f"room extents must be positive, got {self.room}")
        if self.ap_position is None:
            object.__setattr__(self, "ap_position", (0.5 * x, 0.5 * y, z))
        ax, ay, az = self.access_point
        if not (0 <= ax <= x and 0 <= ay <= y and math.isclose(az, z)):
            raise ValueError(f"access point {self.ap_position} must lie on the ceiling of the room")
        if not 0 <= self.rx_plane_height < z:
            raise ValueError(f"receiver plane height must lie in [0, {z}), got {self.rx_plane_height}")
        if self.fov_half_angle is not None and not 0 < self.fov_half_angle <= 0.5 * math.pi:
            raise ValueError(f"field of view half angle must lie in (0, π/2], got {self.fov_half_angle}")

    @property
    def access_point(self) -> tuple[float, float, float]:
        """The position of the access point."""
        assert self.ap_position is not None
        return self.ap_position

    @property
    def footprint(self) -> tuple[float, float]:
        """The floor extents along x and y in m."""
        return self.room[0], self.room[1]

    def lift(self, points: np.ndarray) -> np.ndarray:
        """Place floor points of shape ``(..., 2)`` on the receiver plane."""
        points = np.asarray(points, dtype=float)
        height = np.full(points.shape[:-1] + (1,), self.rx_plane_height)
        return np.concatenate([points, height], axis=-1)

    def contains(self, points: np.ndarray) -> bool:
        """Return whether all points of shape ``(..., 2)`` lie on the floor footprint."""
        points = np.asarray(points, dtype=float)
        x, y = self.footprint
        inside_x = (points[..., 0] >= 0) & (points[..., 0] <= x)
        return bool(np.all(inside_x & (points[..., 1] >= 0) & (points[..., 1] <= y)))


@dataclass(frozen=True, eq=False)
class ApArrayOfArrays:
    """An access point made of several VCSEL arrays, one steered beam per target."""

    n_arrays: int = 9
    beams_per_array: int = 25
    #: Template for every laser; only its wavelength, waist and power are used
    beam: GaussianBeam = field(default_factory=_default_beam)
    #: Spot centres on the receiver plane, of shape ``(n_arrays * beams_per_array, 2)``
    targets: Optional[np.ndarray] = None
    #: Which beams interfere with the serving one, see :data:`interferers_registry`
    interferers: str = "all"
    #: Indices of switched-off lasers
    disabled: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        _isqrt(self.n_arrays, "the number of arrays")
        _isqrt(self.beams_per_array, "the number of beams per array")
        if self.targets is not None:
            targets = np.asarray(self.targets, dtype=float)
            if targets.shape != (self.n_beams, 2):
                raise ValueError(f"expected {self.n_beams} targets, got an array of shape {targets.shape}")
            object.__setattr__(self, "targets", targets)
        interferers_registry.lookup(self.interferers)
        object.__setattr__(self, "disabled", frozenset(self.disabled))
        if any(not 0 <= k < self.n_beams for k in self.disabled):
            raise ValueError(f"disabled beams must be indices below {self.n_beams}")

    @property
    def n_beams(self) -> int:
        """The total number of lasers."""
        return self.n_arrays * self.beams_per_array

    @property
    def spot_targets(self) -> np.ndarray:
        """The spot centres."""
        if self.targets is None:
            raise ValueError("the access point has no targets; build it with build_access_point")
        return self.targets

    @property
    def active(self) -> np.ndarray:
        """A boolean mask of the lasers that are switched on."""
        mask = np.ones(self.n_beams, dtype=bool)
        mask[list(self.disabled)] = False
        return mask

    def without(self, k: int) -> ApArrayOfArrays:
        """Return a copy with laser ``k`` switched off."""
        return replace(self, disabled=self.disabled | {k})


def all_interferers(serving: np.ndarray, ap: ApArrayOfArrays) -> np.ndarray:
    """Every other beam interferes."""
    mask = np.ones((serving.size, ap.n_beams), dtype=bool)
    mask[np.arange(serving.size), serving] = False
    return mask


def array_interferers(serving: np.ndarray, ap: ApArrayOfArrays) -> np.ndarray:
    """Only the other beams of the serving beam's own array interfere."""
    array_of_beam = np.arange(ap.n_beams) // ap.beams_per_array
    mask = array_of_beam[np.newaxis, :] == (serving // ap.beams_per_array)[:, np.newaxis]
    mask[np.arange(serving.size), serving] = False
    return mask


interferers_registry: FunctionRegistry[InterfererRule] = FunctionRegistry(
    [all_interferers, array_interferers], default=all_interferers, suffix="interferers"
)


def beam_targets(scenario: RoomScenario, ap: ApArrayOfArrays) -> np.ndarray:
    """Lay out the spot centres of all beams on the receiver plane.

    :param scenario: The room
    :param ap: The access point; only its array counts are used
    :returns: An array of shape ``(n_beams, 2)`` of floor coordinates, indexed by beam
    :raises ValueError: If the beam counts are not perfect squares
    """
    arrays_side = _isqrt(ap.n_arrays, "the number of arrays")
    block_side = _isqrt(ap.beams_per_array, "the number of beams per array")
    side = arrays_side * block_side
    array_index, local_index = np.divmod(np.arange(ap.n_beams), ap.beams_per_array)
    array_row, array_col = np.divmod(array_index, arrays_side)
    local_row, local_col = np.divmod(local_index, block_side)
    row = array_row * block_side + local_row
    col = array_col * block_side + local_col
    x, y = scenario.footprint
    return np.column_stack([(col + 0.5) * x / side, (row + 0.5) * y / side])


def build_access_point(
    scenario: RoomScenario,
    n_arrays: int = 9,
    beams_per_array: int = 25,
    beam: Optional[GaussianBeam] = None,
    interferers: str = "all",
    disabled: Collection[int] = (),
) -> ApArrayOfArrays:
    """Build an access point whose beams tile the floor of a room.

    :param scenario: The room
    :param n_arrays: The number of VCSEL arrays, a perfect square
    :param beams_per_array: The number of lasers per array, a perfect square
    :param beam: The laser template, defaulting to 5 μm waist, 950 nm and 10 mW
    :param interferers: The interferer set, see :data:`interferers_registry`
    :param disabled: Indices of switched-off lasers
    :returns: The access point, with targets
    """
    layout = ApArrayOfArrays(
        n_arrays=n_arrays,
        beams_per_array=beams_per_array,
        beam=_default_beam() if beam is None else beam,
        interferers=interferers,
        disabled=frozenset(disabled),
    )
    return replace(layout, targets=beam_targets(scenario, layout))


def steered_beam(ap: ApArrayOfArrays, scenario: RoomScenario, k: int) -> GaussianBeam:
    """Return laser ``k`` leaving the access point towards its spot centre.

    A switched-off laser is returned with zero power.
    """
    if not 0 <= k < ap.n_beams:
        raise IndexError(f"beam {k} does not exist, the access point has {ap.n_beams}")
    origin = np.asarray(scenario.access_point)
    target = scenario.lift(ap.spot_targets[k])
    rv = ap.beam.steered(origin, target - origin)
    return rv if k not in ap.disabled else rv.with_power(0.0)


def _incidence_cosine(offsets: np.ndarray) -> np.ndarray:
    """Cosine between the ray from the access point and the upward receiver normal."""
    return -offsets[..., 2] / np.linalg.norm(offsets, axis=-1)


def received_power_at(point: np.ndarray, beam: GaussianBeam, scenario: RoomScenario) -> np.ndarray:
    """Return the power a beam delivers to the receiver at floor point(s) of shape ``(..., 2)``.

    The spot is much larger than the photodiode, so the irradiance is taken as
    constant over the detector and projected onto its surface.
    """
    positions = scenario.lift(point)
    axial, transverse2 = beam_frame_coordinates(beam, positions)
    cosine = _incidence_cosine(positions - np.asarray(beam.origin))
    power = intensity(beam, np.sqrt(transverse2), axial) * scenario.receiver.active_area * cosine
    return _apply_fov(scenario, cosine, power)


def _apply_fov(scenario: RoomScenario, cosine: np.ndarray, power: np.ndarray) -> np.ndarray:
    if scenario.fov_half_angle is None:
        return power
    return np.where(cosine >= math.cos(scenario.fov_half_angle), power, 0.0)


def _power_matrix(points: np.ndarray, scenario: RoomScenario, ap: ApArrayOfArrays) -> np.ndarray:
    """Return the power every beam delivers at every point, of shape ``(n_points, n_beams)``."""
    origin = np.asarray(scenario.access_point)
    targets = scenario.lift(ap.spot_targets)
    directions = targets - origin
    axes = directions / np.linalg.norm(directions, axis=-1, keepdims=True)
    offsets = scenario.lift(points) - origin
    axial = offsets @ axes.T
    distance2 = np.einsum("ij,ij->i", offsets, offsets)[:, np.newaxis]
    transverse2 = np.maximum(distance2 - axial**2, 0.0)
    cosine = _incidence_cosine(offsets)[:, np.newaxis]
    powers = np.where(ap.active, ap.beam.power, 0.0)
    rv = intensity(ap.beam.with_power(1.0), np.sqrt(transverse2), axial) * powers
    return _apply_fov(scenario, cosine, rv * scenario.receiver.active_area * cosine)


def _rates(
    points: np.ndarray,
    scenario: RoomScenario,
    ap: ApArrayOfArrays,
    serving: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Return the rate and serving beam at each of the points of shape ``(n, 2)``."""
    received = _power_matrix(points, scenario, ap)
    if serving is None:
        serving = np.argmax(received, axis=-1)
    rows = np.arange(received.shape[0])
    signal = received[rows, serving]
    mask = interferers_registry.lookup(ap.interferers)(serving, ap)
    interference = np.where(mask, received, 0.0)
    rate = dco_ofdm_rate(sinr(signal, interference, scenario.receiver, scenario.link.bandwidth), scenario.link)
    return rate, serving


def point_rate(
    point: tuple[float, float],
    scenario: RoomScenario,
    ap: ApArrayOfArrays,
    serving: Optional[int] = None,
) -> tuple[float, int]:
    """Return the achievable rate in bit/s at a floor point and the beam serving it.

    :param point: Floor coordinates in m
    :param scenario: The room
    :param ap: The access point
    :param serving: Force the serving beam instead of picking the strongest (lowest index on ties)
    :returns: A pair of the rate and the serving beam index
    :raises ValueError: If the point lies outside the room
    """
    points = np.asarray([point], dtype=float)
    if not scenario.contains(points):
        raise ValueError(f"point {point} lies outside the room footprint {scenario.footprint}")
    rate, beams = _rates(points, scenario, ap, None if serving is None else np.asarray([serving]))
    return float(rate[0]), int(beams[0])


@dataclass(frozen=True, eq=False)
class CoverageGrid:
    """Achievable rate over a square grid of cells spanning the floor.

    Row ``r`` and column ``c`` hold the cell centred on ``(x[c], y[r])``.
    """

    #: Cell centres along x in m
    x: np.ndarray
    #: Cell centres along y in m
    y: np.ndarray
    #: Rate per cell in bit/s, of shape ``(len(y), len(x))``
    rate: np.ndarray
    #: Index of the serving beam per cell
    serving_beam: np.ndarray
    #: Floor extents along x and y in m
    footprint: tuple[float, float]

    @property
    def resolution(self) -> int:
        """The number of cells per side."""
        return int(self.x.size)

    @property
    def mean_rate(self) -> float:
        """The area-weighted mean rate in bit/s."""
        return float(np.mean(self.rate))

    def interior(self, wall_margin: float) -> np.ndarray:
        """Return a mask of the cells farther than ``wall_margin`` from every wall."""
        width, depth = self.footprint
        in_x = (self.x > wall_margin) & (self.x < width - wall_margin)
        in_y = (self.y > wall_margin) & (self.y < depth - wall_margin)
        return in_y[:, np.newaxis] & in_x[np.newaxis, :]

    def coverage_fraction(self, threshold: float, wall_margin: float = 0.0) -> float:
        """Return the fraction of interior cells reaching a rate threshold in bit/s."""
        mask = self.interior(wall_margin)
        if not mask.any():
            raise ValueError(f"no cells lie farther than {wall_margin} m from the walls")
        return float(np.count_nonzero(self.rate[mask] >= threshold) / np.count_nonzero(mask))


def coverage_map(scenario: RoomScenario, ap: ApArrayOfArrays, resolution: int = 100) -> CoverageGrid:
    """Evaluate the rate at the centre of every cell of a square grid over the floor.

    :param scenario: The room
    :param ap: The access point
    :param resolution: Cells per side, in 10-2000
    :returns: The coverage grid
    :raises ValueError: If the resolution is out of range
    """
    low, high = RESOLUTION_LIMITS
    if not low <= resolution <= high:
        raise ValueError(f"resolution must lie in {low}..{high}, got {resolution}")
    width, depth = scenario.footprint
    x = (np.arange(resolution) + 0.5) * width / resolution
    y = (np.arange(resolution) + 0.5) * depth / resolution
    xx, yy = np.meshgrid(x, y)
    points = np.column_stack([xx.ravel(), yy.ravel()])
    rate = np.empty(points.shape[0])
    serving = np.empty(points.shape[0], dtype=int)
    for start in range(0, points.shape[0], CHUNK_SIZE):
        stop = start + CHUNK_SIZE
        rate[start:stop], serving[start:stop] = _rates(points[start:stop], scenario, ap)
    logger.debug("evaluated %d cells from %d beams", points.shape[0], ap.n_beams)
    return CoverageGrid(
        x=x,
        y=y,
        rate=rate.reshape(resolution, resolution),
        serving_beam=serving.reshape(resolution, resolution),
        footprint=(width, depth),
    )


def aggregate_ap_rate(scenario: RoomScenario, ap: ApArrayOfArrays) -> float:
    """Return the sum over switched-on beams of the rate each delivers at its own spot centre."""
    beams = np.flatnonzero(ap.active)
    if beams.size == 0:
        return 0.0
    rate, _ = _rates(ap.spot_targets[beams], scenario, ap, serving=beams)
    return float(np.sum(rate))
