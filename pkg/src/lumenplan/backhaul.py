"""Point-to-point MIMO backhaul between a VCSEL array and a photodiode array.

Beam ``j`` leaves transmitter ``j`` parallel to the link axis and is aimed at
photodiode ``j``. Every photodiode also catches the tails of the other beams,
which is the crosstalk that limits narrow-waist (widely diverging) links.
Arrays are square, ``n_side`` by ``n_side``, and indexed in row-major order.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.optimize import brentq

from .beam import GaussianBeam, beam_radius, segment_fraction
from .detection import OfdmLinkParams, PhotodetectorModel, dco_ofdm_rate, noise_variance, sinr
from .registry import FunctionRegistry, Hint
from .safety import SafetyStandardParams, max_transmit_power

__all__ = [
    # Types
    "MimoBackhaulConfig",
    "ChannelMatrix",
    # Channel modes
    "channel_registry",
    "mimo_channel",
    "ideal_channel",
    # Operations
    "gain_matrix",
    "beam_power",
    "link_sinr",
    "aggregate_rate",
    "aggregate_rate_sweep",
    "min_waist_for_target",
    "interference_to_noise",
    "regime_boundary",
    # Exceptions
    "BoundaryOutsideDomainError",
]

logger = logging.getLogger(__name__)

#: Waist radii accepted by the gain matrix, in m
WAIST_LIMITS = (1e-6, 500e-6)
#: The waist sweep domain of the threshold and regime solvers, in m
WAIST_DOMAIN = (10e-6, 100e-6)
#: Bisection tolerance of :func:`min_waist_for_target`, in m
WAIST_TOLERANCE = 0.5e-6
#: Grid step of the regime scan, in m
REGIME_SCAN_STEP = 1e-6

ChannelTransform = Callable[[np.ndarray], np.ndarray]


def _default_detector() -> PhotodetectorModel:
    return PhotodetectorModel.from_material("si", active_area=25e-6)


def _default_link() -> OfdmLinkParams:
    return OfdmLinkParams.from_db(bandwidth=5e9, gap_db=9.0)


class BoundaryOutsideDomainError(ValueError):
    """Raised when one regime holds over the whole waist domain."""

    def __init__(self, regime: str, domain: tuple[float, float]):
        """Initialize the error.

        :param regime: The regime that holds everywhere, ``noise-limited`` or ``crosstalk-limited``
        :param domain: The searched waist interval in m
        """
        self.regime = regime
        self.domain = domain

    def __str__(self) -> str:
        low, high = self.domain
        return f"no regime boundary between {low * 1e6:g} and {high * 1e6:g} μm: the link is {self.regime} throughout"


@dataclass(frozen=True)
class MimoBackhaulConfig:
    """Geometry and receiver of an ``n_side`` by ``n_side`` backhaul link."""

    n_side: int = 16
    #: Distance between the arrays in m
    link_distance: float = 2.0
    wavelength_nm: float = 850.0
    #: Receiver pitch in m
    rx_pitch: float = 10e-3
    #: Half of the side of each square photodiode in m
    pd_half_side: float = 2.5e-3
    #: Transmitter pitch in m, defaults to the receiver pitch
    tx_pitch: Optional[float] = None
    #: Optical power per beam in W, or ``"auto"`` for the eye-safe maximum
    per_beam_power: Union[float, str] = "auto"
    pd: PhotodetectorModel = field(default_factory=_default_detector)
    link: OfdmLinkParams = field(default_factory=_default_link)
    safety: SafetyStandardParams = field(default_factory=SafetyStandardParams)

    def __post_init__(self) -> None:
        if not 2 <= self.n_side <= 32:
            raise ValueError(f"n_side must lie in 2..32, got {self.n_side}")
        if not self.link_distance > 0:
            raise ValueError(f"link distance must be positive, got {self.link_distance}")
        if not self.rx_pitch > 0 or not self.transmitter_pitch > 0:
            raise ValueError("array pitches must be positive")
        if not 0 < self.pd_half_side <= self.rx_pitch / 2:
            raise ValueError(f"photodiodes of half side {self.pd_half_side} overlap at pitch {self.rx_pitch}")
        if isinstance(self.per_beam_power, str):
            if self.per_beam_power != "auto":
                raise ValueError(f"per-beam power must be a number or 'auto', got {self.per_beam_power!r}")
        elif self.per_beam_power < 0:
            raise ValueError(f"per-beam power must be non-negative, got {self.per_beam_power}")

    @property
    def transmitter_pitch(self) -> float:
        """The transmitter pitch in m."""
        return self.rx_pitch if self.tx_pitch is None else self.tx_pitch

    @property
    def n_channels(self) -> int:
        """The number of beams, which equals the number of photodiodes."""
        return self.n_side**2


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """Fractions of each beam's power captured by each photodiode.

    ``gains[i, j]`` is the fraction of beam ``j`` landing on photodiode ``i``.
    """

    gains: np.ndarray

    def __post_init__(self) -> None:
        if self.gains.ndim != 2 or self.gains.shape[0] != self.gains.shape[1]:
            raise ValueError(f"gain matrix must be square, got shape {self.gains.shape}")
        if self.gains.min() < 0 or self.gains.max() > 1:
            raise ValueError("gains must lie in [0, 1]")
        if np.any(self.gains.sum(axis=0) > 1 + 1e-12):
            raise ValueError("a beam cannot deliver more than its power")

    @property
    def diagonal(self) -> np.ndarray:
        """The direct-channel gains."""
        return np.diag(self.gains)


def mimo_channel(gains: np.ndarray) -> np.ndarray:
    """Keep all crosstalk."""
    return gains


def ideal_channel(gains: np.ndarray) -> np.ndarray:
    """Zero the crosstalk, leaving parallel independent links."""
    return np.diag(np.diag(gains))


#: How to treat crosstalk, either ``mimo`` or ``ideal``
channel_registry: FunctionRegistry[ChannelTransform] = FunctionRegistry(
    [mimo_channel, ideal_channel], default=mimo_channel, suffix="channel"
)


def _positions(n_side: int, pitch: float) -> np.ndarray:
    return (np.arange(n_side) - 0.5 * (n_side - 1)) * pitch


def gain_matrix(cfg: MimoBackhaulConfig, waist_radius: float) -> ChannelMatrix:
    """Compute the beam-to-photodiode gain matrix for a waist radius.

    The square photodiodes are axis-aligned, so each gain factors into
    horizontal and vertical segment fractions and the full matrix is the
    Kronecker product of the one-dimensional one with itself.

    :param cfg: The link
    :param waist_radius: Waist radius of every beam in m
    :returns: The gain matrix
    :raises ValueError: If the waist lies outside 1-500 μm
    """
    low, high = WAIST_LIMITS
    if not low <= waist_radius <= high:
        raise ValueError(f"waist radius must lie in {low * 1e6:g}-{high * 1e6:g} μm, got {waist_radius * 1e6:g} μm")
    beam = GaussianBeam(wavelength=cfg.wavelength_nm * 1e-9, waist_radius=waist_radius)
    w = beam_radius(beam, cfg.link_distance)
    offsets = _positions(cfg.n_side, cfg.rx_pitch)[:, np.newaxis] - _positions(cfg.n_side, cfg.transmitter_pitch)
    g1d = segment_fraction(offsets - cfg.pd_half_side, offsets + cfg.pd_half_side, w)
    return ChannelMatrix(np.kron(g1d, g1d))


def beam_power(cfg: MimoBackhaulConfig, waist_radius: float) -> float:
    """Return the optical power of each beam in W, resolving ``"auto"`` to the eye-safe maximum."""
    if isinstance(cfg.per_beam_power, str):
        return max_transmit_power(cfg.wavelength_nm, waist_radius, cfg.safety).max_transmit_power
    return float(cfg.per_beam_power)


def link_sinr(cfg: MimoBackhaulConfig, waist_radius: float, mode: Hint[ChannelTransform] = None) -> np.ndarray:
    """Return the SINR of every photodiode.

    :param cfg: The link
    :param waist_radius: Waist radius of every beam in m
    :param mode: ``mimo`` (default) or ``ideal``, see :data:`channel_registry`
    :returns: A vector of length ``n_side ** 2``
    """
    gains = channel_registry.lookup(mode)(gain_matrix(cfg, waist_radius).gains)
    received = beam_power(cfg, waist_radius) * gains
    signal = np.diag(received)
    interferers = received - np.diag(signal)
    return sinr(signal, interferers, cfg.pd, cfg.link.bandwidth)


def aggregate_rate(cfg: MimoBackhaulConfig, waist_radius: float, mode: Hint[ChannelTransform] = None) -> float:
    """Return the sum of the achievable rates of all channels in bit/s."""
    return float(np.sum(dco_ofdm_rate(link_sinr(cfg, waist_radius, mode), cfg.link)))


def aggregate_rate_sweep(
    cfg: MimoBackhaulConfig, waist_radii: Iterable[float], mode: Hint[ChannelTransform] = None
) -> np.ndarray:
    """Evaluate :func:`aggregate_rate` over a sweep of waist radii."""
    return np.array([aggregate_rate(cfg, w0, mode) for w0 in waist_radii])


def min_waist_for_target(cfg: MimoBackhaulConfig, target: float) -> Optional[float]:
    """Find the smallest waist radius whose MIMO aggregate rate reaches a target.

    The aggregate rate increases with the waist, so the threshold is found by
    bisection on 10-100 μm to within 0.5 μm.

    :param cfg: The link
    :param target: The aggregate rate to reach, in bit/s
    :returns: The waist radius in m, or None if even 100 μm falls short
    """
    low, high = WAIST_DOMAIN
    if target <= 0 or aggregate_rate(cfg, low) >= target:
        return low
    if aggregate_rate(cfg, high) < target:
        logger.info("n_side=%d cannot reach %.4g Gb/s below %g μm", cfg.n_side, 1e-9 * target, 1e6 * high)
        return None
    while high - low > WAIST_TOLERANCE:
        middle = 0.5 * (low + high)
        if aggregate_rate(cfg, middle) >= target:
            high = middle
        else:
            low = middle
    return high


def interference_to_noise(cfg: MimoBackhaulConfig, waist_radius: float) -> float:
    """Return the largest ratio of crosstalk power to noise variance over all photodiodes."""
    received = beam_power(cfg, waist_radius) * gain_matrix(cfg, waist_radius).gains
    currents = cfg.pd.responsivity * (received - np.diag(np.diag(received)))
    interference = (currents**2).sum(axis=-1)
    noise = noise_variance(received.sum(axis=-1), cfg.pd, cfg.link.bandwidth)
    return float(np.max(interference / noise))


def regime_boundary(cfg: MimoBackhaulConfig) -> float:
    """Find the waist radius above which the worst photodiode is noise-limited.

    The interference-to-noise ratio is scanned on a 1 μm grid over 10-100 μm and
    the last downward crossing of one is refined with Brent's method.

    :param cfg: The link
    :returns: The boundary waist radius in m
    :raises BoundaryOutsideDomainError: If the link is in one regime over the whole domain
    """
    low, high = WAIST_DOMAIN
    waists = np.linspace(low, high, int(round((high - low) / REGIME_SCAN_STEP)) + 1)
    excess = np.array([interference_to_noise(cfg, w0) - 1.0 for w0 in waists])
    if excess[-1] >= 0:
        raise BoundaryOutsideDomainError("crosstalk-limited", WAIST_DOMAIN)
    crosstalk_limited = np.flatnonzero(excess >= 0)
    if crosstalk_limited.size == 0:
        raise BoundaryOutsideDomainError("noise-limited", WAIST_DOMAIN)
    k = int(crosstalk_limited[-1])
    return float(
        brentq(lambda w0: interference_to_noise(cfg, w0) - 1.0, waists[k], waists[k + 1], xtol=1e-10, rtol=1e-12)
    )
