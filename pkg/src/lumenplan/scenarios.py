"""Runnable scenarios, one per command line subcommand.

Each scenario turns a validated :class:`lumenplan.config.RunConfig` into the
library's domain objects, runs the computation, and renders the result. The
output columns of each scenario are recorded as docdata on its class.

.. code-block:: python

    from lumenplan.config import default_config
    from lumenplan.scenarios import scenario_registry

    result = scenario_registry.make("materials", config=default_config("materials")).run()
    print(result.document.decode())
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Collection, Sequence
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from docdata import parse_docdata

from .backhaul import (
    BoundaryOutsideDomainError,
    MimoBackhaulConfig,
    aggregate_rate,
    min_waist_for_target,
    regime_boundary,
)
from .beam import GaussianBeam
from .config import RunConfig
from .coverage import RoomScenario, aggregate_ap_rate, build_access_point, coverage_map
from .detection import (
    MATERIALS,
    OfdmLinkParams,
    PhotodetectorModel,
    covers_wavelength,
    material_noise_rank,
)
from .registry import ClassRegistry
from .safety import SafetyStandardParams, max_transmit_power
from .writers import BINARY_FORMATS, csv_document, format_number, heatmap_registry

__all__ = [
    "Scenario",
    "ScenarioResult",
    "SafetyScenario",
    "BackhaulScenario",
    "CoverageScenario",
    "MaterialsScenario",
    "scenario_registry",
    "sweep_values",
]

logger = logging.getLogger(__name__)


def sweep_values(start: float, end: float, step: float) -> np.ndarray:
    """Return ``start, start + step, ...`` up to and including ``end`` when it lies on the grid.

    >>> sweep_values(700, 720, 10).tolist()
    [700.0, 710.0, 720.0]
    """
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    count = math.floor((end - start) / step + 1e-9) + 1
    return start + step * np.arange(max(count, 0), dtype=float)


@dataclass(frozen=True)
class ScenarioResult:
    """The rendered output of a scenario run."""

    #: The document written to the output path
    document: bytes
    #: Summary lines printed to standard output after the document
    summary: tuple[str, ...] = ()
    #: Whether the document is binary and must go to a file
    binary: bool = False


class Scenario(ABC):
    """A scenario that can be run from a configuration."""

    synonyms: ClassVar[Collection[str]] = ()

    def __init__(self, config: RunConfig) -> None:
        """Initialize the scenario.

        :param config: A validated configuration for this scenario
        """
        self.config = config

    @classmethod
    def columns(cls) -> Sequence[str]:
        """The CSV columns of this scenario."""
        return scenario_registry.docdata(cls, "columns")

    @abstractmethod
    def run(self) -> ScenarioResult:
        """Run the scenario and render its output."""

    def detector(self, active_area: float, wavelength_nm: float) -> PhotodetectorModel:
        """Build the configured photodetector, warning if it is blind at the operating wavelength."""
        pd = PhotodetectorModel.from_material(
            self.config["pd.material"],
            responsivity=self.config["pd.responsivity_a_per_w"],
            active_area=active_area,
            thermal_current_density=self.config["pd.thermal_pa_per_sqrthz"] * 1e-12,
            dark_current=self.config["pd.dark_current_na"] * 1e-9,
        )
        if not covers_wavelength(pd, wavelength_nm):
            logger.warning(
                "%s detector cuts off at %.0f nm, below the operating wavelength of %.0f nm",
                pd.material,
                pd.cutoff_nm,
                wavelength_nm,
            )
        return pd


@parse_docdata
class SafetyScenario(Scenario):
    """Sweep the largest eye-safe transmit power over wavelength for several beam waists.

    ---
    columns:
      - wavelength_nm
      - beam_waist_um
      - max_power_mw
    """

    synonyms = ("eye-safety",)

    def run(self) -> ScenarioResult:
        """Run the sweep, one block of rows per waist."""
        params = SafetyStandardParams(exposure_duration=self.config["safety.exposure_s"])
        wavelengths = sweep_values(
            self.config["safety.lambda_start_nm"],
            self.config["safety.lambda_end_nm"],
            self.config["safety.lambda_step_nm"],
        )
        rows = []
        for waist_um in self.config["safety.waists_um"]:
            for wavelength in wavelengths:
                assessment = max_transmit_power(float(wavelength), waist_um * 1e-6, params)
                rows.append((wavelength, waist_um, assessment.max_transmit_power * 1e3))
        logger.info("evaluated %d wavelengths for %d waists", wavelengths.size, len(self.config["safety.waists_um"]))
        return ScenarioResult(csv_document(self.columns(), rows))


@parse_docdata
class BackhaulScenario(Scenario):
    """Sweep the aggregate rate of MIMO backhaul links over the beam waist.

    ---
    columns:
      - waist_um
      - n_side
      - mode
      - aggregate_rate_gbps
    """

    synonyms = ("mimo",)

    def link(self, n_side: int) -> MimoBackhaulConfig:
        """Build the configured link for one array size."""
        half_side = self.config["backhaul.pd_half_side_mm"] * 1e-3
        power = self.config["backhaul.per_beam_power_mw"]
        return MimoBackhaulConfig(
            n_side=n_side,
            link_distance=self.config["backhaul.distance_m"],
            wavelength_nm=self.config["backhaul.lambda_nm"],
            rx_pitch=self.config["backhaul.rx_pitch_mm"] * 1e-3,
            pd_half_side=half_side,
            per_beam_power=power if power == "auto" else power * 1e-3,
            pd=self.detector((2 * half_side) ** 2, self.config["backhaul.lambda_nm"]),
            link=OfdmLinkParams.from_db(self.config["backhaul.bandwidth_ghz"] * 1e9, self.config["backhaul.gap_db"]),
        )

    @property
    def modes(self) -> tuple[str, ...]:
        """The crosstalk treatments to report."""
        mode = self.config["backhaul.mode"]
        return ("mimo", "ideal") if mode == "both" else (mode,)

    def run(self) -> ScenarioResult:
        """Run the sweep, one block of rows per array size."""
        waists = sweep_values(
            self.config["backhaul.waist_start_um"],
            self.config["backhaul.waist_end_um"],
            self.config["backhaul.waist_step_um"],
        )
        rows = []
        for n_side in self.config["backhaul.n_side"]:
            cfg = self.link(n_side)
            for waist_um in waists:
                for mode in self.modes:
                    rows.append((waist_um, n_side, mode, aggregate_rate(cfg, waist_um * 1e-6, mode) / 1e9))
            if logger.isEnabledFor(logging.INFO):
                self._summarize(cfg)
        return ScenarioResult(csv_document(self.columns(), rows))

    def _summarize(self, cfg: MimoBackhaulConfig) -> None:
        target = self.config["backhaul.target_tbps"] * 1e12
        threshold = min_waist_for_target(cfg, target)
        if threshold is None:
            logger.info("n_side=%d: %g Tb/s is out of reach", cfg.n_side, target / 1e12)
        else:
            logger.info("n_side=%d: %g Tb/s needs a waist of %.1f μm", cfg.n_side, target / 1e12, threshold * 1e6)
        try:
            boundary = regime_boundary(cfg)
        except BoundaryOutsideDomainError as e:
            logger.info("n_side=%d: %s", cfg.n_side, e)
        else:
            logger.info("n_side=%d: crosstalk-limited below %.1f μm", cfg.n_side, boundary * 1e6)


@parse_docdata
class CoverageScenario(Scenario):
    """Map the achievable rate over the floor of a room served by a ceiling access point.

    ---
    columns:
      - x_m
      - y_m
      - rate_gbps
      - serving_beam
    """

    synonyms = ("access", "room")

    def room(self) -> RoomScenario:
        """Build the configured room and receiver."""
        fov = self.config["coverage.fov_deg"]
        return RoomScenario(
            room=(self.config["coverage.room_x_m"], self.config["coverage.room_y_m"], self.config["coverage.room_z_m"]),
            receiver=self.detector(self.config["coverage.pd_area_cm2"] * 1e-4, self.config["coverage.lambda_nm"]),
            link=OfdmLinkParams.from_db(self.config["coverage.bandwidth_ghz"] * 1e9, self.config["coverage.gap_db"]),
            fov_half_angle=None if fov == "off" else math.radians(fov),
        )

    def run(self) -> ScenarioResult:
        """Compute the grid, the aggregate rate, and the coverage fraction."""
        scenario = self.room()
        beam = GaussianBeam(
            wavelength=self.config["coverage.lambda_nm"] * 1e-9,
            waist_radius=self.config["coverage.waist_um"] * 1e-6,
            power=self.config["coverage.power_mw"] * 1e-3,
            axis=(0.0, 0.0, -1.0),
        )
        ap = build_access_point(
            scenario,
            n_arrays=self.config["coverage.n_arrays"],
            beams_per_array=self.config["coverage.beams_per_array"],
            beam=beam,
            interferers=self.config["coverage.interferers"],
        )
        grid = coverage_map(scenario, ap, self.config["coverage.resolution"])
        threshold = self.config["coverage.threshold_gbps"]
        fraction = grid.coverage_fraction(threshold * 1e9, self.config["coverage.wall_margin_m"])
        aggregate = aggregate_ap_rate(scenario, ap)
        logger.info("mean rate %.4g Gb/s over %d cells", grid.mean_rate / 1e9, grid.rate.size)
        heatmap = self.config.heatmap_format
        return ScenarioResult(
            document=heatmap_registry.lookup(heatmap)(grid),
            summary=(
                f"aggregate_tbps={format_number(aggregate / 1e12)}",
                f"coverage_{format_number(threshold)}gbps_pct={format_number(100 * fraction)}",
            ),
            binary=heatmap in BINARY_FORMATS,
        )


@parse_docdata
class MaterialsScenario(Scenario):
    """Tabulate the built-in detector materials with their cutoff and noise rank.

    ---
    columns:
      - material
      - band_gap_ev
      - cutoff_nm
      - noise_rank
    """

    synonyms = ("detectors",)

    def run(self) -> ScenarioResult:
        """List the materials in table order; rank 1 is the quietest."""
        rule = self.config["materials.range_rule"]
        models = [PhotodetectorModel.from_material(material, rule=rule) for material in MATERIALS]
        rank = {pd.material: i for i, pd in enumerate(material_noise_rank(models), start=1)}
        rows = [(pd.material, pd.band_gap, pd.cutoff_nm, rank[pd.material]) for pd in models]
        return ScenarioResult(csv_document(self.columns(), rows))


scenario_registry: ClassRegistry[Scenario] = ClassRegistry.from_subclasses(
    Scenario, suffix="scenario", default=SafetyScenario
)
