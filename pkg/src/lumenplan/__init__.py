"""The :mod:`lumenplan` package plans eye-safe laser-based optical wireless links.

Getting Started
---------------
The largest power a single-mode VCSEL may emit while remaining Class 1 eye
safe depends on its wavelength and beam waist:

.. code-block:: python

    from lumenplan import SafetyStandardParams, max_transmit_power

    assessment = max_transmit_power(850.0, 10e-6, SafetyStandardParams())
    print(f"{assessment.max_transmit_power * 1e3:.3f} mW")

That power feeds the two system models:

1. :mod:`lumenplan.backhaul` sweeps the aggregate rate of a point-to-point
   link between an ``n_side`` by ``n_side`` VCSEL array and a matching
   photodiode array, with and without crosstalk.
2. :mod:`lumenplan.coverage` maps the rate over the floor of a room served by
   a ceiling access point built from arrays of steered VCSELs.

Pick a detector by name
-----------------------
Detector materials, band gap range rules, crosstalk treatments, interferer
sets, heatmap formats, and scenarios all live in registries. Pass a name, a
synonym, or the object itself:

.. code-block:: python

    from lumenplan import PhotodetectorModel

    pd = PhotodetectorModel.from_material("germanium", rule="lower", active_area=1e-6)

Each scenario is also a ``lumenplan`` subcommand driven by a flat
``key = value`` configuration file, see :mod:`lumenplan.config`.
"""

from .backhaul import (
    BoundaryOutsideDomainError,
    ChannelMatrix,
    MimoBackhaulConfig,
    aggregate_rate,
    aggregate_rate_sweep,
    channel_registry,
    gain_matrix,
    interference_to_noise,
    link_sinr,
    min_waist_for_target,
    regime_boundary,
)
from .beam import (
    CircularAperture,
    GaussianBeam,
    QuadratureError,
    beam_radius,
    coupled_power_offset,
    coupled_power_square,
    encircled_power,
    intensity,
)
from .config import ConfigError, RunConfig, default_config, load_config, parse_config
from .coverage import (
    ApArrayOfArrays,
    CoverageGrid,
    RoomScenario,
    aggregate_ap_rate,
    build_access_point,
    coverage_map,
    point_rate,
)
from .detection import (
    MATERIALS,
    OfdmLinkParams,
    PhotodetectorModel,
    dco_ofdm_rate,
    electrical_snr,
    material_noise_rank,
    material_registry,
    noise_variance,
    sinr,
)
from .registry import ClassRegistry, FunctionRegistry, Hint
from .safety import (
    SafetyAssessment,
    SafetyStandardParams,
    UnsupportedRegimeError,
    WavelengthDomainError,
    class1_ael_cw,
    max_transmit_power,
    max_transmit_power_curve,
)
from .scenarios import scenario_registry
from .version import VERSION

__all__ = [
    "VERSION",
    # Registries
    "Hint",
    "ClassRegistry",
    "FunctionRegistry",
    "channel_registry",
    "material_registry",
    "scenario_registry",
    # Beams
    "GaussianBeam",
    "CircularAperture",
    "beam_radius",
    "intensity",
    "encircled_power",
    "coupled_power_offset",
    "coupled_power_square",
    # Eye safety
    "SafetyStandardParams",
    "SafetyAssessment",
    "class1_ael_cw",
    "max_transmit_power",
    "max_transmit_power_curve",
    # Detection
    "MATERIALS",
    "PhotodetectorModel",
    "OfdmLinkParams",
    "material_noise_rank",
    "noise_variance",
    "electrical_snr",
    "sinr",
    "dco_ofdm_rate",
    # Backhaul
    "MimoBackhaulConfig",
    "ChannelMatrix",
    "gain_matrix",
    "link_sinr",
    "aggregate_rate",
    "aggregate_rate_sweep",
    "min_waist_for_target",
    "interference_to_noise",
    "regime_boundary",
    # Coverage
    "RoomScenario",
    "ApArrayOfArrays",
    "CoverageGrid",
    "build_access_point",
    "point_rate",
    "coverage_map",
    "aggregate_ap_rate",
    # Configuration
    "RunConfig",
    "parse_config",
    "load_config",
    "default_config",
    # Exceptions
    "QuadratureError",
    "WavelengthDomainError",
    "UnsupportedRegimeError",
    "BoundaryOutsideDomainError",
    "ConfigError",
]
