"""Flat ``key = value`` run configuration.

A configuration file names the scenario to run and overrides any of the
documented keys; everything else takes its default. Lines starting with ``#``
and trailing ``#`` comments are ignored.

.. code-block:: ini

    scenario = backhaul
    backhaul.n_side = 9,16   # two array sizes in one run
    pd.thermal_pa_per_sqrthz = 80

Every key, with its type, default, and valid range, is listed in :data:`CONFIG_KEYS`.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Any, Callable, Optional, Union

from .coverage import interferers_registry
from .detection import material_registry, range_rule_registry
from .writers import heatmap_registry

__all__ = [
    "ConfigKey",
    "CONFIG_KEYS",
    "SCENARIO_NAMES",
    "RunConfig",
    "ConfigError",
    "parse_config",
    "load_config",
    "default_config",
    "format_config",
    "format_defaults",
    "CALIBRATED_BACKHAUL_PATH",
]

logger = logging.getLogger(__name__)

HERE = Path(__file__).parent.resolve()
#: The frozen calibration of the backhaul scenario
CALIBRATED_BACKHAUL_PATH = HERE.joinpath("data", "backhaul_calibrated.cfg")

SCENARIO_NAMES = ("safety", "backhaul", "coverage", "materials")
_SAFETY = ("safety",)
_BACKHAUL = ("backhaul",)
_COVERAGE = ("coverage",)
_DETECTOR = ("backhaul", "coverage")
_MATERIAL_CHOICES = tuple(material_registry.lookup_dict)

Value = Union[int, float, str, tuple]


class ConfigError(ValueError):
    """Raised for an unknown, missing, malformed, or out-of-range configuration value."""

    def __init__(self, key: Optional[str], line: Optional[int], reason: str):
        """Initialize the error.

        :param key: The offending key, if one could be identified
        :param line: The 1-based line number in the configuration text, if any
        :param reason: What is wrong
        """
        self.key = key
        self.line = line
        self.reason = reason

    def __str__(self) -> str:
        parts = []
        if self.line is not None:
            parts.append(f"line {self.line}")
        if self.key is not None:
            parts.append(self.key)
        parts.append(self.reason)
        return ": ".join(parts)


def _format_number(value: float) -> str:
    if isinstance(value, int):
        return str(value)
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def _is_square(value: int) -> Optional[str]:
    return None if math.isqrt(value) ** 2 == value else "must be a perfect square"


@dataclass(frozen=True)
class ConfigKey:
    """A documented configuration key."""

    name: str
    #: One of ``int``, ``float``, ``ints``, ``floats``, ``choice``, ``text``
    kind: str
    default: Value
    help: str
    #: Scenarios that read the key
    scenarios: tuple[str, ...] = SCENARIO_NAMES
    low: Optional[float] = None
    high: Optional[float] = None
    #: Whether ``low`` itself is excluded
    open_low: bool = False
    choices: tuple[str, ...] = ()
    #: A word accepted in place of a number, such as ``auto`` or ``off``
    keyword: Optional[str] = None
    check: Optional[Callable[[Any], Optional[str]]] = None

    def parse(self, text: str) -> Value:
        """Parse and validate a value.

        :param text: The raw value
        :returns: The typed value; lists become tuples
        :raises ValueError: If the value is malformed or out of range
        """
        text = text.strip()
        if not text:
            raise ValueError("empty value")
        if self.keyword is not None and text.lower() == self.keyword:
            return self.keyword
        if self.kind == "text":
            return text
        if self.kind == "choice":
            key = text.lower()
            if key not in self.choices:
                raise ValueError(f"invalid choice {text!r}, expected one of {', '.join(self.choices)}")
            return key
        if self.kind in {"ints", "floats"}:
            items = [item.strip() for item in text.split(",")]
            if not all(items):
                raise ValueError(f"malformed list {text!r}")
            return tuple(self._number(item, self.kind[:-1]) for item in items)
        return self._number(text, self.kind)

    def _number(self, text: str, kind: str) -> Union[int, float]:
        try:
            value: Union[int, float] = int(text) if kind == "int" else float(text)
        except ValueError:
            raise ValueError(f"expected {'an integer' if kind == 'int' else 'a number'}, got {text!r}") from None
        if not math.isfinite(value):
            raise ValueError(f"expected a finite number, got {text!r}")
        if self.low is not None and (value < self.low or (self.open_low and value == self.low)):
            relation = "above" if self.open_low else "at least"
            raise ValueError(f"value {text} out of range, must be {relation} {_format_number(self.low)}")
        if self.high is not None and value > self.high:
            raise ValueError(f"value {text} out of range, must be at most {_format_number(self.high)}")
        if self.check is not None:
            problem = self.check(value)
            if problem:
                raise ValueError(f"value {text} {problem}")
        return value

    def format(self, value: Value) -> str:
        """Render a value so that :meth:`parse` reads it back unchanged."""
        if isinstance(value, tuple):
            return ",".join(_format_number(item) for item in value)
        if isinstance(value, str):
            return value
        return _format_number(value)


def _key(name: str, kind: str, default: Value, help: str, *args: Any, **kwargs: Any) -> tuple[str, ConfigKey]:
    return name, ConfigKey(name, kind, default, help, *args, **kwargs)


_POSITIVE: dict[str, Any] = {"low": 0.0, "open_low": True}
_NON_NEGATIVE: dict[str, Any] = {"low": 0.0}

#: Every configuration key, in the order they are printed
CONFIG_KEYS: Mapping[str, ConfigKey] = MappingProxyType(
    dict(
        [
            _key("scenario", "choice", "safety", "Scenario to run", choices=SCENARIO_NAMES),
            _key("output_path", "text", "-", "Output file, - for standard output"),
            _key(
                "heatmap_format",
                "choice",
                "csv",
                "Coverage grid format",
                scenarios=_COVERAGE,
                choices=tuple(sorted(heatmap_registry.lookup_dict)),
            ),
            # eye safety
            _key("safety.lambda_start_nm", "float", 700.0, "First wavelength (nm)", _SAFETY, 700.0, 1600.0),
            _key("safety.lambda_end_nm", "float", 1600.0, "Last wavelength (nm)", _SAFETY, 700.0, 1600.0),
            _key("safety.lambda_step_nm", "float", 10.0, "Wavelength step (nm)", _SAFETY, 0.0, 900.0, True),
            _key("safety.waists_um", "floats", (10.0, 50.0, 100.0), "Beam waist radii (μm)", _SAFETY, 0.0, 1e4, True),
            _key("safety.exposure_s", "float", 30000.0, "Exposure duration (s)", _SAFETY, **_POSITIVE),
            # backhaul
            _key("backhaul.n_side", "ints", (16,), "Array sides, n_side x n_side beams", _BACKHAUL, 2, 32),
            _key("backhaul.waist_start_um", "float", 10.0, "First waist radius (μm)", _BACKHAUL, 1.0, 500.0),
            _key("backhaul.waist_end_um", "float", 100.0, "Last waist radius (μm)", _BACKHAUL, 1.0, 500.0),
            _key("backhaul.waist_step_um", "float", 1.0, "Waist radius step (μm)", _BACKHAUL, 0.0, 499.0, True),
            _key("backhaul.distance_m", "float", 2.0, "Link distance (m)", _BACKHAUL, **_POSITIVE),
            _key("backhaul.lambda_nm", "float", 850.0, "Wavelength (nm)", _BACKHAUL, 700.0, 1600.0),
            _key("backhaul.mode", "choice", "both", "Crosstalk handling", _BACKHAUL, choices=("mimo", "ideal", "both")),
            _key("backhaul.rx_pitch_mm", "float", 10.0, "Photodiode pitch (mm)", _BACKHAUL, **_POSITIVE),
            _key("backhaul.pd_half_side_mm", "float", 2.5, "Photodiode half side (mm)", _BACKHAUL, **_POSITIVE),
            _key("backhaul.bandwidth_ghz", "float", 5.0, "Modulation bandwidth (GHz)", _BACKHAUL, **_POSITIVE),
            _key("backhaul.gap_db", "float", 9.0, "SNR gap (dB)", _BACKHAUL, **_NON_NEGATIVE),
            _key(
                "backhaul.per_beam_power_mw",
                "float",
                "auto",
                "Power per beam (mW), auto for the eye-safe maximum",
                _BACKHAUL,
                keyword="auto",
                **_NON_NEGATIVE,
            ),
            _key("backhaul.target_tbps", "float", 1.0, "Aggregate rate target (Tb/s)", _BACKHAUL, **_POSITIVE),
            # coverage
            _key("coverage.resolution", "int", 100, "Grid cells per side", _COVERAGE, 10, 2000),
            _key("coverage.room_x_m", "float", 5.0, "Room width (m)", _COVERAGE, **_POSITIVE),
            _key("coverage.room_y_m", "float", 5.0, "Room depth (m)", _COVERAGE, **_POSITIVE),
            _key("coverage.room_z_m", "float", 3.0, "Room height (m)", _COVERAGE, **_POSITIVE),
            _key("coverage.waist_um", "float", 5.0, "Beam waist radius (μm)", _COVERAGE, **_POSITIVE),
            _key("coverage.lambda_nm", "float", 950.0, "Wavelength (nm)", _COVERAGE, **_POSITIVE),
            _key("coverage.power_mw", "float", 10.0, "Power per VCSEL (mW)", _COVERAGE, **_NON_NEGATIVE),
            _key("coverage.bandwidth_ghz", "float", 5.0, "Modulation bandwidth (GHz)", _COVERAGE, **_POSITIVE),
            _key("coverage.gap_db", "float", 9.0, "SNR gap (dB)", _COVERAGE, **_NON_NEGATIVE),
            _key("coverage.pd_area_cm2", "float", 2.0, "Photodiode area (cm²)", _COVERAGE, **_POSITIVE),
            _key("coverage.wall_margin_m", "float", 0.25, "Wall margin for coverage (m)", _COVERAGE, **_NON_NEGATIVE),
            _key("coverage.threshold_gbps", "float", 10.0, "Rate threshold (Gb/s)", _COVERAGE, **_NON_NEGATIVE),
            _key(
                "coverage.fov_deg",
                "float",
                "off",
                "Receiver field of view half angle (deg), off for unlimited",
                _COVERAGE,
                0.0,
                90.0,
                True,
                keyword="off",
            ),
            _key(
                "coverage.interferers",
                "choice",
                "all",
                "Beams counted as interferers",
                _COVERAGE,
                choices=tuple(sorted(interferers_registry.lookup_dict)),
            ),
            _key("coverage.n_arrays", "int", 9, "VCSEL arrays", _COVERAGE, 1, 10000, check=_is_square),
            _key("coverage.beams_per_array", "int", 25, "VCSELs per array", _COVERAGE, 1, 10000, check=_is_square),
            # photodetector
            _key("pd.material", "choice", "si", "Detector material", _DETECTOR, choices=_MATERIAL_CHOICES),
            _key("pd.responsivity_a_per_w", "float", 0.6, "Responsivity (A/W)", _DETECTOR, 0.0, 1.5, True),
            _key("pd.thermal_pa_per_sqrthz", "float", 10.0, "Thermal noise (pA/√Hz)", _DETECTOR, **_NON_NEGATIVE),
            _key("pd.dark_current_na", "float", 0.0, "Dark current (nA)", _DETECTOR, **_NON_NEGATIVE),
            # materials
            _key(
                "materials.range_rule",
                "choice",
                "midpoint",
                "How to rank band gap ranges",
                ("materials",),
                choices=tuple(range_rule_registry.lookup_dict),
            ),
        ]
    )
)


@dataclass(frozen=True)
class RunConfig:
    """A validated run configuration with every key resolved."""

    scenario: str
    values: Mapping[str, Value] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RunConfig):
            return NotImplemented
        return self.scenario == other.scenario and dict(self.values) == dict(other.values)

    def __hash__(self) -> int:
        return hash((self.scenario, tuple(sorted(self.values.items()))))

    @property
    def output_path(self) -> str:
        """The output file, ``-`` for standard output."""
        return str(self.values["output_path"])

    @property
    def heatmap_format(self) -> str:
        """The name of the coverage grid format."""
        return str(self.values["heatmap_format"])

    def updated(self, overrides: Mapping[str, Value]) -> RunConfig:
        """Return a copy with some values replaced, revalidating ranges and cross-key constraints.

        :param overrides: Typed values keyed by configuration key
        :returns: A new configuration
        :raises ConfigError: If a key is unknown or a value is invalid
        """
        values = dict(self.values)
        for key, value in overrides.items():
            if key not in CONFIG_KEYS:
                raise ConfigError(key, None, "unknown key")
            values[key] = _reparse(CONFIG_KEYS[key], value)
        return _finish(self.scenario, values)


def _reparse(entry: ConfigKey, value: Value) -> Value:
    try:
        return entry.parse(entry.format(value))
    except ValueError as e:
        raise ConfigError(entry.name, None, str(e)) from None


def _keys_for(scenario: str) -> Iterable[ConfigKey]:
    return (entry for entry in CONFIG_KEYS.values() if scenario in entry.scenarios)


def _check_order(values: Mapping[str, Value], first: str, last: str) -> None:
    if values[first] > values[last]:  # type:ignore[operator]
        raise ConfigError(first, None, f"must not exceed {last}")


def _finish(scenario: str, values: dict[str, Value]) -> RunConfig:
    """Fill defaults and apply the constraints spanning several keys."""
    for entry in _keys_for(scenario):
        values.setdefault(entry.name, entry.default)
    values["scenario"] = scenario
    if scenario == "safety":
        _check_order(values, "safety.lambda_start_nm", "safety.lambda_end_nm")
    elif scenario == "backhaul":
        _check_order(values, "backhaul.waist_start_um", "backhaul.waist_end_um")
        if values["backhaul.pd_half_side_mm"] > values["backhaul.rx_pitch_mm"] / 2:  # type:ignore[operator]
            raise ConfigError("backhaul.pd_half_side_mm", None, "photodiodes overlap, must not exceed half the pitch")
    elif scenario == "coverage":
        if 2 * values["coverage.wall_margin_m"] >= min(  # type:ignore[operator]
            values["coverage.room_x_m"], values["coverage.room_y_m"]  # type:ignore[type-var]
        ):
            raise ConfigError("coverage.wall_margin_m", None, "leaves no interior cells")
    return RunConfig(scenario=scenario, values=values)


def parse_config(text: str, *, scenario: Optional[str] = None) -> RunConfig:
    """Parse and validate a configuration document.

    :param text: The configuration text
    :param scenario: The scenario the caller is about to run. If given, the document's
        ``scenario`` key must agree with it.
    :returns: The validated configuration with defaults filled in
    :raises ConfigError: On an unknown, duplicated, missing, malformed, or out-of-range key
    """
    values: dict[str, Value] = {}
    lines: dict[str, int] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(None, number, f"expected 'key = value', got {raw.strip()!r}")
        if key not in CONFIG_KEYS:
            raise ConfigError(key, number, "unknown key")
        if key in values:
            raise ConfigError(key, number, f"duplicate key, first set on line {lines[key]}")
        try:
            values[key] = CONFIG_KEYS[key].parse(value)
        except ValueError as e:
            raise ConfigError(key, number, str(e)) from None
        lines[key] = number

    if "scenario" not in values:
        raise ConfigError("scenario", None, "missing required key")
    name = str(values["scenario"])
    if scenario is not None and name != scenario:
        raise ConfigError("scenario", lines["scenario"], f"configuration is for {name}, not {scenario}")
    for key, number in lines.items():
        if name not in CONFIG_KEYS[key].scenarios:
            raise ConfigError(key, number, f"not used by the {name} scenario")
    logger.debug("parsed %d keys for the %s scenario", len(values), name)
    return _finish(name, values)


def load_config(path: Union[str, Path], *, scenario: Optional[str] = None) -> RunConfig:
    """Read and parse a UTF-8 configuration file.

    :param path: The file
    :param scenario: See :func:`parse_config`
    :returns: The validated configuration
    :raises ConfigError: If the file cannot be decoded or is invalid
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ConfigError(None, None, f"{path} is not valid UTF-8: {e.reason}") from None
    return parse_config(text, scenario=scenario)


def default_config(scenario: str) -> RunConfig:
    """Return the all-defaults configuration of a scenario."""
    if scenario not in SCENARIO_NAMES:
        raise ConfigError("scenario", None, f"invalid choice {scenario!r}")
    return _finish(scenario, {})


def format_config(config: RunConfig, *, comments: bool = False) -> str:
    """Render a configuration as a document that :func:`parse_config` reads back unchanged.

    :param config: The configuration
    :param comments: Whether to precede each key with its help text
    :returns: The document, ending in a newline
    """
    lines = []
    for entry in _keys_for(config.scenario):
        if comments:
            lines.append(f"# {entry.help}")
        lines.append(f"{entry.name} = {entry.format(config[entry.name])}")
    return "\n".join(lines) + "\n"


def format_defaults(scenario: str) -> str:
    """Render every key of a scenario with its default and help text."""
    return format_config(default_config(scenario), comments=True)
