"""
Pipeline configuration.

An INI document with the sections [inputs], [detector], [cfog], [matcher],
[orientation] and [output]. Command-line flags are applied on top of the
file and win over its values. Relative input paths are resolved against
the directory of the configuration file.
"""

import configparser
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Optional

from ..descriptor.cfog import CfogParams
from ..detector.fast import DetectorParams
from ..exceptions import ConfigError, RegistrationError
from ..matcher.template_matcher import MatchParams
from ..orientation.resection import DEFAULT_MAX_ROUNDS, DEFAULT_RMSE_TARGET

DEFAULT_OUTPUT_DIR = Path("registration_output")
DEFAULT_TILE = 64

Overrides = Dict[str, Dict[str, Any]]


def _boolean(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in configparser.ConfigParser.BOOLEAN_STATES:
        return configparser.ConfigParser.BOOLEAN_STATES[lowered]
    raise ValueError(f"not a boolean: '{value}'")


def _text(value: str) -> str:
    return value.strip()


SCHEMA: Dict[str, Dict[str, Callable[[str], Any]]] = {
    "inputs": {"aerial": _text, "camera": _text, "lidar_intensity": _text, "dsm": _text},
    "detector": {"grid_n": int, "k_per_cell": int, "fast_threshold": float, "arc_length": int},
    "cfog": {"m": int, "sigma": float, "normalize_per_pixel": _boolean},
    "matcher": {"template_size": int, "search_radius": int, "min_confidence": float,
                "subpixel": _boolean, "metric": _text, "window": _boolean, "mi_bins": int,
                "min_valid_fraction": float, "workers": int},
    "orientation": {"rmse_target": float, "max_rounds": int},
    "output": {"directory": _text, "checkerboard_tile": int, "debug": _boolean},
}


@dataclass
class PipelineConfig:
    """Inputs, parameters and output location of one registration run."""
    aerial_path: Optional[Path] = None
    camera_path: Optional[Path] = None
    lidar_path: Optional[Path] = None
    dsm_path: Optional[Path] = None
    output_dir: Path = DEFAULT_OUTPUT_DIR
    detector: DetectorParams = field(default_factory=DetectorParams)
    cfog: CfogParams = field(default_factory=CfogParams)
    matcher: MatchParams = field(default_factory=MatchParams)
    rmse_target: float = DEFAULT_RMSE_TARGET
    max_rounds: int = DEFAULT_MAX_ROUNDS
    workers: int = 1
    checkerboard_tile: int = DEFAULT_TILE
    debug: bool = False

    @property
    def metric(self) -> str:
        return self.matcher.metric

    def missing_inputs(self):
        names = {"aerial": self.aerial_path, "camera": self.camera_path,
                 "lidar_intensity": self.lidar_path, "dsm": self.dsm_path}
        return [name for name, path in names.items() if path is None]


def _typed_section(parser: configparser.ConfigParser, section: str) -> Dict[str, Any]:
    if not parser.has_section(section):
        return {}
    converters = SCHEMA[section]
    values = {}
    for key, raw in parser.items(section):
        try:
            values[key] = converters[key](raw)
        except ValueError as e:
            raise ConfigError(f"[{section}] {key}: {e}")
    return values


def _resolve(path_text: Optional[str], base: Optional[Path]) -> Optional[Path]:
    if not path_text:
        return None
    path = Path(path_text)
    if base is not None and not path.is_absolute():
        path = base / path
    return path


def load_config(path: Optional[Path] = None, overrides: Optional[Overrides] = None) -> PipelineConfig:
    """
    Build a PipelineConfig from an INI file and flag overrides.

    Args:
        path: INI file, optional when every input comes from overrides
        overrides: {section: {key: value}}; None values are ignored

    Returns:
        PipelineConfig with validated parameter objects

    Raises:
        ConfigError: On unknown sections or keys, bad values or failed
            parameter invariants
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    base = None
    if path is not None:
        path = Path(path)
        try:
            with open(path, "r", encoding="utf-8") as file:
                parser.read_file(file, source=str(path))
        except FileNotFoundError:
            raise ConfigError(f"Configuration file not found: {path}")
        except configparser.Error as e:
            raise ConfigError(f"Malformed configuration {path}: {e}")
        base = path.parent

    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"Unknown configuration section [{section}]")
        unknown = [key for key in parser[section] if key not in SCHEMA[section]]
        if unknown:
            raise ConfigError(f"Unknown keys in [{section}]: {', '.join(unknown)}")

    flag_values: Dict[str, Dict[str, Any]] = {}
    for section, values in (overrides or {}).items():
        if section not in SCHEMA:
            raise ConfigError(f"Unknown override section '{section}'")
        for key, value in values.items():
            if value is None:
                continue
            if key not in SCHEMA[section]:
                raise ConfigError(f"Unknown override '{section}.{key}'")
            flag_values.setdefault(section, {})[key] = value

    sections = {name: _typed_section(parser, name) for name in SCHEMA}
    for section, values in flag_values.items():
        sections[section].update(values)

    inputs = sections["inputs"]
    matcher = dict(sections["matcher"])
    workers = matcher.pop("workers", 1)
    output = sections["output"]
    orientation = sections["orientation"]
    flag_inputs = flag_values.get("inputs", {})

    def input_path(key: str) -> Optional[Path]:
        # Flag paths are relative to the working directory, file paths to the file.
        return _resolve(inputs.get(key), None if key in flag_inputs else base)

    try:
        config = PipelineConfig(
            aerial_path=input_path("aerial"),
            camera_path=input_path("camera"),
            lidar_path=input_path("lidar_intensity"),
            dsm_path=input_path("dsm"),
            output_dir=Path(output.get("directory", DEFAULT_OUTPUT_DIR)),
            detector=DetectorParams(**sections["detector"]),
            cfog=CfogParams(**sections["cfog"]),
            matcher=MatchParams(**matcher),
            rmse_target=orientation.get("rmse_target", DEFAULT_RMSE_TARGET),
            max_rounds=orientation.get("max_rounds", DEFAULT_MAX_ROUNDS),
            workers=workers,
            checkerboard_tile=output.get("checkerboard_tile", DEFAULT_TILE),
            debug=output.get("debug", False),
        )
    except (RegistrationError, TypeError) as e:
        raise ConfigError(f"Invalid configuration: {e}")
    return config
