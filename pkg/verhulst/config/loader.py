"""Configuration loader that merges defaults, presets, files and user overrides."""

from __future__ import annotations

import itertools
import logging
import math
import os
import re
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, MutableMapping, NamedTuple, Optional, Sequence, Tuple

import yaml

from ..core.errors import ConfigError
from ..core.integrate import METHODS
from ..core.model import ModelSpec, Variant
from .defaults import clone_defaults

logger = logging.getLogger(__name__)

SETTINGS_ENV = "VERHULST_SETTINGS"
OUTPUT_ENV = "VERHULST_OUTPUT_DIR"

_FORCING_KEY = re.compile(r"^forcing\.(\d+)\.(B1|omega1)$")
_LIST_KEYS = ("N0", "omega", "x0")
_ESTIMATORS = ("time", "density")


class Forcing(NamedTuple):
    B1: float
    omega1: float


class Scenario(NamedTuple):
    """One point of an expanded sweep."""

    name: str
    spec: ModelSpec
    x0: float


def _fmt(value: float) -> str:
    return format(value, "g")


def scenario_name(spec: ModelSpec, x0: float) -> str:
    parts = [spec.variant.value, f"N0={_fmt(spec.N0)}", f"omega={_fmt(spec.omega)}", f"x0={_fmt(x0)}"]
    if spec.is_forced:
        parts += [f"B1={_fmt(spec.B1)}", f"omega1={_fmt(spec.omega1)}"]
    return "_".join(parts)


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved scenario document.

    ``N0``, ``omega`` and ``x0`` are tuples; :meth:`expand` takes their
    Cartesian product (times the forcing entries, when there are any).
    """

    variant: Variant = Variant.CORRELATED
    B: float = 0.0
    N0: Tuple[float, ...] = (5.0,)
    omega: Tuple[float, ...] = (1.0,)
    K: float = 10.0
    C: float = 1.0
    x0: Tuple[float, ...] = (0.1,)
    T: float = 1000.0
    dt: Optional[float] = None
    method: str = "auto"
    bins: int = 100
    prominence: float = 0.05
    estimator: str = "time"
    eps_u: Optional[float] = None
    eps_rel: float = 4e-3
    t_resolution: float = 0.12
    density_floor: float = 1e-12
    n_points: int = 1000
    T_step: float = 10.0
    tail_fraction: float = 0.2
    divergence_bound: float = 1e12
    trace_stride: int = 10
    workers: int = 1
    forcing: Tuple[Forcing, ...] = ()
    preset: Optional[str] = None
    output_dir: str = "output"
    emit_svg: bool = False

    # ------------------------------------------------------------------ derived views
    def base_spec(self, **changes: Any) -> ModelSpec:
        payload = dict(
            variant=self.variant,
            B=self.B,
            N0=self.N0[0],
            omega=self.omega[0],
            K=self.K,
            C=self.C,
        )
        payload.update(changes)
        return ModelSpec(**payload)

    def expand(self, *, include_forcing: bool = True) -> List[Scenario]:
        """Cartesian product N0 x omega x x0 (x forcing), in document order."""

        forcings: Sequence[Optional[Forcing]] = self.forcing if include_forcing and self.forcing else (None,)
        scenarios = []
        for N0, omega, x0, forcing in itertools.product(self.N0, self.omega, self.x0, forcings):
            changes: Dict[str, Any] = {"N0": N0, "omega": omega}
            if forcing is not None:
                changes.update(B1=forcing.B1, omega1=forcing.omega1)
            spec = self.base_spec(**changes)
            scenarios.append(Scenario(scenario_name(spec, x0), spec, x0))
        return scenarios

    def to_document(self) -> Dict[str, Any]:
        """Flat mapping in the on-disk format (dotted forcing keys)."""

        document: Dict[str, Any] = {}
        for key, value in asdict(self).items():
            if key == "forcing":
                continue
            if key == "variant":
                value = self.variant.value
            elif key in _LIST_KEYS:
                value = list(value) if len(value) > 1 else value[0]
            document[key] = value
        for index, entry in enumerate(self.forcing):
            document[f"forcing.{index}.B1"] = entry.B1
            document[f"forcing.{index}.omega1"] = entry.omega1
        return document

    def to_manifest(self) -> Dict[str, Any]:
        """Every tunable that affects numbers, with lists kept as lists."""

        manifest = self.to_document()
        for key in _LIST_KEYS:
            manifest[key] = list(getattr(self, key))
        manifest["forcing"] = [entry._asdict() for entry in self.forcing]
        for index in range(len(self.forcing)):
            manifest.pop(f"forcing.{index}.B1", None)
            manifest.pop(f"forcing.{index}.omega1", None)
        return manifest


# ---------------------------------------------------------------------- coercion helpers
def _real(key: str, value: Any) -> float:
    if isinstance(value, bool):
        raise ConfigError(key, f"expected a number, got {value!r}")
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected a number, got {value!r}") from None
    if not math.isfinite(number):
        raise ConfigError(key, "must be finite")
    return number


def _integer(key: str, value: Any) -> int:
    number = _real(key, value)
    if number != int(number):
        raise ConfigError(key, f"expected an integer, got {value!r}")
    return int(number)


def _reals(key: str, value: Any) -> Tuple[float, ...]:
    items = value if isinstance(value, (list, tuple)) else [value]
    if not items:
        raise ConfigError(key, "list must not be empty")
    return tuple(_real(key, item) for item in items)


def _optional_real(key: str, value: Any) -> Optional[float]:
    if value is None or (isinstance(value, str) and value.strip().lower() in ("", "auto", "none", "null")):
        return None
    return _real(key, value)


def _flag(key: str, value: Any) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.strip().lower() in ("true", "yes", "on", "1", "false", "no", "off", "0"):
        return value.strip().lower() in ("true", "yes", "on", "1")
    if isinstance(value, int) and value in (0, 1):
        return bool(value)
    raise ConfigError(key, f"expected a boolean, got {value!r}")


def _forcing_entries(raw: Mapping[str, Any]) -> Tuple[Forcing, ...]:
    slots: Dict[int, Dict[str, Any]] = {}
    for key, value in raw.items():
        match = _FORCING_KEY.match(key)
        if match:
            slots.setdefault(int(match.group(1)), {})[match.group(2)] = (key, value)
    entries = []
    for index in sorted(slots):
        slot = slots[index]
        for part in ("B1", "omega1"):
            if part not in slot:
                raise ConfigError(f"forcing.{index}.{part}", "missing; forcing entries need both B1 and omega1")
        B1 = _real(*slot["B1"])
        omega1 = _real(*slot["omega1"])
        if B1 < 0:
            raise ConfigError(slot["B1"][0], "forcing amplitude must be >= 0")
        if omega1 <= 0:
            raise ConfigError(slot["omega1"][0], "forcing frequency must be > 0")
        entries.append(Forcing(B1, omega1))
    return tuple(entries)


# ---------------------------------------------------------------------- resolution
def _merge(base: MutableMapping[str, Any], updates: Mapping[str, Any]) -> MutableMapping[str, Any]:
    """Overlay *updates*; forcing keys in *updates* replace every forcing key of *base*."""

    if any(_FORCING_KEY.match(str(key)) for key in updates):
        for key in [key for key in base if _FORCING_KEY.match(str(key))]:
            del base[key]
    for key, value in updates.items():
        base[str(key)] = value
    return base


def resolve(document: Mapping[str, Any]) -> ScenarioConfig:
    """Validate a flat mapping layered over the defaults (and its preset, if named).

    Raises :class:`ConfigError` naming the offending key.
    """

    defaults, presets, _ = clone_defaults()
    known = set(defaults)
    for key in document:
        if str(key) not in known and not _FORCING_KEY.match(str(key)):
            raise ConfigError(str(key), "unknown configuration key")

    raw: Dict[str, Any] = dict(defaults)
    preset = document.get("preset", defaults["preset"])
    if preset is not None:
        preset = str(preset)
        if preset not in presets:
            raise ConfigError("preset", f"unknown preset {preset!r}; expected one of {sorted(presets)}")
        _merge(raw, presets[preset]["params"])
    _merge(raw, document)
    raw["preset"] = preset

    variant = Variant.parse(raw["variant"])
    config = ScenarioConfig(
        variant=variant,
        B=_real("B", raw["B"]),
        N0=_reals("N0", raw["N0"]),
        omega=_reals("omega", raw["omega"]),
        K=_real("K", raw["K"]),
        C=_real("C", raw["C"]),
        x0=_reals("x0", raw["x0"]),
        T=_real("T", raw["T"]),
        dt=_optional_real("dt", raw["dt"]),
        method=str(raw["method"]),
        bins=_integer("bins", raw["bins"]),
        prominence=_real("prominence", raw["prominence"]),
        estimator=str(raw["estimator"]),
        eps_u=_optional_real("eps_u", raw["eps_u"]),
        eps_rel=_real("eps_rel", raw["eps_rel"]),
        t_resolution=_real("t_resolution", raw["t_resolution"]),
        density_floor=_real("density_floor", raw["density_floor"]),
        n_points=_integer("n_points", raw["n_points"]),
        T_step=_real("T_step", raw["T_step"]),
        tail_fraction=_real("tail_fraction", raw["tail_fraction"]),
        divergence_bound=_real("divergence_bound", raw["divergence_bound"]),
        trace_stride=_integer("trace_stride", raw["trace_stride"]),
        workers=_integer("workers", raw["workers"]),
        forcing=_forcing_entries(raw),
        preset=preset,
        output_dir=str(raw["output_dir"]),
        emit_svg=_flag("emit_svg", raw["emit_svg"]),
    )
    validate(config)
    return config


def validate(config: ScenarioConfig) -> None:
    if any(omega <= 0 for omega in config.omega):
        raise ConfigError("omega", "modulation frequency must be > 0")
    if config.K <= 0:
        raise ConfigError("K", "carrying capacity must be > 0")
    if any(N0 < 0 for N0 in config.N0):
        raise ConfigError("N0", "modulation amplitude must be >= 0")
    if config.T <= 0:
        raise ConfigError("T", "horizon must be > 0")
    if config.dt is not None:
        if config.dt <= 0:
            raise ConfigError("dt", "time step must be > 0")
        if config.dt > config.T:
            raise ConfigError("dt", "time step must not exceed T")
    if config.method not in METHODS:
        raise ConfigError("method", f"expected one of {METHODS}")
    if config.estimator not in _ESTIMATORS:
        raise ConfigError("estimator", f"expected one of {_ESTIMATORS}")
    if config.bins < 2:
        raise ConfigError("bins", "need at least 2 bins")
    if not 0.0 < config.prominence < 1.0:
        raise ConfigError("prominence", "must lie in (0, 1)")
    if config.eps_u is not None and config.eps_u <= 0:
        raise ConfigError("eps_u", "must be > 0")
    if config.eps_rel <= 0:
        raise ConfigError("eps_rel", "must be > 0")
    if not config.t_resolution >= 0:
        raise ConfigError("t_resolution", "must be >= 0")
    if not 0.0 <= config.density_floor < 1.0:
        raise ConfigError("density_floor", "must lie in [0, 1)")
    if config.n_points < 1:
        raise ConfigError("n_points", "must be >= 1")
    if config.T_step <= 0:
        raise ConfigError("T_step", "must be > 0")
    if config.dt is not None and config.dt > config.T_step:
        raise ConfigError("dt", "time step must not exceed T_step")
    if not 0.0 < config.tail_fraction <= 1.0:
        raise ConfigError("tail_fraction", "must lie in (0, 1]")
    if config.divergence_bound <= 0:
        raise ConfigError("divergence_bound", "must be > 0")
    if config.trace_stride < 1:
        raise ConfigError("trace_stride", "must be >= 1")
    if config.workers < 1:
        raise ConfigError("workers", "must be >= 1")
    if not config.output_dir:
        raise ConfigError("output_dir", "must not be empty")
    for scenario in config.expand():
        if scenario.spec.has_negative_closed_form and config.method == "exact" and scenario.x0 <= 0:
            raise ConfigError("x0", "the Case-2 closed form requires x0 > 0")


# ---------------------------------------------------------------------- text format
def _load_mapping(text: str, origin: str) -> Dict[str, Any]:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(origin, f"malformed document: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, Mapping):
        raise ConfigError(origin, "document must be a mapping")
    return {str(key): value for key, value in data.items()}


def parse_config(text: str) -> ScenarioConfig:
    """Parse a flat YAML document into a resolved :class:`ScenarioConfig`."""

    return resolve(_load_mapping(text, "document"))


def serialize_config(config: ScenarioConfig) -> str:
    return yaml.safe_dump(config.to_document(), sort_keys=True, default_flow_style=None)


def parse_override(item: str) -> Tuple[str, Any]:
    """Split a ``key=value`` override; the value is read as a YAML scalar or list."""

    key, sep, value = item.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(item, "overrides must look like key=value")
    try:
        parsed = yaml.safe_load(value) if value.strip() else None
    except yaml.YAMLError as exc:
        raise ConfigError(key, f"malformed value: {exc}") from exc
    return key, parsed


def load_config(
    path: Optional[Path] = None,
    *,
    preset: Optional[str] = None,
    overrides: Iterable[str] = (),
    flags: Optional[Mapping[str, Any]] = None,
) -> ScenarioConfig:
    """
    Merge defaults, preset, YAML file, ``--set`` overrides and flags into one validated config.

    The file comes from *path* or, when that is not given, from the
    ``VERHULST_SETTINGS`` environment variable. ``VERHULST_OUTPUT_DIR``
    replaces ``output_dir`` unless a flag sets it.

    Parameters:
        path (Optional[Path]): YAML scenario document; falls back to ``VERHULST_SETTINGS``.
        preset (Optional[str]): Preset id whose parameters sit between the defaults and the document.
        overrides (Iterable[str]): ``key=value`` strings, each value parsed as a YAML scalar or list.
        flags (Optional[Mapping[str, Any]]): Dedicated CLI flags; ``None`` values are ignored.

    Returns:
        ScenarioConfig: The merged configuration with list keys as tuples and forcing entries resolved.

    Raises:
        ConfigError: If the file cannot be read, a key is unknown, or a value is out of range.
    """

    document: Dict[str, Any] = {}
    source = path or os.environ.get(SETTINGS_ENV)
    if source:
        source_path = Path(source)
        try:
            text = source_path.read_text(encoding="utf8")
        except OSError as exc:
            raise ConfigError("config", f"unable to read '{source_path}': {exc}") from exc
        document.update(_load_mapping(text, str(source_path)))
        logger.debug("Loaded scenario document %s", source_path)
    if preset is not None:
        document["preset"] = preset
    for item in overrides:
        key, value = parse_override(item)
        document[key] = value
    env_output = os.environ.get(OUTPUT_ENV)
    if env_output:
        document["output_dir"] = env_output
    for key, value in (flags or {}).items():
        if value is not None:
            document[key] = value
    return resolve(document)


__all__ = [
    "Forcing",
    "OUTPUT_ENV",
    "SETTINGS_ENV",
    "Scenario",
    "ScenarioConfig",
    "load_config",
    "parse_config",
    "parse_override",
    "resolve",
    "scenario_name",
    "serialize_config",
    "validate",
]
