"""JSON run-configuration schema: parsing, validation, defaults.

Unit conventions, fixed across every key and echoed in error messages:
frequencies and rates are f = omega/2pi in MHz, times in microseconds,
temperatures in millikelvin, phases in radians.  The defaults reproduce the
device parameter set used throughout the package (lossy-mode linewidth
12.98 MHz, anharmonicity 197 MHz, qubit decay/heating 0.029/0.006 MHz,
1.2 us measurement window).

A configuration is a JSON object with up to six sections::

    {
      "system":   {...},   # device parameters -> model.SystemSpec
      "drives":   [...],   # parametric drive definitions
      "sequence": {...},   # segments referencing drives by index, timing
      "sweep":    {...},   # optional 1-D grid over one drive field
      "fit":      {...},   # rate-fit settings
      "output":   {...}    # file naming for CLI runs
    }

Every key is optional and defaulted; unknown keys anywhere are rejected with
a path-qualified message ("system.kappa: unknown key").  `parse_config` is
total: it either returns a fully resolved `Config` or raises `ConfigError`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Mapping

from .analytic import BathSpec, thermal_nbar
from .dynamics import PulseSequence, Segment
from .model import DriveKind, DriveSpec, SystemSpec
from .core import HilbertSpace


class ConfigError(ValueError):
    """Configuration rejection; the message starts with the offending path."""


# --------------------------------------------------------------- field table
#
# Each entry: default value, then a constraint tag understood by _check_value.
# A default of None means "absent unless the user supplies it".

_SYSTEM_FIELDS: dict[str, tuple[Any, str]] = {
    "f_qubit_mhz": (4520.0, "positive"),
    "f_snail_mhz": (8010.0, "positive"),
    "anharmonicity_mhz": (197.0, "nonnegative"),
    "c3_snail_mhz": (10.0, "nonnegative"),
    "g_over_delta": (0.01, "nonnegative"),
    "kappa_snail_mhz": (12.98, "positive"),
    "kappa_qubit_down_mhz": (0.029, "nonnegative"),
    "kappa_qubit_up_mhz": (0.006, "nonnegative"),
    "temperature_mk": (0.0, "nonnegative"),
    "nbar_snail": (None, "nonnegative_or_null"),
    "qubit_levels": (3, "levels"),
    "snail_levels": (2, "levels"),
}

_DRIVE_FIELDS: dict[str, tuple[Any, str]] = {
    "kind": (None, "drive_kind"),  # required
    "g_eff_mhz": (None, "nonnegative"),  # required
    "phase_rad": (0.0, "finite"),
    "detuning_mhz": (0.0, "finite"),
}

_SEGMENT_FIELDS: dict[str, tuple[Any, str]] = {
    "drives": (None, "index_list"),  # default: all drives
    "duration_us": (None, "nonnegative"),  # required
}

_SEQUENCE_FIELDS: dict[str, tuple[Any, str]] = {
    "initial_state": ("0,g", "state_label"),
    "segments": ([], "segment_list"),
    "measure_window_us": (1.2, "nonnegative"),
    "sample_dt_us": (0.05, "positive"),
    "method": ("auto", "method"),
}

_SWEEP_FIELDS: dict[str, tuple[Any, str]] = {
    "drive_index": (0, "index"),
    "field": ("g_eff_mhz", "sweep_field"),
    "values": (None, "number_list"),  # required if sweep present
    "threads": (None, "threads_or_null"),
}

_FIT_FIELDS: dict[str, tuple[Any, str]] = {
    "model": ("auto", "fit_model"),
    "fixed": ({}, "fixed_map"),
    "seed": (None, "int_or_null"),
    "noise_sigma": (None, "nonnegative_or_null"),
}

_OUTPUT_FIELDS: dict[str, tuple[Any, str]] = {
    "directory": (".", "string"),
    "prefix": ("run", "string"),
}

_SECTIONS: dict[str, dict[str, tuple[Any, str]]] = {
    "system": _SYSTEM_FIELDS,
    "sequence": _SEQUENCE_FIELDS,
    "sweep": _SWEEP_FIELDS,
    "fit": _FIT_FIELDS,
    "output": _OUTPUT_FIELDS,
}

_DRIVE_KINDS = tuple(k.value for k in DriveKind)
_FIT_MODELS = ("auto", "two_level", "three_level")
_METHODS = ("auto", "expm", "rk45", "dop853", "periodic")
_FIXED_NAMES = ("gamma_ge", "gamma_eg", "gamma_ef", "gamma_fe", "p_g0")


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_value(path: str, value: Any, tag: str) -> Any:
    if tag in ("positive", "nonnegative", "finite"):
        if not _is_number(value) or not math.isfinite(value):
            raise ConfigError(f"{path}: must be a finite number, got {value!r}")
        if tag == "positive" and value <= 0:
            raise ConfigError(f"{path}: must be > 0, got {value}")
        if tag == "nonnegative" and value < 0:
            raise ConfigError(f"{path}: must be >= 0, got {value}")
        return float(value)
    if tag == "nonnegative_or_null":
        if value is None:
            return None
        return _check_value(path, value, "nonnegative")
    if tag == "levels":
        if not isinstance(value, int) or isinstance(value, bool) or not 2 <= value <= 4:
            raise ConfigError(f"{path}: must be an integer between 2 and 4, got {value!r}")
        return value
    if tag == "index":
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise ConfigError(f"{path}: must be an integer >= 0, got {value!r}")
        return value
    if tag == "int_or_null":
        if value is None:
            return None
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{path}: must be an integer or null, got {value!r}")
        return value
    if tag == "threads_or_null":
        if value is None:
            return None
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise ConfigError(f"{path}: must be an integer >= 1 or null, got {value!r}")
        return value
    if tag == "string":
        if not isinstance(value, str) or not value:
            raise ConfigError(f"{path}: must be a non-empty string, got {value!r}")
        return value
    if tag == "state_label":
        if not isinstance(value, str) or "," not in value:
            raise ConfigError(f"{path}: must look like '0,g', got {value!r}")
        return value
    if tag == "drive_kind":
        if value not in _DRIVE_KINDS:
            raise ConfigError(f"{path}: must be one of {_DRIVE_KINDS}, got {value!r}")
        return value
    if tag == "fit_model":
        if value not in _FIT_MODELS:
            raise ConfigError(f"{path}: must be one of {_FIT_MODELS}, got {value!r}")
        return value
    if tag == "method":
        if value not in _METHODS:
            raise ConfigError(f"{path}: must be one of {_METHODS}, got {value!r}")
        return value
    if tag == "sweep_field":
        allowed = ("g_eff_mhz", "phase_rad", "detuning_mhz")
        if value not in allowed:
            raise ConfigError(f"{path}: must be one of {allowed}, got {value!r}")
        return value
    if tag == "number_list":
        if not isinstance(value, list) or not value:
            raise ConfigError(f"{path}: must be a non-empty list of numbers, got {value!r}")
        out = []
        for i, v in enumerate(value):
            if not _is_number(v) or not math.isfinite(v):
                raise ConfigError(f"{path}[{i}]: must be a finite number, got {v!r}")
            out.append(float(v))
        return out
    if tag == "segment_list":
        # Shape only; contents are validated by _resolve_segments once the
        # number of drives is known.
        if not isinstance(value, list):
            raise ConfigError(f"{path}: must be a list of segments, got {value!r}")
        return value
    if tag == "index_list":
        if not isinstance(value, list):
            raise ConfigError(f"{path}: must be a list of drive indices, got {value!r}")
        out = []
        for i, v in enumerate(value):
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ConfigError(f"{path}[{i}]: must be an integer >= 0, got {v!r}")
            out.append(v)
        return out
    if tag == "fixed_map":
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: must be an object, got {value!r}")
        out = {}
        for k, v in value.items():
            if k not in _FIXED_NAMES:
                raise ConfigError(f"{path}.{k}: unknown fixed parameter (allowed: {_FIXED_NAMES})")
            out[k] = _check_value(f"{path}.{k}", v, "nonnegative")
        return out
    raise AssertionError(f"unhandled constraint tag {tag!r}")  # pragma: no cover


def _resolve_section(path: str, raw: Any, fields: Mapping[str, tuple[Any, str]]) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: must be an object, got {raw!r}")
    for key in raw:
        if key not in fields:
            raise ConfigError(f"{path}.{key}: unknown key")
    out = {}
    for key, (default, tag) in fields.items():
        if key in raw:
            out[key] = _check_value(f"{path}.{key}", raw[key], tag)
        else:
            out[key] = json.loads(json.dumps(default))  # deep copy of the default
    return out


def _resolve_drives(raw: Any) -> list[dict]:
    if not isinstance(raw, list):
        raise ConfigError(f"drives: must be a list, got {raw!r}")
    out = []
    for i, entry in enumerate(raw):
        path = f"drives[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{path}: must be an object, got {entry!r}")
        for key in entry:
            if key not in _DRIVE_FIELDS:
                raise ConfigError(f"{path}.{key}: unknown key")
        resolved = {}
        for key, (default, tag) in _DRIVE_FIELDS.items():
            if key in entry:
                resolved[key] = _check_value(f"{path}.{key}", entry[key], tag)
            elif default is None:
                raise ConfigError(f"{path}.{key}: required key is missing")
            else:
                resolved[key] = default
        out.append(resolved)
    return out


def _resolve_segments(raw: list, n_drives: int) -> list[dict]:
    out = []
    for i, entry in enumerate(raw):
        path = f"sequence.segments[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{path}: must be an object, got {entry!r}")
        for key in entry:
            if key not in _SEGMENT_FIELDS:
                raise ConfigError(f"{path}.{key}: unknown key")
        if "duration_us" not in entry:
            raise ConfigError(f"{path}.duration_us: required key is missing")
        duration = _check_value(f"{path}.duration_us", entry["duration_us"], "nonnegative")
        if "drives" in entry:
            indices = _check_value(f"{path}.drives", entry["drives"], "index_list")
        else:
            indices = list(range(n_drives))
        for j, idx in enumerate(indices):
            if idx >= n_drives:
                raise ConfigError(
                    f"{path}.drives[{j}]: index {idx} out of range (have {n_drives} drives)"
                )
        out.append({"drives": indices, "duration_us": duration})
    return out


@dataclass(frozen=True)
class Config:
    """A fully resolved configuration; `data` is plain JSON-compatible."""

    data: dict

    # ---- serialization ----
    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True) + "\n"

    # ---- typed views onto the resolved data ----
    @property
    def system(self) -> dict:
        return self.data["system"]

    def bath(self) -> BathSpec:
        return BathSpec(
            temperature=self.system["temperature_mk"] * 1e-3,
            f_s=self.system["f_snail_mhz"],
        )

    def nbar_snail(self) -> float:
        """Explicit occupation wins over the temperature-derived one."""
        explicit = self.system["nbar_snail"]
        if explicit is not None:
            return explicit
        return thermal_nbar(self.bath())

    def system_spec(self) -> SystemSpec:
        sys = self.system
        return SystemSpec(
            f_q=sys["f_qubit_mhz"],
            f_s=sys["f_snail_mhz"],
            alpha=sys["anharmonicity_mhz"],
            c3_s=sys["c3_snail_mhz"],
            g_over_delta=sys["g_over_delta"],
            kappa_s=sys["kappa_snail_mhz"],
            kappa_q_down=sys["kappa_qubit_down_mhz"],
            kappa_q_up=sys["kappa_qubit_up_mhz"],
            nbar_s=self.nbar_snail(),
            dims=HilbertSpace(
                (sys["snail_levels"], sys["qubit_levels"]), ("snail", "qubit")
            ),
        )

    def drives(self) -> tuple[DriveSpec, ...]:
        return tuple(
            DriveSpec(
                kind=DriveKind(d["kind"]),
                g_eff=d["g_eff_mhz"],
                phase=d["phase_rad"],
                detuning=d["detuning_mhz"],
            )
            for d in self.data["drives"]
        )

    def sequence(self) -> PulseSequence:
        drives = self.drives()
        segments = []
        for seg in self.data["sequence"]["segments"]:
            segments.append(
                Segment(
                    drives=tuple(drives[i] for i in seg["drives"]),
                    duration=seg["duration_us"],
                )
            )
        return PulseSequence(tuple(segments))


def resolve_config(obj: Any) -> Config:
    """Validate a decoded JSON object and fill in every default."""
    if not isinstance(obj, dict):
        raise ConfigError(f"top level: must be a JSON object, got {obj!r}")
    known = set(_SECTIONS) | {"drives"}
    for key in obj:
        if key not in known:
            raise ConfigError(f"{key}: unknown key")
    data: dict[str, Any] = {}
    data["drives"] = _resolve_drives(obj.get("drives", []))
    for name, fields in _SECTIONS.items():
        if name == "sweep" and obj.get("sweep") is None:
            data["sweep"] = None  # absent or null: no sweep requested
            continue
        data[name] = _resolve_section(name, obj.get(name, {}), fields)
    data["sequence"]["segments"] = _resolve_segments(
        data["sequence"]["segments"], len(data["drives"])
    )
    if data["sweep"] is not None:
        if data["sweep"]["values"] is None:
            raise ConfigError("sweep.values: required key is missing")
        if data["drives"] and data["sweep"]["drive_index"] >= len(data["drives"]):
            raise ConfigError(
                f"sweep.drive_index: index {data['sweep']['drive_index']} out of range "
                f"(have {len(data['drives'])} drives)"
            )
        if not data["drives"]:
            raise ConfigError("sweep.drive_index: there are no drives to sweep")
        for i, v in enumerate(data["sweep"]["values"]):
            if data["sweep"]["field"] == "g_eff_mhz" and v < 0:
                raise ConfigError(f"sweep.values[{i}]: drive strength must be >= 0, got {v}")
    cfg = Config(data=data)
    # Surface physics-level rejections with a config path, not as downstream
    # crashes: construct the SystemSpec once, and check drive/dimension coherence.
    try:
        spec = cfg.system_spec()
    except ValueError as exc:
        raise ConfigError(f"system: {exc}") from exc
    for i, d in enumerate(data["drives"]):
        if d["kind"] in ("SigmaEF", "DeltaEF") and spec.qubit_dim < 3:
            raise ConfigError(
                f"drives[{i}].kind: {d['kind']} needs system.qubit_levels >= 3 "
                f"(got {spec.qubit_dim})"
            )
    return cfg


def parse_config(text: str) -> Config:
    """Parse UTF-8 JSON text into a resolved, validated Config."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"top level: invalid JSON ({exc})") from exc
    return resolve_config(obj)


def load_config(path: str) -> Config:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
