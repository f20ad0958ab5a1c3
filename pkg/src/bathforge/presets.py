"""Experiment presets: canned protocols with device-derived drive strengths.

Five presets are defined:

``heating_ge``
    A single sum-frequency (Sigma) pump on the g-e transition, strong enough
    that the engineered heating rate is 205.4x the qubit's intrinsic g->e
    rate; the population inverts.
``cooling_ge``
    A single difference-frequency (delta) pump on g-e at 10.6x the intrinsic
    e->g rate, pumping the qubit to the ground state from |e>.
``balanced_ge``
    Sigma and delta pumps applied together at two settings whose *total*
    (engineered + intrinsic) rates match per direction: 54/54 kHz and
    23/23 kHz.  The qubit lands in a near-even g/e mixture; the stronger
    setting thermalizes ~2.3x faster.
``gf_mix``
    A delta pump on g-e plus a Sigma pump on e-f, emptying |e> both ways and
    stabilizing a g/f+ mixture with a visible |e> residual after the 1.2 us
    measurement window.
``natural_decay``
    No pumps: the qubit is prepared in |g>, |e>, |f> in three runs and
    relaxes; a joint three-level fit recovers the intrinsic rates.

Drive strengths are *backed out* from quoted rate settings through the
weak-coupling law rate = 4 g^2 / kappa_s; that mapping is an inference about
the device, not a measured strength.  The pumped presets other than
``gf_mix`` use the qubit's intrinsic rates (1.22 / 8.28 kHz per direction,
bosonic ladder scaling for e-f); ``gf_mix`` uses the stronger dissipation
set (29 / 6 kHz) that pairs with its 1.2 us measurement window.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .config import _SYSTEM_FIELDS, ConfigError, _check_value, resolve_config
from .dynamics import PulseSequence, Segment, Trajectory, run_sequence
from .estimation import FitResult, fit_rates_2level, fit_rates_3level
from .model import DriveKind, DriveSpec, SystemSpec
from .reports import (
    RunReport,
    fit_result_to_dict,
    make_provenance,
    trajectory_summary,
    write_report_json,
    write_trajectory_csv,
)

# Intrinsic qubit rates (MHz): g->e and e->g.  The e-f ladder rates follow
# from the bosonic collapse-operator scaling (factor 2 on the second rung).
NATURAL_GE_MHZ = 0.00122
NATURAL_EG_MHZ = 0.00828

# Dissipation set used by the g-f mixture protocol (with its 1.2 us window).
GF_KAPPA_DOWN_MHZ = 0.029
GF_KAPPA_UP_MHZ = 0.006

HEATING_RATIO = 205.4
COOLING_RATIO = 10.6
# Matched total rates (MHz) per balanced setting; the quoted 24/22 kHz pair
# is realized as its 23 kHz mean so both directions' totals really match.
BALANCED_TOTALS_MHZ = {"54_54": 0.054, "24_22": 0.023}

GF_DELTA_GE_MHZ = 0.15
GF_SIGMA_EF_MHZ = 1.35

PRESET_NAMES = ("heating_ge", "cooling_ge", "balanced_ge", "gf_mix", "natural_decay")


def g_for_rate(rate_mhz: float, kappa_s_mhz: float) -> float:
    """Drive strength whose engineered rate (4 g^2 / kappa_s) equals rate_mhz."""
    if rate_mhz < 0:
        raise ValueError(f"rate must be >= 0, got {rate_mhz}")
    return math.sqrt(rate_mhz * kappa_s_mhz / 4.0)


@dataclass(frozen=True)
class PresetRun:
    label: str
    initial_state: str
    drives: tuple[DriveSpec, ...]


@dataclass(frozen=True)
class ExperimentPreset:
    """A named protocol: system parameters, pulse template, and run grid."""

    name: str
    spec: SystemSpec
    sequence: PulseSequence
    sweep_axes: Mapping[str, tuple] | None
    runs: tuple[PresetRun, ...]
    measure_window_us: float
    sample_dt_us: float
    fit_model: str  # "two_level" | "three_level"
    fit_joint: bool

    def __post_init__(self):
        if not self.runs:
            raise ValueError(f"preset {self.name!r} defines no runs")
        for run in self.runs:
            for drive in run.drives:
                if (
                    drive.kind in (DriveKind.SIGMA_EF, DriveKind.DELTA_EF)
                    and self.spec.qubit_dim < 3
                ):
                    raise ValueError(
                        f"preset {self.name!r}: drive {drive.kind.value} needs 3 qubit levels"
                    )


# ----------------------------------------------------------------- templates
#
# Builders return a plain JSON-compatible dict so overrides can be merged and
# echoed verbatim into the run report.


def _system_section(**overrides_of_defaults) -> dict:
    section = {key: default for key, (default, _tag) in _SYSTEM_FIELDS.items()}
    section.update(overrides_of_defaults)
    return section


def _intrinsic_system() -> dict:
    return _system_section(
        kappa_qubit_down_mhz=NATURAL_EG_MHZ, kappa_qubit_up_mhz=NATURAL_GE_MHZ
    )


def _drive(kind: str, g_eff: float) -> dict:
    return {"kind": kind, "g_eff_mhz": g_eff, "phase_rad": 0.0, "detuning_mhz": 0.0}


def _template_heating() -> dict:
    system = _intrinsic_system()
    g = g_for_rate(HEATING_RATIO * NATURAL_GE_MHZ, system["kappa_snail_mhz"])
    return {
        "system": system,
        "runs": [{"label": "main", "initial_state": "0,g", "drives": [_drive("SigmaGE", g)]}],
        "duration_us": 10.0,
        "measure_window_us": 0.0,
        "sample_dt_us": 0.025,
        "fit": {"model": "two_level", "joint": False},
        "sweep_axes": None,
    }


def _template_cooling() -> dict:
    system = _intrinsic_system()
    g = g_for_rate(COOLING_RATIO * NATURAL_EG_MHZ, system["kappa_snail_mhz"])
    return {
        "system": system,
        "runs": [{"label": "main", "initial_state": "0,e", "drives": [_drive("DeltaGE", g)]}],
        "duration_us": 12.0,
        "measure_window_us": 0.0,
        "sample_dt_us": 0.03,
        "fit": {"model": "two_level", "joint": False},
        "sweep_axes": None,
    }


def _template_balanced() -> dict:
    system = _intrinsic_system()
    kappa = system["kappa_snail_mhz"]
    runs = []
    for label, total in BALANCED_TOTALS_MHZ.items():
        g_sigma = g_for_rate(total - NATURAL_GE_MHZ, kappa)
        g_delta = g_for_rate(total - NATURAL_EG_MHZ, kappa)
        runs.append(
            {
                "label": label,
                "initial_state": "0,g",
                "drives": [_drive("SigmaGE", g_sigma), _drive("DeltaGE", g_delta)],
            }
        )
    return {
        "system": system,
        "runs": runs,
        "duration_us": 30.0,
        "measure_window_us": 0.0,
        "sample_dt_us": 0.05,
        "fit": {"model": "two_level", "joint": False},
        "sweep_axes": {"total_rate_mhz": sorted(BALANCED_TOTALS_MHZ.values(), reverse=True)},
    }


def _template_gf_mix() -> dict:
    return {
        "system": _system_section(
            kappa_qubit_down_mhz=GF_KAPPA_DOWN_MHZ, kappa_qubit_up_mhz=GF_KAPPA_UP_MHZ
        ),
        "runs": [
            {
                "label": "main",
                "initial_state": "0,g",
                "drives": [
                    _drive("DeltaGE", GF_DELTA_GE_MHZ),
                    _drive("SigmaEF", GF_SIGMA_EF_MHZ),
                ],
            }
        ],
        "duration_us": 150.0,
        "measure_window_us": 1.2,
        "sample_dt_us": 1.0,
        "fit": {"model": "three_level", "joint": False},
        "sweep_axes": None,
    }


def _template_natural_decay() -> dict:
    states = ("0,g", "0,e", "0,f")
    return {
        "system": _intrinsic_system(),
        "runs": [
            {"label": f"from_{s.split(',')[1]}", "initial_state": s, "drives": []}
            for s in states
        ],
        "duration_us": 300.0,
        "measure_window_us": 0.0,
        "sample_dt_us": 2.0,
        "fit": {"model": "three_level", "joint": True},
        "sweep_axes": {"initial_state": states},
    }


_TEMPLATES = {
    "heating_ge": _template_heating,
    "cooling_ge": _template_cooling,
    "balanced_ge": _template_balanced,
    "gf_mix": _template_gf_mix,
    "natural_decay": _template_natural_decay,
}


def available_presets() -> tuple[str, ...]:
    return PRESET_NAMES


# ----------------------------------------------------------------- overrides

_TIMING_OVERRIDES = {
    "duration_us": "positive",
    "measure_window_us": "nonnegative",
    "sample_dt_us": "positive",
}


def _apply_overrides(resolved: dict, overrides: Mapping[str, Any]) -> None:
    """Merge dot-path overrides into a preset template, validating each.

    Supported keys: ``system.<field>``, ``duration_us``, ``measure_window_us``,
    ``sample_dt_us``, ``initial_state`` (applied to every run), and
    ``drive_scale`` (multiplies every drive strength).
    """
    for key, value in overrides.items():
        if key.startswith("system."):
            field = key.split(".", 1)[1]
            if field not in _SYSTEM_FIELDS:
                raise ConfigError(f"{key}: unknown system field")
            resolved["system"][field] = _check_value(key, value, _SYSTEM_FIELDS[field][1])
        elif key in _TIMING_OVERRIDES:
            resolved[key] = _check_value(key, value, _TIMING_OVERRIDES[key])
        elif key == "initial_state":
            resolved_value = _check_value(key, value, "state_label")
            for run in resolved["runs"]:
                run["initial_state"] = resolved_value
        elif key == "drive_scale":
            scale = _check_value(key, value, "positive")
            for run in resolved["runs"]:
                for drive in run["drives"]:
                    drive["g_eff_mhz"] *= scale
        else:
            raise ConfigError(
                f"{key}: unknown override (supported: system.<field>, duration_us, "
                "measure_window_us, sample_dt_us, initial_state, drive_scale)"
            )


def build_preset(
    name: str, overrides: Mapping[str, Any] | None = None
) -> tuple[ExperimentPreset, dict]:
    """Materialize a preset template (plus overrides) into runnable objects.

    Returns the preset and the resolved template dict (for the config echo).
    """
    if name not in _TEMPLATES:
        raise ValueError(f"unknown preset {name!r}; available: {PRESET_NAMES}")
    resolved = _TEMPLATES[name]()
    if overrides:
        _apply_overrides(resolved, dict(overrides))
    # Route the system section through the config validator so overrides
    # cannot smuggle in an inconsistent parameter set.
    cfg = resolve_config({"system": resolved["system"]})
    spec = cfg.system_spec()
    runs = tuple(
        PresetRun(
            label=run["label"],
            initial_state=run["initial_state"],
            drives=tuple(
                DriveSpec(
                    kind=DriveKind(d["kind"]),
                    g_eff=d["g_eff_mhz"],
                    phase=d["phase_rad"],
                    detuning=d["detuning_mhz"],
                )
                for d in run["drives"]
            ),
        )
        for run in resolved["runs"]
    )
    preset = ExperimentPreset(
        name=name,
        spec=spec,
        sequence=PulseSequence((Segment(runs[0].drives, resolved["duration_us"]),)),
        sweep_axes=resolved["sweep_axes"],
        runs=runs,
        measure_window_us=resolved["measure_window_us"],
        sample_dt_us=resolved["sample_dt_us"],
        fit_model=resolved["fit"]["model"],
        fit_joint=resolved["fit"]["joint"],
    )
    return preset, resolved


# ----------------------------------------------------------------- execution


def _pumped_slice(traj: Trajectory, duration_us: float):
    times = np.asarray(traj.times)
    mask = times <= duration_us + 1e-12
    return times[mask], mask


def _fit_two_level(traj: Trajectory, duration_us: float) -> FitResult:
    times, mask = _pumped_slice(traj, duration_us)
    return fit_rates_2level((times, np.asarray(traj.populations["g"])[mask]))


def _fit_three_level(trajs: list[Trajectory], duration_us: float) -> FitResult:
    data = []
    for traj in trajs:
        times, mask = _pumped_slice(traj, duration_us)
        table = np.column_stack(
            [np.asarray(traj.populations[k])[mask] for k in ("g", "e", "fplus")]
        )
        data.append((times, table / table.sum(axis=1, keepdims=True)))
    return fit_rates_3level(data)


def run_preset(
    name: str,
    overrides: Mapping[str, Any] | None = None,
    out_dir: str | None = None,
    timestamp: str | None = None,
) -> RunReport:
    """Execute a preset end to end: evolve, fit, and (optionally) write files.

    With ``out_dir`` set, one CSV per run plus ``<name>_report.json`` are
    written there (the directory is created if needed).  The returned report
    echoes the fully resolved template and the overrides, which together
    reproduce the run exactly.
    """
    preset, resolved = build_preset(name, overrides)
    duration = resolved["duration_us"]
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)

    trajectories_meta = []
    kept: list[tuple[str, Trajectory]] = []
    for run in preset.runs:
        sequence = PulseSequence((Segment(run.drives, duration),))
        traj = run_sequence(
            preset.spec,
            sequence,
            run.initial_state,
            sample_dt=preset.sample_dt_us,
            measure_window_us=preset.measure_window_us,
        )
        csv_name = None
        if out_dir is not None:
            csv_name = f"{name}_{run.label}.csv" if len(preset.runs) > 1 else f"{name}.csv"
            write_trajectory_csv(traj, os.path.join(out_dir, csv_name))
        trajectories_meta.append(trajectory_summary(run.label, traj, csv_name))
        kept.append((run.label, traj))

    fits_meta = []
    if preset.fit_model == "two_level":
        for label, traj in kept:
            fit = _fit_two_level(traj, duration)
            entry = fit_result_to_dict(fit)
            entry["trajectory"] = label
            fits_meta.append(entry)
    elif preset.fit_joint:
        fit = _fit_three_level([traj for _, traj in kept], duration)
        entry = fit_result_to_dict(fit)
        entry["trajectory"] = "joint"
        fits_meta.append(entry)
    else:
        for label, traj in kept:
            fit = _fit_three_level([traj], duration)
            entry = fit_result_to_dict(fit)
            entry["trajectory"] = label
            fits_meta.append(entry)

    report = RunReport(
        config_echo={
            "preset": name,
            "overrides": dict(overrides) if overrides else {},
            "resolved": resolved,
        },
        trajectories=trajectories_meta,
        fits=fits_meta,
        provenance=make_provenance(seed=None, timestamp=timestamp),
    )
    if out_dir is not None:
        write_report_json(report, os.path.join(out_dir, f"{name}_report.json"))
    return report
