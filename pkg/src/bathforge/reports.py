"""File output contracts: trajectory CSV and the JSON run report.

CSV contract (fixed): header ``time_us,P_g,P_e,P_fplus,P_snail0,P_snail1,trace_err``,
one row per sample, values printed with 12 significant digits, ``.`` decimal
separator, LF line endings.  Writing is atomic (temp file + rename), so a
failed run never leaves a partial CSV behind.  If the auxiliary mode holds
more than two levels, the two snail columns still report levels 0 and 1 only;
``trace_err`` certifies the full state regardless.

The JSON run report carries the resolved configuration echo (sufficient to
reproduce the run bit-identically with the same build), per-trajectory
summaries, fit results, and provenance.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from . import __version__
from .dynamics import Trajectory
from .estimation import FitResult

CSV_COLUMNS = ("time_us", "P_g", "P_e", "P_fplus", "P_snail0", "P_snail1", "trace_err")
CSV_HEADER = ",".join(CSV_COLUMNS)

_POPULATION_KEYS = ("g", "e", "fplus", "snail0", "snail1")


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _atomic_write(path: str, text: str) -> None:
    """Write text then rename into place, so readers never see partial files."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def trajectory_csv_text(traj: Trajectory) -> str:
    """Render a trajectory to the exact CSV contract, deterministically."""
    pops = traj.populations
    columns = [np.asarray(traj.times, dtype=float)]
    for key in _POPULATION_KEYS:
        if key in pops:
            columns.append(np.asarray(pops[key], dtype=float))
        else:
            columns.append(np.zeros_like(columns[0]))
    columns.append(np.asarray(traj.trace_error, dtype=float))
    lines = [CSV_HEADER]
    for row in zip(*columns):
        lines.append(",".join(_fmt(x) for x in row))
    return "\n".join(lines) + "\n"


def write_trajectory_csv(traj: Trajectory, path: str) -> None:
    _atomic_write(path, trajectory_csv_text(traj))


def read_trajectory_csv(path: str) -> tuple[np.ndarray, dict[str, np.ndarray], np.ndarray]:
    """Read a contract CSV back into (times, populations, trace_err).

    Raises ValueError naming the missing/misnamed column if the header does
    not match the contract exactly.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().split("\n") if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty file, expected header {CSV_HEADER!r}")
    header = tuple(h.strip() for h in lines[0].split(","))
    if header != CSV_COLUMNS:
        missing = [c for c in CSV_COLUMNS if c not in header]
        extra = [c for c in header if c not in CSV_COLUMNS]
        problems = []
        if missing:
            problems.append(f"missing column(s) {missing}")
        if extra:
            problems.append(f"unexpected column(s) {extra}")
        if not problems:
            problems.append(f"column order must be {list(CSV_COLUMNS)}")
        raise ValueError(f"{path}: bad CSV header: " + "; ".join(problems))
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise ValueError(
                f"{path}: line {i} has {len(parts)} fields, expected {len(CSV_COLUMNS)}"
            )
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ValueError(f"{path}: line {i}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    table = np.array(rows, dtype=float)
    times = table[:, 0]
    populations = {key: table[:, 1 + j] for j, key in enumerate(_POPULATION_KEYS)}
    return times, populations, table[:, -1]


# ------------------------------------------------------------ the run report


def fit_result_to_dict(fit: FitResult) -> dict:
    two_level = (
        not any(name.endswith(("ef", "fe")) for name in fit.param_names)
        and fit.params.get("ef") == 0.0
        and fit.params.get("fe") == 0.0
    )
    rate_keys = ("ge", "eg") if two_level else ("ge", "eg", "ef", "fe")
    return {
        "rates_mhz": {k: float(fit.params.get(k)) for k in rate_keys},
        "param_names": list(fit.param_names),
        "covariance_diag": [float(v) for v in fit.covariance_diag],
        "initial_conditions": [float(v) for v in fit.initial_conditions],
        "residual_rms": float(fit.residual_rms),
        "gradient_norm": float(fit.gradient_norm),
        "converged": bool(fit.converged),
        "iterations": int(fit.iterations),
        "seed": fit.seed,
    }


def trajectory_summary(label: str, traj: Trajectory, csv_name: str | None) -> dict:
    finals = traj.final_populations
    return {
        "label": label,
        "csv": csv_name,
        "n_samples": int(len(traj.times)),
        "t_final_us": float(traj.times[-1]),
        "final_populations": {k: float(v) for k, v in sorted(finals.items())},
        "max_trace_err": float(np.max(traj.trace_error)),
    }


@dataclass(frozen=True)
class RunReport:
    """Everything needed to audit and reproduce one run."""

    config_echo: dict
    trajectories: list = field(default_factory=list)
    fits: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config_echo": self.config_echo,
            "trajectories": self.trajectories,
            "fits": self.fits,
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def make_provenance(seed: int | None = None, timestamp: str | None = None) -> dict:
    """Provenance block; timestamp is injectable so tests can pin it."""
    if timestamp is None:
        import datetime

        timestamp = (
            datetime.datetime.now(datetime.timezone.utc).replace(microsecond=0).isoformat()
        )
    return {"tool": "bathforge", "version": __version__, "seed": seed, "created_utc": timestamp}


def write_report_json(report: RunReport, path: str) -> None:
    _atomic_write(path, report.to_json())


def load_report(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    for key in ("config_echo", "trajectories", "fits", "provenance"):
        if key not in obj:
            raise ValueError(f"{path}: not a run report (missing {key!r})")
    return obj
