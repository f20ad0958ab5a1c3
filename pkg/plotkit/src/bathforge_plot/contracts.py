"""Readers for the bathforge file contracts, validated strictly.

Trajectory CSV: header ``time_us,P_g,P_e,P_fplus,P_snail0,P_snail1,trace_err``,
one numeric row per sample.  Run report JSON: an object with keys
``config_echo``, ``trajectories``, ``fits``, ``provenance``.  Violations
raise :class:`ContractError` naming the offending column, line, or key —
nothing is ever written when an input is rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

CSV_COLUMNS = ("time_us", "P_g", "P_e", "P_fplus", "P_snail0", "P_snail1", "trace_err")
REPORT_KEYS = ("config_echo", "trajectories", "fits", "provenance")


class ContractError(ValueError):
    """An input file does not follow the documented bathforge contract."""


@dataclass(frozen=True)
class TrajectoryTable:
    """One parsed trajectory CSV."""

    path: str
    times: np.ndarray
    columns: dict  # column name -> 1-D array, population columns only

    @property
    def n_samples(self) -> int:
        return int(self.times.size)

    def final(self, column: str) -> float:
        return float(self.columns[column][-1])


def read_trajectory(path: str) -> TrajectoryTable:
    """Parse and validate one trajectory CSV."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().split("\n") if ln.strip()]
    if not lines:
        raise ContractError(
            f"{path}: empty file, expected header {','.join(CSV_COLUMNS)!r}"
        )
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
        raise ContractError(f"{path}: bad CSV header: " + "; ".join(problems))
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise ContractError(
                f"{path}: line {i} has {len(parts)} fields, expected {len(CSV_COLUMNS)}"
            )
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ContractError(f"{path}: line {i}: non-numeric field") from None
    if not rows:
        raise ContractError(f"{path}: no data rows")
    table = np.asarray(rows, dtype=float)
    times = table[:, 0]
    if np.any(np.diff(times) < 0):
        raise ContractError(f"{path}: time_us must be nondecreasing")
    columns = {name: table[:, j] for j, name in enumerate(CSV_COLUMNS) if j > 0}
    return TrajectoryTable(path=path, times=times, columns=columns)


def read_report(path: str) -> dict:
    """Parse and validate one run-report JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ContractError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(obj, dict):
        raise ContractError(f"{path}: not a run report (expected a JSON object)")
    for key in REPORT_KEYS:
        if key not in obj:
            raise ContractError(f"{path}: not a run report (missing {key!r})")
    return obj
