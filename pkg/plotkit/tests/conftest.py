"""Shared fixture helpers: hand-built trajectory CSVs and run reports.

Everything here writes the file formats directly so the plotting package
is exercised purely through its file contracts.
"""

from __future__ import annotations

import json

import numpy as np
import pytest

HEADER = "time_us,P_g,P_e,P_fplus,P_snail0,P_snail1,trace_err"


def write_trajectory(path, times, p_g, p_e=None, p_fplus=None):
    """Write a trajectory CSV; missing populations default to the remainder."""
    times = np.asarray(times, dtype=float)
    p_g = np.asarray(p_g, dtype=float)
    p_fplus = np.zeros_like(p_g) if p_fplus is None else np.asarray(p_fplus, dtype=float)
    p_e = 1.0 - p_g - p_fplus if p_e is None else np.asarray(p_e, dtype=float)
    lines = [HEADER]
    for i in range(len(times)):
        lines.append(
            f"{times[i]:.12g},{p_g[i]:.12g},{p_e[i]:.12g},{p_fplus[i]:.12g},1.0,0.0,0.0"
        )
    path.write_text("\n".join(lines) + "\n")
    return path


def exponential_decay(rate_mhz, *, lifetimes=12.0, n=241, floor=0.0):
    """(times, P_g) for P_g = floor + (1-floor) * exp(-2 pi rate t)."""
    t_final = lifetimes / (2.0 * np.pi * rate_mhz)
    times = np.linspace(0.0, t_final, n)
    p_g = floor + (1.0 - floor) * np.exp(-2.0 * np.pi * rate_mhz * times)
    return times, p_g


def write_report(path, rows, *, config_echo=None, fits=None):
    """Write a run report JSON with the four required top-level keys."""
    payload = {
        "config_echo": config_echo or {},
        "trajectories": rows,
        "fits": fits or [],
        "provenance": {"package": "test", "version": "0"},
    }
    path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
    return path


@pytest.fixture
def decay_csv(tmp_path):
    """One clean exponential decay at 0.05 MHz."""
    times, p_g = exponential_decay(0.05)
    return write_trajectory(tmp_path / "decay.csv", times, p_g)


@pytest.fixture
def quadratic_family(tmp_path):
    """CSVs whose decay rates follow rate = A_TRUE * g^2 exactly."""
    a_true = 0.3082
    amplitudes = (0.2, 0.3, 0.4, 0.5)
    pairs = []
    for g in amplitudes:
        times, p_g = exponential_decay(a_true * g * g)
        path = write_trajectory(tmp_path / f"amp{g}.csv", times, p_g)
        pairs.append((g, path))
    return a_true, pairs
