"""Figure jobs: a declarative request plus a deterministic renderer.

Three figure kinds:

``populations``
    Level populations versus time from one or more trajectory CSVs.
``scaling``
    Relaxation/excitation rate versus drive amplitude, with the quadratic
    law fitted and its r² reported in the legend.  Inputs are either
    ``AMPLITUDE=trajectory.csv`` pairs or a single sweep-report JSON.
``steady_ratio``
    Final (steady) populations versus drive amplitude, same input forms.

Rendering is read-only over inputs and deterministic: identical inputs
produce byte-identical SVG output (fixed hash salt, no timestamps).  The
output file is written atomically, and never written at all when an input
fails validation.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .contracts import ContractError, TrajectoryTable, read_report, read_trajectory

KINDS = ("populations", "scaling", "steady_ratio")

# One color per qubit level, identical across every figure kind.
LEVEL_COLORS = {"P_g": "C0", "P_e": "C1", "P_fplus": "C2"}
LEVEL_LABELS = {"P_g": "$P_g$", "P_e": "$P_e$", "P_fplus": "$P_{f^+}$"}

_RCPARAMS = {
    "svg.hashsalt": "bathforge-plot",
    "svg.fonttype": "none",
    "figure.figsize": (6.4, 4.0),
    "axes.grid": True,
    "grid.alpha": 0.3,
}


@dataclass(frozen=True)
class PlotJob:
    """One figure request.

    ``inputs`` are file paths; for the amplitude-keyed kinds each entry may
    be ``AMPLITUDE=path.csv``, or a single run-report JSON may stand for the
    whole set.  ``output`` must end in a vector suffix (.svg or .pdf).
    """

    kind: str
    inputs: tuple[str, ...]
    output: str
    title: str | None = None
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not self.inputs:
            raise ValueError("a plot job needs at least one input file")
        ext = os.path.splitext(self.output)[1].lower()
        if ext not in (".svg", ".pdf"):
            raise ValueError(f"output must be vector format (.svg or .pdf), got {self.output!r}")


# ------------------------------------------------------------------ inputs


def _parse_amplitude_inputs(inputs: tuple[str, ...], kind: str) -> list[tuple[float, str]]:
    """Resolve inputs into (amplitude, csv path) pairs.

    Accepts explicit ``AMP=path`` entries, or a single ``*.json`` run report
    whose trajectory rows carry the sweep point and CSV name.
    """
    if len(inputs) == 1 and inputs[0].lower().endswith(".json"):
        report_path = inputs[0]
        report = read_report(report_path)
        base = os.path.dirname(os.path.abspath(report_path))
        pairs = []
        for i, row in enumerate(report["trajectories"]):
            if not isinstance(row, dict) or "point" not in row:
                raise ContractError(
                    f"{report_path}: trajectories[{i}] has no sweep point; "
                    f"a {kind} figure needs a sweep report or AMP=path inputs"
                )
            point = row["point"]
            if not isinstance(point, dict) or len(point) != 1:
                raise ContractError(
                    f"{report_path}: trajectories[{i}].point must hold exactly one value"
                )
            amplitude = float(next(iter(point.values())))
            csv_name = row.get("csv")
            if not csv_name:
                raise ContractError(
                    f"{report_path}: trajectories[{i}] names no CSV file "
                    "(rerun the sweep with an output directory)"
                )
            pairs.append((amplitude, os.path.join(base, csv_name)))
        if not pairs:
            raise ContractError(f"{report_path}: report contains no trajectories")
        return pairs
    pairs = []
    for entry in inputs:
        amp, sep, path = entry.partition("=")
        if not sep:
            raise ValueError(
                f"{kind} inputs must be AMPLITUDE=path.csv pairs or one report JSON, "
                f"got {entry!r}"
            )
        try:
            amplitude = float(amp)
        except ValueError:
            raise ValueError(f"bad amplitude in {entry!r}: {amp!r} is not a number") from None
        pairs.append((amplitude, path))
    return pairs


def _extract_rate_mhz(table: TrajectoryTable) -> float:
    """Relaxation rate of P_g toward its final value, in MHz.

    P_g approaches its stationary value as A * exp(-2 pi Gamma t) when one
    rate dominates, so the slope of ln|P_g(t) - P_g(end)| over the first
    decade of the approach gives -2 pi Gamma.  Works for pure decay
    (P_g -> 0) and for saturation (P_g -> plateau) alike.
    """
    p_g = table.columns["P_g"]
    times = table.times
    gap = p_g - p_g[-1]
    amplitude = gap[0]
    if abs(amplitude) < 1e-9:
        raise ContractError(
            f"{table.path}: P_g never moves from its final value; no rate to extract"
        )
    # Normalize so the approach starts at 1 and falls toward 0.
    approach = gap / amplitude
    keep = approach >= max(0.1, 1e-6 / abs(amplitude))
    if int(np.sum(keep)) < 3:
        raise ContractError(
            f"{table.path}: fewer than 3 samples in the initial approach of P_g"
        )
    slope = np.polyfit(times[keep], np.log(approach[keep]), 1)[0]
    rate = -slope / (2.0 * np.pi)
    if rate <= 0:
        raise ContractError(f"{table.path}: P_g does not relax; no rate to extract")
    return float(rate)


def _final_populations(amplitude_pairs: list[tuple[float, str]]):
    rows = []
    for amplitude, path in amplitude_pairs:
        table = read_trajectory(path)
        rows.append((amplitude, {k: table.final(k) for k in LEVEL_COLORS}))
    rows.sort(key=lambda r: r[0])
    return rows


# ---------------------------------------------------------------- rendering


def _atomic_savefig(fig, path: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    ext = os.path.splitext(path)[1].lower()
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=ext)
    os.close(fd)
    try:
        metadata = {"Date": None} if ext == ".svg" else {"CreationDate": None}
        fig.savefig(tmp, format=ext.lstrip("."), metadata=metadata)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _render_populations(job: PlotJob, ax) -> None:
    tables = [read_trajectory(path) for path in job.inputs]
    multi = len(tables) > 1
    linestyles = ("-", "--", ":", "-.")
    for i, table in enumerate(tables):
        stem = os.path.splitext(os.path.basename(table.path))[0]
        for column in ("P_g", "P_e", "P_fplus"):
            values = table.columns[column]
            if column == "P_fplus" and np.all(values == 0.0):
                continue  # two-level runs: omit the empty level
            label = LEVEL_LABELS[column] + (f" [{stem}]" if multi else "")
            ax.plot(
                table.times,
                values,
                color=LEVEL_COLORS[column],
                linestyle=linestyles[i % len(linestyles)],
                label=label,
            )
    ax.set_xlabel("time (µs)")
    ax.set_ylabel("population")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="best")


def _render_scaling(job: PlotJob, ax) -> None:
    pairs = _parse_amplitude_inputs(job.inputs, "scaling")
    if len(pairs) < 2:
        raise ValueError("a scaling figure needs at least two amplitudes")
    pairs.sort(key=lambda p: p[0])
    amplitudes = np.array([a for a, _ in pairs], dtype=float)
    rates = np.array([_extract_rate_mhz(read_trajectory(path)) for _, path in pairs])

    g2 = amplitudes**2
    a_coef = float(np.sum(rates * g2) / np.sum(g2**2))
    predicted = a_coef * g2
    ss_res = float(np.sum((rates - predicted) ** 2))
    ss_tot = float(np.sum((rates - rates.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot

    ax.plot(amplitudes, rates, "o", color="C3", label="extracted rates")
    g_fine = np.linspace(0.0, float(amplitudes.max()) * 1.05, 200)
    ax.plot(
        g_fine,
        a_coef * g_fine**2,
        "-",
        color="C0",
        label=f"fit $a\\,g^2$: a = {a_coef:.4g} MHz$^{{-1}}$, $r^2$ = {r2:.5f}",
    )
    ax.set_xlabel("drive amplitude $g_{eff}$ (MHz)")
    ax.set_ylabel("rate (MHz)")
    ax.legend(loc="best")


def _render_steady_ratio(job: PlotJob, ax) -> None:
    pairs = _parse_amplitude_inputs(job.inputs, "steady_ratio")
    rows = _final_populations(pairs)
    amplitudes = [a for a, _ in rows]
    for column in ("P_g", "P_e", "P_fplus"):
        values = [finals[column] for _, finals in rows]
        if column == "P_fplus" and all(v == 0.0 for v in values):
            continue
        ax.plot(
            amplitudes,
            values,
            "o-",
            color=LEVEL_COLORS[column],
            label=LEVEL_LABELS[column],
        )
    ax.set_xlabel("drive amplitude $g_{eff}$ (MHz)")
    ax.set_ylabel("steady population")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="best")


_RENDERERS = {
    "populations": _render_populations,
    "scaling": _render_scaling,
    "steady_ratio": _render_steady_ratio,
}


def render(job: PlotJob) -> str:
    """Render one job to its output path; returns the path written.

    All inputs are read and validated before the output file is created, so
    a rejected input never leaves a figure file behind.
    """
    with plt.rc_context(_RCPARAMS):
        fig, ax = plt.subplots()
        try:
            _RENDERERS[job.kind](job, ax)
            if job.title:
                ax.set_title(job.title)
            fig.tight_layout()
            _atomic_savefig(fig, job.output)
        finally:
            plt.close(fig)
    return job.output
