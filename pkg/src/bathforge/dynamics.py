"""Time evolution and steady states of the driven dissipative system.

The generator is assembled once per call as a static part plus oscillating
terms, L(t) = L0 + sum_k (e^{i w_k t} L_k+ + e^{-i w_k t} L_k-), acting on
column-stacked density matrices.  Four stepping strategies are available:

* ``rk45`` / ``dop853``: adaptive Runge-Kutta on vec(rho), always valid;
* ``expm``: exact matrix-exponential stepping, static generators only;
* ``periodic``: integrates the one-period propagator of a commensurate
  time-periodic generator once, then reaches long times by matrix powers
  (with dense interpolation inside a period).  This is the workhorse for
  e-f pumped runs, whose generator oscillates at the anharmonicity: direct
  stepping would need ~1e5 steps per microsecond there.

``auto`` picks expm for static generators, the periodic propagator for
commensurate oscillating ones spanning many periods, and rk45 otherwise.

Times are microseconds; hamiltonian/dissipator construction is delegated to
the model layer, which converts MHz inputs to angular rad/us.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from types import MappingProxyType
from typing import Any, Callable, Mapping, Sequence

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from .core import (
    DensityMatrix,
    HilbertSpace,
    Operator,
    SuperOperator,
    basis_state,
    ladder,
    liouvillian,
    projector,
    unvectorize,
    vectorize,
)
from .model import DriveSpec, SystemSpec, build_dissipators, hamiltonian_terms

#: samples may undershoot 0 or overshoot 1 by at most this much
POPULATION_TOL = 1e-6
#: relative eigenvalue threshold separating "stationary" from "decaying"
NULLSPACE_TOL = 1e-10
#: steady-state residual bound, relative to the generator's Frobenius norm
RESIDUAL_TOL = 1e-8

_QUBIT_LETTERS = {"g": 0, "e": 1, "f": 2, "h": 3}

_INTEGRATOR_NAMES = {"rk45": "RK45", "dop853": "DOP853"}


@dataclass(frozen=True)
class Trajectory:
    """Sampled populations along one evolution.

    ``populations`` maps label -> array over ``times``: qubit levels under
    ``"g"``, ``"e"`` and ``"fplus"`` (everything at or above the second
    excited level; identically zero for a two-level qubit), snail occupation
    under ``"snail0"``, ``"snail1"``, ...  ``trace_error`` records |tr-1|
    per sample as an integration-quality diagnostic.  ``segment_edges`` are
    the cumulative boundary times of the pulse segments that produced the
    run (always starting at 0.0 and ending at the final time).
    """

    times: np.ndarray
    populations: Mapping[str, np.ndarray]
    trace_error: np.ndarray
    rho_final: DensityMatrix
    segment_edges: tuple[float, ...]

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.size == 0:
            raise ValueError("times must be a nonempty 1-D array")
        if np.any(np.diff(times) < 0):
            raise ValueError("times must be nondecreasing")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        pops = {}
        for key, arr in dict(self.populations).items():
            arr = np.asarray(arr, dtype=float)
            if arr.shape != times.shape:
                raise ValueError(
                    f"population '{key}' has shape {arr.shape}, expected {times.shape}"
                )
            if np.any(arr < -POPULATION_TOL) or np.any(arr > 1.0 + POPULATION_TOL):
                raise ValueError(
                    f"population '{key}' leaves [0, 1] beyond tolerance "
                    f"(range [{arr.min():.3e}, {arr.max():.3e}])"
                )
            arr.setflags(write=False)
            pops[key] = arr
        object.__setattr__(self, "populations", MappingProxyType(pops))
        terr = np.asarray(self.trace_error, dtype=float)
        if terr.shape != times.shape or np.any(terr < 0):
            raise ValueError("trace_error must be nonnegative and aligned with times")
        terr.setflags(write=False)
        object.__setattr__(self, "trace_error", terr)
        edges = tuple(float(x) for x in self.segment_edges)
        if len(edges) < 2 or any(b < a for a, b in zip(edges, edges[1:])):
            raise ValueError("segment_edges must be nondecreasing with >= 2 entries")
        object.__setattr__(self, "segment_edges", edges)

    @property
    def final_populations(self) -> dict[str, float]:
        return {key: float(arr[-1]) for key, arr in self.populations.items()}


@dataclass(frozen=True)
class Segment:
    """One pulse-sequence step: a drive configuration held for a duration (us)."""

    drives: tuple[DriveSpec, ...]
    duration: float

    def __post_init__(self):
        object.__setattr__(self, "drives", tuple(self.drives))
        if self.duration < 0:
            raise ValueError(f"segment duration must be >= 0, got {self.duration}")


@dataclass(frozen=True)
class PulseSequence:
    segments: tuple[Segment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @property
    def total_duration(self) -> float:
        return sum(seg.duration for seg in self.segments)


def initial_state(spec: SystemSpec, label: str) -> DensityMatrix:
    """Product basis state from a '<snail>,<qubit>' label, e.g. '0,g' or '1,e'.

    The qubit entry is a level letter (g, e, f, h) or an integer.
    """
    parts = [p.strip() for p in str(label).split(",")]
    if len(parts) != 2:
        raise ValueError(f"state label must look like '0,g', got {label!r}")
    try:
        n_snail = int(parts[0])
    except ValueError:
        raise ValueError(f"snail occupation must be an integer, got {parts[0]!r}") from None
    q_part = parts[1].lower()
    if q_part in _QUBIT_LETTERS:
        n_qubit = _QUBIT_LETTERS[q_part]
    else:
        try:
            n_qubit = int(q_part)
        except ValueError:
            raise ValueError(f"unknown qubit level {parts[1]!r}") from None
    return basis_state(spec.dims, (n_snail, n_qubit))


# --------------------------------------------------------- generator pieces

def _hamiltonian_superop(A: np.ndarray) -> np.ndarray:
    dim = A.shape[0]
    eye = np.eye(dim)
    return -1j * (np.kron(eye, A) - np.kron(A.T, eye))


class _Pieces:
    """Precomputed generator: L(t) = L0 + sum e^{iwt} Lp + e^{-iwt} Lm."""

    def __init__(self, spec: SystemSpec, drives: Sequence[DriveSpec], stark_shift_mhz: float):
        H0, osc = hamiltonian_terms(spec, drives, stark_shift_mhz)
        channels = build_dissipators(spec)
        self.space = spec.dims
        self.L0 = liouvillian(Operator(spec.dims, H0), channels).matrix
        self.terms = tuple(
            (w, _hamiltonian_superop(A), _hamiltonian_superop(A.conj().T)) for w, A in osc
        )

    @property
    def static(self) -> bool:
        return not self.terms

    def at(self, t: float) -> np.ndarray:
        L = self.L0.copy()
        for w, Lp, Lm in self.terms:
            phase = np.exp(1j * w * t)
            L += phase * Lp + np.conj(phase) * Lm
        return L

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        out = self.L0 @ y
        for w, Lp, Lm in self.terms:
            phase = np.exp(1j * w * t)
            out += phase * (Lp @ y) + np.conj(phase) * (Lm @ y)
        return out

    def base_period(self) -> float | None:
        """Common period of the oscillating terms, or None if incommensurate."""
        if not self.terms:
            return None
        w_min = min(abs(w) for w, _, _ in self.terms)
        for w, _, _ in self.terms:
            ratio = w / w_min
            if abs(ratio - round(ratio)) > 1e-9 * max(1.0, abs(ratio)) or round(ratio) == 0:
                return None
        return 2.0 * np.pi / w_min


# --------------------------------------------------------------- propagation

def _populations_from_vec(y: np.ndarray, space: HilbertSpace) -> tuple[dict[str, float], float]:
    d_s, d_q = space.mode_dims
    rho = unvectorize(y, space.dim)
    diag = np.real(np.diag(rho)).reshape(d_s, d_q)
    trace_err = abs(float(np.real(np.trace(rho))) - 1.0) + abs(float(np.imag(np.trace(rho))))
    pops = {
        "g": float(diag[:, 0].sum()),
        "e": float(diag[:, 1].sum()) if d_q > 1 else 0.0,
        "fplus": float(diag[:, 2:].sum()) if d_q > 2 else 0.0,
    }
    for m in range(d_s):
        pops[f"snail{m}"] = float(diag[m, :].sum())
    return pops, trace_err


def _assemble_trajectory(
    times: np.ndarray,
    vecs: list[np.ndarray],
    space: HilbertSpace,
    segment_edges: tuple[float, ...],
) -> Trajectory:
    keys = None
    rows = []
    trace_err = []
    for y in vecs:
        pops, terr = _populations_from_vec(y, space)
        if keys is None:
            keys = list(pops)
        rows.append([pops[k] for k in keys])
        trace_err.append(terr)
    table = np.array(rows)
    populations = {k: table[:, i] for i, k in enumerate(keys)}
    rho = unvectorize(vecs[-1], space.dim)
    rho = 0.5 * (rho + rho.conj().T)
    tr = float(np.real(np.trace(rho)))
    if abs(tr - 1.0) > 1e-6:
        raise ArithmeticError(f"integration lost trace normalization: tr = {tr}")
    rho_final = DensityMatrix(space, rho / tr)
    return Trajectory(
        times=times,
        populations=populations,
        trace_error=np.array(trace_err),
        rho_final=rho_final,
        segment_edges=segment_edges,
    )


def _sample_times(t_final: float, sample_dt: float | None, t_eval) -> np.ndarray:
    if t_eval is not None:
        times = np.asarray(t_eval, dtype=float)
        if times.ndim != 1 or times.size == 0:
            raise ValueError("t_eval must be a nonempty 1-D array")
        if np.any(np.diff(times) < 0) or times[0] < 0 or times[-1] > t_final * (1 + 1e-12):
            raise ValueError("t_eval must be nondecreasing within [0, t_final]")
        return times
    if t_final == 0.0:
        return np.array([0.0])
    if sample_dt is None:
        n = 200
    else:
        if sample_dt <= 0:
            raise ValueError(f"sample_dt must be > 0, got {sample_dt}")
        n = max(1, math.ceil(t_final / sample_dt))
    return np.linspace(0.0, t_final, n + 1)


def _resolve_method(method: str, pieces: _Pieces, t_final: float) -> str:
    if method != "auto":
        return method
    if pieces.static:
        return "expm"
    period = pieces.base_period()
    if period is not None and t_final >= 20.0 * period:
        return "periodic"
    return "rk45"


def _propagate_expm(pieces: _Pieces, y0: np.ndarray, times: np.ndarray) -> list[np.ndarray]:
    if not pieces.static:
        raise ValueError("matrix-exponential stepping requires a static generator")
    cache: dict[float, np.ndarray] = {}
    vecs = [y0]
    y = y0
    for dt in np.diff(times):
        dt = float(dt)
        if dt not in cache:
            cache[dt] = scipy.linalg.expm(pieces.L0 * dt)
        y = cache[dt] @ y
        vecs.append(y)
    return vecs


def _propagate_ivp(
    pieces: _Pieces,
    y0: np.ndarray,
    times: np.ndarray,
    method: str,
    rtol: float,
    atol: float,
) -> list[np.ndarray]:
    if times[-1] == times[0]:
        return [y0 for _ in times]
    sol = solve_ivp(
        pieces.rhs,
        (times[0], times[-1]),
        y0,
        t_eval=times,
        method=_INTEGRATOR_NAMES[method],
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise ArithmeticError(f"integration failed: {sol.message}")
    return [sol.y[:, i] for i in range(sol.y.shape[1])]


def _propagate_periodic(pieces: _Pieces, y0: np.ndarray, times: np.ndarray) -> list[np.ndarray]:
    period = pieces.base_period()
    if period is None:
        raise ValueError(
            "periodic stepping requires commensurate oscillating terms; "
            "use rk45/dop853 for this generator"
        )
    dim2 = pieces.L0.shape[0]
    eye = np.eye(dim2, dtype=np.complex128)

    def mat_rhs(t, y):
        return (pieces.at(t) @ y.reshape(dim2, dim2)).ravel()

    sol = solve_ivp(
        mat_rhs,
        (0.0, period),
        eye.ravel(),
        method="DOP853",
        rtol=1e-11,
        atol=1e-13,
        dense_output=True,
    )
    if not sol.success:
        raise ArithmeticError(f"one-period propagator integration failed: {sol.message}")
    monodromy = sol.y[:, -1].reshape(dim2, dim2)

    vecs = []
    v = y0.astype(np.complex128)
    n_applied = 0
    for t in times:
        n = int(np.floor(t / period + 1e-9))
        r = t - n * period
        if r < 0.0:
            r = 0.0
        while n_applied < n:
            v = monodromy @ v
            n_applied += 1
        if r <= 1e-12 * max(1.0, period):
            vecs.append(v.copy())
        else:
            vecs.append(sol.sol(r).reshape(dim2, dim2) @ v)
    return vecs


def evolve(
    spec: SystemSpec,
    drives: Sequence[DriveSpec],
    rho0: DensityMatrix | str,
    t_final: float,
    *,
    sample_dt: float | None = None,
    t_eval=None,
    method: str = "auto",
    rtol: float = 1e-8,
    atol: float = 1e-10,
    stark_shift_mhz: float = 0.0,
) -> Trajectory:
    """Integrate the master equation from rho0 for t_final microseconds.

    ``method`` is one of auto / rk45 / dop853 / expm / periodic (see module
    docstring).  Sampling defaults to 200 uniform intervals; pass
    ``sample_dt`` or an explicit ``t_eval`` grid to override.
    """
    if t_final < 0:
        raise ValueError(f"t_final must be >= 0, got {t_final}")
    if method not in ("auto", "rk45", "dop853", "expm", "periodic"):
        raise ValueError(f"unknown method {method!r}")
    if isinstance(rho0, str):
        rho0 = initial_state(spec, rho0)
    if rho0.space != spec.dims:
        raise ValueError("initial state lives on a different space than the system")
    pieces = _Pieces(spec, drives, stark_shift_mhz)
    times = _sample_times(t_final, sample_dt, t_eval)
    y0 = vectorize(rho0.matrix)
    resolved = _resolve_method(method, pieces, t_final)
    if resolved == "expm":
        vecs = _propagate_expm(pieces, y0, times)
    elif resolved == "periodic":
        vecs = _propagate_periodic(pieces, y0, times)
    else:
        vecs = _propagate_ivp(pieces, y0, times, resolved, rtol, atol)
    return _assemble_trajectory(times, vecs, spec.dims, (0.0, float(t_final)))


def run_sequence(
    spec: SystemSpec,
    sequence: PulseSequence | Sequence[Segment],
    rho0: DensityMatrix | str = "0,g",
    *,
    sample_dt: float = 0.05,
    measure_window_us: float = 0.0,
    method: str = "auto",
    rtol: float = 1e-8,
    atol: float = 1e-10,
) -> Trajectory:
    """Run pulse segments back to back, then an optional drive-free window.

    The measurement window models the delay between switching the pumps off
    and reading the qubit out: the state relaxes under the undriven generator
    for ``measure_window_us`` before the final sample.  Segment boundaries
    (including the window) are reported in ``segment_edges``.
    """
    if isinstance(sequence, PulseSequence):
        segments = list(sequence.segments)
    else:
        segments = [seg if isinstance(seg, Segment) else Segment(*seg) for seg in sequence]
    if measure_window_us < 0:
        raise ValueError(f"measure_window_us must be >= 0, got {measure_window_us}")
    if measure_window_us > 0:
        segments.append(Segment((), measure_window_us))
    segments = [seg for seg in segments if seg.duration > 0]
    if isinstance(rho0, str):
        rho = initial_state(spec, rho0)
    else:
        rho = rho0
    if not segments:
        traj = evolve(spec, (), rho, 0.0, method="expm")
        return traj

    all_times: list[np.ndarray] = []
    pop_chunks: list[Mapping[str, np.ndarray]] = []
    terr_chunks: list[np.ndarray] = []
    edges = [0.0]
    offset = 0.0
    last = None
    for seg in segments:
        traj = evolve(
            spec,
            seg.drives,
            rho,
            seg.duration,
            sample_dt=sample_dt,
            method=method,
            rtol=rtol,
            atol=atol,
        )
        skip = 1 if all_times else 0  # boundary sample already recorded
        all_times.append(traj.times[skip:] + offset)
        pop_chunks.append({k: v[skip:] for k, v in traj.populations.items()})
        terr_chunks.append(traj.trace_error[skip:])
        offset += seg.duration
        edges.append(offset)
        rho = traj.rho_final
        last = traj
    times = np.concatenate(all_times)
    populations = {
        k: np.concatenate([chunk[k] for chunk in pop_chunks]) for k in pop_chunks[0]
    }
    trace_error = np.concatenate(terr_chunks)
    return Trajectory(
        times=times,
        populations=populations,
        trace_error=trace_error,
        rho_final=last.rho_final,
        segment_edges=tuple(edges),
    )


# ------------------------------------------------------------- steady states

def steady_state_from_liouvillian(L: SuperOperator) -> DensityMatrix:
    """Unique stationary density matrix of a static generator.

    Finds the eigenvector at the (single) zero eigenvalue, symmetrizes and
    normalizes it, and verifies the residual.  Raises if the stationary
    subspace is degenerate, if the candidate is not a physical state, or if
    the residual exceeds the documented bound.
    """
    mat = L.matrix
    vals, vecs = scipy.linalg.eig(mat)
    order = np.argsort(np.abs(vals))
    scale = max(1.0, float(np.max(np.abs(vals))))
    n_null = int(np.sum(np.abs(vals) <= NULLSPACE_TOL * scale))
    if n_null == 0:
        raise ArithmeticError(
            f"no stationary state: smallest eigenvalue magnitude is "
            f"{np.abs(vals[order[0]]):.3e} against scale {scale:.3e}"
        )
    if n_null > 1:
        raise ArithmeticError(
            f"stationary subspace is degenerate ({n_null} eigenvalues within "
            f"tolerance); the steady state is not unique"
        )
    dim = L.space.dim
    rho = unvectorize(vecs[:, order[0]], dim)
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho)
    if abs(tr) < 1e-12:
        raise ArithmeticError("stationary eigenvector is traceless; not a state")
    rho = rho / tr
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < -1e-8:
        raise ArithmeticError(
            f"stationary candidate has negative eigenvalue {evals.min():.3e}"
        )
    if evals.min() < 0.0:
        w, V = np.linalg.eigh(rho)
        w = np.clip(w, 0.0, None)
        rho = (V * w) @ V.conj().T
        rho = rho / np.trace(rho)
    residual = float(np.linalg.norm(mat @ vectorize(rho)))
    bound = RESIDUAL_TOL * max(1.0, float(np.linalg.norm(mat)))
    if residual > bound:
        raise ArithmeticError(
            f"steady-state residual {residual:.3e} exceeds bound {bound:.3e}"
        )
    return DensityMatrix(L.space, rho)


def _secular_generator(
    spec: SystemSpec, drives: Sequence[DriveSpec], stark_shift_mhz: float = 0.0
) -> SuperOperator:
    """Static generator in the qubit level-energy frame.

    Valid for resonant drives: the frame rotation at the anharmonicity makes
    every drive term static and is absorbed into the level energies.  The
    price is that the bosonic qubit dissipator must be split into per-
    transition channels (its cross terms oscillate at the anharmonicity and
    average away; their magnitude relative to the kept part is of order
    rate/anharmonicity, ~1e-4 at the default operating point).
    """
    space = spec.dims
    for d in drives:
        if d.detuning != 0.0:
            raise ValueError(
                "time-averaged steady state is defined for resonant drives only; "
                f"got detuning {d.detuning} on {d.kind.value}"
            )
    H0, osc = hamiltonian_terms(spec, drives, stark_shift_mhz)
    # strip the anharmonic ladder shift (absorbed by the frame); the drive
    # terms and any diagonal Stark contribution survive unchanged
    H = H0 - hamiltonian_terms(spec, ())[0]
    for _, A in osc:
        H = H + A + A.conj().T
    channels: list[tuple[float, Operator]] = []
    s = ladder(space, "snail")
    two_pi = 2.0 * np.pi
    if spec.kappa_s > 0:
        channels.append((two_pi * spec.kappa_s * (spec.nbar_s + 1.0), s))
        if spec.nbar_s > 0:
            channels.append((two_pi * spec.kappa_s * spec.nbar_s, s.dag()))
    for n in range(spec.qubit_dim - 1):
        if spec.kappa_q_down > 0:
            channels.append(
                (two_pi * spec.kappa_q_down * (n + 1), projector(space, "qubit", n, n + 1))
            )
        if spec.kappa_q_up > 0:
            channels.append(
                (two_pi * spec.kappa_q_up * (n + 1), projector(space, "qubit", n + 1, n))
            )
    return liouvillian(Operator(space, H), channels)


def steady_state(
    spec: SystemSpec,
    drives: Sequence[DriveSpec] = (),
    *,
    time_average: bool = False,
    stark_shift_mhz: float = 0.0,
) -> DensityMatrix:
    """Stationary state of the driven system.

    With ``time_average=False`` the generator must be genuinely static (no
    e-f drives, no detuned drives); otherwise a ValueError points at the
    flag.  With ``time_average=True`` the stationary state of the secular
    (level-energy frame) generator is returned, accurate to order
    rate/anharmonicity for resonant drives.
    """
    if time_average:
        return steady_state_from_liouvillian(_secular_generator(spec, drives, stark_shift_mhz))
    pieces = _Pieces(spec, drives, stark_shift_mhz)
    if not pieces.static:
        raise ValueError(
            "the generator is time-dependent for these drives; "
            "pass time_average=True for the secular steady state"
        )
    return steady_state_from_liouvillian(SuperOperator(spec.dims, pieces.L0))


# -------------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class SweepResult:
    point: Mapping[str, Any]
    ok: bool
    value: Any = None
    error: str | None = None


def sweep(
    runner: Callable[..., Any],
    points: Sequence[Mapping[str, Any]],
    *,
    threads: int | None = None,
) -> list[SweepResult]:
    """Evaluate runner(**point) over a parameter grid.

    Results come back in input order.  A point that raises is isolated: its
    entry carries ok=False and the error message, and the other points still
    run.  Thread count comes from the argument, else the BATHFORGE_THREADS
    environment variable, else a small default; the work is numpy-bound, so
    threads (not processes) are enough to overlap the linear algebra.
    """
    points = [dict(p) for p in points]
    if not points:
        raise ValueError("sweep needs at least one point")
    if threads is None:
        env = os.environ.get("BATHFORGE_THREADS", "")
        threads = int(env) if env.strip() else min(len(points), os.cpu_count() or 1, 8)
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")

    def one(point):
        try:
            return SweepResult(point=MappingProxyType(point), ok=True, value=runner(**point))
        except Exception as exc:  # noqa: BLE001 - isolation is the contract
            return SweepResult(
                point=MappingProxyType(point), ok=False, error=f"{type(exc).__name__}: {exc}"
            )

    if threads == 1 or len(points) == 1:
        return [one(p) for p in points]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, points))
