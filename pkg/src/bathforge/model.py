"""Physical system description and effective rotating-frame model assembly.

The qubit is described in the frame rotating at its g-e transition frequency
and the lossy snail mode in its own frame, so:

* g-e pumps (``SigmaGE``/``DeltaGE``) produce static coupling terms;
* e-f pumps (``SigmaEF``/``DeltaEF``) oscillate at the anharmonicity,
  carrying explicit e^{+/- i 2 pi alpha t} factors;
* the only static qubit term is the anharmonic ladder shift
  -alpha * n(n-1)/2 per level (zero on g and e, -alpha on f, ...).

A drive with ``detuning`` nonzero multiplies its creation-side term by an
additional e^{-i 2 pi detuning t}; ``phase`` multiplies it by e^{i phase}.

All public strengths/frequencies are linear (f = omega/2pi) in MHz; the
operators and rates handed to the Lindblad layer are angular (rad/us).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .core import TWO_PI, HilbertSpace, Operator, ladder, projector

#: default rotating-wave cutoff: comfortably above the anharmonicity-scale
#: oscillations that must be retained, far below the GHz mode frequencies.
RWA_CUTOFF_MHZ = 500.0


class DriveKind(str, enum.Enum):
    """Parametric pump processes on the two lowest qubit transitions.

    Sigma pumps (two-mode squeezing, snail+qubit pair creation) drive the
    qubit up; Delta pumps (mode conversion) drive it down.
    """

    SIGMA_GE = "SigmaGE"
    DELTA_GE = "DeltaGE"
    SIGMA_EF = "SigmaEF"
    DELTA_EF = "DeltaEF"


# per kind: (qubit bra level, qubit ket level) of the creation-side qubit
# factor |i><j|, and the frame frequency (units of alpha) it oscillates at
_KIND_TABLE = {
    DriveKind.SIGMA_GE: ((1, 0), 0),
    DriveKind.DELTA_GE: ((0, 1), 0),
    DriveKind.SIGMA_EF: ((2, 1), +1),
    DriveKind.DELTA_EF: ((1, 2), -1),
}


def _default_dims() -> HilbertSpace:
    return HilbertSpace((2, 3), ("snail", "qubit"))


@dataclass(frozen=True)
class SystemSpec:
    """Static physical parameters.

    All frequencies and rates are /2pi in MHz.  ``alpha`` stores the
    anharmonicity magnitude |alpha| (the transmon's fourth-order coefficient
    is negative, so alpha = -6*c4_q > 0); the Hamiltonian applies it with the
    physical negative sign.  ``c4_q`` may be omitted, in which case it is
    derived as -alpha/6.  ``c3_s`` is not fixed by any published number; only
    the product 6*c3_s*(g/Delta)*|beta| is physical, and the default is a
    placeholder for exploratory use.
    """

    f_q: float = 4520.0
    f_s: float = 8010.0
    alpha: float = 197.0
    c4_q: float | None = None
    c3_s: float = 10.0
    g_over_delta: float = 0.01
    kappa_s: float = 12.98
    kappa_q_down: float = 0.029
    kappa_q_up: float = 0.006
    nbar_s: float = 0.0
    dims: HilbertSpace = field(default_factory=_default_dims)

    def __post_init__(self):
        if self.f_q <= 0 or self.f_s <= 0:
            raise ValueError(f"mode frequencies must be > 0, got f_q={self.f_q}, f_s={self.f_s}")
        if self.alpha < 0:
            raise ValueError(
                f"alpha is a magnitude and must be >= 0, got {self.alpha} "
                "(the negative sign is applied internally)"
            )
        for name in ("kappa_s", "kappa_q_down", "kappa_q_up", "nbar_s", "c3_s", "g_over_delta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.c4_q is None:
            object.__setattr__(self, "c4_q", -self.alpha / 6.0)
        else:
            defect = abs(self.alpha + 6.0 * self.c4_q)
            scale = max(abs(self.alpha), 1e-12)
            if defect > 1e-9 * scale:
                raise ValueError(
                    f"alpha and c4_q are inconsistent: alpha={self.alpha} but "
                    f"-6*c4_q={-6.0 * self.c4_q} (relative defect {defect / scale:.2e})"
                )
        if self.dims.n_modes != 2 or self.dims.mode_labels != ("snail", "qubit"):
            raise ValueError(
                f'dims must be a two-mode ("snail", "qubit") space, got {self.dims}'
            )

    @property
    def snail_dim(self) -> int:
        return self.dims.mode_dims[0]

    @property
    def qubit_dim(self) -> int:
        return self.dims.mode_dims[1]


@dataclass(frozen=True)
class DriveSpec:
    """One parametric pump, specified by its effective strength.

    g_eff is the effective coupling /2pi in MHz (the product of the bare
    three-wave strength and the pump displacement |beta|); phase in radians;
    detuning in MHz away from the resonant pump condition.
    """

    kind: DriveKind
    g_eff: float
    phase: float = 0.0
    detuning: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", DriveKind(self.kind))
        if self.g_eff < 0:
            raise ValueError(f"g_eff must be >= 0, got {self.g_eff}")


@dataclass(frozen=True)
class PumpPhysical:
    """Physical pump tone: amplitude epsilon_d/2pi (MHz), frequency f_d (MHz), phase (rad)."""

    epsilon_d: float
    f_d: float
    phase: float = 0.0

    def __post_init__(self):
        if self.epsilon_d < 0:
            raise ValueError(f"epsilon_d must be >= 0, got {self.epsilon_d}")
        if self.f_d <= 0:
            raise ValueError(f"f_d must be > 0, got {self.f_d}")


def displacement_amplitude(spec: SystemSpec, pump: PumpPhysical) -> complex:
    """Coherent displacement beta = eps_d e^{-i phi} / (omega_d - omega_s).

    The 2pi factors cancel, so this is eps_d e^{-i phi} / (f_d - f_s) with
    both in MHz.  A pump resonant with the snail mode has no displacement
    frame and is rejected.
    """
    if pump.f_d == spec.f_s:
        raise ValueError(f"pump at f_d = {pump.f_d} MHz is resonant with the snail mode")
    return pump.epsilon_d * np.exp(-1j * pump.phase) / (pump.f_d - spec.f_s)


class EffectiveCouplings(NamedTuple):
    g_sigma: float  # MHz
    g_delta: float  # MHz
    stark_shift: float  # MHz, sign follows c4_q (negative for a transmon)


def effective_couplings(spec: SystemSpec, pump: PumpPhysical) -> EffectiveCouplings:
    """Pump-induced couplings g_eff = 6 c3_s (g/Delta) |beta| and Stark shift 24 c4_q |beta|^2.

    Both the squeezing and conversion processes share the same magnitude
    formula; which one is activated is set by the pump frequency, which is
    not resolved here (drives are specified by kind + strength downstream).
    """
    beta = displacement_amplitude(spec, pump)
    g_eff = 6.0 * spec.c3_s * spec.g_over_delta * abs(beta)
    stark = 24.0 * spec.c4_q * abs(beta) ** 2
    return EffectiveCouplings(g_eff, g_eff, stark)


class RWADecision(NamedTuple):
    keep: bool
    oscillation: float | None  # MHz retained as explicit time dependence


def rwa_filter(term_frequency: float, cutoff: float = RWA_CUTOFF_MHZ) -> RWADecision:
    """Keep a Hamiltonian term if it oscillates at |f| <= cutoff.

    Kept terms record their residual oscillation frequency so slow rotations
    (anharmonicity-scale) survive as explicit e^{i 2 pi f t} factors rather
    than being silently dropped or statically frozen.
    """
    if cutoff <= 0:
        raise ValueError(f"cutoff must be > 0, got {cutoff}")
    if abs(term_frequency) <= cutoff:
        return RWADecision(True, float(term_frequency))
    return RWADecision(False, None)


def mixing_terms(spec: SystemSpec, pump: PumpPhysical, cutoff: float = RWA_CUTOFF_MHZ):
    """Enumerate the pump-sideband mixing products and their RWA fate.

    Returns a list of (label, lab-frame frequency in MHz, RWADecision) for the
    third-order products generated by one pump tone on the g-e and e-f qubit
    transitions, plus the leading pump-independent fast terms.  The kept
    entries are exactly the candidates for DriveSpec kinds.
    """
    f_ge = spec.f_q
    f_ef = spec.f_q - spec.alpha
    candidates = [
        ("sigma_ge", spec.f_s + f_ge - pump.f_d),
        ("delta_ge", abs(spec.f_s - f_ge) - pump.f_d),
        ("sigma_ef", spec.f_s + f_ef - pump.f_d),
        ("delta_ef", abs(spec.f_s - f_ef) - pump.f_d),
        ("sigma_ge_counter", spec.f_s + f_ge + pump.f_d),
        ("delta_ge_counter", abs(spec.f_s - f_ge) + pump.f_d),
        ("snail_second_harmonic", 2.0 * spec.f_s),
        ("qubit_second_harmonic", 2.0 * f_ge),
    ]
    return [(label, f, rwa_filter(f, cutoff)) for label, f in candidates]


# ------------------------------------------------------------ Hamiltonians

def _qubit_ladder_shift(spec: SystemSpec) -> np.ndarray:
    """Static anharmonic term: level n at -alpha * n(n-1)/2 (angular)."""
    space = spec.dims
    H = np.zeros((space.dim, space.dim), dtype=np.complex128)
    for n in range(spec.qubit_dim):
        shift = -TWO_PI * spec.alpha * n * (n - 1) / 2.0
        if shift != 0.0:
            H += shift * projector(space, "qubit", n, n).matrix
    return H


def hamiltonian_terms(
    spec: SystemSpec,
    drives: Sequence[DriveSpec],
    stark_shift_mhz: float = 0.0,
) -> tuple[np.ndarray, list[tuple[float, np.ndarray]]]:
    """Decompose the effective Hamiltonian as H0 + sum_k (e^{i w_k t} A_k + h.c.).

    Returns (H0, [(w_k, A_k), ...]) with H0 Hermitian, w_k angular (rad/us)
    and strictly nonzero; zero-frequency drive terms are folded into H0.
    The Stark shift, when supplied (MHz, signed), enters H0 as a q^dag q
    detuning term; by default it is excluded, treating pumps as re-centered
    on resonance.
    """
    space = spec.dims
    s_dag = ladder(space, "snail").dag().matrix
    H0 = _qubit_ladder_shift(spec)
    if stark_shift_mhz != 0.0:
        nq = np.zeros((space.dim, space.dim), dtype=np.complex128)
        for n in range(1, spec.qubit_dim):
            nq += n * projector(space, "qubit", n, n).matrix
        H0 = H0 + TWO_PI * stark_shift_mhz * nq
    oscillating: dict[float, np.ndarray] = {}
    for drive in drives:
        (i, j), alpha_sign = _KIND_TABLE[drive.kind]
        if max(i, j) >= spec.qubit_dim:
            raise ValueError(
                f"drive {drive.kind.value} targets qubit level {max(i, j)} "
                f"outside truncation dim {spec.qubit_dim}"
            )
        A = (
            TWO_PI
            * drive.g_eff
            * np.exp(1j * drive.phase)
            * (s_dag @ projector(space, "qubit", i, j).matrix)
        )
        w = TWO_PI * (alpha_sign * spec.alpha - drive.detuning)
        if w == 0.0:
            H0 = H0 + A + A.conj().T
        else:
            oscillating[w] = oscillating.get(w, 0.0) + A
    return H0, sorted(oscillating.items(), key=lambda kv: kv[0])


def build_effective_hamiltonian(
    spec: SystemSpec,
    drives: Sequence[DriveSpec],
    t: float,
    stark_shift_mhz: float = 0.0,
) -> Operator:
    """Rotating-frame Hamiltonian at time t (us), in angular units (rad/us)."""
    H0, terms = hamiltonian_terms(spec, drives, stark_shift_mhz)
    H = H0.copy()
    for w, A in terms:
        phased = np.exp(1j * w * t) * A
        H += phased + phased.conj().T
    return Operator(spec.dims, H)


def build_dissipators(spec: SystemSpec) -> list[tuple[float, Operator]]:
    """Collapse channels [(rate, op), ...] with angular rates (rad/us).

    Thermal snail decay kappa_s(nbar+1) D(s) and heating kappa_s nbar D(s+),
    qubit decay kappa_q_down D(q) and heating kappa_q_up D(q+); zero-rate
    entries are omitted.
    """
    space = spec.dims
    s = ladder(space, "snail")
    q = ladder(space, "qubit")
    channels = [
        (TWO_PI * spec.kappa_s * (spec.nbar_s + 1.0), s),
        (TWO_PI * spec.kappa_s * spec.nbar_s, s.dag()),
        (TWO_PI * spec.kappa_q_down, q),
        (TWO_PI * spec.kappa_q_up, q.dag()),
    ]
    return [(rate, op) for rate, op in channels if rate > 0.0]
