"""Closed-form results: thermal occupation, two-level pumped steady states,
photon chemical potential, the exact two-TLS heating solution, and
semi-classical rate-equation models.

Unit conventions (shared with the rest of the package):

* frequencies and rates are linear, f = omega/2pi, in MHz;
* times are in microseconds;
* energies are quoted as equivalent frequencies E/h in MHz, so "mu" below is
  mu/h.  The dimensionless ratio mu/(hbar*omega_s) is then ``mu / f_s``.

Exponents therefore carry explicit 2*pi factors.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg
from scipy.constants import h as PLANCK_H
from scipy.constants import k as BOLTZMANN_K
from scipy.special import expit

from .core import TWO_PI, DensityMatrix, HilbertSpace

RATE_KEYS = ("ge", "eg", "ef", "fe")


@dataclass(frozen=True)
class BathSpec:
    """Thermal environment seen by the lossy mode.

    temperature is in kelvin; f_s is the mode frequency in MHz.
    """

    temperature: float
    f_s: float

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0 K, got {self.temperature}")
        if self.f_s <= 0:
            raise ValueError(f"f_s must be > 0 MHz, got {self.f_s}")

    def beta_h_omega(self) -> float:
        """Dimensionless hbar*omega_s/(k_B T).  Infinite at T = 0."""
        if self.temperature == 0.0:
            return np.inf
        return PLANCK_H * self.f_s * 1e6 / (BOLTZMANN_K * self.temperature)


@dataclass(frozen=True)
class RateSet:
    """Transition rates between adjacent levels, keyed "ge", "eg", "ef", "fe".

    Values are linear rates Gamma/2pi in MHz.  Missing keys read as zero.
    """

    gamma: Mapping[str, float]

    def __post_init__(self):
        clean = {}
        for key, value in dict(self.gamma).items():
            if key not in RATE_KEYS:
                raise ValueError(f"unknown rate key {key!r}; allowed: {RATE_KEYS}")
            value = float(value)
            if value < 0 or not np.isfinite(value):
                raise ValueError(f"rate {key} must be finite and >= 0, got {value}")
            clean[key] = value
        object.__setattr__(self, "gamma", MappingProxyType(clean))

    def get(self, key: str) -> float:
        if key not in RATE_KEYS:
            raise ValueError(f"unknown rate key {key!r}; allowed: {RATE_KEYS}")
        return self.gamma.get(key, 0.0)


def thermal_nbar(bath: BathSpec) -> float:
    """Bose occupation 1/(exp(h f / k T) - 1); exactly 0 at T = 0."""
    if bath.temperature == 0.0:
        return 0.0
    x = bath.beta_h_omega()
    if x > 700.0:  # exp would overflow; occupation is zero to double precision
        return 0.0
    return 1.0 / np.expm1(x)


def _check_pump_pair(g_sigma: float, g_delta: float):
    if g_sigma < 0 or g_delta < 0:
        raise ValueError(f"pump strengths must be >= 0, got ({g_sigma}, {g_delta})")
    if g_sigma == 0.0 and g_delta == 0.0:
        raise ValueError("both pump strengths are zero; populations are undefined")


def two_level_steady_state(
    g_sigma: float, g_delta: float, nbar: float = 0.0
) -> tuple[float, float]:
    """Qubit (P_g, P_e) under simultaneous pumps in the g << kappa_s limit.

    P_g = [g_sigma^2 nbar + g_delta^2 (1+nbar)] / [(g_sigma^2+g_delta^2)(1+2 nbar)]
    """
    _check_pump_pair(g_sigma, g_delta)
    if nbar < 0:
        raise ValueError(f"nbar must be >= 0, got {nbar}")
    s2, d2 = g_sigma**2, g_delta**2
    p_g = (s2 * nbar + d2 * (1.0 + nbar)) / ((s2 + d2) * (1.0 + 2.0 * nbar))
    return p_g, 1.0 - p_g


def chemical_potential(g_sigma: float, g_delta: float, bath: BathSpec) -> float:
    """Photon chemical potential set by the pump ratio, as mu/h in MHz.

    mu = (1/beta) * ln[(g_sigma^2 e^{x} + g_delta^2) / (g_sigma^2 e^{-x} + g_delta^2)]
    with x = beta*hbar*omega_s.  Evaluated via logaddexp so cold baths
    (x >> 1) cannot overflow.  Limits: g_sigma = 0 gives 0, g_delta = 0 gives
    2*hbar*omega_s, equal strengths give exactly hbar*omega_s.

    Divide by ``bath.f_s`` for the dimensionless mu/(hbar*omega_s).
    """
    _check_pump_pair(g_sigma, g_delta)
    if bath.temperature == 0.0:
        raise ValueError("chemical potential diverges at T = 0 (beta infinite)")
    x = bath.beta_h_omega()
    with np.errstate(divide="ignore"):
        ls = 2.0 * np.log(g_sigma)
        ld = 2.0 * np.log(g_delta)
    log_num = np.logaddexp(ls + x, ld)
    log_den = np.logaddexp(ls - x, ld)
    return float(bath.f_s * (log_num - log_den) / x)


def fermi_dirac_populations(mu: float, bath: BathSpec) -> tuple[float, float]:
    """Grand-canonical two-level populations P_g = 1/(1 + e^{-beta(hbar w_s - mu)}).

    ``mu`` is mu/h in MHz, as returned by :func:`chemical_potential`.
    """
    if bath.temperature == 0.0:
        raise ValueError("grand-canonical populations need T > 0")
    x = bath.beta_h_omega()
    y = x * (bath.f_s - mu) / bath.f_s  # beta*(hbar omega_s - mu)
    return float(expit(y)), float(expit(-y))


def grand_canonical_rho(mu: float, bath: BathSpec) -> DensityMatrix:
    """Diagonal two-level grand-canonical state with Fermi-Dirac populations."""
    p_g, p_e = fermi_dirac_populations(mu, bath)
    space = HilbertSpace((2,), ("qubit",))
    return DensityMatrix(space, np.diag([p_g, p_e]).astype(complex))


# ------------------------------------------------------------------ heating

# Relative window around 16 g^2 = kappa^2 where the closed form is evaluated
# by its analytic limit instead of the (0/0) general expression.
_DEGENERATE_REL_TOL = 1e-9


def heating_population_analytic(g_sigma: float, kappa_s: float, t) -> np.ndarray | float:
    """Exact P_g(t) for the two-TLS heating model from |0, g> (both in MHz, t in us).

    Three-exponential closed form with D = sqrt(kappa^2 - 16 g^2) (angular):

        P_g = c1 e^{-kappa t/2} + c2 e^{-(kappa+D)t/2} + c3 e^{-(kappa-D)t/2}
        c1 = -8g^2/D^2,  c2 = (kappa^2 - 8g^2 - kappa D)/(2 D^2),
        c3 = (kappa^2 - 8g^2 + kappa D)/(2 D^2)

    so that c1+c2+c3 = 1.  For 16g^2 > kappa^2 the square root is imaginary
    and the expression is evaluated in complex arithmetic; the imaginary part
    cancels to below 1e-12 and the real part is returned.  At the critical
    point 4g = kappa (within 1e-9 relative) the analytic limit

        P_g = e^{-kappa t/2} (1 + kappa t/2 + (kappa t)^2/16)

    is used instead.
    """
    if g_sigma < 0:
        raise ValueError(f"g_sigma must be >= 0, got {g_sigma}")
    if kappa_s <= 0:
        raise ValueError(f"kappa_s must be > 0, got {kappa_s}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("times must be >= 0")
    wg = TWO_PI * g_sigma
    wk = TWO_PI * kappa_s
    disc = wk**2 - 16.0 * wg**2
    if abs(disc) < _DEGENERATE_REL_TOL * wk**2:
        kt = wk * t
        out = np.exp(-kt / 2.0) * (1.0 + kt / 2.0 + kt**2 / 16.0)
        return out if out.ndim else float(out)
    D = np.sqrt(complex(disc))
    c1 = -8.0 * wg**2 / disc
    c2 = (wk**2 - 8.0 * wg**2 - wk * D) / (2.0 * disc)
    c3 = (wk**2 - 8.0 * wg**2 + wk * D) / (2.0 * disc)
    p = (
        c1 * np.exp(-wk * t / 2.0)
        + c2 * np.exp(-(wk + D) * t / 2.0)
        + c3 * np.exp(-(wk - D) * t / 2.0)
    )
    max_imag = float(np.max(np.abs(p.imag))) if p.ndim else abs(p.imag)
    if max_imag > 1e-12:
        raise ArithmeticError(f"imaginary residue {max_imag:.3e} in analytic heating solution")
    out = p.real
    return out if out.ndim else float(out)


def heating_rate_weak_coupling(g_sigma: float, kappa_s: float) -> float:
    """Effective excitation rate 4 g^2 / kappa in MHz (valid for g << kappa)."""
    if kappa_s <= 0:
        raise ValueError(f"kappa_s must be > 0, got {kappa_s}")
    return 4.0 * g_sigma**2 / kappa_s


# ---------------------------------------------------------- semi-classical

def semiclassical_2level(rates: RateSet, p_g0: float, t):
    """Two-level rate-equation solution.

    P_g(t) = (P_g0 - P_g_inf) e^{-2pi (G_ge+G_eg) t} + P_g_inf,
    P_g_inf = G_eg / (G_ge + G_eg).
    """
    g_up, g_dn = rates.get("ge"), rates.get("eg")
    total = g_up + g_dn
    if total <= 0:
        raise ValueError("semiclassical_2level needs Gamma_ge + Gamma_eg > 0")
    t = np.asarray(t, dtype=float)
    p_inf = g_dn / total
    p_g = (p_g0 - p_inf) * np.exp(-TWO_PI * total * t) + p_inf
    return p_g, 1.0 - p_g


def rate_generator_3level(rates: RateSet) -> np.ndarray:
    """3x3 generator of the classical master equation, angular (rad/us).

    Columns are "from" states (g, e, f) and sum to zero, so probability is
    conserved exactly.
    """
    g_ge, g_eg = rates.get("ge"), rates.get("eg")
    g_ef, g_fe = rates.get("ef"), rates.get("fe")
    G = np.array(
        [
            [-g_ge, g_eg, 0.0],
            [g_ge, -(g_eg + g_ef), g_fe],
            [0.0, g_ef, -g_fe],
        ]
    )
    return TWO_PI * G


def semiclassical_3level(rates: RateSet, p0: Sequence[float], t):
    """Three-level rate-equation populations via the matrix exponential.

    Returns (P_g, P_e, P_f) evaluated at each time in ``t``.
    """
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (3,):
        raise ValueError(f"p0 must have three entries, got shape {p0.shape}")
    if np.any(p0 < 0):
        raise ValueError(f"initial probabilities must be >= 0, got {p0}")
    if abs(p0.sum() - 1.0) > 1e-9:
        raise ValueError(f"initial probabilities must sum to 1, got {p0.sum()}")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    G = rate_generator_3level(rates)
    evals, V = np.linalg.eig(G)
    if np.linalg.cond(V) < 1e10:
        W = np.linalg.solve(V, p0.astype(complex))
        p = np.einsum("ik,tk,k->ti", V, np.exp(np.outer(t, evals)), W).real
    else:  # (near-)defective generator: step with expm instead
        p = np.array([scipy.linalg.expm(G * ti) @ p0 for ti in t])
    return p[:, 0], p[:, 1], p[:, 2]
