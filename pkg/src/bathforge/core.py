"""Operator algebra on truncated tensor-product Hilbert spaces.

Conventions used throughout the package:

* Modes are ordered; the full space is the Kronecker product of the mode
  spaces in that order (``kron(mode0, mode1, ...)``).
* Density matrices are vectorized by **column stacking**: ``vec(rho) =
  rho.flatten(order="F")``, so that ``vec(A @ rho @ B) = kron(B.T, A) @
  vec(rho)``.
* All matrices are dense ``complex128``.  System sizes in this package are
  tiny (Hilbert dimension <= 9, Liouvillians <= 81 x 81), so sparse or
  structured storage would be pure overhead.
* Rates passed to :func:`liouvillian` are angular (rad / time unit); the
  conversion from linear frequencies happens in the model layer.

All types are immutable after construction (backing arrays are marked
read-only), so they can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * np.pi

# Validation tolerances for density matrices / superoperators.  Chosen as
# ~100x double-precision accumulation headroom at these matrix sizes.
HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-9
POSITIVITY_TOL = 1e-8
TRACE_PRESERVATION_TOL = 1e-8


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.complex128, copy=True, order="C")
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered collection of truncated modes.

    Parameters
    ----------
    mode_dims : tuple of int
        Per-mode truncation dimension, each >= 2.
    mode_labels : tuple of str
        Unique name per mode, e.g. ``("snail", "qubit")``.
    """

    mode_dims: tuple[int, ...]
    mode_labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "mode_dims", tuple(int(d) for d in self.mode_dims))
        object.__setattr__(self, "mode_labels", tuple(str(s) for s in self.mode_labels))
        if len(self.mode_dims) == 0:
            raise ValueError("HilbertSpace needs at least one mode")
        if any(d < 2 for d in self.mode_dims):
            raise ValueError(f"every mode dimension must be >= 2, got {self.mode_dims}")
        if len(self.mode_labels) != len(self.mode_dims):
            raise ValueError("mode_labels and mode_dims must have equal length")
        if len(set(self.mode_labels)) != len(self.mode_labels):
            raise ValueError(f"mode labels must be unique, got {self.mode_labels}")

    @property
    def dim(self) -> int:
        """Total Hilbert-space dimension (product of mode dims)."""
        return prod(self.mode_dims)

    @property
    def n_modes(self) -> int:
        return len(self.mode_dims)

    def mode_index(self, mode: int | str) -> int:
        """Resolve a mode given as index or label."""
        if isinstance(mode, str):
            try:
                return self.mode_labels.index(mode)
            except ValueError:
                raise ValueError(
                    f"unknown mode label {mode!r}; have {self.mode_labels}"
                ) from None
        i = int(mode)
        if not 0 <= i < self.n_modes:
            raise ValueError(f"mode index {i} out of range for {self.n_modes} modes")
        return i


@dataclass(frozen=True)
class Operator:
    """Dense operator on a :class:`HilbertSpace`."""

    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {m.shape}")
        if m.shape[0] != self.space.dim:
            raise ValueError(
                f"matrix dimension {m.shape[0]} does not match space dimension {self.space.dim}"
            )
        object.__setattr__(self, "matrix", _freeze(m))

    def dag(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def __add__(self, other: "Operator") -> "Operator":
        self._check_same_space(other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check_same_space(other)
        return Operator(self.space, self.matrix - other.matrix)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.space, self.matrix * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check_same_space(other)
        return Operator(self.space, self.matrix @ other.matrix)

    def _check_same_space(self, other: "Operator"):
        if other.space != self.space:
            raise ValueError("operators act on different Hilbert spaces")


@dataclass(frozen=True)
class DensityMatrix:
    """Validated quantum state: Hermitian, unit trace, positive semidefinite."""

    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != self.space.dim:
            raise ValueError(
                f"density matrix shape {m.shape} does not match space dimension {self.space.dim}"
            )
        herm_err = np.max(np.abs(m - m.conj().T))
        if herm_err > HERMITICITY_TOL:
            raise ValueError(f"density matrix not Hermitian (max deviation {herm_err:.3e})")
        trace_err = abs(m.trace() - 1.0)
        if trace_err > TRACE_TOL:
            raise ValueError(f"density matrix trace deviates from 1 by {trace_err:.3e}")
        min_eig = float(np.linalg.eigvalsh((m + m.conj().T) / 2.0).min())
        if min_eig < -POSITIVITY_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {min_eig:.3e}")
        object.__setattr__(self, "matrix", _freeze(m))

    def populations(self) -> np.ndarray:
        """Diagonal of the state, as real probabilities."""
        return self.matrix.diagonal().real.copy()


@dataclass(frozen=True)
class SuperOperator:
    """Linear map on column-vectorized density matrices."""

    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        d2 = self.space.dim**2
        if m.shape != (d2, d2):
            raise ValueError(
                f"superoperator must be {d2} x {d2} for Hilbert dimension {self.space.dim}, got {m.shape}"
            )
        object.__setattr__(self, "matrix", _freeze(m))

    def trace_preservation_defect(self) -> float:
        """Max abs of vec(I)^T L, zero (to tolerance) for a valid Liouvillian."""
        ident = np.eye(self.space.dim, dtype=np.complex128)
        return float(np.max(np.abs(vectorize(ident) @ self.matrix)))


def vectorize(mat: np.ndarray) -> np.ndarray:
    """Column-stack a matrix into a vector."""
    return np.asarray(mat, dtype=np.complex128).flatten(order="F")


def unvectorize(vec: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    return np.asarray(vec, dtype=np.complex128).reshape((dim, dim), order="F")


def _embed(space: HilbertSpace, mode: int, local: np.ndarray) -> np.ndarray:
    """Kronecker-embed a single-mode matrix with identities on the other modes."""
    out = np.eye(1, dtype=np.complex128)
    for k, d in enumerate(space.mode_dims):
        factor = local if k == mode else np.eye(d, dtype=np.complex128)
        out = np.kron(out, factor)
    return out


def identity(space: HilbertSpace) -> Operator:
    return Operator(space, np.eye(space.dim, dtype=np.complex128))


def ladder(space: HilbertSpace, mode: int | str) -> Operator:
    """Truncated annihilation operator on one mode, embedded in the full space.

    The single-mode matrix has sqrt(n) on the superdiagonal (so for a dim-2
    mode it is the Pauli lowering operator sigma^-).
    """
    k = space.mode_index(mode)
    d = space.mode_dims[k]
    local = np.zeros((d, d), dtype=np.complex128)
    for n in range(1, d):
        local[n - 1, n] = np.sqrt(n)
    return Operator(space, _embed(space, k, local))


def number(space: HilbertSpace, mode: int | str) -> Operator:
    """Embedded number operator a^dag a for one mode."""
    a = ladder(space, mode)
    return a.dag() @ a


def projector(space: HilbertSpace, mode: int | str, i: int, j: int) -> Operator:
    """Embedded |i><j| on one mode."""
    k = space.mode_index(mode)
    d = space.mode_dims[k]
    if not (0 <= i < d and 0 <= j < d):
        raise ValueError(f"projector indices ({i}, {j}) out of range for mode dimension {d}")
    local = np.zeros((d, d), dtype=np.complex128)
    local[i, j] = 1.0
    return Operator(space, _embed(space, k, local))


def basis_state(space: HilbertSpace, occupations: Sequence[int]) -> DensityMatrix:
    """Pure product basis state |n0, n1, ...><n0, n1, ...|."""
    if len(occupations) != space.n_modes:
        raise ValueError(
            f"need one occupation per mode ({space.n_modes}), got {len(occupations)}"
        )
    for n, d in zip(occupations, space.mode_dims):
        if not 0 <= n < d:
            raise ValueError(f"occupation {n} outside mode truncation {d}")
    idx = 0
    for n, d in zip(occupations, space.mode_dims):
        idx = idx * d + n
    m = np.zeros((space.dim, space.dim), dtype=np.complex128)
    m[idx, idx] = 1.0
    return DensityMatrix(space, m)


def dissipator_action(a: Operator, rho: DensityMatrix | np.ndarray) -> np.ndarray:
    """Evaluate the Lindblad dissipator D(a) rho = a rho a^dag - {a^dag a, rho}/2.

    Accepts a plain Hermitian matrix as well as a :class:`DensityMatrix`, since
    the dissipator is well defined (and trace-annihilating) on any operator.
    """
    r = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)
    m = a.matrix
    if r.shape != m.shape:
        raise ValueError(f"state shape {r.shape} does not match operator shape {m.shape}")
    ada = m.conj().T @ m
    return m @ r @ m.conj().T - 0.5 * (ada @ r + r @ ada)


def liouvillian(
    H: Operator | None, collapse: Iterable[tuple[float, Operator]] = ()
) -> SuperOperator:
    """Build the vectorized generator of d rho/dt = -i[H, rho] + sum_k k_i D(a_i) rho.

    Parameters
    ----------
    H : Operator or None
        Hamiltonian in angular units (rad / time unit); None means zero.
    collapse : iterable of (rate, Operator)
        Nonnegative angular rates paired with collapse operators.

    Returns
    -------
    SuperOperator
        Acting on column-stacked density matrices.
    """
    collapse = list(collapse)
    if H is None and not collapse:
        raise ValueError("liouvillian needs a Hamiltonian or at least one collapse operator")
    space = H.space if H is not None else collapse[0][1].space
    d = space.dim
    eye = np.eye(d, dtype=np.complex128)
    L = np.zeros((d * d, d * d), dtype=np.complex128)
    if H is not None:
        Hm = H.matrix
        L += -1j * (np.kron(eye, Hm) - np.kron(Hm.T, eye))
    for rate, op in collapse:
        if op.space != space:
            raise ValueError("collapse operator acts on a different Hilbert space")
        if rate < 0:
            raise ValueError(f"collapse rate must be >= 0, got {rate}")
        if rate == 0:
            continue
        a = op.matrix
        ada = a.conj().T @ a
        L += rate * (
            np.kron(a.conj(), a)
            - 0.5 * (np.kron(eye, ada) + np.kron(ada.T, eye))
        )
    return SuperOperator(space, L)


def partial_trace(rho: DensityMatrix, keep_mode: int | str) -> DensityMatrix:
    """Trace out one mode of a two-mode state, keeping ``keep_mode``."""
    space = rho.space
    if space.n_modes != 2:
        raise ValueError(f"partial_trace requires a two-mode space, got {space.n_modes} modes")
    keep = space.mode_index(keep_mode)
    d0, d1 = space.mode_dims
    r = rho.matrix.reshape(d0, d1, d0, d1)
    if keep == 0:
        reduced = np.einsum("ikjk->ij", r)
    else:
        reduced = np.einsum("kikj->ij", r)
    kept_space = HilbertSpace((space.mode_dims[keep],), (space.mode_labels[keep],))
    return DensityMatrix(kept_space, reduced)
