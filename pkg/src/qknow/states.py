"""Objective state types: normalized pure states and density matrices.

All matrices are dense ``complex128`` numpy arrays in the index-ordered
computational basis. State objects are immutable; their arrays are marked
read-only after validation.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, StateError

TOL_NORM = 1e-9
"""Absolute tolerance on unit norm / unit trace."""
TOL_HERM = 1e-9
"""Max entrywise deviation from Hermiticity (and from identity for completeness)."""
TOL_PSD = 1e-9
"""Most negative eigenvalue still accepted as positive semidefinite."""
TOL_ZERO = 1e-12
"""Magnitude below which an amplitude or weight counts as zero."""
NORM_LENIENCY = 1e-6
"""Pure-state amplitudes are renormalized silently only within this band."""


def as_complex_matrix(data, *, square: bool = False, name: str = "matrix") -> np.ndarray:
    """Convert ``data`` to a finite 2-D ``complex128`` array, validating shape."""
    try:
        arr = np.array(data, dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise StateError(f"{name} is not a numeric matrix: {exc}") from None
    if arr.ndim != 2 or arr.size == 0:
        raise StateError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise StateError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise StateError(f"{name} has non-finite entries")
    return arr


def hermiticity_error(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def hermitian_eigvals(m: np.ndarray) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, ascending."""
    return np.linalg.eigvalsh(m)


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.flags.writeable = False
    return arr


def canonical_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate ``vec`` so its first significant entry is real and non-negative."""
    vec = np.array(vec, dtype=np.complex128, copy=True)
    significant = np.flatnonzero(np.abs(vec) > TOL_ZERO)
    if significant.size == 0:
        return vec
    i = significant[0]
    lead = vec[i]
    vec *= np.conj(lead) / abs(lead)
    vec[i] = abs(vec[i])
    return vec


@dataclass(frozen=True, eq=False)
class PureState:
    """A normalized amplitude vector with canonical global phase.

    Use :func:`pure_state_new` to build one from raw amplitudes.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.size == 0:
            raise StateError(f"amplitudes must be a non-empty vector, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise StateError("amplitudes have non-finite entries")
        if abs(np.linalg.norm(amps) - 1.0) > TOL_NORM:
            raise StateError("amplitudes are not normalized")
        object.__setattr__(self, "amplitudes", _readonly(canonical_phase(amps)))

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def overlap(self, other: PureState) -> complex:
        """Inner product <self|other>."""
        if other.dim != self.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        return self.dim == other.dim and bool(
            np.allclose(self.amplitudes, other.amplitudes, rtol=0.0, atol=TOL_ZERO)
        )

    __hash__ = None

    def __repr__(self):
        return f"PureState({np.array2string(self.amplitudes, precision=6)})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace operator.

    Construction validates all three conditions and raises
    :class:`~qknow.errors.StateError` on violation; nothing is repaired.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = as_complex_matrix(self.matrix, square=True, name="density matrix")
        herm = hermiticity_error(m)
        if herm > TOL_HERM:
            raise StateError(f"density matrix is not Hermitian (deviation {herm:.3g})")
        tr = np.trace(m)
        if abs(tr - 1.0) > TOL_NORM:
            raise StateError(f"density matrix trace is {tr.real:.12g}, expected 1")
        lowest = hermitian_eigvals(m)[0]
        if lowest < -TOL_PSD:
            raise StateError(f"density matrix has negative eigenvalue {lowest:.3g}")
        object.__setattr__(self, "matrix", _readonly(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return hermitian_eigvals(self.matrix)

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return self.dim == other.dim and bool(
            np.allclose(self.matrix, other.matrix, rtol=0.0, atol=TOL_ZERO)
        )

    __hash__ = None

    def __repr__(self):
        return f"DensityMatrix(\n{np.array2string(self.matrix, precision=6)})"


def pure_state_new(amplitudes: Iterable[complex]) -> PureState:
    """Build a :class:`PureState`, renormalizing and fixing the global phase.

    Inputs whose norm is within ``NORM_LENIENCY`` of 1 are rescaled; anything
    further off is treated as a configuration mistake and rejected.

    >>> pure_state_new([0, -1]).amplitudes.real
    array([0., 1.])
    """
    if not isinstance(amplitudes, np.ndarray):
        amplitudes = list(amplitudes)
    amps = np.array(amplitudes, dtype=np.complex128)
    if amps.ndim != 1 or amps.size == 0:
        raise StateError(f"amplitudes must be a non-empty vector, got shape {amps.shape}")
    if not np.all(np.isfinite(amps)):
        raise StateError("amplitudes have non-finite entries")
    norm = np.linalg.norm(amps)
    if norm < TOL_ZERO:
        raise StateError("amplitude vector is zero")
    if abs(norm - 1.0) > NORM_LENIENCY:
        raise StateError(f"amplitude norm {norm:.9g} is not 1 (leniency {NORM_LENIENCY:g})")
    return PureState(amps / norm)


def density_matrix(matrix) -> DensityMatrix:
    return DensityMatrix(as_complex_matrix(matrix, square=True, name="density matrix"))


def density_from_pure(psi: PureState) -> DensityMatrix:
    """Projector |psi><psi|."""
    a = psi.amplitudes
    return DensityMatrix(np.outer(a, a.conj()))


def mix(components: Sequence[tuple[float, DensityMatrix]]) -> DensityMatrix:
    """Convex combination sum_i w_i rho_i."""
    if len(components) == 0:
        raise StateError("cannot mix an empty list of states")
    weights = np.array([w for w, _ in components], dtype=float)
    if not np.all(np.isfinite(weights)) or np.any(weights < 0):
        raise StateError(f"mixture weights must be finite and non-negative: {weights}")
    if abs(weights.sum() - 1.0) > TOL_NORM:
        raise StateError(f"mixture weights sum to {weights.sum():.12g}, expected 1")
    dim = components[0][1].dim
    out = np.zeros((dim, dim), dtype=np.complex128)
    for w, rho in components:
        if rho.dim != dim:
            raise DimensionError(f"cannot mix dimension {rho.dim} with dimension {dim}")
        out += w * rho.matrix
    return DensityMatrix(out)


def purity(rho: DensityMatrix) -> float:
    """Tr(rho^2); 1 for pure states, 1/dim for the maximally mixed state."""
    # Tr(rho rho) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(rho.matrix) ** 2))


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Half the trace norm of ``a - b``."""
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    diff = a.matrix - b.matrix
    diff = 0.5 * (diff + diff.conj().T)
    return float(0.5 * np.sum(np.abs(hermitian_eigvals(diff))))


def maximally_mixed(dim: int) -> DensityMatrix:
    return DensityMatrix(np.eye(dim, dtype=np.complex128) / dim)


def basis_state(dim: int, index: int) -> PureState:
    amps = np.zeros(dim, dtype=np.complex128)
    amps[index] = 1.0
    return PureState(amps)
