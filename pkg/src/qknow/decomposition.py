"""Pure-state ensembles and the freedom in writing a density matrix as a mixture.

Any two ensembles with the same density matrix are related by a unitary
acting on the weighted vectors sqrt(w_j)|psi_j>. Only square unitaries are
handled here; ensembles with more components than the input (isometries)
are not generated.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, StateError
from .observer import KnowledgeState
from .states import (
    TOL_HERM,
    TOL_NORM,
    TOL_ZERO,
    DensityMatrix,
    PureState,
    as_complex_matrix,
    pure_state_new,
    trace_distance,
)

CLUSTER_GAP = 1e-9
"""Eigenvalues closer than this are treated as one degenerate eigenspace."""
_MIN_RESIDUAL = 1e-3
_SAME_DENSITY_TOL = 1e-10
_SAME_STATE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PureEnsemble:
    """Ordered components (weight, pure state)."""

    components: tuple[tuple[float, PureState], ...]

    def __post_init__(self):
        comps = tuple((float(w), s) for w, s in self.components)
        if not comps:
            raise StateError("an ensemble needs at least one component")
        weights = np.array([w for w, _ in comps])
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise StateError(f"ensemble weights must be non-negative: {weights}")
        if abs(weights.sum() - 1.0) > TOL_NORM:
            raise StateError(f"ensemble weights sum to {weights.sum():.12g}, expected 1")
        dim = comps[0][1].dim
        if any(s.dim != dim for _, s in comps):
            raise DimensionError("ensemble states have different dimensions")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return self.components[0][1].dim

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.components])

    @property
    def states(self) -> list[PureState]:
        return [s for _, s in self.components]

    def __len__(self):
        return len(self.components)

    def weighted_vectors(self) -> np.ndarray:
        """Rows sqrt(w_j) psi_j."""
        return np.sqrt(self.weights)[:, None] * np.array([s.amplitudes for s in self.states])


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        u = as_complex_matrix(self.matrix, square=True, name="unitary")
        dev = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
        if dev > TOL_HERM:
            raise StateError(f"matrix is not unitary (|U^dagger U - I| = {dev:.3g})")
        u = u.copy()
        u.flags.writeable = False
        object.__setattr__(self, "matrix", u)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def random_unitary(dim: int, rng: np.random.Generator) -> UnitaryMatrix:
    """Haar-distributed unitary from the QR decomposition of a complex Gaussian matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return UnitaryMatrix(q * (d / np.abs(d)))


def ensemble_density(e: PureEnsemble) -> DensityMatrix:
    """sum_i w_i |psi_i><psi_i|."""
    v = e.weighted_vectors()
    return DensityMatrix(v.T @ v.conj())


def _cluster_basis(vecs: np.ndarray) -> list[np.ndarray]:
    """Deterministic orthonormal basis for the span of ``vecs`` (columns).

    Computational basis vectors are projected onto the span in index order
    and Gram-Schmidt orthonormalized, skipping those with small residual, so
    the result does not depend on how the eigensolver rotated the eigenspace.
    """
    k = vecs.shape[1]
    proj = vecs @ vecs.conj().T
    basis: list[np.ndarray] = []
    for i in range(vecs.shape[0]):
        if len(basis) == k:
            break
        v = proj[:, i].copy()
        for b in basis:
            v -= np.vdot(b, v) * b
        n = np.linalg.norm(v)
        if n < _MIN_RESIDUAL:
            continue
        v /= n
        # re-orthogonalize once for stability
        for b in basis:
            v -= np.vdot(b, v) * b
        basis.append(v / np.linalg.norm(v))
    return basis


def spectral_decomposition(rho: DensityMatrix) -> PureEnsemble:
    """Eigen-ensemble of ``rho``, weights descending, zero weights dropped.

    Within a degenerate eigenvalue cluster all members get the cluster's mean
    eigenvalue and the basis from :func:`_cluster_basis`, e.g. the maximally
    mixed qubit decomposes onto (1, 0) and (0, 1).
    """
    vals, vecs = np.linalg.eigh(rho.matrix)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]

    components = []
    start = 0
    n = len(vals)
    while start < n:
        stop = start + 1
        while stop < n and vals[stop - 1] - vals[stop] < CLUSTER_GAP:
            stop += 1
        weight = float(np.mean(vals[start:stop]))
        if weight >= TOL_ZERO:
            for v in _cluster_basis(vecs[:, start:stop]):
                components.append((weight, pure_state_new(v)))
        start = stop
    return PureEnsemble(tuple(components))


def transform_ensemble(e: PureEnsemble, u: UnitaryMatrix) -> PureEnsemble:
    """Mix the weighted vectors: sqrt(v_k)|phi_k> = sum_j u_kj sqrt(w_j)|psi_j>.

    The density matrix is unchanged. Output components with weight below
    ``TOL_ZERO`` are dropped.
    """
    if not isinstance(u, UnitaryMatrix):
        u = UnitaryMatrix(u)
    if u.dim != len(e):
        raise DimensionError(f"unitary is {u.dim}x{u.dim} but the ensemble has {len(e)} components")
    rows = u.matrix @ e.weighted_vectors()
    weights = np.sum(np.abs(rows) ** 2, axis=1)
    components = [
        (float(w), pure_state_new(row / np.sqrt(w)))
        for w, row in zip(weights, rows)
        if w >= TOL_ZERO
    ]
    return PureEnsemble(tuple(components))


def _check_same_dim(a: PureEnsemble, b: PureEnsemble):
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")


def same_density(a: PureEnsemble, b: PureEnsemble) -> bool:
    """True when both ensembles describe the same density matrix."""
    _check_same_dim(a, b)
    return trace_distance(ensemble_density(a), ensemble_density(b)) < _SAME_DENSITY_TOL


def _infidelity(a: PureState, b: PureState) -> float:
    """1 - |<a|b>|^2; blind to global phase."""
    return max(0.0, 1.0 - abs(a.overlap(b)) ** 2)


def ensembles_equal_as_knowledge(a: PureEnsemble, b: PureEnsemble) -> bool:
    """True when the ensembles are the same weighted set of states.

    Order and global phases are ignored. Components are paired greedily by
    smallest infidelity; a ``ValueError`` is raised if two distinguishable
    candidates both match a component within tolerance.
    """
    _check_same_dim(a, b)
    if len(a) != len(b):
        return False
    unused = list(range(len(b)))
    for wa, sa in a.components:
        candidates = [
            (_infidelity(sa, b.components[j][1]), j)
            for j in unused
            if abs(wa - b.components[j][0]) < TOL_ZERO
        ]
        candidates = sorted(c for c in candidates if c[0] < _SAME_STATE_TOL)
        if not candidates:
            return False
        best = candidates[0][1]
        for _, j in candidates[1:]:
            if _infidelity(b.components[best][1], b.components[j][1]) >= TOL_ZERO:
                raise ValueError("ambiguous component pairing between ensembles")
        unused.remove(best)
    return True


def ensemble_from_knowledge(k: KnowledgeState) -> PureEnsemble:
    """Read a knowledge state over pure hypotheses as a pure-state ensemble."""
    components = []
    for h, w in zip(k.hypotheses, k.weights):
        vals, vecs = np.linalg.eigh(h.state.matrix)
        if len(vals) > 1 and vals[-2] > TOL_NORM:
            raise StateError(f"hypothesis {h.id!r} is a mixed state")
        components.append((float(w), pure_state_new(vecs[:, -1])))
    return PureEnsemble(tuple(components))


def ensemble_from_pairs(pairs: Sequence[tuple[float, Sequence[complex]]]) -> PureEnsemble:
    return PureEnsemble(tuple((w, pure_state_new(v)) for w, v in pairs))
