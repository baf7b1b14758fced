"""Measurements as labeled effect sets, Born-rule probabilities and sampling.

Random draws use numpy's ``PCG64`` bit generator seeded with a 64-bit
integer (see :func:`make_rng`). One outcome consumes exactly one
``Generator.random()`` double, and the outcome is chosen by inverse CDF
over the declared effect order, so a run is fully determined by the seed.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ImpossibleOutcomeError, MeasurementError
from .states import (
    TOL_HERM,
    TOL_NORM,
    TOL_PSD,
    TOL_ZERO,
    DensityMatrix,
    as_complex_matrix,
    hermiticity_error,
)

TOL_PROB = 1e-12
"""Outcomes with probability at or below this are treated as impossible."""

PROJECTIVE = "projective"
GENERAL = "general"


def make_rng(seed: int) -> np.random.Generator:
    """The package's random source: ``Generator(PCG64(seed))``."""
    if not 0 <= int(seed) < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True, eq=False)
class Effect:
    """One POVM element ``matrix`` with outcome name ``label``."""

    label: str
    matrix: np.ndarray

    def __post_init__(self):
        m = as_complex_matrix(self.matrix, square=True, name=f"effect {self.label!r}")
        herm = hermiticity_error(m)
        if herm > TOL_HERM:
            raise MeasurementError(f"effect {self.label!r} is not Hermitian (deviation {herm:.3g})")
        ev = np.linalg.eigvalsh(m)
        if ev[0] < -TOL_PSD or ev[-1] > 1 + TOL_PSD:
            raise MeasurementError(
                f"effect {self.label!r} has eigenvalues outside [0, 1]: [{ev[0]:.6g}, {ev[-1]:.6g}]"
            )
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_projector(self) -> bool:
        m = self.matrix
        return bool(np.max(np.abs(m @ m - m)) <= TOL_HERM)

    def kraus(self) -> np.ndarray:
        """Positive square root of the effect (the effect itself for projectors)."""
        if self.is_projector:
            return self.matrix
        vals, vecs = np.linalg.eigh(self.matrix)
        return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T


@dataclass(frozen=True, eq=False)
class Measurement:
    """An ordered, complete set of effects.

    ``kind`` is ``"projective"`` or ``"general"``; pass ``None`` to infer it.
    Projective measurements are checked for idempotent, mutually orthogonal
    effects.
    """

    effects: tuple[Effect, ...]
    kind: str | None = None
    name: str = "measurement"

    def __post_init__(self):
        effects = tuple(self.effects)
        if not effects:
            raise MeasurementError("a measurement needs at least one effect")
        object.__setattr__(self, "effects", effects)
        dim = effects[0].dim
        for e in effects:
            if e.dim != dim:
                raise DimensionError(f"effect {e.label!r} has dimension {e.dim}, expected {dim}")
        labels = [e.label for e in effects]
        if len(set(labels)) != len(labels):
            raise MeasurementError(f"effect labels must be unique: {labels}")
        total = sum(e.matrix for e in effects)
        dev = float(np.max(np.abs(total - np.eye(dim))))
        if dev > TOL_HERM:
            raise MeasurementError(f"effects do not sum to identity (deviation {dev:.3g})")

        projective = all(e.is_projector for e in effects) and all(
            np.max(np.abs(a.matrix @ b.matrix)) <= TOL_HERM
            for i, a in enumerate(effects)
            for b in effects[i + 1:]
        )
        kind = self.kind
        if kind is None:
            kind = PROJECTIVE if projective else GENERAL
        elif kind == PROJECTIVE and not projective:
            raise MeasurementError(
                "effects are not mutually orthogonal projectors; declare kind 'general'"
            )
        elif kind not in (PROJECTIVE, GENERAL):
            raise MeasurementError(f"unknown measurement kind {kind!r}")
        object.__setattr__(self, "kind", kind)

    @property
    def dim(self) -> int:
        return self.effects[0].dim

    @property
    def labels(self) -> list[str]:
        return [e.label for e in self.effects]

    def effect(self, label: str) -> Effect:
        for e in self.effects:
            if e.label == label:
                return e
        raise MeasurementError(f"measurement {self.name!r} has no outcome {label!r}; "
                               f"known outcomes: {self.labels}")


def projective_measurement(vectors: Sequence, labels: Sequence[str], name: str) -> Measurement:
    """Rank-1 projective measurement onto the given orthonormal vectors."""
    effects = []
    for vec, label in zip(vectors, labels):
        v = np.asarray(vec, dtype=np.complex128)
        v = v / np.linalg.norm(v)
        effects.append(Effect(label, np.outer(v, v.conj())))
    return Measurement(tuple(effects), PROJECTIVE, name)


@dataclass(frozen=True)
class OutcomeRecord:
    measurement: str
    label: str
    probability: float


def born_probability(state: DensityMatrix, effect: Effect) -> float:
    """Tr(rho E), clamped into [0, 1].

    Raises if the trace has a non-negligible imaginary part or lies more than
    ``TOL_PSD`` outside [0, 1]; either means the inputs are not a valid
    state/effect pair.
    """
    if state.dim != effect.dim:
        raise DimensionError(f"state dimension {state.dim} != effect dimension {effect.dim}")
    # Tr(rho E) = sum_ij rho_ij E_ji
    tr = complex(np.sum(state.matrix * effect.matrix.T))
    if abs(tr.imag) > TOL_ZERO:
        raise MeasurementError(f"Tr(rho E) has imaginary part {tr.imag:.3g}")
    p = tr.real
    if p < -TOL_PSD or p > 1 + TOL_PSD:
        raise MeasurementError(f"Tr(rho E) = {p:.12g} lies outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def outcome_distribution(state: DensityMatrix, m: Measurement) -> list[tuple[str, float]]:
    """Born probability of every outcome, in effect order."""
    if state.dim != m.dim:
        raise DimensionError(f"state dimension {state.dim} != measurement dimension {m.dim}")
    dist = [(e.label, born_probability(state, e)) for e in m.effects]
    total = sum(p for _, p in dist)
    if abs(total - 1.0) > TOL_NORM:
        raise MeasurementError(f"outcome probabilities sum to {total:.12g}")
    return dist


def _inverse_cdf(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(probs)
    idx = np.searchsorted(cdf, u, side="right")
    # u can land past cdf[-1] when rounding leaves the total a hair below 1
    last = int(np.flatnonzero(probs > 0)[-1])
    return np.minimum(idx, last)


def sample_outcome(state: DensityMatrix, m: Measurement, rng: np.random.Generator) -> OutcomeRecord:
    """Draw one outcome; consumes a single ``rng.random()``."""
    dist = outcome_distribution(state, m)
    probs = np.array([p for _, p in dist])
    i = int(_inverse_cdf(probs, np.array([rng.random()]))[0])
    label, p = dist[i]
    return OutcomeRecord(m.name, label, p)


def sample_outcomes(state: DensityMatrix, m: Measurement, rng: np.random.Generator,
                    n: int) -> list[str]:
    """Labels of ``n`` independent draws on fresh copies of ``state``.

    Consumes the same random stream as ``n`` calls to :func:`sample_outcome`.
    """
    dist = outcome_distribution(state, m)
    probs = np.array([p for _, p in dist])
    idx = _inverse_cdf(probs, rng.random(n))
    labels = m.labels
    return [labels[i] for i in idx]


def luders_update(state: DensityMatrix, effect: Effect) -> DensityMatrix:
    """Post-measurement state K rho K^dagger / Tr(.) with K the effect's square root."""
    p = born_probability(state, effect)
    if p <= TOL_PROB:
        raise ImpossibleOutcomeError(
            f"outcome {effect.label!r} has probability {p:.3g}; cannot condition on it"
        )
    k = effect.kraus()
    out = k @ state.matrix @ k.conj().T
    out = out / np.trace(out).real
    return DensityMatrix(0.5 * (out + out.conj().T))


def identity_measurement(dim: int, label: str = "only") -> Measurement:
    return Measurement((Effect(label, np.eye(dim)),), PROJECTIVE, "trivial")


_S = 1 / np.sqrt(2)

PRESETS = {
    "vh-polarization": (((1, 0), (0, 1)), ("↑", "↔")),
    "diagonal-polarization": (((_S, _S), (_S, -_S)), ("↗", "↘")),
    "spin-z": (((1, 0), (0, 1)), ("+", "-")),
    "spin-x": (((_S, _S), (_S, -_S)), ("+x", "-x")),
}


def preset_measurement(name: str, dim: int = 2) -> Measurement:
    """Named measurement.

    Qubit presets: ``vh-polarization`` (outcomes ↑, ↔), ``diagonal-polarization``
    (↗, ↘), ``spin-z`` (+, -), ``spin-x`` (+x, -x). Any dimension:
    ``computational`` (outcomes "0".."dim-1") and ``trivial`` (single outcome
    "only" with the identity effect).
    """
    if name == "computational":
        return projective_measurement(np.eye(dim), [str(i) for i in range(dim)], name)
    if name == "trivial":
        return identity_measurement(dim)
    if name not in PRESETS:
        known = sorted(PRESETS) + ["computational", "trivial"]
        raise MeasurementError(f"unknown measurement preset {name!r}; known: {known}")
    if dim != 2:
        raise DimensionError(f"preset {name!r} is a qubit measurement, scenario dimension is {dim}")
    vectors, labels = PRESETS[name]
    return projective_measurement(vectors, labels, name)
