"""Observer knowledge as a weighted ensemble of candidate preparations.

A :class:`KnowledgeState` says "the system was prepared in one of these
states, with these probabilities". It is deliberately richer than the
density matrix it induces: two observers can share a subjective density
matrix while holding different hypotheses, and so make different
predictions after the same observation.

Sequential updates treat successive outcomes as independent trials on
identically prepared copies.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ImpossibleOutcomeError, StateError
from .measurement import TOL_PROB, Measurement, born_probability, outcome_distribution
from .states import TOL_NORM, TOL_ZERO, DensityMatrix, mix, trace_distance

TOL_PRUNE = 1e-12
"""Hypotheses whose posterior falls below this are dropped after an update."""


@dataclass(frozen=True, eq=False)
class Hypothesis:
    id: str
    state: DensityMatrix


@dataclass(frozen=True, eq=False)
class KnowledgeState:
    """An observer's probability assignment over candidate initial states."""

    observer: str
    hypotheses: tuple[Hypothesis, ...]
    weights: np.ndarray

    def __post_init__(self):
        hyps = tuple(self.hypotheses)
        if not hyps:
            raise StateError(f"observer {self.observer!r} needs at least one hypothesis")
        ids = [h.id for h in hyps]
        if len(set(ids)) != len(ids):
            raise StateError(f"observer {self.observer!r} has duplicate hypothesis ids: {ids}")
        dim = hyps[0].state.dim
        for h in hyps:
            if h.state.dim != dim:
                raise DimensionError(
                    f"observer {self.observer!r}: hypothesis {h.id!r} has dimension "
                    f"{h.state.dim}, expected {dim}"
                )
        w = np.array(self.weights, dtype=float)
        if w.shape != (len(hyps),):
            raise StateError(
                f"observer {self.observer!r}: {w.size} weights for {len(hyps)} hypotheses"
            )
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise StateError(f"observer {self.observer!r}: weights must be non-negative")
        if abs(w.sum() - 1.0) > TOL_NORM:
            raise StateError(
                f"observer {self.observer!r}: weights sum to {w.sum():.12g}, expected 1"
            )
        w.flags.writeable = False
        object.__setattr__(self, "hypotheses", hyps)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, observer: str, hypotheses: Sequence[Hypothesis]) -> KnowledgeState:
        """Uninformative prior: equal weight on every hypothesis."""
        n = len(hypotheses)
        return cls(observer, tuple(hypotheses), np.full(n, 1.0 / n) if n else np.empty(0))

    @property
    def dim(self) -> int:
        return self.hypotheses[0].state.dim

    @property
    def ids(self) -> list[str]:
        return [h.id for h in self.hypotheses]

    def weight_map(self) -> dict[str, float]:
        return {h.id: float(w) for h, w in zip(self.hypotheses, self.weights)}

    def entropy_bits(self) -> float:
        """Shannon entropy of the hypothesis weights."""
        w = self.weights[self.weights > 0]
        return float(-np.sum(w * np.log2(w))) + 0.0


@dataclass(frozen=True)
class UpdateReport:
    """The four Bayes factors for one observation, before pruning."""

    observed: str
    hypothesis_ids: tuple[str, ...]
    prior: tuple[float, ...]
    likelihood: tuple[float, ...]
    evidence: float
    posterior: tuple[float, ...]
    pruned: tuple[str, ...]

    def as_dict(self) -> dict:
        ids = self.hypothesis_ids
        return {
            "observed": self.observed,
            "prior": dict(zip(ids, self.prior)),
            "likelihood": dict(zip(ids, self.likelihood)),
            "evidence": self.evidence,
            "posterior": dict(zip(ids, self.posterior)),
            "pruned": list(self.pruned),
        }


def _check_dims(k: KnowledgeState, m: Measurement):
    if k.dim != m.dim:
        raise DimensionError(
            f"observer {k.observer!r} has dimension {k.dim}, measurement {m.name!r} has {m.dim}"
        )


def predictive_probability(k: KnowledgeState, m: Measurement) -> list[tuple[str, float]]:
    """Outcome probabilities averaged over the hypotheses: sum_j w_j Tr(rho_j E_i)."""
    _check_dims(k, m)
    return [
        (e.label, float(sum(w * born_probability(h.state, e)
                            for h, w in zip(k.hypotheses, k.weights))))
        for e in m.effects
    ]


def posterior_predictive(k: KnowledgeState, m: Measurement) -> list[tuple[str, float]]:
    """Predictions for a fresh, identically prepared copy given current knowledge.

    Same formula as :func:`predictive_probability`; by linearity of the trace
    it equals ``outcome_distribution(subjective_density(k), m)``. No claim is
    made that this is optimal under any particular loss.
    """
    return predictive_probability(k, m)


def bayes_update(k: KnowledgeState, m: Measurement, observed: str
                 ) -> tuple[KnowledgeState, UpdateReport]:
    """Condition ``k`` on outcome ``observed`` of measurement ``m``.

    Hypotheses left with posterior below ``TOL_PRUNE`` are removed and the
    rest renormalized; the returned :class:`UpdateReport` keeps the full
    pre-pruning numbers.
    """
    _check_dims(k, m)
    effect = m.effect(observed)
    prior = k.weights
    likelihood = np.array([born_probability(h.state, effect) for h in k.hypotheses])
    joint = likelihood * prior
    evidence = float(joint.sum())
    if evidence <= TOL_PROB:
        raise ImpossibleOutcomeError(
            f"observer {k.observer!r}: outcome {observed!r} has probability {evidence:.3g} "
            "under every hypothesis held; the observation contradicts this knowledge"
        )
    posterior = joint / evidence

    keep = posterior >= TOL_PRUNE
    pruned = tuple(h.id for h, kept in zip(k.hypotheses, keep) if not kept)
    weights = posterior[keep]
    if pruned:
        weights = weights / weights.sum()
    new = KnowledgeState(
        k.observer,
        tuple(h for h, kept in zip(k.hypotheses, keep) if kept),
        weights,
    )
    report = UpdateReport(
        observed=observed,
        hypothesis_ids=tuple(k.ids),
        prior=tuple(float(x) for x in prior),
        likelihood=tuple(float(x) for x in likelihood),
        evidence=evidence,
        posterior=tuple(float(x) for x in posterior),
        pruned=pruned,
    )
    return new, report


def update_sequence(k: KnowledgeState, m: Measurement, outcomes: Iterable[str]
                    ) -> tuple[KnowledgeState, list[UpdateReport]]:
    """Fold :func:`bayes_update` over independent outcomes of ``m``."""
    reports = []
    for label in outcomes:
        k, report = bayes_update(k, m, label)
        reports.append(report)
    return k, reports


def subjective_density(k: KnowledgeState) -> DensityMatrix:
    """The weighted mixture of the observer's candidate states."""
    return mix(list(zip(k.weights, (h.state for h in k.hypotheses))))


@dataclass(frozen=True)
class KnowledgeComparison:
    density_distance: float
    identical: bool


def ensembles_identical(a: KnowledgeState, b: KnowledgeState) -> bool:
    """Same hypothesis ids carrying the same states and (within TOL_ZERO) weights."""
    wa, wb = a.weight_map(), b.weight_map()
    if set(wa) != set(wb):
        return False
    sa = {h.id: h.state for h in a.hypotheses}
    sb = {h.id: h.state for h in b.hypotheses}
    return all(abs(wa[i] - wb[i]) < TOL_ZERO and sa[i] == sb[i] for i in wa)


def knowledge_distance(a: KnowledgeState, b: KnowledgeState) -> KnowledgeComparison:
    """Compare two observers both through their densities and as ensembles.

    A zero ``density_distance`` with ``identical=False`` is the case of two
    different states of knowledge collapsing onto one density matrix.
    """
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return KnowledgeComparison(
        density_distance=trace_distance(subjective_density(a), subjective_density(b)),
        identical=ensembles_identical(a, b),
    )

