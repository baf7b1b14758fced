"""Execute a :class:`~qknow.scenario.Scenario` and collect a :class:`RunReport`.

The objective system starts in the preparation. Measure events act either on
that system (which then undergoes the Lüders update) or on fresh copies of
the preparation. Observers never see the objective state; they only receive
outcome labels and update their hypothesis ensembles by Bayes' rule.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field

from .errors import ImpossibleOutcomeError, ScenarioError
from .measurement import (
    TOL_PROB,
    Measurement,
    OutcomeRecord,
    luders_update,
    make_rng,
    outcome_distribution,
    sample_outcome,
)
from .observer import (
    KnowledgeState,
    bayes_update,
    posterior_predictive,
    subjective_density,
)
from .report import REPORT_SCHEMA_VERSION, matrix_to_json
from .scenario import COPY_CURRENT, AssertEvent, MeasureEvent, Scenario, UpdateEvent
from .states import purity


@dataclass
class RunReport:
    scenario: str
    description: str
    seed: int
    seed_source: str
    dimension: int
    objective: dict
    observers: dict
    events: list = field(default_factory=list)
    assertions: list = field(default_factory=list)
    objective_trajectory: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(a["passed"] for a in self.assertions)

    def to_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "scenario": self.scenario,
            "description": self.description,
            "seed": self.seed,
            "seed_source": self.seed_source,
            "dimension": self.dimension,
            "objective": self.objective,
            "observers": self.observers,
            "events": self.events,
            "assertions": self.assertions,
            "objective_trajectory": self.objective_trajectory,
            "passed": self.passed,
        }


def _dist(pairs) -> dict:
    return {label: p for label, p in pairs}


def _observer_summary(initial: KnowledgeState, current: KnowledgeState, updates: int) -> dict:
    weights = current.weight_map()
    rho = subjective_density(current)
    return {
        "hypotheses": current.ids,
        "prior": initial.weight_map(),
        "posterior": {h: weights.get(h, 0.0) for h in initial.ids},
        "prior_density": matrix_to_json(subjective_density(initial).matrix),
        "subjective_density": matrix_to_json(rho.matrix),
        "purity": purity(rho),
        "entropy_bits": current.entropy_bits(),
        "updates": updates,
    }


def resolve_path(data, path: str):
    """Follow a ``/``-separated path through nested dicts and lists."""
    node = data
    for part in path.split("/"):
        if isinstance(node, dict):
            if part not in node:
                raise KeyError(f"no key {part!r}")
            node = node[part]
        elif isinstance(node, list):
            try:
                node = node[int(part)]
            except (ValueError, IndexError):
                raise KeyError(f"bad list index {part!r}") from None
        else:
            raise KeyError(f"cannot descend into {type(node).__name__} at {part!r}")
    return node


def _check(ev: AssertEvent, actual) -> tuple[bool, str]:
    parts = []
    ok = True
    if ev.equals is not None:
        parts.append(f"== {ev.equals!r} ± {ev.tol!r}")
        ok &= abs(actual - ev.equals) <= ev.tol
    if ev.min is not None:
        parts.append(f">= {ev.min!r}")
        ok &= actual >= ev.min
    if ev.max is not None:
        parts.append(f"<= {ev.max!r}")
        ok &= actual <= ev.max
    return bool(ok), ", ".join(parts)


class _Run:
    def __init__(self, s: Scenario, seed: int):
        self.s = s
        self.rng = make_rng(seed)
        self.prep = s.states[s.preparation]
        self.system = self.prep
        self.initial = {k.observer: k for k in s.observers}
        self.knowledge = dict(self.initial)
        self.updates = {name: 0 for name in self.knowledge}
        self.outcomes: dict[str, tuple[Measurement, list[str]]] = {}
        self.events: list[dict] = []
        self.assertions: list[dict] = []
        self.trajectory = [{"after_event": None, "density": matrix_to_json(self.prep.matrix)}]

    def objective(self) -> dict:
        return {
            "preparation": self.s.preparation,
            "initial_density": matrix_to_json(self.prep.matrix),
            "density": matrix_to_json(self.system.matrix),
            "purity": purity(self.prep),
        }

    def observers(self) -> dict:
        return {
            name: _observer_summary(self.initial[name], k, self.updates[name])
            for name, k in self.knowledge.items()
        }

    def _update(self, name: str, m: Measurement, label: str, index: int) -> dict:
        try:
            self.knowledge[name], report = bayes_update(self.knowledge[name], m, label)
        except ImpossibleOutcomeError as exc:
            raise ScenarioError(str(exc), f"events[{index}] observer {name!r}") from None
        self.updates[name] += 1
        return report.as_dict()

    def _snapshot(self, attr):
        return {name: attr(k) for name, k in self.knowledge.items()}

    def measure(self, index: int, ev: MeasureEvent):
        m = self.s.measurements[ev.measurement]
        targets = (ev.observers if ev.observers is not None else tuple(self.knowledge)) \
            if ev.update else ()
        fresh = ev.copy != COPY_CURRENT
        record = {
            "type": "measure",
            "id": ev.id,
            "measurement": ev.measurement,
            "copy": ev.copy,
            "objective_distribution": _dist(outcome_distribution(
                self.prep if fresh else self.system, m)),
            "predictive_before": self._snapshot(lambda k: _dist(posterior_predictive(k, m))),
            "subjective_density_before": self._snapshot(
                lambda k: matrix_to_json(subjective_density(k).matrix)),
            "updated_observers": list(targets),
        }
        trials = []
        labels = []
        for _ in range(ev.trials):
            system = self.prep if fresh else self.system
            if ev.outcome is not None:
                p = dict(outcome_distribution(system, m))[ev.outcome]
                if p <= TOL_PROB:
                    raise ScenarioError(
                        f"forced outcome {ev.outcome!r} has objective probability {p:.3g}",
                        f"events[{index}]",
                    )
                outcome = OutcomeRecord(m.name, ev.outcome, p)
            else:
                outcome = sample_outcome(system, m, self.rng)
            if not fresh:
                self.system = luders_update(self.system, m.effect(outcome.label))
                self.trajectory.append({"after_event": index,
                                        "density": matrix_to_json(self.system.matrix)})
            updates = {name: self._update(name, m, outcome.label, index) for name in targets}
            trials.append({
                "outcome": outcome.label,
                "probability": outcome.probability,
                "forced": ev.outcome is not None,
                "updates": updates,
                "entropy_bits": {name: self.knowledge[name].entropy_bits() for name in targets},
            })
            labels.append(outcome.label)
        self.outcomes[ev.id] = (m, labels)
        record["trials"] = trials
        record["outcomes"] = labels
        record["predictive_after"] = self._snapshot(lambda k: _dist(posterior_predictive(k, m)))
        record["subjective_density_after"] = self._snapshot(
            lambda k: matrix_to_json(subjective_density(k).matrix))
        self.events.append(record)

    def update(self, index: int, ev: UpdateEvent):
        m, labels = self.outcomes[ev.source]
        targets = ev.observers if ev.observers is not None else tuple(self.knowledge)
        reports = {name: [self._update(name, m, label, index) for label in labels]
                   for name in targets}
        self.events.append({
            "type": "update",
            "source": ev.source,
            "observers": list(targets),
            "outcomes": labels,
            "updates": reports,
            "subjective_density_after": self._snapshot(
                lambda k: matrix_to_json(subjective_density(k).matrix)),
        })

    def check(self, index: int, ev: AssertEvent):
        view = {"objective": self.objective(), "observers": self.observers(),
                "events": self.events}
        entry = {"path": ev.path, "event": index}
        try:
            actual = resolve_path(view, ev.path)
            if isinstance(actual, bool) or not isinstance(actual, (int, float)):
                raise KeyError(f"path does not lead to a number ({type(actual).__name__})")
            passed, expectation = _check(ev, actual)
            entry.update(actual=float(actual), passed=passed, expectation=expectation)
        except KeyError as exc:
            _, expectation = _check(ev, 0.0)
            entry.update(actual=None, passed=False, expectation=expectation,
                         error=str(exc.args[0]))
        self.assertions.append(entry)
        self.events.append({"type": "assert", "path": ev.path, "passed": entry["passed"]})


def run_scenario(s: Scenario, seed: int | None = None) -> RunReport:
    """Execute every event in order; deterministic for a given seed.

    The seed is taken from ``seed``, else from the scenario, else drawn from
    system entropy; the report records which.
    """
    if seed is not None:
        source = "argument"
    elif s.seed is not None:
        seed, source = s.seed, "scenario"
    else:
        seed, source = secrets.randbits(64), "entropy"

    run = _Run(s, seed)
    for index, ev in enumerate(s.events):
        if isinstance(ev, MeasureEvent):
            run.measure(index, ev)
        elif isinstance(ev, UpdateEvent):
            run.update(index, ev)
        else:
            run.check(index, ev)

    return RunReport(
        scenario=s.name,
        description=s.description,
        seed=seed,
        seed_source=source,
        dimension=s.dimension,
        objective=run.objective(),
        observers=run.observers(),
        events=run.events,
        assertions=run.assertions,
        objective_trajectory=run.trajectory,
    )

