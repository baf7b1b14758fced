"""Scenario documents: a TOML description of a preparation, observers and events.

Complex numbers are written as ``[re, im]`` pairs; a bare number is read as
a real entry. A minimal document::

    schema_version = 1
    name = "demo"
    dimension = 2
    preparation = "up"

    [states]
    up = { amplitudes = [1, 0] }
    diag = { amplitudes = [1, 1], normalize = true }

    [measurements]
    vh = { preset = "vh-polarization" }

    [[observers]]
    name = "Alice"
    hypotheses = ["up", "diag"]
    weights = "uniform"

    [[events]]
    type = "measure"
    measurement = "vh"
    outcome = "↑"

    [[events]]
    type = "assert"
    path = "observers/Alice/posterior/up"
    equals = 0.6666666666666666
    tol = 1e-12

See README.md for the full field reference.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from numbers import Real

import numpy as np

from .errors import QknowError, ScenarioError
from .measurement import Effect, Measurement, preset_measurement
from .observer import Hypothesis, KnowledgeState
from .states import DensityMatrix, density_from_pure, density_matrix, pure_state_new

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCHEMA_VERSION = 1
COPY_CURRENT = "current"
COPY_FRESH = "fresh"
_UNIFORM = ("uniform", "uninformative")


@dataclass(frozen=True)
class MeasureEvent:
    """Measure the objective system and (by default) update observers.

    ``copy="current"`` acts on the evolving system, which then undergoes the
    Lüders update; ``copy="fresh"`` measures newly prepared copies and leaves
    the system untouched. ``outcome`` forces the result instead of sampling.
    ``observers=None`` means every observer; ``update=False`` defers updates
    to a later :class:`UpdateEvent`.
    """

    id: str
    measurement: str
    outcome: str | None = None
    copy: str = COPY_CURRENT
    trials: int = 1
    observers: tuple[str, ...] | None = None
    update: bool = True


@dataclass(frozen=True)
class UpdateEvent:
    """Feed the outcomes of an earlier measure event to some observers."""

    source: str
    observers: tuple[str, ...] | None = None


@dataclass(frozen=True)
class AssertEvent:
    """Numeric check on a report field, ``|actual - equals| <= tol`` or a bound."""

    path: str
    equals: float | None = None
    tol: float | None = None
    min: float | None = None
    max: float | None = None


Event = MeasureEvent | UpdateEvent | AssertEvent


@dataclass(frozen=True)
class Scenario:
    name: str
    dimension: int
    states: dict[str, DensityMatrix]
    preparation: str
    observers: tuple[KnowledgeState, ...]
    measurements: dict[str, Measurement]
    events: tuple[Event, ...] = ()
    seed: int | None = None
    description: str = ""
    schema_version: int = SCHEMA_VERSION
    source: str = field(default="<string>", compare=False)

    def observer(self, name: str) -> KnowledgeState:
        for k in self.observers:
            if k.observer == name:
                return k
        raise KeyError(name)

    @property
    def measure_events(self) -> list[MeasureEvent]:
        return [e for e in self.events if isinstance(e, MeasureEvent)]


def _complex(x, where: str) -> complex:
    if isinstance(x, bool):
        raise ScenarioError(f"expected a number or [re, im] pair, got {x!r}", where)
    if isinstance(x, Real):
        return complex(float(x), 0.0)
    if (isinstance(x, list) and len(x) == 2
            and all(isinstance(v, Real) and not isinstance(v, bool) for v in x)):
        return complex(float(x[0]), float(x[1]))
    raise ScenarioError(f"expected a number or [re, im] pair, got {x!r}", where)


def parse_vector(data, where: str) -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise ScenarioError("expected a non-empty array of entries", where)
    return np.array([_complex(x, f"{where}[{i}]") for i, x in enumerate(data)])


def parse_matrix(data, where: str) -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise ScenarioError("expected an array of rows", where)
    rows = [parse_vector(r, f"{where}[{i}]") for i, r in enumerate(data)]
    if len({len(r) for r in rows}) != 1:
        raise ScenarioError("rows have different lengths", where)
    return np.array(rows)


def _table(doc: dict, key: str, where: str) -> dict:
    value = doc.get(key, {})
    if not isinstance(value, dict):
        raise ScenarioError("expected a table", f"{where}{key}")
    return value


def _require(table: dict, key: str, kind, where: str):
    if key not in table:
        raise ScenarioError(f"missing required field {key!r}", where)
    value = table[key]
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ScenarioError(f"field {key!r} has the wrong type ({type(value).__name__})", where)
    return value


def _parse_state(label: str, spec, dim: int) -> DensityMatrix:
    where = f"states.{label}"
    if not isinstance(spec, dict):
        raise ScenarioError("a state is a table with 'amplitudes' or 'density'", where)
    try:
        if "amplitudes" in spec:
            amps = parse_vector(spec["amplitudes"], f"{where}.amplitudes")
            if spec.get("normalize", False):
                norm = np.linalg.norm(amps)
                amps = amps / norm if norm > 0 else amps
            rho = density_from_pure(pure_state_new(amps))
        elif "density" in spec:
            rho = density_matrix(parse_matrix(spec["density"], f"{where}.density"))
        else:
            raise ScenarioError("a state needs 'amplitudes' or 'density'", where)
    except ScenarioError:
        raise
    except QknowError as exc:
        raise ScenarioError(str(exc), where) from None
    if rho.dim != dim:
        raise ScenarioError(f"state has dimension {rho.dim}, scenario dimension is {dim}", where)
    return rho


def _parse_measurement(name: str, spec, dim: int) -> Measurement:
    where = f"measurements.{name}"
    if not isinstance(spec, dict):
        raise ScenarioError("a measurement is a table with 'preset' or 'effects'", where)
    try:
        if "preset" in spec:
            m = preset_measurement(_require(spec, "preset", str, where), dim)
            return Measurement(m.effects, m.kind, name)
        effects_spec = _require(spec, "effects", list, where)
        effects = []
        for i, e in enumerate(effects_spec):
            ew = f"{where}.effects[{i}]"
            if not isinstance(e, dict):
                raise ScenarioError("an effect is a table with 'label' and 'matrix'", ew)
            label = _require(e, "label", str, ew)
            effects.append(Effect(label, parse_matrix(_require(e, "matrix", list, ew), f"{ew}.matrix")))
        m = Measurement(tuple(effects), spec.get("kind"), name)
    except ScenarioError:
        raise
    except QknowError as exc:
        raise ScenarioError(str(exc), where) from None
    if m.dim != dim:
        raise ScenarioError(f"measurement has dimension {m.dim}, scenario dimension is {dim}", where)
    return m


def _parse_observer(i: int, spec, states: dict[str, DensityMatrix]) -> KnowledgeState:
    where = f"observers[{i}]"
    if not isinstance(spec, dict):
        raise ScenarioError("an observer is a table", where)
    name = _require(spec, "name", str, where)
    where = f"observers[{i}] ({name})"
    ids = _require(spec, "hypotheses", list, where)
    hyps = []
    for ref in ids:
        if ref not in states:
            raise ScenarioError(f"hypothesis refers to undefined state {ref!r}", f"{where}.hypotheses")
        hyps.append(Hypothesis(ref, states[ref]))
    weights = spec.get("weights", "uniform")
    try:
        if isinstance(weights, str):
            if weights not in _UNIFORM:
                raise ScenarioError(f"weights must be a list or one of {_UNIFORM}",
                                    f"{where}.weights")
            return KnowledgeState.uniform(name, hyps)
        if not isinstance(weights, list):
            raise ScenarioError("weights must be a list of numbers", f"{where}.weights")
        w = np.array([float(x) for x in weights])
        if w.size != len(hyps):
            raise ScenarioError(f"{w.size} weights for {len(hyps)} hypotheses", f"{where}.weights")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ScenarioError(f"weights sum to {w.sum():.12g}, expected 1", f"{where}.weights")
        return KnowledgeState(name, tuple(hyps), w)
    except ScenarioError:
        raise
    except (QknowError, TypeError, ValueError) as exc:
        raise ScenarioError(str(exc), where) from None


def _observer_list(ev: dict, key: str, known: list[str], where: str) -> tuple[str, ...] | None:
    if key not in ev:
        return None
    names = ev[key]
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise ScenarioError("expected a list of observer names", f"{where}.{key}")
    for n in names:
        if n not in known:
            raise ScenarioError(f"unknown observer {n!r}", f"{where}.{key}")
    return tuple(names)


def _parse_events(raw, measurements: dict[str, Measurement], observers: list[str]
                  ) -> tuple[Event, ...]:
    if not isinstance(raw, list):
        raise ScenarioError("expected an array of tables", "events")
    events: list[Event] = []
    measure_ids: dict[str, MeasureEvent] = {}
    fed: dict[str, set[str]] = {}
    for i, ev in enumerate(raw):
        where = f"events[{i}]"
        if not isinstance(ev, dict):
            raise ScenarioError("an event is a table", where)
        kind = _require(ev, "type", str, where)
        if kind == "measure":
            mid = ev.get("id", f"m{len(measure_ids)}")
            if not isinstance(mid, str) or mid in measure_ids:
                raise ScenarioError(f"measure event id {mid!r} is invalid or repeated", where)
            mname = _require(ev, "measurement", str, where)
            if mname not in measurements:
                raise ScenarioError(f"undefined measurement {mname!r}", f"{where}.measurement")
            outcome = ev.get("outcome")
            if outcome is not None and outcome not in measurements[mname].labels:
                raise ScenarioError(
                    f"forced outcome {outcome!r} is not one of {measurements[mname].labels}",
                    f"{where}.outcome",
                )
            copy = ev.get("copy", COPY_CURRENT)
            if copy not in (COPY_CURRENT, COPY_FRESH):
                raise ScenarioError(f"copy must be {COPY_CURRENT!r} or {COPY_FRESH!r}", f"{where}.copy")
            trials = ev.get("trials", 1)
            if not isinstance(trials, int) or isinstance(trials, bool) or trials < 1:
                raise ScenarioError("trials must be a positive integer", f"{where}.trials")
            if outcome is not None and trials != 1:
                raise ScenarioError("a forced outcome needs trials = 1", where)
            update = ev.get("update", True)
            if not isinstance(update, bool):
                raise ScenarioError("update must be true or false", f"{where}.update")
            targets = _observer_list(ev, "observers", observers, where)
            event = MeasureEvent(mid, mname, outcome, copy, trials, targets, update)
            measure_ids[mid] = event
            fed[mid] = set(targets if targets is not None else observers) if update else set()
        elif kind == "update":
            source = _require(ev, "source", str, where)
            if source not in measure_ids:
                raise ScenarioError(f"update refers to no earlier measure event {source!r}",
                                    f"{where}.source")
            targets = _observer_list(ev, "observers", observers, where)
            again = fed[source] & set(targets if targets is not None else observers)
            if again:
                raise ScenarioError(
                    f"observers {sorted(again)} were already updated from {source!r}", where
                )
            fed[source] |= set(targets if targets is not None else observers)
            event = UpdateEvent(source, targets)
        elif kind == "assert":
            path = _require(ev, "path", str, where)
            nums = {}
            for key in ("equals", "tol", "min", "max"):
                if key in ev:
                    v = ev[key]
                    if not isinstance(v, Real) or isinstance(v, bool):
                        raise ScenarioError(f"{key} must be a number", f"{where}.{key}")
                    nums[key] = float(v)
            if "equals" in nums and "tol" not in nums:
                raise ScenarioError("an 'equals' assertion needs an explicit 'tol'", where)
            if not {"equals", "min", "max"} & nums.keys():
                raise ScenarioError("an assertion needs 'equals', 'min' or 'max'", where)
            event = AssertEvent(path, **nums)
        else:
            raise ScenarioError(f"unknown event type {kind!r}", f"{where}.type")
        events.append(event)
    return tuple(events)


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    """Parse and validate a scenario document.

    Every problem is reported as a :class:`ScenarioError` whose message starts
    with the location in the document.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"syntax error: {exc}", source) from None

    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {version!r}", "schema_version")
    name = _require(doc, "name", str, "<document>")
    dim = _require(doc, "dimension", int, "<document>")
    if dim < 1:
        raise ScenarioError("dimension must be positive", "dimension")
    seed = doc.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)
                             or not 0 <= seed < 2**64):
        raise ScenarioError("seed must be a 64-bit unsigned integer", "seed")

    states = {label: _parse_state(label, spec, dim)
              for label, spec in _table(doc, "states", "").items()}
    prep = _require(doc, "preparation", str, "<document>")
    if prep not in states:
        raise ScenarioError(f"undefined state {prep!r}", "preparation")

    measurements = {mname: _parse_measurement(mname, spec, dim)
                    for mname, spec in _table(doc, "measurements", "").items()}

    raw_observers = doc.get("observers", [])
    if not isinstance(raw_observers, list):
        raise ScenarioError("expected an array of tables", "observers")
    observers = tuple(_parse_observer(i, o, states) for i, o in enumerate(raw_observers))
    names = [k.observer for k in observers]
    if len(set(names)) != len(names):
        raise ScenarioError(f"observer names must be unique: {names}", "observers")

    events = _parse_events(doc.get("events", []), measurements, names)
    return Scenario(
        name=name,
        dimension=dim,
        states=states,
        preparation=prep,
        observers=observers,
        measurements=measurements,
        events=events,
        seed=seed,
        description=str(doc.get("description", "")),
        schema_version=version,
        source=source,
    )
