import json
import textwrap

import numpy as np
import pytest

from qknow import ScenarioError, builtin_scenarios, emit_report, load_builtin, parse_scenario
from qknow import run_scenario
from qknow.builtins import BUILTIN_NAMES, builtin_text
from qknow.engine import resolve_path
from qknow.report import dumps_stable
from qknow.scenario import AssertEvent, MeasureEvent, UpdateEvent

BASE = """
schema_version = 1
name = "t"
dimension = 2
seed = 1
preparation = "up"

[states]
up = { amplitudes = [1, 0] }
down = { amplitudes = [0, 1] }
diag = { amplitudes = [1, 1], normalize = true }

[measurements]
vh = { preset = "vh-polarization" }
"""


def doc(extra):
    return BASE + textwrap.dedent(extra)


class TestParse:
    def test_photon_builtin(self):
        s = load_builtin("photon-alice-bob")
        assert s.preparation == "↑"
        assert [k.observer for k in s.observers] == ["Alice", "Bob"]
        assert len(s.measure_events) == 1
        assert s.measure_events[0].outcome == "↑"

    def test_all_builtins_validate(self):
        names = [s.name for s in builtin_scenarios()]
        assert names == list(BUILTIN_NAMES)
        assert "photon-alice-bob" in names

    def test_weight_sum_error_names_observer(self):
        text = doc("""
            [[observers]]
            name = "Bob"
            hypotheses = ["up", "down"]
            weights = [0.5, 0.4]
        """)
        with pytest.raises(ScenarioError, match=r"observers\[0\] \(Bob\)\.weights.*sum"):
            parse_scenario(text)

    def test_undefined_state_in_three_dims(self):
        text = """
            name = "three"
            dimension = 3
            preparation = "a"
            [states]
            a = { amplitudes = [1, 0, 0] }
            [[observers]]
            name = "Bob"
            hypotheses = ["a", "↗"]
        """
        with pytest.raises(ScenarioError, match="undefined state '↗'") as exc:
            parse_scenario(textwrap.dedent(text))
        assert "observers[0] (Bob)" in exc.value.location

    def test_syntax_error(self):
        with pytest.raises(ScenarioError, match="syntax error"):
            parse_scenario("name = ")

    @pytest.mark.parametrize("extra, match", [
        ('[states.bad]\namplitudes = [1, 0, 0]\n', "dimension 3"),
        ('[states.bad]\ndensity = [[0.5, 0], [0, 0.6]]\n', "trace"),
        ('[states.bad]\namplitudes = [2, 0]\n', "norm"),
        ('[states.bad]\namplitudes = ["x", 0]\n', "number"),
        ('[measurements.m3]\npreset = "computational"\n', None),
        ('[measurements.bad]\npreset = "nope"\n', "unknown measurement preset"),
    ])
    def test_state_and_measurement_errors(self, extra, match):
        text = BASE.replace("[measurements]", extra + "\n[measurements]") \
            if "states" in extra else BASE + extra.replace("measurements.", "measurements.")
        if match is None:
            parse_scenario(text)
        else:
            with pytest.raises(ScenarioError, match=match):
                parse_scenario(text)

    def test_complex_entries(self):
        text = BASE.replace("[measurements]", """
            [states.y]
            amplitudes = [[0.7071067811865476, 0], [0, 0.7071067811865476]]
            [measurements]""")
        s = parse_scenario(textwrap.dedent(text))
        np.testing.assert_allclose(s.states["y"].matrix, [[0.5, -0.5j], [0.5j, 0.5]], atol=1e-15)

    def test_general_measurement(self):
        text = doc("""
            [measurements.weak]
            effects = [
              { label = "a", matrix = [[0.9, 0], [0, 0.1]] },
              { label = "b", matrix = [[0.1, 0], [0, 0.9]] },
            ]
        """)
        m = parse_scenario(text).measurements["weak"]
        assert m.kind == "general"
        assert m.labels == ["a", "b"]

    def test_incomplete_povm(self):
        text = doc("""
            [measurements.bad]
            effects = [{ label = "a", matrix = [[0.9, 0], [0, 0.1]] }]
        """)
        with pytest.raises(ScenarioError, match="identity"):
            parse_scenario(text)

    def test_events(self):
        text = doc("""
            [[observers]]
            name = "A"
            hypotheses = ["up", "diag"]

            [[events]]
            type = "measure"
            id = "m"
            measurement = "vh"
            update = false

            [[events]]
            type = "update"
            source = "m"

            [[events]]
            type = "assert"
            path = "observers/A/posterior/up"
            min = 0.5
        """)
        s = parse_scenario(text)
        assert isinstance(s.events[0], MeasureEvent) and not s.events[0].update
        assert s.events[1] == UpdateEvent("m", None)
        assert s.events[2] == AssertEvent("observers/A/posterior/up", min=0.5)

    @pytest.mark.parametrize("events, match", [
        ('type = "update"\nsource = "m"', "no earlier measure event"),
        ('type = "measure"\nmeasurement = "zz"', "undefined measurement"),
        ('type = "measure"\nmeasurement = "vh"\noutcome = "↗"', "forced outcome"),
        ('type = "measure"\nmeasurement = "vh"\ntrials = 0', "positive"),
        ('type = "measure"\nmeasurement = "vh"\noutcome = "↑"\ntrials = 2', "trials = 1"),
        ('type = "measure"\nmeasurement = "vh"\ncopy = "other"', "copy"),
        ('type = "measure"\nmeasurement = "vh"\nobservers = ["Z"]', "unknown observer"),
        ('type = "assert"\npath = "x"\nequals = 1.0', "explicit 'tol'"),
        ('type = "assert"\npath = "x"', "needs"),
        ('type = "jump"', "unknown event type"),
    ])
    def test_event_errors(self, events, match):
        text = doc(f"""
            [[observers]]
            name = "A"
            hypotheses = ["up"]
        """) + "\n[[events]]\n" + events + "\n"
        with pytest.raises(ScenarioError, match=match):
            parse_scenario(text)

    def test_double_update_rejected(self):
        text = doc("""
            [[observers]]
            name = "A"
            hypotheses = ["up", "diag"]
            [[events]]
            type = "measure"
            id = "m"
            measurement = "vh"
            [[events]]
            type = "update"
            source = "m"
        """)
        with pytest.raises(ScenarioError, match="already updated"):
            parse_scenario(text)


class TestRun:
    def test_photon(self):
        r = run_scenario(load_builtin("photon-alice-bob"), seed=0)
        d = r.to_dict()
        assert r.passed
        assert d["observers"]["Alice"]["posterior"] == {"↑": 1.0, "↔": 0.0}
        assert d["observers"]["Bob"]["posterior"] == pytest.approx(
            {"↑": 0.5, "↔": 0.0, "↗": 0.25, "↘": 0.25}, abs=1e-12)
        assert d["observers"]["Bob"]["hypotheses"] == ["↑", "↗", "↘"]
        rho_b = np.array(d["observers"]["Bob"]["subjective_density"])[..., 0]
        np.testing.assert_allclose(rho_b, [[0.75, 0], [0, 0.25]], atol=1e-12)
        update = d["events"][0]["trials"][0]["updates"]["Bob"]
        assert update["likelihood"] == pytest.approx({"↑": 1, "↔": 0, "↗": 0.5, "↘": 0.5})
        assert update["evidence"] == pytest.approx(0.5)
        assert update["pruned"] == ["↔"]

    def test_spin(self):
        d = run_scenario(load_builtin("spin-example"), seed=0).to_dict()
        pred = d["events"][0]["predictive_before"]["Informed"]
        assert pred["+"] == pytest.approx(0.64, abs=1e-12)
        assert pred["-"] == pytest.approx(0.36, abs=1e-12)
        assert d["passed"]

    def test_bb84_entropy_decreases(self):
        d = run_scenario(load_builtin("bb84-ensemble"), seed=0).to_dict()
        assert d["passed"]
        eve = [t["entropy_bits"]["Eve"] for ev in d["events"] if ev["type"] == "measure"
               for t in ev["trials"]]
        assert len(eve) == 32
        assert all(b <= a + 1e-12 for a, b in zip(eve, eve[1:]))
        assert eve[-1] == pytest.approx(0.0, abs=1e-9)

    def test_no_events(self):
        s = parse_scenario(doc("""
            [[observers]]
            name = "A"
            hypotheses = ["up", "down"]
        """))
        d = run_scenario(s).to_dict()
        assert d["events"] == [] and d["assertions"] == []
        assert d["observers"]["A"]["prior"] == {"up": 0.5, "down": 0.5}
        assert d["objective"]["preparation"] == "up"
        assert '"events": []' in emit_report(run_scenario(s))

    def test_forced_impossible_outcome(self):
        s = parse_scenario(doc("""
            [[events]]
            type = "measure"
            measurement = "vh"
            outcome = "↔"
        """))
        with pytest.raises(ScenarioError, match="objective probability"):
            run_scenario(s)

    def test_impossible_observation_names_observer(self):
        s = parse_scenario(BASE.replace('preparation = "up"', 'preparation = "diag"') + textwrap.dedent("""
            [[observers]]
            name = "Stubborn"
            hypotheses = ["up"]
            [[events]]
            type = "measure"
            measurement = "vh"
            outcome = "↔"
        """))
        with pytest.raises(ScenarioError, match="Stubborn"):
            run_scenario(s)

    def test_objective_trajectory(self):
        s = parse_scenario(BASE.replace('preparation = "up"', 'preparation = "diag"') + textwrap.dedent("""
            [measurements.diagonal]
            preset = "diagonal-polarization"
            [[events]]
            type = "measure"
            measurement = "vh"
            outcome = "↔"
            [[events]]
            type = "measure"
            measurement = "vh"
            [[events]]
            type = "measure"
            measurement = "diagonal"
            copy = "fresh"
            trials = 5
        """))
        d = run_scenario(s, seed=4).to_dict()
        assert d["events"][1]["outcomes"] == ["↔"]
        assert d["events"][1]["objective_distribution"] == {"↑": 0.0, "↔": 1.0}
        # fresh copies are still prepared diagonally and leave the trajectory alone
        assert d["events"][2]["outcomes"] == ["↗"] * 5
        assert len(d["objective_trajectory"]) == 3
        assert d["objective"]["density"][1][1][0] == pytest.approx(1.0)

    def test_deferred_and_selective_updates(self):
        text = doc("""
            [[observers]]
            name = "A"
            hypotheses = ["up", "diag"]
            [[observers]]
            name = "B"
            hypotheses = ["up", "diag"]
            [[events]]
            type = "measure"
            id = "m"
            measurement = "vh"
            trials = 3
            copy = "fresh"
            observers = ["A"]
            [[events]]
            type = "update"
            source = "m"
            observers = ["B"]
        """)
        d = run_scenario(parse_scenario(text)).to_dict()
        # outcome ↑ three times: (1 : 1/8) -> 8/9
        assert d["observers"]["A"]["posterior"]["up"] == pytest.approx(8 / 9, abs=1e-12)
        assert d["observers"]["B"]["posterior"] == d["observers"]["A"]["posterior"]
        assert len(d["events"][1]["updates"]["B"]) == 3

    def test_assertion_failure_and_unresolved_path(self):
        s = parse_scenario(doc("""
            [[observers]]
            name = "A"
            hypotheses = ["up", "down"]
            [[events]]
            type = "assert"
            path = "observers/A/posterior/up"
            equals = 0.4
            tol = 1e-3
            [[events]]
            type = "assert"
            path = "observers/A/nothing"
            max = 1
        """))
        r = run_scenario(s)
        assert not r.passed
        assert r.assertions[0]["actual"] == 0.5 and not r.assertions[0]["passed"]
        assert r.assertions[1]["actual"] is None and "nothing" in r.assertions[1]["error"]

    def test_observer_order_does_not_change_numbers(self):
        text = builtin_text("photon-alice-bob")
        a_block = text[text.index('[[observers]]\nname = "Alice"'):text.index('[[observers]]\nname = "Bob"')]
        swapped = text.replace(a_block, "")
        swapped = swapped.replace("[[events]]", a_block + "[[events]]", 1)
        s1, s2 = parse_scenario(text), parse_scenario(swapped)
        assert [k.observer for k in s2.observers] == ["Bob", "Alice"]
        d1, d2 = run_scenario(s1, 0).to_dict(), run_scenario(s2, 0).to_dict()
        # only the order of observer-name lists may differ
        for d in (d1, d2):
            d["events"][0]["updated_observers"].sort()
        assert dumps_stable(d1) == dumps_stable(d2)

    def test_seed_precedence(self):
        s = load_builtin("bb84-ensemble")
        assert run_scenario(s).seed_source == "scenario"
        r = run_scenario(s, seed=5)
        assert (r.seed, r.seed_source) == (5, "argument")
        unseeded = parse_scenario(builtin_text("bb84-ensemble").replace("seed = 0\n", ""))
        r = run_scenario(unseeded)
        assert r.seed_source == "entropy" and 0 <= r.seed < 2**64


class TestReport:
    @pytest.mark.parametrize("name", BUILTIN_NAMES)
    def test_deterministic(self, name):
        s = load_builtin(name)
        assert emit_report(run_scenario(s, 0)) == emit_report(run_scenario(s, 0))

    @pytest.mark.parametrize("name", BUILTIN_NAMES)
    def test_json_round_trip(self, name):
        r = run_scenario(load_builtin(name), 0)
        assert json.loads(emit_report(r, "json")) == r.to_dict()

    def test_key_path(self):
        data = json.loads(emit_report(run_scenario(load_builtin("photon-alice-bob"), 0)))
        assert resolve_path(data, "observers/Bob/posterior/↑") == 0.5
        assert data["schema_version"] == 1

    def test_float_format(self):
        out = dumps_stable({"b": 0.1, "a": [1.0, 2, -0.0], "c": 1 / 3})
        assert out == '{\n  "a": [1.0, 2, 0.0],\n  "b": 0.10000000000000001,\n  "c": 0.33333333333333331\n}\n'
        assert json.loads(out) == {"a": [1.0, 2, 0.0], "b": 0.1, "c": 1 / 3}

    def test_text(self):
        text = emit_report(run_scenario(load_builtin("photon-alice-bob"), 0), "text")
        assert "Bob" in text and "0.75" in text and "Result: passed" in text

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            emit_report(run_scenario(load_builtin("spin-example"), 0), "xml")
