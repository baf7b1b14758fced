"""Report serialization: stable JSON and a plain-text narrative."""

from __future__ import annotations

import json
import math

import numpy as np

REPORT_SCHEMA_VERSION = 1


def matrix_to_json(m: np.ndarray) -> list:
    """Rows of ``[re, im]`` pairs."""
    return [[[float(z.real) + 0.0, float(z.imag) + 0.0] for z in row] for row in np.asarray(m)]


def vector_to_json(v: np.ndarray) -> list:
    return [[float(z.real) + 0.0, float(z.imag) + 0.0] for z in np.asarray(v)]


def _float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number {x!r}")
    text = "%.17g" % (x + 0.0)
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _dump(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_dump(obj[k], indent, level + 1)}"
            for k in sorted(obj, key=str)
        ]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(x, (int, float, np.number)) and not isinstance(x, bool) for x in obj):
            return "[" + ", ".join(_dump(x, indent, level + 1) for x in obj) + "]"
        items = [f"{pad}{_dump(x, indent, level + 1)}" for x in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_stable(obj, indent: int = 2) -> str:
    """JSON with sorted keys and every float written with 17 significant digits.

    The output is byte-stable for equal inputs and parses back to equal values.
    """
    return _dump(obj, indent, 0) + "\n"


def emit_report(report, fmt: str = "json") -> str:
    """Render a :class:`~qknow.engine.RunReport` as ``json`` or ``text``."""
    data = report.to_dict() if hasattr(report, "to_dict") else report
    if fmt == "json":
        return dumps_stable(data)
    if fmt == "text":
        return render_text(data)
    raise ValueError(f"unknown report format {fmt!r}")


def _fmt_num(x: float) -> str:
    return f"{x:.6g}"


def _fmt_matrix(m: list, indent: str = "    ") -> str:
    lines = []
    for row in m:
        cells = []
        for re, im in row:
            cells.append(_fmt_num(re) if abs(im) < 1e-15 else f"{_fmt_num(re)}{im:+.6g}j")
        lines.append(indent + "[ " + "  ".join(f"{c:>10}" for c in cells) + " ]")
    return "\n".join(lines)


def _fmt_dist(d: dict) -> str:
    return ", ".join(f"{k}: {_fmt_num(v)}" for k, v in d.items())


def render_text(data: dict) -> str:
    out = []
    out.append(f"Scenario: {data['scenario']}  (seed {data['seed']}, {data['seed_source']})")
    if data.get("description"):
        out.append(f"  {data['description']}")
    obj = data["objective"]
    out.append("")
    out.append(f"Objective preparation: {obj['preparation']}  purity {_fmt_num(obj['purity'])}")
    out.append(_fmt_matrix(obj["initial_density"]))

    for i, ev in enumerate(data["events"]):
        out.append("")
        if ev["type"] == "measure":
            out.append(f"[{i}] measure {ev['measurement']} on {ev['copy']} system"
                       f" ({len(ev['trials'])} trial(s))")
            out.append(f"    objective distribution: {_fmt_dist(ev['objective_distribution'])}")
            counts: dict[str, int] = {}
            for t in ev["trials"]:
                counts[t["outcome"]] = counts.get(t["outcome"], 0) + 1
            forced = any(t["forced"] for t in ev["trials"])
            out.append(f"    outcomes: {_fmt_dist(counts)}{'  (forced)' if forced else ''}")
            for name, pred in ev["predictive_before"].items():
                after = ev["predictive_after"][name]
                out.append(f"    {name}: predictive {_fmt_dist(pred)}  ->  {_fmt_dist(after)}")
        elif ev["type"] == "update":
            out.append(f"[{i}] update {', '.join(ev['observers'])} from {ev['source']}"
                       f" ({len(ev['outcomes'])} outcome(s))")
        else:
            out.append(f"[{i}] assert {ev['path']}")

    out.append("")
    out.append(f"{'observer':<12} {'hypothesis':<12} {'prior':>10} {'posterior':>10}")
    for name, o in data["observers"].items():
        for h, p in o["prior"].items():
            out.append(f"{name:<12} {h:<12} {_fmt_num(p):>10} {_fmt_num(o['posterior'][h]):>10}")
    for name, o in data["observers"].items():
        out.append("")
        out.append(f"{name}: subjective density (purity {_fmt_num(o['purity'])},"
                   f" hypothesis entropy {_fmt_num(o['entropy_bits'])} bits)")
        out.append(_fmt_matrix(o["subjective_density"]))

    if data["assertions"]:
        out.append("")
        out.append("Assertions:")
        for a in data["assertions"]:
            status = "PASS" if a["passed"] else "FAIL"
            actual = "unresolved" if a["actual"] is None else _fmt_num(a["actual"])
            out.append(f"  {status}  {a['path']} = {actual}  ({a['expectation']})")
    out.append("")
    out.append("Result: " + ("passed" if data["passed"] else "FAILED"))
    return "\n".join(out) + "\n"
