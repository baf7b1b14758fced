"""Command line interface: ``qknow run|validate|decompose|list-builtins``.

Exit codes: 0 success, 1 assertion or verification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from pathlib import Path

from .builtins import BUILTIN_NAMES, builtin_text
from .decomposition import (
    ensemble_density,
    ensembles_equal_as_knowledge,
    random_unitary,
    same_density,
    spectral_decomposition,
    transform_ensemble,
)
from .engine import run_scenario
from .errors import QknowError
from .measurement import make_rng
from .report import dumps_stable, emit_report, matrix_to_json, vector_to_json
from .scenario import parse_matrix, parse_scenario
from .states import density_matrix, trace_distance

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2


class InputError(Exception):
    pass


def _load_text(ref: str) -> tuple[str, str]:
    path = Path(ref)
    if path.is_file():
        return path.read_text(encoding="utf-8"), str(path)
    if ref in BUILTIN_NAMES:
        return builtin_text(ref), f"builtin:{ref}"
    raise InputError(f"{ref!r} is neither a file nor a built-in scenario "
                     f"({', '.join(BUILTIN_NAMES)})")


def cmd_run(args) -> int:
    text, source = _load_text(args.scenario)
    report = run_scenario(parse_scenario(text, source), seed=args.seed)
    sys.stdout.write(emit_report(report, args.format))
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_validate(args) -> int:
    text, source = _load_text(args.scenario)
    s = parse_scenario(text, source)
    print(f"{source}: ok ({s.name}: dimension {s.dimension}, {len(s.states)} states, "
          f"{len(s.observers)} observers, {len(s.measure_events)} measure events, "
          f"{len(s.events)} events)")
    return EXIT_OK


def cmd_list(args) -> int:
    for name in BUILTIN_NAMES:
        print(name)
    return EXIT_OK


def _ensemble_json(e) -> list:
    return [{"weight": w, "state": vector_to_json(s.amplitudes)} for w, s in e.components]


def cmd_decompose(args) -> int:
    if args.scenario:
        if not args.state:
            raise InputError("--scenario needs --state")
        text, source = _load_text(args.scenario)
        s = parse_scenario(text, source)
        if args.state not in s.states:
            raise InputError(f"scenario {s.name!r} has no state {args.state!r}")
        rho = s.states[args.state]
    elif args.matrix:
        try:
            raw = json.loads(args.matrix)
        except json.JSONDecodeError as exc:
            raise InputError(f"matrix is not valid JSON: {exc}") from None
        rho = density_matrix(parse_matrix(raw, "matrix"))
    else:
        raise InputError("give a matrix (JSON rows of numbers or [re, im] pairs) "
                         "or --scenario with --state")

    spectral = spectral_decomposition(rho)
    seed, seed_source = (args.seed, "argument") if args.seed is not None \
        else (secrets.randbits(64), "entropy")
    rng = make_rng(seed)
    ok = trace_distance(ensemble_density(spectral), rho) < 1e-10
    randoms = []
    for _ in range(args.random):
        e = transform_ensemble(spectral, random_unitary(len(spectral), rng))
        same = same_density(e, spectral)
        ok &= same
        randoms.append({
            "components": _ensemble_json(e),
            "same_density": same,
            "equal_as_knowledge": ensembles_equal_as_knowledge(e, spectral),
            "trace_distance": trace_distance(ensemble_density(e), rho),
        })
    out = {
        "density": matrix_to_json(rho.matrix),
        "spectral": _ensemble_json(spectral),
        "random_ensembles": randoms,
        "seed": seed,
        "seed_source": seed_source,
        "verified": bool(ok),
    }
    if args.format == "json":
        sys.stdout.write(dumps_stable(out))
    else:
        print("spectral ensemble:")
        for c in out["spectral"]:
            amps = ", ".join(f"{re:.6g}{im:+.6g}j" for re, im in c["state"])
            print(f"  {c['weight']:.6g}  ({amps})")
        for i, r in enumerate(randoms):
            print(f"random ensemble {i}: {len(r['components'])} components, same density: "
                  f"{r['same_density']}, same as knowledge: {r['equal_as_knowledge']}")
            for c in r["components"]:
                amps = ", ".join(f"{re:.6g}{im:+.6g}j" for re, im in c["state"])
                print(f"  {c['weight']:.6g}  ({amps})")
        print(f"seed {seed} ({seed_source}); verified: {out['verified']}")
    return EXIT_OK if ok else EXIT_FAILED


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qknow",
        description="Objective quantum states versus observer knowledge.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario file or built-in and print the report")
    p.add_argument("scenario", help="scenario file path or built-in name")
    p.add_argument("--seed", type=_seed, default=None,
                   help="random seed (default: the scenario's, else drawn and recorded)")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="parse and validate a scenario")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("decompose", help="spectral and random same-density ensembles")
    p.add_argument("matrix", nargs="?", help='density matrix as JSON, e.g. "[[0.75,0],[0,0.25]]"')
    p.add_argument("--scenario", help="take the state from this scenario (file or built-in)")
    p.add_argument("--state", help="state label inside --scenario")
    p.add_argument("--random", type=int, default=0, metavar="N",
                   help="also generate N random unitary re-decompositions")
    p.add_argument("--seed", type=_seed, default=None)
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("list-builtins", help="list built-in scenario names")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (QknowError, InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
