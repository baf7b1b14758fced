"""Scenarios shipped with the package."""

from __future__ import annotations

from importlib import resources

from .scenario import Scenario, parse_scenario

BUILTIN_NAMES = ("spin-example", "photon-alice-bob", "bb84-ensemble")


def builtin_text(name: str) -> str:
    if name not in BUILTIN_NAMES:
        raise KeyError(f"no built-in scenario {name!r}; available: {', '.join(BUILTIN_NAMES)}")
    return resources.files("qknow").joinpath("scenarios", f"{name}.toml").read_text("utf-8")


def load_builtin(name: str) -> Scenario:
    return parse_scenario(builtin_text(name), source=f"builtin:{name}")


def builtin_scenarios() -> list[Scenario]:
    return [load_builtin(name) for name in BUILTIN_NAMES]
