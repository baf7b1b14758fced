import numpy as np
import pytest

from qknow import (
    DensityMatrix,
    Hypothesis,
    KnowledgeState,
    density_from_pure,
    preset_measurement,
    pure_state_new,
)

S = 1 / np.sqrt(2)


@pytest.fixture
def kets():
    return {
        "↑": pure_state_new([1, 0]),
        "↔": pure_state_new([0, 1]),
        "↗": pure_state_new([S, S]),
        "↘": pure_state_new([S, -S]),
    }


@pytest.fixture
def rhos(kets):
    return {label: density_from_pure(k) for label, k in kets.items()}


@pytest.fixture
def vh():
    return preset_measurement("vh-polarization")


@pytest.fixture
def alice(rhos):
    return KnowledgeState.uniform("Alice", [Hypothesis(i, rhos[i]) for i in ("↑", "↔")])


@pytest.fixture
def bob(rhos):
    return KnowledgeState.uniform("Bob", [Hypothesis(i, rhos[i]) for i in ("↑", "↔", "↗", "↘")])


@pytest.fixture
def half():
    return DensityMatrix(np.diag([0.5, 0.5]))


@pytest.fixture
def rho_b():
    return DensityMatrix(np.diag([0.75, 0.25]))


_ACCEPTANCE_LINES = []


def record_acceptance(line):
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
