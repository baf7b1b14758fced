"""Objective quantum states, observer knowledge, and the gap between them.

Finite-dimensional states and measurements (:mod:`qknow.states`,
:mod:`qknow.measurement`), observers holding weighted hypotheses about an
unknown preparation (:mod:`qknow.observer`), the non-uniqueness of mixture
decompositions (:mod:`qknow.decomposition`) and a scenario runner
(:mod:`qknow.scenario`, :mod:`qknow.engine`).
"""

from .builtins import builtin_scenarios, load_builtin
from .decomposition import (
    PureEnsemble,
    UnitaryMatrix,
    ensemble_density,
    ensemble_from_knowledge,
    ensembles_equal_as_knowledge,
    random_unitary,
    same_density,
    spectral_decomposition,
    transform_ensemble,
)
from .engine import RunReport, run_scenario
from .errors import (
    DimensionError,
    ImpossibleOutcomeError,
    MeasurementError,
    QknowError,
    ScenarioError,
    StateError,
)
from .measurement import (
    Effect,
    Measurement,
    OutcomeRecord,
    born_probability,
    luders_update,
    make_rng,
    outcome_distribution,
    preset_measurement,
    sample_outcome,
    sample_outcomes,
)
from .observer import (
    Hypothesis,
    KnowledgeComparison,
    KnowledgeState,
    UpdateReport,
    bayes_update,
    knowledge_distance,
    posterior_predictive,
    predictive_probability,
    subjective_density,
    update_sequence,
)
from .report import emit_report
from .scenario import Scenario, parse_scenario
from .states import (
    DensityMatrix,
    PureState,
    density_from_pure,
    density_matrix,
    mix,
    pure_state_new,
    purity,
    trace_distance,
)

__version__ = "0.1.0"
