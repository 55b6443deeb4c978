"""Cyclic-monotonicity testing and convex-cost rationalization for stochastic choice.

The package turns strength-of-preference models into choice probabilities,
tests finite (value, probability) datasets for cyclic monotonicity with
witness extraction, and constructs and verifies the convex-cost
(perturbed-utility) representation of any dataset that passes.
"""

from .core import (
    TOL_CM,
    TOL_OPT,
    TOL_SIMPLEX,
    Dataset,
    Menu,
    Observation,
    SimplexPoint,
    ValueVector,
    comp_dot,
    comp_sum,
    make_dataset,
    validate_dataset,
    validate_simplex,
)
from .errors import (
    BadSumError,
    CycloratError,
    DuplicateValuesWarning,
    EmptyDatasetError,
    EmptyDomainError,
    InconsistentPairError,
    IndexOutOfRangeError,
    LengthMismatchError,
    MixedMenusError,
    NegativeEntryError,
    NoProgressError,
    NonFiniteError,
    NotCyclicallyMonotoneError,
    RecordValidationError,
    TableLookupError,
    TooLargeError,
    ValidationError,
    ZeroStrengthError,
)
from .models import (
    CustomTable,
    LuceExponential,
    PairwiseRegret,
    PreferenceModel,
    SalienceWeighted,
    choice_probabilities,
    eval_preference,
    model_from_spec,
    normalize,
    simulate_dataset,
)
from .monotonicity import (
    CMVerdict,
    CycleWitness,
    TwoPointViolation,
    brute_force_cm,
    check_cyclic_monotonicity,
    check_two_point_monotonicity,
    check_weak_stochastic_transitivity,
    cycle_sum,
)
from .rationalization import (
    CostEvaluator,
    DataDerivedCost,
    NegEntropyCost,
    PotentialFit,
    PumSolution,
    QuadraticCost,
    RationalizationReport,
    SmoothedDataDerivedCost,
    compute_potentials,
    conjugate_cost,
    cost_description,
    evaluate_extension,
    pum_solve_closed,
    pum_solve_general,
    simplex_projection,
    softmax_probabilities,
    verify_rationalization,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
