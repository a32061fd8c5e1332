"""Exact oscillation functionals, balancing constructions and tail-bound checks on dyadic grids."""

from .decomposition_geometry import (
    DYADIC,
    FALSE_CUBE,
    BalanceCertificate,
    DecompositionSpec,
    TriPartition,
    bidensity_continuous,
    bidensity_multilevel,
    certified_pair,
    certified_s,
    chain_descent,
)
from .errors import (
    BmoLabError,
    BudgetExceeded,
    DegenerateSet,
    HypothesisViolated,
    PairUnsupported,
    PreconditionError,
)
from .grid_core import (
    AxisCube,
    CellSet,
    CollectionKind,
    GridFunction,
    GridSpec,
    SpecialRectangle,
    WeightedSample,
    enumerate_regions,
    sample,
    unit_cube,
)
from .inequality_harness import (
    JnConstants,
    convert_constants,
    ninverse_probe,
    rearrangement_transfer_check,
    reduction_pipeline_check,
    verify_mainjs,
    wik_comparison,
)
from .john_stromberg import (
    interval_j_seminorm,
    j_functional_def,
    j_functional_rearr,
    j_seminorm,
)
from .oscillation_median import bmo_seminorm, median, oscillation
from .pair_search import (
    JsPair,
    best_balanced_region,
    frontier_search,
    minimality_scan,
    question_b_experiment,
)
from .rearrangement import StepFunction, distribution, rearrange
from .surd import Surd

__all__ = [
    "AxisCube",
    "BalanceCertificate",
    "best_balanced_region",
    "bidensity_continuous",
    "bidensity_multilevel",
    "bmo_seminorm",
    "BmoLabError",
    "BudgetExceeded",
    "CellSet",
    "certified_pair",
    "certified_s",
    "chain_descent",
    "CollectionKind",
    "convert_constants",
    "DecompositionSpec",
    "DegenerateSet",
    "distribution",
    "DYADIC",
    "enumerate_regions",
    "FALSE_CUBE",
    "frontier_search",
    "GridFunction",
    "GridSpec",
    "HypothesisViolated",
    "interval_j_seminorm",
    "j_functional_def",
    "j_functional_rearr",
    "j_seminorm",
    "JnConstants",
    "JsPair",
    "median",
    "minimality_scan",
    "ninverse_probe",
    "oscillation",
    "PairUnsupported",
    "PreconditionError",
    "question_b_experiment",
    "rearrange",
    "rearrangement_transfer_check",
    "reduction_pipeline_check",
    "sample",
    "SpecialRectangle",
    "StepFunction",
    "Surd",
    "TriPartition",
    "unit_cube",
    "verify_mainjs",
    "WeightedSample",
    "wik_comparison",
]

__version__ = "0.1.0"
