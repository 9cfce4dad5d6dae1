"""Optimal individual eavesdropping on BB84: interactions, measurements, bounds and their checks."""
from .interaction import (
    FAMILIES, DisturbancePair, InteractionVectors, JointStates,
    build_family, build_fuchs_equal, build_fuchs_unequal, build_one_param,
    build_optimal_general, build_rotated, from_document, joint_states, to_document,
)
from .measurement import EQUAL_PRIORS, OutcomeStats, Povm, PriorPair, optimal_povm, outcome_statistics
from .optimality import FullReport, canonicalize, check_prop3, full_report, gain_bound, mi_bound
from .oracle import SampleConfig, max_gain_search, random_interactions, random_orthogonal

__version__ = "0.1.0"

__all__ = [
    "FAMILIES", "DisturbancePair", "InteractionVectors", "JointStates",
    "build_family", "build_fuchs_equal", "build_fuchs_unequal", "build_one_param",
    "build_optimal_general", "build_rotated", "from_document", "joint_states", "to_document",
    "EQUAL_PRIORS", "OutcomeStats", "Povm", "PriorPair", "optimal_povm", "outcome_statistics",
    "FullReport", "canonicalize", "check_prop3", "full_report", "gain_bound", "mi_bound",
    "SampleConfig", "max_gain_search", "random_interactions", "random_orthogonal",
]
