from .link import (
    LinkKind,
    LinkMatrices,
    link_matrices,
    probs_to_logits,
    logits_to_probs,
    logits_to_probs_unchecked,
    derivative_matrix,
    canonical_jacobian,
    covariance,
)
from .spec import ModelSpec, Discrimination, Difficulty, each_item, unidimensional
from .params import ParameterSet, ParameterLayout, PackedParams
from .design import DesignMatrices, build_design_matrix, count_free_params, linear_predictor
from .starts import deterministic_start, random_start, marginal_probs

__all__ = [
    # Link algebra
    "LinkKind",
    "LinkMatrices",
    "link_matrices",
    "probs_to_logits",
    "logits_to_probs",
    "logits_to_probs_unchecked",
    "derivative_matrix",
    "canonical_jacobian",
    "covariance",
    # Specification
    "ModelSpec",
    "Discrimination",
    "Difficulty",
    "each_item",
    "unidimensional",
    # Parameters and design
    "ParameterSet",
    "ParameterLayout",
    "PackedParams",
    "DesignMatrices",
    "build_design_matrix",
    "count_free_params",
    "linear_predictor",
    # Starting values
    "deterministic_start",
    "random_start",
    "marginal_probs",
]
