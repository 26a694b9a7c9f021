"""Divergence families on positive reals and discrete measures, the kernels
they induce, an SMO-based SVM over precomputed Grams, and a
divergence-threshold image segmenter."""

from .divergences import (
    DivergenceBranch,
    DivergenceSpec,
    DomainError,
    RangeError,
    ab_divergence,
    abs_divergence,
    branch_select,
    dt_squared,
    symmetrize_type1,
)
from .measures import (
    DiscreteDensity,
    NamedDivergence,
    SingularAtomError,
    ValidationError,
    change_dominating_measure,
    divergence_measures,
    named_divergence,
    parse_spec,
    smooth_density,
    symmetrize_type2,
    validate_density,
)

__all__ = [
    "DivergenceBranch",
    "DivergenceSpec",
    "DomainError",
    "RangeError",
    "ab_divergence",
    "abs_divergence",
    "branch_select",
    "dt_squared",
    "symmetrize_type1",
    "DiscreteDensity",
    "NamedDivergence",
    "SingularAtomError",
    "ValidationError",
    "change_dominating_measure",
    "divergence_measures",
    "named_divergence",
    "parse_spec",
    "smooth_density",
    "symmetrize_type2",
    "validate_density",
]

__version__ = "0.1.0"
