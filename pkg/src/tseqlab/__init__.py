"""Exact arithmetic for null-sequence constructions on countable Abelian
groups, windowed exclusion verification, and dual-group radical computation."""

from .groups import (
    ALEPH,
    Cyclic,
    Element,
    ElementEnumeration,
    FreeZ,
    GroupError,
    GroupSpec,
    OMEGA,
    Prufer,
    SpecParseError,
    element,
    format_element,
    format_group_spec,
    group_spec,
    parse_element,
    parse_group_spec,
    zero,
)
from .decide import (
    Decision,
    DecisionError,
    NotRealizableError,
    ObstructionCertificate,
    ReductionCase,
    ReductionFlags,
    admits_minap,
    classify_reduction,
    contains_cyclic_power_omega,
    embeddable,
    exponent,
    leading_invariants,
    nr_membership,
    ulm_profile,
)
from .sequences import (
    CyclicLadderRecipe,
    FreeAnchorRecipe,
    OrderRule,
    PruferPairRecipe,
    PruferTripleRecipe,
    RecipeError,
    TargetRule,
    marker_frac,
    marker_int,
    marker_series_prefix,
    parse_recipe,
    triangular,
    triangular_index,
)

__version__ = "0.1.0"
