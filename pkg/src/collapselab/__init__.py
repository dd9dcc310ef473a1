"""collapselab: constructive word orderings, effective Schreier transversals,
nilpotent refinements and displacement, with finite-metric Gromov-Hausdorff
estimation and quantitative stratification on desk-scale fixtures."""

from .words import (
    CanonicalWord,
    Ordering,
    SymmetricGeneratingSet,
    canonical_presentation,
    compare_presentations,
    reduce_word,
)
from .group_core import (
    CayleyBall,
    GroupContext,
    GroupElement,
    ball_enumerate,
    commutator,
    elementary_unitriangular,
    evaluate,
    permutation,
    unitriangular,
)
from .subgroups import (
    CosetTable,
    FiniteQuotientOracle,
    SchreierSet,
    Transversal,
    canonical_transversal,
    coset_table,
    prefix_closure_check,
    schreier_generators,
    schreier_rewrite,
)
from .nilpotent import (
    BasicCommutatorSet,
    LowerCentralSeries,
    PolycyclicRefinement,
    RankReport,
    StandardForm,
    abelianization_coordinates,
    almost_nilpotent_rank,
    basic_commutators,
    lower_central_series,
    rank_of_graded_subgroup,
    refine_lcs,
    standard_form,
)
from .metricspace import (
    Correspondence,
    FiniteMetricSpace,
    GHBound,
    distortion,
    eps_gha_check,
    gh_exact_small,
    gh_upper_heuristic,
    product,
    rescale,
    validate_metric,
)
from .action import (
    IsometricAction,
    PackingBound,
    ShortSubgroup,
    displacement,
    displacement_constant,
    displacement_property_check,
    hyperbolic_ball_volume,
    max_displacement_ball,
    packing_power_bound,
    power_small_displacement,
    rank_bound_report,
    short_subgroup,
)
from .stratify import (
    NoncollapseRadius,
    ScaleClassification,
    SplittingReport,
    cone_split_check,
    good_bad_scales,
    line_detect,
    noncollapse_radius,
    splitting_detect,
    two_scale_score,
)

__version__ = "0.1.0"
