"""Two-group outcome decomposition with reference-choice flip diagnostics.

The toolkit decomposes a mean outcome gap into explained and unexplained
parts under both possible reference groups, tests exactly when the two
conventions disagree in sign, measures how common such disagreement is
over random parameter draws, and attaches bootstrap inference. A census
harness applies the whole pipeline across many slices of a table.
"""

from .census import (
    AnalysisCell,
    CensusConfig,
    CensusReport,
    CensusRow,
    GroupingSpec,
    SubgroupRule,
    SubgroupSpec,
    cross_config,
    enumerate_cells,
    expand_rules,
    run_flip_census,
    subgroup_mask,
    sweep_config,
)
from .decomposition import (
    DecompositionResult,
    DualDecomposition,
    counterfactual_mean,
    decompose,
    decompose_both,
    per_covariate_explained,
)
from .errors import (
    AllRowsDroppedError,
    DegenerateMeansError,
    DimensionMismatchError,
    EmptyDatasetError,
    FewerThanTwoGroupsError,
    InvalidDrawCountError,
    MissingColumnError,
    NonPositiveParameterError,
    ObdflipError,
    PointFitFailedError,
    QuadratureNotConvergedError,
    RankDeficientError,
    TooFewRowsError,
    TooManyFailedReplicatesError,
    UnknownColumnError,
    ZeroStandardError,
)
from .inference import (
    BootstrapSummary,
    ComponentStats,
    ReferenceStats,
    annotate_significance,
    bootstrap_obd,
    significance_stars,
    wald_p,
)
from .ingest import DeletionLog, IngestionSpec, ingest, load_table
from .irwinhall import irwin_hall_cdf, irwin_hall_cdf_normal
from .models import (
    GroupModel,
    GroupSample,
    UnitTransform,
    fit_ols,
    out_of_unit_interval_share,
    standardize_units,
    transform_model,
    transform_sample,
)
from .signflip import (
    ComponentVerdict,
    FlipQuantities,
    FlipReport,
    alignment_holds,
    decision_tree_unexplained,
    explained_flip,
    pair_flip_masks,
    unbounded_gap_instance,
    unexplained_flip,
)
from .simulation import (
    LinearDGP,
    OvbDGP,
    OvbDeltas,
    ParamBlock,
    compose_short_params,
    draw_param_block,
    draw_uniform_params,
    gen_linear_group,
    gen_ovb_group,
    gen_two_groups,
    ovb_deltas,
    sbp_bmi_dgps,
    sbp_bmi_models,
)
from .volume import (
    VolumeEstimate,
    explained_flip_fraction,
    monte_carlo_flip_fraction,
    unexplained_flip_fraction,
)

__version__ = "0.1.0"

__all__ = [
    "AllRowsDroppedError",
    "AnalysisCell",
    "BootstrapSummary",
    "CensusConfig",
    "CensusReport",
    "CensusRow",
    "ComponentStats",
    "ComponentVerdict",
    "DecompositionResult",
    "DegenerateMeansError",
    "DeletionLog",
    "DimensionMismatchError",
    "DualDecomposition",
    "EmptyDatasetError",
    "FewerThanTwoGroupsError",
    "FlipQuantities",
    "FlipReport",
    "GroupModel",
    "GroupSample",
    "GroupingSpec",
    "IngestionSpec",
    "InvalidDrawCountError",
    "LinearDGP",
    "MissingColumnError",
    "NonPositiveParameterError",
    "ObdflipError",
    "OvbDGP",
    "OvbDeltas",
    "ParamBlock",
    "PointFitFailedError",
    "QuadratureNotConvergedError",
    "RankDeficientError",
    "ReferenceStats",
    "SubgroupRule",
    "SubgroupSpec",
    "TooFewRowsError",
    "TooManyFailedReplicatesError",
    "UnitTransform",
    "UnknownColumnError",
    "VolumeEstimate",
    "ZeroStandardError",
    "alignment_holds",
    "annotate_significance",
    "bootstrap_obd",
    "compose_short_params",
    "counterfactual_mean",
    "cross_config",
    "decision_tree_unexplained",
    "decompose",
    "decompose_both",
    "draw_param_block",
    "draw_uniform_params",
    "enumerate_cells",
    "expand_rules",
    "explained_flip",
    "explained_flip_fraction",
    "fit_ols",
    "gen_linear_group",
    "gen_ovb_group",
    "gen_two_groups",
    "ingest",
    "irwin_hall_cdf",
    "irwin_hall_cdf_normal",
    "load_table",
    "monte_carlo_flip_fraction",
    "out_of_unit_interval_share",
    "ovb_deltas",
    "pair_flip_masks",
    "per_covariate_explained",
    "run_flip_census",
    "sbp_bmi_dgps",
    "sbp_bmi_models",
    "significance_stars",
    "standardize_units",
    "subgroup_mask",
    "sweep_config",
    "transform_model",
    "transform_sample",
    "unbounded_gap_instance",
    "unexplained_flip",
    "unexplained_flip_fraction",
    "wald_p",
]
