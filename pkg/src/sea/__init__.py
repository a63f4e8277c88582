"""Sample-estimate-aggregate causal structure discovery."""

from .graph import (
    Dag,
    EdgeKind,
    Pattern,
    SepSetMap,
    cpdag_of,
    d_separated,
    enumerate_mec,
    from_text,
    is_acyclic,
    meek_closure,
    to_text,
    topological_order,
)
from .scm import (
    Dataset,
    MechanismSpec,
    Scm,
    TopologySpec,
    build_scm,
    sample_dataset,
    sample_graph,
)
from .stats import (
    CiResult,
    GlobalStatistic,
    correlation_matrix,
    distance_correlation,
    fisher_z_ci,
    inverse_covariance,
)
from .discovery import (
    DSeparationOracle,
    FisherZOracle,
    MarginalEstimate,
    marginal_estimate,
    oracle_estimate,
    pc,
    varsort,
)
from .sampler import BatchPlan, SelectionState, sample_batches, sample_subsets
from .resolver import EdgeScores, bootstrap_vote, resolve_marginals
from .metrics import (
    EvalReport,
    auroc,
    evaluate,
    mean_average_precision,
    orientation_accuracy,
    shd,
)
from .pipeline import (
    ExperimentConfig,
    FeatureBundle,
    build_features,
    export_features,
    load_features,
    run_experiment,
)
from .estimators import PCDiscovery, SubsetAggregateDiscovery, VarSortDiscovery

__version__ = "0.1.0"
