"""Tree-structured particle filtering for multi-modal posteriors.

The posterior is held as a dynamically grown and pruned tree of particle
filters, mixtures, and decisions, so that resampling acts locally per
cluster and model selection decides how many clusters the data supports.
"""

from structfilt.clustering import Clustering, kmeans_pp_init, weighted_kmeans
from structfilt.design import PghConfig, design_experiment, pgh, select_design_node
from structfilt.harness import (
    EnsembleResult,
    TrialConfig,
    TrialRecord,
    run_ensemble,
    run_sweep,
    run_trial,
)
from structfilt.models import (
    CfpeModel,
    Experiment,
    ExperimentModel,
    RabiModel,
    RgeModel,
    canonical_loss,
    canonicalize,
    make_model,
    min_loss,
)
from structfilt.smc import (
    LiuWestConfig,
    Moments,
    ParticleCloud,
    bayes_update,
    ess,
    liu_west_resample,
    moments,
)
from structfilt.tree import (
    Context,
    GlobalConfig,
    Node,
    NodeKind,
    RegionEstimate,
    audit_tree,
    champion_leaf_count,
    flatten,
    init_tree,
    iter_filter_leaves,
    node_bayes_factor,
    prune,
    region_estimate,
    resolve_context,
    structured_resample,
    to_dot,
    tree_snapshot,
    update,
)

__all__ = [
    "Clustering",
    "kmeans_pp_init",
    "weighted_kmeans",
    "PghConfig",
    "design_experiment",
    "pgh",
    "select_design_node",
    "EnsembleResult",
    "TrialConfig",
    "TrialRecord",
    "run_ensemble",
    "run_sweep",
    "run_trial",
    "CfpeModel",
    "Experiment",
    "ExperimentModel",
    "RabiModel",
    "RgeModel",
    "canonical_loss",
    "canonicalize",
    "make_model",
    "min_loss",
    "LiuWestConfig",
    "Moments",
    "ParticleCloud",
    "bayes_update",
    "ess",
    "liu_west_resample",
    "moments",
    "Context",
    "GlobalConfig",
    "Node",
    "NodeKind",
    "RegionEstimate",
    "audit_tree",
    "champion_leaf_count",
    "flatten",
    "init_tree",
    "iter_filter_leaves",
    "node_bayes_factor",
    "prune",
    "region_estimate",
    "resolve_context",
    "structured_resample",
    "to_dot",
    "tree_snapshot",
    "update",
]

__version__ = "0.1.0"
