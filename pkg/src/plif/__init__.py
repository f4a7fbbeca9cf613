"""Anytime causal-query bounds over potential-level-annotated Bayesian
networks: retrieve the submodel behind a threshold, bound the query from
it, tighten by retrieving deeper, and detect when the bounds are exact.
"""

from .errors import (
    ExpansionCapError,
    FrontierTooWideError,
    InvalidNetworkError,
    NetworkFormatError,
    NoStartNodesError,
    OpenPastError,
    PlifError,
    QueryError,
    ThresholdError,
    UnknownNodeError,
    UnknownStateError,
    ZeroEvidenceError,
)
from .gen import (
    HmmParams,
    RandomNetSpec,
    hmm_model,
    hmm_query,
    hmm_sweep_experiment,
    random_chain,
    random_network,
    random_query,
    sweep_csv,
)
from .infer import (
    Exactness,
    QueryBounds,
    Schedule,
    anytime_sweep,
    bounds_at,
    cpl,
    default_schedule,
    exact_query,
    exactness_status,
    frontier_clamp_table,
    frontier_conditional,
    map_decision,
)
from .model import (
    LazyNetwork,
    Network,
    NodeSpec,
    Query,
    Violation,
    as_lazy,
    check_assignment,
    check_query,
    load_network,
    materialize,
    network_from_document,
    network_to_document,
    serialize,
    validate,
)
from .retrieval import (
    FrontierStub,
    RootSetResult,
    Submodel,
    Threshold,
    ancestors,
    d_separated,
    root_set,
)

__version__ = "0.1.0"

__all__ = [
    "Exactness",
    "ExpansionCapError",
    "FrontierStub",
    "FrontierTooWideError",
    "HmmParams",
    "InvalidNetworkError",
    "LazyNetwork",
    "Network",
    "NetworkFormatError",
    "NoStartNodesError",
    "NodeSpec",
    "OpenPastError",
    "PlifError",
    "Query",
    "QueryBounds",
    "QueryError",
    "RandomNetSpec",
    "RootSetResult",
    "Schedule",
    "Submodel",
    "Threshold",
    "ThresholdError",
    "UnknownNodeError",
    "UnknownStateError",
    "Violation",
    "ZeroEvidenceError",
    "ancestors",
    "anytime_sweep",
    "as_lazy",
    "bounds_at",
    "check_assignment",
    "check_query",
    "cpl",
    "d_separated",
    "default_schedule",
    "exact_query",
    "exactness_status",
    "frontier_clamp_table",
    "frontier_conditional",
    "hmm_model",
    "hmm_query",
    "hmm_sweep_experiment",
    "load_network",
    "map_decision",
    "materialize",
    "network_from_document",
    "network_to_document",
    "random_chain",
    "random_network",
    "random_query",
    "root_set",
    "serialize",
    "sweep_csv",
    "validate",
]
