"""Monte-Carlo simulator of geographic and AODV routing in finite ad hoc
wireless networks: closed-form per-link outage probabilities combined with
topology-level simulation of path discovery and message delivery."""

from .channel import ChannelParams, ShadowingField, draw_shadowing, nakagami_m, normalized_power
from .engine import (
    RoleAssignment,
    SimulationPoint,
    build_outage_matrix,
    draw_interferer_sets,
    mark_roles,
    realize_outages,
    run_point,
    run_point_parallel,
)
from .metrics import (
    AveragedMetrics,
    TopologyMetrics,
    densities,
    link_delay,
    path_delay,
    topological_averages,
    topology_metrics,
)
from .outage import (
    LinkOutageInput,
    OutageNumericsError,
    coefficient_H,
    monte_carlo_outage,
    outage_probability,
    outage_probability_batch,
)
from .protocols import ProtocolConfig, TrialOutcome, eligible_links, run_trial
from .topology import (
    InfeasiblePlacementError,
    Topology,
    distance,
    generate_topology,
    load_topology,
    save_topology,
)

__all__ = [
    "AveragedMetrics",
    "ChannelParams",
    "InfeasiblePlacementError",
    "LinkOutageInput",
    "OutageNumericsError",
    "ProtocolConfig",
    "RoleAssignment",
    "ShadowingField",
    "SimulationPoint",
    "Topology",
    "TopologyMetrics",
    "TrialOutcome",
    "build_outage_matrix",
    "coefficient_H",
    "densities",
    "distance",
    "draw_interferer_sets",
    "draw_shadowing",
    "eligible_links",
    "generate_topology",
    "link_delay",
    "load_topology",
    "mark_roles",
    "monte_carlo_outage",
    "nakagami_m",
    "normalized_power",
    "outage_probability",
    "outage_probability_batch",
    "path_delay",
    "realize_outages",
    "run_point",
    "run_point_parallel",
    "run_trial",
    "save_topology",
    "topological_averages",
    "topology_metrics",
]
