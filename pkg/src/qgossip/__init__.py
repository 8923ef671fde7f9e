"""Gossip dissemination on classical networks and on entanglement-upgraded quantum networks."""

from .conductance import (
    ConductanceReport,
    circulant_arc_conductance,
    k_conductance,
    mean_conductance,
)
from .errors import CapacityError, DisconnectedGraph, InvalidParameter, ResourceExhausted
from .gossip import (
    DisseminationTrace,
    GossipConfig,
    TimeEstimate,
    bound_multi,
    bound_single,
    estimate_time,
    run_to_completion,
    step,
)
from .graph import (
    Graph,
    average_degree,
    average_path_length,
    distance_matrix,
    gen_chain,
    gen_complete,
    gen_random_connected,
    gen_ring,
    is_connected,
)
from .quantum import (
    QuantumNetwork,
    TwoQubitState,
    UpdatePlan,
    apply_update,
    chain_concurrence,
    concurrence,
    plan_update,
    run_quantum_gossip,
    teleport,
)
from .transition import (
    TransitionMatrix,
    complete_matrix,
    lazy_uniform_matrix,
    ring_matrix,
    validate,
)

__version__ = "0.1.0"
