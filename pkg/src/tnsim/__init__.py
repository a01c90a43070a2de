"""Tensor-network-states simulator for single amplitudes of random quantum
circuits on arbitrary qubit-connectivity graphs."""

from .circuit import (
    Circuit,
    CircuitGraph,
    Gate,
    SplitGate,
    fuse_single_qubit_gates,
    gate_split,
    generate_lattice,
    generate_rqc,
    parse_circuit,
    serialize_circuit,
)
from .cli import ErrorModel, WorkloadEstimate, estimate_workload
from .network import (
    CutPlan,
    TensorNetwork,
    build_overlap_network,
    compute_amplitude,
    contract_along_path,
    plan_cuts,
    slice_network,
)
from .oracle import amplitude_oracle, full_state_evolve
from .pathfind import (
    NetworkShape,
    exhaustive_path_oracle,
    find_optimal_path,
    treewidth_bound,
)
from .tensor import Tensor, contract_pair, contraction_cost, svd_factorize
from .tns import TNSState, apply_gate, compress_edge, evolve, init_state, two_sided_evolve

__version__ = "0.1.0"
