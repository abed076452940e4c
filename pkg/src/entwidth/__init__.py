"""Entanglement width of graphs and quantum states, tree tensor networks, MQC simulation."""

from __future__ import annotations

from .dense import (
    entanglement_entropy,
    fidelity,
    random_state,
    read_statevector,
    schmidt_decomposition,
    schmidt_rank_dense,
    write_statevector,
)
from .errors import DomainError, EntwidthError, FormatError, ImpossibleBranchError, SizeLimitError
from .gf2 import Gf2Matrix, cut_rank, nullspace_f2, rank_f2, row_reduce
from .graph import (
    Graph,
    SubcubicTree,
    bipartition_from_edge,
    caterpillar_tree,
    count_subcubic_trees,
    enumerate_subcubic_trees,
    parse_graph,
    parse_tree,
    read_graph,
    read_tree,
    write_graph,
    write_tree,
)
from .mqc import (
    MeasurementProgram,
    MeasurementStep,
    SimulationRecord,
    apply_local_unitary,
    measure_step,
    oracle_run,
    read_program,
    run_program,
    write_program,
)
from .rankwidth import WidthResult, rank_width_exact, rank_width_heuristic, width_of_tree
from .stabilizer import (
    PauliOperator,
    StabilizerGroup,
    graph_state_amplitude,
    graph_state_dense,
    graph_state_stabilizer,
    restricted_subgroup,
    schmidt_coefficient,
    schmidt_rank,
    schmidt_vectors,
    stabilizer_state_to_dense,
)
from .ttn import (
    Tensor,
    TreeTensorNetwork,
    build_ttn_from_state,
    build_ttn_graph_state,
    chi_width_dense,
    contract_full,
    contract_pair,
    entanglement_width_dense,
    normal_form_check,
    read_ttn,
    write_ttn,
)

__version__ = "0.1.0"
