"""locald: LOCAL-model low-diameter decompositions and (1 +- eps)-approximate
packing/covering ILP solving, with a seeded Monte Carlo verification harness."""

from .classic import (
    MpxResult,
    SparseCover,
    cover_and_solve,
    exp_clock_ldd,
    mpx_cluster,
    sparse_cover,
)
from .covering import approx_cover, cover_prepare, grow_and_carve_covering
from .errors import (
    BruteForceCapExceeded,
    GraphError,
    IlpError,
    InfeasibleError,
    InvariantViolation,
    LocaldError,
)
from .graph import (
    DELETED,
    INFINITE,
    Decomposition,
    Graph,
    Hypergraph,
    ValidationReport,
    dominating_gadget,
    gaifman_graph,
    generate,
    neighborhood,
    set_diameter,
    subdivide,
    validate_decomposition,
)
from .ilp import (
    Assignment,
    BoundedIntInstance,
    FixedState,
    IlpInstance,
    Sense,
    associated_hypergraph,
    binarize,
    brute_force_opt,
    feasible,
    instance_from_json,
    instance_to_json,
    local_restrict,
    make_instance,
    weight,
)
from .packing import approx_pack, grow_and_carve_packing, pack_prepare
from .sim import (
    DESK_PROFILE,
    PAPER_PROFILE,
    ConstantProfile,
    RoundLedger,
    SimContext,
    View,
    derive_params,
    intervals,
    make_context,
)
from .whp import CarveResult, grow_and_carve, refine_clusters, whp_ldd, whp_phase1, whp_phase2

__version__ = "0.1.0"
