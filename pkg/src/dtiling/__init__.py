"""Tiling 3-uniform hypergraphs with copies of the two-triple 4-vertex
pattern (two edges sharing two vertices), under codegree-style density.

The package provides the data model (`core`), extremal and design-based
instance generators (`constructions`), exact solvers and oracles
(`exact`), the staged pipeline for near-extremal instances (`extremal`),
local-search near-perfect tiling (`localsearch`), randomized absorption
(`absorb`), text formats (`io`), and a layered driver plus CLI (`cli`).
"""

from .absorb import (
    AbsorberFamily,
    AbsorptionFailure,
    AbsorptionParams,
    ConstructionFailure,
    absorb_leftover,
    absorbs,
    build_absorbing_family,
    desk_sampling_rate,
    estimate_absorber_density,
    find_absorber_gadget,
    induced_perfect_tiling,
    leftover_bound,
    nominal_sampling_rate,
    validate_family,
)
from .cli import DriverParams, DriverResult, main, solve_driver
from .constructions import (
    ConstructionSpec,
    UnsupportedOrderError,
    build_instance,
    complete_3graph,
    complete_3partite,
    construct_G0,
    construct_G1,
    planted_extremal,
    random_codegree_instance,
    steiner_triple_system,
)
from .core import (
    DCopy,
    Hypergraph3,
    InputError,
    Tiling,
    Verdict,
    build,
    codegree,
    dcopy_from_quad,
    enumerate_D_copies,
    induced_subgraph,
    is_D_free,
    iter_D_copies,
    link_of_vertex_on_set,
    map_copy,
    min_codegree,
    quad_spans_D,
    validate_tiling,
)
from .exact import (
    FourPartite4Graph,
    SearchBudget,
    four_partite,
    four_partite_degree_stats,
    four_partite_perfect_matching,
    max_D_free_set,
    max_tiling_exact,
    perfect_tiling_exact,
    quad_catalog,
)
from .extremal import (
    StageFailure,
    XYZPartition,
    extend_to_maximal_D_free,
    greedy_D_free_set,
    partition_XYZ,
    run_extremal_pipeline,
)
from .io import (
    Certificate,
    format_certificate,
    format_family,
    format_instance,
    parse_certificate,
    parse_family,
    parse_instance,
    read_certificate,
    read_family,
    read_instance,
    write_certificate,
    write_family,
    write_instance,
)
from .localsearch import (
    AugmentationMove,
    BigSmallSplit,
    LocalSearchResult,
    apply_move,
    classify_big_small,
    find_big_swap_move,
    find_grow_move,
    find_split_move,
    find_two_path,
    greedy_tiling,
    near_perfect_tiling,
)

__all__ = [name for name in dir() if not name.startswith("_")]
