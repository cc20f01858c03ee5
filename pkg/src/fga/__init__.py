"""Free-group automorphisms on marked graphs: words, covers, map dynamics,
legality statistics, lamination-style independence tests, and reglued-system
flare experiments."""

__version__ = "0.1.0"

from .covers import CoverMap, InfiniteIndexError, build_cover
from .demos import demo_names, demo_path
from .formats import (
    LoadedMap,
    LoadedSystem,
    ParseError,
    format_cover,
    format_graph,
    format_map,
    load_cover,
    load_graph,
    load_map,
    load_system,
    parse_cover,
    parse_graph,
    parse_map,
)
from .legality import (
    CancellationBound,
    LeafCorpus,
    LegReport,
    LegalityResult,
    bcc_bound,
    critical_constant,
    critical_constant_for,
    growth_test,
    junction_cancellation,
    leg,
    leg_r,
    legality_growth_test,
)
from .laminations import (
    CommonEndVerdict,
    FamilyReport,
    IndependenceReport,
    LeafSegment,
    RayPrefix,
    WeakAttractionResult,
    common_end_test,
    end_coincidence_test,
    family_independence,
    fixed_point_independence,
    leaf_segment,
    singular_ray,
    translate_ray,
    weak_attraction_test,
)
from .graph_maps import (
    Filtration,
    GraphMap,
    PFResult,
    Stratum,
    StratumClass,
    compose,
    compute_filtration,
    direction_stable_power,
    is_pi1_isomorphism,
    lift_map,
    periodic_class_scan,
    pf_eigenvalue,
    power,
    transition_matrix,
    turn_analysis,
    verify_rtt,
)
from .regluing import (
    Attachment,
    ConcatenationCheck,
    ExponentSearchResult,
    FlareReport,
    FlareVerdict,
    GraphOfRoses,
    InverseMismatch,
    NotACovering,
    RegluingSpec,
    SpecialHallway,
    StretchResult,
    StretchSurvey,
    SubdividedBase,
    ValidationReport,
    VertexSystem,
    all_but_one,
    concatenation_flare,
    exponent_search,
    flare_check,
    pointwise_flares,
    propagate_hallway,
    sample_flare,
    stretch_survey,
    stretch_verdict,
    subdivide,
    three_of_four,
    validate_system,
    vertex_system,
)
from .words import (
    Circuit,
    EdgePath,
    MarkedGraph,
    Word,
    concat_words,
    cyclic_reduce,
    invert_word,
    is_reduced,
    least_rotation,
    tighten_word,
)

__all__ = [
    "__version__",
    "all_but_one",
    "Attachment",
    "bcc_bound",
    "build_cover",
    "CancellationBound",
    "Circuit",
    "common_end_test",
    "CommonEndVerdict",
    "compose",
    "compute_filtration",
    "concat_words",
    "concatenation_flare",
    "ConcatenationCheck",
    "CoverMap",
    "critical_constant",
    "critical_constant_for",
    "cyclic_reduce",
    "demo_names",
    "demo_path",
    "direction_stable_power",
    "EdgePath",
    "end_coincidence_test",
    "exponent_search",
    "ExponentSearchResult",
    "family_independence",
    "FamilyReport",
    "Filtration",
    "fixed_point_independence",
    "flare_check",
    "FlareReport",
    "FlareVerdict",
    "format_cover",
    "format_graph",
    "format_map",
    "GraphMap",
    "GraphOfRoses",
    "growth_test",
    "IndependenceReport",
    "InfiniteIndexError",
    "InverseMismatch",
    "invert_word",
    "is_pi1_isomorphism",
    "is_reduced",
    "junction_cancellation",
    "leaf_segment",
    "LeafCorpus",
    "LeafSegment",
    "least_rotation",
    "leg",
    "leg_r",
    "legality_growth_test",
    "LegalityResult",
    "LegReport",
    "lift_map",
    "load_cover",
    "load_graph",
    "load_map",
    "load_system",
    "LoadedMap",
    "LoadedSystem",
    "MarkedGraph",
    "NotACovering",
    "parse_cover",
    "parse_graph",
    "parse_map",
    "ParseError",
    "periodic_class_scan",
    "pf_eigenvalue",
    "PFResult",
    "pointwise_flares",
    "power",
    "propagate_hallway",
    "RayPrefix",
    "RegluingSpec",
    "sample_flare",
    "singular_ray",
    "SpecialHallway",
    "Stratum",
    "StratumClass",
    "stretch_survey",
    "stretch_verdict",
    "StretchResult",
    "StretchSurvey",
    "SubdividedBase",
    "subdivide",
    "three_of_four",
    "tighten_word",
    "transition_matrix",
    "translate_ray",
    "turn_analysis",
    "validate_system",
    "ValidationReport",
    "verify_rtt",
    "vertex_system",
    "VertexSystem",
    "weak_attraction_test",
    "WeakAttractionResult",
    "Word",
]
