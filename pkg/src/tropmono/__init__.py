"""tropmono: exact lattice-polygon combinatorics deciding and certifying the
surjectivity of the geometric and algebraic monodromy maps for curves in
smooth toric surfaces."""

from .geometry import LatticePolygon, UnimodularMap, polygon_from_vertices, seg
from .polygons import (
    PolygonAnalysis,
    Surjectivity,
    Verdict,
    adjoint_polygon,
    analyze,
    divisibility,
    is_smooth,
    normalize_at_vertex,
    root_order,
)
from .subdivision import (
    HeightFunction,
    RegularSubdivision,
    TropicalCurve,
    dual_tropical_curve,
    extend_subdivision,
    regularity_heights_for,
    subdivision_from_heights,
    trivial_subdivision,
    unimodular_refinement,
)
from .graphs import (
    AdmissibilityCertificate,
    Bridge,
    Snake,
    WeightedSegmentGraph,
    bridges,
    build_snake,
    certify_admissible,
    check_balancing,
)
from .homology import Loop, SurfaceModel, pants_check, sp_order, subgroup_order_mod_p
from .engine import Engine, replay_certificate

__all__ = [
    "LatticePolygon",
    "UnimodularMap",
    "polygon_from_vertices",
    "seg",
    "PolygonAnalysis",
    "Surjectivity",
    "Verdict",
    "adjoint_polygon",
    "analyze",
    "divisibility",
    "is_smooth",
    "normalize_at_vertex",
    "root_order",
    "HeightFunction",
    "RegularSubdivision",
    "TropicalCurve",
    "dual_tropical_curve",
    "extend_subdivision",
    "regularity_heights_for",
    "subdivision_from_heights",
    "trivial_subdivision",
    "unimodular_refinement",
    "AdmissibilityCertificate",
    "Bridge",
    "Snake",
    "WeightedSegmentGraph",
    "bridges",
    "build_snake",
    "certify_admissible",
    "check_balancing",
    "Loop",
    "SurfaceModel",
    "pants_check",
    "sp_order",
    "subgroup_order_mod_p",
    "Engine",
    "replay_certificate",
]
