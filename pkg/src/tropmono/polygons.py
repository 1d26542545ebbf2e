"""Polygon-level analysis: smoothness, adjoint polygon, root orders,
normalizations at adjoint vertices, divisibility, and the surjectivity
verdict table.

The verdict logic is the decision procedure for the two monodromy maps: the
geometric one is surjective iff the adjoint is a point or has no non-trivial
root, the algebraic one tolerates odd root orders.  Genus-zero polygons are
out of scope and the one-dimensional adjoint (hyperelliptic) case is
reported as deferred.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from math import gcd

from .geometry import (
    LatticePolygon,
    Point,
    UnimodularMap,
    add,
    cross,
    primitive,
    smul,
    sub,
)


class SmoothnessError(ValueError):
    pass


def is_smooth(poly: LatticePolygon) -> bool:
    """True iff at every vertex the two adjacent primitive edge directions
    generate the lattice."""
    if poly.dimension != 2:
        raise SmoothnessError("not two-dimensional")
    v = poly.vertices
    n = len(v)
    for i in range(n):
        d1 = primitive(sub(v[(i + 1) % n], v[i]))
        d2 = primitive(sub(v[(i - 1) % n], v[i]))
        if abs(cross(d1, d2)) != 1:
            return False
    return True


def adjoint_polygon(poly: LatticePolygon) -> LatticePolygon | None:
    """Convex hull of the interior lattice points; None when there are none."""
    if poly.dimension != 2:
        raise ValueError("adjoint needs a two-dimensional polygon")
    pts = poly.interior_points()
    if not pts:
        return None
    return LatticePolygon(pts)


def normal_fan_rays(poly: LatticePolygon) -> list[Point]:
    """Primitive outward normals of the edges, in edge order."""
    rays = []
    for a, b in poly.edges():
        d = primitive(sub(b, a))
        rays.append((d[1], -d[0]))  # outward normal of a ccw edge
    return rays


def self_intersections(poly: LatticePolygon) -> list[int]:
    """Self-intersection numbers of the toric divisors of a smooth polygon.

    For consecutive primitive rays u_{i-1}, u_i, u_{i+1} of a smooth complete
    fan, u_{i-1} + u_{i+1} = -D_i^2 u_i.
    """
    rays = normal_fan_rays(poly)
    n = len(rays)
    out = []
    for i in range(n):
        s = add(rays[(i - 1) % n], rays[(i + 1) % n])
        u = rays[i]
        # s must be an integer multiple of u
        if u[0] != 0:
            if s[0] % u[0] or s[1] != s[0] // u[0] * u[1]:
                raise SmoothnessError("fan is not smooth")
            k = s[0] // u[0]
        else:
            if s[0] != 0 or s[1] % u[1]:
                raise SmoothnessError("fan is not smooth")
            k = s[1] // u[1]
        out.append(-k)
    return out


def adjoint_edge_lengths_valid(poly: LatticePolygon) -> bool:
    """Cross-check: for each edge the adjoint edge with the same outward
    normal has lattice length l - D^2 - 2 (0 meaning no such edge)."""
    adj = adjoint_polygon(poly)
    if adj is None or adj.dimension != 2:
        return True
    adj_by_normal = {}
    for a, b in adj.edges():
        d = primitive(sub(b, a))
        adj_by_normal[(d[1], -d[0])] = gcd(abs(b[0] - a[0]), abs(b[1] - a[1]))
    lengths = poly.edge_lengths()
    selfints = self_intersections(poly)
    for ray, l, dsq in zip(normal_fan_rays(poly), lengths, selfints):
        expected = l - dsq - 2
        if adj_by_normal.get(ray, 0) != expected:
            return False
    return True


def root_order(adjoint: LatticePolygon | None) -> int:
    """Largest order of a root of the adjoint bundle: the gcd of the adjoint
    edge lattice lengths.  By convention 1 for a point (see analyze)."""
    if adjoint is None:
        raise ValueError("genus zero")
    if adjoint.dimension == 0:
        return 1
    g = 0
    for l in adjoint.edge_lengths():
        g = gcd(g, l)
    return g


def divisibility(adjoint: LatticePolygon) -> list[tuple[int, list[Point]]]:
    """All d >= 2 for which the homothety by 1/d at a vertex keeps the adjoint
    a lattice polygon, with the pulled-back lattice point sets.

    The result does not depend on the chosen vertex; this is asserted.
    """
    if adjoint.dimension != 2:
        raise ValueError("divisibility needs a two-dimensional adjoint")
    results = None
    for kappa in adjoint.vertices:
        g = 0
        for v in adjoint.vertices:
            d = sub(v, kappa)
            g = gcd(g, gcd(abs(d[0]), abs(d[1])))
        mine = []
        for d in range(2, g + 1):
            if g % d:
                continue
            scaled = LatticePolygon(
                [add(kappa, (dx // d, dy // d)) for v in adjoint.vertices
                 for dx, dy in [sub(v, kappa)]]
            )
            pts = [add(kappa, smul(d, sub(q, kappa))) for q in scaled.lattice_points()]
            mine.append((d, sorted(pts)))
        if results is None:
            results = mine
        else:
            assert results == mine, "divisibility depends on the vertex"
    return results or []


def divisible_points(adjoint: LatticePolygon, d: int) -> list[Point]:
    for dd, pts in divisibility(adjoint):
        if dd == d:
            return pts
    if d == 1:
        return adjoint.lattice_points()
    raise ValueError(f"adjoint is not divisible by {d}")


# ---------------------------------------------------------------------------
# Normalization at a vertex of the adjoint polygon
# ---------------------------------------------------------------------------


def adjacent_edge_dirs(poly: LatticePolygon, v: Point) -> tuple[Point, Point]:
    """Primitive directions of the two edges at a vertex, (ccw, cw)."""
    verts = poly.vertices
    if v not in verts:
        raise ValueError(f"{v} is not a vertex of {poly}")
    i = verts.index(v)
    n = len(verts)
    if poly.dimension < 2:
        other = verts[1 - i]
        d = primitive(sub(other, v))
        return d, d
    return (
        primitive(sub(verts[(i + 1) % n], v)),
        primitive(sub(verts[(i - 1) % n], v)),
    )


def normalize_at_vertex(
    poly: LatticePolygon, kappa: Point, swap_axes: bool = False
) -> tuple[UnimodularMap, LatticePolygon]:
    """Normalization at a vertex kappa of the adjoint: the returned
    lattice-preserving affine map sends kappa to the origin and the two
    adjoint edges at kappa onto the rays (1,0) and (0,1).

    With ``swap_axes`` the ccw edge goes to the y-axis instead of the x-axis.
    The anchor points (0,-1) and (-1,0) are verified to lie on the boundary
    of the image of the ambient polygon.
    """
    adj = adjoint_polygon(poly)
    if adj is None or adj.dimension != 2:
        raise ValueError("normalization needs a two-dimensional adjoint")
    if kappa not in adj.vertices:
        raise ValueError(f"{kappa} is not a vertex of the adjoint")
    e1, e2 = adjacent_edge_dirs(adj, kappa)
    if swap_axes:
        e1, e2 = e2, e1
    f = UnimodularMap.from_basis(e1, e2, kappa)
    image = poly.transform(f)
    for anchor in ((0, -1), (-1, 0)):
        if image.side(anchor) != 0:
            raise ValueError(f"anchor {anchor} not on the boundary after normalization")
    return f, image


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------


class Surjectivity(str, Enum):
    YES = "surjective"
    NO = "not_surjective"
    DEFERRED = "hyperelliptic_deferred"
    NOT_APPLICABLE = "not_applicable"


@dataclass(frozen=True)
class Verdict:
    mu: Surjectivity
    algebraic_mu: Surjectivity
    reason: str = ""

    def __post_init__(self):
        if self.mu is Surjectivity.YES:
            assert self.algebraic_mu is Surjectivity.YES

    def to_json(self) -> dict:
        out = {"mu": self.mu.value, "algebraic_mu": self.algebraic_mu.value}
        if self.reason:
            out["reason"] = self.reason
        return out


@dataclass(frozen=True)
class PolygonAnalysis:
    genus: int
    boundary: int
    adjoint: LatticePolygon | None
    d: int  # dimension of the adjoint (-1 when empty)
    n: int  # largest root order (1 by convention when d == 0)
    smooth: bool
    divisors: tuple[int, ...] = field(default=())
    adjoint_lengths_valid: bool = True

    def to_json(self) -> dict:
        return {
            "g": self.genus,
            "b": self.boundary,
            "d": self.d,
            "n": self.n,
            "smooth": self.smooth,
            "divisors": list(self.divisors),
            "adjoint": self.adjoint.to_json() if self.adjoint else None,
            "adjoint_lengths_valid": self.adjoint_lengths_valid,
        }


def analyze(poly: LatticePolygon) -> tuple[PolygonAnalysis, Verdict]:
    """Full analysis and verdict for a smooth two-dimensional polygon.

    Verdict table: genus 0 is out of scope; d = 0 makes both maps
    surjective; d = 1 is deferred to the hyperelliptic theory; for d = 2 the
    geometric map is surjective iff n = 1 and the algebraic one iff n is odd.
    """
    if poly.dimension != 2:
        raise SmoothnessError("not two-dimensional")
    if not is_smooth(poly):
        raise SmoothnessError("polygon not smooth")
    adj = adjoint_polygon(poly)
    g = len(poly.interior_points())
    b = len(poly.boundary_points())
    if adj is None:
        analysis = PolygonAnalysis(0, b, None, -1, 1, True)
        verdict = Verdict(
            Surjectivity.NOT_APPLICABLE, Surjectivity.NOT_APPLICABLE, "genus zero"
        )
        return analysis, verdict
    d = adj.dimension
    n = root_order(adj)
    divisors: tuple[int, ...] = ()
    if d == 2:
        assert is_smooth(adj), "two-dimensional adjoint of a smooth polygon is smooth"
        divisors = tuple(dd for dd, _ in divisibility(adj))
    analysis = PolygonAnalysis(
        g, b, adj, d, n, True, divisors, adjoint_edge_lengths_valid(poly)
    )
    if d == 0:
        verdict = Verdict(Surjectivity.YES, Surjectivity.YES)
    elif d == 1:
        verdict = Verdict(
            Surjectivity.DEFERRED, Surjectivity.DEFERRED, "hyperelliptic case"
        )
    else:
        if n == 1:
            verdict = Verdict(Surjectivity.YES, Surjectivity.YES)
        elif n % 2 == 1:
            verdict = Verdict(
                Surjectivity.NO, Surjectivity.YES, f"adjoint admits a root of order {n}"
            )
        else:
            verdict = Verdict(
                Surjectivity.NO, Surjectivity.NO, f"adjoint admits a root of order {n}"
            )
    return analysis, verdict
