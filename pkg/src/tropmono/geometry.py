"""Exact planar lattice geometry: points, primitive segments, convex hulls,
unimodular affine maps and convex lattice polygons.

Everything here is integer arithmetic; no floats anywhere.  Points are plain
``(x, y)`` tuples so they hash, sort and serialize trivially.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

Point = tuple[int, int]
Segment = tuple[Point, Point]  # endpoints sorted lexicographically


def sub(a: Point, b: Point) -> Point:
    return (a[0] - b[0], a[1] - b[1])


def add(a: Point, b: Point) -> Point:
    return (a[0] + b[0], a[1] + b[1])


def neg(a: Point) -> Point:
    return (-a[0], -a[1])


def smul(k: int, a: Point) -> Point:
    return (k * a[0], k * a[1])


def cross(a: Point, b: Point) -> int:
    return a[0] * b[1] - a[1] * b[0]


def dot(a: Point, b: Point) -> int:
    return a[0] * b[0] + a[1] * b[1]


def orient(a: Point, b: Point, c: Point) -> int:
    """Sign of twice the signed area of triangle abc (>0 for ccw)."""
    return cross(sub(b, a), sub(c, a))


def lattice_length(a: Point, b: Point) -> int:
    """Number of primitive steps from a to b (gcd of coordinate gaps)."""
    return gcd(abs(a[0] - b[0]), abs(a[1] - b[1]))


def primitive(v: Point) -> Point:
    """Primitive vector in the direction of v."""
    if v == (0, 0):
        raise ValueError("zero vector has no direction")
    g = gcd(abs(v[0]), abs(v[1]))
    return (v[0] // g, v[1] // g)


def is_primitive_segment(a: Point, b: Point) -> bool:
    return a != b and lattice_length(a, b) == 1


def seg(a: Point, b: Point) -> Segment:
    """Canonical (sorted) primitive integer segment with endpoints a, b."""
    a = (int(a[0]), int(a[1]))
    b = (int(b[0]), int(b[1]))
    if not is_primitive_segment(a, b):
        raise ValueError(f"not a primitive integer segment: {a}-{b}")
    return (a, b) if a < b else (b, a)


def seg_dir_from(s: Segment, v: Point) -> Point:
    """Primitive direction of segment s oriented out of its endpoint v."""
    if v == s[0]:
        return sub(s[1], s[0])
    if v == s[1]:
        return sub(s[0], s[1])
    raise ValueError(f"{v} is not an endpoint of {s}")


def lattice_points_on_segment(a: Point, b: Point) -> list[Point]:
    """All lattice points on [a, b], ordered from a to b."""
    if a == b:
        return [a]
    n = lattice_length(a, b)
    d = primitive(sub(b, a))
    return [add(a, smul(k, d)) for k in range(n + 1)]


def primitive_segments_on(a: Point, b: Point) -> list[Segment]:
    """Decomposition of the lattice segment [a, b] into primitive segments."""
    pts = lattice_points_on_segment(a, b)
    return [seg(pts[i], pts[i + 1]) for i in range(len(pts) - 1)]


def segments_cross(s: Segment, t: Segment) -> bool:
    """True iff the two segments meet outside their shared endpoints.

    Collinear overlap counts as crossing; sharing an endpoint does not.
    """
    if s == t:
        return True
    a, b = s
    c, d = t
    shared = {a, b} & {c, d}
    if len(shared) == 1:
        # May still overlap if collinear and pointing the same way.
        (p,) = shared
        q = b if a == p else a
        r = d if c == p else c
        if cross(sub(q, p), sub(r, p)) == 0 and dot(sub(q, p), sub(r, p)) > 0:
            return True
        return False
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 == o2 == 0:  # collinear
        lo1, hi1 = min(a, b), max(a, b)
        lo2, hi2 = min(c, d), max(c, d)
        return not (hi1 <= lo2 or hi2 <= lo1)
    if (o1 * o2 <= 0 and o3 * o4 <= 0) and not (o1 * o2 == 0 and o3 * o4 == 0):
        return True
    if o1 * o2 == 0 and o3 * o4 == 0:
        # An endpoint of one lies strictly inside the other.
        for p, (u, w) in ((c, (a, b)), (d, (a, b)), (a, (c, d)), (b, (c, d))):
            if p not in (u, w) and orient(u, w, p) == 0 and \
                    min(u, w) < p < max(u, w):
                return True
        return False
    if o1 * o2 < 0 and o3 * o4 == 0:
        return True
    if o3 * o4 < 0 and o1 * o2 == 0:
        return True
    return False


def convex_hull(points) -> list[Point]:
    """Extreme points of the convex hull, ccw, starting at the lex-min point.

    Collinear non-extreme points are dropped.  Degenerate inputs give the
    obvious answer: one point, or the two ends of a segment.
    """
    pts = sorted(set((int(p[0]), int(p[1])) for p in points))
    if not pts:
        raise ValueError("empty point set")
    if len(pts) == 1:
        return pts
    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and orient(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and orient(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        hull = hull[:1]
    return hull


@dataclass(frozen=True)
class UnimodularMap:
    """Lattice-preserving affine map x -> M x + t with |det M| = 1."""

    m: tuple[tuple[int, int], tuple[int, int]]
    t: Point = (0, 0)

    def __post_init__(self):
        if abs(self.det()) != 1:
            raise ValueError(f"matrix {self.m} is not unimodular")

    def det(self) -> int:
        (a, b), (c, d) = self.m
        return a * d - b * c

    def apply(self, p: Point) -> Point:
        (a, b), (c, d) = self.m
        return (a * p[0] + b * p[1] + self.t[0], c * p[0] + d * p[1] + self.t[1])

    def apply_vector(self, v: Point) -> Point:
        (a, b), (c, d) = self.m
        return (a * v[0] + b * v[1], c * v[0] + d * v[1])

    def apply_seg(self, s: Segment) -> Segment:
        return seg(self.apply(s[0]), self.apply(s[1]))

    def inverse(self) -> "UnimodularMap":
        (a, b), (c, d) = self.m
        det = self.det()  # det**-1 == det since det is +-1
        inv = ((d * det, -b * det), (-c * det, a * det))
        lin = UnimodularMap(inv)
        return UnimodularMap(inv, neg(lin.apply_vector(self.t)))

    def compose(self, other: "UnimodularMap") -> "UnimodularMap":
        """self after other: x -> self(other(x))."""
        rows = tuple(
            tuple(sum(self.m[i][k] * other.m[k][j] for k in range(2)) for j in range(2))
            for i in range(2)
        )
        return UnimodularMap(rows, add(self.apply_vector(other.t), self.t))

    @staticmethod
    def identity() -> "UnimodularMap":
        return UnimodularMap(((1, 0), (0, 1)))

    @staticmethod
    def from_basis(e1: Point, e2: Point, origin: Point = (0, 0)) -> "UnimodularMap":
        """The map sending origin to 0, e1 to (1,0) and e2 to (0,1).

        Requires (e1, e2) to be a lattice basis.
        """
        det = cross(e1, e2)
        if abs(det) != 1:
            raise ValueError(f"{e1}, {e2} do not generate the lattice")
        # Inverse of the column matrix [e1 e2].
        m = ((e2[1] * det, -e2[0] * det), (-e1[1] * det, e1[0] * det))
        lin = UnimodularMap(m)
        return UnimodularMap(m, neg(lin.apply_vector(origin)))


class LatticePolygon:
    """Convex lattice polygon (possibly a segment or a point).

    Vertices are the extreme points in ccw order starting at the lex-min
    vertex, so equal polygons compare equal.
    """

    __slots__ = ("vertices", "_lattice_cache")

    def __init__(self, points):
        hull = convex_hull(points)
        if len(hull) >= 3:
            k = hull.index(min(hull))
            hull = hull[k:] + hull[:k]
        object.__setattr__(self, "vertices", tuple(hull))
        object.__setattr__(self, "_lattice_cache", None)

    # -- basic structure ---------------------------------------------------

    @property
    def dimension(self) -> int:
        n = len(self.vertices)
        return 0 if n == 1 else (1 if n == 2 else 2)

    def __eq__(self, other):
        return isinstance(other, LatticePolygon) and self.vertices == other.vertices

    def __hash__(self):
        return hash(self.vertices)

    def __repr__(self):
        return f"LatticePolygon({list(self.vertices)})"

    def edges(self) -> list[tuple[Point, Point]]:
        """Maximal edges as ordered vertex pairs, ccw from the lex-min vertex."""
        v = self.vertices
        if len(v) == 1:
            return []
        if len(v) == 2:
            return [(v[0], v[1])]
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def edge_lengths(self) -> list[int]:
        return [lattice_length(a, b) for a, b in self.edges()]

    def area2(self) -> int:
        """Twice the Euclidean area (shoelace)."""
        v = self.vertices
        return abs(sum(cross(v[i], v[(i + 1) % len(v)]) for i in range(len(v))))

    # -- membership --------------------------------------------------------

    def side(self, p: Point) -> int:
        """+1 strictly inside, 0 on the boundary, -1 outside."""
        v = self.vertices
        if len(v) == 1:
            return 0 if p == v[0] else -1
        if len(v) == 2:
            if orient(v[0], v[1], p) != 0:
                return -1
            return 0 if dot(sub(p, v[0]), sub(p, v[1])) <= 0 else -1
        res = 1
        for a, b in self.edges():
            o = orient(a, b, p)
            if o < 0:
                return -1
            if o == 0:
                res = 0
        return res

    def contains(self, p: Point) -> bool:
        return self.side(p) >= 0

    def contains_segment(self, s: Segment) -> bool:
        return self.contains(s[0]) and self.contains(s[1])

    # -- lattice point enumeration -----------------------------------------

    def lattice_points(self) -> list[Point]:
        """All lattice points of the polygon, sorted lexicographically."""
        cache = self._lattice_cache
        if cache is None:
            xs = [p[0] for p in self.vertices]
            ys = [p[1] for p in self.vertices]
            cache = sorted(
                (x, y)
                for x in range(min(xs), max(xs) + 1)
                for y in range(min(ys), max(ys) + 1)
                if self.side((x, y)) >= 0
            )
            object.__setattr__(self, "_lattice_cache", cache)
        return list(cache)

    def boundary_points(self) -> list[Point]:
        if self.dimension < 2:
            return self.lattice_points()
        return sorted(p for p in self.lattice_points() if self.side(p) == 0)

    def interior_points(self) -> list[Point]:
        if self.dimension < 2:
            return []
        return sorted(p for p in self.lattice_points() if self.side(p) == 1)

    def boundary_segments(self) -> list[Segment]:
        """The primitive segments of the boundary."""
        out = []
        for a, b in self.edges():
            out.extend(primitive_segments_on(a, b))
        return sorted(set(out))

    # -- transforms ----------------------------------------------------------

    def transform(self, f: UnimodularMap) -> "LatticePolygon":
        return LatticePolygon([f.apply(p) for p in self.vertices])

    def translate(self, t: Point) -> "LatticePolygon":
        return LatticePolygon([add(p, t) for p in self.vertices])

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {"vertices": [list(p) for p in self.vertices]}

    @staticmethod
    def from_json(data: dict) -> "LatticePolygon":
        return LatticePolygon([tuple(p) for p in data["vertices"]])


def polygon_from_vertices(points) -> LatticePolygon:
    """Convex hull of the given lattice points as a LatticePolygon."""
    return LatticePolygon(points)


def pick_check(poly: LatticePolygon) -> bool:
    """Pick's identity 2A = 2i + b - 2 for two-dimensional polygons."""
    if poly.dimension < 2:
        return True
    i = len(poly.interior_points())
    b = len(poly.boundary_points())
    return poly.area2() == 2 * i + b - 2


def frac(n, d=1) -> Fraction:
    return Fraction(n, d)
