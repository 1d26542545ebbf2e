import random

import pytest

from tropmono.geometry import LatticePolygon, UnimodularMap
from tropmono.polygons import (
    SmoothnessError,
    Surjectivity,
    adjoint_edge_lengths_valid,
    adjoint_polygon,
    analyze,
    divisibility,
    is_smooth,
    normalize_at_vertex,
    root_order,
)

T3 = LatticePolygon([(0, 0), (3, 0), (0, 3)])
T4 = LatticePolygon([(0, 0), (4, 0), (0, 4)])
T6 = LatticePolygon([(0, 0), (6, 0), (0, 6)])
SQ4 = LatticePolygon([(0, 0), (4, 0), (4, 4), (0, 4)])


def test_is_smooth():
    assert is_smooth(T3)
    assert is_smooth(LatticePolygon([(0, 0), (1, 0), (1, 1), (0, 1)]))
    assert not is_smooth(LatticePolygon([(0, 0), (2, 0), (1, 2)]))
    with pytest.raises(SmoothnessError):
        is_smooth(LatticePolygon([(0, 0), (1, 0)]))


def test_adjoint_examples():
    assert adjoint_polygon(T4).vertices == ((1, 1), (2, 1), (1, 2))
    assert adjoint_polygon(LatticePolygon([(0, 0), (1, 0), (0, 1)])) is None
    assert adjoint_polygon(T6).vertices == ((1, 1), (4, 1), (1, 4))


def test_root_order():
    assert root_order(adjoint_polygon(T6)) == 3
    assert root_order(adjoint_polygon(SQ4)) == 2
    assert root_order(adjoint_polygon(T4)) == 1
    assert root_order(adjoint_polygon(T3)) == 1  # point, by convention
    with pytest.raises(ValueError):
        root_order(None)


def test_root_order_divides_edge_lengths_and_scaling():
    for poly in (T6, SQ4):
        adj = adjoint_polygon(poly)
        n = root_order(adj)
        for l in adj.edge_lengths():
            assert l % n == 0
        kappa = adj.vertices[0]
        scaled = LatticePolygon(
            [
                (kappa[0] + (v[0] - kappa[0]) // n, kappa[1] + (v[1] - kappa[1]) // n)
                for v in adj.vertices
            ]
        )
        assert scaled.dimension == 2


def test_normalization_examples():
    f, img = normalize_at_vertex(T4, (1, 1))
    assert f.m == ((1, 0), (0, 1)) and f.t == (-1, -1)
    assert img.side((0, -1)) == 0 and img.side((-1, 0)) == 0
    f2, img2 = normalize_at_vertex(SQ4, (1, 1))
    assert f2.t == (-1, -1)
    g = f.inverse()
    for p in T4.lattice_points():
        assert g.apply(f.apply(p)) == p


def test_analyze_verdict_table():
    cases = [
        (T3, 1, 0, 1, Surjectivity.YES, Surjectivity.YES),
        (T4, 3, 2, 1, Surjectivity.YES, Surjectivity.YES),
        (T6, 10, 2, 3, Surjectivity.NO, Surjectivity.YES),
        (SQ4, 9, 2, 2, Surjectivity.NO, Surjectivity.NO),
        (
            LatticePolygon([(0, 0), (2, 0), (2, 2), (0, 2)]),
            1,
            0,
            1,
            Surjectivity.YES,
            Surjectivity.YES,
        ),
    ]
    for poly, g, d, n, mu, amu in cases:
        analysis, verdict = analyze(poly)
        assert (analysis.genus, analysis.d, analysis.n) == (g, d, n)
        assert verdict.mu is mu and verdict.algebraic_mu is amu


def test_analyze_genus_zero_and_errors():
    rect = LatticePolygon([(0, 0), (1, 0), (1, 2), (0, 2)])
    analysis, verdict = analyze(rect)
    assert analysis.genus == 0 and verdict.mu is Surjectivity.NOT_APPLICABLE
    with pytest.raises(SmoothnessError):
        analyze(LatticePolygon([(0, 0), (2, 0), (1, 2)]))


def test_analyze_unimodular_invariance():
    rng = random.Random(7)
    count = 0
    while count < 100:
        a, b = rng.randint(-2, 2), rng.randint(-2, 2)
        found = None
        for c in range(-2, 3):
            for d in range(-2, 3):
                if a * d - b * c in (1, -1):
                    found = ((a, b), (c, d))
                    break
            if found:
                break
        if not found:
            continue
        f = UnimodularMap(found, (rng.randint(-4, 4), rng.randint(-4, 4)))
        for poly in (T3, T4, T6, SQ4):
            an1, v1 = analyze(poly)
            an2, v2 = analyze(poly.transform(f))
            assert (an1.genus, an1.boundary, an1.d, an1.n) == (
                an2.genus,
                an2.boundary,
                an2.d,
                an2.n,
            )
            assert (v1.mu, v1.algebraic_mu) == (v2.mu, v2.algebraic_mu)
        count += 1


def test_divisibility():
    assert divisibility(adjoint_polygon(SQ4)) == [
        (2, [(1, 1), (1, 3), (3, 1), (3, 3)])
    ]
    divs = divisibility(adjoint_polygon(T6))
    assert [d for d, _ in divs] == [3]
    assert divs[0][1] == [(1, 1), (1, 4), (4, 1)]
    assert divisibility(adjoint_polygon(T4)) == []


def test_adjoint_edge_length_formula():
    for poly in (T4, T6, SQ4, LatticePolygon([(0, 0), (5, 0), (5, 3), (0, 3)])):
        assert adjoint_edge_lengths_valid(poly)


def test_hyperelliptic_deferred():
    rect32 = LatticePolygon([(0, 0), (3, 0), (3, 2), (0, 2)])
    analysis, verdict = analyze(rect32)
    assert analysis.d == 1
    assert analysis.n == 1  # segment adjoint of lattice length 1
    assert verdict.mu is Surjectivity.DEFERRED
    assert verdict.algebraic_mu is Surjectivity.DEFERRED
    long_rect = LatticePolygon([(0, 0), (5, 0), (5, 2), (0, 2)])
    analysis2, verdict2 = analyze(long_rect)
    assert analysis2.d == 1 and analysis2.n == 3
    assert verdict2.mu is Surjectivity.DEFERRED


def test_normalize_already_normalized_is_identity():
    shifted = T4.translate((-1, -1))
    f, img = normalize_at_vertex(shifted, (0, 0))
    assert f.m == ((1, 0), (0, 1)) and f.t == (0, 0)
    assert img == shifted
