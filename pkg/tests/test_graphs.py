import pytest

from tropmono.geometry import LatticePolygon, seg
from tropmono.graphs import (
    AdmissibilityCertificate,
    CertificationError,
    Hint,
    WeightedSegmentGraph,
    bridges,
    bridges_at,
    build_snake,
    certify_admissible,
    check_balancing,
)
from tropmono.subdivision import HeightFunction

T3 = LatticePolygon([(0, 0), (3, 0), (0, 3)])
T4 = LatticePolygon([(0, 0), (4, 0), (0, 4)])
T6 = LatticePolygon([(0, 0), (6, 0), (0, 6)])
SQ4 = LatticePolygon([(0, 0), (4, 0), (4, 4), (0, 4)])
USQ = LatticePolygon([(0, 0), (1, 0), (1, 1), (0, 1)])


def corner_graph():
    g = WeightedSegmentGraph()
    g.add(seg((0, 0), (1, 1)), -1)
    g.add(seg((1, 1), (1, 0)), 1)
    g.add(seg((1, 1), (0, 1)), 1)
    return g


def test_weighted_graph_arithmetic():
    g = WeightedSegmentGraph({seg((0, 0), (1, 0)): 2})
    g.add(seg((1, 0), (0, 0)), -2)
    assert len(g) == 0
    g2 = corner_graph().scaled(3)
    assert g2.weight(seg((0, 0), (1, 1))) == -3


def test_balancing():
    assert check_balancing(corner_graph(), T4) == set()
    single = WeightedSegmentGraph({seg((0, 0), (1, 1)): 1})
    assert check_balancing(single, T4) == {(1, 1)}
    chain = WeightedSegmentGraph(
        {seg((i, 1), (i + 1, 1)): 1 for i in range(5)}
    )
    assert check_balancing(chain, T6) == set()
    short = WeightedSegmentGraph(
        {seg((0, 1), (1, 1)): 1, seg((1, 1), (2, 1)): 1, seg((2, 1), (3, 1)): 1}
    )
    assert check_balancing(short, T6) == {(3, 1)}


def test_bridges_examples():
    assert len(bridges(T3)) == 9
    assert bridges(USQ) == []
    at11 = bridges_at(T4, (1, 1))
    assert seg((0, 0), (1, 1)) in [b.segment for b in at11]
    assert seg((1, 0), (1, 1)) in [b.segment for b in at11]
    # segments entering the open adjoint are not bridges
    assert seg((1, 2), (2, 1)) not in [b.segment for b in bridges(T6)]


def test_bridges_share_interior_end_key():
    at = bridges_at(T6, (2, 1))
    assert len(at) >= 2
    assert all(b.interior_end == (2, 1) for b in at)


def test_certify_with_hint_and_roundtrip():
    hint = Hint(
        USQ,
        (LatticePolygon([(0, 0), (1, 0), (1, 1)]), LatticePolygon([(0, 0), (1, 1), (0, 1)])),
        HeightFunction.of({(0, 0): 0, (1, 1): 0, (1, 0): 1, (0, 1): 1}),
    )
    cert = certify_admissible(corner_graph(), T4, hint)
    assert cert.verify()
    assert cert.subdivision.is_unimodular()
    assert len(cert.subdivision.cells) == T4.area2()
    again = AdmissibilityCertificate.from_json(cert.to_json())
    assert again.verify()


def test_certify_rejects_unbalanced():
    bad = WeightedSegmentGraph({seg((0, 0), (1, 1)): 1})
    with pytest.raises(CertificationError):
        certify_admissible(bad, T4)


def test_snakes():
    sn4 = build_snake(T4)
    assert len(sn4.chain) == 3
    assert sn4.points == ((0, 1), (1, 1), (2, 1), (1, 2))
    assert sn4.bridge == seg((1, 0), (2, 1))
    sn3 = build_snake(T3)
    assert len(sn3.chain) == 1
    sn6 = build_snake(T6)
    assert len(sn6.chain) == 10
    snsq = build_snake(SQ4)
    assert len(snsq.chain) == 9
    for sn, poly in ((sn4, T4), (sn6, T6), (snsq, SQ4)):
        sn.validate(poly)


def test_snake_chain_through_all_adjoint_points():
    sn = build_snake(T6)
    from tropmono.polygons import adjoint_polygon

    assert set(sn.points[1:]) == set(adjoint_polygon(T6).lattice_points())
