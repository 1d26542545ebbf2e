import pytest

from tropmono.geometry import LatticePolygon, add, seg, smul, sub
from tropmono.graphs import check_balancing
from tropmono.builders import (
    build_corner_graph,
    build_divisible_ray_sweep,
    build_gcd1_graph,
    build_gcd2_graphs,
    build_gcdedges_graph,
    build_interior_graph,
    build_leg_pair,
    build_propagation_graph,
    build_ray_sweep,
    build_side_graph,
    certify_flexible,
)

T3 = LatticePolygon([(0, 0), (3, 0), (0, 3)])
T4 = LatticePolygon([(0, 0), (4, 0), (0, 4)])
T6 = LatticePolygon([(0, 0), (6, 0), (0, 6)])
SQ4 = LatticePolygon([(0, 0), (4, 0), (4, 4), (0, 4)])
BIG = LatticePolygon([(-1, -1), (18, -1), (18, 6), (-1, 6)])


def test_corner_graph():
    res = build_corner_graph(T4, (1, 1))
    weights = sorted(res.graph.entries.values())
    assert weights == [-1, 1, 1]
    assert sum(res.graph.entries.values()) == 1
    assert check_balancing(res.graph, T4) == set()
    assert res.certificate.verify()
    res3 = build_corner_graph(T3, (1, 1))
    assert res3.certificate.verify()


def test_side_graph_lengths():
    res1 = build_side_graph(T4, ((1, 1), (2, 1)))
    assert len(res1.graph.entries) == 3
    res3 = build_side_graph(T6, ((1, 1), (4, 1)))
    assert len(res3.graph.entries) == 5
    assert all(w == 1 for w in res3.graph.entries.values())
    assert check_balancing(res3.graph, T6) == set()
    assert res3.certificate.verify()


def test_propagation_weights_verbatim():
    for a in (1, 2):
        res = build_propagation_graph(T6, (1, 1), (1, 2), a)
        assert res.notes["weights"] == {"horizontal": -2 * a, "vertical": -a - 1}
        assert check_balancing(res.graph, T6) == set()
        assert res.certificate.verify()


def test_even_bridge_weights_verbatim():
    # the even-bridge graph is the propagation graph with a = l: horizontal
    # weight -2l, target the distance-l point
    rect = LatticePolygon([(0, 0), (4, 0), (4, 6), (0, 6)])
    res = build_propagation_graph(rect, (1, 1), (2, 1), 2)
    assert res.notes["weights"]["horizontal"] == -4  # -2l with l = 2
    assert check_balancing(res.graph, rect) == set()
    assert res.certificate.verify()


def test_gcd1_weights_verbatim():
    res = build_gcd1_graph(T6, (1, 1), 3, 1, (4, 1))
    assert res.notes["weights"] == {"horizontal": -6, "vertical": -4}
    assert res.target_exponent == 3
    assert res.certificate.verify()
    # m = l = 1 gives vertical -2 and horizontal -2
    res11 = build_gcd1_graph(T4, (1, 1), 1, 1, (2, 1))
    assert res11.notes["weights"] == {"horizontal": -2, "vertical": -2}


def test_gcd2_weights_verbatim():
    first, second = build_gcd2_graphs(T6, (1, 1), 1, (1, 2))
    assert first.notes["weights"] == {"horizontal": -2, "vertical": -2}
    assert second.notes["weights"] == {"horizontal": -2, "vertical": -2}
    assert first.certificate.verify() and second.certificate.verify()
    f3, s3 = build_gcd2_graphs(T6, (1, 1), 3, (1, 2))
    assert f3.notes["weights"] == {"horizontal": -6, "vertical": -4}
    assert s3.notes["weights"] == {"horizontal": -4, "vertical": -4}


def test_gcdedges_weights_verbatim():
    res = build_gcdedges_graph(T6, (1, 1), (4, 1))
    assert res.notes["weights"] == {"horizontal": -6, "vertical": -2}
    assert res.target_exponent == 3
    assert check_balancing(res.graph, T6) == set()
    assert res.certificate.verify()


def test_ray_sweep_small():
    rs = build_ray_sweep(T6, (1, 1), (1, 2), (2, 2), 1, 1, "kk'")
    assert rs.chain == ((2, 2), (1, 1))
    assert check_balancing(rs.graph, T6) == {(2, 2)}
    cert = certify_flexible(rs.graph, T6, [rs], allow_unbalanced_at=frozenset({(2, 2)}))
    assert cert.verify()


def test_ray_sweep_figure6_instance():
    """kappa=(0,0), kappa'=(0,1), v=(16,4), weights (1,1)."""
    rs = build_ray_sweep(BIG, (0, 0), (0, 1), (16, 4), 1, 1, "kk'")
    # chain recomputed as oracle: one sweep step lands on the long diagonal
    assert rs.chain == ((16, 4), (1, 1), (0, 0))
    assert check_balancing(rs.graph, BIG) == {(16, 4)}
    swapped = build_ray_sweep(BIG, (0, 0), (0, 1), (16, 4), 1, 1, "k'k")
    assert swapped.chain == ((16, 4), (3, 1), (0, 1))
    assert check_balancing(swapped.graph, BIG) == {(16, 4)}
    cert = certify_flexible(
        rs.graph, BIG, [rs], allow_unbalanced_at=frozenset({(16, 4)})
    )
    assert cert.verify()


def test_ray_sweep_area_decrease_assert_holds():
    # longer sweeps exercise the strict-decrease assertion internally
    rect = LatticePolygon([(0, 0), (9, 0), (9, 7), (0, 7)])
    rs = build_ray_sweep(rect, (1, 1), (1, 2), (7, 5), 1, 1, "kk'")
    assert rs.chain[0] == (7, 5) and rs.chain[-1] == (1, 1)
    assert check_balancing(rs.graph, rect) == {(7, 5)}


def test_divisible_examples():
    dv = build_divisible_ray_sweep(SQ4, 2, (1, 1), (1, 2), (3, 3), 1, 1, "kk'")
    assert check_balancing(dv.graph, SQ4) == {(3, 3)}
    cert = certify_flexible(dv.graph, SQ4, [dv], allow_unbalanced_at=frozenset({(3, 3)}))
    assert cert.verify()
    # d = 1 reduces to the plain sweep
    d1 = build_divisible_ray_sweep(T6, 1, (1, 1), (1, 2), (2, 2), 1, 1, "kk'")
    r1 = build_ray_sweep(T6, (1, 1), (1, 2), (2, 2), 1, 1, "kk'")
    assert d1.graph == r1.graph
    # scaled chain is the homothety image of the unscaled chain
    u = build_ray_sweep(SQ4, (1, 1), (1, 2), (2, 2), 1, 1, "kk'")
    assert dv.chain == tuple(add((1, 1), smul(2, sub(p, (1, 1)))) for p in u.chain)
    with pytest.raises(ValueError):
        build_divisible_ray_sweep(SQ4, 2, (1, 1), (1, 2), (2, 2), 1, 1, "kk'")


def test_interior_graph_boundary_ends():
    res = build_interior_graph(T6, seg((2, 2), (3, 2)))
    assert res.graph.weight(seg((2, 2), (3, 2))) == 1
    assert check_balancing(res.graph, T6) == set()
    assert res.certificate.verify()
    res2 = build_interior_graph(T4, seg((2, 1), (1, 2)))
    assert res2.certificate.verify()


def test_interior_graph_rejects_boundary_pair():
    with pytest.raises(ValueError):
        build_interior_graph(T4, seg((0, 0), (1, 0)))


def test_interior_graph_polygon_boundary_end():
    # one end on the polygon boundary: no balancing needed there
    res = build_interior_graph(T4, seg((1, 1), (0, 1)))
    assert res.notes["chase_at"] == (1, 1)
    assert res.certificate.verify()


def test_interior_graph_deep_interior():
    rect = LatticePolygon([(0, 0), (5, 0), (5, 6), (0, 6)])
    res = build_interior_graph(rect, seg((2, 2), (2, 3)))
    assert res.notes["device_v"].kind == "ray"
    assert res.notes["device_w"].kind == "ray"
    assert check_balancing(res.graph, rect) == set()
    assert res.certificate.verify()


def test_leg_pairs():
    lp1 = build_leg_pair(T6, (1, 1), (1, 2), (2, 2), "kk'", 1)
    assert lp1.target == seg((1, 2), (2, 2))
    assert check_balancing(lp1.graph, T6) == set()
    assert lp1.certificate.verify()
    lp2 = build_leg_pair(T6, (1, 1), (1, 2), (2, 2), "kk'", 2)
    assert lp2.target == seg((1, 1), (2, 2))
    assert lp2.certificate.verify()
