import json

import pytest

from tropmono.cli import main


@pytest.fixture()
def polyfile(tmp_path):
    def write(name, vertices):
        path = tmp_path / name
        path.write_text(json.dumps({"vertices": vertices}))
        return str(path)

    return write


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_analyze_t3(polyfile, capsys):
    path = polyfile("t3.json", [[0, 0], [3, 0], [0, 3]])
    code, out = run(capsys, ["analyze", path])
    assert code == 0
    data = json.loads(out)
    assert (data["g"], data["d"], data["n"]) == (1, 0, 1)
    assert data["mu"] == "surjective" and data["algebraic_mu"] == "surjective"


def test_invalid_inputs_exit_2(polyfile, capsys):
    bad = polyfile("bad.json", [[0, 0], [2, 0], [1, 1], [2, 2], [0, 2]])
    code, _ = run(capsys, ["analyze", bad])
    assert code == 2
    nonsmooth = polyfile("ns.json", [[0, 0], [2, 0], [1, 2]])
    code, _ = run(capsys, ["analyze", nonsmooth])
    assert code == 2


def test_certify_segment(polyfile, capsys, tmp_path):
    path = polyfile("t4.json", [[0, 0], [4, 0], [0, 4]])
    code, out = run(capsys, ["certify", path, "--segment", "0,0,1,1"])
    assert code == 0
    data = json.loads(out)
    assert data["exponent"] == 1
    cert = tmp_path / "cert.json"
    cert.write_text(json.dumps(data["certificate"]))
    code, out = run(capsys, ["replay", str(cert)])
    assert code == 0 and json.loads(out)["replay"] == "ok"


def test_certify_deterministic(polyfile, capsys):
    path = polyfile("t4.json", [[0, 0], [4, 0], [0, 4]])
    _, out1 = run(capsys, ["certify", path, "--segment", "1,1,2,1"])
    _, out2 = run(capsys, ["certify", path, "--segment", "1,1,2,1"])
    assert out1 == out2


def test_subdivide_refine_dual(polyfile, capsys):
    path = polyfile("t3.json", [[0, 0], [3, 0], [0, 3]])
    code, out = run(capsys, ["subdivide", path, "--refine", "--dual"])
    assert code == 0
    data = json.loads(out)
    assert data["unimodular"] is True
    assert len(data["subdivision"]["cells"]) == 9
    assert len(data["tropical_curve"]["rays"]) == 9


def test_snake_and_homology(polyfile, capsys):
    path = polyfile("t4.json", [[0, 0], [4, 0], [0, 4]])
    code, out = run(capsys, ["snake", path])
    assert code == 0
    assert len(json.loads(out)["snake"]["chain"]) == 3
    code, out = run(capsys, ["homology", path, "--loop", "v:1,1"])
    data = json.loads(out)
    assert code == 0 and data["genus"] == 3
    assert sum(map(abs, data["class"])) == 1


def test_graph_families(polyfile, capsys):
    path = polyfile("t6.json", [[0, 0], [6, 0], [0, 6]])
    code, out = run(capsys, ["graph", path, "--family", "corner", "--params", "1,1"])
    assert code == 0
    data = json.loads(out)
    assert len(data["graph"]["edges"]) == 3
    code, out = run(capsys, [
        "graph", path, "--family", "gcdedges", "--params", "1,1,4,1",
    ])
    assert code == 0


def test_verdict_out_file(polyfile, capsys, tmp_path):
    path = polyfile("sq4.json", [[0, 0], [4, 0], [4, 4], [0, 4]])
    dest = tmp_path / "verdict.json"
    code, _ = run(capsys, ["verdict", path, "--out", str(dest)])
    assert code == 0
    data = json.loads(dest.read_text())
    assert data["mu"] == "not_surjective" and data["n"] == 2
