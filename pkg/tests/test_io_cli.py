import json
import math

import pytest

from posopt import GameDefinition, InvalidSpec, project
from posopt import io
from posopt.cli import main
from posopt.instances import ThreeNode, build


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def three_node_file(tmp_path):
    path = tmp_path / "g.json"
    io.write_json(io.game_to_dict(build(ThreeNode(0.5, 7))), path)
    return path


@pytest.fixture
def two_point_file(tmp_path):
    path = tmp_path / "two.json"
    path.write_text(
        json.dumps(
            {
                "kind": "finite",
                "positions": ["x1", "x2"],
                "targets": [{"id": "x1", "mass": 0.7}, {"id": "x2", "mass": 0.3}],
                "distances": [[0, "inf"], ["inf", 0]],
            }
        )
    )
    return path


def test_finite_roundtrip(two_point_file):
    g = io.load_game(two_point_file)
    assert g.table[0, 1] == math.inf
    again = io.game_from_dict(json.loads(io.dumps(io.game_to_dict(g))))
    assert again.targets == g.targets and again.masses == g.masses
    assert (again.table == g.table).all()


def test_graph_roundtrip():
    g = GameDefinition.graph(["a", "b", "c"], [("a", "b", 1), ("b", "c", 1)], {"a": 0.5, "c": 0.5})
    again = io.game_from_dict(json.loads(io.dumps(io.game_to_dict(g))))
    assert project(again).to_dict() == project(g).to_dict()


def test_geometric_roundtrip():
    d = {
        "kind": "geometric",
        "dimension": 2,
        "metric": "manhattan",
        "domain": [[0, 1], [0, 1]],
        "targets": [{"id": [0, 0], "mass": 0.25}, {"id": [1, 1], "mass": 0.75, "point": [1, 1]}],
        "grid": 5,
    }
    d["targets"][0]["point"] = [0, 0]
    g = io.game_from_dict(d)
    assert g.targets == ((0, 0), (1, 1))
    assert len(g.deviation_candidates) == 25
    again = io.game_from_dict(json.loads(io.dumps(io.game_to_dict(g))))
    assert again.metric == "manhattan" and len(again.deviation_candidates) == 25


def test_named_instance_roundtrip(three_node_file):
    g = io.load_game(three_node_file)
    assert g.meta["kind"] == "three-node"
    assert project(g).p == project(build(ThreeNode(0.5, 7))).p


def test_load_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(InvalidSpec):
        io.load_game(bad)
    with pytest.raises(InvalidSpec):
        io.load_game(tmp_path / "missing.json")
    with pytest.raises(InvalidSpec):
        io.game_from_dict({"kind": "finite", "positions": ["a"]})
    with pytest.raises(InvalidSpec):
        io.game_from_dict({"kind": "mystery"})
    with pytest.raises(InvalidSpec):
        io.game_from_dict({"kind": "graph", "vertices": ["a"], "edges": [], "targets": [{"id": "b", "mass": 1}]})


def test_dumps_is_strict_json():
    text = io.dumps({"a": math.inf, "b": (1, 2), "c": 0.1})
    assert json.loads(text) == {"a": "inf", "b": [1, 2], "c": 0.1}


def test_cli_project(capsys, two_point_file):
    code, out, _ = run(capsys, "project", str(two_point_file))
    assert code == 0
    assert json.loads(out)["p"] == [0.7, 0.3]


def test_cli_instance_build(capsys, tmp_path):
    target = tmp_path / "t.json"
    code, _, _ = run(capsys, "instance", "build", "--kind", "three-node", "--param", "eps=0.5", "--param", "n=7", "-o", str(target))
    assert code == 0
    assert io.load_game(target).meta["params"] == {"eps": 0.5, "n": 7}
    code, _, err = run(capsys, "instance", "build", "--kind", "three-node", "--param", "eps=0.5", "--param", "n=3")
    assert code == 1 and "error" in err


def test_cli_pure(capsys, two_point_file):
    code, out, _ = run(capsys, "pure", "gen", "--game", str(two_point_file), "--n", "10")
    assert code == 0 and json.loads(out)["counts"] == [7, 3]
    code, out, _ = run(capsys, "pure", "verify", "--game", str(two_point_file), "--counts", "7,3")
    assert code == 0 and json.loads(out)["is_equilibrium"]
    code, out, _ = run(capsys, "pure", "verify", "--game", str(two_point_file), "--counts", "9,1")
    assert code == 2
    code, out, _ = run(capsys, "pure", "enumerate", "--game", str(two_point_file), "--n", "10")
    assert code == 0 and json.loads(out)["equilibria"] == [[7, 3]]
    code, out, _ = run(capsys, "pure", "gen", "--game", str(two_point_file), "--n", "2")
    assert code == 1


def test_cli_pure_dynamics(capsys, three_node_file):
    code, out, err = run(capsys, "pure", "dynamics", "--game", str(three_node_file), "--profile", '["x1","x1","x2","x2","x3","x3","x3"]', "--max-steps", "50")
    assert code == 0
    assert out.splitlines()[0] == "step,player,from,to,utility,new_utility,profile"
    assert json.loads(err)["status"] == "cycle"


def test_cli_pure_bounds(capsys, tmp_path):
    g = tmp_path / "g.json"
    g.write_text(json.dumps({"kind": "finite", "positions": ["a", "b"], "targets": [{"id": "a", "mass": 0.5}, {"id": "b", "mass": 0.5}], "distances": [[0, 1], [1, 0]]}))
    code, out, _ = run(capsys, "pure", "bounds", "--game", str(g), "--counts", "5,5", "--c", "1/5")
    assert code == 0 and json.loads(out)["passed"]


def test_cli_mixed(capsys, two_point_file):
    code, out, _ = run(capsys, "mixed", "solve2", "--p", "0.5", "--n", "10")
    assert code == 0 and json.loads(out)["sigma"] == pytest.approx(0.5)
    code, out, _ = run(capsys, "mixed", "utility", "--game", str(two_point_file), "--n", "5", "--sigma", "1,0", "--samples", "1000")
    body = json.loads(out)
    assert code == 0 and body["utilities"][0]["exact"] == pytest.approx(0.2)
    assert body["utilities"][0]["mc_stderr"] == 0.0
    code, out, _ = run(capsys, "mixed", "coverage", "--sigma", "1/2,1/2", "--n", "2")
    assert code == 0 and json.loads(out)["coverage_exact"] == "1/2"
    code, out, _ = run(capsys, "mixed", "verify", "--game", str(two_point_file), "--n", "10", "--sigma", "0.2,0.8")
    assert code == 2


def test_cli_mixed_verify_equilibrium(capsys, tmp_path):
    from posopt import solve_two_point

    s = solve_two_point(0.7, 10)
    g = tmp_path / "g.json"
    g.write_text(json.dumps({"kind": "finite", "positions": ["x1", "x2"], "targets": [{"id": "x1", "mass": 0.7}, {"id": "x2", "mass": 0.3}], "distances": [[0, "inf"], ["inf", 0]]}))
    code, out, _ = run(capsys, "mixed", "verify", "--game", str(g), "--n", "10", "--sigma", f"{s!r},{1 - s!r}")
    assert code == 0 and json.loads(out)["equilibrium"]["is_equilibrium"]


def test_cli_curve(capsys, tmp_path):
    code, out, _ = run(capsys, "mixed", "curve", "--n", "5,10,20", "--grid", "201")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "n,p,sigma" and len(lines) == 604
    code, again, _ = run(capsys, "mixed", "curve", "--n", "5,10,20", "--grid", "201")
    assert again == out


def test_cli_usage_errors(capsys, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 1
    code, _, err = run(capsys, "project", str(tmp_path / "missing.json"))
    assert code == 1 and "error" in err
    code, _, _ = run(capsys, "mixed", "coverage", "--sigma", "a,b", "--n", "2")
    assert code == 1
    code, _, _ = run(capsys, "repro", "99")
    assert code == 1


def test_cli_repro_list(capsys):
    code, out, _ = run(capsys, "repro", "list")
    assert code == 0 and len(out.splitlines()) == 12


def test_cli_repro_claim(capsys):
    code, out, err = run(capsys, "repro", "5")
    assert code == 0 and err.startswith("PASS")
    assert json.loads(out)["passed"]
