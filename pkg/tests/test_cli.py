import json

import numpy as np
import pytest

from gcspath.cli import main
from gcspath.instances import symmetry_instance
from gcspath.render import RenderError, render_svg
from gcspath.serialization import dump_instance


def run(tmp_path, *argv, out="result.json"):
    out_path = tmp_path / out
    code = main(list(argv) + ["--out", str(out_path)])
    data = json.loads(out_path.read_text()) if out_path.exists() else None
    return code, data


def test_solve_micp_generator(tmp_path):
    code, data = run(tmp_path, "solve", "--gen", "symmetry")
    assert code == 0
    assert data["status"] == "optimal"
    assert data["cost"] == pytest.approx(np.sqrt(5) + np.sqrt(13), abs=1e-6)
    assert data["path"][0] == "s" and data["path"][-1] == "t"
    # the reported gap is exactly (cost - relaxation) / cost
    want = (data["cost"] - data["relaxation_cost"]) / data["cost"]
    assert data["gap"] == pytest.approx(want, abs=1e-9)


def test_solve_relax_emits_certificate(tmp_path):
    code, data = run(tmp_path, "solve", "--gen", "symmetry", "--mode", "relax",
                     "--no-tighten")
    assert code == 0
    assert data["cost"] == pytest.approx(3 + np.sqrt(5), abs=1e-6)
    cert = data["certificate"]
    assert cert["bound"] == pytest.approx(data["cost"], abs=1e-6)
    assert set(cert["p"]) == {"s", "1", "2", "3", "t"}


def test_solve_instance_file_round_trip(tmp_path):
    path = tmp_path / "inst.json"
    path.write_text(dump_instance(symmetry_instance()))
    code, data = run(tmp_path, "solve", str(path))
    assert code == 0
    assert data["cost"] == pytest.approx(np.sqrt(5) + np.sqrt(13), abs=1e-6)


def test_malformed_input_exits_one(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["solve", str(path)]) == 1
    assert main(["solve", str(tmp_path / "missing.json")]) == 1
    assert main(["solve", "--gen", "nope"]) == 1
    assert main(["solve", "--gen", "random:2"]) == 1
    assert main(["solve"]) == 1


def test_infeasible_instance_exits_two(tmp_path):
    inst = {
        "vertices": {"s": {"type": "singleton", "theta": [0.0]},
                     "m": {"type": "box", "lo": [2.0], "hi": [3.0]},
                     "t": {"type": "singleton", "theta": [1.0]}},
        "edges": [
            {"u": "s", "v": "m", "length": {"type": "euclidean", "n": 1}},
            {"u": "m", "v": "t", "length": {
                "type": "const", "c": 1.0, "n_u": 1, "n_v": 1,
                "constraint": {"E": [[1.0]], "F": [[-1.0]], "g": [0.0],
                               "relation": "eq"}}}],
        "source": "s", "target": "t"}
    path = tmp_path / "blocked.json"
    path.write_text(json.dumps(inst))
    code, data = run(tmp_path, "solve", str(path))
    assert code == 2
    assert data["status"] == "infeasible"


def test_node_limit_exits_three(tmp_path):
    code, data = run(tmp_path, "solve", "--gen", "symmetry",
                     "--node-limit", "1")
    assert code == 3
    assert data["status"] == "node-limit"
    assert data["cost"] is not None


def test_svg_rendering(tmp_path):
    svg = tmp_path / "plot.svg"
    code, _ = run(tmp_path, "solve", "--gen", "symmetry", "--svg", str(svg))
    assert code == 0
    text = svg.read_text()
    assert text.startswith("<svg")
    assert "</svg>" in text


def test_render_requires_projection_above_two_dims():
    g = symmetry_instance()
    positions = {v: s.chebyshev_center() for v, s in g.vertices.items()}
    assert "<svg" in render_svg(g, positions, ["s", "1", "3", "t"], None)
    from gcspath.instances import random_instance
    g3 = random_instance(0, 3, 6, 10, 0.01)
    pos3 = {v: s.chebyshev_center() for v, s in g3.vertices.items()}
    with pytest.raises(RenderError):
        render_svg(g3, pos3, None, None)
    assert "<svg" in render_svg(g3, pos3, None, (0, 2))


def test_bench_writes_csv_with_summary(tmp_path):
    out = tmp_path / "bench.csv"
    code = main(["bench", "--n", "2", "--nv", "7", "--ne", "12",
                 "--volume", "0.01", "--seeds", "3", "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    header = lines[0].split(",")
    assert header[0] == "seed" and "gap_pct" in header
    seeds = [l.split(",")[0] for l in lines[1:]]
    assert seeds[:3] == ["0", "1", "2"]
    assert "summary" in seeds and "summary-max" in seeds


def test_control_min_time(tmp_path):
    system = {"kind": "mintime", "A": [[1.0]], "B": [[1.0]],
              "S": {"type": "box", "lo": [-10.0], "hi": [10.0]},
              "A_set": {"type": "box", "lo": [-1.0], "hi": [1.0]},
              "s0": [3.0], "T_max": 5}
    spath = tmp_path / "sys.json"
    spath.write_text(json.dumps(system))
    traj = tmp_path / "traj.csv"
    out = tmp_path / "result.json"
    code = main(["control", str(spath), "--traj", str(traj),
                 "--out", str(out)])
    assert code == 0
    data = json.loads(out.read_text())
    assert data["cost"] == pytest.approx(3.0, abs=1e-6)
    assert data["horizon"] == 3
    rows = traj.read_text().strip().splitlines()
    assert rows[0] == "tau,s0,a0"
    assert len(rows) == 5


def test_control_malformed_system(tmp_path):
    spath = tmp_path / "sys.json"
    spath.write_text('{"kind": "lqr"}')
    assert main(["control", str(spath)]) == 1
