import csv
import io
import json

import pytest

from hetmem.cli import run
from hetmem.engine import Scenario, scenario_to_doc
from hetmem.workload import preset


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_print_default(capsys):
    code, out, _ = call(capsys, "config", "--print-default")
    assert code == 0
    assert '"static_memory_power_per_socket": 38' in out


def test_eval_write_only(capsys):
    code, out, _ = call(capsys, "eval", "--scenario", "pmm_numa_local", "--workload", "write_only")
    assert code == 0
    assert json.loads(out)["bandwidth_gbps"] == pytest.approx(12.1)


def test_eval_json_and_csv_agree(capsys):
    _, j, _ = call(capsys, "eval", "--scenario", "dram_two_socket", "--workload", "stream_triad")
    _, c, _ = call(capsys, "eval", "--scenario", "dram_two_socket", "--workload", "stream_triad", "--out", "csv")
    row = next(csv.DictReader(io.StringIO(c)))
    doc = json.loads(j)
    for key, value in row.items():
        if key != "scenario":
            assert float(value) == pytest.approx(doc[key], rel=1e-5)


def test_eval_scenario_file(tmp_path, capsys):
    path = tmp_path / "s.json"
    path.write_text(json.dumps(scenario_to_doc(Scenario("x", "dram_local", preset("read_only")))))
    code, out, _ = call(capsys, "eval", "--scenario", str(path))
    assert code == 0 and json.loads(out)["scenario"] == "x"


def test_capacity_exit_code(capsys):
    code, _, err = call(capsys, "eval", "--scenario", "dram_local", "--data-size", "2e11")
    assert code == 2 and "limit" in err


def test_validation_exit_code(tmp_path, capsys):
    bad = tmp_path / "c.json"
    bad.write_text('{"topology": {"sockets": 0}}')
    code, _, err = call(capsys, "eval", "--scenario", "dram_local", "--config", str(bad))
    assert code == 1 and "topology.sockets" in err
    assert call(capsys, "eval", "--scenario", "dram_local", "--workload", "nope")[0] == 1


@pytest.mark.parametrize("argv", [["frobnicate"], ["sweep", "--kind", "roofline", "--bogus"], [],
                                  ["sweep", "--kind", "spaceline"]])
def test_usage_exit_code(capsys, argv):
    assert call(capsys, *argv)[0] == 64


def test_compare(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(json.dumps([{"mode": "pmm_two_socket", "workload": "read_only"},
                                {"mode": "dram_two_socket", "workload": "read_only"},
                                {"mode": "dram_local", "workload": {"preset": "read_only", "data_size": 5e11}}]))
    code, out, _ = call(capsys, "compare", "--scenarios", str(path))
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert float(rows[1]["bandwidth_ratio"]) == pytest.approx(204 / 78, rel=1e-5)
    assert rows[2]["error"].startswith("CapacityError")


def test_sweep_grid_and_svg(tmp_path, capsys):
    grid = tmp_path / "g.json"
    grid.write_text('{"ai_values": [1, 2], "distributions": [0, 1]}')
    svg = tmp_path / "p.svg"
    code, out, _ = call(capsys, "sweep", "--kind", "powerline", "--grid", str(grid), "--svg", str(svg))
    assert code == 0 and len(out.splitlines()) == 5 and svg.exists()


def test_sweep_plateau(capsys):
    _, out, _ = call(capsys, "sweep", "--kind", "roofline")
    assert max(float(r["perf_gflops"]) for r in csv.DictReader(io.StringIO(out))) == 208.0


def test_trace_sim_file(tmp_path, capsys):
    path = tmp_path / "t.trace"
    path.write_text("W 0\nR 1\nR 2\nR 0\nR 1\n")
    code, out, _ = call(capsys, "trace-sim", "--trace", str(path), "--sets", "2")
    assert code == 0
    assert json.loads(out) == {"accesses": 5, "hits": 1, "misses": 4, "dirty_evictions": 1, "hit_rate": 0.2}


def test_trace_sim_seed_threads_through(capsys):
    sim = ["trace-sim", "--sets", "64", "--events", "5000",
           "--workload", '{"preset": "random_read", "data_size": 16384, "read_fraction": 0.5}']
    outs = [call(capsys, *a)[1] for a in (["--seed", "4", *sim], [*sim, "--seed", "4"], [*sim, "--seed", "5"])]
    assert outs[0] == outs[1] != outs[2]
