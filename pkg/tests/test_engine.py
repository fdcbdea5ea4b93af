import dataclasses
import math

import pytest

from hetmem.config import GB
from hetmem.engine import MODES, Scenario, capacity_limit, compare, evaluate, scenario_from_doc, scenario_to_doc
from hetmem.placement import CapacityError, MemoryState, Structure, spill_alloc
from hetmem.workload import preset


def run(config, mode, name="read_only", **fields):
    return evaluate(Scenario(mode, mode, preset(name).replace(**fields)), config)


def test_capacity_limits(config):
    assert capacity_limit("dram_local", config) == 96 * GB
    assert capacity_limit("pmm_numa_local", config) == 768 * GB
    assert capacity_limit("memory_mode_two_socket", config) == 1280 * GB
    assert capacity_limit("policy_spill", config) == 1704 * GB


def test_pmm_local_read(config):
    assert run(config, "pmm_numa_local", threads=24).bandwidth == 39.0


@pytest.mark.parametrize("loc", ["local", "remote"])
def test_fsdax_equals_numa(config, loc):
    for name in ("read_only", "mix_2r1w", "random_read"):
        assert run(config, f"pmm_fsdax_{loc}", name) == run(config, f"pmm_numa_{loc}", name)


@pytest.mark.parametrize("base", ["dram", "pmm_numa", "pmm_fsdax", "memory_mode"])
def test_remote_never_faster(config, base):
    for name in ("read_only", "random_read", "write_only"):
        local, remote = run(config, f"{base}_local", name), run(config, f"{base}_remote", name)
        assert remote.latency >= local.latency
        assert remote.bandwidth <= local.bandwidth


@pytest.mark.parametrize("mode", MODES)
def test_runtime_times_bandwidth_is_bytes(config, mode):
    r = run(config, mode, "stream_triad", data_size=40 * GB)
    assert r.runtime * r.bandwidth * 1e9 == pytest.approx(r.bytes_moved, rel=1e-15)
    assert r.power.total > 0 and r.energy.total > 0


def test_bytes_moved_counts_write_amplification(config):
    r = run(config, "pmm_numa_local", "mix_1r1w", data_size=10 * GB, touched_bytes_per_media_line=64)
    assert r.bytes_moved == pytest.approx(10 * GB * 2.5)
    assert run(config, "dram_local", "mix_1r1w", data_size=10 * GB).bytes_moved == 10 * GB


def test_capacity_error_states_limit(config):
    with pytest.raises(CapacityError, match="1.28 TB"):
        run(config, "memory_mode_two_socket", data_size=1300 * GB)


def test_write_isolation_dram_overflow(config):
    with pytest.raises(CapacityError, match="'writes'"):
        run(config, "policy_write_isolation", "stream_copy", data_size=400 * GB)


def test_explicit_spill_placement(config):
    pm = spill_alloc(1000 * GB, MemoryState.from_config(config), GB)
    explicit = evaluate(Scenario("s", "policy_spill", preset("accumulate"), placement=pm), config)
    implicit = run(config, "policy_spill", "accumulate", data_size=1000 * GB)
    assert explicit.bandwidth == implicit.bandwidth


def test_explicit_structures(config):
    structs = (Structure("grid", 100 * GB, 0.0), Structure("out", 50 * GB, 1.0))
    r = evaluate(Scenario("w", "policy_write_isolation", preset("stream_triad"), structures=structs), config)
    assert 60 < r.bandwidth < 200


def test_scenario_validation():
    with pytest.raises(ValueError, match="unknown mode"):
        Scenario("x", "turbo", preset("read_only"))
    with pytest.raises(ValueError):
        Scenario("x", "dram_local", preset("read_only"), structures=(Structure("a", 1, 0.0),))
    with pytest.raises(ValueError):
        Scenario("x", "policy_write_isolation", preset("read_only"), structures=())


def test_scenario_doc_round_trip():
    s = Scenario("w", "policy_write_isolation", preset("stream_copy"),
                 structures=(Structure("a", 10, 0.0), Structure("b", 5, 1.0)), passes=3)
    assert scenario_from_doc(scenario_to_doc(s)) == s
    with pytest.raises(ValueError):
        scenario_from_doc({"mode": "dram_local", "colour": 1})


def test_interleave_between_tiers(config):
    r = run(config, "dram_pmm_interleave", data_size=100 * GB)
    assert run(config, "pmm_two_socket").bandwidth < r.bandwidth < run(config, "dram_two_socket").bandwidth


def test_compare_identity_and_errors(config):
    s = Scenario("a", "dram_local", preset("read_only"))
    bad = Scenario("too-big", "dram_local", preset("read_only").replace(data_size=200 * GB))
    table = compare([s, s, bad], config)
    assert table.rows[1].ratios["bandwidth_ratio"] == 1.0
    assert table.rows[2].report is None and "CapacityError" in table.rows[2].error
    assert compare([s, s, bad], config).to_csv() == table.to_csv()


def test_compare_two_socket_gap(config):
    for name in ("read_only", "write_only", "mix_1r1w", "mix_2r1w", "mix_3r1w"):
        table = compare([Scenario("p", "pmm_two_socket", preset(name)), Scenario("d", "dram_two_socket", preset(name))],
                        config)
        assert 2.6 <= table.rows[1].ratios["bandwidth_ratio"] <= 12.5


def test_isolation_saves_energy_over_pmm_copy(config):
    size = 2 * config.usable_dram
    iso = run(config, "policy_write_isolation", "stream_copy", data_size=size)
    pmm = run(config, "pmm_two_socket", "stream_copy", data_size=size)
    assert pmm.energy.total / iso.energy.total >= 3.0


def test_memory_mode_hit_rate_reported(config):
    assert run(config, "memory_mode_local", data_size=10 * GB).hit_rate is not None
    assert run(config, "dram_local").hit_rate is None
