from __future__ import annotations

import itertools

import numpy as np
import pytest

from cardinal.config import config_from_dict
from cardinal.metrics import metrics_csv, summarize, summary_json
from cardinal.netsim import Purpose, build_topology, build_world, rng_substream, run, step

from conftest import tiny_config


def topo(**spec):
    return config_from_dict({"topology": spec}).topology


def test_complete_graph_degrees():
    t = build_topology(topo(kind="complete", hosts=5), 0)
    assert all(t.degree(h) == 4 for h in range(5))


def test_ring_k2_degrees():
    t = build_topology(topo(kind="ring", hosts=10, k=2), 0)
    assert all(t.degree(h) == 4 for h in range(10))
    assert t.adjacency[0] == (1, 2, 8, 9)


def test_topology_is_seeded():
    spec = topo(kind="erdos_renyi", hosts=40, mean_degree=4)
    assert build_topology(spec, 3).adjacency == build_topology(spec, 3).adjacency
    assert build_topology(spec, 3).adjacency != build_topology(spec, 4).adjacency


def test_adjacency_symmetric_sorted_no_loops():
    t = build_topology(topo(kind="erdos_renyi", hosts=30, mean_degree=5), 1)
    for h, nbrs in enumerate(t.adjacency):
        assert list(nbrs) == sorted(nbrs) and h not in nbrs
        assert all(h in t.adjacency[v] for v in nbrs)


def test_edge_list_topology():
    t = build_topology(topo(kind="edge_list", hosts=4, edges=[[0, 1], [1, 2]]), 0)
    assert t.adjacency == ((1,), (0, 2), (1,), ())
    assert not t.is_connected()


def test_isolated_hosts_warn(caplog):
    build_topology(topo(kind="edge_list", hosts=3, edges=[[0, 1]]), 0)
    assert "isolated" in caplog.text


def test_substream_repeatable():
    a = rng_substream(5, 3, Purpose.SYMPTOMS, 7).random(8)
    b = rng_substream(5, 3, Purpose.SYMPTOMS, 7).random(8)
    assert np.array_equal(a, b)


def test_substreams_do_not_collide():
    # 10^4 substreams: 25 hosts x 4 purposes x 100 steps
    cells = itertools.product(range(25), list(Purpose)[:4], range(100))
    firsts = {rng_substream(11, h, p, t).integers(2**63) for h, p, t in cells}
    assert len(firsts) == 10_000


def test_substream_differs_by_seed():
    assert rng_substream(1, 0, Purpose.BENIGN, 0).random() != rng_substream(2, 0, Purpose.BENIGN, 0).random()


def test_empty_world_is_a_fixed_point():
    cfg = config_from_dict({"topology": {"kind": "ring", "hosts": 6, "k": 1}})
    w = build_world(cfg, 0)
    for t in range(5):
        step(w)
        assert w.step == t + 1
        assert all(not h.effectors and not h.naive and not h.posture.response_log for h in w.hosts)
        assert w.inflight == []


def test_baseline_infections_never_decrease():
    w = run(tiny_config(cardinal_enabled=False, horizon=15), 2)
    counts = [m.per_antigen["w"]["infected"] for m in w.metrics]
    assert counts == sorted(counts)


def test_new_infections_wait_one_step():
    w = run(tiny_config(cardinal_enabled=False), 0, horizon=1)
    assert w.metrics[0].per_antigen["w"]["infected"] == 1


def test_horizon_zero_rejected():
    with pytest.raises(ValueError):
        run(tiny_config(), 0, horizon=0)


def test_horizon_one_gives_one_row():
    assert len(run(tiny_config(), 0, horizon=1).metrics) == 1


def test_scheduled_infection_step():
    cfg = tiny_config(initial_infections=[{"host": 2, "antigen": "w", "step": 3}], cardinal_enabled=False)
    w = run(cfg, 0, horizon=5)
    assert [m.per_antigen["w"]["infected"] for m in w.metrics][:4] == [0, 0, 0, 1]


def _outputs(world):
    return metrics_csv(world.metrics, world.config.antigens), summary_json(summarize(world))


def test_seeds_reproducible_and_distinct(scenario):
    cfg = scenario("confusable").with_overrides(horizon=40)
    a, b, c = run(cfg, 0), run(cfg, 0), run(cfg, 1)
    assert _outputs(a) == _outputs(b)
    assert _outputs(a)[0] != _outputs(c)[0]


def test_parallel_and_permuted_order_match(scenario):
    cfg = scenario("confusable").with_overrides(horizon=40)
    ref = _outputs(run(cfg, 4))
    assert _outputs(run(cfg, 4, workers=4)) == ref
    w = build_world(cfg, 4)
    w.host_order = list(reversed(range(len(w.hosts))))
    for _ in range(cfg.horizon):
        step(w)
    assert _outputs(w) == ref


def test_trace_rows(scenario):
    rows = []
    w = run(scenario("memory"), 0, horizon=12, trace_sink=rows.extend)
    kinds = {r["event"] for r in rows}
    assert kinds <= {"message", "response"} and "message" in kinds
    sent = sum(m.messages_sent for m in w.metrics)
    assert sum(r["event"] == "message" for r in rows) == sent
