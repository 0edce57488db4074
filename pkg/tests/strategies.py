"""Hypothesis strategies for small random worlds."""

from __future__ import annotations

from hypothesis import strategies as st

from cardinal.config import config_from_dict

unit = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def ranges(draw):
    a, b = sorted((draw(unit), draw(unit)))
    return [a, b]


@st.composite
def topologies(draw):
    n = draw(st.integers(2, 10))
    kind = draw(st.sampled_from(["erdos_renyi", "ring", "complete", "edge_list"]))
    if kind == "erdos_renyi":
        return {"kind": kind, "hosts": n, "mean_degree": draw(st.floats(0, n - 1))}
    if kind == "ring":
        n = max(n, 3)
        return {"kind": kind, "hosts": n, "k": draw(st.integers(1, (n - 1) // 2))}
    if kind == "complete":
        return {"kind": kind, "hosts": n}
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), max_size=2 * n, unique=True))
    return {"kind": kind, "hosts": n, "edges": [list(e) for e in edges]}


@st.composite
def worlds(draw, max_steps=30):
    """(config dict, seed) for up to 10 hosts, 3 antigens and ``max_steps`` steps."""
    topo = draw(topologies())
    n = topo["hosts"]
    n_worms = draw(st.integers(0, 3))
    n_benign = draw(st.integers(0, 3 - n_worms))
    worms = [
        {
            "antigen": f"w{i}",
            "scan_mode": draw(st.sampled_from(["topology", "random"])),
            "attempts_per_step": draw(st.integers(1, 3)),
            "severity_mean": draw(st.floats(0.05, 1.0)),
            "severity_jitter": draw(st.floats(0.0, 0.3)),
            "certainty_base": draw(unit),
            "certainty_ramp": draw(st.floats(0.0, 0.5)),
            "symptoms_per_step": draw(st.integers(1, 3)),
        }
        for i in range(n_worms)
    ]
    benign = [
        {
            "antigen": f"b{i}",
            "event_rate": draw(unit),
            "severity_range": draw(ranges()),
            "certainty_range": draw(ranges()),
        }
        for i in range(n_benign)
    ]
    infections = [
        {"host": draw(st.integers(0, n - 1)), "antigen": w["antigen"], "step": draw(st.integers(0, 5))}
        for w in worms
        for _ in range(draw(st.integers(0, 2)))
    ]
    # at most one scheduled infection per (host, antigen)
    seen, uniq = set(), []
    for x in infections:
        if (x["host"], x["antigen"]) not in seen:
            seen.add((x["host"], x["antigen"]))
            uniq.append(x)
    data = {
        "topology": topo,
        "worms": worms,
        "benign": benign,
        "initial_infections": uniq,
        "differentiation": {
            "theta_ctl": draw(st.floats(0.5, 6)),
            "theta_th1": draw(st.floats(0.5, 6)),
            "theta_th2": draw(st.floats(0.5, 6)),
            "maturation_window": draw(st.integers(1, 4)),
            "clone_gain": draw(st.floats(0.5, 8)),
            "clone_cap": draw(st.integers(1, 16)),
            "memory_factor": draw(st.floats(0.1, 1.0)),
            "decay_per_step": draw(st.integers(1, 3)),
        },
        "interaction": {
            "q_local": draw(st.integers(1, 6)),
            "q_peer": draw(st.integers(1, 4)),
            "delta_up": draw(st.floats(0.1, 1.5)),
            "delta_down": draw(st.floats(0.05, 0.9)),
            "suppress_step": draw(st.integers(1, 3)),
            "th1_fraction": draw(st.floats(0.1, 1.0)),
        },
        "cardinal_enabled": draw(st.booleans()),
        "horizon": draw(st.integers(1, max_steps)),
    }
    return config_from_dict(data), draw(st.integers(0, 2**32 - 1))
