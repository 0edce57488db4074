"""World state, topology generation, RNG substreams and the step loop.

Every cross-host effect (new infections, peer messages) becomes visible one
step later, and every random draw comes from a substream keyed by
(seed, host, purpose, step). Hosts can therefore be evaluated in any order,
or concurrently, without changing the result.
"""

from __future__ import annotations

import enum
import logging
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np

from .config import RunConfig, TopologySpec
from .epidemic import (
    InfectionState,
    Status,
    can_infect,
    emit_benign,
    emit_symptoms,
    propagate,
)
from .errors import InvariantViolation
from .lymph_node import (
    CELL_TYPES,
    CellType,
    EffectorTCell,
    NaiveTCell,
    decay_effectors,
    differentiate,
    ensure_naive,
    mature,
    merge_effector,
    record_clone_history,
)
from .metrics import StepMetrics
from .peer_interaction import (
    PeerEffectorMessage,
    PeerResponseHistory,
    merge_peer_messages,
    plan_migration,
    stage1_select,
    stage2_select,
    stage3_update,
    stage4_suppress,
    th1_boost_ctl,
)
from .periphery import Antigen, Tissue, assess_events, collect_tissue
from .responder import DefensePosture, ResponseKind, apply_response

log = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1


class Purpose(enum.IntEnum):
    PROPAGATION = 1
    SYMPTOMS = 2
    BENIGN = 3
    MIGRATION = 4
    TOPOLOGY = 5


def rng_substream(seed: int, host: int, purpose: Purpose, step: int) -> np.random.Generator:
    """Counter-based generator for one (seed, host, purpose, step) cell.

    The Philox key encodes seed, host and purpose; the step sits in the top
    word of the counter, so streams for different steps never overlap.
    """
    key = np.array([seed & _MASK64, ((host + 1) << 8) | int(Purpose(purpose))], dtype=np.uint64)
    counter = np.array([0, 0, 0, step & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


@dataclass(frozen=True)
class Topology:
    host_count: int
    adjacency: Tuple[Tuple[int, ...], ...]

    def degree(self, host: int) -> int:
        return len(self.adjacency[host])

    def is_connected(self) -> bool:
        return nx.is_connected(self.to_graph()) if self.host_count else True

    def to_graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.host_count))
        g.add_edges_from((u, v) for u, nbrs in enumerate(self.adjacency) for v in nbrs if u < v)
        return g


def build_topology(spec: TopologySpec, seed: int) -> Topology:
    n = spec.hosts
    if spec.kind == "complete":
        g = nx.complete_graph(n)
    elif spec.kind == "ring":
        g = nx.circulant_graph(n, range(1, spec.k + 1))
    elif spec.kind == "erdos_renyi":
        p = spec.mean_degree / (n - 1) if n > 1 else 0.0
        graph_seed = int(rng_substream(seed, -1, Purpose.TOPOLOGY, 0).integers(2**31))
        g = nx.gnp_random_graph(n, p, seed=graph_seed)
    else:
        g = nx.Graph()
        g.add_nodes_from(range(n))
        g.add_edges_from(spec.edges)
    g.remove_edges_from(nx.selfloop_edges(g))
    adjacency = tuple(tuple(sorted(g.neighbors(h))) for h in range(n))
    isolated = [h for h in range(n) if not adjacency[h]]
    if isolated:
        log.warning("topology has %d isolated host(s): %s", len(isolated), isolated[:10])
    return Topology(n, adjacency)


@dataclass
class HostState:
    id: int
    neighbors: Tuple[int, ...]
    tissue: Tissue = field(default_factory=Tissue)
    naive: Dict[Antigen, NaiveTCell] = field(default_factory=dict)
    memory: Set[Antigen] = field(default_factory=set)
    effectors: Dict[Tuple[Antigen, CellType], EffectorTCell] = field(default_factory=dict)
    posture: DefensePosture = field(default_factory=DefensePosture)
    infections: Dict[Antigen, InfectionState] = field(default_factory=dict)
    history: PeerResponseHistory = field(default_factory=PeerResponseHistory)

    def infection(self, antigen: Antigen) -> Optional[InfectionState]:
        return self.infections.get(antigen)

    def status(self, antigen: Antigen) -> Status:
        st = self.infections.get(antigen)
        return Status.SUSCEPTIBLE if st is None else st.status

    def infect(self, antigen: Antigen, step: int) -> None:
        self.infections.setdefault(antigen, InfectionState()).infect(step)

    def cure(self, antigen: Antigen, step: int) -> None:
        st = self.infections.get(antigen)
        if st is not None and st.status is Status.INFECTED:
            st.cure(step)

    def total_clones(self) -> int:
        return sum(e.clones for e in self.effectors.values())


@dataclass
class HostStepResult:
    outbound: List[PeerEffectorMessage]
    trace: List[dict]
    entries: int
    strong: int
    weak: int
    false_positive_strong: int


@dataclass
class WorldState:
    config: RunConfig
    seed: int
    topology: Topology
    hosts: List[HostState]
    step: int = 0
    inflight: List[PeerEffectorMessage] = field(default_factory=list)
    pending: Dict[Antigen, Set[int]] = field(default_factory=dict)
    scheduled: Dict[int, List[Tuple[int, Antigen]]] = field(default_factory=dict)
    metrics: List[StepMetrics] = field(default_factory=list)
    strict: bool = False
    workers: int = 1
    host_order: Optional[Sequence[int]] = None
    trace_sink: Optional[Callable[[List[dict]], None]] = None


def build_world(config: RunConfig, seed: int, *, strict: bool = False, workers: int = 1) -> WorldState:
    topo = build_topology(config.topology, seed)
    hosts = [HostState(h, topo.adjacency[h]) for h in range(topo.host_count)]
    scheduled: Dict[int, List[Tuple[int, Antigen]]] = defaultdict(list)
    for inf in config.initial_infections:
        scheduled[inf.step].append((inf.host, inf.antigen))
    return WorldState(
        config=config,
        seed=seed,
        topology=topo,
        hosts=hosts,
        pending={a: set() for a in config.worm_antigens},
        scheduled=dict(scheduled),
        strict=strict,
        workers=workers,
    )


def _epidemic_phase(world: WorldState, t: int) -> None:
    cfg = world.config
    for host in world.hosts:
        for st in host.infections.values():
            if st.status is Status.INFECTED:
                st.age += 1
    arrivals = {a: set(s) for a, s in world.pending.items()}
    for host_id, antigen in world.scheduled.get(t, ()):
        arrivals[antigen].add(host_id)
    for antigen in sorted(arrivals):
        for h in sorted(arrivals[antigen]):
            if can_infect(world.hosts[h], antigen):
                world.hosts[h].infect(antigen, t)

    streams: Dict[int, np.random.Generator] = {}

    def rng_for(h: int) -> np.random.Generator:
        g = streams.get(h)
        if g is None:
            g = streams[h] = rng_substream(world.seed, h, Purpose.PROPAGATION, t)
        return g

    world.pending = {w.antigen: propagate(world.hosts, w, rng_for) for w in cfg.worms}


def _host_step(world: WorldState, host: HostState, inbox: List[PeerEffectorMessage], t: int) -> HostStepResult:
    cfg = world.config
    dparams = cfg.differentiation
    iparams = cfg.interaction
    cap = dparams.clone_cap

    infected = any(host.status(w.antigen) is Status.INFECTED for w in cfg.worms)
    if not (infected or cfg.benign or inbox or host.effectors or host.naive or host.tissue.events):
        # nothing can happen on this host; only the response history moves
        host.history.shift(0)
        return HostStepResult([], [], 0, 0, 0, 0)

    # emission into tissue
    if infected:
        rng = rng_substream(world.seed, host.id, Purpose.SYMPTOMS, t)
        for worm in cfg.worms:
            host.tissue.deposit(emit_symptoms(host, worm, t, rng))
    if cfg.benign:
        rng = rng_substream(world.seed, host.id, Purpose.BENIGN, t)
        for profile in cfg.benign:
            host.tissue.deposit(emit_benign(host, profile, t, rng))

    # dendritic cells -> naive T cells
    reports = assess_events(collect_tissue(host.tissue, t), cfg.assessment)
    for rep in reports:
        mature(ensure_naive(host.naive, rep.antigen, t, host.memory, dparams), rep)
    reported = {rep.antigen for rep in reports}

    # decay, then differentiation
    host.effectors = {e.key: e for e in decay_effectors(host.effectors.values(), dparams, reported)}
    for antigen in sorted(host.naive):
        new, consumed = differentiate(host.naive[antigen], dparams, t)
        for eff in new:
            merge_effector(host.effectors, eff, cap)
        if consumed:
            del host.naive[antigen]

    # stages 1-4; only effectors backed by fresh DC evidence can grow
    local = [host.effectors[k] for k in sorted(host.effectors)]
    reinforced = [e for e in local if e.antigen in reported]
    selected, remainder = stage1_select(reinforced, iparams.q_local)
    selected += stage2_select(remainder, inbox, iparams.q_peer)
    stage3_update(selected, host.history, iparams, cap)
    peers = merge_peer_messages(inbox, cap)
    peers, _ = stage4_suppress(peers, [e for e in local if e.clones > 0], host.memory, iparams)
    th1_boost_ctl([e for e in local if e.clones > 0 and e.antigen in reported], iparams.th1_fraction, cap)
    host.effectors = {e.key: e for e in local if e.clones > 0}

    # migration and response
    local = [host.effectors[k] for k in sorted(host.effectors)]
    live_peers = [p for p in peers if p.clones > 0]
    rng = rng_substream(world.seed, host.id, Purpose.MIGRATION, t) if local or live_peers else None
    responders, outbound = plan_migration(local, live_peers, host.neighbors, rng, sender=host.id, step=t)
    for eff in responders:
        apply_response(host, eff, t, cfg.responder)

    benign = set(cfg.benign_antigens)
    actions = host.posture.actions_at(t)
    strong = [a for a in actions if a.kind is ResponseKind.STRONG]

    senders = {}
    for m in inbox:
        senders[m.sender] = m.sender_active_responses
    host.history.shift(sum(senders.values()))
    record_clone_history(local)

    trace: List[dict] = []
    if world.trace_sink is not None:
        trace.extend(
            {"event": "response", "step": t, "host": host.id, "kind": a.kind.value, "antigen": a.antigen}
            for a in actions
        )
        trace.extend(m.to_json() for m in outbound)
    return HostStepResult(
        outbound=outbound,
        trace=trace,
        entries=len({e.key for e in local} | {p.key for p in live_peers}),
        strong=len(strong),
        weak=len(actions) - len(strong),
        false_positive_strong=sum(a.antigen in benign for a in strong),
    )


def step(world: WorldState) -> WorldState:
    """Advance the world by one synchronous step."""
    cfg = world.config
    t = world.step
    cap = cfg.differentiation.clone_cap

    inboxes: Dict[int, List[PeerEffectorMessage]] = defaultdict(list)
    for m in world.inflight:
        if world.strict and m.sent_at != t - 1:
            raise InvariantViolation(f"message sent at {m.sent_at} delivered at {t}")
        inboxes[m.receiver].append(m)
    delivered = len(world.inflight)
    world.inflight = []

    _epidemic_phase(world, t)

    results: Dict[int, HostStepResult] = {}
    if cfg.cardinal_enabled:
        order = list(world.host_order) if world.host_order is not None else range(len(world.hosts))
        work = [(world.hosts[h], inboxes.get(h, [])) for h in order]
        if world.workers > 1:
            with ThreadPoolExecutor(max_workers=world.workers) as pool:
                outs = list(pool.map(lambda hw: _host_step(world, hw[0], hw[1], t), work))
        else:
            outs = [_host_step(world, h, inbox, t) for h, inbox in work]
        results = {h.id: r for (h, _), r in zip(work, outs)}

    outbound: List[PeerEffectorMessage] = []
    trace: List[dict] = []
    for h in sorted(results):
        r = results[h]
        outbound.extend(r.outbound)
        trace.extend(r.trace)
        if world.strict:
            bound = r.entries * min(cap, world.topology.degree(h))
            if len(r.outbound) > bound:
                raise InvariantViolation(
                    f"host {h} sent {len(r.outbound)} messages at step {t}, bound {bound}"
                )
    world.inflight = outbound
    if world.trace_sink is not None and trace:
        world.trace_sink(trace)

    row = _collect_metrics(world, t, results, len(outbound))
    if world.strict:
        _check_invariants(world, row, delivered)
    world.metrics.append(row)
    world.step = t + 1
    return world


def _collect_metrics(world: WorldState, t: int, results: Dict[int, HostStepResult], sent: int) -> StepMetrics:
    cfg = world.config
    per_antigen = {}
    for a in cfg.antigens:
        counts = {"susceptible": 0, "infected": 0, "cured": 0, "blocked": 0, "rate_limited": 0}
        for host in world.hosts:
            counts[host.status(a).value] += 1
            counts["blocked"] += a in host.posture.blocked
            counts["rate_limited"] += a in host.posture.rate_limited
        per_antigen[a] = counts
    clones = {ct.value: 0 for ct in CELL_TYPES}
    for host in world.hosts:
        for e in host.effectors.values():
            clones[e.cell_type.value] += e.clones
    return StepMetrics(
        step=t,
        per_antigen=per_antigen,
        strong_responses=sum(r.strong for r in results.values()),
        weak_responses=sum(r.weak for r in results.values()),
        false_positive_strong=sum(r.false_positive_strong for r in results.values()),
        messages_sent=sent,
        clones_by_type=clones,
    )


def _check_invariants(world: WorldState, row: StepMetrics, delivered: int) -> None:
    n = len(world.hosts)
    cap = world.config.differentiation.clone_cap
    for a, c in row.per_antigen.items():
        if c["susceptible"] + c["infected"] + c["cured"] != n:
            raise InvariantViolation(f"state counts for {a} do not sum to {n}: {c}")
    if world.metrics and delivered != world.metrics[-1].messages_sent:
        raise InvariantViolation(
            f"step {row.step}: delivered {delivered}, previous step sent {world.metrics[-1].messages_sent}"
        )
    for host in world.hosts:
        for e in host.effectors.values():
            if not 0 < e.clones <= cap:
                raise InvariantViolation(f"host {host.id} effector {e.key} has {e.clones} clones")
        for naive in host.naive.values():
            if min(naive.activations) < 0:
                raise InvariantViolation(f"negative activation on host {host.id}")
        for a in host.posture.blocked:
            if host.status(a) is Status.INFECTED:
                raise InvariantViolation(f"host {host.id} infected with blocked antigen {a}")


def run(
    config: RunConfig,
    seed: int,
    horizon: Optional[int] = None,
    *,
    strict: bool = False,
    workers: int = 1,
    trace_sink: Optional[Callable[[List[dict]], None]] = None,
) -> WorldState:
    """Build a world and advance it ``horizon`` steps (config horizon by default)."""
    horizon = config.horizon if horizon is None else horizon
    if not isinstance(horizon, int) or horizon < 1:
        raise ValueError(f"horizon must be a positive integer, got {horizon!r}")
    world = build_world(config, seed, strict=strict, workers=workers)
    world.trace_sink = trace_sink
    for _ in range(horizon):
        step(world)
    return world
