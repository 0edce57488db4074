"""Local/peer effector interaction, growth-rate comparison and migration.

Peer effectors arrive as messages sent one step earlier. Each step a host
runs four stages over them:

1. local effectors with enough clones are selected outright;
2. the rest are selected when enough peers report the same antigen and type;
3. selected effectors grow or shrink depending on whether the outbreak
   (peer response counts) is growing at least as fast as their clones;
4. peer effectors this host has no local counterpart for are suppressed,
   and survivors leave a memory of the antigen behind.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .errors import ParamError
from .lymph_node import CellType, EffectorTCell, copy_effector
from .periphery import Antigen


@dataclass(frozen=True)
class PeerEffectorMessage:
    effector: EffectorTCell
    sender: int
    receiver: int
    sender_active_responses: int
    sent_at: int

    def to_json(self) -> dict:
        return {
            "event": "message",
            "sender": self.sender,
            "receiver": self.receiver,
            "antigen": self.effector.antigen,
            "cell_type": self.effector.cell_type.value,
            "clones": self.effector.clones,
            "sender_active_responses": self.sender_active_responses,
            "sent_at": self.sent_at,
        }


@dataclass
class PeerResponseHistory:
    r_t2: int = 0
    r_t1: int = 0

    def shift(self, observed: int) -> None:
        self.r_t2, self.r_t1 = self.r_t1, observed


@dataclass(frozen=True)
class InteractionParams:
    q_local: int = 4
    q_peer: int = 2
    delta_up: float = 0.5
    delta_down: float = 0.25
    suppress_step: int = 1
    th1_fraction: float = 0.5

    def __post_init__(self) -> None:
        for name in ("q_local", "q_peer", "suppress_step"):
            v = getattr(self, name)
            if not (isinstance(v, int) and not isinstance(v, bool) and v > 0):
                raise ParamError(name, f"must be a positive integer, got {v!r}")
        if not self.delta_up > 0:
            raise ParamError("delta_up", f"must be positive, got {self.delta_up}")
        if not 0.0 < self.delta_down < 1.0:
            raise ParamError("delta_down", f"must lie in (0, 1), got {self.delta_down}")
        if not 0.0 < self.th1_fraction <= 1.0:
            raise ParamError("th1_fraction", f"must lie in (0, 1], got {self.th1_fraction}")


def stage1_select(
    local: Iterable[EffectorTCell], q_local: int
) -> Tuple[List[EffectorTCell], List[EffectorTCell]]:
    selected, remainder = [], []
    for eff in local:
        (selected if eff.clones >= q_local else remainder).append(eff)
    return selected, remainder


def stage2_select(
    remainder: Iterable[EffectorTCell],
    messages: Sequence[PeerEffectorMessage],
    q_peer: int,
) -> List[EffectorTCell]:
    votes = Counter(m.effector.key for m in messages)
    return [eff for eff in remainder if votes[eff.key] >= q_peer]


def estimate_growth(history: PeerResponseHistory, eff: EffectorTCell) -> Tuple[int, int]:
    """(worm growth, clone growth) over the last two steps, as differences."""
    h1, h2 = eff.clones_hist
    return history.r_t1 - history.r_t2, h2 - h1


def stage3_update(
    selected: Iterable[EffectorTCell],
    history: PeerResponseHistory,
    params: InteractionParams,
    clone_cap: int,
) -> List[EffectorTCell]:
    out = []
    for eff in selected:
        g_worm, g_clone = estimate_growth(history, eff)
        if g_worm >= g_clone:
            eff.clones = min(clone_cap, math.ceil(eff.clones * (1 + params.delta_up)))
        else:
            eff.clones = math.floor(eff.clones * (1 - params.delta_down))
        if eff.clones > 0:
            out.append(eff)
    return out


def merge_peer_messages(
    messages: Iterable[PeerEffectorMessage], clone_cap: int
) -> List[EffectorTCell]:
    """Collapse delivered messages into one peer effector per (antigen, type).

    The strongest report wins; the copy's origin is the lowest sender id
    among those carrying that maximum, which keeps the result independent of
    delivery order.
    """
    best: Dict[Tuple[Antigen, CellType], EffectorTCell] = {}
    for m in messages:
        e = m.effector
        cur = best.get(e.key)
        if cur is None or (e.clones, -m.sender) > (cur.clones, -cur.origin):
            best[e.key] = copy_effector(e, origin=m.sender, clones=min(clone_cap, e.clones))
    return [best[k] for k in sorted(best)]


def stage4_suppress(
    peers: Iterable[EffectorTCell],
    local: Iterable[EffectorTCell],
    memory: Set[Antigen],
    params: InteractionParams,
) -> Tuple[List[EffectorTCell], Set[Antigen]]:
    """Suppress peer effectors for antigens this host has not seen locally.

    Any survivor (clones still above zero) registers its antigen in the
    host's memory so the next naive cell for it starts with lower thresholds.
    Peers whose antigen has a local effector of any type pass untouched.
    """
    local_antigens = {e.antigen for e in local}
    out = []
    for p in peers:
        if p.antigen not in local_antigens:
            p.clones = max(0, p.clones - params.suppress_step)
            if p.clones > 0:
                memory.add(p.antigen)
        out.append(p)
    return out, memory


def th1_boost_ctl(
    local: Sequence[EffectorTCell], th1_fraction: float, clone_cap: int
) -> Sequence[EffectorTCell]:
    th1 = {e.antigen: e.clones for e in local if e.cell_type is CellType.TH1}
    for e in local:
        if e.cell_type is CellType.CTL and e.antigen in th1:
            e.clones = min(clone_cap, e.clones + math.floor(th1_fraction * th1[e.antigen]))
    return local


def plan_migration(
    local: Sequence[EffectorTCell],
    peers: Sequence[EffectorTCell],
    neighbors: Sequence[int],
    rng: Optional[np.random.Generator],
    *,
    sender: int,
    step: int,
) -> Tuple[List[EffectorTCell], List[PeerEffectorMessage]]:
    """Split effectors into local responders and outbound peer messages.

    Local CTL and Th2 cells respond at home; Th1 only travels. The host
    sends one advertisement per (antigen, type) entry it holds:

    * a local entry goes out with the local clone count, carried by the
      matching received peer effector if there is one, else by a new copy;
    * a received peer effector with no same-type local entry is forwarded
      with its own clones, capped by the host's strongest local effector
      for that antigen when one exists (so peer traffic never outlives the
      local evidence it is riding on).

    Each advertisement polls min(clones, degree) distinct neighbours drawn
    without replacement.
    """
    responders = [
        e for e in local if e.clones > 0 and e.cell_type in (CellType.CTL, CellType.TH2)
    ]
    n_active = len(responders)
    outbound: List[PeerEffectorMessage] = []
    if not neighbors:
        return responders, outbound

    local_by_key = {e.key: e for e in local if e.clones > 0}
    local_max: Dict[Antigen, int] = {}
    for e in local_by_key.values():
        local_max[e.antigen] = max(local_max.get(e.antigen, 0), e.clones)
    adverts: Dict[Tuple[Antigen, CellType], EffectorTCell] = {}
    for key, e in local_by_key.items():
        adverts[key] = copy_effector(e, origin=sender)
    for p in peers:
        if p.clones <= 0 or p.key in adverts:
            continue
        clones = min(p.clones, local_max.get(p.antigen, p.clones))
        adverts[p.key] = copy_effector(p, origin=sender, clones=clones)

    for key in sorted(adverts):
        payload = adverts[key]
        n = min(payload.clones, len(neighbors))
        picks = rng.choice(len(neighbors), size=n, replace=False)
        for i in picks:
            outbound.append(
                PeerEffectorMessage(payload, sender, neighbors[int(i)], n_active, step)
            )
    return responders, outbound
