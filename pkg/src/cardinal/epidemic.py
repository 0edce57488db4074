"""Worm propagation, per-host infection states and symptom generation."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .errors import ParamError
from .periphery import Antigen, SymptomEvent


class ScanMode(str, enum.Enum):
    RANDOM = "random"
    TOPOLOGY = "topology"


class Status(str, enum.Enum):
    SUSCEPTIBLE = "susceptible"
    INFECTED = "infected"
    CURED = "cured"


def _clamp(x: float) -> float:
    return min(1.0, max(0.0, x))


def _check_range(name: str, rng: Tuple[float, float]) -> Tuple[float, float]:
    lo, hi = (float(v) for v in rng)
    if not 0.0 <= lo <= hi <= 1.0:
        raise ParamError(name, f"must be a sub-interval of [0, 1], got [{lo}, {hi}]")
    return (lo, hi)


@dataclass(frozen=True)
class WormProfile:
    antigen: Antigen
    scan_mode: ScanMode = ScanMode.TOPOLOGY
    attempts_per_step: int = 2
    severity_mean: float = 0.8
    severity_jitter: float = 0.1
    certainty_base: float = 0.3
    certainty_ramp: float = 0.2
    symptoms_per_step: int = 2

    def __post_init__(self) -> None:
        if not self.antigen:
            raise ParamError("antigen", "must be a non-empty string")
        object.__setattr__(self, "scan_mode", ScanMode(self.scan_mode))
        for name in ("attempts_per_step", "symptoms_per_step"):
            v = getattr(self, name)
            if not (isinstance(v, int) and not isinstance(v, bool) and v > 0):
                raise ParamError(name, f"must be a positive integer, got {v!r}")
        if not 0.0 < self.severity_mean <= 1.0:
            raise ParamError("severity_mean", f"must lie in (0, 1], got {self.severity_mean}")
        if not 0.0 <= self.certainty_base <= 1.0:
            raise ParamError("certainty_base", f"must lie in [0, 1], got {self.certainty_base}")
        for name in ("severity_jitter", "certainty_ramp"):
            if getattr(self, name) < 0:
                raise ParamError(name, f"must be non-negative, got {getattr(self, name)}")


@dataclass(frozen=True)
class BenignProfile:
    antigen: Antigen
    event_rate: float = 0.01
    severity_range: Tuple[float, float] = (0.05, 0.45)
    certainty_range: Tuple[float, float] = (0.0, 1.0)

    def __post_init__(self) -> None:
        if not self.antigen:
            raise ParamError("antigen", "must be a non-empty string")
        if not 0.0 <= self.event_rate <= 1.0:
            raise ParamError("event_rate", f"must lie in [0, 1], got {self.event_rate}")
        object.__setattr__(self, "severity_range", _check_range("severity_range", self.severity_range))
        object.__setattr__(self, "certainty_range", _check_range("certainty_range", self.certainty_range))


@dataclass
class InfectionState:
    """One host's state with respect to one antigen.

    Hosts with no entry for an antigen are susceptible to it.
    """

    status: Status = Status.SUSCEPTIBLE
    age: int = 0
    infected_at: Optional[int] = None
    cured_at: Optional[int] = None

    def infect(self, step: int) -> None:
        if self.status is not Status.SUSCEPTIBLE:
            raise ValueError(f"cannot infect a {self.status.value} host")
        self.status, self.age, self.infected_at = Status.INFECTED, 0, step

    def cure(self, step: int) -> None:
        if self.status is not Status.INFECTED:
            raise ValueError(f"cannot cure a {self.status.value} host")
        self.status, self.cured_at = Status.CURED, step


def can_infect(host, antigen: Antigen) -> bool:
    return host.status(antigen) is Status.SUSCEPTIBLE and antigen not in host.posture.blocked


def propagate(
    hosts: Sequence,
    worm: WormProfile,
    rng_for: Callable[[int], np.random.Generator],
) -> Set[int]:
    """One round of infection attempts by every host infected with ``worm``.

    Returns the ids of hosts that become infected at the start of the next
    step. Reads the current states only; nothing is mutated, so the result
    does not depend on which source is evaluated first.
    """
    n = len(hosts)
    hits: Set[int] = set()
    for src in hosts:
        if src.status(worm.antigen) is not Status.INFECTED:
            continue
        pool = src.neighbors if worm.scan_mode is ScanMode.TOPOLOGY else None
        # substreams are independent, so skipping a host that cannot infect
        # anything leaves every other draw unchanged
        if pool is not None and not any(can_infect(hosts[h], worm.antigen) for h in pool):
            continue
        rng = rng_for(src.id)
        src_mult = src.posture.multiplier(worm.antigen)
        for _ in range(worm.attempts_per_step):
            if pool is None:
                tgt = hosts[int(rng.integers(n))]
            else:
                tgt = hosts[pool[int(rng.integers(len(pool)))]]
            u = rng.random()
            if not can_infect(tgt, worm.antigen):
                continue
            if u < src_mult * tgt.posture.multiplier(worm.antigen):
                hits.add(tgt.id)
    return hits


def emit_symptoms(
    host, worm: WormProfile, step: int, rng: np.random.Generator
) -> List[SymptomEvent]:
    state = host.infection(worm.antigen)
    if state is None or state.status is not Status.INFECTED:
        return []
    certainty = _clamp(worm.certainty_base + worm.certainty_ramp * state.age)
    out = []
    for _ in range(worm.symptoms_per_step):
        jitter = rng.uniform(-worm.severity_jitter, worm.severity_jitter)
        out.append(SymptomEvent(worm.antigen, _clamp(worm.severity_mean + jitter), certainty, step))
    return out


def emit_benign(
    host, profile: BenignProfile, step: int, rng: np.random.Generator
) -> List[SymptomEvent]:
    if not rng.random() < profile.event_rate:
        return []
    sev = rng.uniform(*profile.severity_range)
    cert = rng.uniform(*profile.certainty_range)
    return [SymptomEvent(profile.antigen, float(sev), float(cert), step)]
