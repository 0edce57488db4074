"""Artificial tissue and dendritic cells.

Symptom events land in a host's tissue buffer during a step. The dendritic
cells collect them and fold each antigen's events into a single report made
of three signal channels: costimulation (severe and certain), IL-12 (severe
but uncertain) and IL-4 (mild, certainty ignored).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List

from .errors import ParamError

Antigen = str


@dataclass(frozen=True)
class SymptomEvent:
    antigen: Antigen
    severity: float
    certainty: float
    emitted_at: int

    def __post_init__(self) -> None:
        if not self.antigen:
            raise ValueError("symptom event needs a non-empty antigen")
        if self.emitted_at < 0:
            raise ValueError(f"negative step index {self.emitted_at}")


@dataclass
class DendriticCellReport:
    antigen: Antigen
    costim: float = 0.0
    il12: float = 0.0
    il4: float = 0.0
    step: int = 0


@dataclass(frozen=True)
class AssessmentParams:
    severity_hi: float = 0.5
    certainty_hi: float = 0.7
    w_costim: float = 1.0
    w_il12: float = 1.0
    w_il4: float = 1.0

    def __post_init__(self) -> None:
        for name in ("severity_hi", "certainty_hi"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ParamError(name, f"must lie strictly inside (0, 1), got {v}")
        for name in ("w_costim", "w_il12", "w_il4"):
            v = getattr(self, name)
            if not v > 0:
                raise ParamError(name, f"must be positive, got {v}")


class InvalidSymptomError(ValueError):
    """A symptom event carries a severity or certainty outside [0, 1]."""

    def __init__(self, index: int, event: SymptomEvent):
        super().__init__(
            f"event #{index} for antigen {event.antigen!r} has severity="
            f"{event.severity} certainty={event.certainty}; both must be in [0, 1]"
        )
        self.index = index
        self.event = event


def assess_events(
    events: Iterable[SymptomEvent], params: AssessmentParams
) -> List[DendriticCellReport]:
    """Fold one host-step of symptom events into per-antigen DC reports.

    Reports come back sorted by antigen so the output does not depend on
    the order the events arrived in.
    """
    events = list(events)
    if not events:
        return []
    step = events[0].emitted_at
    reports: dict[Antigen, DendriticCellReport] = {}
    for i, ev in enumerate(events):
        if not (0.0 <= ev.severity <= 1.0 and 0.0 <= ev.certainty <= 1.0):
            raise InvalidSymptomError(i, ev)
        if ev.emitted_at != step:
            raise ValueError(
                f"events span several steps ({step} and {ev.emitted_at})"
            )
        rep = reports.get(ev.antigen)
        if rep is None:
            rep = reports[ev.antigen] = DendriticCellReport(ev.antigen, step=step)
        if ev.severity >= params.severity_hi:
            if ev.certainty >= params.certainty_hi:
                rep.costim += params.w_costim
            else:
                rep.il12 += params.w_il12
        else:
            # mild attacks: certainty deliberately not consulted
            rep.il4 += params.w_il4
    return [reports[a] for a in sorted(reports)]


@dataclass
class Tissue:
    """Per-host buffer of symptom events awaiting DC collection."""

    events: List[SymptomEvent] = field(default_factory=list)

    def deposit(self, events: Iterable[SymptomEvent]) -> None:
        self.events.extend(events)

    def __len__(self) -> int:
        return len(self.events)


def collect_tissue(tissue: Tissue, step: int) -> List[SymptomEvent]:
    """Drain the tissue buffer; clear-on-read."""
    out = tissue.events
    tissue.events = []
    for ev in out:
        if ev.emitted_at != step:
            raise ValueError(f"stale event from step {ev.emitted_at} collected at {step}")
    return out
