"""Per-step metrics, run summaries and their CSV / JSON serialisations."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

SCHEMA_VERSION = "cardinal-metrics-v1"
STATE_FIELDS = ("susceptible", "infected", "cured", "blocked", "rate_limited")
CELL_TYPE_NAMES = ("CTL", "Th1", "Th2")


@dataclass
class StepMetrics:
    step: int
    per_antigen: Dict[str, Dict[str, int]]
    strong_responses: int = 0
    weak_responses: int = 0
    false_positive_strong: int = 0
    messages_sent: int = 0
    clones_by_type: Dict[str, int] = field(default_factory=dict)

    @property
    def total_clones(self) -> int:
        return sum(self.clones_by_type.values())


@dataclass
class RunSummary:
    seed: int
    host_count: int
    steps: int
    final_infected_fraction: Dict[str, float]
    final_cured_fraction: Dict[str, float]
    attack_fraction: Dict[str, float]
    peak_infected_fraction: Dict[str, float]
    first_infection_step: Dict[str, Optional[int]]
    first_strong_response_step: Dict[str, Optional[int]]
    time_to_first_strong_response: Dict[str, Optional[int]]
    total_false_positive_strong: int
    total_strong_responses: int
    total_weak_responses: int
    total_messages: int
    quiescence_step: Optional[int]
    groups: Dict[str, Dict[str, Dict[str, Optional[int]]]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def csv_columns(antigens: Sequence[str]) -> List[str]:
    cols = [SCHEMA_VERSION, "step"]
    for a in antigens:
        cols.extend(f"{a}.{s}" for s in STATE_FIELDS)
    cols += ["strong_responses", "weak_responses", "false_positive_strong", "messages_sent"]
    cols += [f"clones_{t}" for t in CELL_TYPE_NAMES]
    return cols


def metrics_rows(series: Sequence[StepMetrics], antigens: Sequence[str]) -> List[list]:
    rows = []
    for m in series:
        row: list = ["", m.step]
        for a in antigens:
            row.extend(m.per_antigen[a][s] for s in STATE_FIELDS)
        row += [m.strong_responses, m.weak_responses, m.false_positive_strong, m.messages_sent]
        row += [m.clones_by_type.get(t, 0) for t in CELL_TYPE_NAMES]
        rows.append(row)
    return rows


def metrics_csv(series: Sequence[StepMetrics], antigens: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(csv_columns(antigens))
    w.writerows(metrics_rows(series, antigens))
    return buf.getvalue()


def write_csv(path: Union[str, Path], series: Sequence[StepMetrics], antigens: Sequence[str]) -> Path:
    path = Path(path)
    path.write_text(metrics_csv(series, antigens), encoding="utf-8")
    return path


def summary_json(summary: RunSummary) -> str:
    return json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n"


def write_summary(path: Union[str, Path], summary: RunSummary) -> Path:
    path = Path(path)
    path.write_text(summary_json(summary), encoding="utf-8")
    return path


def quiescence_step(series: Sequence[StepMetrics]) -> Optional[int]:
    """First step from which total clones stay at zero to the end of the run."""
    if not series:
        return None
    if series[-1].total_clones > 0:
        return None
    q = series[-1].step
    for m in reversed(series):
        if m.total_clones > 0:
            break
        q = m.step
    return q


def summarize(world) -> RunSummary:
    cfg = world.config
    n = len(world.hosts)
    series = world.metrics
    worms = cfg.worm_antigens

    def first_infection(hosts, a):
        steps = [h.infections[a].infected_at for h in hosts if a in h.infections]
        return min(steps) if steps else None

    def first_strong(hosts, a):
        steps = [
            act.applied_at
            for h in hosts
            for act in h.posture.response_log
            if act.antigen == a and act.kind.value == "strong"
        ]
        return min(steps) if steps else None

    def latency(fi, fs):
        return None if fi is None or fs is None else fs - fi

    final = series[-1].per_antigen if series else {}
    fi = {a: first_infection(world.hosts, a) for a in worms}
    fs = {a: first_strong(world.hosts, a) for a in cfg.antigens}
    groups = {}
    for name in sorted(cfg.groups):
        members = [world.hosts[h] for h in cfg.groups[name]]
        groups[name] = {}
        for a in worms:
            g_fi, g_fs = first_infection(members, a), first_strong(members, a)
            groups[name][a] = {
                "first_infection_step": g_fi,
                "first_strong_response_step": g_fs,
                "time_to_first_strong_response": latency(g_fi, g_fs),
            }
    return RunSummary(
        seed=world.seed,
        host_count=n,
        steps=len(series),
        final_infected_fraction={a: final[a]["infected"] / n for a in worms} if series else {},
        final_cured_fraction={a: final[a]["cured"] / n for a in worms} if series else {},
        attack_fraction={a: (final[a]["infected"] + final[a]["cured"]) / n for a in worms} if series else {},
        peak_infected_fraction={
            a: max((m.per_antigen[a]["infected"] for m in series), default=0) / n for a in worms
        },
        first_infection_step=fi,
        first_strong_response_step=fs,
        time_to_first_strong_response={a: latency(fi.get(a), fs[a]) for a in worms},
        total_false_positive_strong=sum(m.false_positive_strong for m in series),
        total_strong_responses=sum(m.strong_responses for m in series),
        total_weak_responses=sum(m.weak_responses for m in series),
        total_messages=sum(m.messages_sent for m in series),
        quiescence_step=quiescence_step(series),
        groups=groups,
    )
