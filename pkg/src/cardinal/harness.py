"""Paired defended/baseline runs and the containment check."""

from __future__ import annotations

import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .config import RunConfig
from .metrics import RunSummary, summarize
from .netsim import run

MEDIAN_RATIO_MAX = 0.5
SEED_RATIO_MAX = 0.7
SEED_PASS_FRACTION = 0.8
SATURATION_MIN = 0.95


@dataclass
class SeedComparison:
    seed: int
    antigen: str
    defended_final: float
    defended_peak: float
    baseline_final: float
    baseline_peak: float
    baseline_attack: float
    false_positive_strong: int
    ratio: Optional[float]


@dataclass
class ComparisonReport:
    seeds: List[int]
    rows: List[SeedComparison]
    median_defended_peak: Dict[str, float] = field(default_factory=dict)
    median_baseline_peak: Dict[str, float] = field(default_factory=dict)
    median_defended_final: Dict[str, float] = field(default_factory=dict)
    median_baseline_final: Dict[str, float] = field(default_factory=dict)
    median_ratio: Dict[str, Optional[float]] = field(default_factory=dict)
    seeds_within_ratio: Dict[str, int] = field(default_factory=dict)
    outcome: Dict[str, str] = field(default_factory=dict)
    false_positive_strong: Dict[int, int] = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        if any(v == "fail" for v in self.outcome.values()):
            return "fail"
        if any(v == "pass" for v in self.outcome.values()):
            return "pass"
        return "no outbreak"

    @property
    def passed(self) -> bool:
        """True unless some worm antigen had an outbreak that was not contained."""
        return self.verdict != "fail"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict
        d["passed"] = self.passed
        return d


def _one(args: Tuple[RunConfig, int, bool]) -> RunSummary:
    cfg, seed, enabled = args
    return summarize(run(cfg.with_overrides(cardinal_enabled=enabled), seed))


def run_pairs(
    config: RunConfig, seeds: Sequence[int], workers: int = 1
) -> List[Tuple[RunSummary, RunSummary]]:
    """(defended, baseline) summaries per seed, in seed order."""
    jobs = [(config, s, arm) for s in seeds for arm in (True, False)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_one, jobs))
    else:
        out = [_one(j) for j in jobs]
    return [(out[2 * i], out[2 * i + 1]) for i in range(len(seeds))]


def compare_runs(config: RunConfig, seeds: Sequence[int], workers: int = 1) -> ComparisonReport:
    """Run every seed with and without the defence and judge containment.

    For each worm antigen the statistic is the peak infected fraction. It
    passes when the defended median is at most half the baseline median,
    the baseline saturates, and enough seeds individually stay within
    ``SEED_RATIO_MAX``. A baseline with no infections is reported as
    ``"no outbreak"`` rather than as a ratio.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("compare_runs needs at least one seed")
    pairs = run_pairs(config, seeds, workers)
    report = ComparisonReport(seeds=seeds, rows=[])
    report.false_positive_strong = {s: d.total_false_positive_strong for s, (d, _) in zip(seeds, pairs)}
    for antigen in config.worm_antigens:
        rows = []
        for seed, (d, b) in zip(seeds, pairs):
            bp = b.peak_infected_fraction[antigen]
            rows.append(SeedComparison(
                seed=seed,
                antigen=antigen,
                defended_final=d.final_infected_fraction[antigen],
                defended_peak=d.peak_infected_fraction[antigen],
                baseline_final=b.final_infected_fraction[antigen],
                baseline_peak=bp,
                baseline_attack=b.attack_fraction[antigen],
                false_positive_strong=d.total_false_positive_strong,
                ratio=d.peak_infected_fraction[antigen] / bp if bp > 0 else None,
            ))
        report.rows.extend(rows)
        med = statistics.median
        dp, bp = med(r.defended_peak for r in rows), med(r.baseline_peak for r in rows)
        report.median_defended_peak[antigen] = dp
        report.median_baseline_peak[antigen] = bp
        report.median_defended_final[antigen] = med(r.defended_final for r in rows)
        report.median_baseline_final[antigen] = med(r.baseline_final for r in rows)
        if bp == 0:
            report.median_ratio[antigen] = None
            report.seeds_within_ratio[antigen] = 0
            report.outcome[antigen] = "no outbreak"
            continue
        report.median_ratio[antigen] = dp / bp
        within = sum(r.ratio is not None and r.ratio <= SEED_RATIO_MAX for r in rows)
        report.seeds_within_ratio[antigen] = within
        ok = (
            dp <= MEDIAN_RATIO_MAX * bp
            and all(r.baseline_attack >= SATURATION_MIN for r in rows)
            and within >= SEED_PASS_FRACTION * len(rows)
        )
        report.outcome[antigen] = "pass" if ok else "fail"
    return report


def group_latency(summary: RunSummary, group: str, antigen: str) -> Optional[int]:
    """Steps from the group's first infection to its first strong response."""
    return summary.groups[group][antigen]["time_to_first_strong_response"]
