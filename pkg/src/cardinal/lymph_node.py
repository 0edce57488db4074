"""Naive T-cell pools, maturation and differentiation into effectors."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Set, Tuple

from .errors import ContractViolation, ParamError
from .periphery import Antigen, DendriticCellReport


class CellType(str, enum.Enum):
    CTL = "CTL"
    TH1 = "Th1"
    TH2 = "Th2"

    def __str__(self) -> str:
        return self.value


CELL_TYPES = (CellType.CTL, CellType.TH1, CellType.TH2)


@dataclass(frozen=True)
class DifferentiationParams:
    theta_ctl: float = 5.0
    theta_th1: float = 5.0
    theta_th2: float = 3.0
    maturation_window: int = 3
    clone_gain: float = 1.0
    clone_cap: int = 32
    memory_factor: float = 0.5
    decay_per_step: int = 1

    def __post_init__(self) -> None:
        for name in ("theta_ctl", "theta_th1", "theta_th2", "clone_gain"):
            if not getattr(self, name) > 0:
                raise ParamError(name, f"must be positive, got {getattr(self, name)}")
        for name in ("maturation_window", "clone_cap", "decay_per_step"):
            v = getattr(self, name)
            if not (isinstance(v, int) and not isinstance(v, bool) and v > 0):
                raise ParamError(name, f"must be a positive integer, got {v!r}")
        # 1.0 is accepted so control runs can switch memory off
        if not 0.0 < self.memory_factor <= 1.0:
            raise ParamError(
                "memory_factor", f"must lie in (0, 1], got {self.memory_factor}"
            )

    @property
    def thresholds(self) -> Tuple[float, float, float]:
        return (self.theta_ctl, self.theta_th1, self.theta_th2)


@dataclass
class NaiveTCell:
    tcr: Antigen
    created_at: int
    thresholds: Tuple[float, float, float]
    a_ctl: float = 0.0
    a_th1: float = 0.0
    a_th2: float = 0.0
    is_memory: bool = False

    @property
    def activations(self) -> Tuple[float, float, float]:
        return (self.a_ctl, self.a_th1, self.a_th2)


@dataclass
class EffectorTCell:
    antigen: Antigen
    cell_type: CellType
    clones: int
    created_at: int = 0
    origin: Optional[int] = None  # None for local cells, else the sending host
    clones_hist: Tuple[int, int] = (0, 0)

    @property
    def is_local(self) -> bool:
        return self.origin is None

    @property
    def key(self) -> Tuple[Antigen, CellType]:
        return (self.antigen, self.cell_type)


NaivePool = Dict[Antigen, NaiveTCell]


def ensure_naive(
    pool: NaivePool,
    antigen: Antigen,
    step: int,
    memory: Set[Antigen],
    params: DifferentiationParams,
) -> NaiveTCell:
    cell = pool.get(antigen)
    if cell is not None:
        return cell
    is_memory = antigen in memory
    thresholds = params.thresholds
    if is_memory:
        thresholds = tuple(t * params.memory_factor for t in thresholds)
    cell = NaiveTCell(antigen, step, thresholds, is_memory=is_memory)
    pool[antigen] = cell
    return cell


def mature(naive: NaiveTCell, report: DendriticCellReport) -> NaiveTCell:
    """Add one DC report's signals to the naive cell's activation values."""
    if report.antigen != naive.tcr:
        raise ContractViolation(
            f"DC presents {report.antigen!r} to naive cell with TCR {naive.tcr!r}"
        )
    naive.a_ctl += report.costim
    naive.a_th1 += report.il12
    naive.a_th2 += report.il4
    return naive


def clone_count(activation: float, threshold: float, params: DifferentiationParams) -> int:
    return min(params.clone_cap, math.ceil(params.clone_gain * (activation - threshold)))


def differentiate(
    naive: NaiveTCell, params: DifferentiationParams, step: int
) -> Tuple[List[EffectorTCell], bool]:
    """Turn a mature naive cell into one effector per exceeded threshold.

    Returns the new local effectors and whether the naive cell was consumed.
    Exceeding is strict: an activation equal to its threshold does nothing.
    """
    if step - naive.created_at < params.maturation_window:
        return [], False
    out = []
    for ctype, a, theta in zip(CELL_TYPES, naive.activations, naive.thresholds):
        if a > theta:
            out.append(
                EffectorTCell(naive.tcr, ctype, clone_count(a, theta, params), created_at=step)
            )
    return out, bool(out)


def decay_effectors(
    effectors: Iterable[EffectorTCell],
    params: DifferentiationParams,
    reported: Set[Antigen],
) -> List[EffectorTCell]:
    """Shrink local effectors whose antigen got no DC report this step.

    Effectors at zero clones are dropped.
    """
    out = []
    for eff in effectors:
        if eff.is_local and eff.antigen not in reported:
            eff.clones = max(0, eff.clones - params.decay_per_step)
        if eff.clones > 0:
            out.append(eff)
    return out


def record_clone_history(effectors: Iterable[EffectorTCell]) -> List[EffectorTCell]:
    effectors = list(effectors)
    for eff in effectors:
        eff.clones_hist = (eff.clones_hist[1], eff.clones)
    return effectors


def merge_effector(
    table: Dict[Tuple[Antigen, CellType], EffectorTCell],
    new: EffectorTCell,
    clone_cap: int,
) -> EffectorTCell:
    """Fold a freshly differentiated effector into a host's local table.

    A host keeps one local effector per (antigen, type); repeated
    differentiation adds clones to it (capped) and keeps its history.
    """
    old = table.get(new.key)
    if old is None:
        table[new.key] = new
        return new
    old.clones = min(clone_cap, old.clones + new.clones)
    return old


def copy_effector(eff: EffectorTCell, **changes) -> EffectorTCell:
    return replace(eff, **changes)
