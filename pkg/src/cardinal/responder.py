"""Strong (CTL) and weak (Th2) responses applied at a host's periphery."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Set

from .errors import ContractViolation, ParamError
from .lymph_node import CellType, EffectorTCell
from .periphery import Antigen


class ResponseKind(str, enum.Enum):
    STRONG = "strong"
    WEAK = "weak"


@dataclass(frozen=True)
class ResponseAction:
    kind: ResponseKind
    antigen: Antigen
    applied_at: int


@dataclass(frozen=True)
class ResponderParams:
    weak_multiplier: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 < self.weak_multiplier <= 1.0:
            raise ParamError(
                "weak_multiplier", f"must lie in (0, 1], got {self.weak_multiplier}"
            )


@dataclass
class DefensePosture:
    blocked: Set[Antigen] = field(default_factory=set)
    rate_limited: Dict[Antigen, float] = field(default_factory=dict)
    response_log: List[ResponseAction] = field(default_factory=list)

    def multiplier(self, antigen: Antigen) -> float:
        if antigen in self.blocked:
            return 0.0
        return self.rate_limited.get(antigen, 1.0)

    def actions_at(self, step: int) -> List[ResponseAction]:
        out = []
        for act in reversed(self.response_log):
            if act.applied_at != step:
                break
            out.append(act)
        out.reverse()
        return out


def apply_response(host, effector: EffectorTCell, step: int, params: ResponderParams) -> DefensePosture:
    """Apply one local effector's response to ``host``.

    ``host`` needs a ``posture`` (DefensePosture) and a ``cure(antigen, step)``
    method. A CTL blocks the antigen and clears an active infection; a Th2
    rate-limits it. Repeating the same action within one step is a no-op.
    """
    if effector.cell_type is CellType.TH1:
        raise ContractViolation("Th1 effectors do not respond at the periphery")
    if not effector.is_local or effector.clones <= 0:
        raise ContractViolation("only local effectors with clones > 0 respond")
    posture = host.posture
    kind = ResponseKind.STRONG if effector.cell_type is CellType.CTL else ResponseKind.WEAK
    if any(a.kind is kind and a.antigen == effector.antigen for a in posture.actions_at(step)):
        return posture
    if kind is ResponseKind.STRONG:
        posture.blocked.add(effector.antigen)
        host.cure(effector.antigen, step)
    else:
        posture.rate_limited[effector.antigen] = params.weak_multiplier
    posture.response_log.append(ResponseAction(kind, effector.antigen, step))
    return posture


def count_active_responses(host, step: int) -> int:
    return len(host.posture.actions_at(step))
