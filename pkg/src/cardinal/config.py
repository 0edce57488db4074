"""Run configuration: JSON schema, defaults and strict validation."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Type, TypeVar, Union

from .epidemic import BenignProfile, WormProfile
from .errors import ConfigError, ParamError
from .lymph_node import DifferentiationParams
from .peer_interaction import InteractionParams
from .periphery import AssessmentParams
from .responder import ResponderParams

TOPOLOGY_KINDS = ("erdos_renyi", "ring", "complete", "edge_list")


@dataclass(frozen=True)
class TopologySpec:
    kind: str
    hosts: int
    mean_degree: Optional[float] = None
    k: Optional[int] = None
    edges: Optional[Tuple[Tuple[int, int], ...]] = None

    def __post_init__(self) -> None:
        if self.kind not in TOPOLOGY_KINDS:
            raise ParamError("kind", f"unknown topology {self.kind!r}; expected one of {TOPOLOGY_KINDS}")
        if not (isinstance(self.hosts, int) and not isinstance(self.hosts, bool) and self.hosts > 0):
            raise ParamError("hosts", f"must be a positive integer, got {self.hosts!r}")
        if self.kind == "erdos_renyi":
            if self.mean_degree is None or not 0 <= self.mean_degree <= max(0, self.hosts - 1):
                raise ParamError("mean_degree", f"must lie in [0, hosts-1], got {self.mean_degree}")
        if self.kind == "ring":
            if not isinstance(self.k, int) or self.k < 1 or 2 * self.k >= self.hosts:
                raise ParamError("k", f"need 1 <= k and 2k < hosts, got k={self.k}")
        if self.kind == "edge_list":
            if self.edges is None:
                raise ParamError("edges", "required for an edge_list topology")
            edges = []
            for i, e in enumerate(self.edges):
                if len(e) != 2:
                    raise ParamError(f"edges[{i}]", "each edge is a pair of host ids")
                u, v = (int(x) for x in e)
                if u == v or not (0 <= u < self.hosts and 0 <= v < self.hosts):
                    raise ParamError(f"edges[{i}]", f"invalid edge ({u}, {v})")
                edges.append((u, v))
            object.__setattr__(self, "edges", tuple(edges))


@dataclass(frozen=True)
class InitialInfection:
    host: int
    antigen: str
    step: int = 0


@dataclass(frozen=True)
class RunConfig:
    topology: TopologySpec
    worms: Tuple[WormProfile, ...] = ()
    benign: Tuple[BenignProfile, ...] = ()
    assessment: AssessmentParams = AssessmentParams()
    differentiation: DifferentiationParams = DifferentiationParams()
    interaction: InteractionParams = InteractionParams()
    responder: ResponderParams = ResponderParams()
    cardinal_enabled: bool = True
    initial_infections: Tuple[InitialInfection, ...] = ()
    horizon: int = 150
    groups: Mapping[str, Tuple[int, ...]] = field(default_factory=dict)

    @property
    def worm_antigens(self) -> List[str]:
        return [w.antigen for w in self.worms]

    @property
    def benign_antigens(self) -> List[str]:
        return [b.antigen for b in self.benign]

    @property
    def antigens(self) -> List[str]:
        return sorted(self.worm_antigens + self.benign_antigens)

    def with_overrides(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


P = TypeVar("P")


def _build(cls: Type[P], data: Any, path: str, *, required: Tuple[str, ...] = (), convert=None) -> P:
    if not isinstance(data, dict):
        raise ConfigError(path, f"expected an object, got {type(data).__name__}")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}" if path else unknown[0], "unknown key")
    for r in required:
        if r not in data:
            raise ConfigError(f"{path}.{r}" if path else r, "required key missing")
    kwargs = dict(data)
    if convert:
        kwargs = convert(kwargs)
    try:
        return cls(**kwargs)
    except ParamError as exc:
        raise ConfigError(f"{path}.{exc.field}" if path else exc.field, exc.message) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from None


def _tuple_ranges(d: dict) -> dict:
    for key in ("severity_range", "certainty_range"):
        if key in d:
            d[key] = tuple(d[key])
    return d


def config_from_dict(data: Any) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("", "config must be a JSON object")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    if "topology" not in data:
        raise ConfigError("topology", "required key missing")

    topo = _build(TopologySpec, data["topology"], "topology", required=("kind", "hosts"))
    worms = tuple(
        _build(WormProfile, w, f"worms[{i}]", required=("antigen",))
        for i, w in enumerate(_list(data, "worms"))
    )
    benign = tuple(
        _build(BenignProfile, b, f"benign[{i}]", required=("antigen",), convert=_tuple_ranges)
        for i, b in enumerate(_list(data, "benign"))
    )
    sections = {
        "assessment": AssessmentParams,
        "differentiation": DifferentiationParams,
        "interaction": InteractionParams,
        "responder": ResponderParams,
    }
    params = {name: _build(cls, data.get(name, {}), name) for name, cls in sections.items()}

    worm_ids = [w.antigen for w in worms]
    benign_ids = [b.antigen for b in benign]
    seen = set()
    for i, a in enumerate(worm_ids + benign_ids):
        if a in seen:
            where = f"worms[{i}]" if i < len(worm_ids) else f"benign[{i - len(worm_ids)}]"
            raise ConfigError(f"{where}.antigen", f"antigen {a!r} used by more than one profile")
        seen.add(a)

    infections = tuple(
        _build(InitialInfection, x, f"initial_infections[{i}]", required=("host", "antigen"))
        for i, x in enumerate(_list(data, "initial_infections"))
    )
    for i, inf in enumerate(infections):
        p = f"initial_infections[{i}]"
        if not (isinstance(inf.host, int) and 0 <= inf.host < topo.hosts):
            raise ConfigError(f"{p}.host", f"no host {inf.host!r} in a {topo.hosts}-host topology")
        if inf.antigen not in worm_ids:
            raise ConfigError(f"{p}.antigen", f"{inf.antigen!r} is not a worm antigen")
        if not (isinstance(inf.step, int) and inf.step >= 0):
            raise ConfigError(f"{p}.step", f"must be a non-negative integer, got {inf.step!r}")

    horizon = data.get("horizon", 150)
    if not (isinstance(horizon, int) and not isinstance(horizon, bool) and horizon >= 1):
        raise ConfigError("horizon", f"must be a positive integer, got {horizon!r}")
    enabled = data.get("cardinal_enabled", True)
    if not isinstance(enabled, bool):
        raise ConfigError("cardinal_enabled", "must be true or false")

    groups_raw = data.get("groups", {})
    if not isinstance(groups_raw, dict):
        raise ConfigError("groups", "expected an object mapping names to host lists")
    groups = {}
    for name, members in groups_raw.items():
        if not isinstance(members, list) or not all(
            isinstance(h, int) and 0 <= h < topo.hosts for h in members
        ):
            raise ConfigError(f"groups.{name}", "must be a list of valid host ids")
        groups[name] = tuple(members)

    return RunConfig(
        topology=topo,
        worms=worms,
        benign=benign,
        cardinal_enabled=enabled,
        initial_infections=infections,
        horizon=horizon,
        groups=groups,
        **params,
    )


def _list(data: dict, key: str) -> list:
    v = data.get(key, [])
    if not isinstance(v, list):
        raise ConfigError(key, "expected a list")
    return v


def parse_config(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from None
    return config_from_dict(data)


def load_config(path: Union[str, Path]) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def config_to_dict(cfg: RunConfig) -> Dict[str, Any]:
    """Plain-JSON view of a config, defaults included."""

    def plain(obj):
        if dataclasses.is_dataclass(obj):
            return {f.name: plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                    if getattr(obj, f.name) is not None}
        if isinstance(obj, (list, tuple)):
            return [plain(x) for x in obj]
        if isinstance(obj, Mapping):
            return {k: plain(v) for k, v in obj.items()}
        if hasattr(obj, "value"):
            return obj.value
        return obj

    return plain(cfg)
