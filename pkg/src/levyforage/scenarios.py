"""Scenario descriptions, built-in scenarios and the YAML config format.

Config keys (all others are rejected)::

    name: A2D                      # optional label
    domain: {dimension: 2, min: [-100, -100], max: [100, 100]}
    start: [-100, -100]
    r_d: 5
    law: {mu: 2.0, ell_min: null, ell_max: null}   # null -> r_d / domain diagonal; .inf -> unbounded
    mode: df                       # df | ndf
    drift: [0, 0]
    budget: {distance: null, jumps: null, collections: null}   # or a bare number (distance)
    walker: levy                   # levy | brownian | uniform-random
    boundary: clip                 # clip | reflect | wrap
    world_seed: null               # null -> derived from the run seed
    clusters:
      - {center: [0, 0], radius: 20, count: 1000}
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, Optional

import yaml

from .errors import ConfigError, ParameterError
from .forager import Budget
from .sampler import JumpLaw
from .walkers import WALKER_KINDS, make_walker
from .world import BOUNDARY_POLICIES, DF, NDF, Domain, RewardCluster

TOP_KEYS = {"name", "domain", "start", "r_d", "law", "mode", "drift", "budget", "walker",
            "boundary", "world_seed", "clusters"}
REQUIRED_KEYS = {"domain", "start", "r_d", "clusters"}
DOMAIN_KEYS = {"dimension", "min", "max"}
LAW_KEYS = {"mu", "ell_min", "ell_max"}
BUDGET_KEYS = {"distance", "jumps", "collections"}
CLUSTER_KEYS = {"center", "radius", "count"}

# Radius given to single-point targets; small enough to be a point at any r_d used here.
POINT_RADIUS = 1e-6


@dataclass(frozen=True)
class LawSpec:
    mu: float = 2.0
    ell_min: Optional[float] = None
    ell_max: Optional[float] = None


@dataclass(frozen=True)
class ScenarioSpec:
    domain: Domain
    start: tuple
    clusters: tuple
    r_d: float
    law: LawSpec = LawSpec()
    mode: str = DF
    drift: Optional[tuple] = None
    budget: Budget = Budget()
    walker: str = "levy"
    boundary: str = "clip"
    world_seed: Optional[int] = None
    name: str = "custom"

    def __post_init__(self):
        dim = self.domain.dimension
        if self.drift is None:
            object.__setattr__(self, "drift", (0.0,) * dim)
        self.validate()

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    def validate(self) -> None:
        dim = self.dimension
        if not (isinstance(self.r_d, (int, float)) and self.r_d > 0 and math.isfinite(self.r_d)):
            raise ConfigError(f"r_d: must be a positive number, got {self.r_d}")
        if len(self.start) != dim:
            raise ConfigError("start: wrong dimension")
        if not self.domain.contains(self.start):
            raise ConfigError(f"start: {self.start} lies outside the domain")
        if len(self.drift) != dim:
            raise ConfigError("drift: wrong dimension")
        if math.hypot(*self.drift) >= 1.0:
            raise ConfigError("drift: magnitude must be < 1")
        if self.mode not in (DF, NDF):
            raise ConfigError(f"mode: must be df or ndf, got {self.mode!r}")
        if self.walker not in WALKER_KINDS:
            raise ConfigError(f"walker: must be one of {WALKER_KINDS}, got {self.walker!r}")
        if self.boundary not in BOUNDARY_POLICIES:
            raise ConfigError(f"boundary: must be one of {BOUNDARY_POLICIES}")
        if not self.clusters:
            raise ConfigError("clusters: at least one cluster is required")
        for k, cl in enumerate(self.clusters):
            if len(cl.center) != dim:
                raise ConfigError(f"clusters[{k}].center: wrong dimension")
            if not self.domain.contains(cl.center):
                raise ConfigError(f"clusters[{k}].center: outside the domain")
        try:
            law = self.jump_law()
        except ParameterError as exc:
            raise ConfigError(f"law: {exc}") from None
        if self.walker == "uniform-random" and not law.bounded:
            raise ConfigError("law.ell_max: uniform-random walker needs a bounded ell_max")

    def jump_law(self) -> JumpLaw:
        """Jump law with defaults resolved: ell_min = r_d, ell_max = domain diagonal."""
        lo = self.law.ell_min if self.law.ell_min is not None else self.r_d
        hi = self.law.ell_max if self.law.ell_max is not None else max(self.domain.diagonal, lo)
        return JumpLaw(self.law.mu, lo, hi)

    def make_walker(self):
        return make_walker(self.walker, self.jump_law())

    def effective_budget(self) -> Budget:
        """Budget with the ndf default (100 domain diagonals) filled in."""
        if self.mode == NDF and self.budget.distance is None and self.budget.jumps is None:
            return replace(self.budget, distance=100.0 * self.domain.diagonal)
        return self.budget

    @property
    def total_rewards(self) -> int:
        return sum(cl.count for cl in self.clusters)

    @property
    def drift_vector(self) -> Optional[tuple]:
        return self.drift if any(self.drift) else None

    def configured_lambda(self) -> float:
        """Mean nearest-neighbour spacing among the start and cluster centres.

        Points closer than ``r_d`` are merged first, so a start placed on a
        target does not count as a zero spacing.
        """
        pts: list = []
        for p in (self.start, *(cl.center for cl in self.clusters)):
            if all(math.dist(p, q) > self.r_d for q in pts):
                pts.append(p)
        if len(pts) < 2:
            return math.nan
        return sum(min(math.dist(p, q) for q in pts if q is not p) for p in pts) / len(pts)

    def with_overrides(self, *, mu=None, r_d=None, drift=None, walker=None, mode=None,
                       budget=None) -> "ScenarioSpec":
        changes: dict[str, Any] = {}
        if mu is not None:
            changes["law"] = replace(self.law, mu=float(mu))
        if r_d is not None:
            changes["r_d"] = float(r_d)
        if drift is not None:
            changes["drift"] = tuple(float(x) for x in drift)
        if walker is not None:
            changes["walker"] = walker
        if mode is not None:
            changes["mode"] = mode
        if budget is not None:
            changes["budget"] = budget if isinstance(budget, Budget) else Budget(distance=float(budget))
        return replace(self, **changes) if changes else self


def baseline_walker(kind: str, law: JumpLaw):
    """Brownian (half-normal, mean ell_min) or uniform-random [ell_min, ell_max] policy."""
    if kind not in ("brownian", "uniform-random"):
        raise ParameterError(f"not a baseline walker: {kind!r}")
    return make_walker(kind, law)


# -- built-in scenarios ------------------------------------------------------

def _a2d() -> ScenarioSpec:
    return ScenarioSpec(
        name="A2D",
        domain=Domain.box(100.0, 2),
        start=(-100.0, -100.0),
        clusters=(RewardCluster((0.0, 0.0), 20.0, 1000),),
        r_d=5.0,
    )


def _b2d() -> ScenarioSpec:
    return ScenarioSpec(
        name="B2D",
        domain=Domain.box(100.0, 2),
        start=(-100.0, -100.0),
        clusters=(RewardCluster((-50.0, -10.0), 20.0, 500),
                  RewardCluster((40.0, 50.0), 10.0, 1000)),
        r_d=10.0,
    )


def _c3d() -> ScenarioSpec:
    return ScenarioSpec(
        name="C3D",
        domain=Domain.box(100.0, 3),
        start=(0.0, 0.0, 0.0),
        clusters=(RewardCluster((30.0, 30.0, 0.0), 20.0, 500),
                  RewardCluster((-20.0, -20.0, 0.0), 10.0, 1000),
                  RewardCluster((-50.0, -50.0, 30.0), 35.0, 1500),
                  RewardCluster((65.0, -65.0, 0.0), 10.0, 500)),
        r_d=10.0,
    )


def biased_1d(drift: float = 0.5, half_width: float = 100.0, target: float = 50.0,
              r_d: float = 1.0, mu: float = 2.0) -> ScenarioSpec:
    """Single target on an interval; ``drift`` is the magnitude pointing away from it."""
    away = -math.copysign(1.0, target)
    return ScenarioSpec(
        name="BIASED1D",
        domain=Domain.box(half_width, 1),
        start=(0.0,),
        clusters=(RewardCluster((target,), POINT_RADIUS, 1),),
        r_d=r_d,
        law=LawSpec(mu=mu),
        drift=(away * drift,),
        budget=Budget(distance=100.0 * 2.0 * half_width),
    )


def sparse_ndf_1d(ratio: float = 100.0, r_d: float = 1.0, mu: float = 2.0,
                  budget_gaps: float = 800.0) -> ScenarioSpec:
    """Revisitable point targets spaced ``lambda = ratio * r_d`` apart on a line.

    The interval spans one gap with a target on each wall and reflecting
    walls, which by mirror symmetry is the same as an infinite lattice.
    The forager starts on a target; the distance budget is ``budget_gaps``
    gaps.
    """
    lam = ratio * r_d
    return ScenarioSpec(
        name="SPARSE1D",
        domain=Domain((0.0,), (lam,)),
        start=(0.0,),
        clusters=(RewardCluster((0.0,), POINT_RADIUS, 1), RewardCluster((lam,), POINT_RADIUS, 1)),
        r_d=r_d,
        law=LawSpec(mu=mu, ell_max=math.inf),
        mode=NDF,
        boundary="reflect",
        budget=Budget(distance=budget_gaps * lam),
    )


def scaling_1d(ratio: float, r_d: float = 1.0, mu: float = 2.0) -> ScenarioSpec:
    """Forager midway between two targets ``lambda = ratio * r_d`` away; stops at the first."""
    lam = ratio * r_d
    return ScenarioSpec(
        name=f"SCALING1D-{ratio:g}",
        domain=Domain((-lam,), (lam,)),
        start=(0.0,),
        clusters=(RewardCluster((-lam,), POINT_RADIUS, 1), RewardCluster((lam,), POINT_RADIUS, 1)),
        r_d=r_d,
        law=LawSpec(mu=mu),
        budget=Budget(collections=1),
    )


BUILTINS = {
    "A2D": _a2d,
    "B2D": _b2d,
    "C3D": _c3d,
    "BIASED1D": biased_1d,
}


def builtin(name: str) -> ScenarioSpec:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; choose from {sorted(BUILTINS)}") from None


# -- config file -------------------------------------------------------------

def _line_index(node, path=(), out=None) -> dict:
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            p = path + (k.value,)
            out[p] = k.start_mark.line + 1
            _line_index(v, p, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            p = path + (i,)
            out[p] = v.start_mark.line + 1
            _line_index(v, p, out)
    return out


class _Reader:
    def __init__(self, lines: dict):
        self.lines = lines

    def fail(self, path, msg):
        name = ".".join(f"[{p}]" if isinstance(p, int) else str(p) for p in path).replace(".[", "[")
        line = None
        for n in range(len(path), 0, -1):
            line = self.lines.get(tuple(path[:n]))
            if line is not None:
                break
        where = f"line {line}: " if line is not None else ""
        raise ConfigError(f"{where}{name or '<root>'}: {msg}")

    def mapping(self, obj, path, allowed, required=()):
        if not isinstance(obj, dict):
            self.fail(path, "expected a mapping")
        for k in obj:
            if k not in allowed:
                self.fail(path + (k,), "unknown key")
        for k in required:
            if k not in obj:
                self.fail(path + (k,), "missing required key")
        return obj

    def number(self, obj, path, *, positive=False, integer=False, optional=False):
        if obj is None and optional:
            return None
        if isinstance(obj, bool) or not isinstance(obj, (int, float)):
            self.fail(path, f"expected a number, got {obj!r}")
        if integer and int(obj) != obj:
            self.fail(path, f"expected an integer, got {obj!r}")
        if math.isnan(obj):
            self.fail(path, "NaN is not allowed")
        if positive and not obj > 0:
            self.fail(path, f"out of range: must be > 0, got {obj!r}")
        return int(obj) if integer else float(obj)

    def vector(self, obj, path, dim):
        if not isinstance(obj, list) or len(obj) != dim:
            self.fail(path, f"expected a list of {dim} numbers")
        return tuple(self.number(x, path + (i,)) for i, x in enumerate(obj))

    def choice(self, obj, path, options):
        if obj not in options:
            self.fail(path, f"must be one of {list(options)}, got {obj!r}")
        return obj


def load_spec(text: str) -> ScenarioSpec:
    """Parse and validate a YAML scenario description."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        line = f"line {mark.line + 1}: " if mark is not None else ""
        raise ConfigError(f"{line}malformed YAML: {exc.problem}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML: {exc}") from None
    r = _Reader(_line_index(root) if root is not None else {})
    r.mapping(data, (), TOP_KEYS, REQUIRED_KEYS)

    dom = r.mapping(data["domain"], ("domain",), DOMAIN_KEYS, DOMAIN_KEYS)
    dim = r.number(dom["dimension"], ("domain", "dimension"), integer=True)
    if dim not in (1, 2, 3):
        r.fail(("domain", "dimension"), f"out of range: must be 1, 2 or 3, got {dim}")
    lower = r.vector(dom["min"], ("domain", "min"), dim)
    upper = r.vector(dom["max"], ("domain", "max"), dim)
    try:
        domain = Domain(lower, upper)
    except ConfigError as exc:
        r.fail(("domain",), str(exc))

    start = r.vector(data["start"], ("start",), dim)
    if not domain.contains(start):
        r.fail(("start",), f"{start} lies outside the domain")
    r_d = r.number(data["r_d"], ("r_d",), positive=True)

    law_raw = r.mapping(data.get("law", {}) or {}, ("law",), LAW_KEYS)
    law = LawSpec(
        mu=r.number(law_raw.get("mu", 2.0), ("law", "mu")),
        ell_min=r.number(law_raw.get("ell_min"), ("law", "ell_min"), positive=True, optional=True),
        ell_max=r.number(law_raw.get("ell_max"), ("law", "ell_max"), positive=True, optional=True),
    )
    if not 1.0 < law.mu <= 3.0:
        r.fail(("law", "mu"), f"out of range: must satisfy 1 < mu <= 3, got {law.mu}")

    mode = r.choice(data.get("mode", DF), ("mode",), (DF, NDF))
    drift = data.get("drift")
    drift = r.vector(drift, ("drift",), dim) if drift is not None else (0.0,) * dim
    if math.hypot(*drift) >= 1.0:
        r.fail(("drift",), "out of range: magnitude must be < 1")

    b = data.get("budget")
    if b is None:
        budget = Budget()
    elif isinstance(b, dict):
        r.mapping(b, ("budget",), BUDGET_KEYS)
        budget = Budget(
            distance=r.number(b.get("distance"), ("budget", "distance"), positive=True, optional=True),
            jumps=r.number(b.get("jumps"), ("budget", "jumps"), positive=True, integer=True, optional=True),
            collections=r.number(b.get("collections"), ("budget", "collections"), positive=True,
                                 integer=True, optional=True),
        )
    else:
        budget = Budget(distance=r.number(b, ("budget",), positive=True))

    walker = r.choice(data.get("walker", "levy"), ("walker",), WALKER_KINDS)
    boundary = r.choice(data.get("boundary", "clip"), ("boundary",), BOUNDARY_POLICIES)
    ws = data.get("world_seed")
    world_seed = None if ws is None else r.number(ws, ("world_seed",), integer=True)
    if world_seed is not None and world_seed < 0:
        r.fail(("world_seed",), "out of range: must be >= 0")

    raw_clusters = data["clusters"]
    if not isinstance(raw_clusters, list) or not raw_clusters:
        r.fail(("clusters",), "expected a non-empty list")
    clusters = []
    for k, c in enumerate(raw_clusters):
        p = ("clusters", k)
        r.mapping(c, p, CLUSTER_KEYS, CLUSTER_KEYS)
        center = r.vector(c["center"], p + ("center",), dim)
        if not domain.contains(center):
            r.fail(p + ("center",), f"{center} lies outside the domain")
        clusters.append(RewardCluster(center, r.number(c["radius"], p + ("radius",), positive=True),
                                      r.number(c["count"], p + ("count",), positive=True, integer=True)))

    name = data.get("name", "custom")
    if not isinstance(name, str):
        r.fail(("name",), "expected a string")
    try:
        return ScenarioSpec(domain=domain, start=start, clusters=tuple(clusters), r_d=r_d, law=law,
                            mode=mode, drift=drift, budget=budget, walker=walker, boundary=boundary,
                            world_seed=world_seed, name=name)
    except ConfigError as exc:
        key = str(exc).split(":", 1)[0]
        r.fail(tuple(key.split(".")), str(exc).split(":", 1)[-1].strip())


def _num(x):
    return float(x) if x is not None else None


def spec_to_dict(spec: ScenarioSpec) -> dict:
    b = spec.budget
    return {
        "name": spec.name,
        "domain": {"dimension": spec.dimension, "min": list(spec.domain.lower),
                   "max": list(spec.domain.upper)},
        "start": list(spec.start),
        "r_d": float(spec.r_d),
        "law": {"mu": float(spec.law.mu), "ell_min": _num(spec.law.ell_min),
                "ell_max": _num(spec.law.ell_max)},
        "mode": spec.mode,
        "drift": list(spec.drift),
        "budget": {"distance": _num(b.distance), "jumps": b.jumps, "collections": b.collections},
        "walker": spec.walker,
        "boundary": spec.boundary,
        "world_seed": spec.world_seed,
        "clusters": [{"center": list(c.center), "radius": float(c.radius), "count": int(c.count)}
                     for c in spec.clusters],
    }


def dump_spec(spec: ScenarioSpec) -> str:
    return yaml.safe_dump(spec_to_dict(spec), sort_keys=False, default_flow_style=None)


def load_spec_file(path) -> ScenarioSpec:
    from pathlib import Path

    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc.strerror}") from None
    return load_spec(text)
