"""Two-mode search automaton.

Mode A flies Lévy jumps and watches the whole flight path for rewards;
entering any reward's detection ball ends the flight there and switches to
mode B. Mode B repeatedly walks to a uniformly chosen reward in range and
collects it, then hands back to mode A once nothing is in range.

Under non-destructive foraging a collected reward stays in the field, so the
forager keeps the rewards of its current patch "dormant" (ignored) until it
has flown out of their detection ball. This is the forager leaving a patch
it is done with; otherwise mode B would never end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .errors import LogicError, ParameterError
from .rng import SeededRng
from .sampler import sample_direction
from .trace import (A_TO_B, B_TO_A, CLIP, COLLECTION, DETECTION, JUMP, MODE_SWITCH, Trace,
                    TraceEvent)
from .world import DF, NDF, MAX_PIECES, Domain, RewardField, _clamp, _exit_distance, _turn

MODE_A = "A"
MODE_B = "B"


@dataclass(frozen=True)
class Budget:
    """Termination limits; ``None`` means unlimited."""

    distance: Optional[float] = None
    jumps: Optional[int] = None
    collections: Optional[int] = None

    def __post_init__(self):
        for name in ("distance", "jumps", "collections"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ParameterError(f"budget.{name} must be positive, got {v}")

    @property
    def unlimited(self) -> bool:
        return self.distance is None and self.jumps is None and self.collections is None


@dataclass
class ForagerState:
    position: tuple
    mode: str = MODE_A
    jumps: int = 0
    distance: float = 0.0
    collections: int = 0
    dormant: set = field(default_factory=set)


class StepOutcome(NamedTuple):
    events: list
    terminal: bool


def apply_drift(direction, length: float, drift):
    """Displace a commanded flight by a drift proportional to path length.

    The flight that was commanded as ``length * direction`` is carried to
    ``length * (direction + drift)``; returns that as a unit direction and a
    length. ``|drift|`` must stay below 1 so the flight keeps moving forward
    in the commanded half-space. Zero drift returns the inputs unchanged.
    """
    if drift is None:
        return direction, length
    m2 = sum(v * v for v in drift)
    if m2 >= 1.0:
        raise ParameterError(f"drift magnitude must be < 1, got {math.sqrt(m2)}")
    if m2 == 0.0:
        return direction, length
    v = [a + b for a, b in zip(direction, drift)]
    n = math.sqrt(sum(x * x for x in v))
    return tuple(x / n for x in v), length * n


class Forager:
    """Runs the automaton over one reward field, recording a :class:`Trace`."""

    def __init__(self, field: RewardField, walker, rng: SeededRng, start, *,
                 drift=None, boundary: str = "clip", budget: Budget = Budget(),
                 trace_meta: Optional[dict] = None, cluster_sizes: tuple = ()):
        self.field = field
        self.domain: Domain = field.domain
        self.dim = self.domain.dimension
        start = tuple(float(x) for x in start)
        if len(start) != self.dim or not self.domain.contains(start):
            raise ParameterError(f"start {start} is not inside the domain")
        if drift is not None:
            drift = tuple(float(x) for x in drift)
            if len(drift) != self.dim:
                raise ParameterError("drift has wrong dimension")
            apply_drift((1.0,) + (0.0,) * (self.dim - 1), 1.0, drift)
            if not any(drift):
                drift = None
        if boundary not in ("clip", "reflect", "wrap"):
            raise ParameterError(f"unknown boundary policy {boundary!r}")
        if budget.unlimited and (field.mode == NDF or len(field) == 0):
            raise ParameterError("a budget is required when the field can never be depleted")
        self.walker = walker
        self.rng = rng
        self.drift = drift
        self.boundary = boundary
        self.budget = budget
        self.state = ForagerState(start)
        self.trace = Trace(self.dim, start, tuple(cluster_sizes), [], dict(trace_meta or {}))
        self._guard_pending = True
        self._lower, self._upper = self.domain.lower, self.domain.upper

    def _terminal(self) -> bool:
        st, b, f = self.state, self.budget, self.field
        if f.mode == DF and len(f) and f.remaining == 0:
            return True
        if b.distance is not None and st.distance >= b.distance:
            return True
        if b.jumps is not None and st.jumps >= b.jumps:
            return True
        if b.collections is not None and st.collections >= b.collections:
            return True
        return False

    def step(self) -> StepOutcome:
        events = self._step_a() if self.state.mode == MODE_A else self._step_b()
        self.trace.events.extend(events)
        return StepOutcome(events, self._terminal())

    def run(self) -> Trace:
        if self._terminal():
            return self.trace
        extend = self.trace.events.extend
        while True:
            extend(self._phase_a() if self.state.mode == MODE_A else self._step_b())
            if self._terminal():
                return self.trace

    def _switch_to_b(self, events, reward_id):
        st = self.state
        events.append(TraceEvent(DETECTION, st.distance, st.position, reward_id))
        events.append(TraceEvent(MODE_SWITCH, st.distance, st.position, A_TO_B))
        st.mode = MODE_B

    def _release_dormant(self, pos):
        st, pts, r, dist = self.state, self.field.points, self.field.r_point, math.dist
        st.dormant = {i for i in st.dormant if dist(pts[i], pos) <= r}

    def _guard(self, events) -> bool:
        # Flights check their own endpoints, so only the very first step can
        # start with a reward already in range.
        self._guard_pending = False
        st = self.state
        ids = self.field.detect(st.position, st.dormant)
        if ids:
            self._switch_to_b(events, ids[0])
            return True
        return False

    def _step_a(self) -> list:
        events: list = []
        if not (self._guard_pending and self._guard(events)):
            self._flight(events)
        return events

    def _phase_a(self) -> list:
        """Mode-A flights until a detection or the distance/jump budget runs out."""
        events: list = []
        if self._guard_pending and self._guard(events):
            return events
        st, b, flight = self.state, self.budget, self._flight
        dmax = math.inf if b.distance is None else b.distance
        jmax = math.inf if b.jumps is None else b.jumps
        while not flight(events) and st.distance < dmax and st.jumps < jmax:
            pass
        return events

    def _flight(self, events) -> bool:
        """One mode-A flight; returns whether it ended in a detection."""
        st, f, rng = self.state, self.field, self.rng
        dim = self.dim
        if dim == 1:
            direction = (1.0,) if rng.uniform() < 0.5 else (-1.0,)
        else:
            direction = sample_direction(dim, rng)
        commanded = self.walker.draw(rng)
        st.jumps += 1
        if self.drift is None:
            d, length = direction, commanded
        else:
            d, length = apply_drift(direction, commanded, self.drift)
        if self.budget.distance is not None:
            length = min(length, self.budget.distance - st.distance)
        lower, upper, policy = self._lower, self._upper, self.boundary
        p, remaining, flown = st.position, length, 0.0
        for _ in range(MAX_PIECES):
            t = _exit_distance(lower, upper, p, d)
            plen = remaining if remaining < t else t
            hit = f.first_hit(p, d, plen, st.dormant)
            if hit is not None:
                rid, s = hit
                pos = _clamp(tuple(x + s * v for x, v in zip(p, d)), lower, upper)
                st.position = pos
                st.distance += flown + s
                if st.dormant:
                    self._release_dormant(pos)
                events.append(TraceEvent(JUMP, st.distance, pos, commanded))
                self._switch_to_b(events, rid)
                return True
            flown += plen
            if plen < t:
                p = tuple(x + plen * v for x, v in zip(p, d))
                break
            p = _clamp(tuple(x + plen * v for x, v in zip(p, d)), lower, upper)
            if policy == "clip" or plen == remaining:
                break
            remaining -= plen
            p, d = _turn(p, d, lower, upper, policy)
        else:
            raise LogicError("boundary path did not terminate")
        if st.dormant:
            self._release_dormant(p)
        st.position = p
        st.distance += flown
        events.append(TraceEvent(JUMP, st.distance, p, commanded))
        if policy == "clip" and flown < length:
            events.append(TraceEvent(CLIP, st.distance, p, length - flown))
        return False

    def _step_b(self) -> list:
        st, f = self.state, self.field
        ids = f.detect(st.position, st.dormant)
        if not ids:
            st.mode = MODE_A
            return [TraceEvent(MODE_SWITCH, st.distance, st.position, B_TO_A)]
        rid = ids[self.rng.integer(len(ids))]
        q = f.points[rid]
        st.distance += math.dist(st.position, q)
        st.position = q
        if f.mode == DF and f.collected[rid]:
            raise LogicError(f"reward {rid} offered for collection twice")
        f.collect(rid)
        if f.mode == NDF:
            st.dormant.add(rid)
        st.collections += 1
        return [TraceEvent(COLLECTION, st.distance, q, rid)]
