"""Configuration space, clustered rewards and detection queries.

Detection uses a closed ball: a reward at distance exactly ``r_d`` is in
range. Point queries allow a relative slack of ``DETECT_SLACK`` on the squared
radius so that a flight stopped on a ball's surface by a segment query
always reads that reward as in range despite rounding. Rewards are indexed in a uniform grid of cell size ``r_d`` so radius
queries only touch the 3**d neighbourhood of the query cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigError, LogicError, ParameterError
from .rng import SeededRng
from .sampler import sample_direction

Vec = tuple[float, ...]

DF = "df"
NDF = "ndf"
BOUNDARY_POLICIES = ("clip", "reflect", "wrap")
DETECT_SLACK = 1e-9


@dataclass(frozen=True)
class Domain:
    lower: Vec
    upper: Vec

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise ConfigError("domain corners differ in dimension")
        if len(self.lower) not in (1, 2, 3):
            raise ConfigError(f"unsupported dimension {len(self.lower)}")
        if not all(u > lo for lo, u in zip(self.lower, self.upper)):
            raise ConfigError("domain upper corner must exceed lower corner componentwise")

    @classmethod
    def box(cls, half_width: float, dimension: int) -> "Domain":
        return cls((-half_width,) * dimension, (half_width,) * dimension)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def diagonal(self) -> float:
        return math.dist(self.lower, self.upper)

    def contains(self, p: Sequence[float], tol: float = 0.0) -> bool:
        return all(lo - tol <= x <= hi + tol for x, lo, hi in zip(p, self.lower, self.upper))

    def distance_to(self, p: Sequence[float]) -> float:
        """Euclidean distance from ``p`` to the closed box (0 inside)."""
        return math.sqrt(sum(max(lo - x, 0.0, x - hi) ** 2
                             for x, lo, hi in zip(p, self.lower, self.upper)))


@dataclass(frozen=True)
class RewardCluster:
    center: Vec
    radius: float
    count: int

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigError(f"cluster radius must be positive, got {self.radius}")
        if int(self.count) != self.count or self.count < 1:
            raise ConfigError(f"cluster count must be a positive integer, got {self.count}")


def _exit_distance(lower, upper, p, d) -> float:
    if len(p) == 1:
        v = d[0]
        if v > 0.0:
            return max((upper[0] - p[0]) / v, 0.0)
        return max((lower[0] - p[0]) / v, 0.0) if v < 0.0 else math.inf
    t = math.inf
    for x, v, lo, hi in zip(p, d, lower, upper):
        if v > 0.0:
            t = min(t, (hi - x) / v)
        elif v < 0.0:
            t = min(t, (lo - x) / v)
    return max(t, 0.0)


def _clamp(p, lower, upper) -> Vec:
    return tuple(min(max(x, lo), hi) for x, lo, hi in zip(p, lower, upper))


def clip_to_domain(domain: Domain, start: Sequence[float], direction: Sequence[float],
                   length: float) -> tuple[Vec, float]:
    """Fly from ``start`` along ``direction``, stopping at the wall if reached first.

    Returns ``(endpoint, flown_length)``.
    """
    flown = min(length, _exit_distance(domain.lower, domain.upper, start, direction))
    end = tuple(x + flown * v for x, v in zip(start, direction))
    return _clamp(end, domain.lower, domain.upper), flown


MAX_PIECES = 100_000


def _turn(end, d, lower, upper, policy):
    """New start and direction after a piece ends on the wall at ``end``."""
    if policy == "reflect":
        return end, tuple(-v if (v > 0.0 and e >= hi) or (v < 0.0 and e <= lo) else v
                          for e, v, lo, hi in zip(end, d, lower, upper))
    if policy == "wrap":
        return tuple(lo if (v > 0.0 and e >= hi) else hi if (v < 0.0 and e <= lo) else e
                     for e, v, lo, hi in zip(end, d, lower, upper)), d
    raise ParameterError(f"unknown boundary policy {policy!r}")


def path_pieces(domain: Domain, start: Vec, direction: Vec, length: float,
                policy: str = "clip", max_pieces: int = MAX_PIECES):
    """Split a straight commanded flight into in-domain straight pieces.

    Yields ``(piece_start, piece_direction, piece_length)``. ``clip`` gives one
    piece ending at the wall; ``reflect`` mirrors the direction on the axes
    that hit a wall; ``wrap`` re-enters through the opposite face.
    """
    if policy not in BOUNDARY_POLICIES:
        raise ParameterError(f"unknown boundary policy {policy!r}")
    lower, upper = domain.lower, domain.upper
    remaining = length
    p, d = start, direction
    for _ in range(max_pieces):
        t = _exit_distance(lower, upper, p, d)
        if remaining < t or policy == "clip":
            yield p, d, min(remaining, t)
            return
        yield p, d, t
        if remaining == t:
            return
        remaining -= t
        end = _clamp(tuple(x + t * v for x, v in zip(p, d)), lower, upper)
        p, d = _turn(end, d, lower, upper, policy)
    raise LogicError("boundary path did not terminate")


def segment_entry(p: Sequence[float], d: Sequence[float], length: float,
                  c: Sequence[float], r2: float) -> Optional[float]:
    """Distance along the segment at which it first enters the closed ball (c, sqrt(r2)).

    ``d`` must be a unit vector. Returns 0 if ``p`` is already inside, ``None``
    if the segment never reaches the ball.
    """
    if len(p) == 1:
        w = c[0] - p[0]
        w2 = w * w
        proj = w * d[0]
    else:
        w2 = 0.0
        proj = 0.0
        for pi, di, ci in zip(p, d, c):
            w = ci - pi
            w2 += w * w
            proj += w * di
    if w2 <= r2:
        return 0.0
    if proj <= 0.0:
        return None
    perp2 = w2 - proj * proj
    if perp2 > r2:
        return None
    s = proj - math.sqrt(r2 - perp2)
    if s > length:
        return None
    return max(s, 0.0)


class RewardField:
    """Reward points with collection bookkeeping and a uniform grid index.

    In destructive mode (``df``) a collected point leaves the index and is
    never detected again. In non-destructive mode (``ndf``) points stay
    detectable; ``visits`` counts collections per point and
    ``unique_collected`` counts points collected at least once.
    """

    def __init__(self, domain: Domain, points: Sequence[Sequence[float]],
                 cluster_ids: Sequence[int], r_d: float, mode: str = DF):
        if not r_d > 0:
            raise ConfigError(f"detection radius must be positive, got {r_d}")
        if mode not in (DF, NDF):
            raise ConfigError(f"unknown foraging mode {mode!r}")
        if len(points) != len(cluster_ids):
            raise ConfigError("points and cluster ids differ in length")
        self.domain = domain
        self.r_d = float(r_d)
        self.r2 = self.r_d * self.r_d
        self.r2_point = self.r2 * (1.0 + DETECT_SLACK)
        self.r_point = math.sqrt(self.r2_point)
        self.mode = mode
        self.points: list[Vec] = [tuple(float(x) for x in p) for p in points]
        self.cluster_of: list[int] = [int(c) for c in cluster_ids]
        self.collected = [False] * len(self.points)
        self.visits = [0] * len(self.points)
        self.n_collected = 0
        self.unique_collected = 0
        self._cell = self.r_point
        self._origin = domain.lower
        self._half_diag = 0.5 * self._cell * math.sqrt(domain.dimension)
        self._grid: dict[tuple[int, ...], list[int]] = {}
        for i, p in enumerate(self.points):
            self._grid.setdefault(self._key(p), []).append(i)
        self._centers: Optional[np.ndarray] = None
        self._center_keys: list[tuple[int, ...]] = []

    def __len__(self) -> int:
        return len(self.points)

    @property
    def remaining(self) -> int:
        """Points still detectable (all of them in ndf)."""
        return len(self.points) - (self.n_collected if self.mode == DF else 0)

    @property
    def n_clusters(self) -> int:
        return max(self.cluster_of, default=-1) + 1

    def _key(self, p) -> tuple[int, ...]:
        c = self._cell
        return tuple(int(math.floor((x - o) / c)) for x, o in zip(p, self._origin))

    def _neighbour_keys(self, key):
        if len(key) == 1:
            k, = key
            return ((k - 1,), (k,), (k + 1,))
        if len(key) == 2:
            a, b = key
            return [(a + i, b + j) for i in (-1, 0, 1) for j in (-1, 0, 1)]
        a, b, c = key
        return [(a + i, b + j, c + k) for i in (-1, 0, 1) for j in (-1, 0, 1) for k in (-1, 0, 1)]

    def detect(self, position: Sequence[float], exclude: Optional[set] = None) -> list[int]:
        """Ids of detectable rewards within ``r_d`` of ``position``, ascending."""
        grid, pts, r, dist = self._grid, self.points, self.r_point, math.dist
        found = []
        for key in self._neighbour_keys(self._key(position)):
            ids = grid.get(key)
            if ids:
                found += [i for i in ids if dist(pts[i], position) <= r]
        if exclude:
            found = [i for i in found if i not in exclude]
        found.sort()
        return found

    def _occupied_centers(self) -> np.ndarray:
        if self._centers is None:
            self._center_keys = list(self._grid)
            c, o = self._cell, self._origin
            self._centers = np.array([[o[j] + (k[j] + 0.5) * c for j in range(len(o))]
                                      for k in self._center_keys]).reshape(-1, len(o))
        return self._centers

    def _candidate_cells(self, p, d, length):
        grid = self._grid
        if len(grid) <= 4:
            return grid.values()
        end = [x + length * v for x, v in zip(p, d)]
        ka, kb = self._key(p), self._key(end)
        lo = [min(a, b) - 1 for a, b in zip(ka, kb)]
        hi = [max(a, b) + 1 for a, b in zip(ka, kb)]
        nbox = 1
        for a, b in zip(lo, hi):
            nbox *= b - a + 1
        if nbox <= 27 or nbox <= len(grid):
            if len(lo) == 1:
                keys = [(i,) for i in range(lo[0], hi[0] + 1)]
            elif len(lo) == 2:
                keys = [(i, j) for i in range(lo[0], hi[0] + 1) for j in range(lo[1], hi[1] + 1)]
            else:
                keys = [(i, j, k) for i in range(lo[0], hi[0] + 1)
                        for j in range(lo[1], hi[1] + 1) for k in range(lo[2], hi[2] + 1)]
            return [grid[k] for k in keys if k in grid]
        reach = self.r_d + self._half_diag
        if len(grid) <= 32:
            out = []
            for key, ids in grid.items():
                c = [o + (k + 0.5) * self._cell for o, k in zip(self._origin, key)]
                proj = sum((ci - pi) * di for ci, pi, di in zip(c, p, d))
                proj = min(max(proj, 0.0), length)
                dist2 = sum((ci - pi - proj * di) ** 2 for ci, pi, di in zip(c, p, d))
                if dist2 <= reach * reach:
                    out.append(ids)
            return out
        centers = self._occupied_centers()
        pa, da = np.asarray(p), np.asarray(d)
        rel = centers - pa
        proj = np.clip(rel @ da, 0.0, length)
        dist2 = ((rel - proj[:, None] * da) ** 2).sum(axis=1)
        keys = self._center_keys
        return [grid[keys[i]] for i in np.flatnonzero(dist2 <= reach * reach)]

    def first_hit(self, p: Vec, d: Vec, length: float,
                  exclude: Optional[set] = None) -> Optional[tuple[int, float]]:
        """First detectable reward whose ball the segment enters.

        Returns ``(id, distance along segment)`` with ties broken by lowest id.
        """
        if not self._grid:
            return None
        pts, r2 = self.points, self.r2
        best_s, best_i = math.inf, -1
        grid = self._grid
        cells = grid.values() if len(grid) <= 4 else self._candidate_cells(p, d, length)
        for ids in cells:
            for i in ids:
                if exclude and i in exclude:
                    continue
                s = segment_entry(p, d, length, pts[i], r2)
                if s is not None and (s < best_s or (s == best_s and i < best_i)):
                    best_s, best_i = s, i
        if best_i < 0:
            return None
        return best_i, best_s

    def first_detection_on_segment(self, start: Sequence[float], end: Sequence[float],
                                   exclude: Optional[set] = None) -> Optional[tuple[int, float]]:
        """Earliest reward detected flying straight from ``start`` to ``end``.

        Returns ``(id, t)`` where ``t`` in [0, 1] is the fraction of the
        segment flown at the moment of entering the detection ball.
        """
        start = tuple(float(x) for x in start)
        length = math.dist(start, end)
        if length == 0.0:
            ids = self.detect(start, exclude)
            return (ids[0], 0.0) if ids else None
        d = tuple((b - a) / length for a, b in zip(start, end))
        hit = self.first_hit(start, d, length, exclude)
        if hit is None:
            return None
        return hit[0], min(hit[1] / length, 1.0)

    def collect(self, i: int) -> None:
        if self.mode == DF:
            if self.collected[i]:
                raise LogicError(f"reward {i} collected twice under destructive foraging")
            self.collected[i] = True
            key = self._key(self.points[i])
            ids = self._grid[key]
            ids.remove(i)
            if not ids:
                del self._grid[key]
                self._centers = None
            self.n_collected += 1
        else:
            self.n_collected += 1
        if self.visits[i] == 0:
            self.unique_collected += 1
        self.visits[i] += 1

    def brute_force_detect(self, position: Sequence[float], exclude: Iterable[int] = ()) -> list[int]:
        """O(n) reference scan; used for self-checks."""
        ex = set(exclude)
        return [i for i, q in enumerate(self.points)
                if not (self.mode == DF and self.collected[i]) and i not in ex
                and math.dist(q, position) <= self.r_point]


def _ball_point(center: Vec, radius: float, rng: SeededRng) -> Vec:
    dim = len(center)
    if dim == 1:
        return (center[0] + radius * (2.0 * rng.uniform() - 1.0),)
    r = radius * rng.uniform() ** (1.0 / dim)
    u = sample_direction(dim, rng)
    return tuple(c + r * v for c, v in zip(center, u))


def generate_rewards(domain: Domain, clusters: Sequence[RewardCluster], rng: SeededRng,
                     r_d: float, mode: str = DF, max_tries: int = 100_000) -> RewardField:
    """Scatter each cluster's rewards uniformly over its ball, inside the domain.

    Ids are assigned cluster by cluster, so cluster ``k`` owns a contiguous
    id range. Points falling outside the domain are redrawn.
    """
    points, ids = [], []
    for k, cl in enumerate(clusters):
        if len(cl.center) != domain.dimension:
            raise ConfigError(f"cluster {k} center has wrong dimension")
        if not domain.contains(cl.center):
            raise ConfigError(f"cluster {k} center {cl.center} lies outside the domain")
        if domain.distance_to(cl.center) > cl.radius:
            raise ConfigError(f"cluster {k} ball lies entirely outside the domain")
        for _ in range(cl.count):
            for _ in range(max_tries):
                q = _ball_point(cl.center, cl.radius, rng)
                if domain.contains(q):
                    break
            else:
                raise ConfigError(f"cluster {k}: could not place a reward inside the domain")
            points.append(q)
            ids.append(k)
    return RewardField(domain, points, ids, r_d, mode)
