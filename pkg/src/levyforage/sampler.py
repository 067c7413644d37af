"""Power-law jump lengths and isotropic jump directions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, ParameterError
from .rng import SeededRng

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class JumpLaw:
    """Bounded Pareto law with density proportional to x**-mu on [ell_min, ell_max].

    ``ell_max`` may be ``math.inf`` for the untruncated law.
    """

    mu: float
    ell_min: float
    ell_max: float = math.inf

    def __post_init__(self):
        if not (1.0 < self.mu <= 3.0):
            raise ParameterError(f"mu must satisfy 1 < mu <= 3, got {self.mu}")
        if not (self.ell_min > 0.0 and math.isfinite(self.ell_min)):
            raise ParameterError(f"ell_min must be positive and finite, got {self.ell_min}")
        if not self.ell_max >= self.ell_min:
            raise ParameterError(f"ell_max ({self.ell_max}) must be >= ell_min ({self.ell_min})")
        a = 1.0 - self.mu
        hi = self.ell_max ** a if math.isfinite(self.ell_max) else 0.0
        object.__setattr__(self, "_consts", (self.ell_min ** a, hi, 1.0 / a))

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.ell_max)

    def quantile(self, u: float) -> float:
        """Length whose exceedance probability P(X > x) equals ``u`` (0 < u <= 1)."""
        lo, hi, inv = self._consts
        x = ((1.0 - u) * hi + u * lo) ** inv
        return min(max(x, self.ell_min), self.ell_max)

    def quantiles(self, u: np.ndarray) -> np.ndarray:
        lo, hi, inv = self._consts
        x = ((1.0 - u) * hi + u * lo) ** inv
        return np.clip(x, self.ell_min, self.ell_max)

    def ccdf(self, x):
        """P(X > x) for the (possibly truncated) law."""
        a = 1.0 - self.mu
        x = np.clip(np.asarray(x, dtype=float), self.ell_min, self.ell_max)
        lo = self.ell_min ** a
        hi = self.ell_max ** a if self.bounded else 0.0
        return (x ** a - hi) / (lo - hi)

    def mean(self) -> float:
        """Analytic mean, ``inf`` when it diverges."""
        m, lo, hi = self.mu, self.ell_min, self.ell_max
        if not self.bounded:
            return lo * (m - 1.0) / (m - 2.0) if m > 2.0 else math.inf
        if lo == hi:
            return lo
        norm = (lo ** (1 - m) - hi ** (1 - m)) / (m - 1)
        if m == 2.0:
            return math.log(hi / lo) / norm
        return (hi ** (2 - m) - lo ** (2 - m)) / (2 - m) / norm


def sample_jump_length(law: JumpLaw, rng: SeededRng) -> float:
    """One inverse-transform draw from ``law``; consumes one uniform."""
    return law.quantile(rng.uniform_pos())


def sample_jump_lengths(law: JumpLaw, rng: SeededRng, n: int) -> np.ndarray:
    """Vectorised :func:`sample_jump_length`."""
    return law.quantiles(1.0 - rng.uniforms(n))


def sample_direction(dimension: int, rng: SeededRng) -> tuple[float, ...]:
    """Uniform unit vector on the 0-, 1- or 2-sphere.

    Dimension 1 is a fair sign. The 3D case uses Archimedes' projection
    (uniform height, uniform azimuth) so only uniforms are consumed.
    """
    if dimension == 2:
        th = TWO_PI * rng.uniform()
        return (math.cos(th), math.sin(th))
    if dimension == 3:
        z = 2.0 * rng.uniform() - 1.0
        ph = TWO_PI * rng.uniform()
        r = math.sqrt(max(0.0, 1.0 - z * z))
        return (r * math.cos(ph), r * math.sin(ph), z)
    if dimension == 1:
        return (1.0,) if rng.uniform() < 0.5 else (-1.0,)
    raise ParameterError(f"unsupported dimension {dimension}")


def empirical_ccdf(samples: np.ndarray, xs: np.ndarray) -> np.ndarray:
    s = np.sort(np.asarray(samples, dtype=float))
    return (s.size - np.searchsorted(s, xs, side="right")) / s.size


def tail_exponent_estimate(samples, x_lo: float, x_hi: float, points: int = 25,
                           min_samples: int = 10_000, min_tail: int = 10) -> float:
    """Least-squares slope of log P(X > x) against log x on [x_lo, x_hi].

    For draws from ``JumpLaw(mu)`` this is close to ``1 - mu`` as long as the
    window stays clear of a truncation point.

    Raises :class:`InsufficientDataError` if fewer than ``min_samples``
    samples are given or fewer than ``min_tail`` of them exceed ``x_hi``.
    """
    if not (0.0 < x_lo < x_hi):
        raise ParameterError("need 0 < x_lo < x_hi")
    s = np.asarray(samples, dtype=float)
    if s.size < min_samples:
        raise InsufficientDataError(f"{s.size} samples, need at least {min_samples}")
    if np.count_nonzero(s > x_hi) < min_tail:
        raise InsufficientDataError(f"fewer than {min_tail} samples above x_hi={x_hi}")
    xs = np.geomspace(x_lo, x_hi, points)
    ccdf = empirical_ccdf(s, xs)
    slope, _ = np.polyfit(np.log(xs), np.log(ccdf), 1)
    return float(slope)
