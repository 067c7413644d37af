"""Seeded simulator of memoryless Lévy-flight search for sparse, clustered rewards."""

from .errors import ConfigError, InsufficientDataError, LogicError, ParameterError
from .forager import Budget, Forager, ForagerState, apply_drift
from .metrics import (RunMetrics, collection_rate_curve, compute_metrics, efficiency,
                      first_arrival_times, jump_count_scaling, mu_opt)
from .rng import SeededRng
from .sampler import JumpLaw, sample_direction, sample_jump_length, tail_exponent_estimate
from .scenarios import ScenarioSpec, builtin, dump_spec, load_spec
from .simulation import run, simulate
from .trace import Trace, TraceEvent
from .world import Domain, RewardCluster, RewardField, clip_to_domain, generate_rewards

__version__ = "0.1.0"
