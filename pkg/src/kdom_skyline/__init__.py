"""Sliding-window k-dominant skyline probabilities over uncertain data streams."""

from .baseline import CIScheme, CiKeyRecord, NaiveScheme, ci_filter, naive_update
from .core import (
    ConfigError,
    NormalizationSpec,
    SlidingWindow,
    SortedProfile,
    UncertainItem,
    UsageError,
    WindowEntry,
    apply_arrival,
    apply_departure,
    dominates,
    k_dominates,
    ksky_probability,
    normalize_and_sort,
    oracle_window_probabilities,
)
from .distributed import Cluster, ClusterError, NodeMessage
from .engine import EngineConfig, EventStats, StreamEngine, StreamEvent
from .estimator import KDominantSkyline
from .indexing_ai import AIScheme, ai_calculate, ai_update, cal_ait_max, cal_ait_min, position_pairs
from .indexing_mi import (
    MiddleIndexTables,
    MIScheme,
    ThresholdPositions,
    cannot_k_dominate,
    mi_calculate,
    mi_sort,
    mi_thresholds,
    mi_update,
)

__version__ = "0.1.0"
