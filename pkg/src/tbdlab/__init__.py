"""Typical bounded differences: bounds, exact checks and random graph processes."""

from .bounds import (
    LipschitzProfile,
    QueryAggregate,
    TailBound,
    bdi_bound,
    dynamic_aggregate_bound,
    janson_zero_bound,
    tbdi_bernoulli_bound,
    tbdi_bound,
    truncation_bound,
    two_sided_error,
)
from .graphs import HostGraph, PatternGraph, PatternStats, named_pattern, pattern_stats
from .processes import ProcessConfig, ProcessOutcome

__version__ = "0.1.0"
