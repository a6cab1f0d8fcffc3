"""
Branch Working Set Module

Provides tuple profiling of branch traces and the post-processing that
turns a profile into working set size, predictability and bins.
"""
from .characterization import (assign_pred_bin, assign_size_bin, baseline_metrics,
                               extract_bwset, summarize, trace_predictability,
                               tuple_predictability)
from .profiler import (ProfileRun, dump_profile, dynamic_static_split, profile_many,
                       profile_trace)

__all__ = [
    "ProfileRun",
    "assign_pred_bin",
    "assign_size_bin",
    "baseline_metrics",
    "dump_profile",
    "dynamic_static_split",
    "extract_bwset",
    "profile_many",
    "profile_trace",
    "summarize",
    "trace_predictability",
    "tuple_predictability",
]
