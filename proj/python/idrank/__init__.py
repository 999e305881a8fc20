"""Intrinsic-dimension profiling of point clouds and per-block LoRA rank planning."""

from ._core import (
    IdEstimate,
    IdrankError,
    LayerProfile,
    RankPlan,
    ScaleEstimate,
    StabilityReport,
    compute_profile,
    compute_ranks,
    decimation_stability,
    estimate_id,
    fit_mle,
    fit_regression,
    generate,
    make_plan,
    plan_from_json,
    plan_from_profile,
    profile_diff,
    profile_from_json,
    profile_from_values,
    read_ghs,
    two_nearest,
    write_ghs,
)

__all__ = [
    "IdEstimate",
    "IdrankError",
    "LayerProfile",
    "RankPlan",
    "ScaleEstimate",
    "StabilityReport",
    "compute_profile",
    "compute_ranks",
    "decimation_stability",
    "estimate_id",
    "fit_mle",
    "fit_regression",
    "generate",
    "make_plan",
    "plan_from_json",
    "plan_from_profile",
    "profile_diff",
    "profile_from_json",
    "profile_from_values",
    "read_ghs",
    "two_nearest",
    "write_ghs",
]

__version__ = "0.1.0"
