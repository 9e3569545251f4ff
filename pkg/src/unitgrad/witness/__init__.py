"""Numerical witnesses for the steps of the constant-norm-gradient argument."""

from .fixed_points import (
    FixedPointResult,
    LimitDirection,
    brouwer_fixed_point,
    estimate_gradient_lipschitz,
    limit_direction,
    resolvent_point,
)
from .lines import Line, LineGapResult, LinePairWitness, closest_points_between_lines, line_pair_witness
from .probes import first_order_gap, monotonicity_gap, ray_deviation, ray_gradient_drift
from .verdict import (
    Affine,
    Constant,
    NotConstantNorm,
    NotConvex,
    NotDifferentiable,
    Verdict,
    WitnessReport,
    classify_field,
    contradicts_claims,
    smoothness_defect,
    witness_report,
)

__all__ = [
    "Affine",
    "Constant",
    "FixedPointResult",
    "LimitDirection",
    "Line",
    "LineGapResult",
    "LinePairWitness",
    "NotConstantNorm",
    "NotConvex",
    "NotDifferentiable",
    "Verdict",
    "WitnessReport",
    "brouwer_fixed_point",
    "classify_field",
    "closest_points_between_lines",
    "contradicts_claims",
    "estimate_gradient_lipschitz",
    "first_order_gap",
    "limit_direction",
    "line_pair_witness",
    "monotonicity_gap",
    "ray_deviation",
    "ray_gradient_drift",
    "resolvent_point",
    "smoothness_defect",
    "witness_report",
]
