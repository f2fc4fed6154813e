"""Temporal interval overlap measures and the matching loss.

Reference math for scoring predicted segment boundaries against ground
truth: plain IoU, generalized IoU with a hull penalty for disjoint
intervals, and an IoU-aware focal loss whose target is the scaled
generalized IoU.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_P_FLOOR = 1e-7


@dataclass(frozen=True)
class Interval:
    """Closed-open time span in seconds."""

    start_s: float
    end_s: float

    def __post_init__(self) -> None:
        if not self.start_s < self.end_s:
            raise ValueError(f"interval start must precede end, got [{self.start_s}, {self.end_s}]")

    @property
    def length(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class VarifocalParams:
    """Weighting for the negative branch of the loss."""

    alpha: float = 0.75
    gamma: float = 2.0


def iou(a: Interval, b: Interval) -> float:
    """Intersection over union of two intervals, in [0, 1]."""
    inter = min(a.end_s, b.end_s) - max(a.start_s, b.start_s)
    if inter <= 0.0:
        return 0.0
    union = a.length + b.length - inter
    return inter / union


def giou(a: Interval, b: Interval) -> float:
    """Generalized IoU: IoU minus the hull penalty, in (-1, 1].

    Disjoint intervals go negative in proportion to the dead space
    between them, so the measure still carries a distance signal when
    the plain IoU saturates at zero.
    """
    hull = max(a.end_s, b.end_s) - min(a.start_s, b.start_s)
    inter = min(a.end_s, b.end_s) - max(a.start_s, b.start_s)
    if inter > 0.0:
        union = a.length + b.length - inter
        base = inter / union
    else:
        union = a.length + b.length
        base = 0.0
    return base - (hull - union) / hull


def confidence_target(actual: Interval, predicted: Interval) -> float:
    """Map giou from [-1, 1] to the unit interval: 0.5 * (1 + giou)."""
    return 0.5 * (1.0 + giou(actual, predicted))


def varifocal_loss(
    p: float,
    target: float,
    params: VarifocalParams = VarifocalParams(),
    *,
    constant_zero_branch: bool = False,
) -> float:
    """IoU-weighted classification loss for one predicted confidence.

    For a positive target g the loss is the g-weighted cross entropy
    -g * (g*log(p) + (1-g)*log(1-p)), minimized at p == g. For g == 0
    the default is the focal down-weighted penalty
    alpha * p**gamma * -log(1-p); with `constant_zero_branch` the zero
    branch instead evaluates log(1-g) at g == 0 and is therefore
    identically zero, which is kept selectable for auditing.

    p is clamped to [1e-7, 1 - 1e-7] before the logs.
    """
    if not 0.0 <= target <= 1.0:
        raise ValueError(f"target must lie in [0, 1], got {target}")
    p = min(max(p, _P_FLOOR), 1.0 - _P_FLOOR)
    if target > 0.0:
        return -target * (target * math.log(p) + (1.0 - target) * math.log(1.0 - p))
    if constant_zero_branch:
        return -params.alpha * p**params.gamma * math.log(1.0 - target)
    return params.alpha * p**params.gamma * -math.log(1.0 - p)
