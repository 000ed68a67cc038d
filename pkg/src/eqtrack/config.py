"""Run configuration shared by the pipeline and the command line."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

from .appearance import DEFAULT_GAMMA
from .core import ValidationError
from .equalize import DEFAULT_EPSILON, P_MIN
from .evaluate import DEFAULT_IOU
from .flowgraph import DEFAULT_ETA, GraphParams
from .motion import DEFAULT_LAMBDA, MotionParams

DEFAULT_ENTRY_COST = 0.5


@dataclass(frozen=True)
class RunConfig:
    eta: float = DEFAULT_ETA
    epsilon: float = DEFAULT_EPSILON
    k1: float = 1.0
    k2: float = 1.0
    lam: float = DEFAULT_LAMBDA
    gamma: int = DEFAULT_GAMMA
    iou_threshold: float = DEFAULT_IOU
    equalize: bool = True
    p_min: float = P_MIN
    seed: int = 0
    entry_cost: float = DEFAULT_ENTRY_COST

    def __post_init__(self):
        if not self.eta > 0:
            raise ValidationError("eta must be positive")
        if not 0 <= self.epsilon <= 1:
            raise ValidationError("epsilon must lie in [0, 1]")
        if self.k1 < 0 or self.k2 < 0:
            raise ValidationError("k1 and k2 must be non-negative")
        if not self.lam > 0:
            raise ValidationError("lambda must be positive")
        if self.gamma < 1:
            raise ValidationError("gamma must be at least one frame")
        if not 0 < self.iou_threshold <= 1:
            raise ValidationError("iou_threshold must lie in (0, 1]")
        if not 0 < self.p_min < 1:
            raise ValidationError("p_min must lie in (0, 1)")
        if self.entry_cost < 0:
            raise ValidationError("entry_cost must be non-negative")

    def graph_params(self) -> GraphParams:
        return GraphParams(eta=self.eta, k1=self.k1, k2=self.k2, p_min=self.p_min, entry_cost=self.entry_cost)

    def motion_params(self) -> MotionParams:
        return MotionParams(lam=self.lam, sweep_cap=int(10 * self.eta))

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def as_dict(self):
        return asdict(self)

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]
