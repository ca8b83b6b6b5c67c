"""The interval result type shared by every norm estimator."""
from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class NormEstimate:
    """An interval ``[lower, upper]`` for a norm; ``upper`` may be unknown.

    ``meta`` records what is needed to rerun the estimate (seed, grid sizes,
    caps, iteration counts) plus a ``rigorous`` flag telling whether
    ``upper`` is a proven bound or only a grid-certified one.
    """

    lower: float
    upper: float | None
    method: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.lower) or self.lower < 0:
            raise ValueError(f"lower bound must be finite and nonnegative, got {self.lower}")
        if self.upper is not None and self.upper < self.lower:
            # allow for rounding when the two sides are computed separately
            if self.upper < self.lower * (1 - 1e-12) - 1e-300:
                raise ValueError(f"upper {self.upper} below lower {self.lower}")
            object.__setattr__(self, "upper", self.lower)

    def scaled(self, c: float) -> "NormEstimate":
        c = abs(c)
        return NormEstimate(
            self.lower * c, None if self.upper is None else self.upper * c, self.method, dict(self.meta)
        )

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "method": self.method, "meta": self.meta}
