"""Tunable knobs for generation and solving.

One Config object travels through the whole pipeline; every randomized
stage derives its random stream from ``seed`` so repeated runs produce
identical templates and reports.
"""

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

DEFAULT_SEED = 20240813


@dataclass(frozen=True)
class Config:
    epsilon: Fraction = Fraction(1, 1000)
    rank_tol: float = 1e-8
    residual_tol: float = 1e-6
    consistency_tol: float = 1e-4
    ratio_tol: float = 1e-12
    pivot_tol: float = 1e-12
    inf_tol: float = 1e-10
    seed: int = DEFAULT_SEED
    max_subset_size: Optional[int] = None
    forced_hidden: Optional[str] = None
    no_reduce: bool = False

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        for name in ("rank_tol", "residual_tol", "consistency_tol",
                     "ratio_tol", "pivot_tol", "inf_tol"):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise ValueError(f"{name} must lie in (0, 1), got {value!r}")

    def with_options(self, **kwargs) -> "Config":
        return replace(self, **kwargs)
