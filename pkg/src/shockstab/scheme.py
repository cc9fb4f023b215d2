"""Scheme selection: solver + order + variable space + near-shock order cap.

A plain scheme uses one (solver, order) everywhere; the hybrid schemes pick
a different pair for normal faces (x-oriented, along the shock normal) and
transverse faces (y-oriented).
"""

from dataclasses import dataclass

import numpy as np

from .reconstruction import ReconConfig, config_for_cap, config_for_order
from .riemann import HYBRID_PARTS, SOLVER_KINDS, SmoothingConfig

CAP_KINDS = ("none", "first", "second", "smoothest-third")


@dataclass(frozen=True)
class Scheme:
    solver: str = "roe"
    order: int = 5
    weno_variant: str = "z"
    space: str = "primitive"
    cap: str = "none"
    weno_eps: float = 1e-15
    roe_delta0: float = 1e-4
    char_average: str = "arithmetic"
    force_linear_weights: bool = False

    def __post_init__(self):
        if self.solver not in SOLVER_KINDS:
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.order not in (1, 2, 5):
            raise ValueError(f"order must be 1, 2 or 5, got {self.order}")
        if self.cap not in CAP_KINDS:
            raise ValueError(f"unknown near-shock cap {self.cap!r}")

    @property
    def is_hybrid(self) -> bool:
        return self.solver in HYBRID_PARTS

    def per_direction(self, axis: str) -> tuple[str, int]:
        """(solver, order) used on faces whose normal is along ``axis``."""
        if self.is_hybrid:
            orientation = "normal" if axis == "x" else "transverse"
            return HYBRID_PARTS[self.solver][orientation]
        return self.solver, self.order

    def recon_config(self, axis: str) -> ReconConfig:
        _, order = self.per_direction(axis)
        return config_for_order(
            order,
            weno_variant=self.weno_variant,
            space=self.space,
            eps=self.weno_eps,
            char_average=self.char_average,
            force_linear_weights=self.force_linear_weights,
        )

    def cap_config(self, axis: str) -> ReconConfig | None:
        if self.cap == "none":
            return None
        return config_for_cap(self.cap, self.recon_config(axis))

    def smoothing(self) -> SmoothingConfig:
        return SmoothingConfig(self.roe_delta0)

    def label(self) -> str:
        if self.is_hybrid:
            return f"{self.solver}/{self.space}"
        return f"{self.solver}-o{self.order}-{self.weno_variant}/{self.space}"
