"""Run configuration shared by the checkers and the command line."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, replace
from typing import Optional


def seed_from_env(default: int = 0) -> int:
    raw = os.environ.get("SPROC_SEED")
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"SPROC_SEED must be an integer, got {raw!r}") from exc


@dataclass(frozen=True)
class RunConfig:
    """Tolerances, search budgets and path selection for one run.

    Every report embeds this record together with the seed so that identical
    configuration and input reproduce byte-identical output.
    """

    tol_psd: float = 1e-9        # PSD slack for certificates
    tol_sub: float = 1e-6        # substitution slack quoted in reports
    tol_boundary: float = 1e-6   # sampled-path boundary band
    ascent_iters: int = 500
    restarts: int = 5
    step_scale: float = 1.0
    probes: int = 20             # extra dual probes for the RHS procedure
    seed: int = field(default_factory=seed_from_env)
    exact_only: bool = False
    box_lo: float = -5.0
    box_hi: float = 5.0
    grid_per_axis: int = 0       # 0 = per-dimension default
    out: Optional[str] = None

    def __post_init__(self):
        for name in ("tol_psd", "tol_sub", "tol_boundary"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.ascent_iters < 1 or self.restarts < 1:
            raise ValueError("ascent budget must be positive")
        if self.box_lo >= self.box_hi:
            raise ValueError("box_lo must be below box_hi")

    @property
    def box(self):
        return (self.box_lo, self.box_hi)

    def with_updates(self, **kw) -> "RunConfig":
        return replace(self, **kw)

    def to_json(self) -> dict:
        return asdict(self)
