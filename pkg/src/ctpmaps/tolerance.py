"""Numerical tolerances shared by every module."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class ToleranceProfile:
    root_residual: float = 1e-12
    cluster: float = 1e-7
    path_tracking: float = 1e-10
    clearance: float = 1e-4
    membership: float = 1e-6
    terminal_stop: float = 1e-6
    coefficient: float = 1e-10
    max_degree: int = 64
    group_order_bound: int = 10**7

    def override(self, **changes) -> "ToleranceProfile":
        known = {f.name for f in fields(self)}
        unknown = set(changes) - known
        if unknown:
            raise KeyError(f"unknown tolerance fields: {sorted(unknown)}")
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT = ToleranceProfile()
