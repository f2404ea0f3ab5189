"""Empirical check of ``f(x) <= c (f(x - h) + sigma |h|_H)`` for the Hölder lift norm."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError
from ..gaussian_processes import BrownianKernel, SeedSpec, sample_cameron_martin_bm, sample_process
from ..path_norms import hoelder_norm
from ..rough_lift import LiftConfig, lift_piecewise_linear, translate

DEFAULT_C = 1.0 + 1.0 / math.sqrt(2.0)


@dataclass
class TranslationReport:
    c: float
    sigma: float
    p: float
    n_paths: int
    n_shifts: int
    shift_scales: tuple
    max_ratio: float
    max_ratio_by_scale: dict
    n_checks: int
    violations: list = field(default_factory=list)

    @property
    def n_violations(self) -> int:
        return len(self.violations)

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "sigma": self.sigma,
            "p": self.p,
            "n_paths": self.n_paths,
            "n_shifts": self.n_shifts,
            "shift_scales": list(self.shift_scales),
            "n_checks": self.n_checks,
            "max_ratio": self.max_ratio,
            "max_ratio_by_scale": {repr(k): v for k, v in self.max_ratio_by_scale.items()},
            "n_violations": self.n_violations,
            "violations": self.violations[:100],
        }


def translation_ratio(x, h, p: float, sigma: float = 1.0) -> float:
    """``f(x) / (f(x - h) + sigma |h|_H)`` with ``f`` the 1/p-Hölder norm of the lift."""
    X = lift_piecewise_linear(x, LiftConfig(depth=2))
    shifted = translate(X, x, -h)
    denom = hoelder_norm(shifted, p) + sigma * h.h_norm
    fx = hoelder_norm(X, p)
    return fx / denom if denom > 0 else (math.inf if fx > 0 else 0.0)


def check_translation_inequality(
    grid,
    p: float,
    c: float = DEFAULT_C,
    n_paths: int = 1000,
    n_shifts: int = 10,
    shift_scales=(0.5, 1.0, 2.0, 4.0),
    seed: SeedSpec = SeedSpec(0),
    d: int = 2,
    sigma: float = 1.0,
) -> TranslationReport:
    """Sweep Brownian paths and Cameron-Martin shifts; violations are recorded, not raised.

    Path ``i`` uses ``seed.child(0, i)`` and shift ``(i, j, k)`` uses
    ``seed.child(1, i, j, k)``, so any subset of the sweep is reproducible.
    """
    if not p > 2:
        raise DomainError(f"p > 2 required, got {p}")
    grid = np.asarray(grid, dtype=float)
    if not math.isclose(grid[-1], 1.0):
        raise DomainError("the translation check is defined on [0, 1]")
    if c <= 0 or sigma <= 0:
        raise DomainError("c and sigma must be positive")
    scales = tuple(float(s) for s in shift_scales)
    if any(s < 0 for s in scales):
        raise DomainError("shift scales must be nonnegative")
    kernel = BrownianKernel()
    worst = 0.0
    by_scale = {s: 0.0 for s in scales}
    violations = []
    for i in range(n_paths):
        x = sample_process(kernel, grid, d, seed.child(0, i))
        X = lift_piecewise_linear(x, LiftConfig(depth=2))
        fx = hoelder_norm(X, p)
        for j in range(n_shifts):
            for k, s in enumerate(scales):
                h = sample_cameron_martin_bm(grid, d, s, seed.child(1, i, j, k))
                denom = hoelder_norm(translate(X, x, -h), p) + sigma * h.h_norm
                ratio = fx / denom if denom > 0 else (math.inf if fx > 0 else 0.0)
                by_scale[s] = max(by_scale[s], ratio)
                worst = max(worst, ratio)
                if ratio > c:
                    violations.append({"path": i, "shift": j, "scale": s, "ratio": ratio})
    return TranslationReport(c, sigma, p, n_paths, n_shifts, scales, worst, by_scale,
                             n_paths * n_shifts * len(scales), violations)
