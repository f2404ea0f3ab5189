"""Sharded Monte Carlo pipelines for norm statistics of lifted Gaussian paths.

Path ``i`` always draws from ``seed.child(i)`` and shards have a fixed size,
so the merged sample does not depend on the number of workers.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..errors import DomainError
from ..gaussian_processes import CovarianceKernel, SeedSpec, sample_values, uniform_grid
from ..path_norms import RoughPath, covariance_2d_rho_var, hoelder_norm, homogeneous_pvar_norm
from ..rough_lift import lift_values
from ..tensor_algebra import TensorNorm

WORKERS_ENV = "FERNIQUE_WORKERS"
SHARD_SIZE = 256
STATISTICS = ("hoelder", "pvar")


def worker_count(default: int = 1) -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None or raw == "":
        return default
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise DomainError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return n


def path_statistic(values: np.ndarray, grid: np.ndarray, statistic: str, p: float, depth: int = 2,
                   norm=TensorNorm.FROBENIUS) -> float:
    X = RoughPath(grid, values.shape[1], tuple(lift_values(values, depth)))
    if statistic == "hoelder":
        return hoelder_norm(X, p, norm)
    if statistic == "pvar":
        return homogeneous_pvar_norm(X, p, norm)
    raise DomainError(f"statistic must be one of {STATISTICS}, got {statistic!r}")


def _shard(args) -> np.ndarray:
    kernel, grid, d, depth, statistic, p, norm, seed, lo, hi = args
    out = np.empty(hi - lo)
    for i in range(lo, hi):
        out[i - lo] = path_statistic(sample_values(kernel, grid, d, seed.child(i)), grid, statistic, p, depth, norm)
    return out


def norm_samples(
    kernel: CovarianceKernel,
    T: float,
    n_grid: int,
    n_paths: int,
    seed: SeedSpec,
    statistic: str = "hoelder",
    p: float = 2.5,
    d: int = 2,
    depth: int = 2,
    norm=TensorNorm.FROBENIUS,
    workers: int | None = None,
) -> np.ndarray:
    """Norms of ``n_paths`` independent lifted samples on a uniform grid over [0, T]."""
    if statistic not in STATISTICS:
        raise DomainError(f"statistic must be one of {STATISTICS}, got {statistic!r}")
    if p < depth:
        raise DomainError(f"p >= N required (p={p}, N={depth})")
    if n_paths < 1:
        raise DomainError("need at least one path")
    grid = uniform_grid(T, n_grid)
    jobs = [(kernel, grid, d, depth, statistic, p, norm, seed, lo, min(lo + SHARD_SIZE, n_paths))
            for lo in range(0, n_paths, SHARD_SIZE)]
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(jobs) == 1:
        parts = [_shard(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_shard, jobs))
    return np.concatenate(parts)


def rho_variation_estimate(kernel: CovarianceKernel, T: float, rho: float, n_coarse: int = 64) -> float:
    """Greedy lower bound of ``|R|_{rho-var; [0,T]^2}`` on a coarse uniform grid.

    Used to normalise tail statistics; an underestimate only makes the
    normalised statistic heavier-tailed, so comparisons stay conservative.
    """
    return covariance_2d_rho_var(kernel, uniform_grid(T, n_coarse), rho, mode="greedy")
