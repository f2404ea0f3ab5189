"""Variation and Hölder norms of discrete paths and rough paths.

All suprema run over partitions built from grid points only.  For the
piecewise-linear interpolant at level 1 (exponent >= 1) this is the true
supremum; in general it is a lower bound.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .errors import DomainError, NumericalError, RefusalError, StructuralError
from .tensor_algebra import (
    GroupElement,
    TensorNorm,
    _as_norm,
    _batch_increment,
    _level_norm,
)

BRUTEFORCE_MAX_INTERVALS = 14
RHO_EXHAUSTIVE_MAX_INTERVALS = 12
PSI_CERTIFY_MAX_INTERVALS = 12


def _check_grid(times: np.ndarray) -> None:
    if times.ndim != 1 or times.size < 1:
        raise StructuralError("time grid must be a non-empty 1-d array")
    if np.any(np.diff(times) <= 0):
        raise StructuralError("time grid must be strictly increasing")


@dataclass(frozen=True, eq=False)
class DiscretePath:
    """Samples of an R^d valued path on a grid, read as its linear interpolant."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        _check_grid(times)
        if values.shape[0] != times.size:
            raise StructuralError(f"{values.shape[0]} values for {times.size} grid times")
        if np.any(values[0] != 0):
            raise StructuralError("path must vanish at the initial time")
        times.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def n_intervals(self) -> int:
        return self.times.size - 1

    def __add__(self, other: "DiscretePath") -> "DiscretePath":
        if not np.array_equal(self.times, other.times):
            raise StructuralError("paths live on different grids")
        return DiscretePath(self.times, self.values + other.values)

    def __neg__(self) -> "DiscretePath":
        return DiscretePath(self.times, -self.values)

    def __sub__(self, other: "DiscretePath") -> "DiscretePath":
        return self + (-other)

    def scale(self, lam: float) -> "DiscretePath":
        return DiscretePath(self.times, lam * self.values)


@dataclass(frozen=True, eq=False)
class RoughPath:
    """Group-valued path: a :class:`GroupElement` at each grid time.

    ``levels[k-1]`` has shape ``(n_points, d**k)``; row ``j`` is level ``k``
    of the point ``X_{0, t_j}``.  The first point is the identity.
    """

    times: np.ndarray
    dim: int
    levels: tuple

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        _check_grid(times)
        levels = []
        for k, lvl in enumerate(self.levels, start=1):
            arr = np.array(lvl, dtype=float).reshape(times.size, -1)
            if arr.shape[1] != self.dim**k:
                raise StructuralError(f"level {k} must have {self.dim**k} columns")
            if np.any(arr[0] != 0):
                raise StructuralError("rough path must start at the identity")
            arr.flags.writeable = False
            levels.append(arr)
        if len(levels) < 2:
            raise StructuralError("rough paths need depth >= 2")
        times.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "levels", tuple(levels))

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def n_points(self) -> int:
        return self.times.size

    def point(self, j: int) -> GroupElement:
        return GroupElement(self.dim, tuple(lvl[j] for lvl in self.levels))

    def increment(self, i: int, j: int) -> GroupElement:
        """``X_{t_i}^{-1} ⊗ X_{t_j}``."""
        inc = _batch_increment([lvl[i] for lvl in self.levels], [lvl[j] for lvl in self.levels])
        return GroupElement(self.dim, tuple(inc))

    def increments_from(self, i: int) -> list[np.ndarray]:
        """Batched increments ``X_{t_i, t_j}`` for all ``j > i``."""
        return _batch_increment(
            [lvl[i][None, :] for lvl in self.levels], [lvl[i + 1 :] for lvl in self.levels]
        )

    def restrict(self, i0: int, i1: int) -> "RoughPath":
        """Sub-path on grid indices ``i0..i1`` re-based to start at time 0 and identity."""
        if not 0 <= i0 < i1 < self.n_points:
            raise StructuralError(f"bad index range [{i0}, {i1}]")
        sub = [lvl[i0 : i1 + 1] for lvl in self.levels]
        start = [lvl[i0][None, :] for lvl in self.levels]
        rebased = _batch_increment(start, sub)
        for lvl in rebased:
            lvl[0] = 0.0
        return RoughPath(self.times[i0 : i1 + 1] - self.times[i0], self.dim, tuple(rebased))

    def dilate(self, lam: float) -> "RoughPath":
        return RoughPath(
            self.times, self.dim, tuple(lvl * lam**k for k, lvl in enumerate(self.levels, start=1))
        )

    def level_tensor(self, k: int) -> np.ndarray:
        """Level ``k`` shaped ``(n_points, d, ..., d)``."""
        return self.levels[k - 1].reshape((self.n_points,) + (self.dim,) * k)


@dataclass(frozen=True)
class VariationResult:
    """Supremum over grid partitions and the partition attaining it."""

    value: float
    optimal_partition: tuple
    level_values: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# pair norm matrices


def pair_level_norms(path: RoughPath, norm=TensorNorm.FROBENIUS) -> list[np.ndarray]:
    """Upper-triangular matrices ``M_k[i, j] = |X^k_{t_i, t_j}|`` for each level."""
    norm = _as_norm(norm)
    if path.depth == 2:
        return list(
            _kernels.pair_norms_depth2(
                np.ascontiguousarray(path.levels[0]),
                np.ascontiguousarray(path.levels[1]),
                norm is TensorNorm.MAX_ENTRY,
            )
        )
    n = path.n_points
    mats = [np.zeros((n, n)) for _ in range(path.depth)]
    for i in range(n - 1):
        inc = path.increments_from(i)
        for k, lvl in enumerate(inc, start=1):
            mats[k - 1][i, i + 1 :] = _level_norm(lvl, k, norm)
    return mats


def _weights(path: RoughPath, level: int, exponent: float, norm) -> np.ndarray:
    if not 1 <= level <= path.depth:
        raise DomainError(f"level {level} outside 1..{path.depth}")
    if exponent < 1:
        raise DomainError(f"exponent p/k = {exponent} < 1; the partition DP needs p/k >= 1")
    return pair_level_norms(path, norm)[level - 1] ** exponent


def _backtrack(back: np.ndarray) -> tuple:
    chain = [back.size - 1]
    while chain[-1] != 0:
        chain.append(int(back[chain[-1]]))
    return tuple(reversed(chain))


def _chain_sum(W: np.ndarray, partition) -> float:
    total = 0.0
    for a, b in zip(partition[:-1], partition[1:]):
        total += W[a, b]
    return total


def _dp_result(W: np.ndarray, level: int) -> VariationResult:
    if W.shape[0] == 1:
        return VariationResult(0.0, (0,), {level: 0.0})
    V, back = _kernels.partition_dp(W)
    value = float(V[-1])
    return VariationResult(value, _backtrack(back), {level: value})


def pvar_level(path: RoughPath, level: int, exponent: float, norm=TensorNorm.FROBENIUS) -> VariationResult:
    """``sup_D sum |X^k_{t_i, t_{i+1}}|^{exponent}`` over grid partitions (O(n^2) DP)."""
    return _dp_result(_weights(path, level, exponent, norm), level)


def pvar_bruteforce(
    path: RoughPath, level: int, exponent: float, norm=TensorNorm.FROBENIUS
) -> VariationResult:
    """Same supremum as :func:`pvar_level` by enumerating every grid partition."""
    n = path.n_points - 1
    if n > BRUTEFORCE_MAX_INTERVALS:
        raise RefusalError(f"brute force limited to {BRUTEFORCE_MAX_INTERVALS} intervals, got {n}")
    W = _weights(path, level, exponent, norm)
    if n == 0:
        return VariationResult(0.0, (0,), {level: 0.0})
    best, best_part = -math.inf, None
    for mask in itertools.product((False, True), repeat=n - 1):
        part = (0,) + tuple(i + 1 for i, keep in enumerate(mask) if keep) + (n,)
        total = _chain_sum(W, part)
        if total > best:
            best, best_part = total, part
    return VariationResult(best, best_part, {level: best})


def homogeneous_pvar(path: RoughPath, p: float, norm=TensorNorm.FROBENIUS) -> VariationResult:
    """Homogeneous p-variation with per-level details.

    ``value`` is ``max_k (sup_D sum |X^k|^{p/k})^{1/p}``; ``level_values``
    maps each level to its own ``(...)^{1/p}`` and ``optimal_partition`` is
    the one of the maximising level.
    """
    if p < path.depth:
        raise DomainError(f"p >= N required (p={p}, N={path.depth})")
    mats = pair_level_norms(path, norm)
    best = None
    per_level = {}
    for k, M in enumerate(mats, start=1):
        res = _dp_result(M ** (p / k), k)
        per_level[k] = res.value ** (1.0 / p)
        if best is None or per_level[k] > best[0]:
            best = (per_level[k], res.optimal_partition)
    return VariationResult(best[0], best[1], per_level)


def homogeneous_pvar_norm(path: RoughPath, p: float, norm=TensorNorm.FROBENIUS) -> float:
    return homogeneous_pvar(path, p, norm).value


def _lag_weights(times: np.ndarray, p: float) -> np.ndarray:
    """``(lag * dt)^{-2/p}`` for uniform grids, empty array otherwise."""
    n = times.size - 1
    step = (times[-1] - times[0]) / n
    if n < 1 or np.max(np.abs(np.diff(times) - step)) > 1e-12 * step:
        return np.empty(0)
    lags = np.arange(n + 1, dtype=float)
    lags[0] = 1.0
    return (lags * step) ** (-2.0 / p)


def hoelder_levels(path: RoughPath, p: float, norm=TensorNorm.FROBENIUS) -> list[float]:
    """Per-level ``sup_{s<t} |X^k_{s,t}|^{1/k} / (t-s)^{1/p}`` over grid pairs."""
    if path.n_points < 2:
        raise DomainError("Hölder norm needs at least two grid points")
    if p < path.depth:
        raise DomainError(f"p >= N required (p={p}, N={path.depth})")
    norm = _as_norm(norm)
    times = np.ascontiguousarray(path.times)
    if path.depth == 2:
        h1, h2 = _kernels.hoelder_depth2(
            times,
            np.ascontiguousarray(path.levels[0]),
            np.ascontiguousarray(path.levels[1]),
            1.0 / p,
            norm is TensorNorm.MAX_ENTRY,
            _lag_weights(times, p),
        )
        return [float(h1), float(h2)]
    mats = pair_level_norms(path, norm)
    return [_kernels.max_ratio_upper(M ** (1.0 / k), times, 1.0 / p) for k, M in enumerate(mats, start=1)]


def hoelder_norm(path: RoughPath, p: float, norm=TensorNorm.FROBENIUS) -> float:
    """Homogeneous 1/p-Hölder norm restricted to grid pairs."""
    return max(hoelder_levels(path, p, norm))


# ---------------------------------------------------------------------------
# psi-variation

_PSI_KNEE = math.exp(-math.e)


def psi(x):
    """``x^2 / max(log log(1/x), 1)`` with ``psi(0) = 0``.

    The max switches branches exactly at ``x = exp(-e)``; above it psi is x^2.
    """
    x_in = x
    x = np.asarray(x, dtype=float)
    out = np.array(x * x, ndmin=1)
    x = np.array(x, ndmin=1)
    small = (x > 0) & (x < _PSI_KNEE)
    xs = x[small]
    out[small] = xs * xs / np.log(np.log(1.0 / xs))
    return out.reshape(np.shape(x_in)) if np.ndim(x_in) else float(out[0])


def _psi_weights(path: DiscretePath) -> np.ndarray:
    v = path.values
    diff = v[None, :, :] - v[:, None, :]
    W = psi(np.sqrt(np.sum(diff * diff, axis=-1)))
    return np.triu(W, 1)


def psi_variation_functional(path: DiscretePath) -> float:
    """``sup_D sum psi(|x_{t_i, t_{i+1}}|)`` over grid partitions."""
    if path.n_intervals == 0:
        return 0.0
    V, _ = _kernels.partition_dp(_psi_weights(path))
    return float(V[-1])


@dataclass(frozen=True)
class PsiVariation:
    value: float
    certified: bool
    # the functional is a grid supremum; "certified" means brute force agreed
    note: str = "grid-partition supremum"


def psi_variation(path: DiscretePath) -> PsiVariation:
    """DP value plus a brute-force cross-check on small grids."""
    value = psi_variation_functional(path)
    n = path.n_intervals
    if n > PSI_CERTIFY_MAX_INTERVALS or n == 0:
        return PsiVariation(value, n == 0)
    W = _psi_weights(path)
    brute = max(
        _chain_sum(W, (0,) + tuple(i + 1 for i, keep in enumerate(mask) if keep) + (n,))
        for mask in itertools.product((False, True), repeat=n - 1)
    )
    return PsiVariation(value, math.isclose(value, brute, rel_tol=1e-12, abs_tol=1e-300))


@dataclass(frozen=True)
class LuxemburgResult:
    value: float
    functional_at_value: float
    iterations: int
    brackets: tuple
    construction: str = "Luxemburg gauge inf{lam > 0 : F(x/lam) <= 1}"


def psi_variation_norm_details(path: DiscretePath, tol: float = 1e-10, max_iter: int = 400) -> LuxemburgResult:
    """Luxemburg norm of the psi-variation functional, by bisection on lambda."""
    if tol <= 0:
        raise DomainError("tol must be positive")
    if not np.any(path.values):
        return LuxemburgResult(0.0, 0.0, 0, ())
    F: Callable[[float], float] = lambda lam: psi_variation_functional(path.scale(1.0 / lam))
    lo, hi = 1.0, 1.0
    while F(hi) > 1.0:
        hi *= 2.0
    while F(lo) <= 1.0:
        lo *= 0.5
    brackets = [(lo, hi)]
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        fm = F(mid)
        if abs(fm - 1.0) <= tol:
            return LuxemburgResult(mid, fm, it, tuple(brackets))
        if fm > 1.0:
            lo = mid
        else:
            hi = mid
        brackets.append((lo, hi))
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            break
    raise NumericalError(f"psi-variation bisection did not converge; final bracket [{lo!r}, {hi!r}]")


def psi_variation_norm(path: DiscretePath, tol: float = 1e-10) -> float:
    return psi_variation_norm_details(path, tol).value


# ---------------------------------------------------------------------------
# 2D rho-variation of covariances


def _gram(kernel, grid: np.ndarray) -> np.ndarray:
    return kernel.gram(grid)


def _interval_sums_from_rows(G: np.ndarray, rows, rho: float) -> np.ndarray:
    """g[c, e] = sum over row intervals (a, b) of |rect((a,b), (c,e))|^rho."""
    A = np.ascontiguousarray(np.stack([G[b] - G[a] for a, b in zip(rows[:-1], rows[1:])]))
    return _kernels.interval_sums(A, rho)


def _best_columns(G: np.ndarray, rows, rho: float) -> tuple[float, tuple]:
    g = _interval_sums_from_rows(G, rows, rho)
    V, back = _kernels.partition_dp(g)
    return float(V[-1]), _backtrack(back)


def covariance_2d_rho_var(kernel, grid, rho: float, mode: str = "exhaustive") -> float:
    """2D rho-variation ``(sup_{D, D'} sum |R(I x J)|^rho)^{1/rho}`` on grid partitions.

    ``exhaustive`` enumerates every row partition and solves the column
    partition exactly by DP (so the pair supremum is exact).  ``greedy``
    alternates exact row/column DP steps from the finest and the coarsest
    start and reports the better value; it is a lower bound.
    """
    grid = np.asarray(grid, dtype=float)
    _check_grid(grid)
    if rho < 1:
        raise DomainError(f"rho >= 1 required, got {rho}")
    n = grid.size - 1
    if n == 0:
        return 0.0
    G = _gram(kernel, grid)
    if mode == "exhaustive":
        if n > RHO_EXHAUSTIVE_MAX_INTERVALS:
            raise RefusalError(
                f"exhaustive mode limited to {RHO_EXHAUSTIVE_MAX_INTERVALS} intervals, got {n}"
            )
        best = 0.0
        for mask in itertools.product((False, True), repeat=n - 1):
            rows = (0,) + tuple(i + 1 for i, keep in enumerate(mask) if keep) + (n,)
            best = max(best, _best_columns(G, rows, rho)[0])
        return best ** (1.0 / rho)
    if mode == "greedy":
        best = 0.0
        for start in (tuple(range(n + 1)), (0, n)):
            rows, value = start, -1.0
            while True:
                new_value, cols = _best_columns(G, rows, rho)
                if new_value <= value:
                    break
                value = new_value
                # kernel symmetry: optimal rows for fixed cols solve the same problem
                rows_value, rows = _best_columns(G, cols, rho)
                value = max(value, rows_value)
            best = max(best, value)
        return best ** (1.0 / rho)
    raise DomainError(f"unknown mode {mode!r}")
