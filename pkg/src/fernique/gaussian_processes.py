"""Centered Gaussian processes with independent components, sampled exactly on a grid."""
from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, FactorizationError, StructuralError
from .path_norms import DiscretePath, _check_grid


class CovarianceKernel:
    """Covariance ``R(s, t)`` of one component; subclasses implement :meth:`__call__`."""

    kind = "abstract"

    def __call__(self, s, t):
        raise NotImplementedError

    def gram(self, grid) -> np.ndarray:
        grid = np.asarray(grid, dtype=float)
        return self(grid[:, None], grid[None, :])

    def params(self) -> dict:
        return {}

    def describe(self) -> dict:
        return {"kind": self.kind, **self.params()}


@dataclass(frozen=True)
class BrownianKernel(CovarianceKernel):
    kind = "bm"

    def __call__(self, s, t):
        return np.minimum(np.asarray(s, dtype=float), np.asarray(t, dtype=float))


@dataclass(frozen=True)
class FractionalBrownianKernel(CovarianceKernel):
    """``R(s,t) = (s^{2H} + t^{2H} - |t-s|^{2H}) / 2``."""

    hurst: float
    kind = "fbm"

    def __post_init__(self):
        if not 0 < self.hurst < 1:
            raise DomainError(f"Hurst parameter must lie in (0, 1), got {self.hurst}")

    def __call__(self, s, t):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        h2 = 2.0 * self.hurst
        return 0.5 * (np.abs(s) ** h2 + np.abs(t) ** h2 - np.abs(t - s) ** h2)

    @property
    def rho(self) -> float:
        """2D variation exponent 1/(2H) of the covariance."""
        return 1.0 / (2.0 * self.hurst)

    def params(self):
        return {"hurst": self.hurst}


@dataclass(frozen=True)
class OrnsteinUhlenbeckKernel(CovarianceKernel):
    """Zero-start OU: ``(sigma^2 / 2 theta) (exp(-theta|t-s|) - exp(-theta(t+s)))``."""

    theta: float
    sigma: float = 1.0
    kind = "ou"

    def __post_init__(self):
        if self.theta <= 0 or self.sigma <= 0:
            raise DomainError("OU parameters theta and sigma must be positive")

    def __call__(self, s, t):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        c = self.sigma**2 / (2.0 * self.theta)
        return c * (np.exp(-self.theta * np.abs(t - s)) - np.exp(-self.theta * (t + s)))

    def params(self):
        return {"theta": self.theta, "sigma": self.sigma}


@dataclass(frozen=True, eq=False)
class TabulatedKernel(CovarianceKernel):
    """Covariance known only on a finite set of times; ``R(0, .) = 0`` is implied."""

    times: np.ndarray
    matrix: np.ndarray
    source: str = ""
    kind = "tabulated"

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        matrix = np.asarray(self.matrix, dtype=float)
        _check_grid(times)
        if matrix.shape != (times.size, times.size):
            raise StructuralError(f"matrix shape {matrix.shape} does not match {times.size} times")
        if not np.allclose(matrix, matrix.T, rtol=1e-12, atol=1e-14):
            raise StructuralError("tabulated covariance must be symmetric")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "matrix", matrix)

    def _index(self, x: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.times, x)
        idx = np.clip(idx, 0, self.times.size - 1)
        left = np.clip(idx - 1, 0, self.times.size - 1)
        idx = np.where(np.abs(self.times[left] - x) < np.abs(self.times[idx] - x), left, idx)
        zero = x == 0
        bad = ~zero & ~np.isclose(self.times[idx], x, rtol=1e-12, atol=1e-14)
        if np.any(bad):
            raise DomainError(f"time {x[bad][0]!r} not in the tabulated grid")
        return np.where(zero, -1, idx)

    def __call__(self, s, t):
        s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
        i = self._index(s.ravel())
        j = self._index(t.ravel())
        vals = self.matrix[np.maximum(i, 0), np.maximum(j, 0)]
        vals = np.where((i < 0) | (j < 0), 0.0, vals)
        return vals.reshape(s.shape)

    def params(self):
        return {"source": self.source, "n_times": int(self.times.size)}


def load_tabulated_kernel(path) -> TabulatedKernel:
    """Read a covariance table from CSV.

    Two layouts are accepted:

    * long format with header ``s,t,value`` (one row per pair; symmetric
      entries may be given once);
    * square format whose header row lists the grid times and whose next
      rows are the matrix rows in the same order, optionally with an empty
      corner cell and each row prefixed by its time.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    header = [c.strip().lower() for c in rows[0]]
    if header == ["s", "t", "value"]:
        entries = [(float(a), float(b), float(v)) for a, b, v in rows[1:]]
        times = np.array(sorted({e[0] for e in entries} | {e[1] for e in entries}))
        pos = {t: i for i, t in enumerate(times)}
        M = np.full((times.size, times.size), np.nan)
        for s, t, v in entries:
            M[pos[s], pos[t]] = v
            M[pos[t], pos[s]] = v
        if np.isnan(M).any():
            raise StructuralError(f"{path}: covariance table is incomplete")
        return TabulatedKernel(times, M, str(path))
    try:
        if rows[0][0].strip() == "":
            # labelled layout: empty corner cell, each row starts with its time
            times = np.array([float(c) for c in rows[0][1:]])
            labels = np.array([float(r[0]) for r in rows[1:]])
            if not np.array_equal(labels, times):
                raise StructuralError(f"{path}: row labels do not match the header times")
            M = np.array([[float(c) for c in r[1:]] for r in rows[1:]])
        else:
            times = np.array([float(c) for c in rows[0]])
            M = np.array([[float(c) for c in r] for r in rows[1:]])
    except ValueError as exc:
        if isinstance(exc, StructuralError):
            raise
        raise StructuralError(f"{path}: unreadable covariance table ({exc})") from None
    return TabulatedKernel(times, M, str(path))


def rect_increment(kernel: CovarianceKernel, s, t, u, v) -> float:
    """``E[X_{s,t} X_{u,v}] = R(t,v) - R(t,u) - R(s,v) + R(s,u)``."""
    if s > t or u > v:
        raise DomainError("need s <= t and u <= v")
    # grouped so that s == t or u == v gives exactly 0
    return float((kernel(t, v) - kernel(s, v)) - (kernel(t, u) - kernel(s, u)))


def kernel_sigma(kernel: CovarianceKernel, grid) -> float:
    """``max_t sqrt(R(t, t))`` over the grid (finite-dimensional sigma)."""
    grid = np.asarray(grid, dtype=float)
    return float(np.sqrt(np.max(kernel(grid, grid))))


# ---------------------------------------------------------------------------
# seeds


@dataclass(frozen=True)
class SeedSpec:
    """Root seed plus a derivation path, e.g. ``(experiment_id, path_index)``.

    Streams are derived with ``numpy.random.SeedSequence`` spawn keys, so a
    given spec always produces the same numbers no matter which worker asks.
    """

    root: int
    path: tuple = ()

    def __post_init__(self):
        if not 0 <= int(self.root) < 2**64:
            raise DomainError("root seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "path", tuple(int(i) for i in self.path))

    def child(self, *idx: int) -> "SeedSpec":
        return SeedSpec(self.root, self.path + tuple(idx))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(self.root), spawn_key=self.path)))


# ---------------------------------------------------------------------------
# sampling

_chol_cache: dict = {}
_chol_lock = threading.Lock()


def _cholesky(kernel: CovarianceKernel, grid: np.ndarray) -> np.ndarray:
    key = (kernel, grid.tobytes())
    L = _chol_cache.get(key)
    if L is not None:
        return L
    G = kernel.gram(grid[1:])
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        jitter = 1e-12 * np.trace(G) / G.shape[0]
        try:
            L = np.linalg.cholesky(G + jitter * np.eye(G.shape[0]))
        except np.linalg.LinAlgError as exc:
            raise FactorizationError(
                f"Gram matrix of {kernel.describe()} is not positive semidefinite on this grid"
            ) from exc
    L.flags.writeable = False
    with _chol_lock:
        _chol_cache.setdefault(key, L)
    return _chol_cache[key]


def _validate_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    _check_grid(grid)
    if grid[0] != 0:
        raise StructuralError("sampling grids must start at t = 0")
    if grid.size < 2:
        raise StructuralError("sampling grids need at least two points")
    return grid


def sample_values(kernel: CovarianceKernel, grid, d: int, seed: SeedSpec, shortcut: bool = True) -> np.ndarray:
    """Array of shape ``(len(grid), d)`` holding one draw, zero at ``t = 0``."""
    grid = _validate_grid(grid)
    if d < 1:
        raise DomainError("number of components must be positive")
    n = grid.size - 1
    z = seed.generator().standard_normal((n, d))
    out = np.zeros((n + 1, d))
    if shortcut and isinstance(kernel, BrownianKernel):
        out[1:] = np.cumsum(np.sqrt(np.diff(grid))[:, None] * z, axis=0)
    else:
        out[1:] = _cholesky(kernel, grid) @ z
    return out


def sample_process(kernel: CovarianceKernel, grid, d: int, seed: SeedSpec, shortcut: bool = True) -> DiscretePath:
    """One exact draw of the d-dimensional process on ``grid``."""
    return DiscretePath(np.asarray(grid, dtype=float), sample_values(kernel, grid, d, seed, shortcut))


def uniform_grid(T: float, n: int) -> np.ndarray:
    """``n`` equal intervals on ``[0, T]``."""
    if T <= 0 or n < 1:
        raise DomainError("need T > 0 and n >= 1")
    return np.linspace(0.0, T, n + 1)


# ---------------------------------------------------------------------------
# Cameron-Martin paths (Brownian case)


def cm_norm_bm(path: DiscretePath) -> float:
    """``sqrt(sum |dh|^2 / dt)``, the H-norm of the linear interpolant."""
    dh = np.diff(path.values, axis=0)
    dt = np.diff(path.times)
    return math.sqrt(float(np.sum(np.sum(dh * dh, axis=1) / dt)))


@dataclass(frozen=True)
class CameronMartinPath:
    path: DiscretePath
    h_norm: float = field(default=None)

    def __post_init__(self):
        if self.h_norm is None:
            object.__setattr__(self, "h_norm", cm_norm_bm(self.path))

    def __neg__(self) -> "CameronMartinPath":
        return CameronMartinPath(-self.path, self.h_norm)


def cameron_martin_from_values(times, values) -> CameronMartinPath:
    """Deterministic constructor, e.g. ``h(t) = t``."""
    return CameronMartinPath(DiscretePath(times, values))


def sample_cameron_martin_bm(grid, d: int, scale: float, seed: SeedSpec) -> CameronMartinPath:
    """Piecewise-linear ``h`` with iid Gaussian slopes, rescaled so ``|h|_H = scale``."""
    if scale < 0:
        raise DomainError("scale must be nonnegative")
    grid = _validate_grid(grid)
    if scale == 0:
        return CameronMartinPath(DiscretePath(grid, np.zeros((grid.size, d))), 0.0)
    slopes = seed.generator().standard_normal((grid.size - 1, d))
    vals = np.zeros((grid.size, d))
    vals[1:] = np.cumsum(slopes * np.diff(grid)[:, None], axis=0)
    raw = cm_norm_bm(DiscretePath(grid, vals))
    vals *= scale / raw
    return CameronMartinPath(DiscretePath(grid, vals), scale)


def _grid_index(times: np.ndarray, x: float) -> int:
    i = int(np.argmin(np.abs(times - x)))
    if not math.isclose(times[i], x, rel_tol=1e-12, abs_tol=1e-15):
        raise DomainError(f"time {x!r} is not a grid point")
    return i


def one_variation(path: DiscretePath, s: float, t: float) -> float:
    """Total variation of the linear interpolant on ``[s, t]`` (grid points)."""
    i, j = _grid_index(path.times, s), _grid_index(path.times, t)
    dh = np.diff(path.values[i : j + 1], axis=0)
    return float(np.sum(np.sqrt(np.sum(dh * dh, axis=1))))


def cm_regularity_check(h: CameronMartinPath, s: float, t: float, sigma: float = 1.0) -> bool:
    """``|h|_{1-var;[s,t]} <= |h|_H sigma sqrt(t - s)`` (with 1e-12 slack)."""
    if t < s:
        raise DomainError("need s <= t")
    lhs = one_variation(h.path, s, t)
    rhs = h.h_norm * sigma * math.sqrt(t - s)
    return lhs <= rhs + 1e-12 * max(1.0, rhs)
