"""Rough-path lifts of sampled paths, Cameron-Martin translation and scaling."""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import DomainError, StructuralError
from .gaussian_processes import CameronMartinPath, CovarianceKernel, SeedSpec, sample_values
from .path_norms import DiscretePath, RoughPath
from .tensor_algebra import (
    MAX_DEPTH,
    TensorNorm,
    _as_norm,
    _batch_chen,
    _batch_homogeneous_norm,
    _batch_increment,
    _batch_inverse,
    _batch_segment_exp,
    _outer,
)


@dataclass(frozen=True)
class LiftConfig:
    depth: int = 2
    norm: TensorNorm = TensorNorm.FROBENIUS
    refinement_levels: int = 0

    def __post_init__(self):
        if not 2 <= self.depth <= MAX_DEPTH:
            raise DomainError(f"depth must lie in [2, {MAX_DEPTH}], got {self.depth}")
        object.__setattr__(self, "norm", _as_norm(self.norm))


def _lift_depth2(values: np.ndarray) -> list[np.ndarray]:
    dx = np.diff(values, axis=0)
    seg = _outer(values[:-1], dx) + 0.5 * _outer(dx, dx)
    lvl2 = np.zeros((values.shape[0], values.shape[1] ** 2))
    np.cumsum(seg, axis=0, out=lvl2[1:])
    return [values.copy(), lvl2]


def lift_values(values: np.ndarray, depth: int = 2) -> list[np.ndarray]:
    """Signature levels of the linear interpolant of ``values`` (rows = grid points)."""
    values = np.asarray(values, dtype=float)
    if depth == 2:
        return _lift_depth2(values)
    n, d = values.shape
    out = [np.zeros((n, d**k)) for k in range(1, depth + 1)]
    current = [lvl[0] for lvl in out]
    for i, dx in enumerate(np.diff(values, axis=0), start=1):
        current = _batch_chen(current, _batch_segment_exp(dx, depth))
        for k in range(depth):
            out[k][i] = current[k]
    return out


def lift_piecewise_linear(path: DiscretePath, cfg: LiftConfig = LiftConfig()) -> RoughPath:
    """Exact level-N signature of the piecewise-linear interpolant, at every grid time.

    Point ``j`` is the running product ``exp(dx_0) ⊗ ... ⊗ exp(dx_{j-1})``.
    """
    return RoughPath(path.times, path.dim, tuple(lift_values(path.values, cfg.depth)))


def _cumulative(seg: np.ndarray) -> np.ndarray:
    out = np.zeros((seg.shape[0] + 1, seg.shape[1]))
    np.cumsum(seg, axis=0, out=out[1:])
    return out


def translate(X: RoughPath, underlying: DiscretePath, h) -> RoughPath:
    """Lift of ``x + h`` written through the lift of ``x``.

    Level 2 becomes ``X^2 + ∫x⊗dh + ∫h⊗dx + ∫h⊗dh``, each integral an exact
    Riemann-Stieltjes integral of linear interpolants.  ``∫h⊗dx`` is taken
    through integration by parts, ``h_t⊗x_t - ∫dh⊗x``.
    """
    hp = h.path if isinstance(h, CameronMartinPath) else h
    if X.depth != 2:
        raise StructuralError("translation is implemented for depth-2 rough paths only")
    if not (np.array_equal(X.times, underlying.times) and np.array_equal(X.times, hp.times)):
        raise StructuralError("rough path, underlying path and shift must share the grid")
    if not X.dim == underlying.dim == hp.dim:
        raise StructuralError("dimension mismatch between rough path, path and shift")
    x, hv = underlying.values, hp.values
    dx, dh = np.diff(x, axis=0), np.diff(hv, axis=0)
    x_dh = _cumulative(_outer(x[:-1], dh) + 0.5 * _outer(dx, dh))
    dh_x = _cumulative(_outer(dh, x[:-1]) + 0.5 * _outer(dh, dx))
    h_dx = _outer(hv, x) - dh_x
    h_dh = _cumulative(_outer(hv[:-1], dh) + 0.5 * _outer(dh, dh))
    lvl1 = X.levels[0] + hv
    lvl2 = X.levels[1] + x_dh + h_dx + h_dh
    lvl1[0] = 0.0
    lvl2[0] = 0.0
    return RoughPath(X.times, X.dim, (lvl1, lvl2))


def scale_rough_path(X: RoughPath, c: float, mode: str = "brownian", hurst: float | None = None) -> RoughPath:
    """Time change ``t -> c t`` with the matching space dilation.

    ``brownian`` dilates by ``c^{1/2}``, ``fbm`` by ``c^H``.
    """
    if c <= 0:
        raise DomainError("time factor must be positive")
    if mode == "brownian":
        lam = c**0.5
    elif mode == "fbm":
        if hurst is None or not 0 < hurst < 1:
            raise DomainError("fbm scaling needs a Hurst parameter in (0, 1)")
        lam = c**hurst
    else:
        raise DomainError(f"unknown scaling mode {mode!r}")
    levels = tuple(lvl * lam**k for k, lvl in enumerate(X.levels, start=1))
    return RoughPath(X.times * c, X.dim, levels)


# ---------------------------------------------------------------------------
# dyadic refinement


def dyadic_distances(values: np.ndarray, T: float, depth: int, p: float, norm=TensorNorm.FROBENIUS) -> list:
    """Distances between lifts at consecutive dyadic levels of one sampled path.

    ``values`` sits on the finest grid with ``2**L`` intervals.  For each
    ``k < L`` the level-k and level-(k+1) lifts are compared on the level-k
    grid through the profile ``D(s, t) = |X^{(k)}_{s,t}^{-1} ⊗ X^{(k+1)}_{s,t}|``
    (homogeneous norm); the distance is its p-variation
    ``(sup_D sum D(t_i, t_{i+1})^p)^{1/p}``.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0] - 1
    L = int(round(np.log2(n))) if n > 0 else -1
    if L < 1 or 2**L != n:
        raise StructuralError("finest grid must have a power-of-two number of intervals")
    if p < depth:
        raise DomainError(f"p >= N required (p={p}, N={depth})")
    norm = _as_norm(norm)
    max_entry = norm is TensorNorm.MAX_ENTRY
    out = []
    for k in range(L):
        coarse = values[:: 2 ** (L - k)]
        fine = values[:: 2 ** (L - k - 1)]
        a = lift_values(coarse, depth)
        b = [np.ascontiguousarray(lvl[::2]) for lvl in lift_values(fine, depth)]
        if depth == 2:
            total = _kernels.pvar_pair_distance_depth2(a[0], a[1], b[0], b[1], float(p), max_entry)
        else:
            total = _generic_pvar_distance(a, b, p, norm)
        out.append((k, float(total) ** (1.0 / p)))
    return out


def _generic_pvar_distance(a, b, p, norm) -> float:
    n = a[0].shape[0]
    V = np.full(n, -1.0)
    V[0] = 0.0
    for i in range(n - 1):
        inc_a = _batch_increment([lvl[i][None] for lvl in a], [lvl[i + 1 :] for lvl in a])
        inc_b = _batch_increment([lvl[i][None] for lvl in b], [lvl[i + 1 :] for lvl in b])
        D = _batch_homogeneous_norm(_batch_chen(_batch_inverse(inc_a), inc_b), norm)
        np.maximum(V[i + 1 :], V[i] + D**p, out=V[i + 1 :])
    return float(V[-1])


def dyadic_convergence_diagnostic(
    kernel: CovarianceKernel,
    T: float,
    d: int,
    depth: int,
    max_level: int,
    p: float,
    seed: SeedSpec,
    norm=TensorNorm.FROBENIUS,
) -> list:
    """Sample one path on the ``2**max_level`` dyadic grid and report lift distances."""
    if not 1 <= max_level <= 14:
        raise DomainError("max_level must lie in [1, 14]")
    if p < depth:
        raise DomainError(f"p >= N required (p={p}, N={depth})")
    grid = np.linspace(0.0, T, 2**max_level + 1)
    values = sample_values(kernel, grid, d, seed)
    return dyadic_distances(values, T, depth, p, norm)


# ---------------------------------------------------------------------------
# CSV layout: one row per grid time; columns time, x1_<i>, x2_<i>_<j>, ...


def rough_path_header(dim: int, depth: int) -> list[str]:
    cols = ["time"]
    for k in range(1, depth + 1):
        for idx in itertools.product(range(1, dim + 1), repeat=k):
            cols.append(f"x{k}_" + "_".join(map(str, idx)))
    return cols


def write_rough_path_csv(X: RoughPath, dest) -> None:
    """Write with 17 significant digits so values round-trip exactly."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(rough_path_header(X.dim, X.depth))
    table = np.column_stack([X.times] + list(X.levels))
    for row in table:
        w.writerow([format(v, ".17g") for v in row])
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(buf.getvalue())
    else:
        dest.write(buf.getvalue())


def read_rough_path_csv(src) -> RoughPath:
    text = Path(src).read_text() if isinstance(src, (str, Path)) else src.read()
    rows = list(csv.reader(io.StringIO(text)))
    header = rows[0]
    dim = sum(1 for c in header if c.startswith("x1_"))
    depth = max(int(c.split("_")[0][1:]) for c in header[1:])
    if header != rough_path_header(dim, depth):
        raise StructuralError("unexpected rough path CSV header")
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    levels, col = [], 1
    for k in range(1, depth + 1):
        levels.append(data[:, col : col + dim**k])
        col += dim**k
    return RoughPath(data[:, 0], dim, tuple(levels))
