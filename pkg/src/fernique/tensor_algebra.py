"""Step-N truncated tensor algebra over R^d.

Group elements are stored level by level as flattened tensors: level ``k``
is a float array of length ``d**k`` (row-major, so entry ``(i1, ..., ik)``
sits at ``i1*d**(k-1) + ... + ik``).  The level-0 coefficient is always 1
and is not stored.

The ``_batch_*`` helpers work on lists of arrays with arbitrary leading
batch axes, e.g. ``(n_times, d**k)``; they are what the path code uses.
The :class:`GroupElement` methods are thin wrappers around them.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DomainError, StructuralError

MAX_DEPTH = 5


class TensorNorm(str, Enum):
    """Norm applied to tensor levels k >= 2 (level 1 is always Euclidean)."""

    FROBENIUS = "frobenius"
    MAX_ENTRY = "max_entry"


def _as_norm(norm) -> TensorNorm:
    return norm if isinstance(norm, TensorNorm) else TensorNorm(norm)


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Flattened tensor product over the last axis, broadcasting batch axes."""
    prod = a[..., :, None] * b[..., None, :]
    return prod.reshape(prod.shape[:-2] + (a.shape[-1] * b.shape[-1],))


def _batch_chen(a: Sequence[np.ndarray], b: Sequence[np.ndarray]) -> list[np.ndarray]:
    depth = len(a)
    out = []
    for k in range(1, depth + 1):
        level = a[k - 1] + b[k - 1]
        for i in range(1, k):
            level = level + _outer(a[i - 1], b[k - i - 1])
        out.append(level)
    return out


def _batch_inverse(g: Sequence[np.ndarray]) -> list[np.ndarray]:
    # g^{-1} = sum_m (-(g - 1))^{⊗m}, truncated
    depth = len(g)
    out: list[np.ndarray] = []
    for k in range(1, depth + 1):
        # level k of inverse: -g_k - sum_{i=1}^{k-1} inv_i ⊗ g_{k-i}
        level = -g[k - 1]
        for i in range(1, k):
            level = level - _outer(out[i - 1], g[k - i - 1])
        out.append(level)
    return out


def _batch_increment(gs: Sequence[np.ndarray], gt: Sequence[np.ndarray]) -> list[np.ndarray]:
    """``gs^{-1} ⊗ gt`` for batched points."""
    return _batch_chen(_batch_inverse(gs), gt)


def _level_norm(x: np.ndarray, k: int, norm: TensorNorm) -> np.ndarray:
    if k == 1 or norm is TensorNorm.FROBENIUS:
        return np.sqrt(np.sum(x * x, axis=-1))
    return np.max(np.abs(x), axis=-1)


def _batch_homogeneous_norm(g: Sequence[np.ndarray], norm=TensorNorm.FROBENIUS) -> np.ndarray:
    norm = _as_norm(norm)
    vals = [_level_norm(lvl, k, norm) ** (1.0 / k) for k, lvl in enumerate(g, start=1)]
    return np.max(np.stack(vals), axis=0)


@dataclass(frozen=True, eq=False)
class GroupElement:
    """Point of the step-N free nilpotent group / truncated tensor algebra.

    Parameters
    ----------
    dim : int
        Dimension ``d`` of the underlying space.
    levels : tuple of ndarray
        Flattened tensors for levels ``1..N``; level ``k`` has ``d**k`` entries.
    """

    dim: int
    levels: tuple

    def __post_init__(self):
        d = self.dim
        if d < 1:
            raise DomainError(f"dimension must be positive, got {d}")
        if not 2 <= len(self.levels) <= MAX_DEPTH:
            raise DomainError(f"depth must lie in [2, {MAX_DEPTH}], got {len(self.levels)}")
        frozen = []
        for k, lvl in enumerate(self.levels, start=1):
            arr = np.array(lvl, dtype=float).reshape(-1)
            if arr.size != d**k:
                raise StructuralError(f"level {k} must have {d**k} entries, got {arr.size}")
            if not np.all(np.isfinite(arr)):
                raise DomainError(f"level {k} has non-finite entries")
            arr.flags.writeable = False
            frozen.append(arr)
        object.__setattr__(self, "levels", tuple(frozen))

    @property
    def depth(self) -> int:
        return len(self.levels)

    def level(self, k: int) -> np.ndarray:
        """Level ``k`` reshaped as a ``(d,)*k`` tensor (read-only view)."""
        return self.levels[k - 1].reshape((self.dim,) * k)

    @classmethod
    def identity(cls, dim: int, depth: int) -> "GroupElement":
        return cls(dim, tuple(np.zeros(dim**k) for k in range(1, depth + 1)))

    @classmethod
    def from_tensors(cls, *tensors) -> "GroupElement":
        """Build from shaped level tensors ``x1, x2, ...``."""
        x1 = np.asarray(tensors[0], dtype=float)
        return cls(x1.size, tuple(np.asarray(t, dtype=float).reshape(-1) for t in tensors))

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return chen_product(self, other)

    def allclose(self, other: "GroupElement", rtol: float = 1e-12, atol: float = 1e-12) -> bool:
        if self.dim != other.dim or self.depth != other.depth:
            return False
        return all(np.allclose(a, b, rtol=rtol, atol=atol) for a, b in zip(self.levels, other.levels))

    def __repr__(self):
        return f"GroupElement(dim={self.dim}, depth={self.depth}, levels={[lvl.tolist() for lvl in self.levels]})"


def _check_compatible(a: GroupElement, b: GroupElement) -> None:
    if a.dim != b.dim:
        raise StructuralError(f"dimension mismatch: {a.dim} != {b.dim}")
    if a.depth != b.depth:
        raise StructuralError(f"depth mismatch: {a.depth} != {b.depth}")


def chen_product(a: GroupElement, b: GroupElement) -> GroupElement:
    """Truncated tensor product ``a ⊗ b``."""
    _check_compatible(a, b)
    return GroupElement(a.dim, tuple(_batch_chen(a.levels, b.levels)))


def inverse(g: GroupElement) -> GroupElement:
    return GroupElement(g.dim, tuple(_batch_inverse(g.levels)))


def dilate(g: GroupElement, lam: float) -> GroupElement:
    """Scale level ``k`` by ``lam**k``."""
    return GroupElement(g.dim, tuple(lvl * lam**k for k, lvl in enumerate(g.levels, start=1)))


def segment_exp(v, depth: int) -> GroupElement:
    """Signature of the straight segment with increment ``v``: level k is v^⊗k / k!."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if depth > MAX_DEPTH:
        raise DomainError(f"depth {depth} exceeds maximum {MAX_DEPTH}")
    return GroupElement(v.size, tuple(_batch_segment_exp(v, depth)))


def _batch_segment_exp(v: np.ndarray, depth: int) -> list[np.ndarray]:
    levels = [v.copy()]
    for k in range(2, depth + 1):
        levels.append(_outer(levels[-1], v) / k)
    return levels


def homogeneous_norm(g: GroupElement, norm=TensorNorm.FROBENIUS) -> float:
    """``max_k |g^k|^{1/k}``."""
    return float(_batch_homogeneous_norm(g.levels, norm))


def tensor_norm(x, norm=TensorNorm.FROBENIUS) -> float:
    """Norm of a single (shaped or flat) tensor of order >= 2."""
    x = np.asarray(x, dtype=float).reshape(-1)
    return float(_level_norm(x, 2, _as_norm(norm)))


def levy_area(g: GroupElement) -> np.ndarray:
    """Antisymmetric part of level 2, ``(x2 - x2^T) / 2``."""
    m = g.level(2)
    return 0.5 * (m - m.T)
