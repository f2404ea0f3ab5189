"""Monte Carlo check of Gaussian isoperimetry in R^n.

For a standard Gaussian vector ``Z`` and a set ``A`` with ``mu(A) = Phi(a)``,
the enlargement ``A + rK`` (``K`` the Euclidean unit ball) should carry mass
at least ``Phi(a + r)``.  ``A + rK`` is the set of points within distance
``r`` of ``A``, so every set family only needs a distance function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, NumericalError, RefusalError
from ..gaussian_processes import SeedSpec
from .constants import normal_cdf, normal_ppf


class GaussianSet:
    dim: int | None = None

    def distance(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    def exact_measure(self) -> float | None:
        return None


@dataclass(frozen=True)
class HalfSpace(GaussianSet):
    """``{x : x_1 <= a}``."""

    a: float

    def distance(self, x):
        return np.maximum(x[:, 0] - self.a, 0.0)

    def describe(self):
        return f"halfspace:{self.a!r}"

    def exact_measure(self):
        return float(normal_cdf(self.a))


@dataclass(frozen=True)
class Ball(GaussianSet):
    radius: float
    center: tuple = ()

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("ball radius must be positive")

    def _center(self, n):
        if not self.center:
            return np.zeros(n)
        if len(self.center) != n:
            raise DomainError(f"ball center has {len(self.center)} coordinates, dimension is {n}")
        return np.asarray(self.center, dtype=float)

    def distance(self, x):
        return np.maximum(np.linalg.norm(x - self._center(x.shape[1]), axis=1) - self.radius, 0.0)

    def describe(self):
        c = ",".join(repr(float(v)) for v in self.center)
        return f"ball:{self.radius!r}" + (f":{c}" if c else "")


@dataclass(frozen=True)
class Box(GaussianSet):
    """``[-half_width, half_width]^n``; projection is coordinatewise clipping."""

    half_width: float

    def __post_init__(self):
        if not self.half_width > 0:
            raise DomainError("box half width must be positive")

    def distance(self, x):
        w = self.half_width
        return np.linalg.norm(x - np.clip(x, -w, w), axis=1)

    def describe(self):
        return f"box:{self.half_width!r}"


class Polytope(GaussianSet):
    """``{x : A x <= b}``, distances by Dykstra's alternating projections."""

    def __init__(self, A, b, label: str | None = None, tol: float = 1e-12, max_iter: int = 20000):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).ravel()
        if A.shape[0] != b.size:
            raise DomainError("A and b disagree on the number of facets")
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms == 0):
            raise DomainError("facet normals must be nonzero")
        self.A = A / norms[:, None]
        self.b = b / norms
        self.label = label
        self.tol = tol
        self.max_iter = max_iter

    @classmethod
    def regular_polygon(cls, n_dim: int, k: int, offset: float) -> "Polytope":
        """Regular ``k``-gon with inradius ``offset`` in the first two coordinates (a prism for ``n > 2``)."""
        if n_dim < 2:
            raise DomainError("regular polygon needs dimension >= 2")
        if k < 3:
            raise DomainError("a polygon needs at least 3 facets")
        ang = 2 * np.pi * np.arange(k) / k
        A = np.zeros((k, n_dim))
        A[:, 0], A[:, 1] = np.cos(ang), np.sin(ang)
        return cls(A, np.full(k, float(offset)), label=f"polytope:{k}:{offset!r}")

    def project(self, x: np.ndarray) -> np.ndarray:
        """Euclidean projection of each row of ``x`` onto the polytope."""
        if x.shape[1] != self.A.shape[1]:
            raise DomainError("point dimension does not match the polytope")
        y = x.copy()
        incr = np.zeros((self.A.shape[0],) + x.shape)
        for _ in range(self.max_iter):
            prev = y.copy()
            for i, (a, b) in enumerate(zip(self.A, self.b)):
                z = y + incr[i]
                viol = np.maximum(z @ a - b, 0.0)
                y_new = z - viol[:, None] * a
                incr[i] = z - y_new
                y = y_new
            if np.max(np.abs(y - prev), initial=0.0) <= self.tol:
                return y
        raise NumericalError(f"Dykstra projection did not converge in {self.max_iter} sweeps")

    def distance(self, x):
        out = np.zeros(x.shape[0])
        outside = np.any(x @ self.A.T > self.b, axis=1)
        if outside.any():
            xo = x[outside]
            out[outside] = np.linalg.norm(xo - self.project(xo), axis=1)
        return out

    def describe(self):
        return self.label or f"polytope:{self.A.shape[0]}facets"


def parse_set(spec: str, n_dim: int) -> GaussianSet:
    """Parse ``halfspace:a``, ``ball:r[:c1,c2,...]``, ``box:w`` or ``polytope:k:offset``."""
    kind, _, rest = spec.partition(":")
    args = rest.split(":") if rest else []
    try:
        if kind == "halfspace" and len(args) == 1:
            return HalfSpace(float(args[0]))
        if kind == "ball" and len(args) in (1, 2):
            center = tuple(float(v) for v in args[1].split(",")) if len(args) == 2 else ()
            return Ball(float(args[0]), center)
        if kind == "box" and len(args) == 1:
            return Box(float(args[0]))
        if kind == "polytope" and len(args) == 2:
            return Polytope.regular_polygon(n_dim, int(args[0]), float(args[1]))
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"cannot parse set {spec!r}: {exc}") from None
    raise DomainError(f"unknown set specification {spec!r}")


@dataclass(frozen=True)
class BorellCheckReport:
    """``margin[j] = mu_hat(A + r_j K) - Phi(a + r_j)`` with ``a = Phi^{-1}(mu_hat(A))``."""

    dim: int
    set_description: str
    r_grid: np.ndarray
    n_samples: int
    mu_A: float
    a: float
    mu_enlarged: np.ndarray
    bound: np.ndarray
    margin: np.ndarray
    se: np.ndarray

    def z_scores(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.se > 0, self.margin / np.where(self.se > 0, self.se, 1.0), 0.0)

    def min_margin_in_se(self) -> float:
        return float(np.min(self.z_scores()))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "set": self.set_description,
            "n_samples": self.n_samples,
            "mu_A": self.mu_A,
            "a": self.a,
            "r": self.r_grid.tolist(),
            "mu_enlarged": self.mu_enlarged.tolist(),
            "bound": self.bound.tolist(),
            "margin": self.margin.tolist(),
            "se": self.se.tolist(),
        }


def _normal_pdf(z):
    return np.exp(-0.5 * np.asarray(z) ** 2) / math.sqrt(2 * math.pi)


def borell_check(n: int, gset: GaussianSet, r_grid, N: int, seed: SeedSpec) -> BorellCheckReport:
    """Estimate ``mu(A + rK)`` for every ``r`` from one shared sample.

    The standard error linearises ``a = Phi^{-1}(mu_hat(A))``: the margin is a
    sample mean of ``1{A_r} - (phi(a + r) / phi(a)) 1{A}`` up to O(1/N).
    """
    if n < 1:
        raise DomainError("dimension must be at least 1")
    if N < 2:
        raise DomainError("need at least two samples")
    r = np.asarray(r_grid, dtype=float).ravel()
    if r.size == 0 or np.any(r < 0) or not np.all(np.isfinite(r)):
        raise DomainError("r grid must be nonempty, finite and nonnegative")
    z = seed.generator().standard_normal((N, n))
    dist = gset.distance(z)
    in_A = dist == 0.0
    mu_A = float(in_A.mean())
    if mu_A in (0.0, 1.0):
        raise RefusalError(f"estimated mu(A) = {mu_A}: the quantile a is infinite")
    a = float(normal_ppf(mu_A))
    inside = dist[None, :] <= r[:, None]
    mu_r = inside.mean(axis=1)
    bound = normal_cdf(a + r)
    slope = _normal_pdf(a + r) / _normal_pdf(a)
    D = inside - slope[:, None] * in_A[None, :]
    se = D.std(axis=1, ddof=1) / math.sqrt(N)
    return BorellCheckReport(n, gset.describe(), r, N, mu_A, a, mu_r, np.asarray(bound), mu_r - bound, se)
