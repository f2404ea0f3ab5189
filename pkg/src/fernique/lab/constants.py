"""Closed-form integrability constants and the standard normal distribution."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import special

from ..errors import DomainError

# B_2, B_4, ..., B_20
_BERNOULLI_EVEN = (
    Fraction(1, 6),
    Fraction(-1, 30),
    Fraction(1, 42),
    Fraction(-1, 30),
    Fraction(5, 66),
    Fraction(-691, 2730),
    Fraction(7, 6),
    Fraction(-3617, 510),
    Fraction(43867, 798),
    Fraction(-174611, 330),
)
_EM_TERMS = tuple(float(b / math.factorial(2 * k)) for k, b in enumerate(_BERNOULLI_EVEN, start=1))
_EM_CUTOFF = 24


def zeta(s: float) -> float:
    """Riemann zeta for real ``s > 1`` by Euler-Maclaurin summation."""
    if not s > 1:
        raise DomainError(f"zeta(s) needs s > 1, got {s}")
    if math.isinf(s):
        return 1.0
    N = _EM_CUTOFF
    head = math.fsum(n ** (-s) for n in range(1, N))
    tail = N ** (1.0 - s) / (s - 1.0) + 0.5 * N ** (-s)
    # rising factorial s (s+1) ... (s+2k-2) times N^{-s-2k+1}
    rising = s
    power = N ** (-s - 1.0)
    for k, coef in enumerate(_EM_TERMS, start=1):
        tail += coef * rising * power
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        power /= N * N
    return head + tail


def normal_cdf(z):
    """Phi(z) = P(Z <= z)."""
    return 0.5 * special.erfc(-np.asarray(z, dtype=float) / math.sqrt(2.0))


def normal_sf(z):
    """Phi-bar(z) = 1 - Phi(z), computed without cancellation."""
    return 0.5 * special.erfc(np.asarray(z, dtype=float) / math.sqrt(2.0))


def normal_ppf(q):
    return special.ndtri(q)


INTERPRETATIONS = ("literal_2.4", "two_times_4")


@dataclass(frozen=True)
class FerniqueConstant:
    """An admissible exponent ``eta0`` plus how the statistic must be normalised.

    ``E exp(eta * threshold_scale * Y^2) < inf`` for every ``eta < value``,
    where ``Y`` is the norm the constant refers to.
    """

    value: float
    family: str
    inputs: dict = field(default_factory=dict)
    threshold_scale: float = 1.0
    notes: str = ""

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "eta0": self.value,
            "inputs": dict(self.inputs),
            "threshold_scale": self.threshold_scale,
            "notes": self.notes,
        }


def eta0_generic(c: float, sigma: float) -> FerniqueConstant:
    """``1 / (2 c^2 sigma^2)`` for a functional with translation constant ``c``."""
    if not (c > 0 and sigma > 0):
        raise DomainError(f"c and sigma must be positive, got c={c}, sigma={sigma}")
    return FerniqueConstant(1.0 / (2.0 * c * c * sigma * sigma), "generic", {"c": c, "sigma": sigma})


def bm_exponent_scale(T: float, p: float) -> float:
    """``T^{1 - 2/p}``: squared 1/p-Hölder norms on [0, T] are divided by this."""
    if not p > 2:
        raise DomainError(f"p > 2 required, got {p}")
    if not T > 0:
        raise DomainError(f"T > 0 required, got {T}")
    return T ** (1.0 - 2.0 / p)


def eta0_bm(T: float = 1.0, p: float | None = None) -> FerniqueConstant:
    """``1 / (1 + sqrt 2)`` for the 1/p-Hölder norm of enhanced Brownian motion."""
    scale = 1.0 if p is None else 1.0 / bm_exponent_scale(T, p)
    inputs = {"T": T} if p is None else {"T": T, "p": p}
    return FerniqueConstant(
        1.0 / (1.0 + math.sqrt(2.0)),
        "bm",
        inputs,
        threshold_scale=scale,
        notes="applies to the homogeneous 1/p-Hölder norm, p > 2",
    )


def c_uv(u: float, v: float, interpretation: str) -> float:
    """Young-integral constant ``base(1/u + 1/v) * zeta(1/u + 1/v)``.

    ``literal_2.4`` reads the base as ``2.4^a``; ``two_times_4`` as ``2 * 4^a``.
    """
    a = 1.0 / u + 1.0 / v
    if interpretation == "literal_2.4":
        base = 2.4**a
    elif interpretation == "two_times_4":
        base = 2.0 * 4.0**a
    else:
        raise DomainError(f"interpretation must be one of {INTERPRETATIONS}, got {interpretation!r}")
    return base * zeta(a)


def check_gaussian_params(rho: float, p: float) -> list[str]:
    problems = []
    if not 1 <= rho < 2:
        problems.append(f"rho in [1, 2) required, got {rho}")
    if not p > 2 * rho:
        problems.append(f"p > 2 rho required, got p={p}, rho={rho}")
    if not 1.0 / rho + 1.0 / p > 1:
        problems.append(f"1/rho + 1/p > 1 required, got {1.0 / rho + 1.0 / p}")
    return problems


def eta0_gaussian(rho: float, p: float, r_rho_var: float = 1.0, *, interpretation: str) -> FerniqueConstant:
    """Constant for the homogeneous p-variation of a Gaussian rough path.

    ``(sqrt2 3^{1/2-1/p} (sqrt(c_{rho,rho})^p + sqrt(c_{rho,p})^p / sqrt2)^{1/p})^{-2}``;
    the squared norm is divided by ``|R|_{rho-var}``.  ``interpretation``
    has no default on purpose: the base of ``c_{u,v}`` is ambiguous.
    """
    problems = check_gaussian_params(rho, p)
    if problems:
        raise DomainError("; ".join(problems))
    if not r_rho_var > 0:
        raise DomainError("|R|_{rho-var} must be positive")
    c_rr = c_uv(rho, rho, interpretation)
    c_rp = c_uv(rho, p, interpretation)
    inner = math.sqrt(c_rr) ** p + math.sqrt(c_rp) ** p / math.sqrt(2.0)
    denom = math.sqrt(2.0) * 3.0 ** (0.5 - 1.0 / p) * inner ** (1.0 / p)
    other = [i for i in INTERPRETATIONS if i != interpretation][0]
    return FerniqueConstant(
        denom**-2,
        "gaussian",
        {"rho": rho, "p": p, "r_rho_var": r_rho_var, "interpretation": interpretation,
         "c_rho_rho": c_rr, "c_rho_p": c_rp},
        threshold_scale=1.0 / r_rho_var,
        notes=f"alternative interpretation {other} available",
    )


def eta0_banach(p: float) -> FerniqueConstant:
    """``(sqrt2 3^{1/2-1/p} (1 + 1/sqrt2)^{1/p})^{-2}``; ``p = 2`` is the closed endpoint."""
    if not p >= 2:
        raise DomainError(f"p >= 2 required, got {p}")
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    denom = math.sqrt(2.0) * 3.0 ** (0.5 - inv_p) * (1.0 + 1.0 / math.sqrt(2.0)) ** inv_p
    return FerniqueConstant(
        denom**-2,
        "banach",
        {"p": p},
        notes="squared p-variation norm is divided by sigma_B^2 T",
    )
