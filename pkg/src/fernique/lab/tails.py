"""Empirical Gauss-tail exponents and exponential moments."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import DomainError, FitError

MIN_SAMPLES = 1000
DEFAULT_WINDOW = (0.95, 0.999)


@dataclass(frozen=True, eq=False)
class TailEstimate:
    """Quadratic fit ``-log P(Y >= x) ~ eta x^2 + beta x + gamma`` over a quantile window.

    ``eta_se`` is the weighted least-squares standard error (it ignores the
    correlation between survival values at neighbouring thresholds);
    ``eta_se_boot`` resamples the data and redoes the whole fit, and is the
    one used for comparisons.
    """

    sorted_samples: np.ndarray
    thresholds: np.ndarray
    survival: np.ndarray
    eta: float
    beta: float
    gamma: float
    eta_se: float
    beta_se: float
    eta_se_boot: float
    window: tuple
    n_samples: int
    n_boot: int

    @property
    def neg_log_survival(self) -> np.ndarray:
        return -np.log(self.survival)

    @property
    def t_stat(self) -> float:
        return self.eta / self.eta_se_boot if self.eta_se_boot > 0 else math.inf

    def quadratic_dominates(self) -> bool:
        """Quadratic term beats the linear one at the median fit threshold."""
        x = float(np.median(self.thresholds))
        return self.eta * x * x > abs(self.beta) * x

    def summary(self) -> dict:
        return {
            "eta_hat": self.eta,
            "beta": self.beta,
            "gamma": self.gamma,
            "eta_se": self.eta_se,
            "beta_se": self.beta_se,
            "eta_se_boot": self.eta_se_boot,
            "t_stat": self.t_stat,
            "quadratic_dominates": self.quadratic_dominates(),
            "window": list(self.window),
            "threshold_range": [float(self.thresholds[0]), float(self.thresholds[-1])],
            "n_samples": self.n_samples,
            "n_boot": self.n_boot,
        }


def _fit(sorted_y: np.ndarray, window, n_thresholds: int):
    n = sorted_y.size
    lo, hi = np.quantile(sorted_y, window)
    if not hi > lo:
        raise FitError(f"degenerate tail: window quantiles coincide at {lo!r}")
    x = np.linspace(lo, hi, n_thresholds)
    counts = n - np.searchsorted(sorted_y, x, side="left")
    surv = counts / n
    keep = (surv > 0) & (surv < 1)
    x, surv = x[keep], surv[keep]
    if np.unique(surv).size < 3:
        raise FitError("fewer than three distinct survival levels inside the fit window")
    y = -np.log(surv)
    # var(log P) ~ (1 - P) / (n P)
    w = n * surv / (1.0 - surv)
    A = np.column_stack([x * x, x, np.ones_like(x)])
    Aw = A * w[:, None]
    cov = np.linalg.inv(A.T @ Aw)
    coef = cov @ (Aw.T @ y)
    return x, surv, coef, np.sqrt(np.diag(cov))


def estimate_tail(
    samples,
    fit_window=DEFAULT_WINDOW,
    n_thresholds: int = 40,
    n_boot: int = 200,
    seed: int = 0,
) -> TailEstimate:
    """Fit the Gauss-tail exponent of a nonnegative sample."""
    y = np.sort(np.asarray(samples, dtype=float).ravel())
    if y.size < MIN_SAMPLES:
        raise DomainError(f"need at least {MIN_SAMPLES} samples, got {y.size}")
    lo, hi = fit_window
    if not 0.5 < lo < hi <= 0.9999:
        raise DomainError(f"fit window must satisfy 0.5 < lo < hi <= 0.9999, got {fit_window}")
    if not np.all(np.isfinite(y)):
        raise DomainError("samples must be finite")
    x, surv, coef, se = _fit(y, fit_window, n_thresholds)
    boot = []
    rng = np.random.Generator(np.random.PCG64(seed))
    for _ in range(n_boot):
        res = np.sort(y[rng.integers(0, y.size, y.size)])
        try:
            boot.append(_fit(res, fit_window, n_thresholds)[2][0])
        except FitError:
            continue
    boot_se = float(np.std(boot, ddof=1)) if len(boot) > 1 else math.nan
    return TailEstimate(
        sorted_samples=y,
        thresholds=x,
        survival=surv,
        eta=float(coef[0]),
        beta=float(coef[1]),
        gamma=float(coef[2]),
        eta_se=float(se[0]),
        beta_se=float(se[1]),
        eta_se_boot=boot_se,
        window=tuple(fit_window),
        n_samples=int(y.size),
        n_boot=len(boot),
    )


def compare_to_constant(est: TailEstimate, eta0: float, factor: float = 1.0, eps: float = 0.0) -> dict:
    """One-sided check ``eta_hat >= factor * eta0 / (1 + eps)^2``.

    ``eps`` is the optional slack of the threshold ``(1 + eps) c sigma r``.
    """
    target = factor * eta0 / (1.0 + eps) ** 2
    return {"eta_hat": est.eta, "eta0": eta0, "factor": factor, "eps": eps,
            "target": target, "pass": bool(est.eta >= target)}


class ExpMoment(NamedTuple):
    mean: float
    stability_ratio: float
    n_overflow: int


def exp_moment(samples, eta: float) -> ExpMoment:
    """Sample mean of ``exp(eta Y^2)`` and the ratio of its two half-sample means.

    Ratios far from 1 that worsen as the sample grows point at a divergent
    moment.  Overflowing terms make the mean ``inf`` and are counted.
    """
    if eta < 0:
        raise DomainError("eta must be nonnegative")
    y = np.asarray(samples, dtype=float).ravel()
    if y.size < 2:
        raise DomainError("need at least two samples")
    with np.errstate(over="ignore"):
        vals = np.exp(eta * y * y)
    n_over = int(np.sum(np.isinf(vals)))
    half = y.size // 2
    m1, m2 = float(np.mean(vals[:half])), float(np.mean(vals[half : 2 * half]))
    ratio = m1 / m2 if math.isfinite(m1) and math.isfinite(m2) else math.nan
    return ExpMoment(float(np.mean(vals)), ratio, n_over)
