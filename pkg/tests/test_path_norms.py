import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fernique.errors import DomainError, RefusalError, StructuralError
from fernique.gaussian_processes import BrownianKernel, FractionalBrownianKernel, TabulatedKernel, rect_increment
from fernique.path_norms import (
    DiscretePath,
    RoughPath,
    covariance_2d_rho_var,
    hoelder_levels,
    hoelder_norm,
    homogeneous_pvar,
    homogeneous_pvar_norm,
    psi,
    psi_variation,
    psi_variation_functional,
    psi_variation_norm,
    psi_variation_norm_details,
    pvar_bruteforce,
    pvar_level,
)
from fernique.rough_lift import lift_values
from fernique.tensor_algebra import TensorNorm, homogeneous_norm


def rough(values, times=None, depth=2):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    values = values - values[0]
    if times is None:
        times = np.linspace(0, 1, values.shape[0])
    return RoughPath(times, values.shape[1], tuple(lift_values(values, depth)))


def random_rough(rng, n, d=2, depth=2, uniform=False):
    if uniform:
        times = np.linspace(0, 1, n + 1)
    else:
        times = np.concatenate([[0.0], np.cumsum(rng.uniform(0.2, 1.0, n))])
    vals = np.vstack([np.zeros(d), np.cumsum(rng.standard_normal((n, d)), axis=0)])
    return rough(vals, times, depth)


def oracle_level_sum(path, level, exponent, norm=TensorNorm.FROBENIUS):
    """Independent enumeration using GroupElement increments."""
    n = path.n_points - 1
    best, arg = -1.0, None
    for mask in itertools.product((0, 1), repeat=n - 1):
        part = [0] + [i + 1 for i, m in enumerate(mask) if m] + [n]
        total = 0.0
        for a, b in zip(part[:-1], part[1:]):
            g = path.increment(a, b)
            x = g.levels[level - 1]
            nv = np.linalg.norm(x) if (level == 1 or norm is TensorNorm.FROBENIUS) else np.max(np.abs(x))
            total += nv**exponent
        if total > best:
            best, arg = total, tuple(part)
    return best, arg


# --- examples


def test_monotone_scalar_path():
    X = rough([0.0, 1.0, 2.0])
    r = pvar_level(X, 1, 2.0)
    assert r.value == pytest.approx(4.0)
    assert r.optimal_partition == (0, 2)
    assert pvar_bruteforce(X, 1, 2.0).optimal_partition == (0, 2)


def test_zigzag_scalar_path():
    r = pvar_level(rough([0.0, 1.0, 0.0]), 1, 2.0)
    assert r.value == pytest.approx(2.0)
    assert r.optimal_partition == (0, 1, 2)


def test_two_point_path():
    X = rough([[0.0, 0.0], [3.0, 4.0]])
    assert pvar_level(X, 1, 2.5).value == pytest.approx(5.0**2.5)
    assert pvar_bruteforce(X, 1, 2.5).value == pytest.approx(5.0**2.5)


def test_straight_segment_norm():
    v = np.array([3.0, 4.0])
    X = rough(np.array([[0.0, 0.0], v]))
    assert homogeneous_pvar_norm(X, 2.0) == pytest.approx(5.0)
    lvl2 = homogeneous_pvar(X, 2.0).level_values[2]
    assert lvl2 == pytest.approx(math.sqrt(np.linalg.norm(0.5 * np.outer(v, v))))
    assert lvl2 <= 5.0


def test_constant_path_norms():
    X = rough(np.zeros((5, 2)))
    assert homogeneous_pvar_norm(X, 2.5) == 0.0
    assert hoelder_norm(X, 2.5) == 0.0


def test_identity_exponent_below_one_rejected():
    X = rough([0.0, 1.0, 0.5])
    with pytest.raises(DomainError):
        pvar_level(X, 2, 0.9)
    with pytest.raises(DomainError):
        homogeneous_pvar_norm(X, 1.5)
    with pytest.raises(DomainError):
        hoelder_norm(X, 1.5)


def test_bruteforce_refuses_large_grids(rng):
    with pytest.raises(RefusalError):
        pvar_bruteforce(random_rough(rng, 15), 1, 2.0)


def test_hoelder_linear_path():
    t = np.linspace(0, 1, 33)
    for p in (2.0, 2.5, 4.0):
        assert hoelder_levels(rough(t, t), p)[0] == pytest.approx(1.0, rel=1e-12)


def test_hoelder_single_point_grid():
    X = RoughPath(np.array([0.0]), 1, (np.zeros((1, 1)), np.zeros((1, 1))))
    with pytest.raises(DomainError):
        hoelder_norm(X, 2.5)


def test_rough_path_structure_checks():
    with pytest.raises(StructuralError):
        RoughPath(np.array([0.0, 1.0]), 1, (np.array([[1.0], [2.0]]), np.zeros((2, 1))))
    with pytest.raises(ValueError):
        RoughPath(np.array([0.0, 0.0]), 1, (np.zeros((2, 1)), np.zeros((2, 1))))
    with pytest.raises(ValueError):
        DiscretePath(np.array([0.0, 1.0]), np.array([[1.0], [2.0]]))


# --- oracle equivalence


@pytest.mark.parametrize("p", [2.1, 2.5, 3.0, 4.0])
def test_dp_matches_independent_oracle(rng, p):
    for _ in range(10):
        X = random_rough(rng, int(rng.integers(2, 9)))
        for level in (1, 2):
            dp = pvar_level(X, level, p / level)
            ref, part = oracle_level_sum(X, level, p / level)
            assert dp.value == pytest.approx(ref, rel=1e-12)
            assert dp.optimal_partition == part


def test_optimal_partition_reproduces_value(rng):
    X = random_rough(rng, 40)
    r = pvar_level(X, 2, 1.5)
    total = sum(np.linalg.norm(X.increment(a, b).levels[1]) ** 1.5 for a, b in zip(r.optimal_partition[:-1], r.optimal_partition[1:]))
    assert r.optimal_partition[0] == 0 and r.optimal_partition[-1] == X.n_points - 1
    assert np.all(np.diff(r.optimal_partition) > 0)
    assert total == pytest.approx(r.value, rel=1e-12)


def test_hoelder_matches_naive_pairs(rng):
    for uniform in (False, True):
        for norm in TensorNorm:
            X = random_rough(rng, 25, d=3, uniform=uniform)
            p = 2.7
            ref = max(
                homogeneous_norm(X.increment(i, j), norm) / (X.times[j] - X.times[i]) ** (1 / p)
                for i in range(X.n_points)
                for j in range(i + 1, X.n_points)
            )
            assert hoelder_norm(X, p, norm) == pytest.approx(ref, rel=1e-12)


def test_depth3_paths(rng):
    X = random_rough(rng, 8, d=2, depth=3)
    for level in (1, 2, 3):
        ref, _ = oracle_level_sum(X, level, 3.5 / level)
        assert pvar_level(X, level, 3.5 / level).value == pytest.approx(ref, rel=1e-12)
    ref_h = max(
        homogeneous_norm(X.increment(i, j)) / (X.times[j] - X.times[i]) ** (1 / 3.5)
        for i in range(X.n_points)
        for j in range(i + 1, X.n_points)
    )
    assert hoelder_norm(X, 3.5) == pytest.approx(ref_h, rel=1e-12)


# --- properties

seeds = st.integers(0, 2**32 - 1)


@given(seeds, st.integers(2, 30))
def test_superadditivity(seed, n):
    X = random_rough(np.random.default_rng(seed), n)
    for level in (1, 2):
        e = 2.5 / level
        whole = pvar_level(X, level, e).value
        for cut in range(1, n):
            left = pvar_level(X.restrict(0, cut), level, e).value
            right = pvar_level(X.restrict(cut, n), level, e).value
            assert whole >= (left + right) * (1 - 1e-12)


@given(seeds, st.integers(2, 30))
def test_monotone_in_p(seed, n):
    X = random_rough(np.random.default_rng(seed), n)
    ps = np.linspace(2.0, 6.0, 9)
    vals = [homogeneous_pvar_norm(X, p) for p in ps]
    assert all(a >= b * (1 - 1e-12) for a, b in zip(vals[:-1], vals[1:]))


@given(seeds, st.integers(2, 30), st.floats(2.0, 5.0))
def test_hoelder_dominates_pvar(seed, n, p):
    X = random_rough(np.random.default_rng(seed), n)
    T = X.times[-1]
    assert homogeneous_pvar_norm(X, p) <= T ** (1 / p) * hoelder_norm(X, p) * (1 + 1e-12)


@given(seeds, st.floats(-4, 4).filter(lambda x: abs(x) > 1e-3))
def test_norm_homogeneity(seed, lam):
    X = random_rough(np.random.default_rng(seed), 12)
    Y = X.dilate(lam)
    for f in (homogeneous_pvar_norm, hoelder_norm):
        assert f(Y, 2.5) == pytest.approx(abs(lam) * f(X, 2.5), rel=1e-10)
    x = DiscretePath(X.times, X.levels[0])
    assert psi_variation_norm(x.scale(lam)) == pytest.approx(abs(lam) * psi_variation_norm(x), rel=1e-8)


# --- psi-variation


def test_psi_branches():
    b = math.exp(-math.e)
    assert psi(b) == pytest.approx(b**2)
    assert psi(0.5) == 0.25
    assert psi(0.0) == 0.0
    assert psi(1e-3) == pytest.approx(1e-6 / math.log(math.log(1e3)))


def test_psi_functional_examples():
    t = np.array([0.0, 1.0])
    assert psi_variation_functional(DiscretePath(np.array([0.0, 1.0, 2.0]), np.zeros((3, 1)))) == 0.0
    b = math.exp(-math.e)
    assert psi_variation_functional(DiscretePath(t, np.array([[0.0], [b]]))) == pytest.approx(math.exp(-2 * math.e))
    assert psi_variation_functional(DiscretePath(t, np.array([[0.0], [0.5]]))) == pytest.approx(0.25)


def test_psi_norm_examples():
    t = np.array([0.0, 1.0])
    assert psi_variation_norm(DiscretePath(t, np.zeros((2, 1)))) == 0.0
    one = DiscretePath(t, np.array([[0.0], [1.0]]))
    assert psi_variation_norm(one) == pytest.approx(1.0, rel=1e-9)
    assert psi_variation_norm(one.scale(2.0)) == pytest.approx(2.0, rel=1e-9)


def test_psi_variation_certified_and_bisection(rng):
    x = DiscretePath(np.linspace(0, 1, 11), np.vstack([np.zeros(2), np.cumsum(0.1 * rng.standard_normal((10, 2)), axis=0)]))
    assert psi_variation(x).certified
    det = psi_variation_norm_details(x, tol=1e-10)
    assert abs(det.functional_at_value - 1.0) <= 1e-10
    widths = [hi - lo for lo, hi in det.brackets]
    assert all(b <= a for a, b in zip(widths[:-1], widths[1:]))
    lo, hi = det.brackets[-1]
    assert lo <= det.value <= hi or math.isclose(det.value, 0.5 * (lo + hi))


# --- 2D rho-variation


def brute_rho_var(kernel, grid, rho):
    n = grid.size - 1
    parts = [(0,) + tuple(i + 1 for i, m in enumerate(mask) if m) + (n,) for mask in itertools.product((0, 1), repeat=n - 1)]
    best = 0.0
    for P in parts:
        for Q in parts:
            s = sum(
                abs(rect_increment(kernel, grid[a], grid[b], grid[c], grid[e])) ** rho
                for a, b in zip(P[:-1], P[1:])
                for c, e in zip(Q[:-1], Q[1:])
            )
            best = max(best, s)
    return best ** (1 / rho)


@pytest.mark.parametrize("n", [2, 4, 5])
def test_rho_var_matches_pair_enumeration(rng, n):
    grid = np.concatenate([[0.0], np.sort(rng.uniform(0, 1, n - 1)), [1.0]])
    for kernel, rho in [(FractionalBrownianKernel(0.4), 1.25), (FractionalBrownianKernel(0.3), 1.6)]:
        assert covariance_2d_rho_var(kernel, grid, rho) == pytest.approx(brute_rho_var(kernel, grid, rho), rel=1e-12)


@pytest.mark.parametrize("n", [1, 3, 7, 12])
def test_bm_one_variation_equals_horizon(rng, n):
    for T in (1.0, 2.5):
        grid = np.concatenate([[0.0], np.sort(rng.uniform(0, T, n - 1)), [T]])
        assert covariance_2d_rho_var(BrownianKernel(), grid, 1.0) == pytest.approx(T, rel=1e-12)
        assert covariance_2d_rho_var(BrownianKernel(), grid, 1.0, mode="greedy") == pytest.approx(T, rel=1e-12)


def test_rho_var_zero_kernel_and_refusal():
    grid = np.linspace(0, 1, 5)
    zero = TabulatedKernel(grid, np.zeros((5, 5)))
    assert covariance_2d_rho_var(zero, grid, 1.0) == 0.0
    with pytest.raises(RefusalError):
        covariance_2d_rho_var(BrownianKernel(), np.linspace(0, 1, 14), 1.0)
    with pytest.raises(DomainError):
        covariance_2d_rho_var(BrownianKernel(), grid, 0.5)


@given(seeds, st.integers(1, 8), st.floats(0.26, 0.5))
def test_greedy_is_lower_bound(seed, n, H):
    rng = np.random.default_rng(seed)
    grid = np.concatenate([[0.0], np.sort(rng.uniform(0, 1, n - 1)), [1.0]])
    k, rho = FractionalBrownianKernel(H), 1 / (2 * H)
    assert covariance_2d_rho_var(k, grid, rho, "greedy") <= covariance_2d_rho_var(k, grid, rho) * (1 + 1e-12)
