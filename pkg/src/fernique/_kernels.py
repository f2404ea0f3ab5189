"""Compiled inner loops (numba) for the O(n^2) path functionals.

Level-2 increments are formed on the fly from the running signature:
``X2_{s,t} = X2_t - X2_s - X1_s ⊗ (X1_t - X1_s)``.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def _inc2_norm(X1, X2, s, t, max_entry):
    d = X1.shape[1]
    acc = 0.0
    for a in range(d):
        da = X1[s, a]
        for b in range(d):
            v = X2[t, a * d + b] - X2[s, a * d + b] - da * (X1[t, b] - X1[s, b])
            if max_entry:
                av = abs(v)
                if av > acc:
                    acc = av
            else:
                acc += v * v
    if max_entry:
        return acc
    return np.sqrt(acc)


@njit(cache=True)
def _inc1_norm(X1, s, t):
    acc = 0.0
    for a in range(X1.shape[1]):
        v = X1[t, a] - X1[s, a]
        acc += v * v
    return np.sqrt(acc)


@njit(cache=True)
def pair_norms_depth2(X1, X2, max_entry):
    """Upper-triangular matrices of |level-1| and |level-2| increment norms."""
    n = X1.shape[0]
    N1 = np.zeros((n, n))
    N2 = np.zeros((n, n))
    for s in range(n):
        for t in range(s + 1, n):
            N1[s, t] = _inc1_norm(X1, s, t)
            N2[s, t] = _inc2_norm(X1, X2, s, t, max_entry)
    return N1, N2


@njit(cache=True)
def hoelder_depth2(times, X1, X2, inv_p, max_entry, lag_weight):
    """Per-level sup over grid pairs of |x^k_{s,t}|^{1/k} / (t-s)^{1/p}.

    Squared ratios are compared, with ``(t-s)^{-2/p}`` read from
    ``lag_weight[t-s]`` on uniform grids (pass an empty array otherwise).
    """
    n = X1.shape[0]
    d = X1.shape[1]
    uniform = lag_weight.shape[0] > 0
    h1 = 0.0
    h2 = 0.0
    for s in range(n):
        for t in range(s + 1, n):
            if uniform:
                w = lag_weight[t - s]
            else:
                w = (times[t] - times[s]) ** (-2.0 * inv_p)
            a1 = 0.0
            for a in range(d):
                v = X1[t, a] - X1[s, a]
                a1 += v * v
            r1 = a1 * w
            if r1 > h1:
                h1 = r1
            r2 = _inc2_norm(X1, X2, s, t, max_entry) * w
            if r2 > h2:
                h2 = r2
    return np.sqrt(h1), np.sqrt(h2)


@njit(cache=True)
def max_ratio_upper(M, times, inv_p):
    """max_{s<t} M[s, t] / (t - s)^{1/p}."""
    n = M.shape[0]
    best = 0.0
    for s in range(n):
        for t in range(s + 1, n):
            r = M[s, t] / (times[t] - times[s]) ** inv_p
            if r > best:
                best = r
    return best


@njit(cache=True)
def partition_dp(W):
    """max over index chains 0 = i_0 < ... < i_m = n-1 of sum W[i_j, i_{j+1}].

    Returns the value array V (V[j] is the optimum ending at j) and the
    back-pointer array.  Ties go to the smallest predecessor index.
    """
    n = W.shape[0]
    V = np.zeros(n)
    back = np.zeros(n, dtype=np.int64)
    for j in range(1, n):
        best = -np.inf
        arg = 0
        for i in range(j):
            val = V[i] + W[i, j]
            if val > best:
                best = val
                arg = i
        V[j] = best
        back[j] = arg
    return V, back


@njit(cache=True)
def interval_sums(A, rho):
    """g[c, e] = sum_i |A[i, e] - A[i, c]|^rho for c < e."""
    m, n = A.shape
    g = np.zeros((n, n))
    for c in range(n):
        for e in range(c + 1, n):
            acc = 0.0
            for i in range(m):
                acc += abs(A[i, e] - A[i, c]) ** rho
            g[c, e] = acc
    return g


@njit(cache=True)
def _pair_distance_depth2(X1a, X2a, X1b, X2b, s, t, max_entry, ia1, ib1):
    d = X1a.shape[1]
    l1 = 0.0
    for q in range(d):
        ia1[q] = X1a[t, q] - X1a[s, q]
        ib1[q] = X1b[t, q] - X1b[s, q]
        dq = ib1[q] - ia1[q]
        l1 += dq * dq
    l1 = np.sqrt(l1)
    l2 = 0.0
    for q in range(d):
        for r in range(d):
            a2 = X2a[t, q * d + r] - X2a[s, q * d + r] - X1a[s, q] * ia1[r]
            b2 = X2b[t, q * d + r] - X2b[s, q * d + r] - X1b[s, q] * ib1[r]
            # level 2 of a^{-1} ⊗ b = b2 - a2 - a1 ⊗ (b1 - a1)
            v = b2 - a2 - ia1[q] * (ib1[r] - ia1[r])
            if max_entry:
                if abs(v) > l2:
                    l2 = abs(v)
            else:
                l2 += v * v
    if not max_entry:
        l2 = np.sqrt(l2)
    return max(l1, np.sqrt(l2))


@njit(cache=True)
def pvar_pair_distance_depth2(X1a, X2a, X1b, X2b, p, max_entry):
    """sup over partitions of sum |a_{s,t}^{-1} ⊗ b_{s,t}|^p (homogeneous norm).

    Streaming DP, O(n) memory.  Both paths are depth 2 on the same grid.
    """
    n = X1a.shape[0]
    d = X1a.shape[1]
    ia1 = np.empty(d)
    ib1 = np.empty(d)
    V = np.full(n, -1.0)
    V[0] = 0.0
    for s in range(n - 1):
        base = V[s]
        for t in range(s + 1, n):
            cand = base + _pair_distance_depth2(X1a, X2a, X1b, X2b, s, t, max_entry, ia1, ib1) ** p
            if cand > V[t]:
                V[t] = cand
    return V[n - 1]
