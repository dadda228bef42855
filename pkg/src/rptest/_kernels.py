"""Compiled inner loops.

Every kernel takes a ``numpy.random.Generator`` and advances it in place;
numba reproduces NumPy's draws bit for bit, so a seeded run gives the
same stream whether it goes through these kernels or through NumPy.

Rank vectors are int64 arrays holding 1-based ranks; ``lo``/``hi`` are
int64 arrays of the per-coordinate bounds.
"""

import numpy as np
from numba import njit

_JIT = dict(nogil=True, cache=True)


@njit(**_JIT)
def pair_ok(lo, hi, r, c, d):
    rc = r[c]
    rd = r[d]
    return lo[c] <= rd and rd <= hi[c] and lo[d] <= rc and rc <= hi[d]


@njit(**_JIT)
def degree(lo, hi, r):
    n = r.shape[0]
    total = 0
    for c in range(n - 1):
        for d in range(c + 1, n):
            if pair_ok(lo, hi, r, c, d):
                total += 1
    return total


@njit(**_JIT)
def _touching(lo, hi, r, c, d):
    # feasible pairs with at least one end in {c, d}; branch-free, since
    # the feasibility pattern is too irregular for the predictor
    n = r.shape[0]
    rc = r[c]
    rd = r[d]
    loc, hic, lod, hid = lo[c], hi[c], lo[d], hi[d]
    total = 0
    for k in range(n):
        rk = r[k]
        lk = lo[k]
        hk = hi[k]
        ok_c = (loc <= rk) & (rk <= hic) & (lk <= rc) & (rc <= hk) & (k != c)
        ok_d = (lod <= rk) & (rk <= hid) & (lk <= rd) & (rd <= hk) & (k != c) & (k != d)
        total += ok_c + ok_d
    return total


@njit(**_JIT)
def swap_update(lo, hi, r, deg, c, d):
    """Transpose coordinates ``c`` and ``d`` of ``r`` in place; return the new degree."""
    before = _touching(lo, hi, r, c, d)
    tmp = r[c]
    r[c] = r[d]
    r[d] = tmp
    return deg - before + _touching(lo, hi, r, c, d)


@njit(**_JIT)
def draw_pair(rng, n):
    # one draw over the n(n-1) ordered pairs
    k = rng.integers(0, n * (n - 1))
    c = k // (n - 1)
    d = k % (n - 1)
    if d >= c:
        d += 1
    return c, d


@njit(**_JIT)
def target_step(lo, hi, r, deg, rng):
    n = r.shape[0]
    if n < 2:
        return deg
    c, d = draw_pair(rng, n)
    if pair_ok(lo, hi, r, c, d):
        return swap_update(lo, hi, r, deg, c, d)
    return deg


@njit(**_JIT)
def degree_step(lo, hi, r, deg, rng):
    # caller guarantees deg >= 1, so the rejection loop terminates
    n = r.shape[0]
    while True:
        c, d = draw_pair(rng, n)
        if pair_ok(lo, hi, r, c, d):
            return swap_update(lo, hi, r, deg, c, d)


@njit(**_JIT)
def coupled_step(lo, hi, v, dv, w, dw, rng):
    """One Metropolis-coupled step; returns ``(swapped, dv, dw)``.

    When ``swapped`` is true the caller must exchange the roles of the
    two state arrays (the contents are left where they were).
    """
    dv = target_step(lo, hi, v, dv, rng)
    dw = degree_step(lo, hi, w, dw, rng)
    u = rng.random()
    if u * dw <= dv:
        return True, dv, dw
    return False, dv, dw


@njit(**_JIT)
def run_coupled(lo, hi, v, w, burn_in, thin, count, lazy, rng):
    """Run the coupled pair and return the retained target-slot states.

    With ``lazy`` set, the pair holds still with probability 1/2 before
    each step.
    """
    n = v.shape[0]
    out = np.empty((count, n), dtype=np.int64)
    dv = degree(lo, hi, v)
    dw = degree(lo, hi, w)
    total = burn_in + thin * count
    kept = 0
    for t in range(1, total + 1):
        if not lazy or rng.random() < 0.5:
            swapped, dv, dw = coupled_step(lo, hi, v, dv, w, dw, rng)
            if swapped:
                v, w = w, v
                dv, dw = dw, dv
        if t > burn_in and (t - burn_in) % thin == 0:
            out[kept, :] = v
            kept += 1
    return out, v, w


@njit(**_JIT)
def inversions(seq):
    """Number of pairs ``i < j`` with ``seq[i] > seq[j]``; values are 1..n."""
    n = seq.shape[0]
    tree = np.zeros(n + 1, dtype=np.int64)
    inv = 0
    for i in range(n - 1, -1, -1):
        # count already-seen values smaller than seq[i]
        k = seq[i] - 1
        while k > 0:
            inv += tree[k]
            k -= k & (-k)
        k = seq[i]
        while k <= n:
            tree[k] += 1
            k += k & (-k)
    return inv


@njit(**_JIT)
def kendall(rx, ry):
    n = rx.shape[0]
    seq = np.empty(n, dtype=np.int64)
    for i in range(n):
        seq[rx[i] - 1] = ry[i]
    pairs = n * (n - 1) // 2
    # one rounding of the exact ratio, so this agrees bit for bit with the pairwise sum
    return (pairs - 2 * inversions(seq)) / pairs


@njit(**_JIT)
def paired_mean_tau(xs, ys):
    b = xs.shape[0]
    total = 0.0
    for k in range(b):
        total += kendall(xs[k], ys[k])
    return total / b


@njit(**_JIT)
def paired_null(xs, ys, etas):
    """Mean Kendall tau over paired samples, with Y relabelled by each row of ``etas``."""
    b, n = ys.shape
    m = etas.shape[0]
    out = np.empty(m, dtype=np.float64)
    yp = np.empty(n, dtype=np.int64)
    for e in range(m):
        eta = etas[e]
        total = 0.0
        for k in range(b):
            for i in range(n):
                yp[i] = ys[k, eta[i]]
            total += kendall(xs[k], yp)
        out[e] = total / b
    return out


@njit(**_JIT)
def concordance_sum(samples):
    b, n = samples.shape
    acc = np.zeros((n, n), dtype=np.int64)
    for k in range(b):
        r = samples[k]
        for i in range(n):
            for j in range(i + 1, n):
                if r[i] < r[j]:
                    acc[i, j] += 1
                    acc[j, i] -= 1
                elif r[i] > r[j]:
                    acc[i, j] -= 1
                    acc[j, i] += 1
    return acc


# --- random walks on explicit graphs -------------------------------------

@njit(**_JIT)
def graph_target_step(adj, state, rng):
    n = adj.shape[0]
    v = rng.integers(0, n)
    if adj[state, v]:
        return v
    return state


@njit(**_JIT)
def graph_degree_step(indptr, indices, state, rng):
    start = indptr[state]
    k = indptr[state + 1] - start
    return indices[start + rng.integers(0, k)]


@njit(**_JIT)
def run_graph_pair(adj, indptr, indices, coupled, v, w, burn_in, thin, count, rng):
    """Target-slot states retained from a pair of graph walks.

    ``coupled`` selects between two independent walks and the
    Metropolis-coupled pair.
    """
    out = np.empty(count, dtype=np.int64)
    total = burn_in + thin * count
    kept = 0
    for t in range(1, total + 1):
        v = graph_target_step(adj, v, rng)
        w = graph_degree_step(indptr, indices, w, rng)
        if coupled:
            u = rng.random()
            dv = indptr[v + 1] - indptr[v]
            dw = indptr[w + 1] - indptr[w]
            if u * dw <= dv:
                v, w = w, v
        if t > burn_in and (t - burn_in) % thin == 0:
            out[kept] = v
            kept += 1
    return out
