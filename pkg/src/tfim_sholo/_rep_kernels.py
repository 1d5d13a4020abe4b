"""Per-sample kernels for the graphical representations of the periodic chain.

Columns are 0..N-1, time is the circle [0, beta).  Samples arrive as
count arrays (n, ncols) plus one flat array of times in sample-major,
column-minor order.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def _offsets(counts):
    n, c = counts.shape
    off = np.empty((n, c + 1), np.int64)
    pos = 0
    for s in range(n):
        for j in range(c):
            off[s, j] = pos
            pos += counts[s, j]
        off[s, c] = pos
    return off


@njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def _arc(ts, t):
    k = len(ts)
    if k == 0:
        return 0
    i = np.searchsorted(ts, t)
    return i % k


@njit(cache=True)
def fk_samples(cut_counts, cut_times, br_counts, br_times, x, y):
    """Per sample: number of periodic components k and the indicator x <-> y."""
    n, N = cut_counts.shape
    co = _offsets(cut_counts)
    bo = _offsets(br_counts)
    k_out = np.empty(n, np.int64)
    conn = np.empty(n, np.int64)
    for s in range(n):
        base = np.empty(N + 1, np.int64)
        tot = 0
        cols = []
        for c in range(N):
            ts = np.sort(cut_times[co[s, c]:co[s, c + 1]])
            cols.append(ts)
            base[c] = tot
            tot += max(1, len(ts))
        base[N] = tot
        parent = np.arange(tot)
        comps = tot
        for g in range(N - 1):
            for t in br_times[bo[s, g]:bo[s, g + 1]]:
                a = _find(parent, base[g] + _arc(cols[g], t))
                b = _find(parent, base[g + 1] + _arc(cols[g + 1], t))
                if a != b:
                    parent[a] = b
                    comps -= 1
        k_out[s] = comps
        ra = _find(parent, base[x] + _arc(cols[x], 0.0))
        rb = _find(parent, base[y] + _arc(cols[y], 0.0))
        conn[s] = 1 if ra == rb else 0
    return k_out, conn


@njit(cache=True)
def _odd_length(ts, beta):
    """Measure of t in (0, beta) after an odd number of the sorted switch times."""
    L = 0.0
    for j in range(0, len(ts) - 1, 2):
        L += ts[j + 1] - ts[j]
    return L


@njit(cache=True)
def rpr_samples(br_counts, br_times, N, beta, h, sx, sy, fixed_zero):
    """Per sample: sum over psi in {0,1}^N of exp(-2h |I(psi_A)|).

    Bridges on gap g join columns g and g+1.  Sources sx, sy (or -1) switch
    at t = 0; sx == sy cancels.  With fixed_zero only psi = 0 is summed.
    A column with an odd switch count contributes weight 0.
    """
    n = br_counts.shape[0]
    bo = _offsets(br_counts)
    out = np.zeros(n)
    L = np.empty(N)
    for s in range(n):
        ok = True
        for c in range(N):
            m = 0
            if c > 0:
                m += br_counts[s, c - 1]
            if c < N - 1:
                m += br_counts[s, c]
            src = (c == sx) != (c == sy) and sx >= 0
            ts = np.empty(m + (1 if src else 0))
            j = 0
            if src:
                ts[0] = 0.0
                j = 1
            if c > 0:
                for t in br_times[bo[s, c - 1]:bo[s, c]]:
                    ts[j] = t
                    j += 1
            if c < N - 1:
                for t in br_times[bo[s, c]:bo[s, c + 1]]:
                    ts[j] = t
                    j += 1
            if len(ts) % 2 == 1:
                ok = False
                break
            L[c] = _odd_length(np.sort(ts), beta)
        if not ok:
            continue
        if fixed_zero:
            out[s] = np.exp(-2 * h * L.sum())
            continue
        acc = 0.0
        for mask in range(1 << N):
            tot = 0.0
            for c in range(N):
                if (mask >> c) & 1:
                    tot += beta - L[c]
                else:
                    tot += L[c]
            acc += np.exp(-2 * h * tot)
        out[s] = acc
    return out


@njit(cache=True)
def _overlap(ta, tb, beta):
    """Integral over [0, beta) of f_a f_b with f = (-1)^(number of switches <= t)."""
    i = 0
    j = 0
    t = 0.0
    sa = 1.0
    sb = 1.0
    acc = 0.0
    while True:
        na = ta[i] if i < len(ta) else beta
        nb = tb[j] if j < len(tb) else beta
        nxt = min(na, nb)
        acc += sa * sb * (nxt - t)
        if nxt >= beta:
            break
        t = nxt
        if na <= nb:
            sa = -sa
            i += 1
        else:
            sb = -sb
            j += 1
    return acc


@njit(cache=True)
def stim_samples(cut_counts, cut_times, beta, J, x, y, wired):
    """Per sample: (sum over sigma in S(xi) of exp(J sum int sigma sigma), same with sigma_x sigma_y at t = 0).

    With `wired` only the all-plus base signs are summed.
    """
    n, N = cut_counts.shape
    co = _offsets(cut_counts)
    w = np.zeros(n)
    wc = np.zeros(n)
    c = np.empty(max(N - 1, 1))
    for s in range(n):
        ok = True
        cols = []
        for k in range(N):
            ts = np.sort(cut_times[co[s, k]:co[s, k + 1]])
            if len(ts) % 2 == 1:
                ok = False
            cols.append(ts)
        if not ok:
            continue
        for k in range(N - 1):
            c[k] = _overlap(cols[k], cols[k + 1], beta)
        if wired:
            e = 0.0
            for k in range(N - 1):
                e += c[k]
            w[s] = np.exp(J * e)
            wc[s] = w[s]
            continue
        acc = 0.0
        accc = 0.0
        for mask in range(1 << N):
            e = 0.0
            for k in range(N - 1):
                bk = 1.0 - 2.0 * ((mask >> k) & 1)
                bk1 = 1.0 - 2.0 * ((mask >> (k + 1)) & 1)
                e += bk * bk1 * c[k]
            v = np.exp(J * e)
            acc += v
            bx = 1.0 - 2.0 * ((mask >> x) & 1)
            by = 1.0 - 2.0 * ((mask >> y) & 1)
            accc += bx * by * v
        w[s] = acc
        wc[s] = accc
    return w, wc
