"""Compiled inner loops: interface tracing, insertion surgery, birth-death moves.

Runs: every lane (open interval of a medial line) is cut by the events on
it into runs; a lane with k events has k+1 runs, numbered bottom to top.
Up-lanes are traversed upwards and down-lanes downwards.  Each event
(a cut or bridge) links the up-lane and the down-lane of its column, and
each lane end on a coloured boundary edge links to its partner lane.

Turning is counted in quarter turns (+1 = counter-clockwise pi/2).
"""
import numpy as np
from numba import njit

END_A = -1
END_B = -2
END_NONE = -3


@njit(cache=True, nogil=True)
def _successor(r, run_lane, run_start, ev_start, ev_pt, up_pos, dn_pos, p_slot,
               lane_up, lane_lo_partner, lane_hi_partner, lane_lo_sign, lane_hi_sign,
               slot_up_lane, slot_dn_lane, slot_sign, fault):
    """Next run after r, the quarter turns taken, and whether the curve ends at b."""
    l = run_lane[r]
    j = r - run_start[l]
    k = ev_start[l + 1] - ev_start[l]
    if lane_up[l]:
        if j < k:
            p = ev_pt[ev_start[l] + j]
            s = p_slot[p]
            nl = slot_dn_lane[s]
            nr = run_start[nl] + dn_pos[p]
            sg = slot_sign[s]
        else:
            nl = lane_hi_partner[l]
            if nl == END_B:
                return -1, -1, True
            if nl < 0:
                return -2, 0, True
            nr = run_start[nl] + (ev_start[nl + 1] - ev_start[nl])
            sg = lane_hi_sign[l]
    else:
        if j > 0:
            p = ev_pt[ev_start[l] + j - 1]
            s = p_slot[p]
            nl = slot_up_lane[s]
            nr = run_start[nl] + up_pos[p] + 1
            sg = slot_sign[s]
        else:
            nl = lane_lo_partner[l]
            if nl == END_B:
                return -1, 1, True
            if nl < 0:
                return -2, 0, True
            nr = run_start[nl]
            sg = lane_lo_sign[l]
    if fault == 1 and sg < 0:
        sg = 1
    return nr, 2 * sg, False


@njit(cache=True, nogil=True)
def trace_runs(lane_up, lane_lo_partner, lane_hi_partner, lane_lo_sign, lane_hi_sign, start_lane,
               slot_up_lane, slot_dn_lane, slot_sign, p_slot, p_t, n, fault):
    """Decompose the medial structure into the interface and loops.

    Returns a tuple of arrays; status < 0 flags an inconsistent board.
    """
    L = lane_up.shape[0]
    counts = np.zeros(L + 1, np.int64)
    for p in range(n):
        s = p_slot[p]
        counts[slot_up_lane[s] + 1] += 1
        counts[slot_dn_lane[s] + 1] += 1
    ev_start = np.cumsum(counts)
    order = np.argsort(p_t[:n])
    fill = ev_start[:L].copy()
    ev_t = np.empty(2 * n)
    ev_pt = np.empty(2 * n, np.int64)
    up_pos = np.empty(n, np.int64)
    dn_pos = np.empty(n, np.int64)
    for k in range(n):
        p = order[k]
        s = p_slot[p]
        l = slot_up_lane[s]
        j = fill[l]
        ev_t[j] = p_t[p]
        ev_pt[j] = p
        up_pos[p] = j - ev_start[l]
        fill[l] += 1
        l = slot_dn_lane[s]
        j = fill[l]
        ev_t[j] = p_t[p]
        ev_pt[j] = p
        dn_pos[p] = j - ev_start[l]
        fill[l] += 1
    R = 2 * n + L
    run_start = np.empty(L + 1, np.int64)
    for l in range(L + 1):
        run_start[l] = ev_start[l] + l
    run_lane = np.empty(R, np.int64)
    for l in range(L):
        for r in range(run_start[l], run_start[l + 1]):
            run_lane[r] = l
    curve = np.full(R, -1, np.int64)
    cum = np.zeros(R, np.int64)
    rorder = np.full(R, -1, np.int64)
    rnext = np.full(R, -1, np.int64)
    rturn = np.zeros(R, np.int64)
    totals = np.zeros(R + 1, np.int64)
    status = 0

    l0 = start_lane
    k0 = ev_start[l0 + 1] - ev_start[l0]
    r = run_start[l0] + (0 if lane_up[l0] else k0)
    acc = 0
    idx = 0
    while True:
        if curve[r] != -1:
            status = -1
            break
        curve[r] = 0
        cum[r] = acc
        rorder[r] = idx
        idx += 1
        nr, turn, end = _successor(r, run_lane, run_start, ev_start, ev_pt, up_pos, dn_pos, p_slot,
                                   lane_up, lane_lo_partner, lane_hi_partner, lane_lo_sign,
                                   lane_hi_sign, slot_up_lane, slot_dn_lane, slot_sign, fault)
        rturn[r] = turn
        acc += turn
        if end:
            if nr == -2:
                status = -2
            break
        rnext[r] = nr
        r = nr
    totals[0] = acc
    nc = 1
    if status == 0:
        for r0 in range(R):
            if curve[r0] != -1:
                continue
            r = r0
            acc = 0
            idx = 0
            while True:
                curve[r] = nc
                cum[r] = acc
                rorder[r] = idx
                idx += 1
                nr, turn, end = _successor(r, run_lane, run_start, ev_start, ev_pt, up_pos, dn_pos,
                                           p_slot, lane_up, lane_lo_partner, lane_hi_partner,
                                           lane_lo_sign, lane_hi_sign, slot_up_lane, slot_dn_lane,
                                           slot_sign, fault)
                rturn[r] = turn
                if end:
                    status = -3
                    break
                rnext[r] = nr
                acc += turn
                r = nr
                if r == r0:
                    break
                if curve[r] != -1:
                    status = -4
                    break
            if status != 0:
                break
            totals[nc] = acc
            nc += 1
    return (status, ev_start, ev_t, ev_pt, up_pos, dn_pos, run_start, run_lane, curve, cum,
            rorder, rnext, rturn, totals[:nc].copy())


@njit(cache=True, nogil=True)
def run_at(l, t, ev_start, ev_t, run_start):
    lo = ev_start[l]
    hi = ev_start[l + 1]
    j = np.searchsorted(ev_t[lo:hi], t)
    return run_start[l] + j


@njit(cache=True, nogil=True)
def vertical_pass(l, t, ev_start, ev_t, run_start, curve, cum, total):
    """(on gamma, quarter-turn winding to b) for the run of lane l through time t."""
    if l < 0:
        return False, 0
    r = run_at(l, t, ev_start, ev_t, run_start)
    if curve[r] != 0:
        return False, 0
    return True, total - cum[r]


@njit(cache=True, nogil=True)
def insertion(up_l, dn_l, sg, t, ev_start, ev_t, run_start, curve, cum, rorder, totals):
    """Effect of inserting a point at time t on the column with lanes (up_l, dn_l).

    Returns (dL, below_on, below_W, above_on, above_W) for the configuration
    with the point added; windings are quarter turns to b.
    """
    U = run_at(up_l, t, ev_start, ev_t, run_start)
    D = run_at(dn_l, t, ev_start, ev_t, run_start)
    cU = curve[U]
    cD = curve[D]
    T = totals[0]
    if cU == 0 and cD == 0:
        if rorder[U] < rorder[D]:
            return 1, True, sg + T - cum[D], False, 0
        return 1, False, 0, True, sg + T - cum[U]
    if cU == 0:
        WU = T - cum[U]
        return -1, True, 3 * sg + totals[cD] + WU, True, sg + WU
    if cD == 0:
        WD = T - cum[D]
        return -1, True, sg + WD, True, 3 * sg + totals[cU] + WD
    if cU == cD:
        return 1, False, 0, False, 0
    return -1, False, 0, False, 0


@njit(cache=True, nogil=True)
def deletion_dl(p, p_slot, slot_up_lane, slot_dn_lane, up_pos, dn_pos, run_start, curve):
    s = p_slot[p]
    below = run_start[slot_up_lane[s]] + up_pos[p]
    above = run_start[slot_dn_lane[s]] + dn_pos[p] + 1
    if curve[below] == curve[above]:
        return 1
    return -1


@njit(cache=True, nogil=True)
def _phase(on, W, sigma):
    if not on:
        return 0.0 + 0.0j
    return np.exp(1j * sigma * W * (np.pi / 2))


@njit(cache=True, nogil=True)
def measure(site_kind, site_slot, site_t, site_sign, site_up, site_dn,
            site_up_p, site_up_m, site_dn_p, site_dn_m, eta,
            site_hb_run_lane, site_hb_run_top, site_hb_sign, site_hb_dir,
            slot_up_lane, slot_dn_lane,
            ev_start, ev_t, run_start, curve, cum, rorder, totals, sigma, sqrt_q, out):
    """Per-site sample values: phi_up, phi_dn, X_left, X_right, fd_up, fd_dn."""
    T = totals[0]
    ns = site_kind.shape[0]
    for i in range(ns):
        t = site_t[i]
        on, W = vertical_pass(site_up[i], t, ev_start, ev_t, run_start, curve, cum, T)
        out[i, 0] = _phase(on, W, sigma)
        on, W = vertical_pass(site_dn[i], t, ev_start, ev_t, run_start, curve, cum, T)
        out[i, 1] = _phase(on, W, sigma)
        xl = 0.0 + 0.0j
        xr = 0.0 + 0.0j
        k = site_kind[i]
        if k == 0:
            s = site_slot[i]
            sg = site_sign[i]
            dL, bon, bW, aon, aW = insertion(slot_up_lane[s], slot_dn_lane[s], sg, t, ev_start, ev_t,
                                             run_start, curve, cum, rorder, totals)
            fac = sqrt_q ** dL
            below = fac * _phase(bon, bW, sigma)
            above = fac * _phase(aon, aW, sigma)
            if sg < 0:  # white: the hop below goes right
                xr = below
                xl = above
            else:
                xl = below
                xr = above
        elif k == 2:
            lane = site_hb_run_lane[i]
            if lane == -2:
                xr = 1.0 + 0.0j
            elif lane == -3:
                # the departure hop into a; hb_sign holds the first turn
                xr = _phase(True, site_hb_sign[i] + T, sigma)
            elif lane >= 0:
                if site_hb_run_top[i]:
                    r = run_start[lane + 1] - 1
                else:
                    r = run_start[lane]
                if curve[r] == 0:
                    val = _phase(True, T - cum[r] - site_hb_sign[i], sigma)
                    if site_hb_dir[i] > 0:
                        xr = val
                    else:
                        xl = val
        out[i, 2] = xl
        out[i, 3] = xr
        if eta > 0:
            on1, W1 = vertical_pass(site_up_p[i], t + eta, ev_start, ev_t, run_start, curve, cum, T)
            on0, W0 = vertical_pass(site_up_m[i], t - eta, ev_start, ev_t, run_start, curve, cum, T)
            out[i, 4] = (_phase(on1, W1, sigma) - _phase(on0, W0, sigma)) / (2 * eta)
            on1, W1 = vertical_pass(site_dn_p[i], t + eta, ev_start, ev_t, run_start, curve, cum, T)
            on0, W0 = vertical_pass(site_dn_m[i], t - eta, ev_start, ev_t, run_start, curve, cum, T)
            out[i, 5] = (_phase(on1, W1, sigma) - _phase(on0, W0, sigma)) / (2 * eta)


@njit(cache=True, nogil=True)
def birth_death(lane_up, lane_lo_partner, lane_hi_partner, lane_lo_sign, lane_hi_sign, start_lane,
                slot_up_lane, slot_dn_lane, slot_sign, slot_lo, slot_cum,
                p_slot, p_t, n, u, lam, sqrt_q, move_mix, fault):
    """Run the birth-death proposals encoded by the uniforms u[k, 0:4].

    Point arrays are edited in place; returns (n, accepted, status).  If the
    arrays fill up, status = 1 and the caller grows them and resumes with the
    remaining proposals (the return also gives the index reached).
    """
    cap = p_t.shape[0]
    total_len = slot_cum[-1]
    n_prop = u.shape[0]
    accepted = 0
    tr = trace_runs(lane_up, lane_lo_partner, lane_hi_partner, lane_lo_sign, lane_hi_sign, start_lane,
                    slot_up_lane, slot_dn_lane, slot_sign, p_slot, p_t, n, fault)
    if tr[0] != 0:
        return n, accepted, tr[0], 0
    mass = lam * total_len
    for k in range(n_prop):
        (status, ev_start, ev_t, ev_pt, up_pos, dn_pos, run_start, run_lane, curve, cum,
         rorder, rnext, rturn, totals) = tr
        if u[k, 0] < move_mix:
            if n >= cap:
                return n, accepted, 1, k
            x = u[k, 1] * total_len
            s = np.searchsorted(slot_cum, x, side="right") - 1
            if s >= slot_up_lane.shape[0]:
                s = slot_up_lane.shape[0] - 1
            t = slot_lo[s] + (x - slot_cum[s])
            dL, bon, bW, aon, aW = insertion(slot_up_lane[s], slot_dn_lane[s], slot_sign[s], t,
                                             ev_start, ev_t, run_start, curve, cum, rorder, totals)
            ratio = mass * (1.0 - move_mix) / (move_mix * (n + 1)) * sqrt_q ** dL
            if u[k, 2] < ratio:
                p_slot[n] = s
                p_t[n] = t
                n += 1
                accepted += 1
                tr = trace_runs(lane_up, lane_lo_partner, lane_hi_partner, lane_lo_sign, lane_hi_sign,
                                start_lane, slot_up_lane, slot_dn_lane, slot_sign, p_slot, p_t, n, fault)
        else:
            if n == 0:
                continue
            p = int(u[k, 1] * n)
            if p >= n:
                p = n - 1
            dL = deletion_dl(p, p_slot, slot_up_lane, slot_dn_lane, up_pos, dn_pos, run_start, curve)
            ratio = n * move_mix / (mass * (1.0 - move_mix)) * sqrt_q ** dL
            if u[k, 2] < ratio:
                n -= 1
                p_slot[p] = p_slot[n]
                p_t[p] = p_t[n]
                accepted += 1
                tr = trace_runs(lane_up, lane_lo_partner, lane_hi_partner, lane_lo_sign, lane_hi_sign,
                                start_lane, slot_up_lane, slot_dn_lane, slot_sign, p_slot, p_t, n, fault)
    return n, accepted, 0, n_prop


@njit(cache=True, nogil=True)
def chain_block(lane_up, lane_lo_partner, lane_hi_partner, lane_lo_sign, lane_hi_sign, start_lane,
                slot_up_lane, slot_dn_lane, slot_sign, slot_lo, slot_cum,
                p_slot, p_t, n, u, per_sample, s0, skip, lam, sqrt_q, move_mix, fault,
                site_kind, site_slot, site_t, site_sign, site_up, site_dn,
                site_up_p, site_up_m, site_dn_p, site_dn_m, eta,
                site_hb_run_lane, site_hb_run_top, site_hb_sign, site_hb_dir,
                sigma, out, loops):
    """Advance and measure samples s0, s0+1, ...; u holds per_sample proposals per sample.

    The first `skip` proposals of sample s0 are taken as already done.
    Returns (n, sample reached, proposals done inside it, status); status 1
    means the point arrays are full.
    """
    n_samples = out.shape[0]
    for s in range(s0, n_samples):
        first = (s - s0) * per_sample + (skip if s == s0 else 0)
        uu = u[first:(s - s0 + 1) * per_sample]
        n, acc, status, done = birth_death(lane_up, lane_lo_partner, lane_hi_partner, lane_lo_sign,
                                           lane_hi_sign, start_lane, slot_up_lane, slot_dn_lane,
                                           slot_sign, slot_lo, slot_cum, p_slot, p_t, n, uu, lam,
                                           sqrt_q, move_mix, fault)
        if status != 0:
            return n, s, done + (skip if s == s0 else 0), status
        (st, ev_start, ev_t, ev_pt, up_pos, dn_pos, run_start, run_lane, curve, cum,
         rorder, rnext, rturn, totals) = trace_runs(lane_up, lane_lo_partner, lane_hi_partner,
                                                    lane_lo_sign, lane_hi_sign, start_lane,
                                                    slot_up_lane, slot_dn_lane, slot_sign,
                                                    p_slot, p_t, n, fault)
        if st != 0:
            return n, s, per_sample, st
        loops[s] = totals.shape[0] - 1
        measure(site_kind, site_slot, site_t, site_sign, site_up, site_dn,
                site_up_p, site_up_m, site_dn_p, site_dn_m, eta,
                site_hb_run_lane, site_hb_run_top, site_hb_sign, site_hb_dir,
                slot_up_lane, slot_dn_lane, ev_start, ev_t, run_start, curve, cum, rorder,
                totals, sigma, sqrt_q, out[s])
    return n, n_samples, 0, 0
