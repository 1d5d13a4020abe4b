"""Interface and loop tracing for Dobrushin FK configurations.

Windings are stored as integer quarter turns (counter-clockwise positive)
and converted to radians at the API surface.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels as K
from .configuration import Configuration
from .errors import ForeignPass, InvalidConfig, NotDobrushin, TieBreak
from .geometry import BLACK, HBOUNDARY, SemiDiscreteDomain, bounce_partner, color_of

QUARTER = np.pi / 2
ARROWS = ("up", "down", "left", "right")
# arrow -> complex unit
ARROW_UNIT = {"up": 1j, "down": -1j, "left": -1.0 + 0j, "right": 1.0 + 0j}


class Board(NamedTuple):
    lane_up: np.ndarray
    lane_lo_partner: np.ndarray
    lane_hi_partner: np.ndarray
    lane_lo_sign: np.ndarray
    lane_hi_sign: np.ndarray
    start_lane: int
    slot_up_lane: np.ndarray
    slot_dn_lane: np.ndarray
    slot_sign: np.ndarray
    slot_lo: np.ndarray
    slot_cum: np.ndarray

    def kernel_args(self):
        return (self.lane_up, self.lane_lo_partner, self.lane_hi_partner, self.lane_lo_sign,
                self.lane_hi_sign, self.start_lane, self.slot_up_lane, self.slot_dn_lane, self.slot_sign)


def _end_code(tag):
    return {"a": K.END_A, "b": K.END_B}.get(tag, K.END_NONE)


def compile_board(domain: SemiDiscreteDomain) -> Board:
    """Flatten the lane/slot structure of a Dobrushin domain into arrays (cached)."""
    if domain.marks is None:
        raise NotDobrushin("tracing needs a Dobrushin domain")
    cached = domain._cache.get("board")
    if cached is not None:
        return cached
    L = len(domain.lanes)
    lane_up = np.array([ln.up for ln in domain.lanes], dtype=np.bool_)
    part = {"lo": np.empty(L, np.int64), "hi": np.empty(L, np.int64)}
    sign = {"lo": np.zeros(L, np.int64), "hi": np.zeros(L, np.int64)}
    for ln in domain.lanes:
        for end in ("lo", "hi"):
            res = bounce_partner(domain, ln, end)
            if res is None:
                part[end][ln.index] = _end_code(ln.lo_tag if end == "lo" else ln.hi_tag)
            else:
                other, c = res
                part[end][ln.index] = other.index
                sign[end][ln.index] = 1 if color_of(c) == BLACK else -1
    S = len(domain.slots)
    up = np.empty(S, np.int64)
    dn = np.empty(S, np.int64)
    sg = np.empty(S, np.int64)
    lo = np.empty(S)
    lengths = np.empty(S)
    for s in domain.slots:
        black = s.color == BLACK
        up[s.index] = s.right_lane if black else s.left_lane
        dn[s.index] = s.left_lane if black else s.right_lane
        sg[s.index] = 1 if black else -1
        lo[s.index] = s.lo
        lengths[s.index] = s.length
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    board = Board(lane_up, part["lo"], part["hi"], sign["lo"], sign["hi"], int(domain.marks[0].lane),
                  up, dn, sg, lo, cum)
    domain._cache["board"] = board
    return board


def config_points(domain: SemiDiscreteDomain, cfg: Configuration):
    """(slot, t) arrays for the points of cfg; checks adjacency ties."""
    slots, ts = [], []
    for m, t in cfg.points():
        s = domain.slot_at(m, t)
        if s is None:
            raise InvalidConfig(f"point ({m}, {t}) is not interior")
        slots.append(s.index)
        ts.append(t)
    _check_ties(cfg, domain.tol)
    return np.array(slots, dtype=np.int64), np.array(ts, dtype=float)


def _check_ties(cfg, tol):
    allpts = {}
    for m, t in cfg.points():
        allpts.setdefault(m, []).append(t)
    for m, ts in allpts.items():
        nb = allpts.get(m + 1)
        if not nb:
            continue
        arr = np.sort(np.asarray(nb))
        for t in ts:
            j = np.searchsorted(arr, t)
            for k in (j - 1, j):
                if 0 <= k < len(arr) and abs(arr[k] - t) <= tol:
                    raise TieBreak(f"events at t={t} on adjacent columns {m}, {m + 1}")


@dataclass(frozen=True)
class VerticalRun:
    line: float  # physical x of the medial line
    t0: float
    t1: float
    direction: str  # 'up' | 'down'


@dataclass(frozen=True)
class HorizontalHop:
    t: float
    from_line: float
    to_line: float
    direction: str  # 'left' | 'right'


@dataclass(frozen=True)
class Pass:
    direction: str
    winding: float  # radians to b
    quarter_turns: int
    run: int
    trace_key: int


@dataclass(frozen=True)
class PassRecord:
    z: tuple
    passes: tuple


class _Raw(NamedTuple):
    status: int
    ev_start: np.ndarray
    ev_t: np.ndarray
    ev_pt: np.ndarray
    up_pos: np.ndarray
    dn_pos: np.ndarray
    run_start: np.ndarray
    run_lane: np.ndarray
    curve: np.ndarray
    cum: np.ndarray
    order: np.ndarray
    next: np.ndarray
    turn: np.ndarray
    totals: np.ndarray


@dataclass(eq=False)
class InterfaceTrace:
    domain: SemiDiscreteDomain
    config: Configuration
    raw: _Raw
    p_slot: np.ndarray
    p_t: np.ndarray
    interface: list = field(default_factory=list)
    turning: list = field(default_factory=list)  # radians after each segment
    loops: list = field(default_factory=list)
    loop_turning: list = field(default_factory=list)

    @property
    def loop_count(self) -> int:
        return len(self.raw.totals) - 1

    @property
    def total_turning(self) -> float:
        return float(self.raw.totals[0]) * QUARTER

    def key(self) -> int:
        return id(self)

    # run geometry
    def run_extent(self, r: int):
        raw = self.raw
        l = int(raw.run_lane[r])
        lane = self.domain.lanes[l]
        j = r - int(raw.run_start[l])
        k = int(raw.ev_start[l + 1] - raw.ev_start[l])
        e0 = int(raw.ev_start[l])
        lo = lane.lo if j == 0 else float(raw.ev_t[e0 + j - 1])
        hi = lane.hi if j == k else float(raw.ev_t[e0 + j])
        return lane, lo, hi

    def to_json(self) -> list:
        out = []
        for seg in self.interface:
            if isinstance(seg, VerticalRun):
                out.append({"kind": "run", "x": seg.line, "t0": seg.t0, "t1": seg.t1, "dir": seg.direction})
            else:
                out.append({"kind": "hop", "x": seg.from_line, "x1": seg.to_line, "t0": seg.t, "t1": seg.t,
                            "dir": seg.direction})
        for i, loop in enumerate(self.loops):
            for seg in loop:
                doc = {"loop": i + 1}
                if isinstance(seg, VerticalRun):
                    doc.update(kind="run", x=seg.line, t0=seg.t0, t1=seg.t1, dir=seg.direction)
                else:
                    doc.update(kind="hop", x=seg.from_line, x1=seg.to_line, t0=seg.t, t1=seg.t, dir=seg.direction)
                out.append(doc)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def raw_trace(domain, p_slot, p_t, fault: int = 0) -> _Raw:
    board = compile_board(domain)
    res = K.trace_runs(*board.kernel_args(), p_slot, p_t, len(p_t), fault)
    raw = _Raw(*res)
    if raw.status != 0:
        raise InvalidConfig(f"inconsistent medial structure (code {raw.status})")
    return raw


def _segments_for(trace: InterfaceTrace, runs):
    """Segments of a curve and the quarter turns at each junction after them."""
    lat = trace.domain.lattice
    segs, incs = [], []
    for r in runs:
        lane, lo, hi = trace.run_extent(r)
        x = lat.line_x(lane.line)
        segs.append(VerticalRun(x, lo, hi, "up" if lane.up else "down"))
        nxt = int(trace.raw.next[r])
        turn = int(trace.raw.turn[r])
        t_end = hi if lane.up else lo
        if nxt >= 0:
            other = trace.domain.lanes[int(trace.raw.run_lane[nxt])]
            x1 = lat.line_x(other.line)
            segs.append(HorizontalHop(t_end, x, x1, "right" if x1 > x else "left"))
            incs += [turn // 2, turn // 2]
        else:
            segs.append(HorizontalHop(t_end, x, x + lat.delta / 4, "right"))
            incs.append(turn)
    return segs, incs


def _runs_of_curve(raw: _Raw, c: int):
    idx = np.nonzero(raw.curve == c)[0]
    return idx[np.argsort(raw.order[idx])]


def trace_arrangement(domain: SemiDiscreteDomain, config: Configuration, fault: int = 0) -> InterfaceTrace:
    """Trace gamma from a to b and every closed loop of the configuration."""
    p_slot, p_t = config_points(domain, config)
    raw = raw_trace(domain, p_slot, p_t, fault)
    tr = InterfaceTrace(domain, config, raw, p_slot, p_t)
    segs, incs = _segments_for(tr, _runs_of_curve(raw, 0))
    # the curve leaves a horizontally
    a = domain.marks[0]
    xa = domain.lattice.line_x(a.line)
    lead = HorizontalHop(a.t, xa - domain.delta / 4, xa, "right")
    first_turn = 1 if a.direction == "up" else -1
    tr.interface = [lead] + segs
    tr.turning = list(QUARTER * np.cumsum([first_turn] + incs))
    for c in range(1, tr.loop_count + 1):
        lsegs, _ = _segments_for(tr, _runs_of_curve(raw, c))
        tr.loops.append(lsegs)
        tr.loop_turning.append(float(raw.totals[c]) * QUARTER)
    return tr


def gamma_quarter_turns(trace: InterfaceTrace) -> int:
    """Total quarter turns from the horizontal departure at a to the horizontal exit at b."""
    a = trace.domain.marks[0]
    first = 1 if a.direction == "up" else -1
    return first + int(trace.raw.totals[0])


def _lanes_at(domain, m, t):
    """(up lane, down lane) indices of the medial lines beside column m at time t (-1 if absent)."""
    black = color_of(m) == BLACK
    q_up, q_dn = (m, m - 1) if black else (m - 1, m)
    up = domain.lane_at(q_up, t)
    dn = domain.lane_at(q_dn, t)
    return (-1 if up is None else up.index), (-1 if dn is None else dn.index)


def _mk(trace, direction, quarter, run):
    return Pass(direction, quarter * QUARTER, int(quarter), int(run), trace.key())


def _on_gamma(trace, r) -> bool:
    return int(trace.raw.curve[r]) == 0


def _vertical_passes(trace, m, t):
    raw = trace.raw
    T = int(raw.totals[0])
    out = []
    up, dn = _lanes_at(trace.domain, m, t)
    for lane, name in ((up, "up"), (dn, "down")):
        if lane < 0:
            continue
        r = int(K.run_at(lane, t, raw.ev_start, raw.ev_t, raw.run_start))
        if _on_gamma(trace, r):
            out.append(_mk(trace, name, T - int(raw.cum[r]), r))
    return out


def _point_index(trace, m, t):
    dom = trace.domain
    s = dom.slot_at(m, t)
    if s is None:
        return None
    hits = np.nonzero((trace.p_slot == s.index) & (np.abs(trace.p_t - t) <= dom.tol))[0]
    return int(hits[0]) if len(hits) else None


def _horizontal_passes(trace, m, t):
    raw = trace.raw
    dom = trace.domain
    T = int(raw.totals[0])
    board = compile_board(dom)
    out = []
    p = _point_index(trace, m, t)
    if p is not None:
        s = int(trace.p_slot[p])
        sg = int(board.slot_sign[s])
        below = int(raw.run_start[board.slot_up_lane[s]] + raw.up_pos[p])
        above = int(raw.run_start[board.slot_dn_lane[s]] + raw.dn_pos[p] + 1)
        white = sg < 0
        if _on_gamma(trace, below):
            out.append(_mk(trace, "right" if white else "left", T - int(raw.cum[below]) - sg, below))
        if _on_gamma(trace, above):
            out.append(_mk(trace, "left" if white else "right", T - int(raw.cum[above]) - sg, above))
        return out
    if dom.classify(m, t).position != HBOUNDARY:
        return out
    for r, hop_dir, sg in _boundary_hops(trace, m, t):
        if r == -2:
            out.append(Pass("right", 0.0, 0, -1, trace.key()))
        elif r == -3:
            w = gamma_quarter_turns(trace)
            out.append(Pass("right", w * QUARTER, w, -3, trace.key()))
        elif _on_gamma(trace, r):
            out.append(_mk(trace, hop_dir, T - int(raw.cum[r]) - sg, r))
    return out


def _boundary_hops(trace, m, t):
    """Bounce hops crossing column m at a horizontal boundary time t: (arriving run, dir, sign)."""
    dom = trace.domain
    raw = trace.raw
    res = []
    a, b = dom.marks
    if a.line - 1 == m and abs(a.t - t) <= dom.tol:
        res.append((-3, "right", 0))
    for ln in dom.lanes:
        for end in ("lo", "hi"):
            te = ln.hi if end == "hi" else ln.lo
            if abs(te - t) > dom.tol:
                continue
            tag = ln.hi_tag if end == "hi" else ln.lo_tag
            if tag == "b" and b.line + 1 == m:
                res.append((-2, "right", 0))
                continue
            bp = bounce_partner(dom, ln, end)
            if bp is None or bp[1] != m:
                continue
            arriving = (ln.up and end == "hi") or (not ln.up and end == "lo")
            if not arriving:
                continue
            r = int(raw.run_start[ln.index + 1] - 1) if end == "hi" else int(raw.run_start[ln.index])
            partner = bp[0]
            d = "right" if partner.line > ln.line else "left"
            res.append((r, d, 1 if color_of(m) == BLACK else -1))
    return res


def passes_at(trace: InterfaceTrace, z) -> PassRecord:
    """Passes of gamma by the lattice point z = (m, t) and their windings to b."""
    m, t = int(z[0]), float(z[1])
    ps = _vertical_passes(trace, m, t) + _horizontal_passes(trace, m, t)
    return PassRecord((m, t), tuple(ps))


def winding_to_exit(trace: InterfaceTrace, p: Pass) -> float:
    """Recompute the winding of a pass from the trace it was recorded on."""
    if p.trace_key != trace.key():
        raise ForeignPass("pass was recorded on a different trace")
    if p.run == -3:
        return gamma_quarter_turns(trace) * QUARTER
    if p.run < 0:
        return 0.0
    raw = trace.raw
    q = int(raw.totals[0]) - int(raw.cum[p.run])
    if p.direction in ("left", "right"):
        # hops are recorded on the arriving run: drop the turn onto the hop
        q -= int(raw.turn[p.run]) // 2
    return q * QUARTER
