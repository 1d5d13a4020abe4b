"""Random-parity labellings, the spin observable, space-time spins and
Kramers-Wannier duality.

Labellings live on the black columns of a dual domain; bridges sit on white
columns and switch the label on both black neighbours.  Winding angles are
sums of quarter turns along the source-to-source path.
"""
from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _rep_kernels as rk
from .configuration import Configuration, make_rng, sample_poisson
from .errors import (BoundaryViolation, InvalidMarks, NTooLarge, TieBreak, ZeroDenominator)
from .geometry import BLACK, HBOUNDARY, INTERIOR, VBOUNDARY, WHITE, SemiDiscreteDomain, color_of
from .oracle import Estimate, log_mean_estimate, poisson_columns
from .sampler import ChainParams

HALF_PI = math.pi / 2
ANGLE = {"up": HALF_PI, "down": -HALF_PI, "right": 0.0, "left": math.pi}
N_MAX_ENUM = 20


def _turn(d0: str, d1: str) -> float:
    x = ANGLE[d1] - ANGLE[d0]
    x = (x + math.pi) % (2 * math.pi) - math.pi
    if abs(x + math.pi) < 1e-12:
        raise ValueError(f"reversal {d0} -> {d1} has no winding")
    return x


class _NotInA:
    """The configuration admits no labelling (odd switch count on some column)."""
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __bool__(self):
        return False

    def __repr__(self):
        return "NotInA"


NotInA = _NotInA()


@dataclass(frozen=True)
class SourceMark:
    """The start mark a: the lattice point, its interior black neighbour and the first direction."""
    point: tuple
    interior: tuple
    direction: str
    on_side: bool  # a on a white vertical boundary column


def source_mark(domain: SemiDiscreteDomain, a) -> SourceMark:
    m, t = int(a[0]), float(a[1])
    pc = domain.classify(m, t)
    if pc.color == WHITE and pc.position == VBOUNDARY:
        for nb, d in ((m + 1, "right"), (m - 1, "left")):
            if domain.classify(nb, t).position == INTERIOR:
                return SourceMark((m, t), (nb, t), d, True)
        raise InvalidMarks(f"white boundary point {a} has no interior black neighbour")
    if pc.color == BLACK and pc.position == HBOUNDARY:
        lo, hi = _segment_of(domain, m, t)
        d = "up" if abs(t - lo) < abs(t - hi) else "down"
        return SourceMark((m, t), (m, t), d, False)
    raise InvalidMarks(f"a={a} must be a white vertical-boundary or black horizontal-boundary point")


def _segment_of(domain, m, t):
    col = domain.column(m)
    tol = domain.tol
    if col is not None:
        for lo, hi in col.intervals:
            if lo - tol <= t <= hi + tol:
                return lo, hi
    raise InvalidMarks(f"({m}, {t}) is not on a black column of the domain")


def lower_boundary(domain, b) -> bool:
    """b is the lower endpoint of a black segment."""
    m, t = int(b[0]), float(b[1])
    if color_of(m) != BLACK or domain.classify(m, t).position != HBOUNDARY:
        return False
    lo, hi = _segment_of(domain, m, t)
    return abs(t - lo) <= domain.tol


@dataclass
class BridgeSwitches:
    """Bridge endpoints per black segment, independent of the sources."""
    domain: SemiDiscreteDomain
    segments: list  # (m, lo, hi)
    switches: list  # per segment: list of (t, other_column)
    seg_index: dict  # m -> list of segment ids

    def segment(self, m, t) -> int:
        tol = self.domain.tol
        for s in self.seg_index.get(m, ()):
            _, lo, hi = self.segments[s]
            if lo - tol <= t <= hi + tol:
                return s
        raise InvalidMarks(f"({m}, {t}) is not on a black segment")


def bridge_switches(domain: SemiDiscreteDomain, config: Configuration) -> BridgeSwitches:
    segs, idx = [], {}
    for col in domain.columns:
        if col.color != BLACK:
            continue
        for lo, hi in col.intervals:
            idx.setdefault(col.x_index, []).append(len(segs))
            segs.append((col.x_index, lo, hi))
    sw = [[] for _ in segs]
    out = BridgeSwitches(domain, segs, sw, idx)
    for wm, ts in config.bridges.items():
        if config.cuts and any(config.cuts.values()):
            raise ValueError("labellings take bridges-only configurations")
        for t in ts:
            sw[out.segment(wm - 1, t)].append((t, wm + 1))
            sw[out.segment(wm + 1, t)].append((t, wm - 1))
    return out


@dataclass
class ParityLabelling:
    domain: Optional[SemiDiscreteDomain]
    sources: tuple  # black points where the label switches without a bridge
    intervals: list  # (m, t0, t1) closed pieces where psi = 1
    total_length: float
    path: list  # vertices (m, t) from a to z, including half-edge ends
    dirs: list  # direction of every step of the path
    loops: int
    a: Optional[SourceMark] = None
    z: Optional[tuple] = None
    z_black: Optional[tuple] = None
    bridges: list = field(default_factory=list)  # (white column, t), used by the duality map
    winding: float = 0.0

    @property
    def white_end(self) -> bool:
        return self.z is not None and color_of(self.z[0]) == WHITE

    def half_edge_end(self) -> bool:
        """The path ends with a half-edge: z white, or a on a side with z = a_int."""
        if self.white_end:
            return True
        return self.a is not None and self.a.on_side and self.z == self.a.interior

    def to_json(self) -> dict:
        return {"intervals": [[m, t0, t1] for m, t0, t1 in self.intervals],
                "path": [[m, t] for m, t in self.path], "loops": self.loops,
                "total_length": self.total_length}

    def psi(self, m, t) -> int:
        return int(any(mm == m and t0 <= t <= t1 for mm, t0, t1 in self.intervals))


def _labelling_core(bs: BridgeSwitches, a: SourceMark, zb: tuple, z: tuple):
    dom = bs.domain
    tol = dom.tol
    srcs = []
    if not (a.interior[0] == zb[0] and abs(a.interior[1] - zb[1]) <= tol):
        srcs = [a.interior, zb]
    sw = {}
    for p in srcs:
        s = bs.segment(p[0], p[1])
        for t, _ in bs.switches[s]:
            if abs(t - p[1]) <= tol:
                raise TieBreak(f"source {p} coincides with a bridge endpoint")
        sw.setdefault(s, list(bs.switches[s])).append((p[1], None))
    lists = []
    for s in range(len(bs.segments)):
        ls = sorted(sw.get(s, bs.switches[s]), key=lambda e: e[0])
        if len(ls) % 2:
            return NotInA
        lists.append(ls)
    intervals, total = [], 0.0
    where = {}
    for s, ls in enumerate(lists):
        m = bs.segments[s][0]
        for j in range(0, len(ls), 2):
            intervals.append((m, ls[j][0], ls[j + 1][0]))
            total += ls[j + 1][0] - ls[j][0]
        for j, (t, _) in enumerate(ls):
            where[(m, round(t / tol))] = (s, j)
    used = set()
    path, dirs = [a.point], []
    d = a.direction
    if a.on_side:
        path.append(a.interior)
        dirs.append(d)
    W = 0.0
    if srcs:
        s = bs.segment(*a.interior)
        j = next(k for k, e in enumerate(lists[s]) if e[1] is None and abs(e[0] - a.interior[1]) <= tol)
        while True:
            m = bs.segments[s][0]
            used.add((s, j // 2))
            k = j ^ 1
            t0, t1 = lists[s][j][0], lists[s][k][0]
            nd = "up" if t1 > t0 else "down"
            W += _turn(d, nd)
            d = nd
            dirs.append(d)
            path.append((m, t1))
            other = lists[s][k][1]
            if other is None:
                break
            nd = "right" if other > m else "left"
            W += _turn(d, nd)
            d = nd
            dirs.append(d)
            path.append((other, t1))
            s, j = where[(other, round(t1 / tol))]
    loops = _count_loops(lists, bs, where, used, tol)
    if color_of(z[0]) == WHITE:
        nd = "right" if z[0] > zb[0] else "left"
        if not srcs and a.on_side and z == a.point:
            W = math.pi
        else:
            W += _turn(d, nd)
        dirs.append(nd)
        path.append(z)
    lab = ParityLabelling(dom, tuple(srcs), intervals, total, path, dirs, loops, a, z, zb, winding=W)
    return lab, W


def _count_loops(lists, bs, where, used, tol):
    seen = set(used)
    loops = 0
    for s, ls in enumerate(lists):
        for j0 in range(0, len(ls), 2):
            if (s, j0 // 2) in seen:
                continue
            loops += 1
            cs, cj = s, j0
            while (cs, cj // 2) not in seen:
                seen.add((cs, cj // 2))
                k = cj ^ 1
                t = lists[cs][k][0]
                other = lists[cs][k][1]
                if other is None:
                    break
                cs, cj = where[(other, round(t / tol))]
    return loops


def _resolve_z(domain, z):
    m, t = int(z[0]), float(z[1])
    pc = domain.classify(m, t)
    if pc.position not in (INTERIOR, HBOUNDARY, VBOUNDARY):
        raise InvalidMarks(f"z={z} lies outside the domain")
    if pc.color == BLACK:
        return (m, t), [(m, t)]
    nbs = [(nb, t) for nb in (m - 1, m + 1) if domain.classify(nb, t).position in (INTERIOR, HBOUNDARY)]
    if not nbs:
        raise InvalidMarks(f"white z={z} has no black neighbour in the domain")
    return (m, t), nbs


def labelling_and_winding(domain, config, a, z, switches: Optional[BridgeSwitches] = None):
    """(labelling, winding) or (NotInA, None); white z tries both black neighbours."""
    am = a if isinstance(a, SourceMark) else source_mark(domain, a)
    bs = switches or bridge_switches(domain, config)
    zz, cands = _resolve_z(domain, z)
    for zb in cands:
        r = _labelling_core(bs, am, zb, zz)
        if r is not NotInA:
            return r
    return NotInA, None


def build_labelling(domain, config, a, z):
    """ParityLabelling with sources a_int and z, or NotInA."""
    return labelling_and_winding(domain, config, a, z)[0]


def spin_weight(labelling, h: float, z_color_flag: Optional[bool] = None) -> float:
    """exp(-2h|I|) times 1/sqrt(2) when the path ends with a half-edge."""
    if labelling is NotInA:
        return 0.0
    half = labelling.half_edge_end() if z_color_flag is None else bool(z_color_flag)
    return math.exp(-2 * h * labelling.total_length) * (1 / math.sqrt(2) if half else 1.0)


def parity_winding(labelling) -> float:
    """Winding angle (radians) of the path from a to z."""
    if labelling is NotInA:
        raise ValueError("no labelling")
    return labelling.winding


# ---------------------------------------------------------------------------
# spin observable

@dataclass
class SpinField:
    grid: list  # (m, t)
    values: np.ndarray
    se: np.ndarray  # componentwise: se(re) + i se(im)
    n_samples: int
    delta: float
    meta: dict = field(default_factory=dict)

    def index(self, m, t):
        for i, (mm, tt) in enumerate(self.grid):
            if mm == m and abs(tt - t) < 1e-9:
                return i
        return None

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["col_index", "color", "t", "re", "im", "se_re", "se_im", "n"])
            for (m, t), v, s in zip(self.grid, self.values, self.se):
                w.writerow([m, color_of(m), repr(float(t)), repr(float(v.real)), repr(float(v.imag)),
                            repr(float(s.real)), repr(float(s.imag)), self.n_samples])


def spin_contribution(domain, config, a, z, h, switches=None) -> complex:
    lab, W = labelling_and_winding(domain, config, a, z, switches)
    if lab is NotInA:
        return 0j
    return cmath.exp(-0.5j * W) * spin_weight(lab, h)


def _exact_mean(x) -> complex:
    return complex(math.fsum(x.real), math.fsum(x.imag)) / len(x)


def spin_field(domain, a, b, grid: Sequence, chain_params: Optional[ChainParams] = None) -> SpinField:
    """Ratio estimator of the spin observable from iid Poisson bridge samples at rate 1/(2 delta)."""
    if not lower_boundary(domain, b):
        raise InvalidMarks(f"b={b} must lie on the lower boundary of a black column")
    cp = chain_params or ChainParams()
    d = domain.delta
    J = h = 1 / (2 * d)
    am = source_mark(domain, a)
    rng = make_rng(cp.seed)
    n = cp.n_samples
    num = np.zeros((len(grid), n), np.complex128)
    den = np.zeros(n, np.complex128)
    for s in range(n):
        cfg = sample_poisson(domain, 0.0, J, rng)
        bs = bridge_switches(domain, cfg)
        den[s] = spin_contribution(domain, cfg, am, b, h, bs)
        for i, z in enumerate(grid):
            num[i, s] = spin_contribution(domain, cfg, am, z, h, bs)
    md = _exact_mean(den)
    meta = {"denominator": [md.real, md.imag], "samples_in_A_ab": int(np.count_nonzero(den))}
    if np.count_nonzero(den) == 0:
        raise ZeroDenominator("no sample admits a labelling from a to b")
    # complex c / c need not round to 1; rows equal to the denominator sample by sample are 1 identically
    r = np.array([1.0 if np.array_equal(row, den) else _exact_mean(row) / md for row in num], np.complex128)
    resid = (num - r[:, None] * den[None, :]) / md
    se = (resid.real.std(axis=1, ddof=1) + 1j * resid.imag.std(axis=1, ddof=1)) / math.sqrt(n)
    sd = math.hypot(den.real.std(ddof=1), den.imag.std(ddof=1)) / math.sqrt(n)
    meta["denominator_se"] = sd
    meta["denominator_resolved"] = bool(abs(md) > 3 * sd)
    return SpinField([(int(m), float(t)) for m, t in grid], r, se, n, d, meta)


def boundary_tangent(domain, z) -> complex:
    """Counter-clockwise unit tangent at a boundary point of a dual rectangle-like domain."""
    m, t = int(z[0]), float(z[1])
    pc = domain.classify(m, t)
    if pc.color == WHITE and pc.position == VBOUNDARY:
        left = domain.classify(m + 1, t).position == INTERIOR
        return -1j if left else 1j
    if pc.color == BLACK and pc.position == HBOUNDARY:
        return 1.0 if lower_boundary(domain, z) else -1.0
    raise InvalidMarks(f"{z} is not on the vertical white or horizontal black boundary")


def boundary_phase_residuals(fld: SpinField, domain) -> list:
    """Per boundary site: Im(nu^{1/2} F) and its error."""
    out = []
    for (m, t), v, s in zip(fld.grid, fld.values, fld.se):
        try:
            nu = boundary_tangent(domain, (m, t))
        except InvalidMarks:
            continue
        r = cmath.sqrt(nu)
        x = r * v
        # error of Im(r v) for independent re/im errors
        err = math.hypot(r.imag * s.real, r.real * s.imag)
        out.append({"m": m, "t": t, "im": x.imag, "se": err})
    return out


# ---------------------------------------------------------------------------
# the four winding cases

def winding_case(domain, config, a, w, t_hat: float, eps: float) -> dict:
    """Classify the bridge at (w column, t_hat) in (t, t + eps) and report the three windings.

    config holds the bridge; the labelling for u = w - delta/2 must exist.
    """
    wm, t = int(w[0]), float(w[1])
    if color_of(wm) != WHITE or not (t < t_hat < t + eps):
        raise ValueError("w must be white and t < t_hat < t + eps")
    if t_hat not in config.bridges.get(wm, ()):
        raise ValueError("config must hold the bridge at t_hat")
    am = source_mark(domain, a)
    u, v = (wm - 1, t), (wm + 1, t)
    bs = bridge_switches(domain, config)
    r1 = _labelling_core(bs, am, u, (wm, t))
    if r1 is NotInA:
        raise ValueError("config is not in A(a, u)")
    lab1, W1 = r1
    lab2, W2 = _labelling_core(bs, am, (wm - 1, t + eps), (wm, t + eps))
    rest = tuple(x for x in config.bridges[wm] if x != t_hat)
    br = dict(config.bridges)
    if rest:
        br[wm] = rest
    else:
        del br[wm]
    xi_hat = Configuration(config.cuts, br, domain, config.topology, config.cut_parity)
    r0 = _labelling_core(bridge_switches(domain, xi_hat), am, v, (wm, t))
    if r0 is NotInA:
        raise ValueError("the configuration without the bridge is not in A(a, v)")
    lab0, W0 = r0
    if any(mm == wm - 1 and abs(t0 - t) < 1e-12 for mm, t0, _ in lab1.intervals):
        case = "a"
    else:
        case = "d"
        for p, q in zip(lab1.path, lab1.path[1:]):
            if abs(p[1] - t_hat) < 1e-12 and abs(q[1] - t_hat) < 1e-12 and p[0] != q[0]:
                case = "b" if q[0] < p[0] else "c"
    expected = {"a": (math.pi, -math.pi), "b": (math.pi, -math.pi),
                "c": (-3 * math.pi, -math.pi), "d": (math.pi, 3 * math.pi)}[case]
    phase = cmath.exp(-0.5j * W2) - cmath.exp(-0.5j * W1) - 2j * cmath.exp(-0.5j * W0)
    return {"case": case, "W_w": W1, "W_w_eps": W2, "W_hat": W0,
            "diff_w": W1 - W0, "diff_w_eps": W2 - W0, "expected": expected,
            "phase_residual": abs(phase),
            "exact": abs(W1 - W0 - expected[0]) < 1e-9 and abs(W2 - W0 - expected[1]) < 1e-9}


# ---------------------------------------------------------------------------
# space-time spins and duality

@dataclass
class SpinConfig:
    """Columns 1..N on the circle [0, beta): base sign at t = 0 and sorted cut times."""
    beta: float
    base: tuple
    cuts: tuple  # per column, sorted times

    @property
    def N(self) -> int:
        return len(self.base)

    def sign(self, x: int, t: float) -> int:
        k = int(np.searchsorted(self.cuts[x - 1], t, side="right"))
        return self.base[x - 1] * (-1) ** k

    def admissible(self) -> bool:
        return all(len(c) % 2 == 0 for c in self.cuts)


def _cut_arrays(cuts, N):
    counts = np.array([[len(c) for c in cuts]], np.int64).reshape(1, N)
    times = np.array([t for c in cuts for t in c], float)
    return counts, times


def spacetime_spin_weight(N: int, beta: float, cuts: Sequence, J: float, observable=None) -> float:
    """Sum over sign choices sigma in S(xi) of exp(J sum_x int sigma_x sigma_{x+1} dt).

    With observable=(x, y) each term carries sigma_x(0) sigma_y(0).
    """
    if N > N_MAX_ENUM:
        raise NTooLarge(f"N={N} exceeds {N_MAX_ENUM} for exact enumeration")
    if len(cuts) != N:
        raise ValueError("one cut list per column")
    cc, ct = _cut_arrays([sorted(c) for c in cuts], N)
    x, y = observable if observable is not None else (1, 1)
    w, wc = rk.stim_samples(cc, ct, float(beta), float(J), x - 1, y - 1, False)
    return float(wc[0] if observable is not None else w[0])


def parity_sum(N: int, beta: float, bridges: Sequence, h: float, sources=None) -> float:
    """Sum over psi in {0,1}^N of exp(-2h|I(psi_A)|); bridges[g] on the gap between columns g+1, g+2."""
    if N > N_MAX_ENUM:
        raise NTooLarge(f"N={N} exceeds {N_MAX_ENUM} for exact enumeration")
    cc, ct = _cut_arrays([sorted(b) for b in bridges], N - 1) if N > 1 else (np.zeros((1, 0), np.int64), np.zeros(0))
    sx, sy = (sources[0] - 1, sources[1] - 1) if sources else (-1, -1)
    return float(rk.rpr_samples(cc, ct, N, float(beta), float(h), sx, sy, False)[0])


def parity_sum_factorized(N, beta, bridges, h, sources=None) -> float:
    """Same sum using independence of the columns."""
    total = 1.0
    for c in range(N):
        ts = []
        if c > 0:
            ts += list(bridges[c - 1])
        if c < N - 1:
            ts += list(bridges[c])
        if sources and (sources[0] - 1 == c) != (sources[1] - 1 == c):
            ts.append(0.0)
        if len(ts) % 2:
            return 0.0
        ts.sort()
        L = sum(ts[j + 1] - ts[j] for j in range(0, len(ts), 2))
        total *= math.exp(-2 * h * L) + math.exp(-2 * h * (beta - L))
    return total


def kw_dual_map(sigma: SpinConfig) -> ParityLabelling:
    """psi = 1 where neighbouring spins disagree; each cut on column x becomes a bridge at x."""
    N = sigma.N
    if sigma.base[0] != 1 or sigma.base[-1] != 1 or sigma.cuts[0] or sigma.cuts[-1]:
        raise BoundaryViolation("columns 1 and N must be +1 at all times")
    if any(b != 1 for b in sigma.base):
        raise BoundaryViolation("sigma must be +1 at t = 0 on every column")
    if not sigma.admissible():
        raise BoundaryViolation("odd cut count breaks periodicity")
    intervals, total = [], 0.0
    for x in range(1, N):
        ts = sorted(set(sigma.cuts[x - 1]) | set(sigma.cuts[x]))
        # disagreement toggles at every cut of either column
        for j in range(0, len(ts) - 1, 2):
            intervals.append((x, ts[j], ts[j + 1]))
            total += ts[j + 1] - ts[j]
    bridges = [(x, t) for x in range(2, N) for t in sigma.cuts[x - 1]]
    return ParityLabelling(None, (), intervals, total, [], [], _dual_loops(intervals, bridges), bridges=bridges)


def _dual_loops(intervals, bridges):
    # dual column x sits between spins x and x+1; a bridge at spin column x joins dual x-1 and x
    ends = {}
    for k, (x, t0, t1) in enumerate(intervals):
        ends.setdefault((x, t0), []).append(k)
        ends.setdefault((x, t1), []).append(k)
    parent = list(range(len(intervals)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i
    for x, t in bridges:
        a = ends.get((x - 1, t), [])
        b = ends.get((x, t), [])
        for i in a:
            for j in b:
                parent[find(i)] = find(j)
    return len({find(i) for i in range(len(intervals))})


def kw_inverse(psi: ParityLabelling, N: int, beta: float) -> SpinConfig:
    """Spins from the dual labelling: sigma_1 = +1 and sigma_{x+1} = sigma_x (1 - 2 psi_{x+1/2})."""
    cuts = [[] for _ in range(N)]
    for x, t in psi.bridges:
        cuts[x - 1].append(t)
    return SpinConfig(beta, tuple([1] * N), tuple(tuple(sorted(c)) for c in cuts))


def random_wired_spins(N: int, beta: float, rate: float, seed) -> SpinConfig:
    """Poisson cuts on columns 2..N-1 conditioned on even counts column by column."""
    rng = make_rng(seed)
    cuts = [()]
    for _ in range(N - 2):
        while True:
            k = rng.poisson(rate * beta)
            if k % 2 == 0:
                break
        cuts.append(tuple(sorted(beta * rng.random(k))))
    cuts.append(())
    return SpinConfig(beta, tuple([1] * N), tuple(cuts))


def log_z_plus(N: int, beta: float, h: float, J: float, n: int, seed) -> Estimate:
    """log Z+ from wired space-time spins: cuts at rate h on the N-2 interior columns."""
    rng = make_rng(seed)
    cc_in, ct = poisson_columns(rng, n, N - 2, h, beta)
    cc = np.zeros((n, N), np.int64)
    cc[:, 1:N - 1] = cc_in
    w, _ = rk.stim_samples(cc, ct, beta, J, 0, 0, True)
    return log_mean_estimate(w, beta * h * N)


def log_z_zero(N_dual: int, beta: float, J: float, h: float, n: int, seed) -> Estimate:
    """log Z0_{N_dual}(J, h): parity labels on N_dual columns, bridges at rate h, psi = 0 at t = 0.

    The roles of the couplings are swapped relative to the spin side, so
    the label length is discounted at rate 2J.
    """
    rng = make_rng(seed)
    bc, bt = poisson_columns(rng, n, N_dual - 1, h, beta)
    w = rk.rpr_samples(bc, bt, N_dual, beta, J, -1, -1, True)
    return log_mean_estimate(w, beta * J * N_dual + beta * h * (N_dual - 1))


def kw_free_energy_check(N: int, beta: float, h: float, J: float, n: int, seed: int = 0) -> dict:
    """log Z+_N(h, J) - log Z0_{N-1}(J, h) against 2 beta h with independent streams."""
    s1, s2 = [np.random.Generator(np.random.Philox(c)) for c in np.random.SeedSequence(seed).spawn(2)]
    zp = log_z_plus(N, beta, h, J, n, s1)
    z0 = log_z_zero(N - 1, beta, J, h, n, s2)
    diff = zp.mean - z0.mean
    se = math.hypot(zp.se, z0.se)
    target = 2 * beta * h
    return {"N": N, "beta": beta, "h": h, "J": J, "n": n, "log_z_plus": zp.to_json(),
            "log_z_zero": z0.to_json(), "difference": diff, "se": se, "target": target,
            "z": abs(diff - target) / se if se > 0 else math.inf}
