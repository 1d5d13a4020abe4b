"""Semi-discrete domains on the lattice deltaZ + iR.

Columns are indexed by integers m in half-steps, x = m*delta/2; even m are
black columns, odd m are white.  Medial lines sit between consecutive
columns: line q lies at x = (2q+1)*delta/4, between column q (left) and
column q+1 (right).  A line with even q has black on its left and white on
its right; curves of the FK picture travel up such lines and down the
others.

A domain is the closure of a simply connected rectilinear region.  It is
stored column-wise: every medial line carries a list of open t-intervals
("lanes") where the strip next to it lies inside the region, and every
column is the union of the closures of its two neighbouring lanes.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import (
    InvalidMarks,
    MissingMarks,
    NonSimplePath,
    NotDobrushin,
    OffLattice,
    ViolatedNeighborAssumption,
    WrongColumnParity,
    GeometryError,
)

KINDS = ("primal", "dual", "dobrushin")
BLACK, WHITE = "black", "white"
INTERIOR = "interior"
VBOUNDARY = "vertical-boundary"
HBOUNDARY = "horizontal-boundary"
EXTERIOR = "exterior"

SNAP = 1e-9  # relative to delta


def color_of(m: int) -> str:
    return BLACK if m % 2 == 0 else WHITE


@dataclass(frozen=True)
class Lattice:
    delta: float

    def __post_init__(self):
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ValueError(f"delta must be positive, got {self.delta}")

    def x_of(self, m: int) -> float:
        return m * self.delta / 2

    def line_x(self, q: int) -> float:
        return (2 * q + 1) * self.delta / 4

    def column_of(self, x: float) -> int:
        m = round(2 * x / self.delta)
        if abs(x - self.x_of(m)) > SNAP * self.delta:
            raise OffLattice(f"x={x!r} is not on a column of spacing delta/2={self.delta / 2}")
        return int(m)


@dataclass(frozen=True)
class ColumnSpan:
    x_index: int
    intervals: tuple

    @property
    def color(self) -> str:
        return color_of(self.x_index)


@dataclass(frozen=True)
class Lane:
    """Open t-interval (lo, hi) of the region on medial line `line`.

    Each end records the boundary edge it meets and a tag: the colour of
    the boundary arc there, 'a'/'b' for the Dobrushin marks, or 'none' when
    the domain carries no arcs.
    """
    index: int
    line: int
    lo: float
    hi: float
    lo_edge: int
    hi_edge: int
    lo_tag: str = "none"
    hi_tag: str = "none"

    @property
    def up(self) -> bool:
        return self.line % 2 == 0


@dataclass(frozen=True)
class Slot:
    """Maximal open interval of interior points on one column."""
    index: int
    column: int
    lo: float
    hi: float
    left_lane: int
    right_lane: int

    @property
    def color(self) -> str:
        return color_of(self.column)

    @property
    def length(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class Mark:
    """A Dobrushin mark on a medial point of a horizontal boundary edge.

    `side` says where the region lies relative to the edge ('below' or
    'above').  `direction` is the vertical direction of the interface at
    the mark: leaving a, or arriving at b.
    """
    name: str
    line: int
    t: float
    edge: int
    lane: int
    side: str
    direction: str


@dataclass(frozen=True)
class ArcSegment:
    start: tuple
    end: tuple


@dataclass(frozen=True)
class PointClass:
    color: str
    position: str


@dataclass(eq=False)
class SemiDiscreteDomain:
    lattice: Lattice
    kind: str
    path: tuple  # ccw vertices (m, t)
    columns: tuple  # ColumnSpan, closed intervals
    interior: dict  # m -> tuple of open intervals
    lanes: tuple
    slots: tuple
    marks: Optional[tuple] = None  # (a, b) as Mark
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def delta(self) -> float:
        return self.lattice.delta

    @property
    def tol(self) -> float:
        return SNAP * self.lattice.delta

    @property
    def m_range(self) -> tuple:
        return self.columns[0].x_index, self.columns[-1].x_index

    def column(self, m: int) -> Optional[ColumnSpan]:
        m0 = self.columns[0].x_index
        if m0 <= m <= self.columns[-1].x_index:
            return self.columns[m - m0]
        return None

    def lanes_on(self, q: int) -> list:
        return [ln for ln in self.lanes if ln.line == q]

    def lane_at(self, q: int, t: float) -> Optional[Lane]:
        for ln in self.lanes:
            if ln.line == q and ln.lo < t < ln.hi:
                return ln
        return None

    def slot_at(self, m: int, t: float) -> Optional[Slot]:
        for s in self.slots:
            if s.column == m and s.lo < t < s.hi:
                return s
        return None

    def interior_length(self, color: Optional[str] = None) -> float:
        return sum(s.length for s in self.slots if color is None or s.color == color)

    def classify(self, m: int, t: float) -> PointClass:
        col = self.column(m)
        c = color_of(m)
        if col is None:
            return PointClass(c, EXTERIOR)
        tol = self.tol
        for lo, hi in col.intervals:
            if abs(t - lo) <= tol or abs(t - hi) <= tol:
                return PointClass(c, HBOUNDARY)
        if not any(lo < t < hi for lo, hi in col.intervals):
            return PointClass(c, EXTERIOR)
        if any(lo < t < hi for lo, hi in self.interior.get(m, ())):
            return PointClass(c, INTERIOR)
        return PointClass(c, VBOUNDARY)

    def boundary_color(self, m: int, t: float) -> Optional[str]:
        """Arc colour ('black'/'white') of a boundary lattice point, None off the boundary."""
        if self.marks is None:
            return None
        pa, pb, n_e = self._cache["arc_positions"]
        verts = self.path
        tol = self.tol
        for e in range(n_e):
            (m0, t0), (m1, t1) = verts[e], verts[(e + 1) % n_e]
            if t0 == t1 and abs(t - t0) <= tol and min(m0, m1) <= m <= max(m0, m1):
                p = e + abs(m - m0) / abs(m1 - m0)
            elif m0 == m1 == m and min(t0, t1) - tol <= t <= max(t0, t1) + tol:
                p = e + abs(t - t0) / abs(t1 - t0)
            else:
                continue
            r = (p - pa) % n_e
            span = (pb - pa) % n_e
            return WHITE if 0 < r < span else BLACK
        return None

    def boundary_path(self) -> list:
        """Closed ccw vertex list in physical coordinates."""
        return [[self.lattice.x_of(m), t] for m, t in self.path]

    def to_json(self) -> dict:
        doc = {"delta": self.delta, "kind": self.kind, "path": self.boundary_path()}
        if self.marks is not None:
            a, b = self.marks
            doc["marks"] = {
                "a": [self.lattice.line_x(a.line), a.t, a.direction],
                "b": [self.lattice.line_x(b.line), b.t, b.direction],
            }
        return doc


# ---------------------------------------------------------------------------
# construction


def _snap_times(ts, tol):
    """Map nearly equal times onto one representative."""
    uniq = sorted(set(ts))
    rep = {}
    cur = None
    for t in uniq:
        if cur is None or t - cur > tol:
            cur = t
        rep[t] = cur
    return rep


def _normalize_path(lattice: Lattice, boundary_path) -> list:
    pts = [tuple(map(float, p[:2])) for p in boundary_path]
    if len(pts) < 4:
        raise NonSimplePath(f"path needs at least 4 vertices, got {len(pts)}")
    verts = []
    for i, (x, t) in enumerate(pts):
        if not (math.isfinite(x) and math.isfinite(t)):
            raise NonSimplePath(f"vertex {i} {list(pts[i])} is not finite")
        try:
            m = lattice.column_of(x)
        except OffLattice as exc:
            raise OffLattice(f"vertex {i} {list(pts[i])}: {exc}") from None
        verts.append((m, t, i))
    rep = _snap_times([v[1] for v in verts], SNAP * lattice.delta)
    verts = [(m, rep[t], i) for m, t, i in verts]
    if verts[0][:2] == verts[-1][:2]:
        verts.pop()
    dedup = []
    for v in verts:
        if not dedup or dedup[-1][:2] != v[:2]:
            dedup.append(v)
    while len(dedup) > 1 and dedup[0][:2] == dedup[-1][:2]:
        dedup.pop()
    verts = dedup
    n = len(verts)
    for k in range(n):
        (m0, t0, i0), (m1, t1, i1) = verts[k], verts[(k + 1) % n]
        if m0 != m1 and t0 != t1:
            raise NonSimplePath(
                f"edge from vertex {i0} to vertex {i1} is not axis-aligned")
    # merge collinear runs, rejecting backtracks
    changed = True
    while changed and len(verts) >= 3:
        changed = False
        n = len(verts)
        for k in range(n):
            p, c, nx = verts[k - 1], verts[k], verts[(k + 1) % n]
            same_m = p[0] == c[0] == nx[0]
            same_t = p[1] == c[1] == nx[1]
            if same_m or same_t:
                a0, a1, a2 = (p[1], c[1], nx[1]) if same_m else (p[0], c[0], nx[0])
                if (a1 - a0) * (a2 - a1) < 0:
                    raise NonSimplePath(f"path doubles back at vertex {c[2]}")
                verts.pop(k)
                changed = True
                break
    if len(verts) < 4:
        raise NonSimplePath("path encloses no area")
    return verts


def _edges(verts):
    n = len(verts)
    return [(verts[k], verts[(k + 1) % n]) for k in range(n)]


def _check_simple(verts):
    edges = _edges(verts)
    n = len(edges)

    def box(e):
        (m0, t0, _), (m1, t1, _) = e
        return min(m0, m1), max(m0, m1), min(t0, t1), max(t0, t1)

    boxes = [box(e) for e in edges]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            a, b = boxes[i], boxes[j]
            if a[0] <= b[1] and b[0] <= a[1] and a[2] <= b[3] and b[2] <= a[3]:
                raise NonSimplePath(
                    f"edge starting at vertex {edges[i][0][2]} meets edge starting at vertex {edges[j][0][2]}")


def _signed_area(verts):
    s = 0.0
    n = len(verts)
    for k in range(n):
        m0, t0 = verts[k][:2]
        m1, t1 = verts[(k + 1) % n][:2]
        s += m0 * t1 - m1 * t0
    return s / 2


def _merge_closed(intervals):
    out = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return tuple(out)


def _find_mark(name, point, verts, lanes, lattice, tol):
    """Locate a mark on a horizontal edge; return (line, t, edge, lane, side)."""
    x, t = float(point[0]), float(point[1])
    k4 = 4 * x / lattice.delta
    k = round(k4)
    if abs(k4 - k) > 4 * SNAP:
        raise InvalidMarks(f"mark {name} at x={x} is not a medial or lattice point")
    edges = _edges(verts)
    hits = []
    for e, ((m0, t0, _), (m1, t1, _)) in enumerate(edges):
        if t0 != t1 or abs(t - t0) > tol:
            continue
        lo, hi = 2 * min(m0, m1), 2 * max(m0, m1)  # quarter units
        if lo <= k <= hi:
            if k in (lo, hi):
                raise InvalidMarks(f"mark {name} sits on a corner of the boundary")
            hits.append((e, t0))
    if not hits:
        raise InvalidMarks(f"mark {name} at ({x}, {t}) is not on a horizontal boundary edge")
    e, te = hits[0]
    if k % 2 == 1:
        cands = [(k - 1) // 2]
    else:
        cands = [k // 2 - 1, k // 2]
    found = []
    for q in cands:
        for ln in lanes:
            if ln.line != q:
                continue
            if ln.hi == te and ln.hi_edge == e:
                found.append((q, ln, "below"))
            elif ln.lo == te and ln.lo_edge == e:
                found.append((q, ln, "above"))
    ok = []
    for q, ln, side in found:
        odd = q % 2 == 1
        # a: region below -> down-line; region above -> up-line.  b: opposite.
        wants_odd = (side == "below") if name == "a" else (side == "above")
        if odd == wants_odd:
            ok.append((q, ln, side))
    if not ok:
        raise InvalidMarks(
            f"mark {name} at ({x}, {t}) violates the placement rule "
            f"(the clockwise neighbour of a must be black; b must be reached with black on the left)")
    q, ln, side = ok[0]
    return q, te, e, ln.index, side


def build_domain(lattice: Lattice, kind: str, boundary_path: Sequence, marks=None) -> SemiDiscreteDomain:
    if kind not in KINDS:
        raise GeometryError(f"unknown domain kind {kind!r}")
    delta = lattice.delta
    tol = SNAP * delta
    verts = _normalize_path(lattice, boundary_path)
    _check_simple(verts)
    if _signed_area(verts) < 0:
        verts = [verts[0]] + verts[1:][::-1]
    edges = _edges(verts)

    vertical = [(e, a[0]) for e, (a, b) in enumerate(edges) if a[0] == b[0]]
    if kind == "primal":
        for e, m in vertical:
            if m % 2:
                raise WrongColumnParity(
                    f"vertical edge at vertex {edges[e][0][2]} lies on a white column (primal domains need black)")
    elif kind == "dual":
        for e, m in vertical:
            if m % 2 == 0:
                raise WrongColumnParity(
                    f"vertical edge at vertex {edges[e][0][2]} lies on a black column (dual domains need white)")

    m_min = min(v[0] for v in verts)
    m_max = max(v[0] for v in verts)
    if m_max - m_min < 1:
        raise GeometryError("domain has no width")

    # lanes on each medial line
    raw_lanes = []
    for q in range(m_min, m_max):
        cross = []
        for e, (a, b) in enumerate(edges):
            if a[1] == b[1] and min(a[0], b[0]) <= q and max(a[0], b[0]) >= q + 1:
                cross.append((a[1], e))
        cross.sort()
        if len(cross) % 2:
            raise NonSimplePath(f"medial line {q} crosses the boundary an odd number of times")
        for j in range(0, len(cross), 2):
            (lo, elo), (hi, ehi) = cross[j], cross[j + 1]
            raw_lanes.append((q, lo, hi, elo, ehi))
    lanes = tuple(Lane(i, q, lo, hi, elo, ehi) for i, (q, lo, hi, elo, ehi) in enumerate(raw_lanes))
    by_line = {}
    for ln in lanes:
        by_line.setdefault(ln.line, []).append(ln)

    columns = []
    interior = {}
    slots = []
    for m in range(m_min, m_max + 1):
        left = by_line.get(m - 1, [])
        right = by_line.get(m, [])
        closed = _merge_closed([(ln.lo, ln.hi) for ln in left + right])
        columns.append(ColumnSpan(m, closed))
        opens = []
        for L in left:
            for R in right:
                lo, hi = max(L.lo, R.lo), min(L.hi, R.hi)
                if hi > lo:
                    opens.append((lo, hi, L.index, R.index))
        opens.sort()
        interior[m] = tuple((lo, hi) for lo, hi, _, _ in opens)
        for lo, hi, li, ri in opens:
            slots.append(Slot(len(slots), m, lo, hi, li, ri))
    columns = tuple(columns)

    dom = SemiDiscreteDomain(lattice, kind, tuple((m, t) for m, t, _ in verts), columns,
                             interior, lanes, tuple(slots))
    _check_neighbors(dom)

    if kind == "dobrushin":
        if marks is None or "a" not in marks or "b" not in marks:
            raise MissingMarks("dobrushin domains need marks a and b")
        dom = _attach_marks(dom, verts, marks)
    elif marks:
        pass  # marks on primal/dual domains are interpreted by the caller (spin observable)
    return dom


def _vertical_boundary_pieces(dom: SemiDiscreteDomain, m: int) -> list:
    col = dom.column(m)
    pieces = []
    inner = dom.interior.get(m, ())
    for lo, hi in col.intervals:
        cuts = [iv for iv in inner if lo <= iv[0] and iv[1] <= hi]
        cur = lo
        for a, b in cuts:
            if a > cur:
                pieces.append((cur, a))
            cur = b
        if hi > cur:
            pieces.append((cur, hi))
    return pieces


def _check_neighbors(dom: SemiDiscreteDomain):
    def inside(m, t):
        return any(lo < t < hi for lo, hi in dom.interior.get(m, ()))

    for col in dom.columns:
        m = col.x_index
        for a, b in _vertical_boundary_pieces(dom, m):
            marks = {a, b}
            for mm in (m - 1, m + 1):
                for lo, hi in dom.interior.get(mm, ()):
                    for s in (lo, hi):
                        if a < s < b:
                            marks.add(s)
            pts = sorted(marks)
            probes = [(u + v) / 2 for u, v in zip(pts, pts[1:])] + [p for p in pts if a < p < b]
            for t in probes:
                if dom.classify(m, t).position != VBOUNDARY:
                    continue
                if not (inside(m - 1, t) or inside(m + 1, t)):
                    x = dom.lattice.x_of(m)
                    raise ViolatedNeighborAssumption(
                        f"boundary point ({x}, {t}) has no interior horizontal neighbour")


def _attach_marks(dom, verts, marks):
    lat = dom.lattice
    tol = dom.tol
    edges = _edges(verts)
    lanes = list(dom.lanes)
    found = {}
    for name in ("a", "b"):
        p = marks[name]
        q, t, e, li, side = _find_mark(name, p, verts, lanes, lat, tol)
        if name == "a":
            direction = "down" if side == "below" else "up"
        else:
            direction = "up" if side == "below" else "down"
        if len(p) > 2 and p[2] not in (None, "", direction):
            raise InvalidMarks(f"mark {name} orientation {p[2]!r} disagrees with the geometry ({direction})")
        found[name] = Mark(name, q, t, e, li, side, direction)
    a, b = found["a"], found["b"]
    if (a.line, a.t) == (b.line, b.t):
        raise InvalidMarks("marks a and b coincide")
    if len(dom.columns) < 2 or len([c for c in dom.columns if c.color == BLACK]) < 2:
        raise InvalidMarks("degenerate single-column Dobrushin domain")

    n_e = len(edges)

    def pos(e, q):
        (m0, _, _), (m1, _, _) = edges[e]
        x = q + 0.5
        return e + abs(x - m0) / abs(m1 - m0)

    pa, pb = pos(a.edge, a.line), pos(b.edge, b.line)
    span = (pb - pa) % n_e

    def arc_color(e, q):
        r = (pos(e, q) - pa) % n_e
        return WHITE if 0 < r < span else BLACK

    def vertex_arc(k):
        r = (k - pa) % n_e
        return WHITE if 0 < r < span else BLACK

    for e, (v0, v1) in enumerate(edges):
        if v0[0] == v1[0]:
            c = vertex_arc(e + 0.5)
            if color_of(v0[0]) != c:
                raise WrongColumnParity(
                    f"vertical edge at vertex {v0[2]} lies on a {color_of(v0[0])} column "
                    f"but belongs to the {c} arc")

    tagged = []
    for ln in lanes:
        def tag(edge, t):
            if edge == a.edge and ln.line == a.line and t == a.t:
                return "a"
            if edge == b.edge and ln.line == b.line and t == b.t:
                return "b"
            return arc_color(edge, ln.line)
        tagged.append(Lane(ln.index, ln.line, ln.lo, ln.hi, ln.lo_edge, ln.hi_edge,
                           tag(ln.lo_edge, ln.lo), tag(ln.hi_edge, ln.hi)))
    dom.lanes = tuple(tagged)
    dom.kind = "dobrushin"
    dom.marks = (a, b)
    dom._cache["arc_positions"] = (pa, pb, n_e)
    _validate_bounces(dom)
    return dom


def bounce_partner(dom, lane: Lane, end: str):
    """Lane paired with `lane` across a horizontal boundary edge.

    Returns (partner lane, crossed column) or None for mark ends.
    """
    tag = lane.hi_tag if end == "hi" else lane.lo_tag
    if tag in ("a", "b", "none"):
        return None
    t = lane.hi if end == "hi" else lane.lo
    edge = lane.hi_edge if end == "hi" else lane.lo_edge
    q = lane.line
    c = q if color_of(q) != tag else q + 1
    other = q - 1 if c == q else q + 1
    for ln in dom.lanes:
        if ln.line != other:
            continue
        if end == "hi" and ln.hi == t and ln.hi_edge == edge:
            return ln, c
        if end == "lo" and ln.lo == t and ln.lo_edge == edge:
            return ln, c
    raise GeometryError(f"no partner for lane on medial line {q} at t={t}")


def _validate_bounces(dom):
    for ln in dom.lanes:
        for end in ("lo", "hi"):
            bounce_partner(dom, ln, end)


def boundary_arcs(domain: SemiDiscreteDomain):
    """Return (black arc, white arc) as ordered lists of ArcSegment.

    The white arc runs counter-clockwise from a to b, the black arc runs
    clockwise from a to b.  Coordinates are physical (x, t).
    """
    if domain.kind != "dobrushin" or domain.marks is None:
        raise NotDobrushin("boundary arcs need a Dobrushin domain")
    lat = domain.lattice
    a, b = domain.marks
    verts = list(domain.path)
    n = len(verts)
    pa, pb, _ = domain._cache["arc_positions"]

    def point_at(p):
        e = int(math.floor(p)) % n
        f = p - math.floor(p)
        (m0, t0), (m1, t1) = verts[e], verts[(e + 1) % n]
        x0, x1 = lat.x_of(m0), lat.x_of(m1)
        return (x0 + f * (x1 - x0), t0 + f * (t1 - t0))

    def walk(p_from, p_to):
        segs = []
        p = p_from
        total = (p_to - p_from) % n
        end = p_from + total
        while p < end - 1e-15:
            nxt = min(math.floor(p) + 1, end)
            segs.append(ArcSegment(point_at(p), point_at(nxt)))
            p = nxt
        return segs

    white = walk(pa, pb)
    black_ccw = walk(pb, pa)
    black = [ArcSegment(s.end, s.start) for s in reversed(black_ccw)]
    return black, white


# ---------------------------------------------------------------------------
# convenience shapes


def rectangle_path(x0: float, x1: float, t0: float, t1: float) -> list:
    return [[x0, t0], [x1, t0], [x1, t1], [x0, t1]]


def primal_rectangle(delta: float, n_black: int, height: float) -> SemiDiscreteDomain:
    X = (n_black - 1) * delta
    return build_domain(Lattice(delta), "primal", rectangle_path(0.0, X, 0.0, height))


def dual_rectangle(delta: float, n_black: int, height: float) -> SemiDiscreteDomain:
    """Black columns 0..(n_black-1)*delta with white sides at -delta/2 and X+delta/2."""
    X = (n_black - 1) * delta
    return build_domain(Lattice(delta), "dual", rectangle_path(-delta / 2, X + delta / 2, 0.0, height))


def dobrushin_rectangle_path(delta: float, n_black: int, height: float, t_a: float, t_b: float) -> tuple:
    """Rectangle [0, X] x [0, height] with a side notch at each mark.

    Below t_a the left side steps out to the white column -delta/2; below
    t_b the right side steps out to X + delta/2.  a sits on the left step,
    b on the right step, so the bottom edge and both white sides form the
    white arc and the rest is black.
    """
    X = (n_black - 1) * delta
    h = delta / 2
    path = [[-h, 0.0], [X + h, 0.0], [X + h, t_b], [X, t_b], [X, height],
            [0.0, height], [0.0, t_a], [-h, t_a]]
    marks = {"a": [-delta / 4, t_a], "b": [X + delta / 4, t_b]}
    return path, marks


def dobrushin_rectangle(delta: float, n_black: int, height: float, t_a: float, t_b: float) -> SemiDiscreteDomain:
    path, marks = dobrushin_rectangle_path(delta, n_black, height, t_a, t_b)
    return build_domain(Lattice(delta), "dobrushin", path, marks)


# ---------------------------------------------------------------------------
# reconstruction and serialization


def path_from_lanes(domain: SemiDiscreteDomain) -> list:
    """Rebuild the boundary polygon from the column-wise description."""
    segs = []
    by_line = {}
    for ln in domain.lanes:
        by_line.setdefault(ln.line, []).append((ln.lo, ln.hi))
        segs.append(((ln.line, ln.lo), (ln.line + 1, ln.lo)))
        segs.append(((ln.line + 1, ln.hi), (ln.line, ln.hi)))
    m0, m1 = domain.m_range
    for m in range(m0, m1 + 1):
        left = by_line.get(m - 1, [])
        right = by_line.get(m, [])
        # vertical boundary pieces: covered by exactly one side
        pts = sorted({p for iv in left + right for p in iv})
        for u, v in zip(pts, pts[1:]):
            mid = (u + v) / 2
            inl = any(lo < mid < hi for lo, hi in left)
            inr = any(lo < mid < hi for lo, hi in right)
            if inl and not inr:
                segs.append(((m, u), (m, v)))  # east side of the region: ccw goes up
            elif inr and not inl:
                segs.append(((m, v), (m, u)))
    nxt = {}
    for s in segs:
        nxt.setdefault(s[0], []).append(s)
    start = min(segs)[0]
    cycle = [start]
    cur = start
    used = set()
    while True:
        options = [s for s in nxt[cur] if s not in used]
        s = options[0]
        used.add(s)
        cur = s[1]
        if cur == start:
            break
        cycle.append(cur)
    lat = domain.lattice
    return [[lat.x_of(m), t] for m, t in cycle]


def domain_from_json(doc) -> SemiDiscreteDomain:
    if isinstance(doc, str):
        doc = json.loads(doc)
    lat = Lattice(float(doc["delta"]))
    marks = doc.get("marks")
    return build_domain(lat, doc.get("kind", "primal"), doc["path"], marks)
