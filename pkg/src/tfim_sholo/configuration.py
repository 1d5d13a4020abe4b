"""Cut/bridge configurations, duality and component counting.

A configuration stores per-column sorted time lists.  Cuts sever the
columns of the "primal" parity (black by default), bridges join the two
primal columns on either side of a white column.  The dual of a
configuration swaps the roles, so `cut_parity` records which parity
carries the cuts.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BoundaryCut, InvalidConfig, NotInterior, TieBreak
from .geometry import (
    BLACK,
    HBOUNDARY,
    INTERIOR,
    VBOUNDARY,
    WHITE,
    SemiDiscreteDomain,
    build_domain,
    rectangle_path,
)

MODES = ("periodic", "dobrushin-wired", "free")


def make_rng(seed):
    """Counter-based generator (Philox) from a 64-bit seed, or pass a Generator through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


@dataclass(frozen=True)
class Topology:
    kind: str = "interval"
    beta: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("interval", "periodic"):
            raise ValueError(f"unknown time topology {self.kind!r}")
        if self.kind == "periodic" and not (self.beta and self.beta > 0):
            raise ValueError("periodic topology needs beta > 0")

    def to_json(self):
        return "interval" if self.kind == "interval" else {"periodic": self.beta}

    @staticmethod
    def from_json(doc):
        if doc in (None, "interval"):
            return Topology()
        if isinstance(doc, dict) and "periodic" in doc:
            return Topology("periodic", float(doc["periodic"]))
        raise InvalidConfig(f"bad topology {doc!r}")


INTERVAL = Topology()


@dataclass(frozen=True, eq=False)
class Configuration:
    cuts: dict
    bridges: dict
    domain: Optional[SemiDiscreteDomain] = None
    topology: Topology = INTERVAL
    cut_parity: int = 0

    def __eq__(self, other):
        return (isinstance(other, Configuration) and self.cuts == other.cuts
                and self.bridges == other.bridges and self.topology == other.topology
                and self.cut_parity == other.cut_parity)

    @property
    def n_cuts(self) -> int:
        return sum(len(v) for v in self.cuts.values())

    @property
    def n_bridges(self) -> int:
        return sum(len(v) for v in self.bridges.values())

    def __len__(self):
        return self.n_cuts + self.n_bridges

    def points(self):
        """All points as (column, time), sorted."""
        out = [(m, t) for m, ts in self.cuts.items() for t in ts]
        out += [(m, t) for m, ts in self.bridges.items() for t in ts]
        return sorted(out)

    def is_cut_column(self, m: int) -> bool:
        return m % 2 == self.cut_parity

    def to_json(self) -> dict:
        doc = {
            "cuts": {str(m): list(ts) for m, ts in sorted(self.cuts.items()) if ts},
            "bridges": {str(m): list(ts) for m, ts in sorted(self.bridges.items()) if ts},
            "topology": self.topology.to_json(),
        }
        if self.cut_parity:
            doc["cut_parity"] = self.cut_parity
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _clean(points: dict) -> dict:
    out = {}
    for m, ts in points.items():
        ts = sorted(float(t) for t in ts)
        if ts:
            out[int(m)] = tuple(ts)
    return out


def make_configuration(domain, cuts=None, bridges=None, topology=INTERVAL, cut_parity=0,
                       validate=True) -> Configuration:
    cfg = Configuration(_clean(cuts or {}), _clean(bridges or {}), domain, topology, cut_parity)
    if validate:
        validate_configuration(cfg)
    return cfg


def configuration_from_json(doc, domain=None, validate=True) -> Configuration:
    if isinstance(doc, str):
        doc = json.loads(doc)
    return make_configuration(domain, doc.get("cuts", {}), doc.get("bridges", {}),
                              Topology.from_json(doc.get("topology")),
                              int(doc.get("cut_parity", 0)), validate)


def validate_configuration(cfg: Configuration):
    dom = cfg.domain
    for name, pts, parity in (("cut", cfg.cuts, cfg.cut_parity), ("bridge", cfg.bridges, 1 - cfg.cut_parity)):
        for m, ts in pts.items():
            if m % 2 != parity:
                raise InvalidConfig(f"{name} on column {m} of the wrong colour")
            for t0, t1 in zip(ts, ts[1:]):
                if t1 <= t0:
                    raise InvalidConfig(f"duplicate {name} time {t0} on column {m}")
            if dom is None:
                continue
            for t in ts:
                if cfg.topology.kind == "periodic":
                    col = dom.column(m)
                    ok = col is not None and 0 < t < cfg.topology.beta and any(
                        lo <= t <= hi for lo, hi in col.intervals)
                    if not ok:
                        raise InvalidConfig(f"{name} at column {m}, t={t} outside the periodic column")
                    continue
                if dom.classify(m, t).position != INTERIOR:
                    raise InvalidConfig(f"{name} at column {m}, t={t} is not an interior point")
    # ties between neighbouring columns make event order ambiguous
    allp = {}
    for m, ts in list(cfg.cuts.items()) + list(cfg.bridges.items()):
        allp[m] = set(ts)
    for m, ts in allp.items():
        for nb in (m - 1, m + 1):
            if nb in allp and ts & allp[nb]:
                t = min(ts & allp[nb])
                raise TieBreak(f"points on columns {m} and {nb} share the time {t}")


def empty_configuration(domain, topology=INTERVAL) -> Configuration:
    return Configuration({}, {}, domain, topology)


def sample_poisson(domain: SemiDiscreteDomain, rate_black: float, rate_white: float, rng_seed,
                   topology: Topology = INTERVAL) -> Configuration:
    """Independent Poisson processes on the interior of black and white columns.

    In periodic topology the points live on the whole open columns (0, beta).
    """
    if rate_black < 0 or rate_white < 0:
        raise ValueError("rates must be non-negative")
    rng = make_rng(rng_seed)
    cuts, bridges = {}, {}
    if topology.kind == "periodic":
        pieces = [(c.x_index, 0.0, topology.beta) for c in domain.columns
                  if c.color == BLACK or domain.interior.get(c.x_index)]
    else:
        pieces = [(s.column, s.lo, s.hi) for s in domain.slots]
    for m, lo, hi in pieces:
        rate = rate_black if m % 2 == 0 else rate_white
        k = rng.poisson(rate * (hi - lo)) if rate > 0 else 0
        if k == 0:
            continue
        ts = lo + (hi - lo) * rng.random(k)
        target = cuts if m % 2 == 0 else bridges
        target[m] = tuple(sorted(target.get(m, ()) + tuple(float(t) for t in ts)))
    return Configuration(cuts, bridges, domain, topology)


def toggle(cfg: Configuration, m: int, t: float) -> Configuration:
    """Remove the point (m, t) if present, insert it otherwise."""
    dom = cfg.domain
    if dom is not None and cfg.topology.kind == "interval":
        if dom.classify(m, t).position != INTERIOR:
            raise NotInterior(f"column {m}, t={t} is not an interior point")
    target = "cuts" if cfg.is_cut_column(m) else "bridges"
    pts = dict(getattr(cfg, target))
    ts = list(pts.get(m, ()))
    if t in ts:
        ts.remove(t)
    else:
        ts.append(float(t))
        ts.sort()
    if ts:
        pts[m] = tuple(ts)
    else:
        pts.pop(m, None)
    kw = {"cuts": cfg.cuts, "bridges": cfg.bridges}
    kw[target] = pts
    out = Configuration(kw["cuts"], kw["bridges"], dom, cfg.topology, cfg.cut_parity)
    validate_configuration(out)
    return out


def dual_domain_of(domain: SemiDiscreteDomain, topology: Topology) -> Optional[SemiDiscreteDomain]:
    """Rectangle on the neighbouring columns one half-step inside `domain`."""
    m0, m1 = domain.m_range
    if m1 - m0 < 4:
        return None
    lat = domain.lattice
    ts = [t for c in domain.columns for iv in c.intervals for t in iv]
    t0, t1 = min(ts), max(ts)
    kind = "dual" if domain.kind != "dual" else "primal"
    return build_domain(lat, kind, rectangle_path(lat.x_of(m0 + 1), lat.x_of(m1 - 1), t0, t1))


def dual_configuration(cfg: Configuration, dual_domain=None) -> Configuration:
    """Cuts become bridges at the same place and time, and vice versa."""
    dom = cfg.domain
    if dom is not None:
        m0, m1 = dom.m_range
        for m in (m0, m1):
            if cfg.is_cut_column(m) and cfg.cuts.get(m):
                raise BoundaryCut(f"cut on the outermost column {m}")
        if dual_domain is None and dom.kind != "dobrushin":
            dual_domain = dual_domain_of(dom, cfg.topology)
    return Configuration(dict(cfg.bridges), dict(cfg.cuts), dual_domain, cfg.topology, 1 - cfg.cut_parity)


# ---------------------------------------------------------------------------
# component counting


@dataclass(frozen=True)
class ComponentCount:
    k_black: int
    k_white: int

    @property
    def loops(self) -> int:
        return self.k_black + self.k_white - 2


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1

    def count(self, nodes=None) -> int:
        nodes = range(len(self.parent)) if nodes is None else nodes
        return len({self.find(x) for x in nodes})


def _column_pieces(domain, m, topology):
    col = domain.column(m)
    if col is None:
        return []
    if topology.kind == "periodic":
        return [(0.0, topology.beta)]
    return list(col.intervals)


def _segments(domain, parity, severs, topology):
    """Elementary segments on all columns of the given parity.

    Returns a list of (m, lo, hi, piece) and a per-column lookup.  In
    periodic topology the last segment of a column is glued to the first.
    """
    segs = []
    index = {}
    for col in domain.columns:
        m = col.x_index
        if m % 2 != parity:
            continue
        for pi, (lo, hi) in enumerate(_column_pieces(domain, m, topology)):
            cuts = [t for t in severs.get(m, ()) if lo < t < hi]
            edges = [lo] + cuts + [hi]
            first = len(segs)
            for a, b in zip(edges, edges[1:]):
                segs.append((m, a, b, pi))
            index.setdefault(m, []).append((lo, hi, first, len(segs)))
            if topology.kind == "periodic" and cuts:
                # the top segment continues into the bottom one across t = 0
                index[m][-1] = (lo, hi, first, len(segs), "wrap")
    return segs, index


def _seg_at(index, m, t):
    for entry in index.get(m, ()):
        lo, hi, first, last = entry[:4]
        if lo <= t <= hi:
            return entry
    return None


def _locate(segs, entry, t):
    first, last = entry[2], entry[3]
    for k in range(first, last):
        if segs[k][1] <= t <= segs[k][2]:
            return k
    raise InvalidConfig(f"time {t} not covered")


def _count_structure(domain, cfg, parity, mode):
    """Components of the structure living on columns of `parity`.

    Points on the other parity join neighbouring columns, points on this
    parity sever.
    """
    topo = cfg.topology
    severs = cfg.cuts if cfg.cut_parity == parity else cfg.bridges
    joins = cfg.bridges if cfg.cut_parity == parity else cfg.cuts
    segs, index = _segments(domain, parity, severs, topo)
    uf = UnionFind(len(segs) + 1)
    wired = len(segs)
    for m, entries in index.items():
        for entry in entries:
            if len(entry) == 5:  # periodic wrap
                uf.union(entry[2], entry[3] - 1)
    for m, ts in joins.items():
        for t in ts:
            ends = []
            for nb in (m - 1, m + 1):
                entry = _seg_at(index, nb, t)
                if entry is None:
                    if mode == "dobrushin-wired":
                        raise InvalidConfig(f"point at column {m}, t={t} lacks a neighbour on column {nb}")
                    continue  # joins to the outside are dropped outside Dobrushin mode
                ends.append(_locate(segs, entry, t))
            if len(ends) == 2:
                uf.union(*ends)
    use_wired = False
    if mode == "dobrushin-wired":
        color = BLACK if parity == 0 else WHITE
        for k, (m, lo, hi, _) in enumerate(segs):
            if _touches_arc(domain, m, lo, hi, color):
                uf.union(k, wired)
                use_wired = True
    nodes = list(range(len(segs))) + ([wired] if use_wired else [])
    return uf.count(nodes) if nodes else 0


def _touches_arc(domain, m, lo, hi, color):
    """Does the closed segment [lo, hi] on column m contain a boundary point of the arc?"""
    col = domain.column(m)
    for a, b in col.intervals:
        for end in (a, b):
            if lo <= end <= hi and domain.boundary_color(m, end) == color:
                return True
    inner = domain.interior.get(m, ())
    # any vertical-boundary point inside the segment
    pts = sorted({lo, hi} | {e for iv in inner for e in iv if lo <= e <= hi})
    probes = pts + [(u + v) / 2 for u, v in zip(pts, pts[1:])]
    for t in probes:
        if lo <= t <= hi and domain.classify(m, t).position == VBOUNDARY:
            if domain.boundary_color(m, t) == color:
                return True
    return False


def count_components(domain: SemiDiscreteDomain, cfg: Configuration, boundary_mode: str) -> ComponentCount:
    if boundary_mode not in MODES:
        raise InvalidConfig(f"unknown boundary mode {boundary_mode!r}")
    if boundary_mode == "periodic" and cfg.topology.kind != "periodic":
        raise InvalidConfig("periodic counting needs a periodic configuration")
    if boundary_mode == "dobrushin-wired" and domain.marks is None:
        raise InvalidConfig("dobrushin-wired counting needs a Dobrushin domain")
    kb = _count_structure(domain, cfg, cfg.cut_parity, boundary_mode)
    kw = _count_structure(domain, cfg, 1 - cfg.cut_parity, boundary_mode)
    return ComponentCount(kb, kw)


def loop_count(domain, cfg) -> int:
    return count_components(domain, cfg, "dobrushin-wired").loops


def connected(domain, cfg: Configuration, z1, z2) -> bool:
    """Are the primal points z1=(m, t) and z2 in the same primal component?"""
    topo = cfg.topology
    parity = cfg.cut_parity
    segs, index = _segments(domain, parity, cfg.cuts, topo)
    uf = UnionFind(len(segs))
    for m, entries in index.items():
        for entry in entries:
            if len(entry) == 5:
                uf.union(entry[2], entry[3] - 1)
    for m, ts in cfg.bridges.items():
        for t in ts:
            ends = [_locate(segs, _seg_at(index, nb, t), t) for nb in (m - 1, m + 1)]
            uf.union(*ends)
    k1 = _locate(segs, _seg_at(index, z1[0], z1[1]), z1[1])
    k2 = _locate(segs, _seg_at(index, z2[0], z2[1]), z2[1])
    return uf.find(k1) == uf.find(k2)


def count_components_floodfill(domain: SemiDiscreteDomain, cfg: Configuration, boundary_mode: str) -> ComponentCount:
    """Breadth-first search over time cells; an independent check of count_components."""
    topo = cfg.topology
    times = {0.0}
    for c in domain.columns:
        for iv in c.intervals:
            times.update(iv)
    for _, t in cfg.points():
        times.add(t)
    if topo.kind == "periodic":
        times.add(topo.beta)
    T = sorted(times)
    mids = [(a + b) / 2 for a, b in zip(T, T[1:])]
    counts = []
    for parity in (cfg.cut_parity, 1 - cfg.cut_parity):
        severs = cfg.cuts if parity == cfg.cut_parity else cfg.bridges
        joins = cfg.bridges if parity == cfg.cut_parity else cfg.cuts
        color = BLACK if parity == 0 else WHITE
        cells = {}
        for c in domain.columns:
            m = c.x_index
            if m % 2 != parity:
                continue
            for k, mid in enumerate(mids):
                if topo.kind == "periodic":
                    inside = 0 < mid < topo.beta
                else:
                    inside = any(lo < mid < hi for lo, hi in c.intervals)
                if inside:
                    cells[(m, k)] = len(cells)
        adj = {v: [] for v in cells.values()}
        WIRED = -1
        adj[WIRED] = []

        def link(u, v):
            adj[u].append(v)
            adj[v].append(u)

        for (m, k), v in cells.items():
            up = (m, k + 1)
            if up in cells and T[k + 1] not in severs.get(m, ()):
                link(v, cells[up])
        if topo.kind == "periodic":
            for c in domain.columns:
                m = c.x_index
                ks = [k for (mm, k) in cells if mm == m]
                if ks:
                    link(cells[(m, min(ks))], cells[(m, max(ks))])
        for m, ts in joins.items():
            for t in ts:
                k = T.index(t)
                a, b = (m - 1, k), (m + 1, k)
                if a in cells and b in cells:
                    link(cells[a], cells[b])
        used_wired = False
        if boundary_mode == "dobrushin-wired":
            for (m, k), v in cells.items():
                lo, hi = T[k], T[k + 1]
                hit = False
                for end in (lo, hi):
                    pc = domain.classify(m, end)
                    if pc.position == HBOUNDARY and domain.boundary_color(m, end) == color:
                        hit = True
                pc = domain.classify(m, mids[k])
                if pc.position == VBOUNDARY and domain.boundary_color(m, mids[k]) == color:
                    hit = True
                if hit:
                    link(v, WIRED)
                    used_wired = True
        seen = set()
        k_comp = 0
        starts = list(cells.values()) + ([WIRED] if used_wired else [])
        for s in starts:
            if s in seen:
                continue
            k_comp += 1
            dq = deque([s])
            seen.add(s)
            while dq:
                u = dq.popleft()
                for v in adj[u]:
                    if v not in seen:
                        seen.add(v)
                        dq.append(v)
        counts.append(k_comp)
    return ComponentCount(counts[0], counts[1])
