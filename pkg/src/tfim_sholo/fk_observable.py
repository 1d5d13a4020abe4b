"""The FK fermionic observable, its directional pieces and identity checks.

Site components stored per sample, in this order: phi_up, phi_down,
X_left, X_right (the weighted horizontal pieces) and the central finite
differences of phi_up and phi_down in t.
"""
from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .configuration import Configuration, toggle
from .errors import StepTooSmall, SigmaOutOfRange, TooFewSamples
from .geometry import BLACK, EXTERIOR, HBOUNDARY, INTERIOR, VBOUNDARY, SemiDiscreteDomain, bounce_partner, color_of
from .interface import passes_at, trace_arrangement
from .sampler import ChainParams, SiteTable, WeightSpec, WeightedEstimate, batch_means, run_chains

COMPONENTS = ("up", "down", "left", "right", "fd_up", "fd_down")
COMP = {c: i for i, c in enumerate(COMPONENTS)}
E4 = cmath.exp(1j * math.pi / 4)
# line l(alpha) = sqrt(conj(alpha)) R
LINES = {"up": cmath.exp(-1j * math.pi / 4), "down": cmath.exp(1j * math.pi / 4),
         "left": 1j, "right": 1.0 + 0j}


@dataclass(frozen=True)
class DirectionalObservable:
    z: tuple
    alpha: str
    value: complex
    se: complex

    def line_distance(self) -> float:
        """Distance of the value from its line l(alpha)."""
        zeta = LINES[self.alpha]
        return abs(self.value - zeta * (self.value / zeta).real)


# ---------------------------------------------------------------------------
# per-configuration observables (slow, full retrace)

def _phi(record, alpha, sigma):
    return sum(cmath.exp(1j * sigma * p.winding) for p in record.passes if p.direction == alpha)


def _sigma_of(weight_spec):
    return 0.5 if weight_spec is None else weight_spec.sigma


def phi_sample(domain, cfg: Configuration, z, alpha, weight_spec: Optional[WeightSpec] = None) -> complex:
    """phi^alpha(xi; z) for a vertical direction, or the weighted horizontal piece."""
    sigma = _sigma_of(weight_spec)
    sq = math.sqrt(2) if weight_spec is None else weight_spec.sqrt_q
    m, t = int(z[0]), float(z[1])
    if alpha in ("up", "down"):
        return _phi(passes_at(trace_arrangement(domain, cfg), (m, t)), alpha, sigma)
    pos = domain.classify(m, t).position
    if pos == VBOUNDARY or pos == EXTERIOR:
        return 0j
    if pos == HBOUNDARY:
        return _phi(passes_at(trace_arrangement(domain, cfg), (m, t)), alpha, sigma)
    tr = trace_arrangement(domain, cfg)
    tz = trace_arrangement(domain, toggle(cfg, m, t))
    return sq ** (tz.loop_count - tr.loop_count) * _phi(passes_at(tz, (m, t)), alpha, sigma)


def _mean_over(samples, fn, z, alpha):
    vals = [fn(s) for s in samples]
    if len(vals) < 10:
        raise TooFewSamples(f"{len(vals)} samples, need at least 10")
    mean, se, _ = batch_means(np.array(vals, np.complex128), min(20, len(vals)))
    return DirectionalObservable(tuple(z), alpha, complex(mean), complex(se))


def phi_vertical(samples: Sequence[Configuration], z, alpha, weight_spec=None) -> DirectionalObservable:
    if alpha not in ("up", "down"):
        raise ValueError("alpha must be 'up' or 'down'")
    samples = list(samples)
    dom = samples[0].domain
    return _mean_over(samples, lambda c: phi_sample(dom, c, z, alpha, weight_spec), z, alpha)


def phi_horizontal(samples: Sequence[Configuration], z, alpha, weight_spec=None) -> DirectionalObservable:
    if alpha not in ("left", "right"):
        raise ValueError("alpha must be 'left' or 'right'")
    samples = list(samples)
    dom = samples[0].domain
    if dom.classify(int(z[0]), float(z[1])).position == VBOUNDARY:
        return DirectionalObservable(tuple(z), alpha, 0j, 0j)
    return _mean_over(samples, lambda c: phi_sample(dom, c, z, alpha, weight_spec), z, alpha)


def pathwise_turn_identity(domain, config: Configuration, z, alpha: str = "up",
                           weight_spec: Optional[WeightSpec] = None, fault: int = 0) -> float:
    """|LHS - RHS| of the pathwise turn identity at an interior point z.

    LHS = s^L(xi) phi^alpha(xi; z),
    RHS = s^(L(xi_z) - 1) [c phi^left(xi_z; z) + conj(c) phi^right(xi_z; z)] k
    with s = sqrt q, c = exp(+-i sigma pi/2) (sign + for up) and xi_z the
    configuration with z toggled.  k = q/2 when xi_z passes z both ways
    horizontally and 1 otherwise; at q = 2 it is always 1.
    """
    ws = weight_spec or WeightSpec(2.0, domain.delta)
    m, t = int(z[0]), float(z[1])
    sigma, s = ws.sigma, ws.sqrt_q
    tr = trace_arrangement(domain, config, fault)
    tz = trace_arrangement(domain, toggle(config, m, t), fault)
    rec, recz = passes_at(tr, (m, t)), passes_at(tz, (m, t))
    lhs = s ** tr.loop_count * _phi(rec, alpha, sigma)
    c = cmath.exp(1j * sigma * math.pi / 2)
    if alpha == "down":
        c = c.conjugate()
    left, right = _phi(recz, "left", sigma), _phi(recz, "right", sigma)
    k = ws.q / 2 if (left != 0 and right != 0) else 1.0
    rhs = s ** (tz.loop_count - 1) * (c * left + c.conjugate() * right) * k
    return abs(lhs - rhs)


def winding_relation_residual(domain, config, z, fault: int = 0) -> float:
    """Check W^up(xi) = W^left(xi_z) + pi/2 and W^up(xi) = W^right(xi_z) - pi/2 when both sides exist.

    Only single up-passes are compared (the A/B/C events); returns the
    largest absolute angle difference, 0 when no relation applies.
    """
    m, t = int(z[0]), float(z[1])
    rec = passes_at(trace_arrangement(domain, config, fault), (m, t))
    recz = passes_at(trace_arrangement(domain, toggle(config, m, t), fault), (m, t))
    ups = [p.winding for p in rec.passes if p.direction == "up"]
    if not ups:
        return 0.0
    w = ups[0]
    worst = 0.0
    for p in recz.passes:
        if p.direction == "left":
            worst = max(worst, abs(w - (p.winding + math.pi / 2)))
        elif p.direction == "right":
            worst = max(worst, abs(w - (p.winding - math.pi / 2)))
    return worst


# ---------------------------------------------------------------------------
# measurement grids and compiled site tables

@dataclass(frozen=True)
class Site:
    m: int
    t: float
    color: str
    position: str


def _hboundary_times(domain):
    """Horizontal boundary edges as (t, m_lo, m_hi)."""
    out = []
    verts = domain.path
    for k in range(len(verts)):
        (m0, t0), (m1, t1) = verts[k], verts[(k + 1) % len(verts)]
        if t0 == t1:
            out.append((t0, min(m0, m1), max(m0, m1)))
    return out


def measurement_grid(domain: SemiDiscreteDomain, spacing: Optional[float] = None,
                     margin: Optional[float] = None, include_boundary: bool = True) -> list:
    """Uniform t-grid shared by all columns, away from horizontal boundary edges."""
    d = domain.delta
    spacing = d / 8 if spacing is None else spacing
    margin = d / 8 if margin is None else margin
    tol = domain.tol
    edges = _hboundary_times(domain)
    sites = []
    for col in domain.columns:
        m = col.x_index
        for lo, hi in col.intervals:
            k0 = math.ceil((lo - tol) / spacing)
            k1 = math.floor((hi + tol) / spacing)
            for k in range(k0, k1 + 1):
                t = round(k * spacing, 12)
                if any(abs(t - te) < margin - tol and a <= m <= b for te, a, b in edges):
                    continue
                pc = domain.classify(m, t)
                if pc.position == EXTERIOR:
                    continue
                if pc.position != INTERIOR and not include_boundary:
                    continue
                sites.append(Site(m, t, pc.color, pc.position))
    sites.sort(key=lambda s: (s.m, s.t))
    return sites


def _lane_index(domain, q, t):
    ln = domain.lane_at(q, t)
    return -1 if ln is None else ln.index


def _hb_info(domain, m, t):
    a, b = domain.marks
    tol = domain.tol
    if b.line + 1 == m and abs(b.t - t) <= tol:
        return -2, False, 0, 1
    if a.line - 1 == m and abs(a.t - t) <= tol:
        return -3, False, (1 if a.direction == "up" else -1), 1
    for ln in domain.lanes:
        for end in ("lo", "hi"):
            te = ln.hi if end == "hi" else ln.lo
            if abs(te - t) > tol:
                continue
            arriving = (ln.up and end == "hi") or (not ln.up and end == "lo")
            if not arriving:
                continue
            bp = bounce_partner(domain, ln, end)
            if bp is None or bp[1] != m:
                continue
            d = 1 if bp[0].line > ln.line else -1
            return ln.index, end == "hi", (1 if color_of(m) == BLACK else -1), d
    return -1, False, 0, 0


def compile_sites(domain, sites: Sequence[Site], eta: float) -> SiteTable:
    n = len(sites)
    kind = np.zeros(n, np.int64)
    slot = np.full(n, -1, np.int64)
    ts = np.zeros(n)
    sign = np.zeros(n, np.int64)
    arrs = {k: np.full(n, -1, np.int64) for k in ("up", "dn", "up_p", "up_m", "dn_p", "dn_m", "hb_lane")}
    hb_top = np.zeros(n, np.bool_)
    hb_sign = np.zeros(n, np.int64)
    hb_dir = np.zeros(n, np.int64)
    eps = 8 * domain.tol
    for i, s in enumerate(sites):
        m, t = s.m, s.t
        black = color_of(m) == BLACK
        q_up, q_dn = (m, m - 1) if black else (m - 1, m)
        ts[i] = t
        sign[i] = 1 if black else -1
        if s.position == INTERIOR:
            kind[i] = 0
            slot[i] = domain.slot_at(m, t).index
        elif s.position == VBOUNDARY:
            kind[i] = 1
        else:
            kind[i] = 2
            lane, top, sg, d = _hb_info(domain, m, t)
            arrs["hb_lane"][i] = lane
            hb_top[i], hb_sign[i], hb_dir[i] = top, sg, d
        # lanes at the site; boundary times use the side inside the column
        tq = t
        if s.position == HBOUNDARY:
            col = domain.column(m)
            inside_below = any(lo < t - eps < hi for lo, hi in col.intervals)
            tq = t - eps if inside_below else t + eps
        arrs["up"][i] = _lane_index(domain, q_up, tq)
        arrs["dn"][i] = _lane_index(domain, q_dn, tq)
        if eta > 0:
            arrs["up_p"][i] = _lane_index(domain, q_up, t + eta)
            arrs["up_m"][i] = _lane_index(domain, q_up, t - eta)
            arrs["dn_p"][i] = _lane_index(domain, q_dn, t + eta)
            arrs["dn_m"][i] = _lane_index(domain, q_dn, t - eta)
    return SiteTable(kind, slot, ts, sign, arrs["up"], arrs["dn"], arrs["up_p"], arrs["up_m"],
                     arrs["dn_p"], arrs["dn_m"], float(eta), arrs["hb_lane"], hb_top, hb_sign, hb_dir)


def measure_configuration(domain, cfg: Configuration, table: SiteTable,
                          weight_spec: Optional[WeightSpec] = None) -> np.ndarray:
    """Kernel evaluation of the six site components for one configuration."""
    from . import _kernels as K
    from .interface import compile_board, config_points, raw_trace
    ws = weight_spec or WeightSpec(2.0, domain.delta)
    b = compile_board(domain)
    p_slot, p_t = config_points(domain, cfg)
    r = raw_trace(domain, p_slot, p_t)
    out = np.zeros((len(table), 6), np.complex128)
    K.measure(table.kind, table.slot, table.t, table.sign, table.up, table.dn, table.up_p, table.up_m,
              table.dn_p, table.dn_m, table.eta, table.hb_lane, table.hb_top, table.hb_sign, table.hb_dir,
              b.slot_up_lane, b.slot_dn_lane, r.ev_start, r.ev_t, r.run_start, r.curve, r.cum, r.order,
              r.totals, ws.sigma, ws.sqrt_q, out)
    return out


# ---------------------------------------------------------------------------
# fields

@dataclass
class ComplexField:
    """Monte Carlo field on a grid, stored as batch means of all six components."""
    grid: list
    batches: np.ndarray  # (n_batches, n_sites, 6)
    n_samples: int
    delta: float
    eta: float
    weight: WeightSpec
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self._index = {(s.m, round(s.t, 9)): i for i, s in enumerate(self.grid)}

    def index(self, m, t) -> Optional[int]:
        return self._index.get((int(m), round(float(t), 9)))

    def linear(self, terms) -> WeightedEstimate:
        """Estimate of sum coeff * component(site) with batch-means error bars."""
        acc = np.zeros(self.batches.shape[0], np.complex128)
        for i, comp, c in terms:
            acc = acc + c * self.batches[:, i, COMP[comp] if isinstance(comp, str) else comp]
        nb = len(acc)
        mean = acc.mean()
        se = complex(np.std(acc.real, ddof=1) / math.sqrt(nb), np.std(acc.imag, ddof=1) / math.sqrt(nb))
        return WeightedEstimate(complex(mean), se, float(self.n_samples))

    def piece(self, comp: str):
        b = self.batches[:, :, COMP[comp]]
        nb = b.shape[0]
        se = (np.std(b.real, axis=0, ddof=1) + 1j * np.std(b.imag, axis=0, ddof=1)) / math.sqrt(nb)
        return b.mean(axis=0), se

    @property
    def values(self):
        return self.piece("up")[0] + self.piece("down")[0]

    @property
    def se(self):
        b = self.batches[:, :, 0] + self.batches[:, :, 1]
        nb = b.shape[0]
        return (np.std(b.real, axis=0, ddof=1) + 1j * np.std(b.imag, axis=0, ddof=1)) / math.sqrt(nb)

    def directional(self, i: int, alpha: str) -> DirectionalObservable:
        v, s = self.piece(alpha)
        site = self.grid[i]
        return DirectionalObservable((site.m, site.t), alpha, complex(v[i]), complex(s[i]))

    def write_csv(self, path):
        vals, se = self.values, self.se
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["col_index", "color", "t", "re", "im", "se_re", "se_im", "n"])
            for i, s in enumerate(self.grid):
                w.writerow([s.m, s.color, repr(s.t), repr(float(vals[i].real)), repr(float(vals[i].imag)),
                            repr(float(se[i].real)), repr(float(se[i].imag)), self.n_samples])


def _field_from_chains(domain, grid, weight_spec, chain_params, eta, n_chains, threads, n_batches,
                       fault, sigma):
    table = compile_sites(domain, grid, eta)
    vals, loops = run_chains(domain, weight_spec, chain_params, table, n_chains, threads, fault, sigma)
    n = vals.shape[1]
    b = n // n_batches
    if b < 1:
        raise TooFewSamples(f"{n} samples per chain cannot form {n_batches} batches")
    bm = vals[:, :b * n_batches].reshape(n_chains, n_batches, b, len(grid), 6).mean(axis=2)
    bm = bm.reshape(n_chains * n_batches, len(grid), 6)
    meta = {"mean_loops": float(loops.mean()), "n_chains": n_chains}
    return ComplexField(list(grid), bm, n * n_chains, domain.delta, eta, weight_spec, meta)


def fk_field(domain, grid, weight_spec: Optional[WeightSpec] = None, chain_params: Optional[ChainParams] = None,
             eta: Optional[float] = None, n_chains: int = 1, threads: int = 1, n_batches: int = 50,
             fault: int = 0) -> ComplexField:
    """F = Phi^up + Phi^down on the grid (all directional pieces kept)."""
    ws = weight_spec or WeightSpec(2.0, domain.delta)
    cp = chain_params or ChainParams()
    eta = domain.delta / 16 if eta is None else eta
    return _field_from_chains(domain, grid, ws, cp, eta, n_chains, threads, n_batches, fault, ws.sigma)


def parafermionic_field(domain, grid, weight_spec: WeightSpec, chain_params: Optional[ChainParams] = None,
                        eta: Optional[float] = None, n_chains: int = 1, threads: int = 1,
                        n_batches: int = 50) -> ComplexField:
    """Phase exp(i sigma W) under the (sqrt q)^L law; equal to fk_field at q = 2."""
    if not (0 < weight_spec.q <= 4):
        raise SigmaOutOfRange(f"q={weight_spec.q}")
    return fk_field(domain, grid, weight_spec, chain_params, eta, n_chains, threads, n_batches)


# ---------------------------------------------------------------------------
# identity checks on fields

EXACT_FLOOR = 1e-10  # residuals below this are rounding, not statistics


def _zscore(est: WeightedEstimate) -> float:
    z = 0.0
    for x, s in ((est.mean.real, est.std_error.real), (est.mean.imag, est.std_error.imag)):
        if abs(x) <= EXACT_FLOOR:
            continue
        if s > 0:
            z = max(z, abs(x) / s)
        elif abs(x) > 1e-12:
            z = math.inf
    return z


def turn_eq_residuals(fld: ComplexField, i: int) -> dict:
    """Both turn relations at interior site i as estimates of (LHS - RHS)."""
    r2 = math.sqrt(2)
    up = fld.linear([(i, "up", 1.0), (i, "left", -E4 / r2), (i, "right", -E4.conjugate() / r2)])
    dn = fld.linear([(i, "down", 1.0), (i, "right", -E4 / r2), (i, "left", -E4.conjugate() / r2)])
    return {"turn_up": up, "turn_down": dn}


def _closed_up(fld, w, u):
    c = 1 / (fld.delta * math.sqrt(2))
    return [(w, "left", c * E4), (w, "right", -c * E4.conjugate()),
            (u, "right", c * E4.conjugate()), (u, "left", -c * E4)]


def _closed_down(fld, w, v):
    c = 1 / (fld.delta * math.sqrt(2))
    return [(w, "left", c * E4.conjugate()), (w, "right", -c * E4),
            (v, "right", c * E4), (v, "left", -c * E4.conjugate())]


def check_phi_dots(fld: ComplexField, z, eta: Optional[float] = None) -> dict:
    """Derivative relations at an interior site z=(m, t): finite difference vs closed form vs target.

    Returns {} entries 'up' and/or 'down', each with estimates of
    (a) - (b) ('fd_vs_closed') and (b) - target ('closed_vs_target').
    """
    eta = fld.eta if eta is None else eta
    lam = fld.weight.base_rate
    if eta <= 0 or 4 * lam * eta * fld.n_samples < 10:
        raise StepTooSmall(f"eta={eta} resolves fewer than 10 events over {fld.n_samples} samples")
    if abs(eta - fld.eta) > 1e-15:
        raise StepTooSmall("finite differences were recorded with a different eta")
    m, t = int(z[0]), float(z[1])
    d = fld.delta
    i = fld.index(m, t)
    if i is None:
        raise KeyError(f"site {z} not on the grid")
    out = {}
    black = color_of(m) == BLACK
    iu = fld.index(m - 1, t)
    iv = fld.index(m + 1, t)
    # up: white w with u = w - d/2; at black u use w = u + d/2
    w_up, u_up = (iv, i) if black else (i, iu)
    if w_up is not None and u_up is not None:
        closed = _closed_up(fld, w_up, u_up)
        target = [(w_up, "down", 1j / d), (u_up, "down", -1j / d)]
        out["up"] = {
            "fd_vs_closed": fld.linear([(i, "fd_up", 1.0)] + [(a, b, -c) for a, b, c in closed]),
            "closed_vs_target": fld.linear(closed + [(a, b, -c) for a, b, c in target]),
        }
    # down: white w with v = w + d/2; at black v use w = v - d/2
    w_dn, v_dn = (iu, i) if black else (i, iv)
    if w_dn is not None and v_dn is not None:
        closed = _closed_down(fld, w_dn, v_dn)
        target = [(v_dn, "up", 1j / d), (w_dn, "up", -1j / d)]
        out["down"] = {
            "fd_vs_closed": fld.linear([(i, "fd_down", 1.0)] + [(a, b, -c) for a, b, c in closed]),
            "closed_vs_target": fld.linear(closed + [(a, b, -c) for a, b, c in target]),
        }
    return out


def identity_table(fld: ComplexField) -> list:
    """Per interior site: z-scores of both turn relations and all available derivative relations."""
    rows = []
    for i, s in enumerate(fld.grid):
        if s.position != INTERIOR:
            continue
        row = {"m": s.m, "t": s.t, "color": s.color}
        for k, est in turn_eq_residuals(fld, i).items():
            row[k] = _zscore(est)
        for direc, res in check_phi_dots(fld, (s.m, s.t)).items():
            for k, est in res.items():
                row[f"dot_{direc}_{k}"] = _zscore(est)
        rows.append(row)
    return rows


def lemma_algebra_residual(fld: ComplexField, i: int) -> float:
    """|e^{i pi/4} X_left - e^{-i pi/4} X_right - i (e^{-i pi/4} X_left + e^{i pi/4} X_right)| on the estimates."""
    left, _ = fld.piece("left")
    right, _ = fld.piece("right")
    a = E4 * left[i] - E4.conjugate() * right[i]
    b = 1j * (E4.conjugate() * left[i] + E4 * right[i])
    return abs(a - b)


def fdot_terms(fld: ComplexField, z) -> list:
    """Linear terms for dF/dt at z through the derivative relations; None if a neighbour is missing."""
    m, t = int(z[0]), float(z[1])
    d = fld.delta
    i, il, ir = fld.index(m, t), fld.index(m - 1, t), fld.index(m + 1, t)
    if None in (i, il, ir):
        return None
    # dF/dt = (i/d)(F^down(z+) - F^down(z-)) + (i/d)(F^up(z+) - F^up(z-)) on either colour
    return [(ir, "down", 1j / d), (il, "down", -1j / d), (ir, "up", 1j / d), (il, "up", -1j / d)]


def harmonicity_defect(fld: ComplexField, z) -> tuple:
    """Unbiased estimate of |dF/dt(z)|^2 with a jackknife error over batches.

    The mean over distinct batch pairs of b_i conj(b_j) removes the noise
    floor that |mean|^2 would carry.  On black sites this equals the Laplacian
    of H^b, on white sites minus the Laplacian of H^w.
    """
    terms = fdot_terms(fld, z)
    if terms is None:
        raise KeyError(f"site {z} lacks horizontal neighbours on the grid")
    b = np.zeros(fld.batches.shape[0], np.complex128)
    for i, comp, c in terms:
        b = b + c * fld.batches[:, i, COMP[comp]]
    n = len(b)
    tot = b.sum()
    sq = float(np.sum(np.abs(b) ** 2))
    est = (abs(tot) ** 2 - sq) / (n * (n - 1))
    jk = np.empty(n)
    for k in range(n):
        tk = tot - b[k]
        jk[k] = (abs(tk) ** 2 - (sq - abs(b[k]) ** 2)) / ((n - 1) * (n - 2))
    se = math.sqrt((n - 1) / n * float(np.sum((jk - jk.mean()) ** 2)))
    return float(est), se


def harmonicity_sign_report(fld: ComplexField, sites=None) -> list:
    """Estimated Laplacian of H (sign +1 black, -1 white) with errors, per interior site."""
    rows = []
    for s in (sites if sites is not None else fld.grid):
        if s.position != INTERIOR or fdot_terms(fld, (s.m, s.t)) is None:
            continue
        v, se = harmonicity_defect(fld, (s.m, s.t))
        sign = 1.0 if s.color == BLACK else -1.0
        lap = sign * v
        ok = lap >= -3 * se if sign > 0 else lap <= 3 * se
        rows.append({"m": s.m, "t": s.t, "color": s.color, "laplacian": lap, "se": se, "sign_ok": bool(ok)})
    return rows
