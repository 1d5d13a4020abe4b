"""Semi-discrete complex analysis on the lattice delta Z + i R.

Functions live on columns m (x = m delta / 2) over a shared uniform t-grid.
Even m are black, odd m white.  Checkers return residuals; pass/fail
thresholds belong to the caller.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (GridMismatch, InconsistentInitialData, MissingNeighbor, NonUnitZeta,
                     NotSHolomorphic)

L_UP = cmath.exp(-1j * math.pi / 4)
L_DOWN = cmath.exp(1j * math.pi / 4)


def proj(z, zeta):
    """Orthogonal projection of z onto the line zeta R."""
    if abs(abs(zeta) - 1) > 1e-12:
        raise NonUnitZeta(f"|zeta| = {abs(zeta)}")
    return 0.5 * (z + np.conj(z) * zeta * zeta)


@dataclass(frozen=True)
class LineProjection:
    zeta: complex

    def __post_init__(self):
        if abs(abs(self.zeta) - 1) > 1e-12:
            raise NonUnitZeta(f"|zeta| = {abs(self.zeta)}")

    def __call__(self, z):
        return proj(z, self.zeta)


def _derivative(f, h):
    """4th-order central differences; 3rd-order one-sided stencils at the two end rows."""
    f = np.asarray(f)
    n = len(f)
    d = np.empty_like(f)
    if n < 5:
        raise GridMismatch("need at least 5 grid rows for derivatives")
    # written as differences so constants differentiate to exactly 0
    d[2:-2] = ((f[:-4] - f[4:]) + 8 * (f[3:-1] - f[1:-3])) / (12 * h)
    d[0] = (18 * (f[1] - f[0]) - 9 * (f[2] - f[0]) + 2 * (f[3] - f[0])) / (6 * h)
    d[1] = (-2 * (f[0] - f[1]) + 6 * (f[2] - f[1]) - (f[3] - f[1])) / (6 * h)
    d[-1] = -(18 * (f[-2] - f[-1]) - 9 * (f[-3] - f[-1]) + 2 * (f[-4] - f[-1])) / (6 * h)
    d[-2] = -(-2 * (f[-1] - f[-2]) + 6 * (f[-3] - f[-2]) - (f[-4] - f[-2])) / (6 * h)
    return d


@dataclass
class SampledFunction:
    """Complex values per column on a uniform t-grid, optionally backed by exact callbacks.

    `callback(m, t)` and `dcallback(m, t)` (exact t-derivative) accept array t.
    """
    delta: float
    values: Dict[int, np.ndarray]
    t: Dict[int, np.ndarray]
    callback: Optional[Callable] = None
    dcallback: Optional[Callable] = None

    @staticmethod
    def from_callable(delta, columns, t_grid, fn, dfn=None):
        t_grid = np.asarray(t_grid, float)
        vals = {m: np.asarray(fn(m, t_grid), np.complex128) * np.ones(len(t_grid)) for m in columns}
        return SampledFunction(delta, vals, {m: t_grid for m in columns}, fn, dfn)

    @property
    def columns(self):
        return sorted(self.values)

    def eta(self, m) -> float:
        t = self.t[m]
        return float(t[1] - t[0])

    def same_grid(self, m1, m2) -> bool:
        a, b = self.t.get(m1), self.t.get(m2)
        return a is not None and b is not None and len(a) == len(b) and np.allclose(a, b, atol=1e-12)

    def dt(self, m) -> np.ndarray:
        if self.dcallback is not None:
            return np.asarray(self.dcallback(m, self.t[m]), np.complex128) * np.ones(len(self.t[m]))
        return _derivative(self.values[m], self.eta(m))


def _neighbors(F: SampledFunction, m):
    for k in (m - 1, m + 1):
        if k not in F.values:
            return False
        if not F.same_grid(m, k):
            raise GridMismatch(f"columns {m} and {k} use different t-grids")
    return True


def _interior_rows(F, m, domain):
    t = F.t[m]
    if domain is None:
        return np.ones(len(t), bool)
    from .geometry import INTERIOR
    return np.array([domain.classify(m, float(s)).position == INTERIOR for s in t])


@dataclass
class PointReport:
    residuals: Dict[str, np.ndarray]  # relation -> array of (m, t, residual)

    @property
    def max_residual(self) -> float:
        vals = [r[:, 2].max() for r in self.residuals.values() if len(r)]
        return float(max(vals)) if vals else 0.0

    def passed(self, tol) -> bool:
        return self.max_residual <= tol


def check_sholo(F: SampledFunction, domain=None, tol: Optional[float] = None) -> PointReport:
    """Residuals of the projection-matching and derivative relations at every interior point."""
    d = F.delta
    rows = {"match_up": [], "match_down": [], "dot_up": [], "dot_down": []}
    for m in F.columns:
        if not _neighbors(F, m):
            continue
        mask = _interior_rows(F, m, domain)
        f, fl, fr = F.values[m], F.values[m - 1], F.values[m + 1]
        fd = F.dt(m)
        black = m % 2 == 0
        # the up-partner is to the left of a white point and to the right of a black one
        up_partner = fr if black else fl
        dn_partner = fl if black else fr
        r_mu = np.abs(proj(f, L_UP) - proj(up_partner, L_UP))
        r_md = np.abs(proj(f, L_DOWN) - proj(dn_partner, L_DOWN))
        r_du = np.abs(proj(fd, L_UP) - 1j / d * (proj(fr, L_DOWN) - proj(fl, L_DOWN)))
        r_dd = np.abs(proj(fd, L_DOWN) - 1j / d * (proj(fr, L_UP) - proj(fl, L_UP)))
        for key, r in (("match_up", r_mu), ("match_down", r_md), ("dot_up", r_du), ("dot_down", r_dd)):
            for t, v, ok in zip(F.t[m], r, mask):
                if ok:
                    rows[key].append((m, t, v))
    return PointReport({k: np.array(v).reshape(-1, 3) for k, v in rows.items()})


def check_prehol(F: SampledFunction, domain=None, tol: Optional[float] = None) -> PointReport:
    """Residual of (F(z + d/2) - F(z - d/2)) / d + i dF/dt at interior points."""
    d = F.delta
    rows = []
    for m in F.columns:
        if not _neighbors(F, m):
            continue
        mask = _interior_rows(F, m, domain)
        r = np.abs((F.values[m + 1] - F.values[m - 1]) / d + 1j * F.dt(m))
        rows += [(m, t, v) for t, v, ok in zip(F.t[m], r, mask) if ok]
    return PointReport({"prehol": np.array(rows).reshape(-1, 3)})


# ---------------------------------------------------------------------------
# manufactured s-holomorphic fields

def _line_values(F0: dict, m0: int, m1: int, tol: float):
    """Per medial line real coordinates from F at t=0; checks the matching relations."""
    a = {}
    for m in range(m0, m1 + 1):
        black = m % 2 == 0
        q_up, q_dn = (m, m - 1) if black else (m - 1, m)
        for q, zeta in ((q_up, L_UP), (q_dn, L_DOWN)):
            x = complex(proj(complex(F0[m]), zeta) / zeta).real
            if q in a and abs(a[q] - x) > tol:
                raise InconsistentInitialData(f"columns beside medial line {q} disagree: {a[q]} vs {x}")
            a[q] = x
    return a


def exact_sholo(delta: float, m0: int, m1: int, F0: dict, t_grid, tol: float = 1e-10,
                consistency_tol: float = 1e-12) -> SampledFunction:
    """Evolve the derivative relations in t from data F0[m] at t = t_grid[0].

    The unknowns are the real coordinates of F on the medial lines
    m0-1 ... m1 between and beside the columns; lines outside are held at 0.
    Returns a SampledFunction with exact dense-output callbacks.
    """
    if m1 - m0 < 1:
        raise ValueError("need at least two columns")
    lines = list(range(m0 - 1, m1 + 1))
    a0 = _line_values(F0, m0, m1, consistency_tol)
    y0 = np.array([a0[q] for q in lines])
    pos = {q: i for i, q in enumerate(lines)}

    def rhs(_t, y):
        def val(q):
            i = pos.get(q)
            return 0.0 if i is None else y[i]
        out = np.empty_like(y)
        for q, i in pos.items():
            if q % 2 == 0:  # up-line
                out[i] = -(val(q + 1) - val(q - 1)) / delta
            else:
                out[i] = (val(q + 1) - val(q - 1)) / delta
        return out

    t_grid = np.asarray(t_grid, float)
    if np.allclose(y0, 0):
        sol = None
    else:
        sol = solve_ivp(rhs, (t_grid[0], t_grid[-1]), y0, method="DOP853", rtol=tol, atol=tol * 1e-2,
                        dense_output=True)

    def lines_at(t):
        t = np.atleast_1d(np.asarray(t, float))
        if sol is None:
            return np.zeros((len(lines), len(t)))
        return sol.sol(t)

    def assemble(m, Y):
        black = m % 2 == 0
        q_up, q_dn = (m, m - 1) if black else (m - 1, m)
        return Y[pos[q_up]] * L_UP + Y[pos[q_dn]] * L_DOWN

    def fn(m, t):
        return assemble(m, lines_at(t))

    def dfn(m, t):
        Y = lines_at(t)
        D = np.stack([rhs(0.0, Y[:, k]) for k in range(Y.shape[1])], axis=1)
        return assemble(m, D)

    return SampledFunction.from_callable(delta, range(m0, m1 + 1), t_grid, fn, dfn)


# ---------------------------------------------------------------------------
# the primitive H of F^2

@dataclass
class HField:
    delta: float
    values: Dict[int, np.ndarray]
    t: Dict[int, np.ndarray]
    gauge: tuple
    contour_residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    source: Optional[SampledFunction] = None

    @property
    def max_contour_residual(self) -> float:
        return float(np.max(np.abs(self.contour_residuals))) if len(self.contour_residuals) else 0.0

    def at(self, m, k):
        return float(self.values[m][k])


def _hdot(F: SampledFunction, m, t=None):
    if t is None:
        f = F.values[m]
    else:
        f = np.asarray(F.callback(m, t), np.complex128)
    return (2 / F.delta) * (proj(f, L_UP) * proj(f, L_DOWN)).real


def _gauss_cumulative(F, m, nodes=8):
    """Cumulative integral of dH/dt over the grid by Gauss-Legendre on each cell (exact callback)."""
    t = F.t[m]
    x, w = np.polynomial.legendre.leggauss(nodes)
    out = np.zeros(len(t))
    for k in range(len(t) - 1):
        a, b = t[k], t[k + 1]
        s = 0.5 * (b - a) * x + 0.5 * (a + b)
        out[k + 1] = out[k] + 0.5 * (b - a) * float(np.dot(w, _hdot(F, m, s)))
    return out


def _simpson_cumulative(y, h):
    from scipy.integrate import cumulative_simpson
    return np.concatenate([[0.0], cumulative_simpson(y, dx=h)])


def _step(F: SampledFunction, m, rows=slice(None)):
    """H(m + 1) - H(m) on grid rows."""
    f = F.values[m][rows]
    if m % 2 == 1:
        return np.abs(proj(f, L_DOWN)) ** 2
    return -np.abs(proj(f, L_UP)) ** 2


def gauge_near_b(domain, F: SampledFunction) -> tuple:
    """(column, row) of the white boundary column point nearest the mark b."""
    b = domain.marks[1]
    xb = domain.lattice.line_x(b.line)
    whites = [m for m in F.columns if m % 2 != 0]
    m = min(whites, key=lambda c: abs(c * F.delta / 2 - xb))
    k = int(np.argmin(np.abs(F.t[m] - b.t)))
    return m, k


def auto_bound(F: SampledFunction, domain=None) -> float:
    """Contour bound implied by the s-holomorphicity residual plus quadrature slack."""
    r = check_sholo(F, domain).max_residual
    fmax = max(float(np.max(np.abs(v))) for v in F.values.values())
    t = F.t[F.columns[0]]
    span = float(t[-1] - t[0])
    eta = F.eta(F.columns[0])
    return 4 * fmax * r * (1 + span / F.delta) + 10 * fmax ** 2 * span * eta ** 4 / F.delta + 1e-9


def build_H(F: SampledFunction, gauge: Optional[tuple] = None, bound=None, domain=None) -> HField:
    """Integrate H along a spanning tree: columns vertically, one gauge row horizontally.

    gauge = (m, k) pins H(m, t_k) = 0; the default is the white boundary point
    nearest b when a domain is given, else the first grid point.
    The contour residuals compare every other row's horizontal step with
    the vertical integrals.  `bound` is a number or "auto"; exceeding it raises
    NotSHolomorphic.
    """
    cols = F.columns
    if gauge is None and domain is not None:
        gauge = gauge_near_b(domain, F)
    if isinstance(bound, str):
        bound = auto_bound(F, domain)
    for m in cols[1:]:
        if not F.same_grid(cols[0], m):
            raise GridMismatch(f"column {m} uses a different t-grid")
    g_m, g_k = gauge if gauge is not None else (cols[0], 0)
    vint = {}
    for m in cols:
        if F.callback is not None:
            vint[m] = _gauss_cumulative(F, m)
        else:
            vint[m] = _simpson_cumulative(_hdot(F, m), F.eta(m))
    H = {}
    base = {g_m: -vint[g_m][g_k]}
    i0 = cols.index(g_m)
    for i in range(i0 + 1, len(cols)):
        m = cols[i]
        base[m] = base[cols[i - 1]] + vint[cols[i - 1]][g_k] + float(_step(F, cols[i - 1], g_k)) - vint[m][g_k]
    for i in range(i0 - 1, -1, -1):
        m = cols[i]
        base[m] = base[cols[i + 1]] + vint[cols[i + 1]][g_k] - float(_step(F, m, g_k)) - vint[m][g_k]
    for m in cols:
        H[m] = base[m] + vint[m]
    res = []
    for i in range(len(cols) - 1):
        m = cols[i]
        res.append(H[cols[i + 1]] - H[m] - _step(F, m))
    res = np.concatenate(res) if res else np.zeros(0)
    out = HField(F.delta, H, {m: F.t[m] for m in cols}, (g_m, g_k), res, F)
    if bound is not None and out.max_contour_residual > bound:
        raise NotSHolomorphic(f"contour residual {out.max_contour_residual:.3e} exceeds {bound:.3e}")
    return out


def staircase_difference(H: HField, F: SampledFunction, start: tuple, end: tuple) -> tuple:
    """H(end) - H(start) along the two monotone staircases (horizontal-first and vertical-first)."""
    (m0, k0), (m1, k1) = start, end
    cols = F.columns

    def vertical(m, ka, kb):
        if F.callback is not None:
            c = _gauss_cumulative(F, m)
        else:
            c = _simpson_cumulative(_hdot(F, m), F.eta(m))
        return c[kb] - c[ka]

    def horizontal(ma, mb, k):
        s = 0.0
        step = 1 if mb >= ma else -1
        for m in range(ma, mb, step):
            s += float(_step(F, m, k)) if step > 0 else -float(_step(F, m - 1, k))
        return s

    first = horizontal(m0, m1, k0) + vertical(m1, k0, k1)
    second = vertical(m0, k0, k1) + horizontal(m0, m1, k1)
    return first, second


def laplacian(f: SampledFunction, z, fddot: Optional[np.ndarray] = None) -> float:
    """f'' in t plus the same-colour horizontal second difference at z = (m, k)."""
    m, k = int(z[0]), int(z[1])
    for q in (m - 2, m + 2):
        if q not in f.values:
            raise MissingNeighbor(f"column {q} missing for the Laplacian at column {m}")
        if not f.same_grid(m, q):
            raise GridMismatch(f"columns {m} and {q} use different t-grids")
    v = np.asarray(f.values[m]).real
    n = len(v)
    if fddot is None:
        if not (2 <= k < n - 2):
            raise MissingNeighbor("the t-stencil needs two rows on each side")
        h = f.eta(m)
        tt = (-v[k - 2] + 16 * v[k - 1] - 30 * v[k] + 16 * v[k + 1] - v[k + 2]) / (12 * h * h)
    else:
        tt = float(fddot[k])
    d = f.delta
    hor = (np.asarray(f.values[m + 2]).real[k] + np.asarray(f.values[m - 2]).real[k] - 2 * v[k]) / d ** 2
    return float(tt + hor)


def _as_sampled(H: HField) -> SampledFunction:
    return SampledFunction(H.delta, {m: v.astype(np.complex128) for m, v in H.values.items()}, H.t)


def _hddot_exact(F: SampledFunction, m):
    f = F.values[m]
    fd = F.dt(m)
    return (2 / F.delta) * (proj(fd, L_UP) * proj(f, L_DOWN) + proj(f, L_UP) * proj(fd, L_DOWN)).real


@dataclass
class HarmonicityReport:
    rows: np.ndarray  # (m, t, laplacian, |Fdot|^2, signed residual)

    def max_residual(self) -> float:
        return float(np.max(np.abs(self.rows[:, 4]))) if len(self.rows) else 0.0

    def sign_pattern_ok(self, slack: float = 0.0) -> bool:
        for m, _, lap, _, _ in self.rows:
            if int(m) % 2 == 0 and lap < -slack:
                return False
            if int(m) % 2 == 1 and lap > slack:
                return False
        return True


def check_H_harmonicity(H: HField, F: SampledFunction, tol: Optional[float] = None, domain=None) -> HarmonicityReport:
    """Laplacian of H against +|dF/dt|^2 (black) and -|dF/dt|^2 (white)."""
    S = _as_sampled(H)
    rows = []
    for m in H.values:
        if m - 2 not in H.values or m + 2 not in H.values:
            continue
        if not F.same_grid(m, m - 2) or not S.same_grid(m, m + 2):
            raise GridMismatch(f"grid mismatch around column {m}")
        if F.dcallback is not None:
            fddot = _hddot_exact(F, m)
        else:
            fddot = _derivative(_hdot(F, m), F.eta(m))
        fd2 = np.abs(F.dt(m)) ** 2
        mask = _interior_rows(F, m, domain)
        n = len(H.t[m])
        for k in range(n):
            if not mask[k]:
                continue
            lap = laplacian(S, (m, k), fddot)
            target = fd2[k] if m % 2 == 0 else -fd2[k]
            rows.append((m, H.t[m][k], lap, fd2[k], lap - target))
    return HarmonicityReport(np.array(rows).reshape(-1, 5))


def remark_horizontal_residuals(H: HField, F: SampledFunction) -> np.ndarray:
    """|H(v) - H(u) - Im F(w)^2| for black u, v = u + delta and white midpoint w."""
    out = []
    for m in H.values:
        if m % 2 == 0 and m + 2 in H.values and m + 1 in F.values:
            lhs = H.values[m + 2] - H.values[m]
            rhs = (F.values[m + 1] ** 2).imag
            out.append(np.abs(lhs - rhs))
    return np.concatenate(out) if out else np.zeros(0)


def remark_vertical_residuals(H: HField, F: SampledFunction, nodes: int = 40) -> np.ndarray:
    """|H(u') - H(u) - Im(int F^2 dz) / delta| along each column, integrating F^2 directly."""
    from scipy.integrate import quad
    out = []
    for m, t in H.t.items():
        if F.callback is not None:
            def re_f2(s, m=m):
                return float((np.asarray(F.callback(m, np.array([s])))[0] ** 2).real)
            integ = quad(re_f2, t[0], t[-1], epsabs=1e-13, epsrel=1e-12, limit=200)[0]
        else:
            integ = float(np.trapezoid((F.values[m] ** 2).real, t))
        # Im(int F^2 i dt) = int Re F^2 dt
        out.append(abs(H.values[m][-1] - H.values[m][0] - integ / F.delta))
    return np.array(out)
