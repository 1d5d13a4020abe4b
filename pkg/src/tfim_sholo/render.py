"""SVG renderings of configurations, interfaces, labellings and fields."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .geometry import BLACK, color_of  # noqa: E402

plt.rcParams["svg.hashsalt"] = "tfim-sholo"
plt.rcParams["svg.fonttype"] = "none"
_META = {"Date": None, "Creator": None}


def _save(fig, path):
    fig.savefig(path, format="svg", metadata=_META, bbox_inches="tight")
    plt.close(fig)
    return path


def _outline(ax, domain):
    pts = domain.boundary_path()
    xs = [p[0] for p in pts] + [pts[0][0]]
    ts = [p[1] for p in pts] + [pts[0][1]]
    ax.plot(xs, ts, color="0.3", lw=1.0, ls="--")
    d = domain.delta
    for col in domain.columns:
        x = col.x_index * d / 2
        for lo, hi in col.intervals:
            if col.color == BLACK:
                ax.plot([x, x], [lo, hi], color="0.15", lw=1.2)
            else:
                ax.plot([x, x], [lo, hi], color="0.75", lw=0.6, ls=":")


def _points(ax, domain, config):
    d = domain.delta
    for m, ts in config.cuts.items():
        ax.plot([m * d / 2] * len(ts), ts, "x", color="tab:red", ms=6, mew=1.5)
    for m, ts in config.bridges.items():
        for t in ts:
            ax.plot([(m - 1) * d / 2, (m + 1) * d / 2], [t, t], color="0.15", lw=1.2)


def _segments(ax, segs, lattice, color, lw):
    for s in segs:
        x0 = lattice.line_x(s["x"])
        x1 = lattice.line_x(s.get("x1", s["x"]))
        ax.plot([x0, x1], [s["t0"], s["t1"]], color=color, lw=lw)


def render_trace(trace, path, title=None):
    """Domain, points, the interface (red) and the loops (blue)."""
    dom = trace.domain
    fig, ax = plt.subplots(figsize=(5, 4))
    _outline(ax, dom)
    _points(ax, dom, trace.config)
    doc = trace.to_json()
    _segments(ax, [s for s in doc if "loop" not in s], dom.lattice, "tab:red", 1.8)
    _segments(ax, [s for s in doc if "loop" in s], dom.lattice, "tab:blue", 1.2)
    if dom.marks is not None:
        for mk in dom.marks:
            ax.plot([dom.lattice.line_x(mk.line)], [mk.t], "o", color="k", ms=4)
            ax.annotate(mk.name, (dom.lattice.line_x(mk.line), mk.t), textcoords="offset points", xytext=(4, 4))
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title(title or f"interface and {trace.loop_count} loops")
    return _save(fig, path)


def render_labelling(lab, domain, config, path, title=None):
    """psi = 1 pieces, with the path in red and loops in blue."""
    fig, ax = plt.subplots(figsize=(5, 4))
    _outline(ax, domain)
    _points(ax, domain, config)
    d = domain.delta
    for m, t0, t1 in lab.intervals:
        ax.plot([m * d / 2] * 2, [t0, t1], color="tab:blue", lw=3, alpha=0.6)
    if lab.path:
        ax.plot([p[0] * d / 2 for p in lab.path], [p[1] for p in lab.path], color="tab:red", lw=2)
    ax.set_title(title or f"|I| = {lab.total_length:.3f}, loops = {lab.loops}")
    return _save(fig, path)


def _scatter_field(ax, fig, xs, ts, vals, label):
    sc = ax.scatter(xs, ts, c=vals, cmap="viridis", s=28, marker="s")
    cb = fig.colorbar(sc, ax=ax)
    cb.set_label(label)


def render_field(grid, values, delta, path, part="abs", title=None):
    """Colour map of a complex field on grid sites (m, t); part in abs/re/im/arg."""
    vals = np.asarray(values)
    v = {"abs": np.abs, "re": np.real, "im": np.imag, "arg": np.angle}[part](vals)
    xs = [g[0] * delta / 2 for g in grid]
    ts = [g[1] for g in grid]
    fig, ax = plt.subplots(figsize=(5, 4))
    _scatter_field(ax, fig, xs, ts, v, f"{part} F")
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title(title or f"field ({part})")
    return _save(fig, path)


def render_heatmap(columns: dict, t: dict, delta, path, label="H", title=None):
    """Per-column real values drawn as vertical colour strips on a linear scale."""
    fig, ax = plt.subplots(figsize=(5, 4))
    allv = np.concatenate([np.asarray(v, float) for v in columns.values()])
    norm = matplotlib.colors.Normalize(vmin=float(allv.min()), vmax=float(allv.max()) or 1.0)
    for m, v in sorted(columns.items()):
        x = m * delta / 2
        tt = np.asarray(t[m])
        ax.scatter(np.full(len(tt), x), tt, c=np.asarray(v, float), cmap="magma", norm=norm, s=12,
                   marker="s", edgecolors="none")
    sm = matplotlib.cm.ScalarMappable(norm=norm, cmap="magma")
    cb = fig.colorbar(sm, ax=ax)
    cb.set_label(label)
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title(title or label)
    return _save(fig, path)


def render_residuals(rows, delta, path, key="z", title=None):
    """Residual map from a list of dicts with m, t and `key`."""
    xs = [r["m"] * delta / 2 for r in rows]
    ts = [r["t"] for r in rows]
    vs = [r[key] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 4))
    _scatter_field(ax, fig, xs, ts, vs, key)
    ax.set_title(title or key)
    return _save(fig, path)


def colors_present(grid) -> set:
    return {color_of(g[0]) for g in grid}


def render_configuration(domain, config, path, title=None):
    """Domain outline with cuts and bridges only."""
    fig, ax = plt.subplots(figsize=(5, 4))
    _outline(ax, domain)
    _points(ax, domain, config)
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title(title or f"{config.n_cuts} cuts, {config.n_bridges} bridges")
    return _save(fig, path)
