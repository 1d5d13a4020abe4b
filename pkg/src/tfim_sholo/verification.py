"""Verification suites: each returns a JSON-ready report with a `passed` flag.

Sample sizes and tolerances are arguments with the acceptance values as
defaults; the CLI scales them down for quick runs.
"""
from __future__ import annotations

import math
import time

import numpy as np

from .configuration import Topology, count_components, loop_count, make_configuration, make_rng, sample_poisson
from .errors import TieBreak
from .fk_observable import (EXACT_FLOOR, Site, _zscore, check_phi_dots, fk_field, harmonicity_defect,
                            identity_table, measurement_grid, pathwise_turn_identity)
from .geometry import dobrushin_rectangle, dual_rectangle, primal_rectangle
from .interface import trace_arrangement
from .oracle import QuantumSpec, compare_representations, report_passes
from .parity import boundary_phase_residuals, kw_free_energy_check, spin_field, winding_case
from .sampler import ChainParams
from .sholo import (L_DOWN, L_UP, build_H, check_H_harmonicity, check_sholo, exact_sholo,
                    remark_horizontal_residuals, remark_vertical_residuals)


def _random_dobrushin(rng):
    delta = float(rng.choice([1.0, 0.5]))
    n_black = int(rng.integers(2, 5))
    height = float(rng.choice([1.0, 1.5, 2.0]))
    ta = float(np.round(rng.uniform(0.2, height - 0.2), 3))
    tb = float(np.round(rng.uniform(0.2, height - 0.2), 3))
    return dobrushin_rectangle(delta, n_black, height, ta, tb)


def _random_interior_point(rng, domain, color):
    slots = [s for s in domain.slots if s.color == color]
    s = slots[int(rng.integers(len(slots)))]
    return s.column, float(rng.uniform(s.lo, s.hi))


def pathwise_suite(n_triples: int = 1000, seed: int = 0, tol: float = 1e-9, fault: int = 0) -> dict:
    """Turn identities on random (domain, configuration, z), all four colour/direction variants."""
    rng = make_rng(seed)
    t0 = time.time()
    worst = {}
    counts = {}
    fails = []
    done = 0
    while done < n_triples:
        dom = _random_dobrushin(rng)
        rate = float(rng.uniform(0.3, 2.0)) / dom.delta
        cfg = sample_poisson(dom, rate, rate, rng)
        color = ("black", "white")[done % 2]
        alpha = ("up", "down")[(done // 2) % 2]
        z = _random_interior_point(rng, dom, color)
        try:
            r = pathwise_turn_identity(dom, cfg, z, alpha, fault=fault)
        except TieBreak:
            continue
        key = f"{alpha}/{color}"
        worst[key] = max(worst.get(key, 0.0), r)
        counts[key] = counts.get(key, 0) + 1
        if r > tol and len(fails) < 5:
            fails.append({"variant": key, "z": list(z), "residual": r, "config": cfg.to_json(),
                          "domain": dom.to_json()})
        done += 1
    passed = all(v <= tol for v in worst.values()) and len(worst) == 4
    return {"suite": "pathwise", "identity": "turn identity (up/down at black/white points)",
            "n": done, "max_residual": worst, "counts": counts, "tol": tol, "failures": fails,
            "seconds": time.time() - t0, "passed": passed}


def loops_suite(n_configs: int = 1000, seed: int = 1) -> dict:
    """Traced loop count against union-find, and the per-domain Euler constant."""
    rng = make_rng(seed)
    t0 = time.time()
    doms = [_random_dobrushin(rng) for _ in range(10)]
    mism = 0
    euler = {i: set() for i in range(len(doms))}
    for k in range(n_configs):
        i = k % len(doms)
        dom = doms[i]
        rate = float(rng.uniform(0.3, 3.0)) / dom.delta
        cfg = sample_poisson(dom, rate, rate, rng)
        cc = count_components(dom, cfg, "dobrushin-wired")
        if trace_arrangement(dom, cfg).loop_count != cc.loops:
            mism += 1
        euler[i].add(cc.k_black - cfg.n_cuts - cc.k_white + cfg.n_bridges)
    constant = all(len(v) == 1 for v in euler.values())
    return {"suite": "loops", "n": n_configs, "mismatches": mism,
            "euler_values": {str(i): sorted(v) for i, v in euler.items()},
            "euler_constant": constant, "seconds": time.time() - t0,
            "passed": mism == 0 and constant}


def identity_summary(rows) -> dict:
    stat_keys = ("dot_up_fd_vs_closed", "dot_down_fd_vs_closed")
    allz, stat = [], []
    for r in rows:
        for k, v in r.items():
            if k in ("m", "t", "color"):
                continue
            allz.append(v)
            if k in stat_keys:
                stat.append(v)
    allz, stat = np.array(allz), np.array(stat)
    site_max = np.array([max(v for k, v in r.items() if k not in ("m", "t", "color")) for r in rows])
    return {"n_sites": len(rows), "max_z": float(allz.max()) if len(allz) else 0.0,
            "frac_within_2_statistical": float((stat <= 2).mean()) if len(stat) else 1.0,
            "frac_sites_within_2": float((site_max <= 2).mean()) if len(site_max) else 1.0,
            "mean_z2_statistical": float((stat ** 2).mean()) if len(stat) else 0.0}


def sholo_fk_suite(n_samples: int = 200_000, seed: int = 11, z_max: float = 3.0, frac: float = 0.95,
                   threads: int = 1, n_chains: int = 1) -> dict:
    """Statistical s-holomorphicity of the FK observable on the 4-column rectangle."""
    t0 = time.time()
    dom = dobrushin_rectangle(1.0, 4, 2.0, 1.0, 1.0)
    grid = measurement_grid(dom)
    per_chain = max(1, n_samples // n_chains)
    fld = fk_field(dom, grid, chain_params=ChainParams(seed=seed, n_samples=per_chain),
                   n_chains=n_chains, threads=threads)
    rows = identity_table(fld)
    s = identity_summary(rows)
    passed = s["max_z"] <= z_max and s["frac_within_2_statistical"] >= frac
    return {"suite": "sholo_fk", "n_samples": fld.n_samples, **s, "z_max": z_max, "frac_required": frac,
            "seconds": time.time() - t0, "passed": passed, "rows": rows}


def manufactured_field(seed: int = 0, delta: float = 1.0, n_columns: int = 7, t_max: float = 1.0,
                       n_rows: int = 161, tol: float = 1e-10):
    rng = make_rng(seed)
    a = {q: float(rng.normal()) for q in range(-1, n_columns)}
    F0 = {}
    for m in range(n_columns):
        qu, qd = (m, m - 1) if m % 2 == 0 else (m - 1, m)
        F0[m] = a[qu] * L_UP + a[qd] * L_DOWN
    return exact_sholo(delta, 0, n_columns - 1, F0, np.linspace(0.0, t_max, n_rows), tol=tol)


def h_suite(n_fields: int = 5, seed: int = 0, contour_tol: float = 1e-8, remark_tol: float = 1e-7,
            lap_tol: float = 1e-6) -> dict:
    """H from manufactured s-holomorphic fields: contours, the two remark identities, the Laplacian."""
    t0 = time.time()
    out = {"contour": 0.0, "remark_horizontal": 0.0, "remark_vertical": 0.0, "laplacian": 0.0, "sholo": 0.0}
    for k in range(n_fields):
        F = manufactured_field(seed + k)
        H = build_H(F)
        out["sholo"] = max(out["sholo"], check_sholo(F).max_residual)
        out["contour"] = max(out["contour"], H.max_contour_residual)
        out["remark_horizontal"] = max(out["remark_horizontal"], float(remark_horizontal_residuals(H, F).max()))
        out["remark_vertical"] = max(out["remark_vertical"], float(remark_vertical_residuals(H, F).max()))
        out["laplacian"] = max(out["laplacian"], check_H_harmonicity(H, F).max_residual())
    passed = (out["contour"] < contour_tol and out["remark_horizontal"] < remark_tol
              and out["remark_vertical"] < remark_tol and out["laplacian"] < lap_tol)
    return {"suite": "h", "n_fields": n_fields, "residuals": out,
            "tolerances": {"contour": contour_tol, "remark": remark_tol, "laplacian": lap_tol},
            "seconds": time.time() - t0, "passed": passed}


def oracle_suite(Ns=(2, 3), betas=(0.5, 1.0), n_samples: int = 1_000_000, seed: int = 0,
                 z_max: float = 3.0, se_max: float = 0.02) -> dict:
    t0 = time.time()
    reports = []
    for N in Ns:
        for b in betas:
            r = compare_representations(QuantumSpec(N, 0.5, 0.5, b), n_samples, seed + 17 * N + int(10 * b))
            r["passed"] = report_passes(r, z_max, se_max)
            reports.append(r)
    return {"suite": "oracle", "reports": reports, "z_max": z_max, "se_max": se_max,
            "seconds": time.time() - t0, "passed": all(r["passed"] for r in reports)}


WINDING_CASE_CONFIGS = {
    # a on the left side at t = 1 of a 4-column dual rectangle of height 2; w on column `w`
    "a": {"bridges": {1: [0.5005, 1.5]}, "w": (1, 0.5)},
    "b": {"bridges": {1: [0.010311498447093559], 3: [0.6277163214040331, 0.6475341360900495,
                                                      1.5609011881374553],
                      5: [0.6064348072855688, 0.8937884052204486]}, "w": (5, 0.8937879052204486)},
    "c": {"bridges": {1: [0.16145666610809895, 0.42071259070270983, 1.1492907928239195],
                      3: [1.9878850188213253],
                      5: [0.30157481189611546, 0.3052916368898648, 0.7828371713727016, 0.9473711398250217]},
          "w": (5, 0.9473706398250218)},
    "d": {"bridges": {1: [1.2005, 1.6]}, "w": (1, 1.2)},
}


def winding_case_examples(eps_default: float = 1e-3) -> dict:
    dom = dual_rectangle(1.0, 4, 2.0)
    a = (-1, 1.0)
    out = {}
    for name, spec in WINDING_CASE_CONFIGS.items():
        cfg = make_configuration(dom, bridges=spec["bridges"])
        wm, t = spec["w"]
        t_hat = min(x for x in spec["bridges"][wm] if x > t)
        eps = eps_default if t_hat - t < eps_default else 2 * (t_hat - t)
        out[name] = winding_case(dom, cfg, a, (wm, t), t_hat, eps)
    return out


def spin_suite(n_samples: int = 20_000, seed: int = 3, z_max: float = 3.0) -> dict:
    """F^sp(b) = 1, the four winding cases, and the boundary phase property."""
    t0 = time.time()
    dom = dual_rectangle(1.0, 4, 2.0)
    a, b = (-1, 1.0), (4, 0.0)
    cases = winding_case_examples()
    grid = [b, (0, 0.0), (2, 0.0), (6, 0.0), (0, 2.0), (2, 2.0), (4, 2.0), (6, 2.0)]
    grid += [(-1, t) for t in (0.25, 0.5, 1.5, 1.75)] + [(7, t) for t in (0.25, 0.75, 1.25, 1.75)]
    fld = spin_field(dom, a, b, grid, ChainParams(seed=seed, n_samples=n_samples))
    fb = fld.values[0]
    phase = boundary_phase_residuals(fld, dom)
    zs = [0.0 if abs(r["im"]) <= EXACT_FLOOR else (abs(r["im"]) / r["se"] if r["se"] > 0 else math.inf)
          for r in phase]
    passed = (fb == 1 and all(c["exact"] for c in cases.values()) and set(cases) == {"a", "b", "c", "d"}
              and len(phase) > 0 and max(zs) <= z_max)
    return {"suite": "spin", "F_at_b": [fb.real, fb.imag], "cases": cases, "boundary": phase,
            "boundary_max_z": max(zs), "n_samples": n_samples, "seconds": time.time() - t0, "passed": passed}


def duality_suite(pairs=((3, 1.0), (4, 0.5)), n_samples: int = 1_000_000, seed: int = 5,
                  z_max: float = 3.0) -> dict:
    t0 = time.time()
    reps = [kw_free_energy_check(N, b, 0.5, 0.5, n_samples, seed + N) for N, b in pairs]
    return {"suite": "duality", "reports": reps, "z_max": z_max, "seconds": time.time() - t0,
            "passed": all(r["z"] <= z_max for r in reps)}


def figure_one():
    """Periodic FK sample on 4 sites with five components."""
    dom = primal_rectangle(1.0, 4, 1.0)
    cfg = make_configuration(dom, cuts={0: [0.2, 0.6], 4: [0.3, 0.5], 6: [0.1, 0.95]},
                             bridges={1: [0.8], 5: [0.9]}, topology=Topology("periodic", 1.0))
    return dom, cfg


def figure_four():
    """Dobrushin rectangle sample with five loops besides the interface."""
    dom = dobrushin_rectangle(1.0, 4, 2.0, 1.0, 1.0)
    cfg = make_configuration(dom, cuts={2: [0.5], 4: [0.7]}, bridges={1: [1.5], 3: [1.8], 5: [1.6]})
    return dom, cfg


def figures_suite() -> dict:
    d1, c1 = figure_one()
    kb = count_components(d1, c1, "periodic").k_black
    d4, c4 = figure_four()
    L_trace = trace_arrangement(d4, c4).loop_count
    L_uf = loop_count(d4, c4)
    return {"suite": "figures", "k_black_fig1": kb, "loops_fig4": L_trace, "loops_fig4_union_find": L_uf,
            "passed": kb == 5 and L_trace == 5 and L_uf == 5}


def scaling_sites(domain, xs=(1.0, 2.0), ts=(0.5, 1.0, 1.5)):
    """Fixed physical black sites with their white neighbours."""
    d = domain.delta
    sites, centers = [], []
    for x in xs:
        m = int(round(2 * x / d))
        for t in ts:
            centers.append((m, t))
            for k in (m - 1, m, m + 1):
                pc = domain.classify(k, t)
                sites.append(Site(k, t, pc.color, pc.position))
    uniq = {(s.m, s.t): s for s in sites}
    return [uniq[k] for k in sorted(uniq)], centers


SCALING_SAMPLES = {1.0: 100_000, 0.5: 50_000, 0.25: 15_000}


def scaling_suite(deltas=(1.0, 0.5, 0.25), n_samples=None, seed: int = 21, z_max: float = 3.0,
                  width: float = 3.0, height: float = 2.0) -> dict:
    """Residual z-scores and the H^b harmonicity defect at fixed sites as the mesh shrinks.

    n_samples is an int or a {delta: count} map; the default budgets keep
    the finest mesh, whose sweeps cost roughly 16x the previous one, in range.
    """
    t0 = time.time()
    per = []
    for i, d in enumerate(deltas):
        if n_samples is None:
            n = SCALING_SAMPLES.get(d, 20_000)
        elif isinstance(n_samples, dict):
            n = int(n_samples.get(d, n_samples.get(str(d))))
        else:
            n = int(n_samples)
        n_black = int(round(width / d)) + 1
        dom = dobrushin_rectangle(d, n_black, height, height / 2, height / 2)
        sites, centers = scaling_sites(dom)
        t1 = time.time()
        fld = fk_field(dom, sites, chain_params=ChainParams(seed=seed + i, n_samples=n))
        zs, defects = [], []
        for c in centers:
            for res in check_phi_dots(fld, c).values():
                zs.extend(_zscore(est) for est in res.values())
            defects.append(harmonicity_defect(fld, c))
        dv = np.array([x for x, _ in defects])
        ds = np.array([s for _, s in defects])
        per.append({"delta": d, "max_z": float(max(zs)), "defect_mean": float(dv.mean()),
                    "defect_se": float(math.sqrt(np.sum(ds ** 2)) / len(ds)),
                    "defects": [[float(x), float(s)] for x, s in defects], "n_samples": fld.n_samples,
                    "seconds": time.time() - t1})
    # growth is flagged only above both the previous level and the z_max band
    zs_ok = all(b["max_z"] <= max(a["max_z"], z_max) for a, b in zip(per, per[1:]))
    dm = [p["defect_mean"] for p in per]
    mono = all(a > b for a, b in zip(dm, dm[1:]))
    return {"suite": "scaling", "per_delta": per, "residual_not_growing": zs_ok, "defect_decreasing": mono,
            "z_max": z_max, "seconds": time.time() - t0, "passed": zs_ok and mono}


SUITES = {
    "pathwise": pathwise_suite,
    "loops": loops_suite,
    "sholo": sholo_fk_suite,
    "h": h_suite,
    "oracle": oracle_suite,
    "spin": spin_suite,
    "duality": duality_suite,
    "figures": figures_suite,
    "scaling": scaling_suite,
}

# quick parameters for the default CLI run
QUICK = {
    "pathwise": {"n_triples": 400},
    "loops": {"n_configs": 400},
    "sholo": {"n_samples": 50_000},
    "h": {"n_fields": 3},
    "oracle": {"n_samples": 200_000, "se_max": 0.02},
    "spin": {"n_samples": 4000},
    "duality": {"n_samples": 200_000},
    "figures": {},
    "scaling": {"n_samples": {1.0: 20_000, 0.5: 10_000}, "deltas": (1.0, 0.5)},
}
