"""Command-line entry point: sample, estimate, verify, oracle, render.

Every run writes manifest.json into the output directory with the full
validated config, versions and wall time.  Exit codes: 0 success, 1 suite
failure, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import csv
import importlib.metadata
import inspect
import json
import logging
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema

from . import __version__
from .errors import TfimError

log = logging.getLogger("tfim_sholo")

THREADS_ENV = "TFIM_SHOLO_THREADS"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_POS_INT = {"type": "integer", "minimum": 1}
_NONNEG_INT = {"type": "integer", "minimum": 0}
_POS_NUM = {"type": "number", "exclusiveMinimum": 0}
_POINT = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_DOMAIN = {
    "oneOf": [
        {"type": "object", "required": ["file"], "properties": {"file": {"type": "string"}},
         "additionalProperties": False},
        {"type": "object", "required": ["rectangle"], "additionalProperties": False,
         "properties": {"rectangle": {
             "type": "object", "required": ["kind", "delta", "n_black", "height"], "additionalProperties": False,
             "properties": {"kind": {"enum": ["primal", "dual", "dobrushin"]}, "delta": _POS_NUM,
                            "n_black": _POS_INT, "height": _POS_NUM, "t_a": _POS_NUM, "t_b": _POS_NUM}}}},
    ]
}
_CHAIN = {"samples": _POS_INT, "burn_in": _NONNEG_INT, "thinning": _NONNEG_INT,
          "move_mix": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
          "chains": _POS_INT, "batches": {"type": "integer", "minimum": 2}}

PARAM_SCHEMAS = {
    "sample": {"type": "object", "required": ["domain"], "additionalProperties": False,
               "properties": {"domain": _DOMAIN, "q": {"type": ["number", "null"]}, "fault": _NONNEG_INT,
                              **_CHAIN}},
    "estimate": {"type": "object", "required": ["domain", "mode"], "additionalProperties": False,
                 "properties": {"domain": _DOMAIN, "mode": {"enum": ["fk", "spin", "parafermionic"]},
                                "q": {"type": ["number", "null"]}, "a": _POINT, "b": _POINT,
                                "spacing": {"type": ["number", "null"], "exclusiveMinimum": 0},
                                "eta": {"type": ["number", "null"], "exclusiveMinimum": 0},
                                "check_sholo": {"type": "boolean"}, **_CHAIN}},
    "verify": {"type": "object", "additionalProperties": False,
               "properties": {"suites": {"type": "array", "items": {"enum": [
                   "pathwise", "loops", "sholo", "h", "oracle", "spin", "duality", "figures", "scaling"]}},
                   "profile": {"enum": ["quick", "full"]}, "fault": _NONNEG_INT,
                   "N": {"type": ["integer", "null"], "minimum": 1, "maximum": 8},
                   "overrides": {"type": "object"}}},
    "oracle": {"type": "object", "required": ["N"], "additionalProperties": False,
               "properties": {"N": {"type": "integer", "minimum": 1, "maximum": 12}, "J": _POS_NUM, "h": _POS_NUM, "beta": _POS_NUM,
                              "x": _POS_INT, "y": {"type": ["integer", "null"], "minimum": 1},
                              "samples": {"type": "integer", "minimum": 0}}},
    "render": {"type": "object", "additionalProperties": False,
               "properties": {"domain": _DOMAIN, "configuration": {"type": "string"},
                              "field": {"type": "string"}, "part": {"enum": ["abs", "re", "im", "arg"]}}},
}

RUN_SCHEMA = {
    "type": "object", "required": ["command", "seed", "threads", "out", "params"], "additionalProperties": False,
    "properties": {"command": {"enum": sorted(PARAM_SCHEMAS)}, "seed": _NONNEG_INT, "threads": _POS_INT,
                   "out": {"type": "string"}, "params": {"type": "object"}},
}


class UsageError(Exception):
    """Bad config or input; maps to exit code 2."""


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    threads: int = 1
    out: str = "out"
    params: dict = field(default_factory=dict)

    def validate(self):
        doc = asdict(self)
        try:
            jsonschema.validate(doc, RUN_SCHEMA)
            jsonschema.validate(self.params, PARAM_SCHEMAS[self.command])
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise UsageError(f"config error at {where}: {exc.message}") from None
        return self


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"{THREADS_ENV}={raw!r} is not an integer") from None


# ---------------------------------------------------------------------------
# helpers

def _versions() -> dict:
    import matplotlib
    import numba
    import numpy
    import scipy
    return {"tfim_sholo": __version__, "python": platform.python_version(), "numpy": numpy.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__, "matplotlib": matplotlib.__version__,
            "jsonschema": importlib.metadata.version("jsonschema")}


def _dump(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n", encoding="utf-8")


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if hasattr(x, "tolist"):
        return x.tolist()
    if hasattr(x, "to_json"):
        return x.to_json()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def load_domain(spec: dict):
    from .geometry import dobrushin_rectangle, domain_from_json, dual_rectangle, primal_rectangle
    if "file" in spec:
        p = Path(spec["file"])
        try:
            doc = json.loads(p.read_text(encoding="utf-8"))
        except OSError as exc:
            raise UsageError(f"cannot read domain file {p}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"domain file {p} is not JSON: {exc}") from None
        try:
            return domain_from_json(doc)
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"malformed domain {p}: {exc}") from None
        except TfimError as exc:
            raise UsageError(f"malformed domain {p}: {exc}") from None
    r = spec["rectangle"]
    try:
        if r["kind"] == "dobrushin":
            if "t_a" not in r or "t_b" not in r:
                raise UsageError("dobrushin rectangle needs t_a and t_b")
            return dobrushin_rectangle(r["delta"], r["n_black"], r["height"], r["t_a"], r["t_b"])
        fn = primal_rectangle if r["kind"] == "primal" else dual_rectangle
        return fn(r["delta"], r["n_black"], r["height"])
    except TfimError as exc:
        raise UsageError(f"malformed rectangle: {exc}") from None


def _weight(domain, q):
    from .sampler import WeightSpec
    if q is None:
        log.info("q not given; using q = 2")
        q = 2.0
    return WeightSpec(float(q), domain.delta)


def _chain(cfg: RunConfig):
    from .sampler import ChainParams
    p = cfg.params
    return ChainParams(seed=cfg.seed, burn_in=p.get("burn_in", 200), thinning=p.get("thinning", 5),
                       n_samples=p.get("samples", 1000), move_mix=p.get("move_mix", 0.5))


# ---------------------------------------------------------------------------
# commands

def cmd_sample(cfg: RunConfig, out: Path) -> int:
    from .interface import trace_arrangement
    from .render import render_configuration, render_trace
    from .sampler import mcmc_chain
    dom = load_domain(cfg.params["domain"])
    ws = _weight(dom, cfg.params.get("q"))
    cp = _chain(cfg)
    samples = list(mcmc_chain(dom, ws, cp, 0, cfg.params.get("fault", 0)))
    with open(out / "samples.jsonl", "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(s.dumps() + "\n")
    _dump(out / "domain.json", dom.to_json())
    last = samples[-1]
    summary = {"n_samples": len(samples), "weight": {"q": ws.q, "delta": ws.delta},
               "chain": cp.to_json(), "mean_points": sum(len(s) for s in samples) / len(samples)}
    if dom.marks is not None:
        tr = trace_arrangement(dom, last)
        _dump(out / "trace.json", tr.to_json())
        render_trace(tr, out / "trace.svg")
        summary["last_loop_count"] = tr.loop_count
    else:
        render_configuration(dom, last, out / "configuration.svg")
    _dump(out / "summary.json", summary)
    return EXIT_OK


def _write_rows(path: Path, rows: list):
    keys = []
    for r in rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})


def cmd_estimate(cfg: RunConfig, out: Path) -> int:
    from .errors import InvalidMarks
    from .fk_observable import fk_field, identity_table, measurement_grid, parafermionic_field
    from .parity import boundary_phase_residuals, spin_field
    from .render import render_field, render_residuals
    p = cfg.params
    dom = load_domain(p["domain"])
    cp = _chain(cfg)
    mode = p["mode"]
    grid = measurement_grid(dom, spacing=p.get("spacing"))
    summary = {"mode": mode, "n_sites": len(grid), "chain": cp.to_json()}
    if mode == "spin":
        if "a" not in p or "b" not in p:
            raise UsageError("spin mode needs a and b as [column index, t]")
        a = (int(p["a"][0]), float(p["a"][1]))
        b = (int(p["b"][0]), float(p["b"][1]))
        pts = [(s.m, s.t) for s in grid]
        if b not in pts:
            pts = [b] + pts
        try:
            fld = spin_field(dom, a, b, pts, cp)
        except InvalidMarks as exc:
            raise UsageError(f"spin mode: {exc}") from None
        fld.write_csv(out / "field.csv")
        summary["F_at_b"] = complex(fld.values[pts.index(b)])
        if p.get("check_sholo"):
            rows = boundary_phase_residuals(fld, dom)
            summary["boundary_phase"] = rows
            _write_rows(out / "residuals.csv", rows)
        render_field(pts, fld.values, dom.delta, out / "field.svg", "abs")
    else:
        ws = _weight(dom, p.get("q"))
        kw = dict(chain_params=cp, eta=p.get("eta"), n_chains=p.get("chains", 1), threads=cfg.threads,
                  n_batches=p.get("batches", 50))
        fld = fk_field(dom, grid, ws, **kw) if mode == "fk" else parafermionic_field(dom, grid, ws, **kw)
        fld.write_csv(out / "field.csv")
        summary.update({"n_samples": fld.n_samples, "q": ws.q, "sigma": ws.sigma, **fld.meta})
        if p.get("check_sholo"):
            from .verification import identity_summary
            rows = identity_table(fld)
            summary["sholo"] = identity_summary(rows)
            _write_rows(out / "residuals.csv", rows)
            if rows:
                render_residuals([{**r, "z": max(v for k, v in r.items() if k not in ("m", "t", "color"))}
                                  for r in rows], dom.delta, out / "residuals.svg", "z")
        render_field([(s.m, s.t) for s in grid], fld.values, dom.delta, out / "field.svg", "abs")
    _dump(out / "summary.json", summary)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    from . import verification as V
    p = cfg.params
    names = p.get("suites") or list(V.SUITES)
    profile = p.get("profile", "quick")
    overrides = p.get("overrides", {})
    fault = p.get("fault", 0)
    report = {"profile": profile, "suites": {}}
    ok = True
    for name in names:
        kw = dict(V.QUICK[name]) if profile == "quick" else {}
        kw.update(overrides.get(name, {}))
        if name == "pathwise":
            kw["fault"] = fault
        if name == "oracle" and p.get("N"):
            kw["Ns"] = (p["N"],)
        seed_param = inspect.signature(V.SUITES[name]).parameters.get("seed")
        if seed_param is not None and "seed" not in kw:
            kw["seed"] = seed_param.default + cfg.seed
        t0 = time.time()
        r = V.SUITES[name](**kw)
        r["seconds"] = time.time() - t0
        report["suites"][name] = r
        status = "PASS" if r["passed"] else "FAIL"
        detail = ""
        if name == "pathwise" and not r["passed"]:
            bad = [k for k, v in r["max_residual"].items() if v > r["tol"]]
            detail = f" ({r['identity']}: {', '.join(bad)})"
        print(f"{status} {name}{detail}")
        ok = ok and r["passed"]
    report["passed"] = ok
    _dump(out / "report.json", report)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_oracle(cfg: RunConfig, out: Path) -> int:
    from .oracle import QuantumSpec, compare_representations, log_partition_function, partition_function, two_point
    p = cfg.params
    try:
        spec = QuantumSpec(p["N"], p.get("J", 0.5), p.get("h", 0.5), p.get("beta", 1.0))
    except (TfimError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    x = p.get("x", 1)
    y = p.get("y") or spec.N
    res = {"spec": spec.to_json(), "x": x, "y": y, "Z": partition_function(spec),
           "log_Z": log_partition_function(spec), "two_point": two_point(spec, x, y)}
    if p.get("samples", 0) > 0:
        res["comparison"] = compare_representations(spec, p["samples"], cfg.seed, x, y)
    _dump(out / "oracle.json", res)
    print(json.dumps({k: res[k] for k in ("Z", "log_Z", "two_point")}))
    return EXIT_OK


def cmd_render(cfg: RunConfig, out: Path) -> int:
    from .configuration import configuration_from_json
    from .interface import trace_arrangement
    from .render import render_configuration, render_field, render_trace
    p = cfg.params
    written = []
    if "configuration" in p:
        if "domain" not in p:
            raise UsageError("rendering a configuration needs its domain")
        dom = load_domain(p["domain"])
        try:
            lines = Path(p["configuration"]).read_text(encoding="utf-8").strip().splitlines()
            conf = configuration_from_json(json.loads(lines[-1]), dom)
        except (OSError, json.JSONDecodeError, IndexError) as exc:
            raise UsageError(f"cannot read configuration: {exc}") from None
        if dom.marks is not None:
            written.append(render_trace(trace_arrangement(dom, conf), out / "trace.svg"))
        else:
            written.append(render_configuration(dom, conf, out / "configuration.svg"))
    if "field" in p:
        with open(p["field"], encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise UsageError("field CSV is empty")
        grid = [(int(r["col_index"]), float(r["t"])) for r in rows]
        vals = [complex(float(r["re"]), float(r["im"])) for r in rows]
        delta = float(p.get("delta", 1.0)) if "domain" not in p else load_domain(p["domain"]).delta
        written.append(render_field(grid, vals, delta, out / "field.svg", p.get("part", "abs")))
    if not written:
        raise UsageError("render needs a configuration (with domain) or a field CSV")
    print("\n".join(str(w) for w in written))
    return EXIT_OK


COMMANDS = {"sample": cmd_sample, "estimate": cmd_estimate, "verify": cmd_verify, "oracle": cmd_oracle,
            "render": cmd_render}


# ---------------------------------------------------------------------------
# argument parsing

def _pair(s: str):
    parts = s.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'm,t', got {s!r}")
    return [int(parts[0]), float(parts[1])]


def _rect(s: str):
    parts = s.split(",")
    if len(parts) not in (4, 6):
        raise argparse.ArgumentTypeError("expected kind,delta,n_black,height[,t_a,t_b]")
    d = {"kind": parts[0], "delta": float(parts[1]), "n_black": int(parts[2]), "height": float(parts[3])}
    if len(parts) == 6:
        d["t_a"], d["t_b"] = float(parts[4]), float(parts[5])
    return d


def _add_domain(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--domain", help="domain JSON file (delta, kind, path, optional marks)")
    g.add_argument("--rect", type=_rect, help="kind,delta,n_black,height[,t_a,t_b]")


def _add_chain(p):
    p.add_argument("--samples", type=int, help="samples per chain (default 1000)")
    p.add_argument("--burn-in", type=int, help="burn-in sweeps (default 200)")
    p.add_argument("--thinning", type=int, help="sweeps between samples (default 5)")
    p.add_argument("--move-mix", type=float, help="birth proposal probability (default 0.5)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tfim-sholo", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--config", help="JSON RunConfig; flags override its params")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--threads", type=int, help=f"worker threads (default ${THREADS_ENV} or 1)")
    ap.add_argument("--out", help="output directory (default ./out)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="run the birth-death chain and write configurations")
    _add_domain(s)
    _add_chain(s)
    s.add_argument("--q", type=float, help="loop weight parameter (default 2)")
    s.add_argument("--inject-fault", type=int, dest="fault", help="test hook")

    e = sub.add_parser("estimate", help="estimate an observable field on the measurement grid")
    _add_domain(e)
    _add_chain(e)
    e.add_argument("--mode", choices=["fk", "spin", "parafermionic"], default="fk")
    e.add_argument("--q", type=float)
    e.add_argument("--a", type=_pair, help="spin mode source mark 'm,t'")
    e.add_argument("--b", type=_pair, help="spin mode target 'm,t' on a lower black boundary")
    e.add_argument("--spacing", type=float)
    e.add_argument("--eta", type=float)
    e.add_argument("--chains", type=int)
    e.add_argument("--batches", type=int)
    e.add_argument("--check-sholo", action="store_true", default=None)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--suite", action="append", dest="suites", help="repeatable; default all")
    v.add_argument("--profile", choices=["quick", "full"])
    v.add_argument("--N", type=int, help="oracle suite chain length")
    v.add_argument("--inject-fault", type=int, dest="fault", help="test hook: 1 flips the winding sign")

    o = sub.add_parser("oracle", help="exact diagonalization of the finite chain")
    o.add_argument("--N", type=int, required=False)
    o.add_argument("--J", type=float)
    o.add_argument("--h", type=float)
    o.add_argument("--beta", type=float)
    o.add_argument("--x", type=int)
    o.add_argument("--y", type=int)
    o.add_argument("--samples", type=int, help="also compare the three representations")

    r = sub.add_parser("render", help="render SVGs from saved outputs")
    _add_domain(r, required=False)
    r.add_argument("--configuration", help="configuration JSON or samples.jsonl (last line used)")
    r.add_argument("--field", help="field CSV")
    r.add_argument("--part", choices=["abs", "re", "im", "arg"])
    return ap


_GLOBAL = ("config", "seed", "threads", "out", "verbose", "command")


def config_from_args(ns) -> RunConfig:
    base = {}
    if ns.config:
        try:
            base = json.loads(Path(ns.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}") from None
        if base.get("command", ns.command) != ns.command:
            raise UsageError(f"config is for {base['command']!r}, not {ns.command!r}")
    params = dict(base.get("params", {}))
    for k, val in vars(ns).items():
        if k in _GLOBAL or val is None:
            continue
        if k == "domain":
            params["domain"] = {"file": val}
        elif k == "rect":
            params["domain"] = {"rectangle": val}
        else:
            params[k] = val
    rc = RunConfig(command=ns.command,
                   seed=ns.seed if ns.seed is not None else base.get("seed", 0),
                   threads=ns.threads if ns.threads is not None else base.get("threads", default_threads()),
                   out=ns.out or base.get("out", "out"), params=params)
    return rc.validate()


def main(argv=None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.INFO, format="%(levelname)s %(message)s")
    t0 = time.time()
    try:
        cfg = config_from_args(ns)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        code = COMMANDS[cfg.command](cfg, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TfimError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _dump(out / "manifest.json", {"config": asdict(cfg), "seed": cfg.seed, "versions": _versions(),
                                  "argv": list(sys.argv[1:] if argv is None else argv),
                                  "wall_time_s": time.time() - t0})
    return code


if __name__ == "__main__":
    sys.exit(main())
