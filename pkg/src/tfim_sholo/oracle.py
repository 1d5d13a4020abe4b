"""Exact thermal quantities of the finite transverse-field Ising chain, and
Monte Carlo estimators from its three graphical representations for comparison.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import _rep_kernels as rk
from .configuration import make_rng
from .errors import NTooLarge, SiteOutOfRange

SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]])
N_MAX = 12
N_MAX_MC = 8


@dataclass(frozen=True)
class QuantumSpec:
    N: int
    J: float = 0.5
    h: float = 0.5
    beta: float = 1.0

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        if self.N > N_MAX:
            raise NTooLarge(f"N={self.N} exceeds {N_MAX} for dense diagonalization")
        for name in ("J", "h", "beta"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive, got {v}")

    def to_json(self):
        return asdict(self)


def site_operator(op, x: int, N: int) -> np.ndarray:
    """op acting on site x (1-based) of an N-site chain."""
    out = np.ones((1, 1))
    for k in range(1, N + 1):
        out = np.kron(out, op if k == x else np.eye(2))
    return out


def minus_hamiltonian(spec: QuantumSpec) -> np.ndarray:
    """J sum sigma3 sigma3 + h sum sigma1, i.e. -H_N."""
    N = spec.N
    d = 2 ** N
    A = np.zeros((d, d))
    for x in range(1, N):
        A += spec.J * site_operator(SIGMA3, x, N) @ site_operator(SIGMA3, x + 1, N)
    for x in range(1, N + 1):
        A += spec.h * site_operator(SIGMA1, x, N)
    return A


@lru_cache(maxsize=32)
def _spectrum(spec: QuantumSpec):
    evals, evecs = np.linalg.eigh(minus_hamiltonian(spec))
    shift = float(evals.max())
    return evals, evecs, shift


def partition_function(spec: QuantumSpec) -> float:
    evals, _, shift = _spectrum(spec)
    return float(np.exp(spec.beta * shift) * np.sum(np.exp(spec.beta * (evals - shift))))


def log_partition_function(spec: QuantumSpec) -> float:
    evals, _, shift = _spectrum(spec)
    return float(spec.beta * shift + math.log(np.sum(np.exp(spec.beta * (evals - shift)))))


def two_point(spec: QuantumSpec, x: int, y: int) -> float:
    """<sigma3_x sigma3_y> at inverse temperature beta."""
    for s in (x, y):
        if not (1 <= s <= spec.N):
            raise SiteOutOfRange(f"site {s} outside 1..{spec.N}")
    if x == y:
        return 1.0
    evals, evecs, shift = _spectrum(spec)
    w = np.exp(spec.beta * (evals - shift))
    # diagonal of sigma3_x sigma3_y in the computational basis
    N = spec.N
    idx = np.arange(2 ** N)
    bx = (idx >> (N - x)) & 1
    by = (idx >> (N - y)) & 1
    diag = np.where(bx == by, 1.0, -1.0)
    expect = np.einsum("ik,i,ik->k", evecs, diag, evecs)
    return float(np.dot(w, expect) / w.sum())


# ---------------------------------------------------------------------------
# Poisson samples on the periodic chain

def poisson_columns(rng, n: int, ncols: int, rate: float, beta: float):
    """Counts (n, ncols) and flat uniform times on [0, beta)."""
    if ncols <= 0 or rate <= 0:
        return np.zeros((n, max(ncols, 0)), np.int64), np.zeros(0)
    counts = rng.poisson(rate * beta, size=(n, ncols)).astype(np.int64)
    times = beta * rng.random(int(counts.sum()))
    return counts, times


@dataclass
class Estimate:
    mean: float
    se: float

    def to_json(self):
        return {"mean": self.mean, "se": self.se}


def mean_estimate(values) -> Estimate:
    v = np.asarray(values, float)
    return Estimate(float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v))))


def ratio_of_means(num, den) -> Estimate:
    """mean(num) / mean(den) with a delta-method error for iid pairs."""
    num = np.asarray(num, float)
    den = np.asarray(den, float)
    md = den.mean()
    if md == 0:
        return Estimate(math.nan, math.inf)
    r = num.mean() / md
    resid = (num - r * den) / md
    return Estimate(float(r), float(resid.std(ddof=1) / math.sqrt(len(num))))


def log_mean_estimate(values, log_prefactor: float) -> Estimate:
    """log(prefactor * mean(values)) with the delta-method error."""
    e = mean_estimate(values)
    if e.mean <= 0:
        return Estimate(-math.inf, math.inf)
    return Estimate(log_prefactor + math.log(e.mean), e.se / e.mean)


def _chunks(n, size=200_000):
    while n > 0:
        k = min(n, size)
        yield k
        n -= k


def fk_weights(spec: QuantumSpec, n: int, seed, x: int, y: int):
    """Per sample 2^k and 1{x <-> y} 2^k under Poisson(h cuts, 2J bridges)."""
    rng = make_rng(seed)
    w, wc = [], []
    for k in _chunks(n):
        cc, ct = poisson_columns(rng, k, spec.N, spec.h, spec.beta)
        bc, bt = poisson_columns(rng, k, spec.N - 1, 2 * spec.J, spec.beta)
        comps, conn = rk.fk_samples(cc, ct, bc, bt, x - 1, y - 1)
        ww = np.exp2(comps.astype(float))
        w.append(ww)
        wc.append(ww * conn)
    return np.concatenate(w), np.concatenate(wc)


def rpr_weights(spec: QuantumSpec, n: int, seed, x: int, y: int):
    """Per sample parity sums without and with sources {x, y} under Poisson(J bridges)."""
    rng = make_rng(seed)
    w, wc = [], []
    for k in _chunks(n):
        bc, bt = poisson_columns(rng, k, spec.N - 1, spec.J, spec.beta)
        w.append(rk.rpr_samples(bc, bt, spec.N, spec.beta, spec.h, -1, -1, False))
        wc.append(rk.rpr_samples(bc, bt, spec.N, spec.beta, spec.h, x - 1, y - 1, False))
    return np.concatenate(w), np.concatenate(wc)


def stim_weights(spec: QuantumSpec, n: int, seed, x: int, y: int):
    """Per sample spin sums without and with sigma_x sigma_y under Poisson(h cuts)."""
    rng = make_rng(seed)
    w, wc = [], []
    for k in _chunks(n):
        cc, ct = poisson_columns(rng, k, spec.N, spec.h, spec.beta)
        a, b = rk.stim_samples(cc, ct, spec.beta, spec.J, x - 1, y - 1, False)
        w.append(a)
        wc.append(b)
    return np.concatenate(w), np.concatenate(wc)


def log_z_prefactors(spec: QuantumSpec) -> dict:
    N, b = spec.N, spec.beta
    return {"fk": b * spec.J * (N - 1),
            "rpr": b * spec.h * N + b * spec.J * (N - 1),
            "stim": b * spec.h * N}


def _zscore(est: Estimate, exact: float) -> float:
    if est.se == 0:
        return 0.0 if abs(est.mean - exact) < 1e-12 else math.inf
    return abs(est.mean - exact) / est.se


def compare_representations(spec: QuantumSpec, n_samples: int = 100_000, seed: int = 0,
                            x: int = 1, y: Optional[int] = None) -> dict:
    """Exact <sigma3_x sigma3_y> and log Z against all three representation estimators.

    Each representation uses its own independent stream.
    """
    if spec.N > N_MAX_MC:
        raise NTooLarge(f"N={spec.N} exceeds {N_MAX_MC} for Monte Carlo comparisons")
    y = spec.N if y is None else y
    for s in (x, y):
        if not (1 <= s <= spec.N):
            raise SiteOutOfRange(f"site {s} outside 1..{spec.N}")
    exact = two_point(spec, x, y)
    logz = log_partition_function(spec)
    pre = log_z_prefactors(spec)
    ss = [np.random.Generator(np.random.Philox(c)) for c in np.random.SeedSequence(seed).spawn(3)]
    report = {"spec": spec.to_json(), "x": x, "y": y, "n_samples": n_samples, "seed": seed,
              "exact": exact, "log_z_exact": logz, "z_scores": {}, "log_z": {}}
    for name, fn, child in (("fk", fk_weights, ss[0]), ("rpr", rpr_weights, ss[1]), ("stim", stim_weights, ss[2])):
        w, wc = fn(spec, n_samples, child, x, y)
        est = Estimate(1.0, 0.0) if x == y else ratio_of_means(wc, w)
        lz = log_mean_estimate(w, pre[name])
        report[name] = est.to_json()
        report["z_scores"][name] = _zscore(est, exact)
        report["log_z"][name] = {**lz.to_json(), "z": _zscore(lz, logz)}
    return report


def report_passes(report: dict, z_max: float = 3.0, se_max: float = 0.02) -> bool:
    for name in ("fk", "rpr", "stim"):
        if report["z_scores"][name] > z_max or report[name]["se"] > se_max:
            return False
        if report["log_z"][name]["z"] > z_max:
            return False
    return True
