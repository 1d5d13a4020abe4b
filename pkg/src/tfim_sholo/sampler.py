"""Samplers for the loop-weighted FK law and weighted-expectation estimators.

The target law has density proportional to (sqrt q)^L(xi) with respect to
a Poisson process of rate 1/(delta sqrt q) on the interior of the domain.
Two routes are offered: self-normalised importance sampling from the
Poisson law and a birth-death Metropolis-Hastings chain.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, NamedTuple, Optional

import numpy as np

from . import _kernels as K
from .configuration import Configuration, make_rng, sample_poisson
from .errors import SigmaOutOfRange, TooFewSamples, ZeroWeightSum
from .geometry import SemiDiscreteDomain
from .interface import compile_board, config_points, raw_trace

MIN_BATCHES = 10


@dataclass(frozen=True)
class WeightSpec:
    q: float = 2.0
    delta: float = 1.0

    def __post_init__(self):
        if not (0 < self.q <= 4):
            raise SigmaOutOfRange(f"q={self.q} outside (0, 4]")
        if self.delta <= 0:
            raise ValueError("delta must be positive")

    @property
    def sqrt_q(self) -> float:
        return math.sqrt(self.q)

    @property
    def base_rate(self) -> float:
        return 1.0 / (self.delta * self.sqrt_q)

    @property
    def sigma(self) -> float:
        if self.q == 2.0:
            return 0.5
        return 2.0 / math.pi * math.asin(self.sqrt_q / 2.0)


@dataclass(frozen=True)
class ChainParams:
    seed: int = 0
    burn_in: int = 200
    thinning: int = 5
    n_samples: int = 1000
    move_mix: float = 0.5

    def __post_init__(self):
        if self.burn_in < 0 or self.thinning < 0:
            raise ValueError("burn_in and thinning must be >= 0")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if not (0 < self.move_mix < 1):
            raise ValueError("move_mix must lie in (0, 1)")

    def to_json(self):
        return dict(seed=self.seed, burn_in=self.burn_in, thinning=self.thinning,
                    n_samples=self.n_samples, move_mix=self.move_mix)


@dataclass(frozen=True)
class WeightedEstimate:
    mean: complex
    std_error: complex  # componentwise: se(re) + i se(im)
    n_effective: float

    def to_json(self):
        return {"mean": [self.mean.real, self.mean.imag],
                "se": [self.std_error.real, self.std_error.imag],
                "n_effective": self.n_effective}


# acceptance rules, shared by the kernel and the detailed-balance tests
def birth_acceptance(n, dL, lam, length, move_mix, sqrt_q):
    return min(1.0, lam * length * (1 - move_mix) / (move_mix * (n + 1)) * sqrt_q ** dL)


def death_acceptance(n, dL, lam, length, move_mix, sqrt_q):
    return min(1.0, n * move_mix / (lam * length * (1 - move_mix)) * sqrt_q ** dL)


class SiteTable(NamedTuple):
    """Flat description of measurement sites consumed by the measurement kernel."""
    kind: np.ndarray
    slot: np.ndarray
    t: np.ndarray
    sign: np.ndarray
    up: np.ndarray
    dn: np.ndarray
    up_p: np.ndarray
    up_m: np.ndarray
    dn_p: np.ndarray
    dn_m: np.ndarray
    eta: float
    hb_lane: np.ndarray
    hb_top: np.ndarray
    hb_sign: np.ndarray
    hb_dir: np.ndarray

    @staticmethod
    def empty():
        i = np.zeros(0, np.int64)
        return SiteTable(i, i, np.zeros(0), i, i, i, i, i, i, i, 0.0, i, np.zeros(0, np.bool_), i, i)

    def __len__(self):
        return self.kind.shape[0]


def _jump_rng(seed, index):
    bg = np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF)
    if index:
        bg = bg.jumped(index)
    return np.random.Generator(bg)


class Chain:
    """A single birth-death chain on the interior of a Dobrushin domain."""

    def __init__(self, domain: SemiDiscreteDomain, weight: WeightSpec, params: ChainParams,
                 chain_index: int = 0, fault: int = 0):
        self.domain = domain
        self.weight = weight
        self.params = params
        self.fault = int(fault)
        self.board = compile_board(domain)
        self.length = float(self.board.slot_cum[-1])
        self.per_sweep = max(1, math.ceil(weight.base_rate * self.length))
        self.rng = _jump_rng(params.seed, chain_index)
        self.sweeps = 0
        cap = int(4 * weight.base_rate * self.length * max(1.0, weight.sqrt_q)) + 64
        self.p_slot = np.zeros(cap, np.int64)
        self.p_t = np.zeros(cap)
        self.n = 0

    def _grow(self):
        cap = 2 * len(self.p_t)
        self.p_slot = np.concatenate([self.p_slot, np.zeros(cap - len(self.p_slot), np.int64)])
        self.p_t = np.concatenate([self.p_t, np.zeros(cap - len(self.p_t))])

    def _kernel_head(self):
        b = self.board
        return (b.lane_up, b.lane_lo_partner, b.lane_hi_partner, b.lane_lo_sign, b.lane_hi_sign,
                b.start_lane, b.slot_up_lane, b.slot_dn_lane, b.slot_sign, b.slot_lo, b.slot_cum)

    def _run(self, u):
        k = 0
        while k < len(u):
            n, _, status, done = K.birth_death(*self._kernel_head(), self.p_slot, self.p_t, self.n, u[k:],
                                               self.weight.base_rate, self.weight.sqrt_q,
                                               self.params.move_mix, self.fault)
            self.n = int(n)
            k += int(done)
            if status == 1:
                self._grow()
            elif status != 0:
                raise RuntimeError(f"chain kernel failed with status {status}")

    def sweep(self, count: int = 1):
        if count <= 0:
            return
        u = self.rng.random((count * self.per_sweep, 3))
        self._run(u)
        self.sweeps += count

    def burn(self):
        self.sweep(self.params.burn_in)

    @property
    def spacing(self) -> int:
        # thinning 0 would repeat the same state, so at least one sweep separates samples
        return max(1, self.params.thinning)

    def measure_block(self, sites: SiteTable, sigma: float, n_samples: int, block: int = 2000):
        """Run n_samples samples (spacing sweeps each) and evaluate the site table."""
        out = np.zeros((n_samples, len(sites), 6), np.complex128)
        loops = np.zeros(n_samples, np.int64)
        per = self.spacing * self.per_sweep
        s = 0
        while s < n_samples:
            stop = min(n_samples, s + block)
            u = self.rng.random(((stop - s) * per, 3))
            base = s
            skip = 0
            while s < stop:
                sub_out = out[base:stop]
                sub_loops = loops[base:stop]
                n, reached, done, status = K.chain_block(
                    *self._kernel_head(), self.p_slot, self.p_t, self.n, u[(s - base) * per:], per, s - base, skip,
                    self.weight.base_rate, self.weight.sqrt_q, self.params.move_mix, self.fault,
                    sites.kind, sites.slot, sites.t, sites.sign, sites.up, sites.dn,
                    sites.up_p, sites.up_m, sites.dn_p, sites.dn_m, sites.eta,
                    sites.hb_lane, sites.hb_top, sites.hb_sign, sites.hb_dir,
                    sigma, sub_out, sub_loops)
                self.n = int(n)
                if status == 1:
                    self._grow()
                    s = base + int(reached)
                    skip = int(done)
                    continue
                if status != 0:
                    raise RuntimeError(f"chain kernel failed with status {status}")
                s = stop
            self.sweeps += (stop - base) * self.spacing
        return out, loops

    def configuration(self) -> Configuration:
        cuts, bridges = {}, {}
        slots = self.domain.slots
        for s, t in zip(self.p_slot[:self.n], self.p_t[:self.n]):
            m = slots[int(s)].column
            target = cuts if m % 2 == 0 else bridges
            target.setdefault(m, []).append(float(t))
        cuts = {m: tuple(sorted(v)) for m, v in cuts.items()}
        bridges = {m: tuple(sorted(v)) for m, v in bridges.items()}
        return Configuration(cuts, bridges, self.domain)

    def set_configuration(self, cfg: Configuration):
        p_slot, p_t = config_points(self.domain, cfg)
        while len(self.p_t) < len(p_t):
            self._grow()
        self.p_slot[:len(p_t)] = p_slot
        self.p_t[:len(p_t)] = p_t
        self.n = len(p_t)

    # checkpoints
    def checkpoint(self) -> dict:
        state = self.rng.bit_generator.state
        return {"configuration": self.configuration().to_json(),
                "points": [[int(a), float(b)] for a, b in zip(self.p_slot[:self.n], self.p_t[:self.n])],
                "rng_state": _jsonable(state),
                "sweeps": self.sweeps,
                "params": self.params.to_json(),
                "q": self.weight.q}

    def restore(self, doc: dict):
        from .configuration import configuration_from_json
        # the stored point order matters: death moves pick points by index
        cfg = configuration_from_json(doc["configuration"], self.domain)
        pts = doc.get("points")
        if pts is None:
            self.set_configuration(cfg)
        else:
            while len(self.p_t) < len(pts):
                self._grow()
            for i, (a, b) in enumerate(pts):
                self.p_slot[i] = a
                self.p_t[i] = b
            self.n = len(pts)
        self.rng.bit_generator.state = _from_jsonable(doc["rng_state"])
        self.sweeps = int(doc["sweeps"])


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, np.ndarray):
        return {"__array__": [int(v) for v in x.tolist()], "dtype": str(x.dtype)}
    if isinstance(x, np.integer):
        return int(x)
    return x


def _from_jsonable(x):
    if isinstance(x, dict):
        if "__array__" in x:
            return np.array(x["__array__"], dtype=x["dtype"])
        return {k: _from_jsonable(v) for k, v in x.items()}
    return x


def mcmc_chain(domain: SemiDiscreteDomain, weight_spec: WeightSpec, params: ChainParams,
               chain_index: int = 0, fault: int = 0) -> Iterator[Configuration]:
    """Yield params.n_samples configurations after burn-in."""
    ch = Chain(domain, weight_spec, params, chain_index, fault)
    ch.burn()
    for _ in range(params.n_samples):
        ch.sweep(ch.spacing)
        yield ch.configuration()


def run_chains(domain, weight_spec: WeightSpec, params: ChainParams, sites: SiteTable,
               n_chains: int = 1, threads: int = 1, fault: int = 0, sigma: Optional[float] = None):
    """Independent chains measuring the same site table; merged in chain order.

    Returns (values[n_chains, n_samples, n_sites, 6], loops[n_chains, n_samples]).
    """
    sig = weight_spec.sigma if sigma is None else sigma

    def one(i):
        ch = Chain(domain, weight_spec, params, i, fault)
        ch.burn()
        return ch.measure_block(sites, sig, params.n_samples)

    if threads > 1 and n_chains > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            res = list(ex.map(one, range(n_chains)))
    else:
        res = [one(i) for i in range(n_chains)]
    vals = np.stack([r[0] for r in res])
    loops = np.stack([r[1] for r in res])
    return vals, loops


# estimators
def batch_means(values, n_batches: int = 20):
    """Mean, componentwise batch-means SE and effective sample count.

    `values` has shape (n_chains, n, ...) or (n, ...); batches never straddle chains.
    """
    v = np.asarray(values)
    if v.ndim == 1:
        v = v[None, :]
    n = v.shape[1]
    b = n // n_batches
    if b < 1 or n_batches < MIN_BATCHES:
        raise TooFewSamples(f"{n} samples cannot form {max(n_batches, MIN_BATCHES)} batches")
    cut = v[:, :b * n_batches]
    bm = cut.reshape((v.shape[0], n_batches, b) + v.shape[2:]).mean(axis=2)
    bm = bm.reshape((-1,) + v.shape[2:])
    nb = bm.shape[0]
    mean = cut.reshape((-1,) + v.shape[2:]).mean(axis=0)
    se_re = np.std(bm.real, axis=0, ddof=1) / np.sqrt(nb)
    se_im = np.std(bm.imag, axis=0, ddof=1) / np.sqrt(nb) if np.iscomplexobj(bm) else 0 * se_re
    total = cut.shape[0] * cut.shape[1]
    naive = np.std(cut.reshape((-1,) + v.shape[2:]).real, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        neff = np.where(se_re > 0, (naive / np.where(se_re > 0, se_re, 1)) ** 2, total)
    neff = np.minimum(neff, total)
    return mean, se_re + 1j * se_im, neff


def weighted_expectation(samples, f: Callable, n_batches: int = 20) -> WeightedEstimate:
    """Sample mean of f over chain output with batch-means error bars."""
    vals = np.array([complex(f(s)) for s in samples])
    if len(vals) < MIN_BATCHES:
        raise TooFewSamples(f"{len(vals)} samples, need at least {MIN_BATCHES} batches")
    nb = min(n_batches, len(vals))
    mean, se, neff = batch_means(vals, max(nb, MIN_BATCHES))
    return WeightedEstimate(complex(mean), complex(se), float(neff))


def loop_weight_draws(domain, weight_spec: WeightSpec, n: int, seed):
    """n i.i.d. Poisson configurations with their loop counts."""
    rng = make_rng(seed)
    lam = weight_spec.base_rate
    for _ in range(n):
        cfg = sample_poisson(domain, lam, lam, rng)
        p_slot, p_t = config_points(domain, cfg)
        raw = raw_trace(domain, p_slot, p_t)
        yield cfg, len(raw.totals) - 1


def importance_estimate(domain, weight_spec: WeightSpec, f: Callable, n: int, seed) -> WeightedEstimate:
    """Ratio estimator sum f w / sum w with w = (sqrt q)^L over Poisson draws."""
    fs = np.empty(n, np.complex128)
    logw = np.empty(n)
    lq = math.log(weight_spec.sqrt_q)
    for i, (cfg, L) in enumerate(loop_weight_draws(domain, weight_spec, n, seed)):
        fs[i] = complex(f(cfg))
        logw[i] = L * lq
    return ratio_estimate(fs, logw)


def ratio_estimate(fs, logw) -> WeightedEstimate:
    fs = np.asarray(fs, np.complex128)
    if len(fs) == 0:
        raise ZeroWeightSum("no draws")
    w = np.exp(np.asarray(logw) - np.max(logw))
    sw = w.sum()
    if not (sw > 0):
        raise ZeroWeightSum("importance weights sum to zero")
    # real sums, so f = 1 reproduces sw bit for bit
    mean = complex((w * fs.real).sum() / sw, (w * fs.imag).sum() / sw)
    d = fs - mean
    se_re = math.sqrt(float((w ** 2 * d.real ** 2).sum())) / sw
    se_im = math.sqrt(float((w ** 2 * d.imag ** 2).sum())) / sw
    neff = float(sw ** 2 / (w ** 2).sum())
    return WeightedEstimate(complex(mean), complex(se_re, se_im), neff)
