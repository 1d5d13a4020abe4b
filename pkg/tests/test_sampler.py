import json
import math
from itertools import product

import numpy as np
import pytest
from scipy import stats

from tfim_sholo.configuration import loop_count, make_configuration
from tfim_sholo.errors import SigmaOutOfRange, TooFewSamples
from tfim_sholo.geometry import dobrushin_rectangle
from tfim_sholo.sampler import (Chain, ChainParams, WeightSpec, batch_means, birth_acceptance, death_acceptance,
                                importance_estimate, mcmc_chain, weighted_expectation)

TINY = dobrushin_rectangle(1.0, 2, 1.0, 0.5, 0.5)


def test_weight_spec_critical_values():
    ws = WeightSpec()
    assert ws.q == 2.0
    assert ws.base_rate == pytest.approx(1 / math.sqrt(2))
    assert ws.sigma == 0.5
    assert WeightSpec(2.0, 0.5).base_rate == pytest.approx(1 / (0.5 * math.sqrt(2)))


def test_weight_spec_sigma_relation():
    for q in (0.5, 1.0, 3.0, 4.0):
        s = WeightSpec(q).sigma
        assert math.sin(s * math.pi / 2) == pytest.approx(math.sqrt(q) / 2)


@pytest.mark.parametrize("q", [0.0, -1.0, 4.5])
def test_weight_spec_range(q):
    with pytest.raises(SigmaOutOfRange):
        WeightSpec(q)


@pytest.mark.parametrize("kw", [dict(burn_in=-1), dict(thinning=-1), dict(n_samples=0), dict(move_mix=0.0),
                                dict(move_mix=1.0)])
def test_chain_params_validation(kw):
    with pytest.raises(ValueError):
        ChainParams(**kw)


def test_importance_constant_functional():
    est = importance_estimate(TINY, WeightSpec(), lambda c: 1.0, 500, 1)
    assert est.mean == 1.0 and est.std_error == 0


def test_importance_q1_is_plain_mean():
    ws = WeightSpec(1.0)
    est = importance_estimate(TINY, ws, lambda c: len(c), 2000, 2)
    from tfim_sholo.sampler import loop_weight_draws
    plain = np.mean([len(c) for c, _ in loop_weight_draws(TINY, ws, 2000, 2)])
    assert est.mean.real == pytest.approx(plain, rel=1e-12)
    assert est.n_effective == pytest.approx(2000)


def test_fixed_seed_identical_stream():
    p = ChainParams(seed=9, n_samples=30, burn_in=5, thinning=1)
    a = [c.dumps() for c in mcmc_chain(TINY, WeightSpec(), p)]
    b = [c.dumps() for c in mcmc_chain(TINY, WeightSpec(), p)]
    assert a == b


def test_checkpoint_restores_stream():
    p = ChainParams(seed=4, n_samples=10, burn_in=3, thinning=1)
    ch = Chain(TINY, WeightSpec(), p)
    ch.burn()
    doc = json.loads(json.dumps(ch.checkpoint()))
    ch.sweep(3)
    after = ch.configuration()
    other = Chain(TINY, WeightSpec(), p)
    other.restore(doc)
    other.sweep(3)
    assert other.configuration() == after


def test_q1_point_counts_are_poisson():
    ws = WeightSpec(1.0)
    p = ChainParams(seed=5, n_samples=4000, burn_in=50, thinning=10)
    counts = np.array([len(c) for c in mcmc_chain(TINY, ws, p)])
    mu = ws.base_rate * TINY.interior_length()
    kmax = int(mu + 4 * math.sqrt(mu)) + 1
    obs = np.array([np.sum(counts == k) for k in range(kmax)] + [np.sum(counts >= kmax)])
    pk = stats.poisson.pmf(np.arange(kmax), mu)
    exp = len(counts) * np.append(pk, 1 - pk.sum())
    keep = exp >= 5
    obs_k = np.append(obs[keep], obs[~keep].sum())
    exp_k = np.append(exp[keep], exp[~keep].sum())
    if exp_k[-1] == 0:
        obs_k, exp_k = obs_k[:-1], exp_k[:-1]
    p_value = stats.chisquare(obs_k, exp_k * obs_k.sum() / exp_k.sum()).pvalue
    assert p_value > 0.01


def test_empty_probability_cross_estimators():
    ws = WeightSpec()
    p = ChainParams(seed=6, n_samples=20_000, burn_in=50, thinning=2)
    mc = weighted_expectation(list(mcmc_chain(TINY, ws, p)), lambda c: float(len(c) == 0))
    imp = importance_estimate(TINY, ws, lambda c: float(len(c) == 0), 20_000, 7)
    assert abs(mc.mean.real - imp.mean.real) < 3 * math.hypot(mc.std_error.real, imp.std_error.real)


def test_mean_loops_cross_estimators():
    ws = WeightSpec()
    p = ChainParams(seed=8, n_samples=20_000, burn_in=50, thinning=2)
    mc = weighted_expectation(list(mcmc_chain(TINY, ws, p)), lambda c: loop_count(TINY, c))
    imp = importance_estimate(TINY, ws, lambda c: loop_count(TINY, c), 20_000, 9)
    assert abs(mc.mean.real - imp.mean.real) < 3 * math.hypot(mc.std_error.real, imp.std_error.real)


def test_weighted_expectation_constant_and_indicator():
    samples = list(mcmc_chain(TINY, WeightSpec(), ChainParams(seed=1, n_samples=200, burn_in=5)))
    c = weighted_expectation(samples, lambda s: 2.5)
    assert c.mean == 2.5 and c.std_error == 0
    ind = weighted_expectation(samples, lambda s: float(s.n_bridges > 0))
    assert 0 <= ind.mean.real <= 1
    assert ind.n_effective <= len(samples)


def test_too_few_samples():
    with pytest.raises(TooFewSamples):
        weighted_expectation([None] * 5, lambda s: 1.0)
    with pytest.raises(TooFewSamples):
        batch_means(np.ones(5), 10)


def _density(cfg, lam, sqrt_q):
    # Poisson density on n-point sets times the loop weight; the e^{-lam |D|} factor cancels
    return lam ** len(cfg) * sqrt_q ** loop_count(TINY, cfg)


@pytest.mark.parametrize("q", [2.0, 0.7, 3.5])
def test_detailed_balance_enumerated(q):
    ws = WeightSpec(q)
    lam, sq, length, mix = ws.base_rate, ws.sqrt_q, TINY.interior_length(), 0.3
    cols = [s for s in TINY.slots]
    # all 0-, 1- and 2-point states from a fixed menu of points
    menu = [(s.column, s.lo + f * (s.hi - s.lo)) for s in cols for f in (0.31, 0.77)]
    states = [[]] + [[p] for p in menu] + [[p, r] for p, r in product(menu, menu) if p < r and p[1] != r[1]]
    checked = 0
    for st in states:
        base = make_configuration(TINY, cuts={m: [t] for m, t in st if m % 2 == 0 and m},
                                  bridges={m: [t] for m, t in st if m % 2})
        if len(base) != len(st):
            continue
        for z in menu:
            if z in st or any(z[1] == r[1] for r in st):
                continue
            big = st + [z]
            cuts, bridges = {}, {}
            for m, t in big:
                (cuts if m % 2 == 0 else bridges).setdefault(m, []).append(t)
            nxt = make_configuration(TINY, cuts=cuts, bridges=bridges)
            n = len(base)
            dL = loop_count(TINY, nxt) - loop_count(TINY, base)
            fwd = _density(base, lam, sq) * mix / length * birth_acceptance(n, dL, lam, length, mix, sq)
            back = _density(nxt, lam, sq) * (1 - mix) / (n + 1) * death_acceptance(n + 1, -dL, lam, length, mix,
                                                                                     sq)
            assert fwd == pytest.approx(back, rel=1e-12)
            checked += 1
    assert checked > 20
