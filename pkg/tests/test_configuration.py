import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfim_sholo.configuration import (Topology, configuration_from_json, count_components,
                                      count_components_floodfill, dual_configuration, empty_configuration,
                                      loop_count, make_configuration, sample_poisson, toggle)
from tfim_sholo.errors import BoundaryCut, InvalidConfig, NotInterior, TieBreak
from tfim_sholo.geometry import dobrushin_rectangle, primal_rectangle
from tfim_sholo.verification import figure_four, figure_one

DOM = dobrushin_rectangle(1.0, 4, 2.0, 1.0, 1.0)


def test_zero_rates_give_empty():
    cfg = sample_poisson(DOM, 0.0, 0.0, 1)
    assert len(cfg) == 0


def test_fixed_seed_reproducible():
    a = sample_poisson(DOM, 1.0, 1.0, 42)
    b = sample_poisson(DOM, 1.0, 1.0, 42)
    assert a == b and a.dumps() == b.dumps()


def test_poisson_mean_cut_count():
    # two interior black columns of height 4
    dom = primal_rectangle(1.0, 4, 4.0)
    assert dom.interior_length("black") == pytest.approx(8.0)
    rate = 1 / math.sqrt(2)
    rng = np.random.default_rng(7)
    counts = np.array([sample_poisson(dom, rate, 0.0, rng).n_cuts for _ in range(100_000)])
    mean, se = counts.mean(), counts.std(ddof=1) / math.sqrt(len(counts))
    assert abs(mean - 8 / math.sqrt(2)) < 3 * se


def test_negative_rate_rejected():
    with pytest.raises(ValueError):
        sample_poisson(DOM, -1.0, 0.0, 0)


def test_points_must_be_interior():
    with pytest.raises(InvalidConfig):
        make_configuration(DOM, cuts={2: [2.0]})
    with pytest.raises(InvalidConfig):
        make_configuration(DOM, cuts={1: [0.5]})


def test_ties_rejected():
    with pytest.raises(TieBreak):
        make_configuration(DOM, cuts={2: [0.5]}, bridges={3: [0.5]})


def test_json_round_trip_bit_exact():
    cfg = sample_poisson(DOM, 2.0, 2.0, 3)
    back = configuration_from_json(json.loads(cfg.dumps()), DOM)
    assert back == cfg


def test_dual_empty():
    dom = primal_rectangle(1.0, 4, 2.0)
    assert len(dual_configuration(empty_configuration(dom))) == 0


def test_dual_bridge_becomes_cut():
    dom = primal_rectangle(1.0, 4, 2.0)
    cfg = make_configuration(dom, bridges={3: [0.7]})
    d = dual_configuration(cfg)
    assert d.cuts == {3: (0.7,)} and d.bridges == {}


def test_dual_boundary_cut_rejected():
    dom = primal_rectangle(1.0, 4, 2.0)
    cfg = make_configuration(dom, topology=Topology("periodic", 2.0), cuts={0: [0.5]})
    with pytest.raises(BoundaryCut):
        dual_configuration(cfg)


def test_dual_involution():
    dom = primal_rectangle(1.0, 5, 2.0)
    # bridges off the outer white columns, which become the dual's outermost cut columns
    cfg = make_configuration(dom, cuts={2: [0.3], 4: [1.1, 1.7]}, bridges={3: [0.9], 5: [0.2]})
    assert dual_configuration(dual_configuration(cfg)) == cfg


def test_figure_one_components():
    dom, cfg = figure_one()
    assert count_components(dom, cfg, "periodic").k_black == 5


def test_figure_four_loops():
    dom, cfg = figure_four()
    assert loop_count(dom, cfg) == 5


def test_empty_dobrushin_wired():
    cc = count_components(DOM, empty_configuration(DOM), "dobrushin-wired")
    assert (cc.k_black, cc.k_white, cc.loops) == (1, 1, 0)


def test_toggle_twice_identity():
    cfg = sample_poisson(DOM, 1.0, 1.0, 5)
    assert toggle(toggle(cfg, 3, 0.77), 3, 0.77) == cfg


def test_toggle_empty_white_gives_bridge():
    cfg = toggle(empty_configuration(DOM), 3, 0.5)
    assert cfg.bridges == {3: (0.5,)} and cfg.cuts == {}


def test_toggle_rejects_boundary():
    with pytest.raises(NotInterior):
        toggle(empty_configuration(DOM), 2, 2.0)


def test_toggle_changes_loops_by_one():
    rng = np.random.default_rng(11)
    slots = DOM.slots
    for _ in range(300):
        cfg = sample_poisson(DOM, 1.5, 1.5, rng)
        s = slots[rng.integers(len(slots))]
        t = float(rng.uniform(s.lo, s.hi))
        assert abs(loop_count(DOM, toggle(cfg, s.column, t)) - loop_count(DOM, cfg)) == 1


def test_euler_relation_constant():
    rng = np.random.default_rng(12)
    vals = set()
    for _ in range(1000):
        cfg = sample_poisson(DOM, 1.5, 1.5, rng)
        cc = count_components(DOM, cfg, "dobrushin-wired")
        vals.add(cc.k_black - cfg.n_cuts - cc.k_white + cfg.n_bridges)
    assert len(vals) == 1


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), mode=st.sampled_from(["dobrushin-wired", "free"]))
def test_union_find_matches_floodfill(seed, mode):
    rng = np.random.default_rng(seed)
    cfg = sample_poisson(DOM, 1.0, 1.0, rng)
    if len(cfg) > 10:
        cfg = make_configuration(DOM, cuts={m: ts[:2] for m, ts in cfg.cuts.items()},
                                 bridges={m: ts[:2] for m, ts in cfg.bridges.items()})
    a = count_components(DOM, cfg, mode)
    b = count_components_floodfill(DOM, cfg, mode)
    assert (a.k_black, a.k_white) == (b.k_black, b.k_white)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_periodic_union_find_matches_floodfill(seed):
    dom = primal_rectangle(1.0, 4, 1.0)
    topo = Topology("periodic", 1.0)
    cfg = sample_poisson(dom, 1.0, 1.0, seed, topo)
    a = count_components(dom, cfg, "periodic")
    b = count_components_floodfill(dom, cfg, "periodic")
    assert a.k_black == b.k_black
