import csv
import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfim_sholo.configuration import make_configuration, sample_poisson, toggle
from tfim_sholo.errors import SigmaOutOfRange, StepTooSmall
from tfim_sholo.fk_observable import (COMP, LINES, check_phi_dots, compile_sites, fk_field, identity_table,
                                      lemma_algebra_residual, measure_configuration, measurement_grid,
                                      parafermionic_field, pathwise_turn_identity, phi_horizontal, phi_sample,
                                      phi_vertical, turn_eq_residuals, winding_relation_residual)
from tfim_sholo.geometry import INTERIOR, VBOUNDARY, dobrushin_rectangle
from tfim_sholo.interface import passes_at, trace_arrangement
from tfim_sholo.sampler import ChainParams, WeightSpec, mcmc_chain

DOM = dobrushin_rectangle(1.0, 4, 2.0, 1.0, 1.0)
ONE_BRIDGE = make_configuration(DOM, bridges={3: [0.5]})


@pytest.fixture(scope="module")
def samples():
    return list(mcmc_chain(DOM, WeightSpec(), ChainParams(seed=3, n_samples=400, burn_in=50)))


@pytest.fixture(scope="module")
def field():
    grid = measurement_grid(DOM)
    return fk_field(DOM, grid, chain_params=ChainParams(seed=2, n_samples=4000))


def test_event_a_turn_identity():
    z = (4, 0.75)
    rec = passes_at(trace_arrangement(DOM, ONE_BRIDGE), z)
    assert [p.direction for p in rec.passes] == ["up"]
    assert pathwise_turn_identity(DOM, ONE_BRIDGE, z) < 1e-12


def test_unvisited_turn_identity():
    z = (3, 1.5)
    assert passes_at(trace_arrangement(DOM, ONE_BRIDGE), z).passes == ()
    assert pathwise_turn_identity(DOM, ONE_BRIDGE, z) == 0.0
    assert pathwise_turn_identity(DOM, ONE_BRIDGE, z, "down") == 0.0


def _random_interior(rng):
    s = DOM.slots[rng.integers(len(DOM.slots))]
    return s.column, float(rng.uniform(s.lo, s.hi))


def _q_case(seed):
    rng = np.random.default_rng(seed)
    cfg = sample_poisson(DOM, 1.2, 1.2, rng)
    z = _random_interior(rng)
    rec = passes_at(trace_arrangement(DOM, cfg), z)
    recz = passes_at(trace_arrangement(DOM, toggle(cfg, *z)), z)
    return cfg, z, rec, recz


def _opposite_four_pass(rec, recz, alpha):
    # xi passes z once vertically against alpha, xi_z passes z in all four directions
    dirs = [p.direction for p in rec.passes]
    return len(recz.passes) == 4 and dirs == [{"up": "down", "down": "up"}[alpha]]


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10**6), alpha=st.sampled_from(["up", "down"]),
       q=st.sampled_from([2.0, 1.0, 3.0, 0.5, 4.0]))
def test_pathwise_turn_identities_generic_q(seed, alpha, q):
    cfg, z, rec, recz = _q_case(seed)
    if q != 2.0 and _opposite_four_pass(rec, recz, alpha):
        return  # covered by the two tests below
    assert pathwise_turn_identity(DOM, cfg, z, alpha, WeightSpec(q, DOM.delta)) < 1e-9


def _opposite_cases(n=3000):
    out = []
    for seed in range(n):
        cfg, z, rec, recz = _q_case(seed)
        for alpha in ("up", "down"):
            if _opposite_four_pass(rec, recz, alpha):
                out.append((cfg, z, alpha, rec))
    return out


def test_opposite_four_pass_residual_closed_form():
    cases = _opposite_cases(600)
    assert cases
    for q in (1.0, 3.0, 0.5):
        ws = WeightSpec(q, DOM.delta)
        for cfg, z, alpha, rec in cases:
            L = trace_arrangement(DOM, cfg).loop_count
            # the horizontal terms add to 2 cos(sigma pi) = 2 - q times the vertical phase
            expected = ws.sqrt_q ** L * abs(2 - q) / 2
            assert pathwise_turn_identity(DOM, cfg, z, alpha, ws) == pytest.approx(expected, rel=1e-9)


@pytest.mark.xfail(strict=True, reason="cancellation in the opposite four-pass event needs cos(sigma pi) = 0, "
                                       "i.e. q = 2; see the decisions ledger")
def test_generic_q_identity_in_opposite_four_pass_event():
    cfg, z, alpha, _ = _opposite_cases(600)[0]
    assert pathwise_turn_identity(DOM, cfg, z, alpha, WeightSpec(1.0, DOM.delta)) < 1e-9


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_winding_relations(seed):
    rng = np.random.default_rng(seed)
    cfg = sample_poisson(DOM, 1.2, 1.2, rng)
    assert winding_relation_residual(DOM, cfg, _random_interior(rng)) < 1e-12


def test_fault_breaks_identity():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(50):
        cfg = sample_poisson(DOM, 1.2, 1.2, rng)
        worst = max(worst, pathwise_turn_identity(DOM, cfg, _random_interior(rng), fault=1))
    assert worst > 1e-3


def test_kernel_matches_retrace():
    grid = measurement_grid(DOM)
    table = compile_sites(DOM, grid, 0.0)
    for seed in range(3):
        cfg = sample_poisson(DOM, 0.8, 0.8, seed)
        out = measure_configuration(DOM, cfg, table)
        for i, s in enumerate(grid):
            for k, a in enumerate(("up", "down", "left", "right")):
                assert abs(out[i, k] - phi_sample(DOM, cfg, (s.m, s.t), a)) < 1e-12


def test_phi_vertical_unvisited_and_bounds(samples):
    # top-right corner region above b is far from the interface only sometimes; use modulus bounds
    for z in [(2, 0.75), (5, 1.5)]:
        for a in ("up", "down"):
            obs = phi_vertical(samples, z, a)
            hits = np.mean([any(p.direction == a for p in passes_at(trace_arrangement(DOM, c), z).passes)
                            for c in samples])
            assert abs(obs.value) <= hits + 1e-12 <= 1 + 1e-12
            assert obs.line_distance() <= 1e-9 + 3 * abs(obs.se)


def test_phi_vertical_never_visited():
    empty = [make_configuration(DOM)] * 20
    obs = phi_vertical(empty, (3, 1.5), "up")
    # (3, 1.5) sits between the two full-height runs of the empty interface only on one side
    tr = trace_arrangement(DOM, empty[0])
    if not any(p.direction == "up" for p in passes_at(tr, (3, 1.5)).passes):
        assert obs.value == 0 and obs.se == 0


def test_phi_horizontal_vboundary_zero(samples):
    z = (0, 1.5)
    assert DOM.classify(*z).position == VBOUNDARY
    for a in ("left", "right"):
        obs = phi_horizontal(samples, z, a)
        assert obs.value == 0 and obs.se == 0


def test_phi_right_is_real(samples):
    obs = phi_horizontal(samples[:100], (3, 0.75), "right")
    assert abs(obs.value.imag) < 1e-12


def test_field_pathwise_properties(field):
    b = field.batches
    up, dn = b[:, :, COMP["up"]], b[:, :, COMP["down"]]
    F = up + dn
    # projection of F onto l(up) is the up piece (the two lines are orthogonal)
    zeta = LINES["up"]
    proj = zeta * (F / zeta).real
    assert np.max(np.abs(proj - up)) < 1e-12
    assert np.max(np.abs(F)) <= 2 + 1e-12
    # phi^up agrees across each black/white pair sharing the up line
    for i, s in enumerate(field.grid):
        if s.color == "white":
            j = field.index(s.m - 1, s.t)
            if j is not None:
                assert np.array_equal(up[:, i], up[:, j])


def test_lemma_algebra_exact(field):
    for i, s in enumerate(field.grid):
        if s.position == INTERIOR:
            assert lemma_algebra_residual(field, i) < 1e-12


def test_turn_relations_statistical(field):
    zs = []
    for i, s in enumerate(field.grid):
        if s.position == INTERIOR:
            for est in turn_eq_residuals(field, i).values():
                zs.append(abs(est.mean))
    # both relations hold per sample, so the estimates vanish up to rounding
    assert max(zs) < 1e-10


def test_identity_table_shape(field):
    rows = identity_table(field)
    assert len(rows) == sum(s.position == INTERIOR for s in field.grid)
    assert all("turn_up" in r and "turn_down" in r for r in rows)


def test_step_too_small(field):
    s = next(s for s in field.grid if s.position == INTERIOR)
    with pytest.raises(StepTooSmall):
        check_phi_dots(field, (s.m, s.t), eta=field.eta / 2)


def test_parafermionic_q2_matches_fk():
    grid = measurement_grid(DOM, spacing=0.5)
    cp = ChainParams(seed=5, n_samples=500)
    a = fk_field(DOM, grid, chain_params=cp)
    b = parafermionic_field(DOM, grid, WeightSpec(2.0, 1.0), cp)
    assert np.array_equal(a.batches, b.batches)


def test_parafermionic_q4_and_range():
    assert WeightSpec(4.0).sigma == pytest.approx(1.0)
    with pytest.raises(SigmaOutOfRange):
        parafermionic_field(DOM, [], SimpleNamespace(q=4.5))


def test_parafermionic_up_pair_equality():
    grid = measurement_grid(DOM, spacing=0.25)
    fld = parafermionic_field(DOM, grid, WeightSpec(3.0, 1.0), ChainParams(seed=8, n_samples=500))
    up = fld.batches[:, :, COMP["up"]]
    for i, s in enumerate(fld.grid):
        if s.color == "white" and fld.index(s.m - 1, s.t) is not None:
            assert np.array_equal(up[:, i], up[:, fld.index(s.m - 1, s.t)])


def test_field_csv(field, tmp_path):
    p = tmp_path / "f.csv"
    field.write_csv(p)
    with open(p, encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["col_index", "color", "t", "re", "im", "se_re", "se_im", "n"]
    assert len(rows) == len(field.grid) + 1


def test_grid_excludes_hboundary_margin():
    grid = measurement_grid(DOM)
    for s in grid:
        if s.position == INTERIOR:
            assert min(abs(s.t - 0.0), abs(s.t - 2.0)) >= DOM.delta / 8 - 1e-12
