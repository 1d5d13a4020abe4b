import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfim_sholo.errors import GridMismatch, InconsistentInitialData, MissingNeighbor, NonUnitZeta, NotSHolomorphic
from tfim_sholo.sholo import (L_DOWN, L_UP, LineProjection, SampledFunction, build_H, check_H_harmonicity,
                              check_prehol, check_sholo, exact_sholo, laplacian, proj,
                              remark_horizontal_residuals, remark_vertical_residuals, staircase_difference)
from tfim_sholo.verification import manufactured_field

T = np.linspace(0.0, 1.0, 81)
COLS = range(0, 7)


def _fn(delta, f):
    return SampledFunction.from_callable(delta, COLS, T, f)


def test_proj_examples():
    assert proj(L_UP, L_UP) == pytest.approx(L_UP)
    assert abs(proj(1 + 1j, L_UP)) < 1e-15
    assert proj(1, L_UP) == pytest.approx(0.5 * (1 - 1j))


def test_proj_rejects_non_unit():
    with pytest.raises(NonUnitZeta):
        proj(1, 2.0)
    with pytest.raises(NonUnitZeta):
        LineProjection(0.5)


@settings(max_examples=200, deadline=None)
@given(x=st.floats(-10, 10), y=st.floats(-10, 10), th=st.floats(0, 2 * math.pi))
def test_proj_idempotent_and_decomposes(x, y, th):
    z, zeta = complex(x, y), cmath.exp(1j * th)
    p = proj(z, zeta)
    assert abs(proj(p, zeta) - p) < 1e-12
    assert abs(proj(z, L_UP) + proj(z, L_DOWN) - z) < 1e-12


def test_constant_is_sholo_and_prehol():
    F = _fn(1.0, lambda m, t: (0.3 - 0.7j) * np.ones_like(t))
    assert check_sholo(F).max_residual == 0
    assert check_prehol(F).max_residual == 0


def test_identity_is_prehol_not_sholo():
    d = 0.5
    F = _fn(d, lambda m, t: m * d / 2 + 1j * t)
    assert check_prehol(F).max_residual < 1e-12
    rep = check_sholo(F)
    # F(w) - F(w - delta/2) = delta/2, whose up projection has modulus delta/(2 sqrt 2)
    assert rep.residuals["match_up"][:, 2].max() == pytest.approx(d / (2 * math.sqrt(2)), rel=1e-12)


def test_conjugate_prehol_residual_two():
    F = _fn(1.0, lambda m, t: m / 2 - 1j * t)
    r = check_prehol(F).residuals["prehol"][:, 2]
    assert np.allclose(r, 2.0, atol=1e-10)


def test_grid_mismatch():
    F = _fn(1.0, lambda m, t: np.ones_like(t))
    F.t[3] = np.linspace(0, 1, 41)
    F.values[3] = np.ones(41, np.complex128)
    with pytest.raises(GridMismatch):
        check_sholo(F)


def test_exact_sholo_zero_and_constant():
    z = exact_sholo(1.0, 0, 5, {m: 0j for m in range(6)}, T)
    assert all(np.all(v == 0) for v in z.values.values())
    c = {m: 0.0j for m in range(6)}
    with pytest.raises(InconsistentInitialData):
        exact_sholo(1.0, 0, 5, {**c, 2: 1.0 + 0j}, T)


def test_exact_sholo_residual_small():
    for seed in range(3):
        F = manufactured_field(seed, n_columns=4)
        assert check_sholo(F).max_residual < 1e-8


def test_sholo_implies_prehol():
    for seed in range(3):
        F = manufactured_field(seed)
        assert check_prehol(F).max_residual <= 2 * check_sholo(F).max_residual + 1e-12


def test_h_for_up_line_constant_is_staircase():
    c = 0.8 * L_UP
    F = _fn(1.0, lambda m, t: c * np.ones_like(t))
    H = build_H(F, gauge=(0, 0))
    for m in range(0, 6):
        step = H.values[m + 1] - H.values[m]
        # black to white loses |F^up|^2, white to black gains |F^down|^2 = 0
        assert np.allclose(step, -0.64 if m % 2 == 0 else 0.0, atol=1e-14)
    assert all(np.allclose(v, v[0]) for v in H.values.values())
    rep = check_H_harmonicity(H, F)
    assert rep.max_residual() < 1e-12


def test_manufactured_h_properties():
    F = manufactured_field(2)
    H = build_H(F, gauge=(1, 0))
    assert H.max_contour_residual < 1e-8
    assert remark_horizontal_residuals(H, F).max() < 1e-7
    assert remark_vertical_residuals(H, F).max() < 1e-7
    rep = check_H_harmonicity(H, F)
    assert rep.max_residual() < 1e-6
    assert rep.sign_pattern_ok(slack=1e-6)
    a, b = staircase_difference(H, F, (1, 5), (5, 70))
    assert a == pytest.approx(b, abs=1e-8)
    assert a == pytest.approx(H.values[5][70] - H.values[1][5], abs=1e-8)


def test_build_h_rejects_non_sholo():
    F = _fn(1.0, lambda m, t: m / 2 + 1j * t)
    with pytest.raises(NotSHolomorphic):
        build_H(F, bound=1e-6)


def test_laplacian_examples():
    t = np.linspace(-1, 1, 41)
    cols = range(0, 7)
    const = SampledFunction.from_callable(1.0, cols, t, lambda m, s: 3.0 * np.ones_like(s))
    t2 = SampledFunction.from_callable(1.0, cols, t, lambda m, s: s ** 2)
    harm = SampledFunction.from_callable(1.0, cols, t, lambda m, s: (m / 2) ** 2 - s ** 2)
    assert laplacian(const, (2, 20)) == 0
    assert laplacian(t2, (2, 20)) == pytest.approx(2.0, abs=1e-9)
    assert laplacian(harm, (2, 20)) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(MissingNeighbor):
        laplacian(const, (0, 20))
    with pytest.raises(MissingNeighbor):
        laplacian(const, (2, 1))
