import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from tfim_sholo.errors import NTooLarge, SiteOutOfRange
from tfim_sholo.oracle import (SIGMA3, QuantumSpec, compare_representations, log_partition_function,
                               minus_hamiltonian, partition_function, report_passes, site_operator, two_point)

# frozen from the dense eigendecomposition; cross-checked against expm below
Z_N2 = 5.641008410471765
TWO_POINT_N2 = 0.4013358858291059


def test_spec_validation():
    with pytest.raises(NTooLarge):
        QuantumSpec(13)
    for kw in (dict(N=0), dict(N=2, J=0.0), dict(N=2, h=-1.0), dict(N=2, beta=0.0)):
        with pytest.raises(ValueError):
            QuantumSpec(**kw)


def test_single_site():
    for beta, h in ((1.0, 0.5), (2.0, 0.3)):
        assert partition_function(QuantumSpec(1, 0.5, h, beta)) == pytest.approx(2 * math.cosh(beta * h))


def test_n2_frozen_and_expm():
    spec = QuantumSpec(2)
    assert partition_function(spec) == pytest.approx(Z_N2, rel=1e-12)
    M = expm(spec.beta * minus_hamiltonian(spec))
    assert np.trace(M) == pytest.approx(Z_N2, rel=1e-12)
    zz = site_operator(SIGMA3, 1, 2) @ site_operator(SIGMA3, 2, 2)
    assert np.trace(zz @ M) / np.trace(M) == pytest.approx(two_point(spec, 1, 2), rel=1e-12)
    assert two_point(spec, 1, 2) == pytest.approx(TWO_POINT_N2, rel=1e-12)


def test_high_temperature_limit():
    for N in (1, 3, 5):
        assert partition_function(QuantumSpec(N, beta=1e-6)) == pytest.approx(2 ** N, abs=1e-8 * 2 ** N)


def test_log_partition_consistent():
    spec = QuantumSpec(5, 1.0, 0.7, 3.0)
    assert log_partition_function(spec) == pytest.approx(math.log(partition_function(spec)), rel=1e-13)


def test_two_point_examples():
    spec = QuantumSpec(4, 0.6, 0.4, 1.5)
    assert two_point(spec, 2, 2) == 1.0
    assert two_point(spec, 1, 3) == pytest.approx(two_point(spec, 3, 1), rel=1e-13)
    with pytest.raises(SiteOutOfRange):
        two_point(spec, 0, 2)
    with pytest.raises(SiteOutOfRange):
        two_point(spec, 1, 5)


def test_classical_limit():
    beta, J = 1.0, 0.5
    assert two_point(QuantumSpec(2, J, 1e-9, beta), 1, 2) == pytest.approx(math.tanh(beta * J), rel=1e-7)


@settings(max_examples=20, deadline=None)
@given(N=st.integers(2, 5), J=st.floats(0.1, 2.0), h=st.floats(0.1, 2.0), beta=st.floats(0.1, 3.0))
def test_two_point_bounded(N, J, h, beta):
    v = two_point(QuantumSpec(N, J, h, beta), 1, N)
    assert -1 - 1e-12 <= v <= 1 + 1e-12


def test_same_site_representations_exact():
    rep = compare_representations(QuantumSpec(3), n_samples=2000, seed=1, x=2, y=2)
    for name in ("fk", "rpr", "stim"):
        assert rep[name]["mean"] == 1.0 and rep[name]["se"] == 0.0


def test_mc_too_large():
    with pytest.raises(NTooLarge):
        compare_representations(QuantumSpec(9), n_samples=10)


@pytest.mark.parametrize("N", [2, 3])
def test_representations_agree(N):
    rep = compare_representations(QuantumSpec(N), n_samples=200_000, seed=4)
    for name in ("fk", "rpr", "stim"):
        assert rep["z_scores"][name] <= 3, name
        assert rep["log_z"][name]["z"] <= 3, name
    assert report_passes(rep, z_max=3.0, se_max=0.05)


def test_log_z_estimates_at_self_dual_point():
    rep = compare_representations(QuantumSpec(3, 0.7, 0.7, 1.0), n_samples=100_000, seed=6)
    assert max(rep["log_z"][k]["z"] for k in ("fk", "rpr", "stim")) <= 3
