import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import lpmv

from qsync.errors import DimensionError
from qsync.operators import (
    assoc_legendre,
    boson_ladder,
    clebsch_gordan,
    coherent_state,
    embed,
    spherical_tensor,
    spin_dim,
    spin_lower,
    spin_raise,
    spin_y,
    spin_z,
)

SPINS = [0.5, 1, 1.5, 2]


def test_spin_z_examples():
    assert np.allclose(spin_z(0.5), np.diag([0.5, -0.5]))
    assert np.allclose(spin_z(1), np.diag([1, 0, -1]))
    assert spin_z(0).shape == (1, 1) and spin_z(0)[0, 0] == 0


def test_spin_raise_examples():
    assert np.allclose(spin_raise(0.5), [[0, 1], [0, 0]])
    sp1 = spin_raise(1)
    assert np.allclose(sp1[np.nonzero(sp1)], [math.sqrt(2)] * 2)
    for s in SPINS:
        assert np.array_equal(spin_lower(s), spin_raise(s).conj().T)


@pytest.mark.parametrize("s", [0.5, 1, 1.5, 2, 2.5])
def test_angular_momentum_algebra(s):
    sp, sm, sz = spin_raise(s), spin_lower(s), spin_z(s)
    assert np.max(np.abs(sp @ sm - sm @ sp - 2 * sz)) < 1e-12
    assert np.max(np.abs(sz @ sp - sp @ sz - sp)) < 1e-12
    assert np.max(np.abs(sz @ sm - sm @ sz + sm)) < 1e-12


def test_invalid_spin():
    with pytest.raises(ValueError):
        spin_dim(0.3)
    with pytest.raises(ValueError):
        spin_dim(-0.5)


def test_boson_ladder():
    assert np.allclose(boson_ladder(2), [[0, 1], [0, 0]])
    assert np.allclose(np.diag(boson_ladder(3), 1), [1, math.sqrt(2)])
    a = boson_ladder(3)
    assert np.allclose(a.conj().T @ a, np.diag([0, 1, 2]))
    with pytest.raises(DimensionError):
        boson_ladder(1)


def test_embed_examples():
    dims = (2, 3, 2)
    assert np.allclose(embed(np.eye(3), 1, dims), np.eye(12))
    za, zb = embed(spin_z(0.5), 0, (2, 2)), embed(spin_z(0.5), 1, (2, 2))
    assert np.allclose(za @ zb, zb @ za)
    flip = embed(spin_raise(0.5), 0, (2, 2)) @ embed(spin_lower(0.5), 1, (2, 2))
    expected = np.zeros((4, 4))
    expected[1, 2] = 1.0  # |up down><down up|
    assert np.allclose(flip, expected)
    with pytest.raises(DimensionError):
        embed(np.eye(3), 0, (2, 2))


def test_embed_preserves_spectrum(rng):
    h = rng.standard_normal((3, 3))
    h = h + h.T
    big = embed(h, 1, (2, 3, 2))
    lam = np.sort(np.linalg.eigvalsh(h))
    assert np.allclose(np.sort(np.linalg.eigvalsh(big)), np.sort(np.repeat(lam, 4)))


def test_clebsch_gordan_known_values():
    # two spin-1/2 into the triplet and singlet
    assert clebsch_gordan(0.5, 0.5, 0.5, -0.5, 1, 0) == pytest.approx(1 / math.sqrt(2))
    assert clebsch_gordan(0.5, -0.5, 0.5, 0.5, 0, 0) == pytest.approx(-1 / math.sqrt(2))
    assert clebsch_gordan(1, 1, 1, -1, 2, 0) == pytest.approx(1 / math.sqrt(6))
    assert clebsch_gordan(1, 0, 1, 0, 1, 0) == pytest.approx(0.0)


def test_spherical_tensor_examples():
    assert np.allclose(spherical_tensor(0.5, 0, 0), np.eye(2) / math.sqrt(2))
    assert np.allclose(spherical_tensor(0.5, 1, 0), math.sqrt(2) * np.diag([0.5, -0.5]))
    assert np.allclose(spherical_tensor(0.5, 1, 1), -spin_raise(0.5))
    with pytest.raises(ValueError):
        spherical_tensor(0.5, 2, 0)
    with pytest.raises(ValueError):
        spherical_tensor(1, 1, 2)


def _tensors(s):
    return {(k, q): spherical_tensor(s, k, q) for k in range(int(2 * s) + 1) for q in range(-k, k + 1)}


@pytest.mark.parametrize("s", SPINS)
def test_spherical_tensor_orthonormal(s):
    ts = _tensors(s)
    for a, ta in ts.items():
        for b, tb in ts.items():
            assert abs(np.trace(ta.conj().T @ tb) - (a == b)) < 1e-12


@pytest.mark.parametrize("s", [0.5, 1])
def test_spherical_tensor_adjoint(s):
    for (k, q), t in _tensors(s).items():
        assert np.allclose(t.conj().T, (-1) ** q * spherical_tensor(s, k, -q))


def test_coherent_state_examples():
    psi = coherent_state(1, 0.0, 1.3)
    assert abs(abs(psi[0]) - 1) < 1e-12
    down = coherent_state(0.5, math.pi, 0.0)
    assert abs(abs(down[1]) - 1) < 1e-12


@settings(max_examples=60, deadline=None)
@given(
    s=st.sampled_from([0.5, 1, 1.5, 2]),
    theta=st.floats(0, math.pi),
    phi=st.floats(0, 2 * math.pi),
)
def test_coherent_state_norm_and_direction(s, theta, phi):
    psi = coherent_state(s, theta, phi)
    assert abs(np.linalg.norm(psi) - 1) < 1e-12
    # points along (sin t cos p, sin t sin p, cos t) with length s
    sz = (psi.conj() @ spin_z(s) @ psi).real
    sp = psi.conj() @ spin_raise(s) @ psi
    assert abs(sz - s * math.cos(theta)) < 1e-10
    assert abs(sp - s * math.sin(theta) * np.exp(1j * phi)) < 1e-10


def _legendre_recurrence(k, q, x):
    # upward recurrence in degree from P_q^q, Condon-Shortley phase included
    pmm = 1.0
    fact = 1.0
    for _ in range(q):
        pmm *= -fact * math.sqrt(1 - x * x)
        fact += 2
    if k == q:
        return pmm
    pm1 = x * (2 * q + 1) * pmm
    if k == q + 1:
        return pm1
    for ell in range(q + 2, k + 1):
        pmm, pm1 = pm1, ((2 * ell - 1) * x * pm1 - (ell + q - 1) * pmm) / (ell - q)
    return pm1


def test_assoc_legendre_examples():
    assert assoc_legendre(0, 0, 0.37) == 1.0
    assert assoc_legendre(1, 0, -0.6) == pytest.approx(-0.6)
    assert assoc_legendre(2, 1, 0.5) == pytest.approx(_legendre_recurrence(2, 1, 0.5), abs=1e-14)
    assert assoc_legendre(1, 1, 0.0, condon_shortley=False) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        assoc_legendre(2, 1, 1.5)
    with pytest.raises(ValueError):
        assoc_legendre(1, 2, 0.1)


@settings(max_examples=80, deadline=None)
@given(k=st.integers(0, 6), x=st.floats(-1, 1), data=st.data())
def test_assoc_legendre_matches_recurrence(k, x, data):
    q = data.draw(st.integers(0, k))
    assert abs(assoc_legendre(k, q, x) - _legendre_recurrence(k, q, x)) < 1e-10 * max(1, abs(lpmv(q, k, x)))


def test_spin_y_hermitian():
    for s in SPINS:
        y = spin_y(s)
        assert np.allclose(y, y.conj().T)
