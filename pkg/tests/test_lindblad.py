import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsync.errors import DegenerateSteadyStateError, DimensionError, InvalidStateError, TimeDependenceError
from qsync.lindblad import (
    DensityMatrix,
    LindbladModel,
    evolve,
    expectation,
    liouvillian,
    partial_trace,
    propagate,
    steady_state,
    trace_distance,
    unvec,
    vec,
)
from qsync.models import OscillatorParams, build_two_qudit
from qsync.operators import embed, spin_lower, spin_raise, spin_z

SM = spin_lower(0.5)
SZ = spin_z(0.5)


def decay_model(gamma=1.0, h=None):
    return LindbladModel(np.zeros((2, 2)) if h is None else h, [math.sqrt(gamma) * SM])


def random_model(rng, d=4, n_jumps=3, dims=()):
    h = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = (h + h.conj().T) / 2
    jumps = [0.5 * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) for _ in range(n_jumps)]
    return LindbladModel(h, jumps, dims=dims)


def test_vec_is_column_stacking():
    a = np.arange(4).reshape(2, 2)
    assert np.array_equal(vec(a), [0, 2, 1, 3])
    assert np.array_equal(unvec(vec(a)), a)


def test_liouvillian_amplitude_damping_spectrum():
    lam = np.sort_complex(np.linalg.eigvals(liouvillian(decay_model(0.7))))
    assert np.allclose(np.sort(lam.real), [-0.7, -0.35, -0.35, 0.0], atol=1e-12)
    assert np.allclose(lam.imag, 0, atol=1e-12)


def test_liouvillian_explicit_formula(rng):
    m = random_model(rng, 3, 2)
    d = 3
    I = np.eye(d)
    expected = -1j * (np.kron(I, m.h_static) - np.kron(m.h_static.T, I))
    for o in m.jumps:
        od = o.conj().T @ o
        expected += np.kron(o.conj(), o) - 0.5 * np.kron(I, od) - 0.5 * np.kron(od.T, I)
    assert np.allclose(liouvillian(m), expected, atol=1e-13)
    assert np.allclose(liouvillian(m, sparse=True).toarray(), expected, atol=1e-13)


def test_liouvillian_trace_annihilation(rng):
    L = liouvillian(random_model(rng, 4, 3))
    assert np.max(np.abs(vec(np.eye(4)).conj() @ L)) < 1e-12


def test_liouvillian_needs_time_when_dynamic():
    h1 = np.array([[0, 1], [0, 0]], complex)
    m = LindbladModel(np.zeros((2, 2)), [SM], h_dynamic=[(h1, lambda t: np.exp(1j * t)), (h1.T, lambda t: np.exp(-1j * t))])
    with pytest.raises(TimeDependenceError):
        liouvillian(m)
    assert liouvillian(m, t=0.5).shape == (4, 4)
    with pytest.raises(TimeDependenceError):
        steady_state(m)


def test_model_rejects_non_hermitian():
    with pytest.raises(ValueError):
        LindbladModel(np.array([[0, 1], [0, 0]]))
    with pytest.raises(DimensionError):
        LindbladModel(np.eye(2), [np.eye(3)])
    with pytest.raises(DimensionError):
        LindbladModel(np.eye(4), dims=(2, 3))


def test_density_matrix_validation():
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.diag([0.6, 0.6]))
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.diag([1.2, -0.2]))
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.array([[0.5, 0.1], [0.3, 0.5]]))
    with pytest.raises(DimensionError):
        DensityMatrix(np.eye(4) / 4, (2, 3))


def test_steady_state_single_qubit_balance():
    m = LindbladModel(np.zeros((2, 2)), [math.sqrt(0.4) * spin_raise(0.5), math.sqrt(0.6) * SM])
    rho = steady_state(m)
    assert np.allclose(np.diag(rho.data).real, [0.4, 0.6], atol=1e-12)
    assert np.linalg.norm(liouvillian(m) @ vec(rho.data)) < 1e-12


def test_steady_state_uncoupled_product():
    p = OscillatorParams(w_a=0.3, gamma_a=0.9, w_b=0.8, gamma_b=0.1)
    rho = steady_state(build_two_qudit(p))
    ra = np.diag([0.3 / 1.2, 0.9 / 1.2])
    rb = np.diag([0.8 / 0.9, 0.1 / 0.9])
    assert np.allclose(rho.data, np.kron(ra, rb), atol=1e-12)


def test_steady_state_weak_drive_g0_limit():
    # g = 0: <S_A^+>/eps = -2i <S_A^z>_0 / Gamma_A in first order, here 0.2 for A
    p = OscillatorParams(w_a=0.4, gamma_a=0.6, w_b=0.75, gamma_b=0.25, eps=1e-4)
    rho = steady_state(build_two_qudit(p))
    sp_a = expectation(rho, embed(spin_raise(0.5), 0, (2, 2)))
    sp_b = expectation(rho, embed(spin_raise(0.5), 1, (2, 2)))
    assert abs(abs(sp_a) / p.eps - 0.2) < 1e-6
    assert abs(sp_b) < 1e-12


def test_steady_state_degenerate_raises():
    # pure dephasing: every diagonal state is stationary
    m = LindbladModel(np.zeros((2, 2)), [SZ])
    with pytest.raises(DegenerateSteadyStateError):
        steady_state(m)


def test_steady_state_sparse_path_matches_dense():
    # s = 3 qudits give d = 49, above the dense threshold
    p = OscillatorParams(s=3, g=0.7, eps=0.2, w_a=0.3, gamma_a=0.7, w_b=0.6, gamma_b=0.4, delta_d=0.1)
    m = build_two_qudit(p)
    rho = steady_state(m)
    L = liouvillian(m, sparse=True)
    assert np.linalg.norm(L @ vec(rho.data)) < 1e-9
    assert abs(np.trace(rho.data) - 1) < 1e-12


@pytest.mark.parametrize("s", [0.5, 1])
def test_undriven_steady_state_has_no_coherence(s):
    p = OscillatorParams(s=s, g=1.3, w_a=0.2, gamma_a=0.8, w_b=0.7, gamma_b=0.3, delta_d=0.4, delta_q=-0.2, gamma_phi=0.1)
    rho = steady_state(build_two_qudit(p))
    d = rho.dims[0]
    for site in (0, 1):
        assert abs(expectation(rho, embed(spin_raise(s), site, (d, d)))) < 1e-10


def test_liouvillian_single_zero_eigenvalue():
    for p in (
        OscillatorParams.with_unit_relaxation(0.4, 0.75, eps=1e-3, g=1.0),
        OscillatorParams.with_unit_relaxation(0.55, 0.09, eps=1e-3, g=2.0),
        OscillatorParams.with_unit_relaxation(0.25, 0.75, s=1, eps=1e-3, g=0.5),
    ):
        lam = np.linalg.eigvals(liouvillian(build_two_qudit(p)))
        near = np.abs(lam) < 1e-10
        assert near.sum() == 1
        assert np.all(lam[~near].real < 0)


def test_evolve_closed_system_conserves_purity():
    h = np.array([[0.3, 0.5 - 0.2j], [0.5 + 0.2j, -0.1]])
    rho0 = DensityMatrix.from_pure([1, 1j])
    states = evolve(LindbladModel(h), rho0, np.linspace(0, 10, 21))
    for r in states:
        assert abs(np.trace(r.data @ r.data).real - 1) < 1e-8


def test_evolve_amplitude_damping():
    t = np.linspace(0, 5, 26)
    states = evolve(decay_model(0.8), DensityMatrix(np.diag([1.0, 0.0])), t)
    pe = np.array([r.data[0, 0].real for r in states])
    assert np.max(np.abs(pe - np.exp(-0.8 * t))) < 1e-6


def test_evolve_validates_grid():
    with pytest.raises(ValueError):
        evolve(decay_model(), DensityMatrix(np.eye(2) / 2), [0.0, 1.0, 0.5])
    with pytest.raises(DimensionError):
        evolve(decay_model(), np.eye(3) / 3, [0.0, 1.0])


def test_evolve_and_propagate_agree():
    m = LindbladModel(0.4 * SZ + 0.3 * (SM + SM.T), [SM, 0.3 * SM.T])
    t = np.linspace(0, 4, 9)
    rho0 = DensityMatrix(np.diag([1.0, 0.0]))
    a, b = evolve(m, rho0, t, rel_tol=1e-10, abs_tol=1e-12), propagate(m, rho0, t)
    assert max(trace_distance(x, y) for x, y in zip(a, b)) < 1e-8
    with pytest.raises(ValueError):
        propagate(m, rho0, [0.0, 1.0, 3.0])


def test_evolve_time_dependent_drive_matches_rotating_frame():
    # a drive eps cos(w t) in the lab frame equals a static drive in the frame rotating at w (RWA-free check)
    w, eps, gamma = 2.0, 0.3, 0.5
    h_lab = 0.5 * w * 2 * SZ
    sp = spin_raise(0.5)
    dyn = [(0.5 * eps * sp, lambda t: np.exp(-1j * w * t)), (0.5 * eps * SM, lambda t: np.exp(1j * w * t))]
    lab = LindbladModel(h_lab, [math.sqrt(gamma) * SM], h_dynamic=dyn)
    rot = LindbladModel(0.5 * eps * (sp + SM), [math.sqrt(gamma) * SM])
    t = np.linspace(0, 6, 13)
    rho0 = DensityMatrix(np.diag([0.0, 1.0]))
    a = evolve(lab, rho0, t, rel_tol=1e-10, abs_tol=1e-12)
    b = propagate(rot, rho0, t)
    # populations are frame independent
    assert max(abs(x.data[0, 0] - y.data[0, 0]) for x, y in zip(a, b)) < 1e-7


@pytest.mark.parametrize("seed", range(20))
def test_long_time_evolve_reaches_steady_state(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, 4, 3, dims=(2, 2))
    rho0 = DensityMatrix(np.eye(4) / 4, (2, 2))
    gap = -np.sort(np.linalg.eigvals(liouvillian(m)).real)[-2]
    t_end = 30.0 / gap
    states = evolve(m, rho0, np.linspace(0, t_end, 5), rel_tol=1e-10, abs_tol=1e-12)
    assert trace_distance(states[-1], steady_state(m)) < 1e-6
    for r in states:
        assert np.max(np.abs(r.data - r.data.conj().T)) < 1e-9
        assert np.linalg.eigvalsh(r.data).min() > -1e-7


def test_partial_trace_product(rng, random_state):
    a, b = random_state(2), random_state(3)
    prod = DensityMatrix(np.kron(a.data, b.data), (2, 3))
    assert np.allclose(partial_trace(prod, [0]).data, a.data, atol=1e-14)
    assert np.allclose(partial_trace(prod, [1]).data, b.data, atol=1e-14)
    assert partial_trace(prod, [1]).dims == (3,)


def test_partial_trace_bell_state():
    bell = DensityMatrix.from_pure([1, 0, 0, 1], (2, 2))
    assert np.allclose(partial_trace(bell, [0]).data, np.eye(2) / 2)


def test_partial_trace_keeps_order_and_errors(random_state):
    rho = random_state(12, (2, 3, 2))
    red = partial_trace(rho, [2, 0])
    assert red.dims == (2, 2)
    with pytest.raises(ValueError):
        partial_trace(rho, [])
    with pytest.raises(DimensionError):
        partial_trace(rho, [3])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), keep=st.sampled_from([[0], [1], [2], [0, 2], [1, 2]]))
def test_partial_trace_unit_trace(seed, keep):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    rho = DensityMatrix(a @ a.conj().T / np.trace(a @ a.conj().T).real, (2, 3, 2))
    red = partial_trace(rho, keep)
    assert abs(np.trace(red.data) - 1) < 1e-12
    # consistency with Tr[(X on kept site) rho]
    if keep == [1]:
        x = np.diag([1.0, 2.0, 3.0])
        assert abs(expectation(red, x) - expectation(rho, embed(x, 1, (2, 3, 2)))) < 1e-12


def test_expectation_examples(random_state):
    rho = random_state(3)
    assert abs(expectation(rho, np.eye(3)) - 1) < 1e-12
    assert expectation(DensityMatrix(np.diag([1.0, 0.0])), SZ) == pytest.approx(0.5)
    h = np.array([[1, 2j, 0], [-2j, 0, 1], [0, 1, -1]])
    assert abs(expectation(rho, h).imag) < 1e-12
    with pytest.raises(DimensionError):
        expectation(rho, np.eye(2))
