import math

import numpy as np
import pytest

from qsync.cqed_calibration import (
    RateFit,
    cqed_cycle,
    dispersive_shift,
    extract_rates,
    frequency_corrections,
    gamma_f,
    harmonic_balance,
    pump_shift,
    spin_model_params,
    time_averaged_observable,
)
from qsync.errors import ConvergenceError
from qsync.lindblad import DensityMatrix, LindbladModel, evolve, expectation, propagate, steady_state, trace_distance
from qsync.models import TWO_PI, CqedParams, Phase, cqed_preset
from qsync.operators import spin_lower, spin_raise, spin_z

MHZ, KHZ = TWO_PI * 1e6, TWO_PI * 1e3
SP, SM, SZ = spin_raise(0.5), spin_lower(0.5), spin_z(0.5)


def test_dispersive_shift():
    assert dispersive_shift(8 * MHZ, 5000 * MHZ, 4600 * MHZ) / KHZ == pytest.approx(160.0)
    assert dispersive_shift(4 * MHZ, 5000 * MHZ, 4600 * MHZ) / KHZ == pytest.approx(40.0)
    assert dispersive_shift(0.0, 1.0, 2.0) == 0.0
    with pytest.raises(ZeroDivisionError):
        dispersive_shift(1.0, 2.0, 2.0)


def test_gamma_f():
    assert gamma_f(4 * MHZ, 60 * MHZ) / MHZ == pytest.approx(16 / 15)
    assert gamma_f(8 * MHZ, 60 * MHZ) / MHZ == pytest.approx(64 / 15)
    assert gamma_f(0.0, 1.0) == 0.0
    with pytest.raises(ValueError):
        gamma_f(1.0, 0.0)


def test_pump_shift_examples():
    assert pump_shift(0.0, 500 * MHZ, 1 * MHZ) == 0.0
    gf_b = gamma_f(4 * MHZ, 60 * MHZ)
    assert (40 + pump_shift(8 * MHZ, 500 * MHZ, gf_b) / KHZ) == pytest.approx(1013.72, rel=0.01)
    gf_a = gamma_f(8 * MHZ, 60 * MHZ)
    assert (160 + pump_shift(5.5 * MHZ, 400 * MHZ, gf_a) / KHZ) == pytest.approx(763.3, rel=0.01)


def test_pump_shift_even_and_quadratic():
    gf = gamma_f(4 * MHZ, 60 * MHZ)
    for om in (0.3 * MHZ, 2 * MHZ, 7 * MHZ):
        assert pump_shift(-om, 500 * MHZ, gf) == pytest.approx(pump_shift(om, 500 * MHZ, gf), rel=1e-12)
    small = [pump_shift(x * MHZ, 500 * MHZ, gf) for x in (0.01, 0.02)]
    assert small[1] / small[0] == pytest.approx(4.0, rel=1e-3)


def test_frequency_corrections_report():
    c = frequency_corrections(cqed_preset("sc-phasecorrelation-a"))
    assert c["A"]["total"] / KHZ == pytest.approx(160.0, abs=1e-9)
    assert c["A"]["pump"] == 0.0
    assert not c["A"]["flag"] and not c["B"]["flag"]
    assert set(c["B"]) == {"dispersive", "pump", "total", "configured", "relative_difference", "flag"}


def test_extract_rates_without_pump():
    p = CqedParams(Omega_pA=0.0)
    fit = extract_rates(p, "A")
    purcell = p.kappa_A * (p.g_A / (p.bare_qubit("A") - p.omega_aA)) ** 2
    assert fit.w_eff / fit.gamma_eff < 1e-3
    assert fit.gamma_eff == pytest.approx(p.gamma0_A + purcell, rel=0.05)
    assert fit.p_ss == pytest.approx(fit.w_eff / (fit.w_eff + fit.gamma_eff), abs=1e-12)
    assert fit.rms_residual < 1e-3 and fit.w_eff >= 0


def test_extract_rates_inverted_transmon():
    fit = extract_rates(cqed_preset("sc-phasecorrelation-a"), "B")
    assert fit.ratio == pytest.approx(3.2, rel=0.1)
    assert fit.p_e[0] == pytest.approx(1.0)


def test_time_averaged_observable_static_model():
    m = LindbladModel(0.3 * SZ + 0.2 * (SP + SM), [SM, 0.5 * SP])
    t = np.linspace(0, 60, 601)
    states = propagate(m, DensityMatrix(np.diag([0.0, 1.0])), t)
    avg = time_averaged_observable(states, t, SP, window_fraction=0.25)
    assert abs(avg - expectation(steady_state(m), SP)) < 1e-5
    assert time_averaged_observable(states, t, np.eye(2)) == 1
    with pytest.raises(ConvergenceError):
        time_averaged_observable(states[:40], t[:40], SZ)


def _driven_qubit(nu=1.3, eps=0.4, delta=0.2, gamma=0.5):
    # drive rotating at nu relative to the frame: eps (S+ e^{i nu t} + h.c.)
    dyn = [(eps * SP, Phase(nu)), (eps * SM, Phase(-nu))]
    return LindbladModel(delta * SZ, [math.sqrt(gamma) * SM, 0.3 * SP], h_dynamic=dyn)


def test_harmonic_balance_matches_long_time_evolution():
    nu = 1.3
    m = _driven_qubit(nu)
    hs = harmonic_balance(m, [nu], order=8, tol=1e-13)
    period = 2 * math.pi / nu
    t = 80 * period + np.linspace(0, period, 9)
    states = evolve(m, DensityMatrix(np.diag([0.0, 1.0])), np.concatenate([[0.0], t]))[1:]
    for ti, r in zip(t, states):
        assert trace_distance(hs.at(ti), r) < 1e-7
    # in this frame the qubit follows the drive, so only harmonics 0 and +-1 matter
    assert np.linalg.norm(hs.component((3,))) < 1e-12


def test_harmonic_balance_time_independent_reduces_to_steady_state():
    m = LindbladModel(0.3 * SZ + 0.2 * (SP + SM), [SM, 0.5 * SP])
    hs = harmonic_balance(m, [1.0], order=1)
    assert trace_distance(hs.at(0.7), steady_state(m)) < 1e-12


def test_harmonic_balance_time_average_agrees_with_window_average():
    nu = 2.1
    m = _driven_qubit(nu, eps=0.25)
    hs = harmonic_balance(m, [nu], order=6)
    period = 2 * math.pi / nu
    t = np.linspace(0, 120 * period, 120 * 40 + 1)
    states = evolve(m, DensityMatrix(np.eye(2) / 2), t)
    # demodulate <S+> at the drive so the average is the rotating-frame coherence
    win = time_averaged_observable(states, t, SP, window_fraction=0.25, demod_frequency=-nu, tol=1e-3)
    cycle = np.trace(SP @ hs.component((-1,)))
    assert abs(win - cycle) < 1e-4


def test_cqed_cycle_single_drive_path():
    cyc = cqed_cycle(cqed_preset("sc-phasecorrelation-a", g_ab=0.0, n_resonator=2))
    ra, rb = cyc.drive_frame_state((0,)), cyc.drive_frame_state((2,))
    assert cyc.common_frame and cyc.harmonic(1, 0) == (1,)
    assert abs(ra.data[1, 0]) > 0.1
    assert abs(rb.data[1, 0]) < 1e-12  # undriven and uncoupled
    rab = cyc.drive_frame_state((0, 2))
    assert rab.dims == (4,) and abs(np.trace(rab.data) - 1) < 1e-12


def test_spin_model_params_factor_two():
    p = cqed_preset("sc-phasecorrelation-a", g_ab=TWO_PI * 100e3)
    fit = RateFit(TWO_PI * 10e3, TWO_PI * 50e3, 1 / 6, 0.0, TWO_PI * 60e3, np.zeros(1), np.zeros(1))
    sp = spin_model_params(p, fit, fit)
    assert sp.g == pytest.approx(2 * p.g_ab * 1e-6)
    assert sp.eps == pytest.approx(2 * p.eps * 1e-6)
    assert sp.gamma_phi == pytest.approx(p.gamma_phi_A * 1e-6 / 2)
    assert sp.w_a == pytest.approx(TWO_PI * 10e3 * 1e-6)
