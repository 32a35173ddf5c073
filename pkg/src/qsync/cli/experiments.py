"""Per-point evaluations for each experiment kind.

Every evaluator is a pure top-level function of (params, options) so sweeps can
run in worker processes. Each returns a dict keyed by the column names that
:func:`columns` declares for the experiment.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from ..cqed_calibration import cqed_cycle, extract_rates, frequency_corrections, spin_model_params
from ..lindblad import partial_trace, steady_state
from ..metrics import phase_locking, sync_measure, sync_measure_partial, tensor_expectations
from ..models import TWO_PI, build_two_qudit, collective_coherences
from ..perturbative import r_max, restore_detuning, solve_first, zero_crossing

NAN = float("nan")


def _nan(x):
    return NAN if x is None else float(x)


def columns(experiment: str, options: dict) -> list:
    """(name, unit, kind) for the output columns; kind is 'real' or 'complex'."""
    r = lambda *names, unit="Gamma": [(n, unit, "real") for n in names]  # noqa: E731
    if experiment == "steady":
        return [("splus_A", "1", "complex"), ("splus_B", "1", "complex"), *r("omega", unit="nats")]
    if experiment == "phase-lock-sweep":
        return r(
            "coh_A_over_eps",
            "coh_B_over_eps",
            "coh_A_over_eps_numeric",
            "coh_B_over_eps_numeric",
            unit="1/Gamma",
        ) + r("phase_A", "phase_B", unit="rad")
    if experiment == "zero-crossing":
        return r("g0_A", "g0_B") + r("exists_A", "exists_B", unit="bool")
    if experiment == "existence-map":
        return r("g0_A", "g0_B") + r("exists_A", "exists_B", "above_A", "above_B", unit="bool")
    if experiment == "detuning-map":
        return r("g0_A_resonant_q", "delta_q_star", "g0_A")
    if experiment == "sync-sweep":
        cols = r("omega", "omega_0", unit="nats") + r("R", unit="1")
        if options.get("partial"):
            cols += r("omega_partial", unit="nats")
        return cols + r("abs_c_TU", "abs_c_TD", "abs_c_SU", "abs_c_SD", unit="1")
    if experiment == "rmax-map":
        return r("g_star") + r("R_max", unit="1") + r("omega_max", "omega_0", unit="nats")
    if experiment == "qutrit-sweep":
        return [(f"T{k}{q}_A", "1", "complex") for k, q in ((1, 1), (2, 1), (2, 2))] + r("omega", unit="nats")
    if experiment == "cqed-run":
        cols = []
        if "coherence" in options["observables"]:
            cols += r("coh_A_cqed", "coh_B_cqed", "coh_A_spin", "coh_B_spin", unit="1")
        if "sync" in options["observables"]:
            cols += r("omega_cqed", "omega_spin", unit="nats")
        return cols
    if experiment == "cqed-calibrate":
        cols = []
        for j in "AB":
            cols += r(f"delta_{j}_dispersive", f"delta_{j}_pump", f"delta_{j}_total", f"delta_{j}_table", unit="kHz")
            cols += r(f"delta_{j}_rel_diff", unit="1")
            cols += r(f"w_{j}", f"gamma_{j}", unit="kHz") + r(f"ratio_{j}", f"fit_rms_{j}", unit="1")
        return cols
    raise KeyError(experiment)


def _steady(p):
    return steady_state(build_two_qudit(p))


def _omega(p, rho=None):
    rho = _steady(p) if rho is None else rho
    rho_u = _steady(p.replace(eps=0.0))
    return sync_measure(rho, rho_u).omega


def ev_steady(p, opt):
    rho = _steady(p)
    return {
        "splus_A": phase_locking(rho, "A").coherence,
        "splus_B": phase_locking(rho, "B").coherence,
        "omega": _omega(p, rho),
    }


def ev_phase_lock(p, opt):
    if p.eps == 0:
        raise ValueError("phase-lock-sweep needs a non-zero drive eps")
    rho = _steady(p)
    a, b = phase_locking(rho, "A").coherence, phase_locking(rho, "B").coherence
    first = solve_first(p)
    return {
        "coh_A_over_eps": abs(first.splus_a),
        "coh_B_over_eps": abs(first.splus_b),
        "coh_A_over_eps_numeric": abs(a) / p.eps,
        "coh_B_over_eps_numeric": abs(b) / p.eps,
        "phase_A": float(np.angle(a)),
        "phase_B": float(np.angle(b)),
    }


def ev_zero_crossing(p, opt):
    g0 = {j: _nan(zero_crossing(p, j, tuple(opt["g_range"]), opt["n_scan"])) for j in "AB"}
    out = {"g0_A": g0["A"], "g0_B": g0["B"]}
    out.update({f"exists_{j}": float(not math.isnan(g0[j])) for j in "AB"})
    if "threshold" in opt:
        out.update({f"above_{j}": float(not math.isnan(g0[j]) and g0[j] > opt["threshold"]) for j in "AB"})
    return out


def ev_detuning(p, opt):
    g_range, dq_range = tuple(opt["g_range"]), tuple(opt["dq_range"])
    res = restore_detuning(p, dq_range=dq_range, g_range=g_range)
    return {
        "g0_A_resonant_q": _nan(zero_crossing(p.replace(delta_q=0.0), "A", g_range)),
        "delta_q_star": NAN if res is None else res[0],
        "g0_A": NAN if res is None else res[1],
    }


def ev_sync(p, opt):
    rho = _steady(p)
    rho_u = _steady(p.replace(eps=0.0))
    om = sync_measure(rho, rho_u).omega
    om0 = _omega(p.replace(g=0.0))
    out = {"omega": om, "omega_0": om0, "R": math.inf if om0 < 1e-14 else om / om0}
    if opt.get("partial"):
        out["omega_partial"] = sync_measure_partial(rho, rho_u).omega
    if abs(p.s - 0.5) < 1e-12:
        c = collective_coherences(rho)
        out.update({f"abs_{k}": abs(v) for k, v in c.items()})
    else:
        out.update({k: NAN for k in ("abs_c_TU", "abs_c_TD", "abs_c_SU", "abs_c_SD")})
    return out


def ev_rmax(p, opt):
    res = r_max(p, tuple(opt["g_range"]), opt["n_scan"])
    return {"g_star": res.g_star, "R_max": res.r_max, "omega_max": res.omega_max, "omega_0": res.omega_0}


def ev_qutrit(p, opt):
    rho = _steady(p)
    t = tensor_expectations(partial_trace(rho, [0]))
    out = {f"T{k}{q}_A": t[(k, q)] for k, q in ((1, 1), (2, 1), (2, 2))}
    out["omega"] = _omega(p, rho)
    return out


@lru_cache(maxsize=16)
def _rates(p, time_unit):
    # gain and loss do not depend on the coupling or the drive
    base = p.replace(g_ab=0.0, eps=0.0)
    return extract_rates(base, "A", time_unit=time_unit), extract_rates(base, "B", time_unit=time_unit)


def ev_cqed_run(p, opt):
    u = opt["time_unit"]
    fa, fb = _rates(p, u)
    sp = spin_model_params(p, fa, fb, u)
    rho_s = _steady(sp)
    obs = opt["observables"]
    cyc = cqed_cycle(p, u, opt["order"], opt["hb_tol"])
    out = {}
    if "coherence" in obs:
        ra, rb = cyc.drive_frame_state((0,)), cyc.drive_frame_state((2,))
        out.update(
            {
                "coh_A_cqed": abs(ra.data[1, 0]),
                "coh_B_cqed": abs(rb.data[1, 0]),
                "coh_A_spin": phase_locking(rho_s, "A").magnitude,
                "coh_B_spin": phase_locking(rho_s, "B").magnitude,
            }
        )
    if "sync" in obs:
        rab = cyc.drive_frame_state((0, 2))
        rab_u = cqed_cycle(p.replace(eps=0.0), u, opt["order"], opt["hb_tol"]).drive_frame_state((0, 2))
        out["omega_cqed"] = sync_measure(rab, rab_u).omega
        out["omega_spin"] = _omega(sp, rho_s)
    return out


def ev_cqed_calibrate(p, opt):
    u = opt["time_unit"]
    corr = frequency_corrections(p)
    fits = _rates(p, u)
    khz = 1e-3 / TWO_PI
    out = {}
    for j, fit in zip("AB", fits):
        c = corr[j]
        out[f"delta_{j}_dispersive"] = c["dispersive"] * khz
        out[f"delta_{j}_pump"] = c["pump"] * khz
        out[f"delta_{j}_total"] = c["total"] * khz
        out[f"delta_{j}_table"] = c["configured"] * khz
        out[f"delta_{j}_rel_diff"] = c["relative_difference"]
        out[f"w_{j}"] = fit.w_eff * khz
        out[f"gamma_{j}"] = fit.gamma_eff * khz
        out[f"ratio_{j}"] = fit.ratio
        out[f"fit_rms_{j}"] = fit.rms_residual
    return out


EVALUATORS = {
    "steady": ev_steady,
    "phase-lock-sweep": ev_phase_lock,
    "zero-crossing": ev_zero_crossing,
    "existence-map": ev_zero_crossing,
    "detuning-map": ev_detuning,
    "sync-sweep": ev_sync,
    "rmax-map": ev_rmax,
    "qutrit-sweep": ev_qutrit,
    "cqed-run": ev_cqed_run,
    "cqed-calibrate": ev_cqed_calibrate,
}


def evaluate(experiment: str, params, options: dict) -> dict:
    return EVALUATORS[experiment](params, options)
