"""Ready-made configurations, one per reproduced figure."""

from __future__ import annotations

import copy

# Enhancement set quoted for the composite-check and detuned-drive figures.
ENHANCE = {"w_a": 0.55, "w_b": 0.09, "unit_relaxation": True}
# Suppression set with a sharp dip of R (minimum about 0.2 near g = 0.6),
# located by scanning (w_A, w_B) on a 0.1 grid; the figure legend values
# themselves are not available.
SUPPRESS = {"w_a": 0.55, "w_b": 0.25, "unit_relaxation": True}


def _g_axis(stop=4.0, points=50, start=0.0):
    return [{"name": "g", "start": start, "stop": stop, "points": points}]


_PRESETS = {
    "vanishing-12": (
        "Phase locking |<S+>|/eps of both qubits versus g, perturbative and full numerics",
        {
            "experiment": "phase-lock-sweep",
            "units": "Gamma",
            "params": {"w_a": 0.4, "gamma_a": 0.6, "w_b": 0.75, "gamma_b": 0.25, "eps": 1e-3},
            "sweep": _g_axis(),
            "plot": {"kind": "line", "x": "g", "y": ["coh_A_over_eps", "coh_B_over_eps", "coh_A_over_eps_numeric", "coh_B_over_eps_numeric"]},
        },
    ),
    "parameter-sweep": (
        "Zero-crossing coupling g0 of each qubit over the (w_A, w_B) plane with unit relaxation",
        {
            "experiment": "existence-map",
            "units": "Gamma",
            "params": {"unit_relaxation": True},
            "sweep": [
                {"name": "w_a", "start": 0.025, "stop": 0.975, "points": 21},
                {"name": "w_b", "start": 0.025, "stop": 0.975, "points": 21},
            ],
            "options": {"threshold": 4.0},
            "plot": {"kind": "heatmap", "x": "w_a", "y": "w_b", "value": "g0_A"},
        },
    ),
    "parameter-sweep-delta": (
        "Qubit-B detuning that restores the qubit-A zero crossing, versus drive detuning",
        {
            "experiment": "detuning-map",
            "units": "Gamma",
            "params": {"w_a": 0.25, "gamma_a": 0.75, "w_b": 0.75, "gamma_b": 0.25},
            "sweep": [{"name": "delta_d", "start": -1.0, "stop": 1.0, "points": 9}],
            "plot": {"kind": "line", "x": "delta_d", "y": ["delta_q_star", "g0_A"]},
        },
    ),
    "composite": (
        "Ratio R and collective-basis coherences versus g for an enhancing and a suppressing bath set",
        {
            "experiment": "sync-sweep",
            "units": "Gamma",
            "params": {"eps": 1e-3},
            "cases": [
                {"label": "enhancement w_A=0.55 w_B=0.09", "params": ENHANCE},
                {"label": "suppression w_A=0.55 w_B=0.25", "params": SUPPRESS},
            ],
            "sweep": _g_axis(points=81),
            "plot": {"kind": "line", "x": "g", "y": ["R"]},
        },
    ),
    "composite-parameter-sweep": (
        "R_max over the (w_A, w_B) plane with unit relaxation",
        {
            "experiment": "rmax-map",
            "units": "Gamma",
            "params": {"eps": 1e-3, "unit_relaxation": True},
            "sweep": [
                {"name": "w_a", "start": 0.05, "stop": 0.95, "points": 10},
                {"name": "w_b", "start": 0.05, "stop": 0.95, "points": 10},
            ],
            "plot": {"kind": "heatmap", "x": "w_a", "y": "w_b", "value": "R_max"},
        },
    ),
    "detuning-composite": (
        "R_max over drive and qubit-qubit detunings at w_A=0.55, w_B=0.09",
        {
            "experiment": "rmax-map",
            "units": "Gamma",
            "params": {"eps": 1e-3, **ENHANCE},
            "sweep": [
                {"name": "delta_d", "start": -1.0, "stop": 1.0, "points": 9},
                {"name": "delta_q", "start": -1.0, "stop": 1.0, "points": 9},
            ],
            "plot": {"kind": "heatmap", "x": "delta_d", "y": "delta_q", "value": "R_max"},
        },
    ),
    "composite-check": (
        "Diagonal versus partially coherent synchronization measure at w_A=0.55, w_B=0.09",
        {
            "experiment": "sync-sweep",
            "units": "Gamma",
            "params": {"eps": 1e-3, **ENHANCE},
            "sweep": _g_axis(points=30),
            "options": {"partial": True},
            "plot": {"kind": "line", "x": "g", "y": ["omega", "omega_partial"]},
        },
    ),
    "vanishing-spin1": (
        "Spherical-tensor expectations of qutrit A versus g",
        {
            "experiment": "qutrit-sweep",
            "units": "Gamma",
            "params": {"s": 1.0, "w_a": 0.25, "w_b": 0.75, "unit_relaxation": True, "eps": 1e-3},
            "sweep": _g_axis(points=41),
            "plot": {"kind": "line", "x": "g", "y": ["T11_A_im", "T21_A_im", "T22_A_re"]},
        },
    ),
    "composite-spin1": (
        "Ratio R versus g for two qutrits, enhancing and suppressing bath sets",
        {
            "experiment": "sync-sweep",
            "units": "Gamma",
            "params": {"s": 1.0, "eps": 1e-3},
            "cases": [
                {"label": "enhancement w_A=0.55 w_B=0.09", "params": ENHANCE},
                {"label": "suppression w_A=0.55 w_B=0.25", "params": SUPPRESS},
            ],
            "sweep": _g_axis(points=41),
            "plot": {"kind": "line", "x": "g", "y": ["R"]},
        },
    ),
    "sc-phasecorrelation": (
        "Circuit-QED versus qubit-model phase locking of both transmons (slow: minutes per point)",
        {
            "experiment": "cqed-run",
            "units": "Hz_2pi",
            "cases": [
                {"label": "a", "params": {"column": "sc-phasecorrelation-a", "gamma_phi_A": 0.0, "gamma_phi_B": 0.0}},
                {"label": "a dephasing", "params": {"column": "sc-phasecorrelation-a"}},
                {"label": "b", "params": {"column": "sc-phasecorrelation-b", "gamma_phi_A": 0.0, "gamma_phi_B": 0.0}},
                {"label": "b dephasing", "params": {"column": "sc-phasecorrelation-b"}},
            ],
            "sweep": [{"name": "g_ab", "start": 0.0, "stop": 350e3, "points": 8}],
            "options": {"observables": ["coherence"]},
            "plot": {"kind": "line", "x": "g_ab", "y": ["coh_A_cqed", "coh_A_spin", "coh_B_cqed", "coh_B_spin"]},
        },
    ),
    "sc-enhancement": (
        "Circuit-QED versus qubit-model synchronization measure (slow: minutes per point)",
        {
            "experiment": "cqed-run",
            "units": "Hz_2pi",
            "cases": [
                {"label": "a", "params": {"column": "sc-enhancement-a", "gamma_phi_A": 0.0, "gamma_phi_B": 0.0}},
                {"label": "a dephasing", "params": {"column": "sc-enhancement-a"}},
                {"label": "b", "params": {"column": "sc-enhancement-b", "gamma_phi_A": 0.0, "gamma_phi_B": 0.0}},
                {"label": "b dephasing", "params": {"column": "sc-enhancement-b"}},
            ],
            "sweep": [{"name": "g_ab", "start": 0.0, "stop": 350e3, "points": 8}],
            "options": {"observables": ["sync"]},
            "plot": {"kind": "line", "x": "g_ab", "y": ["omega_cqed", "omega_spin"]},
        },
    ),
}


def list_presets() -> list:
    """(name, description) for every preset, in figure order."""
    return [(name, desc) for name, (desc, _) in _PRESETS.items()]


def get_preset(name: str) -> dict:
    try:
        desc, cfg = _PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; run 'qsync presets' for the list") from None
    cfg = copy.deepcopy(cfg)
    cfg.setdefault("output", name)
    cfg.setdefault("description", desc)
    return cfg
