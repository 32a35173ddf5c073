"""Weak-drive expansion of the two-qubit oscillator and the searches built on it.

Observables are expanded as <O> = <O>_0 + eps <O>_1. The zeroth order keeps only
U(1)-invariant moments; the first order is sourced by them.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy.optimize import brentq, minimize_scalar, root

from .errors import SingularSystemError
from .metrics import omega_of
from .models import OscillatorParams

log = logging.getLogger(__name__)

__all__ = [
    "ZerothOrderState",
    "FirstOrderState",
    "zeroth_order_system",
    "first_order_system",
    "solve_zeroth",
    "solve_first",
    "first_order_coherence",
    "zero_crossing",
    "zero_crossings",
    "ExistenceMap",
    "existence_map",
    "restore_detuning",
    "RmaxResult",
    "r_max",
]

DEFAULT_G_RANGE = (0.0, 10.0)
DEFAULT_DQ_RANGE = (-5.0, 5.0)


@dataclass(frozen=True)
class ZerothOrderState:
    sz_a: float
    sz_b: float
    szsz: float
    splus_a_sminus_b: complex


@dataclass(frozen=True)
class FirstOrderState:
    splus_a: complex
    splus_b: complex
    splus_a_sz_b: complex
    sz_a_splus_b: complex
    splus_a_splus_b: complex

    def coherence(self, which: str) -> complex:
        return self.splus_a if which == "A" else self.splus_b


def _check_qubits(p: OscillatorParams):
    if abs(p.s - 0.5) > 1e-12:
        raise ValueError("the cumulant equations are derived for qubits (s = 1/2)")


def zeroth_order_system(p: OscillatorParams):
    """Real 5x5 system M x = b for x = (<Sz_A>, <Sz_B>, <Sz_A Sz_B>, Re c, Im c), c = <S+_A S-_B>."""
    GA, GB, g, dq = p.Gamma_a, p.Gamma_b, p.g, p.delta_q
    K = (GA + GB + 4 * p.gamma_phi) / 2
    ma, mb = (p.w_a - p.gamma_a) / 2, (p.w_b - p.gamma_b) / 2
    M = np.array(
        [
            # Re{i g <S-_A S+_B>} = g Im c
            [-GA, 0, 0, 0, g],
            # Re{i g <S+_A S-_B>} = -g Im c
            [0, -GB, 0, 0, -g],
            [mb, ma, -(GA + GB), 0, 0],
            # real and imaginary parts of the complex coherence equation
            [0, 0, 0, -K, dq],
            [-g / 2, g / 2, 0, -dq, -K],
        ],
        dtype=float,
    )
    b = np.array([-ma, -mb, 0.0, 0.0, 0.0])
    return M, b


def solve_zeroth(p: OscillatorParams) -> ZerothOrderState:
    _check_qubits(p)
    M, b = zeroth_order_system(p)
    try:
        x = np.linalg.solve(M, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"zeroth-order system singular for {p}") from exc
    return ZerothOrderState(x[0], x[1], x[2], complex(x[3], x[4]))


def first_order_system(p: OscillatorParams, z: ZerothOrderState | None = None):
    """Complex 5x5 system for (<S+_A>, <S+_B>, <S+_A Sz_B>, <Sz_A S+_B>, <S+_A S+_B>) at first order."""
    if z is None:
        z = solve_zeroth(p)
    GA, GB, g, gp = p.Gamma_a, p.Gamma_b, p.g, p.gamma_phi
    dd, dq = p.delta_d, p.delta_q
    ma, mb = (p.w_a - p.gamma_a) / 2, (p.w_b - p.gamma_b) / 2
    dA = -(GA + 2 * gp) / 2
    dB = -(GB + 2 * gp) / 2
    M = np.array(
        [
            [dA + 1j * dd, 0, 0, -1j * g, 0],
            [0, dB + 1j * (dd + dq), -1j * g, 0, 0],
            [mb, -1j * g / 4, dA - GB + 1j * dd, 0, 0],
            [-1j * g / 4, ma, 0, dB - GA + 1j * (dd + dq), 0],
            [0, 0, 0, 0, -(GA + GB + 4 * gp) / 2 + 1j * (2 * dd + dq)],
        ],
        dtype=complex,
    )
    b = np.array(
        [1j * z.sz_a, 0, 1j * z.szsz, -0.5j * np.conj(z.splus_a_sminus_b), 0],
        dtype=complex,
    )
    return M, b


def solve_first(p: OscillatorParams) -> FirstOrderState:
    _check_qubits(p)
    M, b = first_order_system(p)
    try:
        y = np.linalg.solve(M, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"first-order system singular for {p}") from exc
    return FirstOrderState(*[complex(v) for v in y])


def first_order_coherence(p: OscillatorParams, which: str = "A") -> complex:
    return solve_first(p).coherence(which)


def _bisect_component(fn, lo, hi):
    return brentq(fn, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def _sign_change_roots(vals, gs, fn):
    s = np.sign(vals)
    out = []
    for i in np.flatnonzero(s[:-1] * s[1:] < 0):
        out.append(_bisect_component(fn, gs[i], gs[i + 1]))
    return out


def zero_crossings(p: OscillatorParams, which: str = "A", g_range=DEFAULT_G_RANGE, n_scan: int = 400) -> list:
    """All couplings in g_range where both quadratures of <S+_j>_1 vanish."""
    lo, hi = g_range
    gs = np.linspace(lo, hi, n_scan)
    if gs[0] == 0.0:
        gs[0] = 1e-9 * (hi - lo)  # the undriven qubit vanishes trivially at g = 0
    f = lambda g: first_order_coherence(p.replace(g=g), which)  # noqa: E731
    vals = np.array([f(g) for g in gs])
    scale = np.max(np.abs(vals)) or 1.0
    comps = []
    for part in (np.real, np.imag):
        v = part(vals)
        if np.max(np.abs(v)) > 1e-12 * scale:
            comps.append((v, lambda g, part=part: float(part(f(g)))))
    if not comps:
        return []
    root_sets = [_sign_change_roots(v, gs, fn) for v, fn in comps]
    roots = []
    for r in root_sets[0]:
        if all(any(abs(r - r2) < 1e-6 for r2 in other) for other in root_sets[1:]):
            if abs(f(r)) < 1e-12:
                roots.append(r)
    if not roots:
        k = int(np.argmin(np.abs(vals)))
        log.debug("no simultaneous zero for qubit %s; closest |<S+>_1| = %.3e at g = %.4f", which, abs(vals[k]), gs[k])
    return roots


def zero_crossing(p: OscillatorParams, which: str = "A", g_range=DEFAULT_G_RANGE, n_scan: int = 400) -> float | None:
    """Smallest coupling g_0 at which <S+_j>_1 passes through zero, or None."""
    roots = zero_crossings(p, which, g_range, n_scan)
    return roots[0] if roots else None


@dataclass
class ExistenceMap:
    w_a: np.ndarray
    w_b: np.ndarray
    g0_a: np.ndarray  # NaN where absent
    g0_b: np.ndarray
    threshold: float

    @property
    def above_a(self) -> np.ndarray:
        return np.nan_to_num(self.g0_a, nan=-1.0) > self.threshold

    @property
    def above_b(self) -> np.ndarray:
        return np.nan_to_num(self.g0_b, nan=-1.0) > self.threshold


def _cell(args, g_range, gamma_phi, n_scan):
    wa, wb = args
    p = OscillatorParams.with_unit_relaxation(wa, wb, gamma_phi=gamma_phi)
    out = []
    for which in "AB":
        r = zero_crossing(p, which, g_range, n_scan)
        out.append(np.nan if r is None else r)
    return out


def existence_map(
    w_a_values,
    w_b_values,
    g_range=DEFAULT_G_RANGE,
    gamma_phi: float = 0.0,
    threshold: float = 4.0,
    n_scan: int = 400,
    workers: int = 1,
) -> ExistenceMap:
    """Zero-crossing couplings over a (w_A, w_B) grid with unit relaxation rates.

    Arrays are indexed [i, j] for w_a_values[i], w_b_values[j].
    """
    wa = np.asarray(w_a_values, float)
    wb = np.asarray(w_b_values, float)
    cells = [(x, y) for x in wa for y in wb]
    fn = partial(_cell, g_range=g_range, gamma_phi=gamma_phi, n_scan=n_scan)
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            res = list(ex.map(fn, cells, chunksize=8))
    else:
        res = [fn(c) for c in cells]
    arr = np.array(res).reshape(len(wa), len(wb), 2)
    return ExistenceMap(wa, wb, arr[..., 0], arr[..., 1], threshold)


def restore_detuning(
    p: OscillatorParams,
    dq_range=DEFAULT_DQ_RANGE,
    g_range=DEFAULT_G_RANGE,
    n_dq: int = 41,
    n_g: int = 101,
) -> tuple | None:
    """(Delta_q*, g_0) where <S+_A>_1 vanishes for the fixed drive detuning of p."""

    def f(x):
        c = first_order_coherence(p.replace(delta_q=x[0], g=x[1]), "A")
        return np.array([c.real, c.imag])

    dqs = np.linspace(*dq_range, n_dq)
    gs = np.linspace(*g_range, n_g)[1:]
    mags = np.array([[np.hypot(*f((dq, g))) for g in gs] for dq in dqs])
    # seeds: interior local minima of the coarse map, deepest first
    inner = mags[1:-1, 1:-1]
    is_min = np.ones_like(inner, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                is_min &= inner <= mags[1 + di : mags.shape[0] - 1 + di, 1 + dj : mags.shape[1] - 1 + dj]
    cand = [(inner[i, j], i + 1, j + 1) for i, j in zip(*np.nonzero(is_min))]
    best = None
    for _, i, j in sorted(cand)[:12]:
        sol = root(f, [dqs[i], gs[j]], method="lm", options={"xtol": 1e-15, "ftol": 1e-15})
        dq, g = sol.x
        if not (dq_range[0] <= dq <= dq_range[1] and g_range[0] < g <= g_range[1]):
            continue
        res = np.hypot(*f(sol.x))
        if res < 1e-12 and (best is None or g < best[1] - 1e-9):
            best = (float(dq), float(g))
    return best


@dataclass(frozen=True)
class RmaxResult:
    g_star: float
    r_max: float
    omega_max: float
    omega_0: float


def r_max(p: OscillatorParams, g_range=(0.0, 5.0), n_scan: int = 200) -> RmaxResult:
    """Maximise R(g) = Omega(g) / Omega(0) over the coupling.

    Uses the drive strength of p (1e-3 if p.eps is zero). Returns ``inf`` for
    r_max when Omega(0) is below 1e-14.
    """
    if p.eps == 0:
        p = p.replace(eps=1e-3)
    om = lambda g: omega_of(p.replace(g=g))  # noqa: E731
    omega_0 = om(0.0)
    gs = np.linspace(*g_range, n_scan)
    vals = np.array([om(g) for g in gs])
    k = int(np.argmax(vals))
    g_star, om_max = gs[k], vals[k]
    if 0 < k < n_scan - 1:
        res = minimize_scalar(lambda g: -om(g), bracket=(gs[k - 1], gs[k], gs[k + 1]), method="golden", tol=1e-8)
        if -res.fun > om_max:
            g_star, om_max = float(res.x), float(-res.fun)
    ratio = math.inf if omega_0 < 1e-14 else om_max / omega_0
    return RmaxResult(float(g_star), ratio, float(om_max), float(omega_0))
