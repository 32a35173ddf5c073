"""Device calibration for the circuit-QED oscillator.

Frequency corrections, effective gain/loss extraction, and steady observables
of the periodically modulated rotating-frame model.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import curve_fit

from .errors import ConvergenceError, FitError, TrackingError
from .lindblad import (
    DensityMatrix,
    LindbladModel,
    _commutator_super,
    _superop_parts,
    expectation,
    partial_trace,
    propagate,
    unvec,
    vec,
)
from .models import TWO_PI, CqedParams, OscillatorParams, Phase, build_cqed, transmon_qubit_state
from .operators import boson_ladder, embed

__all__ = [
    "dispersive_shift",
    "gamma_f",
    "pump_shift",
    "frequency_corrections",
    "build_single_transmon",
    "RateFit",
    "extract_rates",
    "time_averaged_observable",
    "HarmonicState",
    "harmonic_balance",
    "CqedCycle",
    "cqed_cycle",
    "cqed_qubit_states",
    "spin_model_params",
]


def dispersive_shift(g: float, omega_q: float, omega_a: float) -> float:
    if omega_q == omega_a:
        raise ZeroDivisionError("dispersive shift needs a nonzero qubit-resonator detuning")
    return g * g / (omega_q - omega_a)


def gamma_f(g: float, kappa: float) -> float:
    """Resonator-mediated decay of the transmon |f> level, 4 g^2 / kappa."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return 4 * g * g / kappa


def _pump_matrix(omega_p, alpha, gf):
    r2 = math.sqrt(2)
    return np.array(
        [[0, omega_p, 0], [omega_p, alpha / 2, r2 * omega_p], [0, r2 * omega_p, -1j * gf]],
        dtype=complex,
    )


def pump_shift(Omega_p: float, alpha: float, gamma_f: float, n_steps: int = 32) -> float:
    """Shift of the g-e splitting under a two-photon pump.

    ``alpha`` enters the pump-frame matrix as printed, i.e. the |e> level sits
    at alpha/2 (pass the anharmonicity magnitude). The g and e branches are
    followed from Omega_p = 0 by eigenvector overlap.
    """
    if Omega_p == 0:
        return 0.0
    prev = np.eye(3, dtype=complex)[:, :2]
    for om in np.linspace(0, Omega_p, n_steps + 1)[1:]:
        w, v = np.linalg.eig(_pump_matrix(om, alpha, gamma_f))
        v = v / np.linalg.norm(v, axis=0)
        ov = np.abs(prev.conj().T @ v)
        idx = [int(np.argmax(ov[k])) for k in range(2)]
        if idx[0] == idx[1] or min(ov[k, idx[k]] for k in range(2)) < 0.5:
            raise TrackingError(f"lost the g/e branches at Omega_p = {om!r}")
        prev = v[:, idx]
        eg, ee = w[idx[0]].real, w[idx[1]].real
    return (ee - eg) - alpha / 2


def frequency_corrections(p: CqedParams) -> dict:
    """Computed Delta_j = dispersive + pump shift next to the configured values (rad/s)."""
    out = {}
    for j in "AB":
        g = getattr(p, f"g_{j}")
        wq = getattr(p, f"omega_q{j}")
        disp = dispersive_shift(g, wq, getattr(p, f"omega_a{j}"))
        gf = gamma_f(g, getattr(p, f"kappa_{j}"))
        pump = pump_shift(getattr(p, f"Omega_p{j}"), abs(getattr(p, f"alpha_{j}")), gf)
        total = disp + pump
        table = getattr(p, f"delta_corr_{j}")
        rel = abs(total - table) / abs(table) if table else math.inf
        out[j] = {
            "dispersive": disp,
            "pump": pump,
            "total": total,
            "configured": table,
            "relative_difference": rel,
            "flag": bool(rel > 0.01),
        }
    return out


def build_single_transmon(p: CqedParams, which: str, time_unit: float = 1e-6) -> LindbladModel:
    """One transmon and its resonator in the pump frame (no coupling, no drive)."""
    nt, nr = p.n_transmon, p.n_resonator
    dims = (nt, nr)
    b = embed(boson_ladder(nt), 0, dims)
    a = embed(boson_ladder(nr), 1, dims)
    dag = lambda x: x.conj().T  # noqa: E731
    n = dag(b) @ b
    ident = np.eye(nt * nr)
    u = time_unit
    wf = p.pump(which)
    H = (
        (p.bare_qubit(which) - wf) * n
        + getattr(p, f"alpha_{which}") / 2 * (n - ident) @ n
        + (getattr(p, f"omega_a{which}") - wf) * dag(a) @ a
        + getattr(p, f"g_{which}") * (a @ dag(b) + dag(a) @ b)
        + getattr(p, f"Omega_p{which}") * (b + dag(b))
    ) * u
    jumps = []
    for rate, op in (
        (getattr(p, f"kappa_{which}"), a),
        (getattr(p, f"gamma0_{which}"), b),
        (getattr(p, f"gamma_phi_{which}"), n),
    ):
        if rate > 0:
            jumps.append(math.sqrt(rate * u) * op)
    return LindbladModel(H, jumps, dims=dims, metadata={"units": "rad_s", "time_unit_s": u, "transmon": which})


@dataclass(frozen=True)
class RateFit:
    w_eff: float
    gamma_eff: float
    p_ss: float
    rms_residual: float
    Gamma: float
    times: np.ndarray
    p_e: np.ndarray

    @property
    def ratio(self) -> float:
        return self.w_eff / self.gamma_eff


def _qubit_excited_fraction(rho: DensityMatrix) -> float:
    red = partial_trace(rho, [0]).data
    pg, pe = red[0, 0].real, red[1, 1].real
    return pe / (pg + pe)


def extract_rates(
    p: CqedParams,
    which: str,
    t_max: float | None = None,
    n_samples: int = 400,
    time_unit: float = 1e-6,
    max_rms: float = 0.02,
) -> RateFit:
    """Effective gain and loss of one decoupled transmon from its relaxation from |e>.

    Rates are returned in rad/s.
    """
    model = build_single_transmon(p, which, time_unit)
    if t_max is None:
        t_max = 10 / getattr(p, f"gamma0_{which}")
    ts = np.linspace(0, t_max / time_unit, n_samples)
    psi = np.zeros(model.dim)
    psi[1 * p.n_resonator] = 1.0  # |e> (x) |0>
    traj = propagate(model, DensityMatrix.from_pure(psi, model.dims), ts)
    pe = np.array([_qubit_excited_fraction(r) for r in traj])

    # log-linear start on |p_e(t) - p_e(t_max)|
    tail = pe[-1]
    dev = np.abs(pe - tail)
    ok = dev > 1e-3 * max(dev.max(), 1e-300)
    ok[-max(1, n_samples // 10):] = False
    if ok.sum() >= 3:
        slope = np.polyfit(ts[ok], np.log(dev[ok]), 1)[0]
        G0 = max(-slope, 1e-6 / ts[-1])
    else:
        G0 = 5.0 / ts[-1]

    def model_fn(t, pss, p0, G):
        return pss + (p0 - pss) * np.exp(-G * t)

    try:
        popt, _ = curve_fit(model_fn, ts, pe, p0=[tail, pe[0], G0], method="lm", maxfev=20000)
    except RuntimeError as exc:
        raise FitError(f"relaxation fit for transmon {which} did not converge") from exc
    pss, _, G = popt
    rms = float(np.sqrt(np.mean((model_fn(ts, *popt) - pe) ** 2)))
    if rms > max_rms:
        raise FitError(f"relaxation of transmon {which} is not single-exponential (rms {rms:.3g})", rms)
    G_s = G / time_unit
    w = max(G_s * pss, 0.0)
    gam = max(G_s * (1 - pss), 0.0)
    return RateFit(w, gam, float(pss), rms, G_s, ts * time_unit, pe)


def time_averaged_observable(
    states,
    times,
    op,
    window_fraction: float = 0.5,
    demod_frequency: float = 0.0,
    tol: float = 1e-4,
) -> complex:
    """Mean of <op>(t) e^{-i demod_frequency t} over the trailing window.

    The window before it must give the same mean within ``tol`` (relative),
    otherwise the trajectory is not yet stationary. For oscillating frames
    choose a uniform grid covering whole periods so that residual harmonics
    average out.
    """
    times = np.asarray(times, float)
    vals = np.array([expectation(r, op) for r in states]) * np.exp(-1j * demod_frequency * times)
    n = len(vals)
    m = max(1, int(round(window_fraction * n)))
    if 2 * m > n:
        raise ValueError("trajectory too short for two averaging windows")
    last = vals[n - m :].mean()
    prev = vals[n - 2 * m : n - m].mean()
    scale = max(abs(last), 1e-300)
    drift = abs(last - prev) / scale
    if drift > tol:
        raise ConvergenceError(f"trailing-window average drifts by {drift:.3e} (relative)", drift)
    return complex(last)


@dataclass
class HarmonicState:
    """Periodic (or quasi-periodic) steady cycle rho(t) = sum_n rho_n e^{i (n . nu) t}."""

    components: dict
    base_freqs: np.ndarray
    dims: tuple
    sweeps: int

    def at(self, t: float) -> DensityMatrix:
        d = int(np.prod(self.dims))
        acc = sum(c * np.exp(1j * float(np.dot(n, self.base_freqs)) * t) for n, c in self.components.items())
        rho = unvec(acc, d)
        return DensityMatrix((rho + rho.conj().T) / 2, self.dims)

    def component(self, n) -> np.ndarray:
        d = int(np.prod(self.dims))
        c = self.components.get(tuple(n))
        return np.zeros((d, d), complex) if c is None else unvec(c, d)


def _integer_vector(freq, base, max_order=3):
    best = None
    for m in itertools.product(range(-max_order, max_order + 1), repeat=len(base)):
        err = abs(freq - np.dot(m, base))
        if best is None or err < best[0]:
            best = (err, m)
    if best[0] > 1e-9 * max(1.0, np.max(np.abs(base))):
        raise ValueError(f"frequency {freq!r} is not an integer combination of {base}")
    return tuple(int(x) for x in best[1])


def harmonic_balance(
    model: LindbladModel,
    base_freqs,
    order: int = 2,
    tol: float = 1e-12,
    max_sweeps: int = 200,
) -> HarmonicState:
    """Asymptotic cycle of a model whose time dependence is a sum of ``Phase`` terms.

    Harmonics n with sum |n_i| <= order are kept. The coupled block equations
    (L0 - i n.nu) rho_n + sum_k L_k rho_{n - m_k} = 0 are solved together by
    GMRES, preconditioned with a sparse LU of each diagonal block. Resonant
    couplings between harmonics make a plain block iteration diverge, which is
    why the blocks are not simply swept.
    """
    base = np.atleast_1d(np.asarray(base_freqs, float))
    L0, dyn = _superop_parts(model)
    terms = {}
    for s, f in dyn:
        if not isinstance(f, Phase):
            raise TypeError("harmonic_balance needs Phase time factors")
        m = _integer_vector(f.freq, base)
        terms[m] = terms.get(m, 0) + s
    d2 = L0.shape[0]
    d = model.dim
    idx = [n for n in itertools.product(range(-order, order + 1), repeat=len(base)) if sum(map(abs, n)) <= order]
    idx.sort(key=lambda n: (sum(map(abs, n)), n))
    pos = {n: k for k, n in enumerate(idx)}
    zero = tuple([0] * len(base))
    eye = sp.identity(d2, dtype=complex, format="csc")
    trace_row = vec(np.eye(d))
    diag = {}
    lus = {}
    for n in idx:
        A = (L0 - 1j * float(np.dot(n, base)) * eye).tolil()
        if n == zero:
            A[0, :] = trace_row
        diag[n] = A.tocsr()
        lus[n] = spla.splu(A.tocsc())
    links = []  # (row block, column block, superoperator)
    for n in idx:
        for m, s in terms.items():
            src = tuple(a - b for a, b in zip(n, m))
            if src in pos:
                s = s.tolil(copy=True) if n == zero else s
                if n == zero:
                    s[0, :] = 0  # the trace row carries no coupling
                links.append((pos[n], pos[src], sp.csr_matrix(s)))
    nb = len(idx)

    def matvec(x):
        x = x.reshape(nb, d2)
        y = np.empty_like(x)
        for n, k in pos.items():
            y[k] = diag[n] @ x[k]
        for r, c, s in links:
            y[r] += s @ x[c]
        return y.ravel()

    def precond(x):
        x = x.reshape(nb, d2)
        return np.concatenate([lus[n].solve(x[k]) for n, k in pos.items()])

    N = nb * d2
    op = spla.LinearOperator((N, N), matvec=matvec, dtype=complex)
    pre = spla.LinearOperator((N, N), matvec=precond, dtype=complex)
    rhs = np.zeros(N, complex)
    rhs[pos[zero] * d2] = 1.0
    counter = [0]

    def cb(_):
        counter[0] += 1

    x0 = precond(rhs)
    x, info = spla.gmres(op, rhs, x0=x0, M=pre, rtol=tol, atol=0.0, restart=60, maxiter=max_sweeps, callback=cb,
                         callback_type="pr_norm")
    resid = float(np.linalg.norm(matvec(x) - rhs))
    if info != 0 or resid > 1e3 * tol:
        raise ConvergenceError("harmonic balance did not converge", resid)
    rho = {n: x[k * d2 : (k + 1) * d2] for n, k in pos.items()}
    sweep = counter[0]
    return HarmonicState(rho, base, model.dims, sweep)


@dataclass
class CqedCycle:
    """Asymptotic cycle of the device model plus the bookkeeping to read it in the drive frame."""

    state: HarmonicState
    model: LindbladModel
    frames: tuple
    common_frame: bool

    def harmonic(self, c_a: int, c_b: int) -> tuple:
        """Harmonic index of a term rotating as e^{i[c_a (w_d - w_fA) + c_b (w_d - w_fB)] t}."""
        if self.common_frame:
            return (c_a + c_b,)
        # base frequencies (w_fA - w_fB, w_d - w_fA); w_d - w_fB is their sum
        return (c_b, c_a + c_b)

    def drive_frame_state(self, sites=(0, 2)) -> DensityMatrix:
        """Cycle average of the g/e state of the given transmons in the drive frame.

        Resonators and the other transmon are traced out, the result is
        restricted to the g/e levels, renormalised, and ordered like spins
        (|e> first).
        """
        dims = self.model.dims
        sites = tuple(sites)
        kd = [dims[s] for s in sites]
        cache = {}
        levels = list(itertools.product(*[[1, 0]] * len(sites)))  # e first
        flat = [int(np.ravel_multi_index(lv, kd)) for lv in levels]
        n = len(levels)
        out = np.zeros((n, n), complex)
        for a, la in enumerate(levels):
            for b, lb in enumerate(levels):
                delta = [lb[k] - la[k] for k in range(len(sites))]
                c = {0: 0, 2: 0}
                for k, s in enumerate(sites):
                    c[s] = delta[k]
                h = self.harmonic(c[0], c[2])
                if h not in cache:
                    cache[h] = _partial_trace_raw(self.state.component(h), dims, sites)
                out[a, b] = cache[h][flat[a], flat[b]]
        out = (out + out.conj().T) / 2
        return DensityMatrix(out / np.trace(out).real)


def cqed_cycle(p: CqedParams, time_unit: float = 1e-6, order: int = 2, tol: float = 1e-12) -> CqedCycle:
    """Solve for the periodic steady cycle of the device model.

    With pump A off, both transmons are put in the frame of pump B so a
    single modulation frequency (drive minus frame) remains. Otherwise each
    transmon sits in its own pump frame and two base frequencies appear.
    """
    u = time_unit
    wd = p.drive_frequency
    if p.Omega_pA == 0:
        wf = p.pump("B")
        frames = (wf, wf)
        base = [(wd - wf) * u]
        common = True
    else:
        frames = (p.pump("A"), p.pump("B"))
        base = [(frames[0] - frames[1]) * u, (wd - frames[0]) * u]
        common = False
    model = build_cqed(p, time_unit, frames=frames)
    hs = harmonic_balance(model, base, order=order, tol=tol)
    return CqedCycle(hs, model, frames, common)


def cqed_qubit_states(p: CqedParams, time_unit: float = 1e-6, order: int = 2):
    """(rho_A, rho_B, rho_AB, cycle): drive-frame g/e states on the steady cycle."""
    cyc = cqed_cycle(p, time_unit, order)
    return cyc.drive_frame_state((0,)), cyc.drive_frame_state((2,)), cyc.drive_frame_state((0, 2)), cyc


def _partial_trace_raw(mat, dims, keep):
    n = len(dims)
    t = mat.reshape(tuple(dims) + tuple(dims))
    for k in sorted(set(range(n)) - set(keep), reverse=True):
        nk = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + nk)
    kd = int(np.prod([dims[k] for k in keep]))
    return t.reshape(kd, kd)


def spin_model_params(p: CqedParams, fit_a: RateFit, fit_b: RateFit, time_unit: float = 1e-6) -> OscillatorParams:
    """Two-qubit model equivalent to the device (rates in units of 1/time_unit).

    Couplings double (g = 2 g_ab, eps = 2 eps) and transmon dephasing
    sqrt(gamma_phi) b^dag b becomes gamma_phi / 2 in the spin convention.
    """
    u = time_unit
    return OscillatorParams(
        s=0.5,
        delta_d=0.0,
        delta_q=0.0,
        eps=2 * p.eps * u,
        g=2 * p.g_ab * u,
        w_a=fit_a.w_eff * u,
        w_b=fit_b.w_eff * u,
        gamma_a=fit_a.gamma_eff * u,
        gamma_b=fit_b.gamma_eff * u,
        gamma_phi=p.gamma_phi_A * u / 2,
    )
