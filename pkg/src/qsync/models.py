"""Model constructors: the two-qudit oscillator and the circuit-QED device."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import DimensionError
from .lindblad import DensityMatrix, LindbladModel, _as_matrix, partial_trace
from .operators import boson_ladder, embed, spin_dim, spin_lower, spin_raise, spin_z

__all__ = [
    "OscillatorParams",
    "build_two_qudit",
    "CollectiveBasis",
    "COLLECTIVE",
    "collective_coherences",
    "drive_in_collective_basis",
    "Phase",
    "CqedParams",
    "cqed_preset",
    "CQED_COLUMNS",
    "build_cqed",
    "transmon_qubit_state",
    "TWO_PI",
]

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class OscillatorParams:
    """Two-qudit oscillator parameters, frequencies in units of the relaxation rate."""

    s: float = 0.5
    delta_d: float = 0.0
    delta_q: float = 0.0
    eps: float = 0.0
    g: float = 0.0
    w_a: float = 0.5
    w_b: float = 0.5
    gamma_a: float = 0.5
    gamma_b: float = 0.5
    gamma_phi: float = 0.0

    def __post_init__(self):
        spin_dim(self.s)
        for name in ("w_a", "w_b", "gamma_a", "gamma_b", "gamma_phi"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.Gamma_a <= 0 or self.Gamma_b <= 0:
            raise ValueError("each qudit needs a positive total relaxation rate w + gamma")

    @property
    def Gamma_a(self) -> float:
        return self.w_a + self.gamma_a

    @property
    def Gamma_b(self) -> float:
        return self.w_b + self.gamma_b

    @classmethod
    def with_unit_relaxation(cls, w_a: float, w_b: float, **kw) -> "OscillatorParams":
        """Baths with w_j + gamma_j = 1, the convention of most scans."""
        return cls(w_a=w_a, w_b=w_b, gamma_a=1.0 - w_a, gamma_b=1.0 - w_b, **kw)

    def replace(self, **kw) -> "OscillatorParams":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return asdict(self)


def _two_qudit_ops(s):
    d = spin_dim(s)
    dims = (d, d)
    sp_, sm_, sz_ = spin_raise(s), spin_lower(s), spin_z(s)
    return dims, {
        "sp_a": embed(sp_, 0, dims),
        "sm_a": embed(sm_, 0, dims),
        "sz_a": embed(sz_, 0, dims),
        "sp_b": embed(sp_, 1, dims),
        "sm_b": embed(sm_, 1, dims),
        "sz_b": embed(sz_, 1, dims),
    }


def build_two_qudit(p: OscillatorParams) -> LindbladModel:
    dims, o = _two_qudit_ops(p.s)
    H = (
        p.delta_d * o["sz_a"]
        + (p.delta_d + p.delta_q) * o["sz_b"]
        + (p.eps / 2) * (o["sp_a"] + o["sm_a"])
        + (p.g / 2) * (o["sp_a"] @ o["sm_b"] + o["sm_a"] @ o["sp_b"])
    )
    jumps = []
    for rate, op in (
        (p.w_a, o["sp_a"]),
        (p.gamma_a, o["sm_a"]),
        (p.w_b, o["sp_b"]),
        (p.gamma_b, o["sm_b"]),
        (2 * p.gamma_phi, o["sz_a"]),
        (2 * p.gamma_phi, o["sz_b"]),
    ):
        if rate > 0:
            jumps.append(math.sqrt(rate) * op)
    return LindbladModel(H, jumps, dims=dims, metadata={"units": "Gamma", "params": p.to_dict()})


@dataclass(frozen=True)
class CollectiveBasis:
    """Singlet/triplet basis of two qubits, as columns in the product basis."""

    U: np.ndarray
    T: np.ndarray
    S: np.ndarray
    D: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        """Columns U, T, S, D."""
        return np.column_stack([self.U, self.T, self.S, self.D])


def _collective() -> CollectiveBasis:
    # product basis order: |up up>, |up down>, |down up>, |down down>
    e = np.eye(4, dtype=complex)
    r = 1 / math.sqrt(2)
    return CollectiveBasis(U=e[0], T=r * (e[1] + e[2]), S=r * (e[1] - e[2]), D=e[3])


COLLECTIVE = _collective()


def collective_coherences(rho) -> dict:
    mat = _as_matrix(rho)
    if mat.shape != (4, 4):
        raise DimensionError(f"collective coherences need a two-qubit state, got shape {mat.shape}")
    b = COLLECTIVE
    el = lambda x, y: complex(x.conj() @ mat @ y)  # noqa: E731
    return {
        "c_TU": el(b.T, b.U),
        "c_TD": el(b.T, b.D),
        "c_SU": el(b.S, b.U),
        "c_SD": el(b.S, b.D),
    }


def drive_in_collective_basis(which: str = "A") -> np.ndarray:
    """S_j^+ of a qubit pair expressed in the (U, T, S, D) basis."""
    dims = (2, 2)
    site = {"A": 0, "B": 1}[which]
    V = COLLECTIVE.matrix
    return V.conj().T @ embed(spin_raise(0.5), site, dims) @ V


class Phase:
    """Time factor exp(i * freq * t) with its frequency kept for inspection."""

    def __init__(self, freq: float):
        self.freq = float(freq)

    def __call__(self, t):
        return np.exp(1j * self.freq * t)

    def __repr__(self):
        return f"Phase({self.freq!r})"


@dataclass(frozen=True)
class CqedParams:
    """Circuit-QED device parameters. Angular frequencies and rates in rad/s.

    ``omega_q*`` and ``omega_p*`` are the nominal (dressed) qubit frequency
    and the nominal pump frequency. The transmon is simulated at the bare
    frequency ``omega_q - delta_corr`` and the pump is retuned by the same
    amount so that it stays two-photon resonant; the drive defaults to the
    nominal qubit-A frequency. Anharmonicities are signed (negative for a
    transmon).
    """

    omega_qA: float = TWO_PI * 5e9
    omega_qB: float = TWO_PI * 5e9
    omega_aA: float = TWO_PI * 4.6e9
    omega_aB: float = TWO_PI * 4.5e9
    omega_pA: float = TWO_PI * 4.8e9
    omega_pB: float = TWO_PI * 4.75e9
    alpha_A: float = -TWO_PI * 400e6
    alpha_B: float = -TWO_PI * 500e6
    g_ab: float = 0.0
    g_A: float = TWO_PI * 8e6
    g_B: float = TWO_PI * 4e6
    Omega_pA: float = 0.0
    Omega_pB: float = TWO_PI * 8e6
    eps: float = TWO_PI * 20e3
    kappa_A: float = TWO_PI * 60e6
    kappa_B: float = TWO_PI * 60e6
    gamma0_A: float = TWO_PI * 53e3
    gamma0_B: float = TWO_PI * 53e3
    gamma_phi_A: float = TWO_PI * 53e3
    gamma_phi_B: float = TWO_PI * 53e3
    delta_corr_A: float = TWO_PI * 160e3
    delta_corr_B: float = TWO_PI * 1013.72e3
    n_transmon: int = 3
    n_resonator: int = 3
    omega_d: float | None = None
    compensate: bool = True

    def __post_init__(self):
        if self.n_transmon < 2 or self.n_resonator < 2:
            raise DimensionError("truncations must keep at least 2 levels")
        for name in ("kappa_A", "kappa_B", "gamma0_A", "gamma0_B", "gamma_phi_A", "gamma_phi_B"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def replace(self, **kw) -> "CqedParams":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def drive_frequency(self) -> float:
        return self.omega_qA if self.omega_d is None else self.omega_d

    def bare_qubit(self, which: str) -> float:
        w = getattr(self, f"omega_q{which}")
        return w - getattr(self, f"delta_corr_{which}") if self.compensate else w

    def pump(self, which: str) -> float:
        w = getattr(self, f"omega_p{which}")
        return w - getattr(self, f"delta_corr_{which}") if self.compensate else w


# Device columns: (eps, Omega_pA, Omega_pB, Delta_A, Delta_B), all in Hz (divide by 2 pi)
CQED_COLUMNS = {
    "sc-phasecorrelation-a": (20e3, 0.0, 8.0e6, 160e3, 1013.72e3),
    "sc-phasecorrelation-b": (20e3, 5.5e6, 9.0e6, 763.3e3, 1230e3),
    "sc-enhancement-b": (40e3, 7.0e6, 4.1e6, 1135e3, 300e3),
}
CQED_COLUMNS["sc-enhancement-a"] = CQED_COLUMNS["sc-phasecorrelation-b"]


def cqed_preset(column: str, **overrides) -> CqedParams:
    try:
        eps, opa, opb, da, db = CQED_COLUMNS[column]
    except KeyError:
        raise KeyError(f"unknown column {column!r}; choose from {sorted(CQED_COLUMNS)}") from None
    p = CqedParams(
        eps=TWO_PI * eps,
        Omega_pA=TWO_PI * opa,
        Omega_pB=TWO_PI * opb,
        delta_corr_A=TWO_PI * da,
        delta_corr_B=TWO_PI * db,
    )
    return p.replace(**overrides) if overrides else p


def build_cqed(p: CqedParams, time_unit: float = 1e-6, frames: tuple | None = None) -> LindbladModel:
    """Transmon A, resonator A, transmon B, resonator B in rotating frames.

    Each transmon and its resonator rotate at ``frames[j]`` (rad/s); the
    default is the (retuned) pump frequency of that transmon. All rates are
    multiplied by ``time_unit`` so time is measured in that unit (default us).
    Any residual oscillation appears as ``Phase`` factors in ``h_dynamic``.
    """
    nt, nr = p.n_transmon, p.n_resonator
    dims = (nt, nr, nt, nr)
    b = {"A": embed(boson_ladder(nt), 0, dims), "B": embed(boson_ladder(nt), 2, dims)}
    a = {"A": embed(boson_ladder(nr), 1, dims), "B": embed(boson_ladder(nr), 3, dims)}
    ident = np.eye(int(np.prod(dims)), dtype=complex)
    dag = lambda x: x.conj().T  # noqa: E731
    if frames is None:
        frames = (p.pump("A"), p.pump("B"))
    frame = {"A": frames[0], "B": frames[1]}
    u = time_unit

    H = np.zeros_like(ident)
    dyn = []

    def add_osc(coef, op, freq):
        # coef * (op e^{i freq t} + h.c.), coef real
        op = coef * u * op
        if abs(freq * u) < 1e-15:
            return op + dag(op)
        dyn.append((op, Phase(freq * u)))
        dyn.append((dag(op), Phase(-freq * u)))
        return 0

    for j in "AB":
        n = dag(b[j]) @ b[j]
        alpha = getattr(p, f"alpha_{j}")
        H = H + (p.bare_qubit(j) - frame[j]) * u * n
        H = H + (alpha / 2) * u * (n - ident) @ n
        H = H + (getattr(p, f"omega_a{j}") - frame[j]) * u * dag(a[j]) @ a[j]
        H = H + getattr(p, f"g_{j}") * u * (a[j] @ dag(b[j]) + dag(a[j]) @ b[j])
        om = getattr(p, f"Omega_p{j}")
        if om:
            H = H + add_osc(om, dag(b[j]), frame[j] - p.pump(j))
    if p.g_ab:
        H = H + add_osc(p.g_ab, dag(b["A"]) @ b["B"], frame["A"] - frame["B"])
    if p.eps:
        H = H + add_osc(p.eps, b["A"], p.drive_frequency - frame["A"])

    jumps = []
    for j in "AB":
        for rate, op in (
            (getattr(p, f"kappa_{j}"), a[j]),
            (getattr(p, f"gamma0_{j}"), b[j]),
            (getattr(p, f"gamma_phi_{j}"), dag(b[j]) @ b[j]),
        ):
            if rate > 0:
                jumps.append(math.sqrt(rate * u) * op)
    meta = {
        "units": "rad_s",
        "time_unit_s": u,
        "frames_rad_s": [float(frame["A"]), float(frame["B"])],
        "drive_rad_s": float(p.drive_frequency),
        "drive_at": "nominal qubit-A frequency (bare + delta_corr_A)" if p.compensate else "omega_qA",
        "params": p.to_dict(),
    }
    return LindbladModel(H, jumps, h_dynamic=dyn, dims=dims, metadata=meta)


def transmon_qubit_state(rho, site: int, dims=None) -> DensityMatrix:
    """Reduced g/e state of one transmon, renormalised over that subspace.

    Returned in the spin ordering (|e> first), so spin operators apply directly.
    """
    red = partial_trace(rho, [site], dims).data
    sub = red[np.ix_([1, 0], [1, 0])]
    pop = np.trace(sub).real
    if pop <= 0:
        raise ValueError("transmon has no population in its g/e subspace")
    return DensityMatrix(sub / pop)
