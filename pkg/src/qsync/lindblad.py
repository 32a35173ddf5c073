"""Lindblad dynamics: superoperators, steady states, time evolution.

Vectorization is column stacking throughout, ``vec(rho) = rho.reshape(-1, order="F")``,
so that ``vec(A rho B) = (B^T kron A) vec(rho)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .errors import (
    DegenerateSteadyStateError,
    DimensionError,
    InvalidStateError,
    StiffnessError,
    TimeDependenceError,
)

__all__ = [
    "DensityMatrix",
    "LindbladModel",
    "vec",
    "unvec",
    "liouvillian",
    "steady_state",
    "evolve",
    "propagate",
    "partial_trace",
    "expectation",
    "trace_distance",
]

HERM_TOL = 1e-10
TRACE_TOL = 1e-10
POS_TOL = 1e-8

# above this Hilbert dimension the superoperator is handled as a sparse matrix
DENSE_MAX_DIM = 32


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if d is None:
        d = int(round(np.sqrt(v.size)))
    return v.reshape(d, d, order="F")


@dataclass(frozen=True)
class DensityMatrix:
    """Validated density matrix together with its tensor layout."""

    data: np.ndarray
    dims: tuple = ()

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise DimensionError(f"density matrix must be square, got shape {data.shape}")
        dims = tuple(int(x) for x in self.dims) if self.dims else (data.shape[0],)
        if int(np.prod(dims)) != data.shape[0]:
            raise DimensionError(f"layout {dims} does not match dimension {data.shape[0]}")
        herm = np.max(np.abs(data - data.conj().T)) if data.size else 0.0
        if herm > HERM_TOL:
            raise InvalidStateError(f"state is not Hermitian (deviation {herm:.3e})")
        tr = np.trace(data).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"state trace is {tr!r}, expected 1")
        lam_min = np.linalg.eigvalsh((data + data.conj().T) / 2).min()
        if lam_min < -POS_TOL:
            raise InvalidStateError(f"state has negative eigenvalue {lam_min:.3e}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @classmethod
    def from_pure(cls, psi, dims: Sequence[int] = ()) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), tuple(dims))


def _as_matrix(rho) -> np.ndarray:
    return rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def _dims_of(rho, fallback: int) -> tuple:
    return rho.dims if isinstance(rho, DensityMatrix) else (fallback,)


@dataclass
class LindbladModel:
    """H(t) = h_static + sum_k f_k(t) H_k together with jump operators.

    Jump operators carry their rates, i.e. each entry is sqrt(rate) * O.
    ``metadata`` records units and convention choices of whoever built the model.
    """

    h_static: np.ndarray
    jumps: list = field(default_factory=list)
    h_dynamic: list = field(default_factory=list)
    dims: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.h_static = np.asarray(self.h_static, dtype=complex)
        d = self.h_static.shape[0]
        if self.h_static.shape != (d, d):
            raise DimensionError("Hamiltonian must be square")
        self.dims = tuple(int(x) for x in self.dims) if self.dims else (d,)
        if int(np.prod(self.dims)) != d:
            raise DimensionError(f"layout {self.dims} does not match dimension {d}")
        herm = np.max(np.abs(self.h_static - self.h_static.conj().T))
        if herm > 1e-12 * max(1.0, np.max(np.abs(self.h_static))):
            raise ValueError(f"static Hamiltonian is not Hermitian (deviation {herm:.3e})")
        self.jumps = [np.asarray(o, dtype=complex) for o in self.jumps]
        for o in self.jumps:
            if o.shape != (d, d):
                raise DimensionError(f"jump operator of shape {o.shape} in a dimension-{d} model")
        self.h_dynamic = [(np.asarray(h, dtype=complex), f) for h, f in self.h_dynamic]
        for h, _ in self.h_dynamic:
            if h.shape != (d, d):
                raise DimensionError(f"dynamic term of shape {h.shape} in a dimension-{d} model")
        if self.h_dynamic:
            # conjugate partners must make H(t) Hermitian
            for t in (0.0, 0.3711):
                ht = self.hamiltonian(t)
                if np.max(np.abs(ht - ht.conj().T)) > 1e-9 * max(1.0, np.max(np.abs(ht))):
                    raise ValueError("time-dependent terms do not form a Hermitian H(t)")

    @property
    def dim(self) -> int:
        return self.h_static.shape[0]

    @property
    def time_dependent(self) -> bool:
        return bool(self.h_dynamic)

    def hamiltonian(self, t: float | None = None) -> np.ndarray:
        if not self.h_dynamic:
            return self.h_static
        if t is None:
            raise TimeDependenceError("model is time-dependent; a time t is required")
        return self.h_static + sum(f(t) * h for h, f in self.h_dynamic)


def _spre(a, ident):
    return sp.kron(ident, sp.csr_matrix(a), format="csr")


def _spost(a, ident):
    return sp.kron(sp.csr_matrix(a).T, ident, format="csr")


def _commutator_super(h: np.ndarray, ident) -> sp.csr_matrix:
    return (-1j * (_spre(h, ident) - _spost(h, ident))).tocsr()


def _dissipator_super(jumps, ident) -> sp.csr_matrix:
    d = ident.shape[0]
    out = sp.csr_matrix((d * d, d * d), dtype=complex)
    for o in jumps:
        odo = o.conj().T @ o
        out = out + sp.kron(sp.csr_matrix(o.conj()), sp.csr_matrix(o)) - 0.5 * _spre(odo, ident) - 0.5 * _spost(odo, ident)
    return out.tocsr()


def liouvillian(model: LindbladModel, t: float | None = None, sparse: bool = False):
    """Superoperator of the master equation at time t (column-stacking convention).

    Returns a dense array by default, or a CSR matrix when ``sparse`` is set.
    """
    if model.time_dependent and t is None:
        raise TimeDependenceError("model is time-dependent; liouvillian needs a time t")
    ident = sp.identity(model.dim, dtype=complex, format="csr")
    L = _commutator_super(model.hamiltonian(t), ident) + _dissipator_super(model.jumps, ident)
    L = L.tocsr()
    return L if sparse else L.toarray()


def _steady_dense(L: np.ndarray, d: int) -> np.ndarray:
    sv = sla.svdvals(L)
    null_dim = int(np.sum(sv < 1e-10 * sv[0]))
    if null_dim > 1:
        raise DegenerateSteadyStateError(null_dim)
    A = L.copy()
    A[0, :] = vec(np.eye(d))
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    try:
        x = sla.solve(A, rhs)
    except sla.LinAlgError:
        # fall back to the null vector itself
        _, _, vh = sla.svd(L)
        x = vh[-1].conj()
        x = x / np.trace(unvec(x, d))
    return x


def _steady_sparse(L: sp.csr_matrix, d: int) -> np.ndarray:
    A = L.tolil()
    A[0, :] = vec(np.eye(d))
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    try:
        lu = spla.splu(A.tocsc())
    except RuntimeError as exc:  # exactly singular factor
        raise DegenerateSteadyStateError(2) from exc
    return lu.solve(rhs)


def steady_state(model: LindbladModel) -> DensityMatrix:
    """Unique stationary state of a time-independent model.

    Row 0 of L (the equation for rho_00) is replaced by the trace constraint.
    For small systems the nullspace dimension is checked by SVD first.
    """
    if model.time_dependent:
        raise TimeDependenceError("steady_state needs a time-independent model; use evolve for driven frames")
    d = model.dim
    if d <= DENSE_MAX_DIM:
        L = liouvillian(model)
        x = _steady_dense(L, d)
        norm_l = np.linalg.norm(L)
        resid = np.linalg.norm(L @ x)
    else:
        L = liouvillian(model, sparse=True)
        x = _steady_sparse(L, d)
        norm_l = spla.norm(L)
        resid = np.linalg.norm(L @ x)
    rho = unvec(x, d)
    rho = rho / np.trace(rho)
    if resid > 1e-10 * norm_l * max(1.0, np.linalg.norm(x)):
        raise DegenerateSteadyStateError(2)
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho, model.dims)


def _superop_parts(model: LindbladModel):
    ident = sp.identity(model.dim, dtype=complex, format="csr")
    L0 = (_commutator_super(model.h_static, ident) + _dissipator_super(model.jumps, ident)).tocsr()
    dyn = [(_commutator_super(h, ident), f) for h, f in model.h_dynamic]
    return L0, dyn


def evolve(
    model: LindbladModel,
    rho0,
    t_grid: Iterable[float],
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-12,
    max_step: float = np.inf,
) -> list[DensityMatrix]:
    """Integrate the master equation from ``t_grid[0]`` and sample at ``t_grid``.

    Uses scipy's DOP853 (adaptive embedded Runge-Kutta, order 8(5,3)) on the
    vectorized state with a sparse superoperator right-hand side.
    """
    t_grid = np.asarray(list(t_grid), dtype=float)
    if t_grid.size == 0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be nonempty and strictly ascending")
    r0 = _as_matrix(rho0)
    d = model.dim
    if r0.shape != (d, d):
        raise DimensionError(f"initial state of shape {r0.shape} for a dimension-{d} model")
    dims = _dims_of(rho0, d) if isinstance(rho0, DensityMatrix) else model.dims
    L0, dyn = _superop_parts(model)

    if dyn:
        def rhs(t, y):
            out = L0 @ y
            for s, f in dyn:
                out += f(t) * (s @ y)
            return out
    else:
        def rhs(t, y):
            return L0 @ y

    y0 = vec(r0).astype(complex)
    if t_grid.size == 1:
        states = [y0]
    else:
        sol = solve_ivp(
            rhs,
            (t_grid[0], t_grid[-1]),
            y0,
            method="DOP853",
            t_eval=t_grid,
            rtol=rel_tol,
            atol=abs_tol,
            max_step=max_step,
        )
        if sol.status != 0:
            raise StiffnessError(
                f"integration stopped at t={sol.t[-1] if sol.t.size else t_grid[0]!r}: {sol.message}"
            )
        states = list(sol.y.T)

    tr0 = np.trace(r0).real
    out = []
    for y in states:
        rho = unvec(y, d)
        drift = abs(np.trace(rho).real - tr0)
        if drift > 1e-8:
            raise StiffnessError(f"trace drift {drift:.3e} exceeds 1e-8; tighten tolerances")
        rho = (rho + rho.conj().T) / 2
        rho = rho / np.trace(rho).real
        out.append(DensityMatrix(rho, dims))
    return out


def propagate(model: LindbladModel, rho0, t_grid: Iterable[float]) -> list[DensityMatrix]:
    """Exact propagation of a time-independent model on a uniform time grid.

    Applies expm(L dt) repeatedly; meant for small models where the dense
    propagator is cheap.
    """
    if model.time_dependent:
        raise TimeDependenceError("propagate needs a time-independent model")
    t_grid = np.asarray(list(t_grid), dtype=float)
    steps = np.diff(t_grid)
    if t_grid.size > 1 and (np.any(steps <= 0) or np.ptp(steps) > 1e-9 * steps.mean()):
        raise ValueError("propagate needs a uniform ascending time grid")
    d = model.dim
    dims = _dims_of(rho0, d) if isinstance(rho0, DensityMatrix) else model.dims
    y = vec(_as_matrix(rho0)).astype(complex)
    out = [y]
    if t_grid.size > 1:
        P = sla.expm(liouvillian(model) * steps[0])
        for _ in steps:
            y = P @ y
            out.append(y)
    states = []
    for y in out:
        rho = unvec(y, d)
        rho = (rho + rho.conj().T) / 2
        states.append(DensityMatrix(rho / np.trace(rho).real, dims))
    return states


def partial_trace(rho, keep: Iterable[int], dims: Sequence[int] | None = None) -> DensityMatrix:
    """Trace out every factor not listed in ``keep``; kept factors stay in order."""
    mat = _as_matrix(rho)
    dims = tuple(dims) if dims is not None else _dims_of(rho, mat.shape[0])
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one factor")
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep={keep} outside layout {dims}")
    n = len(dims)
    t = mat.reshape(dims + dims)
    # contract traced factors pairwise, highest index first so axes stay valid
    for k in sorted(set(range(n)) - set(keep), reverse=True):
        nk = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + nk)
    kd = tuple(dims[k] for k in keep)
    red = t.reshape(int(np.prod(kd)), int(np.prod(kd)))
    red = (red + red.conj().T) / 2
    return DensityMatrix(red, kd)


def expectation(rho, op: np.ndarray) -> complex:
    mat = _as_matrix(rho)
    op = np.asarray(op)
    if op.shape != mat.shape:
        raise DimensionError(f"operator shape {op.shape} does not match state shape {mat.shape}")
    # Tr(op rho) without forming the product
    return complex(np.sum(op * mat.T))


def trace_distance(rho, sigma) -> float:
    diff = _as_matrix(rho) - _as_matrix(sigma)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2))))
