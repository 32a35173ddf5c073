"""Finite-dimensional operator algebra.

Spin matrices use the descending-m basis (|s, s> first); bosonic modes use the
ascending number basis (|0> first). Tensor products follow ``numpy.kron``
ordering, so the leftmost factor of a layout is the slowest-varying index.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.special import lpmv

from .errors import DimensionError

__all__ = [
    "spin_dim",
    "spin_z",
    "spin_raise",
    "spin_lower",
    "spin_x",
    "spin_y",
    "boson_ladder",
    "embed",
    "clebsch_gordan",
    "spherical_tensor",
    "coherent_state",
    "assoc_legendre",
]


def _as_spin(s) -> Fraction:
    two_s = 2 * Fraction(s).limit_denominator(2)
    if two_s.denominator != 1 or two_s < 0 or abs(float(two_s) - 2 * float(s)) > 1e-12:
        raise ValueError(f"spin must be a non-negative half-integer, got {s!r}")
    return two_s / 2


def spin_dim(s) -> int:
    """Hilbert-space dimension 2s + 1."""
    return int(2 * _as_spin(s)) + 1


def _m_values(s) -> np.ndarray:
    s = float(_as_spin(s))
    return s - np.arange(spin_dim(s))


def spin_z(s) -> np.ndarray:
    return np.diag(_m_values(s)).astype(complex)


def spin_raise(s) -> np.ndarray:
    """S+ with <s, m+1|S+|s, m> = sqrt((s - m)(s + m + 1))."""
    sf = float(_as_spin(s))
    m = _m_values(s)
    d = len(m)
    out = np.zeros((d, d), dtype=complex)
    # column i holds |s, m_i>, row i-1 holds |s, m_i + 1>
    for i in range(1, d):
        out[i - 1, i] = math.sqrt((sf - m[i]) * (sf + m[i] + 1))
    return out


def spin_lower(s) -> np.ndarray:
    return spin_raise(s).conj().T


def spin_x(s) -> np.ndarray:
    sp = spin_raise(s)
    return (sp + sp.conj().T) / 2


def spin_y(s) -> np.ndarray:
    sp = spin_raise(s)
    return (sp - sp.conj().T) / 2j


def boson_ladder(n_levels: int) -> np.ndarray:
    """Truncated annihilation operator on the number states 0 .. n_levels-1."""
    if int(n_levels) != n_levels or n_levels < 2:
        raise DimensionError(f"bosonic truncation needs at least 2 levels, got {n_levels}")
    return np.diag(np.sqrt(np.arange(1, n_levels)), 1).astype(complex)


def embed(op: np.ndarray, site: int, dims: Sequence[int]) -> np.ndarray:
    """Place ``op`` on tensor factor ``site`` with identities elsewhere."""
    op = np.asarray(op)
    dims = tuple(int(d) for d in dims)
    if not 0 <= site < len(dims):
        raise DimensionError(f"site {site} outside layout {dims}")
    if op.shape != (dims[site], dims[site]):
        raise DimensionError(f"operator of shape {op.shape} does not fit factor {site} of layout {dims}")
    factors = [np.eye(d, dtype=complex) for d in dims]
    factors[site] = op
    return reduce(np.kron, factors)


def _fact(x: Fraction) -> int:
    if x.denominator != 1 or x < 0:
        raise ValueError
    return math.factorial(int(x))


@lru_cache(maxsize=None)
def _cg(j1: Fraction, m1: Fraction, j2: Fraction, m2: Fraction, j: Fraction, m: Fraction) -> float:
    if m1 + m2 != m or abs(m1) > j1 or abs(m2) > j2 or abs(m) > j:
        return 0.0
    if j < abs(j1 - j2) or j > j1 + j2 or (j1 + j2 + j).denominator != 1:
        return 0.0
    # Racah's closed form
    pre = (2 * j + 1) * _fact(j1 + j2 - j) * _fact(j1 - j2 + j) * _fact(-j1 + j2 + j) / _fact(j1 + j2 + j + 1)
    pre *= _fact(j1 + m1) * _fact(j1 - m1) * _fact(j2 + m2) * _fact(j2 - m2) * _fact(j + m) * _fact(j - m)
    total = 0.0
    kmin = max(0, int(j2 - j - m1), int(j1 - j + m2))
    kmax = min(int(j1 + j2 - j), int(j1 - m1), int(j2 + m2))
    for k in range(kmin, kmax + 1):
        k = Fraction(k)
        den = (
            _fact(k)
            * _fact(j1 + j2 - j - k)
            * _fact(j1 - m1 - k)
            * _fact(j2 + m2 - k)
            * _fact(j - j2 + m1 + k)
            * _fact(j - j1 - m2 + k)
        )
        total += (-1) ** int(k) / den
    return math.sqrt(pre) * total


def clebsch_gordan(j1, m1, j2, m2, j, m) -> float:
    """<j1 m1; j2 m2 | j m> in the Condon-Shortley convention."""
    args = [Fraction(x).limit_denominator(2) for x in (j1, m1, j2, m2, j, m)]
    return _cg(*args)


def spherical_tensor(s, k: int, q: int) -> np.ndarray:
    """Irreducible tensor T_k^q on spin s, normalised to Tr(T^dag T) = 1.

    Matrix elements are ``sqrt((2k+1)/(2s+1)) <s m; k q | s m'>``, which
    gives T_1^0 = sqrt(2) S_z and T_1^1 = -S_+ for a qubit.
    """
    s = _as_spin(s)
    if int(k) != k or k < 0 or k > 2 * s or int(q) != q or abs(q) > k:
        raise ValueError(f"need 0 <= k <= 2s and |q| <= k, got s={s}, k={k}, q={q}")
    m = [s - i for i in range(spin_dim(s))]
    scale = math.sqrt((2 * k + 1) / (2 * s + 1))
    out = np.zeros((len(m), len(m)), dtype=complex)
    for col, mc in enumerate(m):
        for row, mr in enumerate(m):
            if mr == mc + q:
                out[row, col] = scale * _cg(s, mc, Fraction(k), Fraction(q), s, mr)
    return out


def coherent_state(s, theta: float, phi: float) -> np.ndarray:
    """Spin coherent state pointing along polar angle theta and azimuth phi.

    Built as exp(-i phi S_z) exp(-i theta S_y) |s, s>, i.e. an active rotation
    of the north-pole state, so that its Bloch vector is
    (sin theta cos phi, sin theta sin phi, cos theta).
    """
    d = spin_dim(s)
    north = np.zeros(d, dtype=complex)
    north[0] = 1.0
    psi = expm(-1j * theta * spin_y(s)) @ north
    return np.exp(-1j * phi * _m_values(s)) * psi


def assoc_legendre(k: int, q: int, x: float, condon_shortley: bool = True) -> float:
    """Associated Legendre function P_k^q(x) for 0 <= q <= k.

    With ``condon_shortley`` the (-1)^q phase is included (the usual
    convention, e.g. P_1^1(x) = -sqrt(1 - x^2)).
    """
    if not 0 <= q <= k:
        raise ValueError(f"need 0 <= q <= k, got k={k}, q={q}")
    x = float(x)
    if abs(x) > 1.0 + 1e-14:
        raise ValueError(f"argument {x} outside [-1, 1]")
    x = min(1.0, max(-1.0, x))
    val = float(lpmv(q, k, x))
    return val if condon_shortley else (-1) ** q * val
