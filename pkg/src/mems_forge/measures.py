"""Entanglement, mixedness and similarity measures, and the MEMS boundary.

The generic measures go through the Hermitian kernel in :mod:`.linalg`.
The ``x_state_*`` helpers are closed forms for matrices whose only non-zero
entries sit on the diagonal and anti-diagonal; they broadcast over stacks and
are what the grid scans use.
"""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .linalg import hermitian_eig, psd_sqrt
from .optimize import golden_section_max
from .states import FAMILY_RANGES, FLIP_Q2, PAULI_Y, mems, validate_state

_YY = np.kron(PAULI_Y, PAULI_Y)
BOUNDARY_SAMPLES = 2001
FIDELITY_SYMMETRY_TOL = 1e-10


class CsPoint(NamedTuple):
    C: float
    S: float


class BoundaryPoint(NamedTuple):
    r: float
    family: str
    C: float
    S: float


def spin_flip(rho) -> np.ndarray:
    return _YY @ np.conj(rho) @ _YY


def concurrence(rho, method: str = "jacobi") -> float:
    """Wootters concurrence.

    The square roots of the eigenvalues of ``rho @ spin_flip(rho)`` are the
    eigenvalues of the Hermitian matrix ``sqrt(rho) spin_flip(rho) sqrt(rho)``,
    so only a Hermitian eigensolver is needed.
    """
    rho = validate_state(rho)
    root = psd_sqrt(rho, method=method)
    m = root @ spin_flip(rho) @ root
    m = 0.5 * (m + m.conj().T)
    lam = hermitian_eig(m, method=method, tol=1e-8).eigenvalues
    s = np.sqrt(np.clip(lam, 0.0, None))
    return float(min(1.0, max(0.0, s[0] - s[1] - s[2] - s[3])))


def linear_entropy(rho):
    """``(4/3) * (1 - Tr rho^2)``; broadcasts over stacks of states."""
    rho = np.asarray(rho, dtype=complex)
    purity = np.einsum("...ij,...ji->...", rho, rho).real
    out = np.clip(4.0 / 3.0 * (1.0 - purity), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def _root_fidelity(a, b, method: str) -> float:
    ra = psd_sqrt(a, method=method)
    m = ra @ b @ ra
    m = 0.5 * (m + m.conj().T)
    lam = hermitian_eig(m, method=method, tol=1e-8).eigenvalues
    return float(np.sum(np.sqrt(np.clip(lam, 0.0, None))))


def fidelity(a, b, method: str = "jacobi") -> float:
    """Root fidelity ``Tr sqrt(sqrt(a) b sqrt(a))`` (not squared).

    Round-off can make the two argument orders disagree slightly; when they
    differ by more than 1e-10 the mean is returned.
    """
    a = validate_state(a)
    b = validate_state(b)
    fab = _root_fidelity(a, b, method)
    fba = _root_fidelity(b, a, method)
    f = fab if abs(fab - fba) <= FIDELITY_SYMMETRY_TOL else 0.5 * (fab + fba)
    return float(min(1.0, max(0.0, f)))


def x_state_concurrence(rho):
    rho = np.asarray(rho)
    p = np.real(np.diagonal(rho, axis1=-2, axis2=-1))
    p = np.clip(p, 0.0, None)
    outer = np.abs(rho[..., 0, 3]) - np.sqrt(p[..., 1] * p[..., 2])
    inner = np.abs(rho[..., 1, 2]) - np.sqrt(p[..., 0] * p[..., 3])
    out = 2.0 * np.maximum(0.0, np.maximum(outer, inner))
    return float(out) if out.ndim == 0 else out


def _block_root_fidelity(a, b):
    # 2x2 PSD blocks: Tr sqrt(sqrt(A) B sqrt(A)) = sqrt(Tr AB + 2 sqrt(det A det B))
    tr_ab = np.real(np.einsum("...ij,...ji->...", a, b))
    det_a = np.clip(np.real(np.linalg.det(a)), 0.0, None)
    det_b = np.clip(np.real(np.linalg.det(b)), 0.0, None)
    return np.sqrt(np.clip(tr_ab + 2.0 * np.sqrt(det_a * det_b), 0.0, None))


def x_state_fidelity(a, b):
    """Root fidelity of two X-shaped states via their two 2x2 blocks."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    outer = np.ix_([0, 3], [0, 3])
    inner = np.ix_([1, 2], [1, 2])
    f = _block_root_fidelity(a[..., outer[0], outer[1]], b[..., outer[0], outer[1]])
    f = f + _block_root_fidelity(a[..., inner[0], inner[1]], b[..., inner[0], inner[1]])
    f = np.clip(f, 0.0, 1.0)
    return float(f) if f.ndim == 0 else f


def mems_boundary(samples: int) -> list[BoundaryPoint]:
    """Sample the concurrence / linear-entropy MEMS boundary over ``r`` in [0, 1].

    Points with ``r <= 2/3`` come from ``rho2``, the rest from ``rho1``; each
    point is measured from the constructed state.
    """
    if samples < 2:
        raise ValueError("mems_boundary needs at least 2 samples")
    switch = FAMILY_RANGES["rho2"][1]
    points = []
    for r in np.linspace(0.0, 1.0, samples):
        family = "rho2" if r <= switch else "rho1"
        rho = mems(float(r), family)
        points.append(BoundaryPoint(float(r), family, x_state_concurrence(rho), linear_entropy(rho)))
    return points


@lru_cache(maxsize=1)
def _boundary_table():
    pts = mems_boundary(BOUNDARY_SAMPLES)
    c = np.array([p.C for p in pts])
    s = np.array([p.S for p in pts])
    # S decreases along r; np.interp needs increasing abscissae
    return s[::-1].copy(), c[::-1].copy()


def boundary_concurrence(S):
    """Largest concurrence allowed at linear entropy ``S`` (0 beyond 8/9)."""
    s_tab, c_tab = _boundary_table()
    out = np.interp(S, s_tab, c_tab, left=1.0, right=0.0)
    return float(out) if np.ndim(out) == 0 else out


def boundary_gap(point) -> float:
    """``C_boundary(S) - C`` for a point in the C-S plane.

    Non-negative for every physical state up to interpolation error.
    """
    c, s = point
    out = boundary_concurrence(s) - np.asarray(c, dtype=float)
    return float(out) if np.ndim(out) == 0 else out


def cs_point(rho) -> CsPoint:
    return CsPoint(concurrence(rho), linear_entropy(rho))


X_PATTERN_TOL = 1e-12
_OFF_X = np.ones((4, 4), dtype=bool)
_OFF_X[np.arange(4), np.arange(4)] = False
_OFF_X[np.arange(4), 3 - np.arange(4)] = False


def concurrence_many(states, method: str = "jacobi") -> np.ndarray:
    """Concurrence of a stack of states.

    X-shaped members use the closed form; anything with weight off the
    diagonal and anti-diagonal goes through :func:`concurrence`.
    """
    states = np.asarray(states, dtype=complex)
    flat = states.reshape(-1, 4, 4)
    out = np.asarray(x_state_concurrence(flat), dtype=float).reshape(-1).copy()
    off = np.max(np.abs(flat[:, _OFF_X]), axis=-1) if len(flat) else np.zeros(0)
    for i in np.nonzero(off > X_PATTERN_TOL)[0]:
        out[i] = concurrence(flat[i], method=method)
    return out.reshape(states.shape[:-2])


# --- fidelity to the MEMS families after the qubit-2 flip -------------------


def _aligned(rho):
    return FLIP_Q2 @ rho @ FLIP_Q2.conj().T


def _family_targets(family: str, r):
    # (|00>, |01>, |11>) populations and the real |00>-|11> coherence of mems(r, family)
    if family not in FAMILY_RANGES:
        raise DomainError(f"unknown MEMS family {family!r}")
    if family == "rho1":
        return r / 2, 1 - r, r / 2, r / 2
    third = np.full_like(r, 1.0 / 3.0)
    return third, third, third, r / 2


class _XEntries(NamedTuple):
    p00: np.ndarray
    p01: np.ndarray
    p11: np.ndarray
    c03: np.ndarray  # <00|rho|11>


def _x_entries(rho) -> _XEntries:
    a = _aligned(np.asarray(rho, dtype=complex))
    return _XEntries(a[..., 0, 0].real, a[..., 1, 1].real, a[..., 3, 3].real, a[..., 0, 3])


def _fidelity_from_entries(e: _XEntries, family: str, r):
    # both blocks are 2x2 PSD; the target's |01>-|10> block is diag(t01, 0)
    r = np.asarray(r, dtype=float)
    t00, t01, t11, coh = _family_targets(family, r)
    tr_ab = e.p00 * t00 + e.p11 * t11 + 2.0 * coh * e.c03.real
    det_a = np.clip(e.p00 * e.p11 - np.abs(e.c03) ** 2, 0.0, None)
    det_b = np.clip(t00 * t11 - coh**2, 0.0, None)
    outer = np.sqrt(np.clip(tr_ab + 2.0 * np.sqrt(det_a * det_b), 0.0, None))
    inner = np.sqrt(np.clip(e.p01 * t01, 0.0, None))
    return np.clip(outer + inner, 0.0, 1.0)


def family_fidelity(rho, family: str, r):
    """Root fidelity between the qubit-2-flipped state and ``mems(r, family)``.

    Exact for X-shaped inputs, which covers every state these dynamics produce
    from ``|01>``: the target's ``|01>,|10>`` block has rank one, so only the
    ``|01>`` population of that block matters. ``rho`` may be a stack and
    ``r`` broadcasts against it.
    """
    return _fidelity_from_entries(_x_entries(rho), family, r)


def best_family_fidelity(rho, family: str, tol: float = 1e-12):
    """Maximize :func:`family_fidelity` over the family's ``r`` range.

    Fidelity is concave in ``r`` (joint concavity, affine family), so a
    golden-section search is exact up to ``tol``. Works on stacks.
    """
    if family not in FAMILY_RANGES:
        raise DomainError(f"unknown MEMS family {family!r}")
    lo, hi = FAMILY_RANGES[family]
    rho = np.asarray(rho)
    e = _x_entries(rho)
    r, f = golden_section_max(lambda r: _fidelity_from_entries(e, family, r), lo, hi, tol=tol,
                              shape=rho.shape[:-2])
    return f, r
