"""Small dense complex linear algebra.

Matrices are plain ``numpy`` arrays. The composite qubit/field space is
ordered as ``qubit1 ⊗ qubit2 ⊗ field`` with the field index varying fastest,
so the flat index of ``|q1 q2, n>`` is ``(2*q1 + q2) * (nmax + 1) + n``.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import ContractError, NotPSDError, NumericalError, ShapeError

HERMITIAN_TOL = 1e-10
PSD_CLAMP_TOL = 1e-10
JACOBI_OFF_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


class EigDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # unitary, columns match eigenvalues


def as_square(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ShapeError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    return a


def hermiticity_error(a: np.ndarray) -> float:
    """Largest entrywise deviation ``max |A - A^H|``."""
    return float(np.max(np.abs(a - a.conj().T)))


def check_hermitian(a, tol: float = HERMITIAN_TOL, name: str = "matrix") -> np.ndarray:
    a = as_square(a, name)
    err = hermiticity_error(a)
    if err > tol:
        raise ContractError(f"{name} is not Hermitian (max |A - A^H| = {err:.3e} > {tol:g})")
    return a


def _offdiag_norm(a: list) -> float:
    n = len(a)
    return math.sqrt(sum(abs(a[i][j]) ** 2 for i in range(n) for j in range(n) if i != j))


def jacobi_eigh(a, tol: float = JACOBI_OFF_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi diagonalization of a complex Hermitian matrix.

    Each rotation first removes the phase of ``a[p, q]`` with a diagonal
    unitary and then applies the real symmetric Jacobi rotation. Iteration
    stops once the off-diagonal Frobenius norm drops below
    ``tol * max(1, ||A||_F)``.

    Returns ``(eigenvalues, eigenvectors)`` in the order produced by the
    sweeps (unsorted).
    """
    arr = as_square(a)
    n = arr.shape[0]
    # plain Python lists: for n <= ~20 this beats per-element numpy calls
    a = [[complex(x) for x in row] for row in arr]
    v = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]
    threshold = tol * max(1.0, float(np.linalg.norm(arr)))
    for _ in range(max_sweeps + 1):
        if _offdiag_norm(a) <= threshold:
            w = np.array([a[i][i].real for i in range(n)])
            return w, np.array(v, dtype=complex)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                ph = (apq / mag).conjugate()
                theta = (a[q][q].real - a[p][p].real) / (2.0 * mag)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # columns (p, q) times diag(1, ph) @ [[c, s], [-s, c]]
                r10, r11 = -s * ph, c * ph
                for row in a:
                    x, y = row[p], row[q]
                    row[p] = c * x + r10 * y
                    row[q] = s * x + r11 * y
                rp, rq = a[p], a[q]
                c10, c11 = r10.conjugate(), r11.conjugate()
                for k in range(n):
                    x, y = rp[k], rq[k]
                    rp[k] = c * x + c10 * y
                    rq[k] = s * x + c11 * y
                rp[q] = rq[p] = 0j
                for row in v:
                    x, y = row[p], row[q]
                    row[p] = c * x + r10 * y
                    row[q] = s * x + r11 * y
    raise NumericalError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")


def hermitian_eig(a, method: str = "jacobi", tol: float = HERMITIAN_TOL) -> EigDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    ``method="jacobi"`` uses :func:`jacobi_eigh`; ``method="lapack"`` uses
    ``numpy.linalg.eigh`` and is meant for hot loops.
    """
    a = check_hermitian(a, tol)
    if method == "jacobi":
        w, v = jacobi_eigh(a)
    elif method == "lapack":
        w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    else:
        raise ContractError(f"unknown eigensolver method {method!r}")
    order = np.argsort(-w, kind="stable")
    return EigDecomposition(w[order], v[:, order])


def psd_sqrt(a, method: str = "jacobi", clamp_tol: float = PSD_CLAMP_TOL) -> np.ndarray:
    """Principal square root of a Hermitian positive-semidefinite matrix.

    Eigenvalues in ``[-clamp_tol, 0)`` are clamped to zero; anything more
    negative raises :class:`NotPSDError`.
    """
    w, v = hermitian_eig(a, method=method)
    if w[-1] < -clamp_tol:
        raise NotPSDError(f"matrix has eigenvalue {w[-1]:.3e} < -{clamp_tol:g}")
    root = np.sqrt(np.clip(w, 0.0, None))
    s = (v * root) @ v.conj().T
    return 0.5 * (s + s.conj().T)


def kron(*ops) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def partial_trace_field(rho_c, fock_dim: int) -> np.ndarray:
    """Trace the field out of a ``qubit ⊗ qubit ⊗ field`` density matrix.

    ``fock_dim`` is the number of Fock levels kept (``nmax + 1``).
    """
    rho_c = as_square(rho_c, "composite state")
    if fock_dim < 1 or rho_c.shape[0] != 4 * fock_dim:
        raise ShapeError(
            f"composite state of dimension {rho_c.shape[0]} does not match 4 x {fock_dim} Fock levels"
        )
    return np.einsum("injn->ij", rho_c.reshape(4, fock_dim, 4, fock_dim))
