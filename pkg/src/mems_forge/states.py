"""Two-qubit density matrices.

Basis ordering is fixed as ``{|00>, |01>, |10>, |11>}`` with qubit 1 first,
i.e. ``index = 2 * bit(qubit 1) + bit(qubit 2)``. States are plain 4x4
complex ``numpy`` arrays.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ContractError, DomainError, ShapeError

TRACE_TOL = 1e-9
HERMITIAN_TOL = 1e-9
POSITIVITY_TOL = 1e-8

FAMILIES = ("rho1", "rho2")
FAMILY_RANGES = {"rho1": (2.0 / 3.0, 1.0), "rho2": (0.0, 2.0 / 3.0)}

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# |0> is the ground state, so the lowering operator is |0><1|
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.T.copy()

FLIP_Q2 = np.kron(I2, PAULI_Z @ PAULI_X)


def basis_state(label: str) -> np.ndarray:
    """Projector onto a computational basis state, e.g. ``basis_state("01")``."""
    if len(label) != 2 or set(label) - {"0", "1"}:
        raise DomainError(f"basis label must be two bits, got {label!r}")
    rho = np.zeros((4, 4), dtype=complex)
    i = int(label, 2)
    rho[i, i] = 1.0
    return rho


def pure_state(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def bell_phi_plus() -> np.ndarray:
    return pure_state([1, 0, 0, 1])


def maximally_mixed() -> np.ndarray:
    return np.eye(4, dtype=complex) / 4


def validate_state(
    rho,
    trace_tol: float = TRACE_TOL,
    herm_tol: float = HERMITIAN_TOL,
    pos_tol: float = POSITIVITY_TOL,
) -> np.ndarray:
    """Check trace, Hermiticity and positivity; return the state as an array.

    Accepts a single 4x4 matrix or a stack of shape ``(..., 4, 4)``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (4, 4):
        raise ShapeError(f"two-qubit state must be 4x4, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ContractError("state contains non-finite entries")
    herm = np.max(np.abs(rho - np.swapaxes(rho.conj(), -1, -2)))
    if herm > herm_tol:
        raise ContractError(f"state is not Hermitian (deviation {herm:.3e})")
    tr = np.abs(np.trace(rho, axis1=-2, axis2=-1) - 1.0)
    if np.max(tr) > trace_tol:
        raise ContractError(f"state trace deviates from 1 by {np.max(tr):.3e}")
    hermitian_part = 0.5 * (rho + np.swapaxes(rho.conj(), -1, -2))
    lowest = np.min(np.linalg.eigvalsh(hermitian_part))
    if lowest < -pos_tol:
        raise ContractError(f"state has negative eigenvalue {lowest:.3e}")
    return rho


def mems(r: float, family: str) -> np.ndarray:
    """Member of a maximally-entangled-mixed-state family.

    ``rho1`` is defined for ``r`` in ``[2/3, 1]`` and ``rho2`` for ``r`` in
    ``[0, 2/3]``; both carry a real coherence ``r/2`` between ``|00>`` and
    ``|11>``. Out-of-range ``r`` raises :class:`DomainError`.
    """
    if family not in FAMILY_RANGES:
        raise DomainError(f"unknown MEMS family {family!r}; expected one of {FAMILIES}")
    lo, hi = FAMILY_RANGES[family]
    if not (lo - 1e-12 <= r <= hi + 1e-12):
        raise DomainError(f"r={r!r} outside [{lo:.6g}, {hi:.6g}] for family {family}")
    rho = np.zeros((4, 4), dtype=complex)
    if family == "rho1":
        rho[0, 0] = rho[3, 3] = r / 2
        rho[1, 1] = 1 - r
    else:
        rho[0, 0] = rho[1, 1] = rho[3, 3] = 1.0 / 3.0
    rho[0, 3] = rho[3, 0] = r / 2
    return rho


def werner(p: float) -> np.ndarray:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"Werner weight p={p!r} outside [0, 1]")
    return p * bell_phi_plus() + (1 - p) * maximally_mixed()


def bit_phase_flip_q2(rho) -> np.ndarray:
    """Apply ``Z X`` to qubit 2.

    Moves a ``|01>-|10>`` coherence onto the ``|00>-|11>`` position, which is
    where the MEMS families keep theirs.
    """
    rho = validate_state(rho)
    return FLIP_Q2 @ rho @ FLIP_Q2.conj().T


def dephase_qubits(rho, q: float) -> np.ndarray:
    """Independent phase damping on both qubits.

    Each coherence between basis states that differ on ``k`` qubits is
    multiplied by ``q**k``; populations are untouched.
    """
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"coherence retention q={q!r} outside [0, 1]")
    rho = validate_state(rho)
    bits = np.array([[0, 0], [0, 1], [1, 0], [1, 1]])
    hamming = np.abs(bits[:, None, :] - bits[None, :, :]).sum(axis=-1)
    return rho * q**hamming


def apply_local_unitaries(rho, u1, u2) -> np.ndarray:
    u = np.kron(u1, u2)
    return u @ rho @ u.conj().T


def state_to_json(rho) -> str:
    rho = np.asarray(rho, dtype=complex)
    return json.dumps(
        {"basis": "q1q2", "re": rho.real.ravel().tolist(), "im": rho.imag.ravel().tolist()}
    )


def state_from_json(text: str) -> np.ndarray:
    data = json.loads(text)
    if data.get("basis") != "q1q2":
        raise ContractError(f"unsupported basis tag {data.get('basis')!r}")
    re, im = data.get("re"), data.get("im")
    if re is None or im is None or len(re) != 16 or len(im) != 16:
        raise ShapeError("state JSON needs 16 real and 16 imaginary entries")
    rho = (np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)).reshape(4, 4)
    return validate_state(rho)
