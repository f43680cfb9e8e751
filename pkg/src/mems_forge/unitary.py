"""Closed-form single-excitation dynamics of two qubits and a lossless mode.

Initial state ``|01>|0>`` (qubit 2 excited, field empty). In units of the
qubit-1 coupling, with ``lam = g2/g1`` and ``W = sqrt(1 + lam^2)``::

    alpha(tau) = -lam (1 - cos W tau) / W^2      |100>
    beta(tau)  = (1 + lam^2 cos W tau) / W^2     |010>
    chi(tau)   = -i lam sin(W tau) / W           |001>
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .measures import best_family_fidelity, linear_entropy, x_state_concurrence
from .optimize import golden_section_max


class AmplitudeTriple(NamedTuple):
    alpha: complex
    beta: complex
    chi: complex


@dataclass(frozen=True)
class TrajectoryRecord:
    tau: float
    C: float
    S: float
    F: float | None = None


def amplitudes(lam, tau):
    """Amplitudes of ``|100>``, ``|010>``, ``|001>``; broadcasts over arrays."""
    lam = np.asarray(lam, dtype=float)
    tau = np.asarray(tau, dtype=float)
    w2 = 1.0 + lam**2
    w = np.sqrt(w2)
    c = np.cos(w * tau)
    alpha = (-lam * (1.0 - c) / w2).astype(complex)
    beta = ((1.0 + lam**2 * c) / w2).astype(complex)
    chi = -1j * lam * np.sin(w * tau) / w
    if alpha.ndim == 0:
        return AmplitudeTriple(complex(alpha), complex(beta), complex(chi))
    return AmplitudeTriple(alpha, beta, chi)


def composite_pure_state(lam: float, tau: float) -> np.ndarray:
    """Pure state on qubit ⊗ qubit ⊗ field with one Fock level above vacuum."""
    a, b, x = amplitudes(lam, tau)
    psi = np.zeros(8, dtype=complex)
    psi[2 * 2 + 0] = a  # |10>|0>
    psi[1 * 2 + 0] = b  # |01>|0>
    psi[0 * 2 + 1] = x  # |00>|1>
    return np.outer(psi, psi.conj())


def unitary_state(lam, tau) -> np.ndarray:
    """Reduced two-qubit state after tracing out the field; broadcasts."""
    a, b, x = amplitudes(lam, tau)
    a, b, x = np.asarray(a), np.asarray(b), np.asarray(x)
    rho = np.zeros(a.shape + (4, 4), dtype=complex)
    rho[..., 0, 0] = np.abs(x) ** 2
    rho[..., 1, 1] = np.abs(b) ** 2
    rho[..., 2, 2] = np.abs(a) ** 2
    rho[..., 1, 2] = b * np.conj(a)
    rho[..., 2, 1] = np.conj(b) * a
    return rho


def unitary_trajectory(lam: float, tau_max: float, steps: int) -> list[TrajectoryRecord]:
    if steps < 2:
        raise ValueError("unitary_trajectory needs at least 2 steps")
    taus = np.linspace(0.0, tau_max, steps)
    rho = unitary_state(lam, taus)
    cs = x_state_concurrence(rho)
    ss = linear_entropy(rho)
    return [TrajectoryRecord(float(t), float(c), float(s)) for t, c, s in zip(taus, cs, ss)]


@dataclass
class TouchReport:
    family: str
    grid_min_infidelity: float
    grid_argmin: tuple  # (lam, tau)
    refined_infidelity: float
    refined_point: tuple  # (lam, tau, r)
    max_concurrence_grid: float


def scan_grid(lams, taus):
    """Concurrence, entropy and best family fidelities over a (lam, tau) grid."""
    L, T = np.meshgrid(np.asarray(lams, float), np.asarray(taus, float), indexing="ij")
    rho = unitary_state(L, T)
    out = {
        "lam": L,
        "tau": T,
        "C": x_state_concurrence(rho),
        "S": linear_entropy(rho),
    }
    for family in ("rho1", "rho2"):
        f, r = best_family_fidelity(rho, family)
        out[f"F_{family}"] = f
        out[f"r_{family}"] = r
    return out


def touch_search(family: str, lams=None, taus=None, refine: bool = True) -> TouchReport:
    """Closest approach of the unitary trajectories to a MEMS family.

    Scans the grid, then refines the best grid point by cyclic golden-section
    searches over ``lam`` and ``tau`` (the ``r`` optimum is taken inside each
    evaluation).
    """
    lams = np.round(np.arange(0.0, 2.0 + 1e-9, 0.05), 12) if lams is None else np.asarray(lams)
    taus = np.linspace(0.0, 40.0, 4001) if taus is None else np.asarray(taus)
    grid = scan_grid(lams, taus)
    infid = 1.0 - grid[f"F_{family}"]
    i, j = np.unravel_index(np.argmin(infid), infid.shape)
    lam0, tau0 = float(lams[i]), float(taus[j])
    best = float(infid[i, j])

    def score(lam, tau):
        f, _ = best_family_fidelity(unitary_state(lam, tau), family)
        return float(f)

    lam_c, tau_c = lam0, tau0
    refined = best
    if refine:
        dl = float(lams[1] - lams[0]) if len(lams) > 1 else 0.05
        dt = float(taus[1] - taus[0]) if len(taus) > 1 else 0.01
        for _ in range(6):
            tau_c, _f = golden_section_max(lambda t: score(lam_c, t), tau_c - dt, tau_c + dt, tol=1e-12)
            lam_c, _f = golden_section_max(lambda l: score(l, tau_c), max(0.0, lam_c - dl), lam_c + dl,
                                           tol=1e-12)
            dl, dt = dl / 2, dt / 2
        refined = 1.0 - score(lam_c, tau_c)
        if refined > best:
            lam_c, tau_c, refined = lam0, tau0, best
    _, r_best = best_family_fidelity(unitary_state(lam_c, tau_c), family)
    return TouchReport(
        family=family,
        grid_min_infidelity=best,
        grid_argmin=(lam0, tau0),
        refined_infidelity=refined,
        refined_point=(float(lam_c), float(tau_c), float(r_best)),
        max_concurrence_grid=float(np.max(grid["C"])),
    )
