"""Reduced two-qubit master equation after eliminating a lossy cavity.

Dimensionless units: time ``tau = g1 t``, every rate divided by ``g1``,
``lam = g2 / g1`` and ``gamma = gamma_cavity / g1``. With the collective
lowering operator ``J- = s1- + lam s2-`` and ``D[L]rho = 2 L rho L^+ -
{L^+ L, rho}`` the thermal generator reads::

    drho/dtau = (1/gamma) [ (nbar + 1) D[J-] + nbar D[J+] ] rho

Optional terms: independent dephasing ``-Gamma sum_j [sz_j, [sz_j, rho]]``,
intrinsic qubit emission ``gq D[s_j-]`` and a squeezed reservoir ``(N, M)``
in place of the thermal one.

Because the generator is linear, one classical RK4 step equals the fourth
order Taylor polynomial of ``exp(h L)`` applied to the state. :func:`integrate`
builds that 16x16 step matrix once and reuses it.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, fields, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.linalg import expm

from .errors import (
    ContractError,
    ConvergenceError,
    IntegrationError,
    ParameterError,
    UnsupportedConfigurationError,
)
from .measures import concurrence_many, linear_entropy
from .states import I2, PAULI_Z, SIGMA_MINUS, basis_state, validate_state

BAD_CAVITY_WARN = 5.0
SQUEEZE_BOUND_SLACK = 1e-12
DEFAULT_DTAU = 0.01
TRACE_DRIFT_LIMIT = 1e-6
STEADY_RESIDUAL = 1e-10
SQUEEZE_MODELS = ("bath", "literal")

S1M = np.kron(SIGMA_MINUS, I2)
S2M = np.kron(I2, SIGMA_MINUS)
Z1 = np.kron(PAULI_Z, I2)
Z2 = np.kron(I2, PAULI_Z)


class BadCavityWarning(UserWarning):
    """``gamma`` is too small for the eliminated-cavity model to be trusted."""


@dataclass(frozen=True)
class DynamicsParams:
    """Dimensionless rates for the reduced model.

    ``squeeze_model`` selects how ``(N, M)`` enter: ``"bath"`` is the
    squeezed-reservoir dissipator, ``"literal"`` substitutes the squeezed
    operators ``S-_j = sqrt(M/N) s+_j + sqrt(N) s-_j`` into the zero-temperature
    generator. ``dephasing_qubits`` lists which qubits feel ``Gamma``.
    """

    lam: float = 0.8
    gamma: float = 10.0
    nbar: float = 0.0
    dephasing: float = 0.0
    emission: float = 0.0
    squeeze_n: float = 0.0
    squeeze_m: float = 0.0
    squeeze_model: str = "bath"
    dephasing_qubits: tuple = (1, 2)

    def __post_init__(self):
        for name in ("lam", "gamma", "nbar", "dephasing", "emission", "squeeze_n", "squeeze_m"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ParameterError(f"{name} must be a finite number, got {v!r}")
            if v < 0:
                raise ParameterError(f"{name} must be non-negative, got {v!r}")
        if self.gamma <= 0:
            raise ParameterError("gamma must be positive")
        if self.gamma < BAD_CAVITY_WARN:
            warnings.warn(
                f"gamma={self.gamma} is below {BAD_CAVITY_WARN}; the eliminated-cavity model assumes gamma >> 1",
                BadCavityWarning,
                stacklevel=3,
            )
        n, m = self.squeeze_n, self.squeeze_m
        if m > math.sqrt(n * (n + 1)) + SQUEEZE_BOUND_SLACK:
            raise ParameterError(f"squeeze_m={m} exceeds sqrt(N(N+1))={math.sqrt(n * (n + 1)):.6g}")
        if m > 0 and n == 0:
            raise ParameterError("squeeze_m > 0 requires squeeze_n > 0")
        if self.nbar > 0 and n > 0:
            raise ParameterError("thermal nbar and squeezing (N, M) cannot both be set")
        if self.squeeze_model not in SQUEEZE_MODELS:
            raise ParameterError(f"squeeze_model must be one of {SQUEEZE_MODELS}, got {self.squeeze_model!r}")
        qs = tuple(self.dephasing_qubits)
        if not qs or set(qs) - {1, 2} or len(set(qs)) != len(qs):
            raise ParameterError(f"dephasing_qubits must be a non-empty subset of (1, 2), got {qs!r}")
        object.__setattr__(self, "dephasing_qubits", qs)

    @property
    def is_vacuum(self) -> bool:
        """Zero temperature, no squeezing, no dephasing, no intrinsic emission."""
        return self.nbar == 0 and self.dephasing == 0 and self.emission == 0 and self.squeeze_n == 0

    @property
    def is_thermal_only(self) -> bool:
        return self.dephasing == 0 and self.emission == 0 and self.squeeze_n == 0

    def with_(self, **changes) -> "DynamicsParams":
        return replace(self, **changes)


def ideal_squeezing(n: float) -> float:
    """``M = sqrt(N (N + 1))`` for a minimum-uncertainty squeezed reservoir."""
    return math.sqrt(n * (n + 1.0))


def cooperativities(p: DynamicsParams) -> tuple[float, float]:
    """``c_j = g_j^2 / (gamma_q gamma)`` in dimensionless form."""
    if p.emission == 0:
        return math.inf, math.inf
    return 1.0 / (p.emission * p.gamma), p.lam**2 / (p.emission * p.gamma)


def effective_emission_rates(p: DynamicsParams) -> tuple[float, float]:
    """Total single-qubit decay coefficient ``gamma_q (1 + c_j)`` per qubit.

    The cavity-mediated share ``g_j^2 / gamma`` already sits inside the
    collective term, so the generator only adds ``gamma_q`` on top.
    """
    return p.emission + 1.0 / p.gamma, p.emission + p.lam**2 / p.gamma


def _dissipator(op, rho):
    opd = op.conj().T
    return 2.0 * op @ rho @ opd - (opd @ op @ rho + rho @ opd @ op)


def _anomalous(op, rho):
    # 2 L rho L - {L L, rho}: the phase-sensitive squeezed-bath term
    oo = op @ op
    return 2.0 * op @ rho @ op - (oo @ rho + rho @ oo)


def generator_apply(p: DynamicsParams, rho) -> np.ndarray:
    """Time derivative ``drho/dtau`` of a 4x4 (or stacked) matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (4, 4):
        raise ContractError(f"generator acts on 4x4 matrices, got shape {rho.shape}")
    jm = S1M + p.lam * S2M
    jp = jm.conj().T
    g = 1.0 / p.gamma
    if p.squeeze_n > 0 and p.squeeze_model == "literal":
        a, b = math.sqrt(p.squeeze_m / p.squeeze_n), math.sqrt(p.squeeze_n)
        op = (a * S1M.conj().T + b * S1M) + p.lam * (a * S2M.conj().T + b * S2M)
        out = g * _dissipator(op, rho)
    elif p.squeeze_n > 0:
        n, m = p.squeeze_n, p.squeeze_m
        out = g * ((n + 1) * _dissipator(jm, rho) + n * _dissipator(jp, rho)
                   - m * _anomalous(jp, rho) - m * _anomalous(jm, rho))
    else:
        out = g * ((p.nbar + 1) * _dissipator(jm, rho) + p.nbar * _dissipator(jp, rho))
    if p.emission > 0:
        out = out + p.emission * (_dissipator(S1M, rho) + _dissipator(S2M, rho))
    if p.dephasing > 0:
        for q in p.dephasing_qubits:
            z = Z1 if q == 1 else Z2
            c = z @ rho - rho @ z
            out = out - p.dephasing * (z @ c - c @ z)
    return out


@lru_cache(maxsize=256)
def _liouvillian_cached(p: DynamicsParams) -> np.ndarray:
    basis = np.eye(16, dtype=complex).reshape(16, 4, 4)
    cols = generator_apply(p, basis).reshape(16, 16)
    mat = cols.T.copy()
    mat.setflags(write=False)
    return mat


def liouvillian(p: DynamicsParams) -> np.ndarray:
    """16x16 matrix of the generator acting on row-major ``vec(rho)``."""
    return _liouvillian_cached(p)


# --- component-wise equations -------------------------------------------

BLOCH_COMPONENTS = ("r0000", "r0001", "r0010", "r0101", "r0110", "r0111", "r1010", "r1011", "r1111", "r0011")


def _idx(label: str) -> tuple[int, int]:
    return int(label[1:3], 2), int(label[3:5], 2)


@dataclass(frozen=True)
class BlochVector:
    """Upper-triangle components of a two-qubit state.

    ``rABCD`` is ``<AB|rho|CD>``. ``r0011`` evolves on its own and ``r1111``
    is fixed by normalization, but both are kept for convenience.
    """

    r0000: complex
    r0001: complex
    r0010: complex
    r0101: complex
    r0110: complex
    r0111: complex
    r1010: complex
    r1011: complex
    r1111: complex
    r0011: complex

    @classmethod
    def from_state(cls, rho) -> "BlochVector":
        rho = np.asarray(rho, dtype=complex)
        return cls(**{name: complex(rho[_idx(name)]) for name in BLOCH_COMPONENTS})

    def to_matrix(self) -> np.ndarray:
        rho = np.zeros((4, 4), dtype=complex)
        for name in BLOCH_COMPONENTS:
            i, j = _idx(name)
            rho[i, j] = getattr(self, name)
            if i != j:
                rho[j, i] = np.conj(getattr(self, name))
        return rho

    def normalization_error(self) -> float:
        return abs(self.r0000 + self.r0101 + self.r1010 + self.r1111 - 1.0)

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in BLOCH_COMPONENTS], dtype=complex)


def bloch_rhs(p: DynamicsParams, b: BlochVector) -> BlochVector:
    """Hand-written component equations of the thermal generator.

    Only the thermal configuration is covered; the population rows use the
    real part of ``r0110`` since the coherence and its conjugate enter
    together. Serves as an independent check on :func:`generator_apply`.
    """
    if not p.is_thermal_only:
        raise UnsupportedConfigurationError(
            "component equations cover the thermal generator only (no dephasing, emission or squeezing)"
        )
    l, n, g = p.lam, p.nbar, p.gamma
    g2 = 1.0 + l * l
    m = 2 * n + 1
    re0110 = b.r0110.real
    d = {
        "r0000": 2 / g * ((n + 1) * b.r1010 + 2 * l * (n + 1) * re0110 + l * l * (n + 1) * b.r0101
                          - g2 * n * b.r0000),
        "r0001": 1 / g * (2 * (n + 1) * b.r1011 - (l * l * m + 2 * n) * b.r0001
                          + 2 * l * (n + 1) * b.r0111 - l * m * b.r0010),
        "r0010": 1 / g * (2 * l * l * (n + 1) * b.r0111 - (m + 2 * l * l * n) * b.r0010
                          + 2 * l * (n + 1) * b.r1011 - l * m * b.r0001),
        "r0101": 2 / g * ((n + 1) * b.r1111 - (l * l * (n + 1) + n) * b.r0101
                          + l * l * n * b.r0000 - l * m * re0110),
        "r0110": -m / g * (l * (b.r1010 + b.r0101) + g2 * b.r0110) + 2 * l / g * ((n + 1) * b.r1111 + n * b.r0000),
        "r0111": -1 / g * ((m + 2 * l * l * (n + 1)) * b.r0111 - 2 * l * l * n * b.r0010
                           + l * m * b.r1011 - 2 * l * n * b.r0001),
        "r1010": -2 / g * (((n + 1) + l * l * n) * b.r1010 - l * l * (n + 1) * b.r1111
                           - n * b.r0000 + l * m * re0110),
        "r1011": -1 / g * ((2 * (n + 1) + l * l * m) * b.r1011 - 2 * n * b.r0001
                           + l * m * b.r0111 - 2 * l * n * b.r0010),
        "r1111": -2 / g * (g2 * (n + 1) * b.r1111 - n * b.r0101 - l * l * n * b.r1010 - 2 * l * n * re0110),
        "r0011": -g2 / g * m * b.r0011,
    }
    return BlochVector(**{k: complex(v) for k, v in d.items()})


# --- time evolution ---------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    """Sampled states of one run; ``states[k]`` is the state at ``taus[k]``."""

    taus: np.ndarray
    states: np.ndarray

    def __len__(self) -> int:
        return len(self.taus)

    def __iter__(self):
        return iter(zip(self.taus, self.states))

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def concurrence(self) -> np.ndarray:
        return concurrence_many(self.states)

    def linear_entropy(self) -> np.ndarray:
        return np.asarray(linear_entropy(self.states))

    def rows(self) -> list[dict]:
        """Rows for the trajectory table, in export column order."""
        cs, ss = self.concurrence(), self.linear_entropy()
        out = []
        for t, rho, c, s in zip(self.taus, self.states, cs, ss):
            out.append({
                "tau": float(t), "C": float(c), "S": float(s),
                "rho0000": float(rho[0, 0].real), "rho0101": float(rho[1, 1].real),
                "rho1010": float(rho[2, 2].real), "rho1111": float(rho[3, 3].real),
                "rho0110_re": float(rho[1, 2].real),
            })
        return out


TRAJECTORY_COLUMNS = ("tau", "C", "S", "rho0000", "rho0101", "rho1010", "rho1111", "rho0110_re")


def max_stable_dtau(p: DynamicsParams) -> float:
    """Step-size ceiling ``0.01 gamma / (1 + lam^2)``."""
    return 0.01 * p.gamma / (1.0 + p.lam**2)


def rk4_step_matrix(lmat: np.ndarray, h: float) -> np.ndarray:
    hl = h * lmat
    step = np.eye(lmat.shape[0], dtype=complex)
    term = step
    for k in range(1, 5):
        term = term @ hl / k
        step = step + term
    return step


def integrate(
    p: DynamicsParams,
    s0,
    tau_max: float,
    dtau: float = DEFAULT_DTAU,
    sample_every: int = 1,
) -> Trajectory:
    """Fixed-step RK4 from ``s0`` to ``tau_max``.

    Samples are taken every ``sample_every`` steps plus the final step, and
    each one is checked for trace, Hermiticity and positivity. A sample
    failing those checks, or a trace drift above 1e-6, raises
    :class:`IntegrationError`.
    """
    if not (tau_max > 0 and math.isfinite(tau_max)):
        raise ParameterError(f"tau_max must be positive and finite, got {tau_max!r}")
    if not (dtau > 0 and math.isfinite(dtau)):
        raise ParameterError(f"dtau must be positive and finite, got {dtau!r}")
    if dtau > max_stable_dtau(p) * (1 + 1e-12):
        raise ParameterError(f"dtau={dtau} exceeds the stability ceiling {max_stable_dtau(p):.4g}")
    if sample_every < 1:
        raise ParameterError("sample_every must be >= 1")
    rho0 = validate_state(s0)
    steps = max(1, int(round(tau_max / dtau)))
    h = tau_max / steps
    step = rk4_step_matrix(liouvillian(p), h)
    stride = min(sample_every, steps)
    jump = np.linalg.matrix_power(step, stride)
    sample_steps = list(range(0, steps + 1, sample_every))
    if sample_steps[-1] != steps:
        sample_steps.append(steps)
    v = rho0.reshape(16).copy()
    out = [v]
    done = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in sample_steps[1:]:
            gap = k - done
            if gap == stride:
                v = jump @ v
            else:
                v = np.linalg.matrix_power(step, gap) @ v
            done = k
            out.append(v)
        states = np.array(out).reshape(-1, 4, 4)
        drift = float(np.max(np.abs(np.trace(states, axis1=-2, axis2=-1) - 1.0)))
    taus = np.array(sample_steps, dtype=float) * h
    if not np.all(np.isfinite(states)) or drift > TRACE_DRIFT_LIMIT:
        raise IntegrationError(f"trace drifted by {drift:.3e}; try a smaller dtau than {dtau}")
    try:
        validate_state(states)
    except ContractError as exc:
        raise IntegrationError(f"integrated state left the physical set ({exc}); try a smaller dtau") from exc
    return Trajectory(taus=taus, states=states)


def _require_vacuum(p: DynamicsParams, what: str):
    if not p.is_vacuum:
        raise UnsupportedConfigurationError(f"{what} needs nbar = Gamma = gamma_q = N = 0")


def dark_bright(lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Dark and bright single-excitation vectors in the 4-dim basis."""
    w = math.sqrt(1.0 + lam * lam)
    dark = np.array([0, 1, -lam, 0], dtype=complex) / w
    bright = np.array([0, lam, 1, 0], dtype=complex) / w
    return dark, bright


def analytic_vacuum(p: DynamicsParams, tau) -> np.ndarray:
    """Exact zero-temperature state at ``tau`` starting from ``|01>``.

    The bright component decays at ``2 W^2 / gamma`` into ``|00>`` while the
    dark component is frozen. Broadcasts over ``tau``.
    """
    _require_vacuum(p, "the closed-form solution")
    tau = np.asarray(tau, dtype=float)
    lam, w2 = p.lam, 1.0 + p.lam**2
    dark, bright = dark_bright(lam)
    e1 = np.exp(-w2 * tau / p.gamma)[..., None, None]
    e2 = e1**2
    pdd = np.outer(dark, dark.conj()) / w2
    pbb = np.outer(bright, bright.conj()) * lam**2 / w2
    pbd = np.outer(bright, dark.conj()) * lam / w2
    ground = basis_state("00") * lam**2 / w2
    return pdd + e2 * pbb + e1 * (pbd + pbd.conj().T) + (1.0 - e2) * ground


def _slowest_rate(lmat: np.ndarray) -> float:
    rates = -np.linalg.eigvals(lmat).real
    rates = rates[rates > 1e-12]
    return float(rates.min()) if rates.size else math.inf


def steady_state(p: DynamicsParams, s0=None, tol: float = STEADY_RESIDUAL) -> np.ndarray:
    """Long-time state reached from ``s0`` (default ``|01>``).

    At zero temperature the dark state makes the limit depend on ``s0``; for
    ``s0 = |01>`` the closed form is returned. Otherwise the propagator
    ``exp(L tau)`` is applied over doubling intervals until
    ``max |L rho| <= tol``.
    """
    if s0 is None:
        s0 = basis_state("01")
        if p.is_vacuum:
            return analytic_vacuum(p, np.inf)
    lmat = liouvillian(p)
    v = validate_state(s0).reshape(16)
    slow = _slowest_rate(lmat)
    settle = 1.0 / slow if math.isfinite(slow) else p.gamma
    tau_cap = 10.0 * p.gamma * max(1.0, 30.0 * settle)
    chunk, elapsed = max(1.0, settle), 0.0
    while True:
        resid = float(np.max(np.abs(lmat @ v)))
        if resid <= tol:
            break
        if elapsed >= tau_cap:
            raise ConvergenceError(f"no steady state by tau={elapsed:.4g} (residual {resid:.3e})")
        v = expm(lmat * chunk) @ v
        elapsed += chunk
        chunk *= 2.0
    rho = v.reshape(4, 4)
    return 0.5 * (rho + rho.conj().T)


# --- presets ------------------------------------------------------------------

PRESET_KEYS = {"lambda": "lam", "gamma": "gamma", "nbar": "nbar", "Gamma": "dephasing",
               "gamma_q": "emission", "N": "squeeze_n", "M": "squeeze_m"}


def load_preset(name_or_path: str) -> dict:
    """Read a preset by bundled name (e.g. ``"circuit-qed"``) or file path.

    Returns the raw mapping with the CLI's key names.
    """
    path = Path(name_or_path)
    if path.suffix == ".json" and path.exists():
        text = path.read_text()
    else:
        res = resources.files("mems_forge").joinpath("presets").joinpath(f"{name_or_path}.json")
        if not res.is_file():
            raise ParameterError(f"unknown preset {name_or_path!r}")
        text = res.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"preset {name_or_path!r} is not valid JSON: {exc}") from exc
    unknown = set(data) - set(PRESET_KEYS) - {"description"}
    if unknown:
        raise ParameterError(f"preset {name_or_path!r} has unknown keys {sorted(unknown)}")
    return data


def params_from_mapping(data: dict, **overrides) -> DynamicsParams:
    """Build parameters from CLI-style keys; ``overrides`` use field names."""
    kw = {PRESET_KEYS[k]: float(v) for k, v in data.items() if k in PRESET_KEYS}
    kw.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(DynamicsParams)}
    bad = set(kw) - known
    if bad:
        raise ParameterError(f"unknown parameter(s) {sorted(bad)}")
    return DynamicsParams(**kw)


def params_to_dict(p: DynamicsParams) -> dict:
    d = asdict(p)
    d["dephasing_qubits"] = list(p.dephasing_qubits)
    return d
