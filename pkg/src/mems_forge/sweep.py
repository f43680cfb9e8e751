"""Parameter sweeps, optimal-coupling search and table output."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ContractError, NumericalError, ParameterError
from .measures import best_family_fidelity, boundary_gap, concurrence_many, family_fidelity, linear_entropy
from .optimize import golden_section_max
from .reduced import DynamicsParams, ideal_squeezing, integrate, steady_state
from .states import FAMILY_RANGES, basis_state

MODES = ("unitary", "dissipative", "phase-damping", "squeezed", "full-oracle", "boundary", "fidelity-scan", "lambda-opt")
OBJECTIVES = ("max-fidelity-rho2", "max-C-subject-to-S")
PHYSICALITY_TOL = 1e-6
SIG_DIGITS = 12
ZERO_CONCURRENCE = 1e-3

DEFAULT_GRIDS = {
    "lambda": (0.0, 2.0, 0.05),
    "tau": (0.0, 100.0, 0.1),
    "nbar": (0.0, 0.8, 0.4),
    "Gamma": (0.001, 0.1, 0.001),
    "N": (0.0, 1.0, 0.1),
    "r": (0.0, 2.0 / 3.0, 2.0 / 30.0),
}
REQUIRED_AXES = {
    "unitary": ("lambda", "tau"),
    "dissipative": ("tau",),
    "phase-damping": ("Gamma",),
    "squeezed": ("N",),
    "full-oracle": ("tau",),
    "boundary": (),
    "fidelity-scan": ("r",),
    "lambda-opt": (),
}


def grid_values(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive arithmetic grid, rounded to shed accumulated float noise."""
    if not (math.isfinite(start) and math.isfinite(stop) and math.isfinite(step)):
        raise ParameterError("grid bounds must be finite")
    if step <= 0:
        raise ParameterError(f"grid step must be positive, got {step}")
    if stop < start:
        raise ParameterError(f"grid stop {stop} is below start {start}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(n), 12)


@dataclass
class SweepConfig:
    mode: str
    grids: dict = field(default_factory=dict)
    out: str | None = None
    preset: str | None = None
    fmt: str = "csv"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ParameterError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.fmt not in ("csv", "json"):
            raise ParameterError(f"format must be csv or json, got {self.fmt!r}")
        merged = {}
        for axis in REQUIRED_AXES[self.mode]:
            merged[axis] = DEFAULT_GRIDS[axis]
        for axis, bounds in self.grids.items():
            if axis not in DEFAULT_GRIDS:
                raise ParameterError(f"unknown grid axis {axis!r}")
            if len(bounds) != 3:
                raise ParameterError(f"grid {axis!r} needs (start, stop, step)")
            merged[axis] = tuple(float(x) for x in bounds)
        for axis, bounds in merged.items():
            if grid_values(*bounds).size == 0:
                raise ParameterError(f"grid {axis!r} is empty")
        self.grids = merged

    def values(self, axis: str) -> np.ndarray:
        return grid_values(*self.grids[axis])


def ordered_map(fn, items, workers: int | None = None) -> list:
    """Map over ``items`` with a bounded pool; results keep input order."""
    items = list(items)
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- optimal coupling ratio --------------------------------------------------


@dataclass(frozen=True)
class LambdaOptResult:
    objective: str
    lam: float
    value: float
    r: float | None
    C: float
    S: float
    fallback: bool
    note: str


def _steady_point(lam: float, gamma: float):
    rho = steady_state(DynamicsParams(lam=lam, gamma=gamma))
    return rho, float(concurrence_many(rho)), float(linear_entropy(rho))


def find_lambda_opt(
    objective: str = "max-fidelity-rho2",
    gamma: float = 10.0,
    s_max: float = 0.7,
    lo: float = 0.1,
    hi: float = 2.0,
    probes: int = 21,
    dense: int = 2001,
) -> LambdaOptResult:
    """Best coupling ratio for a steady-state objective at zero temperature.

    ``max-fidelity-rho2`` maximizes, over ``r`` in ``[0, 2/3]``, the fidelity of
    the flipped steady state with ``rho2(r)``. ``max-C-subject-to-S`` maximizes
    the concurrence among steady states with ``S < s_max``.

    A golden-section search is checked against ``probes`` evenly spaced
    points; if any beats it, the search is redone on a ``dense`` grid and
    ``fallback`` is set.
    """
    if objective not in OBJECTIVES:
        raise ParameterError(f"unknown objective {objective!r}; expected one of {OBJECTIVES}")
    if not 0 <= lo < hi:
        raise ParameterError("need 0 <= lo < hi for the lambda range")

    if objective == "max-fidelity-rho2":
        def score(lam):
            rho = steady_state(DynamicsParams(lam=float(lam), gamma=gamma))
            return float(best_family_fidelity(rho, "rho2")[0])
    else:
        def score(lam):
            _, c, s = _steady_point(float(lam), gamma)
            return c if s < s_max else -1.0 - s

    def vscore(x):
        x = np.asarray(x, dtype=float)
        return np.vectorize(score, otypes=[float])(x)

    lam, val = golden_section_max(vscore, lo, hi, tol=1e-7)
    grid = np.linspace(lo, hi, probes)
    vals = vscore(grid)
    fallback = bool(np.max(vals) > val + 1e-9)
    note = "golden-section"
    if fallback:
        grid = np.linspace(lo, hi, dense)
        vals = vscore(grid)
        k = int(np.argmax(vals))
        step = grid[1] - grid[0]
        lam, val = golden_section_max(vscore, max(lo, grid[k] - step), min(hi, grid[k] + step), tol=1e-7)
        note = "bracket check failed; dense grid plus local refinement"
    rho, c, s = _steady_point(lam, gamma)
    r = float(best_family_fidelity(rho, "rho2")[1]) if objective == "max-fidelity-rho2" else None
    return LambdaOptResult(objective, float(lam), float(val), r, c, s, fallback, note)


# --- scans ------------------------------------------------------------------------


def _state_at(p: DynamicsParams, tau: float, dtau: float = 0.01) -> np.ndarray:
    return integrate(p, basis_state("01"), tau, dtau=dtau, sample_every=10**9).final


def fidelity_scan(r_grid, lam: float = 0.8, gamma: float = 10.0, tau_max: float = 100.0,
                  dtau: float = 0.01, sample_every: int = 100) -> list[dict]:
    """Fidelity of the flipped zero-temperature state with ``rho2(r)`` along time.

    Rows ``(tau, r, F)`` ordered by ``tau`` then ``r``.
    """
    r_grid = np.asarray(r_grid, dtype=float)
    lo, hi = FAMILY_RANGES["rho2"]
    if np.any(r_grid < lo - 1e-12) or np.any(r_grid > hi + 1e-12):
        raise ParameterError(f"r values must lie in [{lo}, {hi:.6g}]")
    r_grid = np.clip(r_grid, lo, hi)
    traj = integrate(DynamicsParams(lam=lam, gamma=gamma), basis_state("01"), tau_max, dtau=dtau,
                     sample_every=sample_every)
    f = family_fidelity(traj.states[:, None], "rho2", r_grid[None, :])
    rows = []
    for i, t in enumerate(traj.taus):
        for j, r in enumerate(r_grid):
            rows.append({"tau": float(t), "r": float(r), "F": float(f[i, j])})
    return rows


@dataclass(frozen=True)
class DecayScan:
    nbar: np.ndarray
    F_thermal: np.ndarray
    N: np.ndarray
    F_squeezed: np.ndarray

    def rows(self) -> list[dict]:
        out = [{"bath": "thermal", "x": float(x), "F": float(f)} for x, f in zip(self.nbar, self.F_thermal)]
        out += [{"bath": "squeezed", "x": float(x), "F": float(f)} for x, f in zip(self.N, self.F_squeezed)]
        return out


def thermal_and_squeezed_decay_scan(
    nbar_grid=(0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0),
    n_grid=(0.0, 1e-3, 0.01, 0.1, 0.5, 1.0),
    lam: float = 0.8,
    gamma: float = 10.0,
    tau: float = 100.0,
    r: float | None = 2.0 / 3.0,
    squeeze_model: str = "bath",
    workers: int | None = None,
) -> DecayScan:
    """Fidelity with ``rho2(r)`` at ``tau`` against thermal ``nbar`` and squeezed ``N``.

    Squeezing is ideal, ``M = sqrt(N (N + 1))``; ``N = 0`` is the vacuum.
    ``r=None`` maximizes over the family instead of fixing ``r``.
    """

    def fid(rho):
        if r is None:
            return float(best_family_fidelity(rho, "rho2")[0])
        return float(family_fidelity(rho, "rho2", r))

    def thermal(nb):
        return fid(_state_at(DynamicsParams(lam=lam, gamma=gamma, nbar=float(nb)), tau))

    def squeezed(n):
        n = float(n)
        p = DynamicsParams(lam=lam, gamma=gamma, squeeze_n=n, squeeze_m=ideal_squeezing(n),
                           squeeze_model=squeeze_model)
        return fid(_state_at(p, tau))

    nb = np.asarray(nbar_grid, dtype=float)
    ns = np.asarray(n_grid, dtype=float)
    return DecayScan(nb, np.array(ordered_map(thermal, nb, workers)), ns, np.array(ordered_map(squeezed, ns, workers)))


@dataclass(frozen=True)
class PhaseDampingResult:
    Gamma: np.ndarray
    C: np.ndarray
    S: np.ndarray
    first_zero: float | None
    zero_threshold: float
    trajectories: dict

    def rows(self) -> list[dict]:
        return [{"Gamma": float(g), "C": float(c), "S": float(s)} for g, c, s in zip(self.Gamma, self.C, self.S)]


def phase_damping_scan(
    gamma_grid,
    lam: float = 0.8,
    gamma: float = 10.0,
    tau: float = 100.0,
    zero_threshold: float = ZERO_CONCURRENCE,
    trajectory_every: int | None = None,
    workers: int | None = None,
) -> PhaseDampingResult:
    """Concurrence at ``tau`` under independent dephasing of rate ``Gamma`` on both qubits.

    ``first_zero`` is the smallest grid ``Gamma`` whose concurrence is at or
    below ``zero_threshold`` (``None`` if none is). With ``trajectory_every``
    the C-S trajectories are kept, sampled every that many steps.
    """
    grid = np.asarray(gamma_grid, dtype=float)
    if grid.size == 0:
        raise ParameterError("Gamma grid is empty")

    def run(g):
        p = DynamicsParams(lam=lam, gamma=gamma, dephasing=float(g))
        every = trajectory_every or 10**9
        return integrate(p, basis_state("01"), tau, sample_every=every)

    trajs = ordered_map(run, grid, workers)
    finals = np.array([t.final for t in trajs])
    c = concurrence_many(finals)
    s = np.asarray(linear_entropy(finals))
    zero = np.nonzero(c <= zero_threshold)[0]
    first = float(grid[zero[0]]) if zero.size else None
    kept = {float(g): t for g, t in zip(grid, trajs)} if trajectory_every else {}
    return PhaseDampingResult(grid, c, s, first, zero_threshold, kept)


# --- output ------------------------------------------------------------------------


def audit_rows(rows) -> float:
    """Smallest boundary gap among rows carrying ``C`` and ``S``; raises if unphysical."""
    pts = [(r["C"], r["S"]) for r in rows if "C" in r and "S" in r]
    if not pts:
        return math.inf
    arr = np.array(pts, dtype=float)
    gaps = boundary_gap((arr[:, 0], arr[:, 1]))
    worst = float(np.min(gaps))
    if worst < -PHYSICALITY_TOL:
        k = int(np.argmin(gaps))
        raise NumericalError(f"point (C={arr[k, 0]:.6g}, S={arr[k, 1]:.6g}) lies above the MEMS boundary by {-worst:.3e}")
    return worst


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.{SIG_DIGITS}g}"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_table(records, fh, fmt: str = "csv", columns=None) -> None:
    """Write rows to an open text stream; see :func:`emit`."""
    records = list(records)
    if not records:
        raise ContractError("nothing to emit: record list is empty")
    if fmt not in ("csv", "json"):
        raise ParameterError(f"format must be csv or json, got {fmt!r}")
    cols = list(columns) if columns is not None else list(records[0].keys())
    audit_rows(records)
    if fmt == "csv":
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for rec in records:
            w.writerow([_fmt(rec[c]) for c in cols])
        return
    rows = []
    for rec in records:
        row = {}
        for c in cols:
            v = rec[c]
            if isinstance(v, (float, np.floating)):
                v = float(_fmt(v))
            elif isinstance(v, (int, np.integer)):
                v = int(v)
            row[c] = v
        rows.append(row)
    json.dump(rows, fh, indent=1)
    fh.write("\n")


def emit(records, path, fmt: str = "csv", columns=None) -> Path:
    """Write rows to ``path`` as CSV (header + rows) or a JSON array of objects.

    Columns keep the order of ``columns`` or of the first record. Numbers are
    written with 12 significant digits. Rows carrying ``C`` and ``S`` are
    audited against the MEMS boundary first.
    """
    path = Path(path)
    buf = io.StringIO()
    write_table(records, buf, fmt, columns)
    try:
        path.write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(f"could not write {path}: {exc}") from exc
    return path


def _parse(v: str):
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v


def read_table(path) -> list[dict]:
    """Inverse of :func:`emit` for either format (chosen by file content)."""
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith("["):
        return json.loads(text)
    reader = csv.DictReader(text.splitlines())
    return [{k: _parse(v) for k, v in row.items()} for row in reader]
