"""One PASS/FAIL line per acceptance criterion (sub-parts split out)."""

import math
import time

import numpy as np
import pytest

from mems_forge.measures import (
    boundary_gap,
    concurrence,
    family_fidelity,
    linear_entropy,
)
from mems_forge.oracle import REPORTED_OPTIMAL_C, REPORTED_OPTIMAL_S, REPORTED_OPTIMAL_STATE, evolve_composite
from mems_forge.reduced import (
    BlochVector,
    DynamicsParams,
    analytic_vacuum,
    bloch_rhs,
    generator_apply,
    integrate,
)
from mems_forge.states import basis_state, maximally_mixed, validate_state
from mems_forge.sweep import (
    audit_rows,
    find_lambda_opt,
    fidelity_scan,
    grid_values,
    phase_damping_scan,
    thermal_and_squeezed_decay_scan,
)
from mems_forge.unitary import scan_grid, touch_search, unitary_state
from mems_forge.measures import mems_boundary
from mems_forge import oracle

from conftest import random_state

KET01 = basis_state("01")


def _entries(rho):
    return np.array([rho[0, 0].real, rho[1, 1].real, rho[2, 2].real, rho[3, 3].real, rho[1, 2].real])


@pytest.fixture(scope="module")
def optimal_run():
    t0 = time.perf_counter()
    rho = integrate(DynamicsParams(lam=0.8, gamma=10.0), KET01, 100.0).final
    return rho, time.perf_counter() - t0


@pytest.fixture(scope="module")
def lambda_opt():
    t0 = time.perf_counter()
    res = find_lambda_opt("max-fidelity-rho2", gamma=10.0)
    return res, time.perf_counter() - t0


@pytest.fixture(scope="module")
def touch_reports():
    return {fam: touch_search(fam) for fam in ("rho1", "rho2")}


# 1 ---------------------------------------------------------------------------------


def test_c1a_closed_form(acceptance, optimal_run):
    rho, _ = optimal_run
    ref = _entries(analytic_vacuum(DynamicsParams(lam=0.8, gamma=10.0), np.inf))
    err = float(np.max(np.abs(_entries(rho) - ref)))
    ok = err <= 1e-3 and abs(ref[4] + 0.2975) <= 1e-3
    acceptance.record("1a optimal state vs dark-state closed form", ok, f"max diff {err:.2e}")
    assert ok


def test_c1b_quoted_matrix(acceptance, optimal_run):
    rho, _ = optimal_run
    quoted = np.array([REPORTED_OPTIMAL_STATE[k] for k in ("rho0000", "rho0101", "rho1010", "rho1111", "rho0110")])
    err = float(np.max(np.abs(_entries(rho) - quoted)))
    acceptance.record("1b optimal state vs quoted matrix (0.01)", err <= 0.01, f"max diff {err:.4f}")
    assert err <= 0.01


def test_c1c_measures_and_runtime(acceptance, optimal_run):
    rho, dt = optimal_run
    c, s = concurrence(rho), float(linear_entropy(rho))
    ok = abs(c - REPORTED_OPTIMAL_C) <= 0.01 and abs(s - REPORTED_OPTIMAL_S) <= 0.01 and dt < 1.0
    acceptance.record("1c C, S within 0.01 and runtime < 1 s", ok, f"C={c:.4f} S={s:.4f} t={dt:.3f}s")
    assert ok


# 2 ---------------------------------------------------------------------------------


def test_c2_fidelity_headline(acceptance, lambda_opt):
    res, dt = lambda_opt
    ok = res.value > 0.994 and abs(res.r - 2 / 3) <= 0.05 and abs(res.lam - 0.8) <= 0.05 and dt < 10.0
    acceptance.record("2 fidelity headline", ok,
                      f"F={res.value:.6f} r={res.r:.4f} lambda_opt={res.lam:.5f} t={dt:.2f}s")
    assert ok


# 3 ---------------------------------------------------------------------------------


def test_c3a_mixed_floor(acceptance):
    f = float(family_fidelity(maximally_mixed(), "rho2", 2 / 3))
    ok = abs(f - 0.697) <= 0.001
    acceptance.record("3a F(I/4, rho2(2/3)) = 0.697", ok, f"F={f:.5f}")
    assert ok


def test_c3b_thermal_scan_end(acceptance):
    res = thermal_and_squeezed_decay_scan([1.0], [0.0])
    f = float(res.F_thermal[0])
    ok = abs(f - 0.70) <= 0.05
    acceptance.record("3b thermal F(nbar=1) within 0.05 of 0.70", ok, f"F={f:.5f}")
    assert ok


# 4 ---------------------------------------------------------------------------------


def test_c4a_death_threshold(acceptance):
    res = phase_damping_scan(grid_values(0.001, 0.1, 0.001))
    first = res.first_zero
    ok = first is not None and 0.002 <= first <= 0.005
    acceptance.record("4a first Gamma with C = 0 in [0.002, 0.005]", ok,
                      f"first Gamma with C <= {res.zero_threshold:g}: {first}; "
                      f"C(0.003)={res.C[2]:.3f} C(0.005)={res.C[4]:.3f}")
    assert ok


def test_c4b_early_drop(acceptance):
    res = phase_damping_scan([0.0, 0.001])
    drop = 1 - res.C[1] / res.C[0]
    acceptance.record("4b C(0.001) at least 10% below C(0)", drop >= 0.1,
                      f"C(0)={res.C[0]:.4f} C(0.001)={res.C[1]:.4f} drop={drop:.1%}")
    assert drop >= 0.1


# 5 ---------------------------------------------------------------------------------


def test_c5_squeezing_null(acceptance):
    grid = [0.0, 1e-3, 0.01, 0.1, 0.5, 1.0]
    res = thermal_and_squeezed_decay_scan([1.0], grid)
    fs = res.F_squeezed
    ok = bool(np.argmax(fs) == 0 and np.all(fs[1:] < fs[0]) and fs[-1] > res.F_thermal[0])
    acceptance.record("5 squeezing never helps, decays slower than thermal", ok,
                      "F(N)=" + ", ".join(f"{f:.5f}" for f in fs) + f"; thermal(1)={res.F_thermal[0]:.5f}")
    assert ok


# 6 ---------------------------------------------------------------------------------


def test_c6a_max_concurrence(acceptance, touch_reports):
    cmax = touch_reports["rho1"].max_concurrence_grid
    acceptance.record("6a max grid concurrence >= 0.999", cmax >= 0.999, f"max C={cmax:.5f}")
    assert cmax >= 0.999


def test_c6b_rho1_contact(acceptance, touch_reports):
    rep = touch_reports["rho1"]
    ok = rep.refined_infidelity <= 1e-3
    acceptance.record("6b refined contact with rho1", ok,
                      f"1-F={rep.refined_infidelity:.2e} at (lam, tau, r)=" +
                      "({:.4f}, {:.3f}, {:.4f})".format(*rep.refined_point))
    assert ok


def test_c6c_rho2_no_contact(acceptance, touch_reports):
    rep = touch_reports["rho2"]
    best = min(rep.grid_min_infidelity, rep.refined_infidelity)
    ok = best > 1e-3
    acceptance.record("6c no contact with rho2", ok,
                      f"grid min 1-F={rep.grid_min_infidelity:.2e} at {rep.grid_argmin}; refined {rep.refined_infidelity:.2e}")
    assert ok


# 7 ---------------------------------------------------------------------------------


@pytest.mark.parametrize("gamma, tol", [(10.0, 0.02), (100.0, 0.002)])
def test_c7_elimination(acceptance, gamma, tol):
    t0 = time.perf_counter()
    full = evolve_composite(0.8, gamma, 0.0, KET01, 100.0, nmax=1, sample_every=10**9).final
    dt = time.perf_counter() - t0
    red = integrate(DynamicsParams(lam=0.8, gamma=gamma), KET01, 100.0).final
    diff = float(np.max(np.abs(full - red)))
    ok = diff <= tol and dt < 60.0
    acceptance.record(f"7 full vs reduced at gamma={gamma:g} within {tol}", ok, f"max diff {diff:.2e}, oracle {dt:.2f}s")
    assert ok


# 8 ---------------------------------------------------------------------------------


def test_c8_transcription(acceptance):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        p = DynamicsParams(lam=float(rng.uniform(0, 2)), gamma=float(rng.uniform(5, 50)), nbar=float(rng.uniform(0, 1)))
        rho = random_state(rng)
        a = BlochVector.from_state(generator_apply(p, rho)).as_array()
        b = bloch_rhs(p, BlochVector.from_state(rho)).as_array()
        worst = max(worst, float(np.max(np.abs(a - b))))
    acceptance.record("8 generator equals component equations", worst <= 1e-12, f"max diff {worst:.1e}")
    assert worst <= 1e-12


# 9 ---------------------------------------------------------------------------------


def test_c9_physicality(acceptance):
    gaps = []
    states = []
    lams, taus = grid_values(0, 2, 0.05), grid_values(0, 40, 0.05)
    grid = scan_grid(lams, taus)
    gaps.append(np.min(boundary_gap((grid["C"].ravel(), grid["S"].ravel()))))
    states.append(unitary_state(lams[:, None], taus[None, :]).reshape(-1, 4, 4))
    for p in (DynamicsParams(lam=0.8), DynamicsParams(lam=0.8, nbar=0.8), DynamicsParams(lam=1 / math.sqrt(3)),
              DynamicsParams(lam=0.8, squeeze_n=0.5, squeeze_m=math.sqrt(0.75)),
              DynamicsParams(lam=0.8, dephasing=0.003)):
        tr = integrate(p, KET01, 100.0, sample_every=10)
        gaps.append(audit_rows(tr.rows()))
        states.append(tr.states)
    pd = phase_damping_scan(grid_values(0.001, 0.1, 0.001))
    gaps.append(audit_rows(pd.rows()))
    orc = oracle.evolve_composite(0.8, 10.0, 0.0, KET01, 100.0, nmax=1, sample_every=100)
    gaps.append(audit_rows(orc.rows()))
    states.append(orc.states)
    gaps.append(audit_rows([pt._asdict() for pt in mems_boundary(2001)]))
    res = find_lambda_opt("max-C-subject-to-S")
    gaps.append(audit_rows([{"C": res.C, "S": res.S}]))
    fidelity_scan([0.0, 2 / 3], sample_every=1000)
    worst = float(min(gaps))
    for s in states:
        validate_state(s)
    ok = worst >= -1e-6
    acceptance.record("9 every emitted (C, S) under the boundary, states physical", ok,
                      f"min gap {worst:.2e} over {sum(len(s) for s in states)} states")
    assert ok


# 10 --------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def settling(lambda_opt):
    lam = lambda_opt[0].lam
    tr = integrate(DynamicsParams(lam=lam), KET01, 100.0)
    return tr, tr.concurrence(), np.asarray(tr.linear_entropy())


def test_c10a_settled_by_30(acceptance, settling):
    tr, c, _ = settling
    late = tr.taus >= 30
    dev = float(np.max(np.abs(c[late] - c[-1])))
    settle = float(tr.taus[np.nonzero(np.abs(c - c[-1]) > 1e-3)[0][-1] + 1])
    acceptance.record("10a |C(tau) - C(100)| <= 1e-3 for tau >= 30", dev <= 1e-3,
                      f"max dev {dev:.2e}; settles below 1e-3 from tau={settle:.2f}")
    assert dev <= 1e-3


def test_c10b_no_fold_back(acceptance, settling):
    tr, c, s = settling
    after = tr.taus >= 5
    mono = float(np.min(np.diff(c[after])))
    step = float(np.max(np.hypot(np.diff(c[after]), np.diff(s[after]))))
    ok = mono >= -1e-12 and step < 1e-3
    acceptance.record("10b trajectory approaches the fixed point without folding back", ok,
                      f"min dC={mono:.1e}, max (C,S) step {step:.1e}")
    assert ok
