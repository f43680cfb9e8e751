"""Command-line driver: one subcommand per sweep mode, tables to a file or stdout."""

from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from . import measures, oracle, reduced, sweep, unitary
from .errors import ContractError, NumericalError
from .states import FAMILY_RANGES, basis_state

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _grid(text: str):
    try:
        axis, bounds = text.split("=", 1)
        start, stop, step = (float(x) for x in bounds.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like AXIS=START:STOP:STEP, got {text!r}") from None
    return axis.strip(), (start, stop, step)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mems-forge", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lam", type=float, help="coupling ratio g2/g1")
    common.add_argument("--gamma", type=float, help="cavity decay in units of g1")
    common.add_argument("--nbar", type=float, help="thermal occupation of the bath")
    common.add_argument("--Gamma", dest="dephasing", type=float, help="dephasing rate in units of g1")
    common.add_argument("--gamma-q", dest="emission", type=float, help="intrinsic qubit decay in units of g1")
    common.add_argument("--N", dest="squeeze_n", type=float, help="squeezed-bath N")
    common.add_argument("--M", dest="squeeze_m", type=float, help="squeezed-bath M (default: ideal squeezing)")
    common.add_argument("--squeeze-model", choices=reduced.SQUEEZE_MODELS, help="how N, M enter the generator")
    common.add_argument("--tau-max", type=float, help="final dimensionless time")
    common.add_argument("--dtau", type=float, help="integration step")
    common.add_argument("--sample-every", type=int, default=None, help="integration steps between samples")
    common.add_argument("--nmax", type=int, help="Fock truncation for full-oracle")
    common.add_argument("--grid", type=_grid, action="append", default=[],
                        help="AXIS=START:STOP:STEP; axes: lambda, tau, nbar, Gamma, N, r")
    common.add_argument("--samples", type=int, default=2001, help="boundary samples")
    common.add_argument("--objective", choices=sweep.OBJECTIVES, default="max-fidelity-rho2")
    common.add_argument("--preset", help="bundled preset name or JSON file")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--workers", type=int, default=None, help="worker threads for sweeps")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in sweep.MODES:
        sub.add_parser(mode, parents=[common])
    return parser


def _params(args, preset: dict) -> reduced.DynamicsParams:
    overrides = {k: getattr(args, k) for k in ("lam", "gamma", "nbar", "dephasing", "emission", "squeeze_n", "squeeze_m")}
    if args.squeeze_model:
        overrides["squeeze_model"] = args.squeeze_model
    n = overrides["squeeze_n"] if overrides["squeeze_n"] is not None else preset.get("N")
    if n and overrides["squeeze_m"] is None and "M" not in preset:
        overrides["squeeze_m"] = reduced.ideal_squeezing(float(n))
    return reduced.params_from_mapping(preset, **overrides)


def _write(rows, args, columns=None):
    if args.out:
        sweep.emit(rows, args.out, args.fmt, columns)
    else:
        sweep.write_table(rows, sys.stdout, args.fmt, columns)


def run(args) -> int:
    preset = reduced.load_preset(args.preset) if args.preset else {}
    cfg = sweep.SweepConfig(mode=args.mode, grids=dict(args.grid), out=args.out, preset=args.preset, fmt=args.fmt)
    p = _params(args, preset)
    mode = cfg.mode

    if mode == "unitary":
        rows = []
        taus = cfg.values("tau") if "tau" in dict(args.grid) else sweep.grid_values(0.0, args.tau_max or 40.0, 0.01)
        for lam in cfg.values("lambda"):
            rho = unitary.unitary_state(lam, taus)
            cs = measures.x_state_concurrence(rho)
            ss = measures.linear_entropy(rho)
            rows += [{"lambda": float(lam), "tau": float(t), "C": float(c), "S": float(s)}
                     for t, c, s in zip(taus, np.atleast_1d(cs), np.atleast_1d(ss))]
        _write(rows, args, ("lambda", "tau", "C", "S"))
    elif mode == "dissipative":
        tau_max = args.tau_max or cfg.grids["tau"][1]
        dtau = args.dtau or reduced.DEFAULT_DTAU
        every = args.sample_every or max(1, int(round(cfg.grids["tau"][2] / dtau)))
        traj = reduced.integrate(p, basis_state("01"), tau_max, dtau=dtau, sample_every=every)
        _write(traj.rows(), args, reduced.TRAJECTORY_COLUMNS)
    elif mode == "phase-damping":
        res = sweep.phase_damping_scan(cfg.values("Gamma"), lam=p.lam, gamma=p.gamma,
                                       tau=args.tau_max or 100.0, workers=args.workers)
        print(f"# smallest Gamma with C <= {res.zero_threshold:g}: {res.first_zero}", file=sys.stderr)
        _write(res.rows(), args, ("Gamma", "C", "S"))
    elif mode == "squeezed":
        nbars = cfg.values("nbar") if "nbar" in dict(args.grid) else np.array([0.0, 0.2, 0.4, 0.6, 0.8, 1.0])
        res = sweep.thermal_and_squeezed_decay_scan(nbars, cfg.values("N"), lam=p.lam, gamma=p.gamma,
                                                    tau=args.tau_max or 100.0, squeeze_model=p.squeeze_model,
                                                    workers=args.workers)
        _write(res.rows(), args, ("bath", "x", "F"))
    elif mode == "full-oracle":
        tau_max = args.tau_max or cfg.grids["tau"][1]
        traj = oracle.evolve_composite(p.lam, p.gamma, p.nbar, basis_state("01"), tau_max, dtau=args.dtau,
                                       nmax=args.nmax, sample_every=args.sample_every or 1000)
        _write(traj.rows(), args, oracle.ORACLE_COLUMNS)
    elif mode == "boundary":
        if args.samples < 2:
            raise ContractError("--samples must be at least 2")
        rows = [pt._asdict() for pt in measures.mems_boundary(args.samples)]
        _write(rows, args, ("r", "family", "C", "S"))
    elif mode == "fidelity-scan":
        rs = cfg.values("r")
        rs = rs[rs <= FAMILY_RANGES["rho2"][1] + 1e-9]
        every = args.sample_every or 100
        rows = sweep.fidelity_scan(rs, lam=p.lam, gamma=p.gamma, tau_max=args.tau_max or 100.0,
                                   dtau=args.dtau or reduced.DEFAULT_DTAU, sample_every=every)
        _write(rows, args, ("tau", "r", "F"))
    elif mode == "lambda-opt":
        res = sweep.find_lambda_opt(args.objective, gamma=p.gamma)
        row = {"objective": res.objective, "lambda": res.lam, "value": res.value,
               "r": res.r if res.r is not None else "", "C": res.C, "S": res.S,
               "fallback": int(res.fallback)}
        _write([row], args, tuple(row))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always", reduced.BadCavityWarning)
            return run(args)
    except ContractError as exc:
        print(f"mems-forge: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"mems-forge: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"mems-forge: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
