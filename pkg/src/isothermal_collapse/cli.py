"""Command-line interface for constructing and checking similarity solutions."""

import argparse
import logging
import multiprocessing as mp
from dataclasses import replace
from pathlib import Path

import numpy as np
from tqdm import tqdm

from .config import RunConfig, get_settings
from .density_profiles import perturb_outer
from .exceptions import AssumptionViolated, InvalidParameters, ReachedOrigin, SimilarityError
from .flow_field import (
    TRACE_KINDS,
    SimilaritySolution,
    build_solution,
    energy_integral,
    evaluate,
    field_slice,
    mass_integral,
    moment_integral,
    trace,
)
from .fv_crosscheck import RIEMANN_FLUXES, FVConfig, advance, convergence_study, init_from_similarity
from .io import (
    export_density,
    export_trace,
    export_velocity,
    load_manifest,
    write_csv,
    write_error,
    write_json,
    write_manifest,
)
from .similarity_core import SimilarityParams, critical_points
from .velocity_profiles import build_kink, ustar_bound
from .weak_verifier import run_verification

logger = logging.getLogger(__name__)

# CLI destination -> RunConfig key, for flags that override config-file values
_OVERRIDES = {
    "m": "m",
    "beta": "beta",
    "a": "a",
    "omega0": "omega0",
    "tol": "ode_tol",
    "out": "out",
    "xi_min": "xi_min",
    "xi_max": "xi_max",
    "x0": "x0",
    "beta_min": "beta_min",
    "beta_max": "beta_max",
    "beta_steps": "beta_steps",
    "times": "times",
    "r_max": "r_max",
    "r_points": "r_points",
    "r_bar": "r_bar",
    "kind": "kind",
    "t0": "t0",
    "r0": "r0",
    "t1": "t1",
    "cells": "cells",
    "cfl": "cfl",
    "t_start": "t_start",
    "t_end": "t_end",
}


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Config file (if any) first, then every flag that was given."""
    if args.config:
        config = RunConfig.from_file(args.config)
        logger.info(f"Run configuration loaded from {args.config}")
    else:
        config = RunConfig(out=get_settings().output_dir)
    overrides = {key: getattr(args, dest, None) for dest, key in _OVERRIDES.items()}
    return config.with_overrides(**overrides)


def _params(config: RunConfig) -> SimilarityParams:
    return SimilarityParams(m=config.m, beta=config.beta, a=config.a)


def _solution(args: argparse.Namespace, config: RunConfig) -> SimilaritySolution:
    """Load the solution from --manifest or construct it from the configuration."""
    if getattr(args, "manifest", None):
        return load_manifest(args.manifest)
    return build_solution(
        _params(config),
        omega0=config.omega0,
        tolerances=config.tolerances,
        xi_min=config.xi_min,
        xi_max=config.xi_max,
        x0=config.x0,
    )


# --- inspect ---


def cmd_inspect(args: argparse.Namespace, config: RunConfig) -> int:
    """Print the critical point P_w, its eigen-data and the closed-form U* bound."""
    params = _params(config)
    cp = critical_points(params)
    bound = ustar_bound(params)
    print(f"m={params.m}  beta={params.beta}  a={params.a}")
    print(f"xi_w          = {cp.xi_w:.12g}")
    print(f"U_w           = {cp.U_w:.12g}")
    print(f"lambda_plus   = {cp.lambda_plus:.12g}")
    print(f"lambda_minus  = {cp.lambda_minus:.12g}")
    print(f"dir_plus      = ({cp.dir_plus[0]:.6g}, {cp.dir_plus[1]:.12g})")
    print(f"dir_minus     = ({cp.dir_minus[0]:.6g}, {cp.dir_minus[1]:.12g})")
    print(f"ustar_bound   = {bound:.12g}")
    return 0


# --- sweep ---


def sweep_row(row_data: tuple) -> dict:
    """
    Admissibility of one beta (function for multiprocessing).

    Args:
        row_data: Tuple containing (m, beta, a, tolerances, xi_min)

    Returns:
        Dict with beta, ustar_bound, bound_admissible, u_star, u_star_error, admissible, error
    """
    m, beta, a, tolerances, xi_min = row_data
    params = SimilarityParams(m=m, beta=beta, a=a)
    bound = ustar_bound(params)
    row = {
        "beta": beta,
        "ustar_bound": bound,
        "bound_admissible": int(bound <= 1e-12 * a),
        "u_star": None,
        "u_star_error": None,
        "admissible": 0,
        "error": "",
    }
    try:
        _, u_star, u_star_error = build_kink(params, tolerances, xi_min)
        row.update(u_star=u_star, u_star_error=u_star_error, admissible=1)
    except AssumptionViolated as e:
        row.update(u_star=e.u_star, error=type(e).__name__)
    except SimilarityError as e:
        row["error"] = type(e).__name__
    return row


def beta_grid(config: RunConfig) -> np.ndarray:
    """Interior grid of (-m, 0) unless beta_min/beta_max are given."""
    m = config.m
    lo = config.beta_min if config.beta_min is not None else -m + m / (config.beta_steps + 1)
    hi = config.beta_max if config.beta_max is not None else -m / (config.beta_steps + 1)
    if not -m < lo <= hi < 0:
        raise InvalidParameters(f"β out of (−m,0): sweep range [{lo}, {hi}] for m={m}")
    return np.linspace(lo, hi, config.beta_steps)


def cmd_sweep(args: argparse.Namespace, config: RunConfig) -> int:
    """Sufficient bound and computed U* over a beta grid; inadmissible rows are reported, not fatal."""
    grid = beta_grid(config)
    rows_data = [(config.m, float(beta), config.a, config.tolerances, config.xi_min) for beta in grid]
    num_processes = args.processes or get_settings().workers or mp.cpu_count()
    logger.info(f"Sweeping {len(grid)} values of beta for m={config.m} with {num_processes} processes")

    rows = []
    if num_processes == 1:
        rows = [sweep_row(data) for data in tqdm(rows_data, desc="Sweep", unit="beta")]
    else:
        with mp.Pool(processes=num_processes) as pool:
            chunk_size = max(1, len(rows_data) // (num_processes * 4))
            with tqdm(total=len(rows_data), desc="Sweep", unit="beta") as pbar:
                for row in pool.imap(sweep_row, rows_data, chunksize=chunk_size):
                    rows.append(row)
                    pbar.update(1)

    for row in rows:
        if not row["admissible"]:
            logger.warning(f"beta={row['beta']:.6g}: inadmissible ({row['error'] or 'no U*'})")
    admissible = [row["beta"] for row in rows if row["admissible"]]
    if admissible:
        logger.info(f"{len(admissible)}/{len(rows)} admissible, beta in [{min(admissible):.6g}, {max(admissible):.6g}]")
    u_values = np.array([row["u_star"] for row in rows if row["u_star"] is not None])
    if u_values.size > 2:
        steps = np.sign(np.diff(u_values))
        trend = "monotone" if np.all(steps == steps[0]) else "not monotone"
        logger.info(f"U* over the grid is {trend}")

    columns = {key: [row[key] for row in rows] for key in rows[0]}
    path = write_csv(Path(config.out) / "sweep.csv", columns, {"m": config.m, "a": config.a})
    logger.info(f"Output: {path}")
    return 0


# --- construct / eval ---


def cmd_construct(args: argparse.Namespace, config: RunConfig) -> int:
    """Build the solution and write solution.json with the branch CSVs."""
    sol = _solution(args, config)
    out = Path(config.out)
    write_manifest(out / "solution.json", sol)
    export_velocity(sol, out)
    export_density(sol, out)
    print(f"xi_w={sol.xi_w:.12g}  xi_s={sol.xi_s:.12g}  U*={sol.u_star:.12g}")
    print(f"C_-={sol.c_minus:.12g}  Omega0'={sol.density.Omega0_prime:.12g}")
    logger.info(f"Output: {out}")
    return 0


def cmd_eval(args: argparse.Namespace, config: RunConfig) -> int:
    """Field slices at each requested time and the integral time series up to r_bar."""
    sol = _solution(args, config)
    out = Path(config.out)
    r_grid = np.linspace(config.r_max / config.r_points, config.r_max, config.r_points)
    metadata = {**sol.params.to_dict(), "omega0": sol.density.Omega0}
    for i, t in enumerate(config.times):
        fields = field_slice(sol, t, r_grid)
        write_csv(out / f"slice_{i:02d}.csv", fields, {**metadata, "t": t})

    integrals: dict[str, list] = {"t": [], "mass": [], "moment_1": [], "moment_2": [], "energy": []}
    for t in tqdm(config.times, desc="Integrals", unit="time"):
        integrals["t"].append(t)
        integrals["mass"].append(mass_integral(sol, t, config.r_bar))
        integrals["moment_1"].append(moment_integral(sol, t, config.r_bar, 1))
        integrals["moment_2"].append(moment_integral(sol, t, config.r_bar, 2))
        integrals["energy"].append(energy_integral(sol, t, config.r_bar))
    write_csv(out / "integrals.csv", integrals, {**metadata, "r_bar": config.r_bar})
    logger.info(f"{len(config.times)} slices written to {out}")
    return 0


# --- verify ---


def cmd_verify(args: argparse.Namespace, config: RunConfig) -> int:
    """Run every check; exit 1 when any of them fails."""
    sol = _solution(args, config)
    config = config.with_overrides(**sol.params.to_dict(), omega0=sol.density.Omega0)
    if args.perturb_omega_plus:
        factor = 1.0 + args.perturb_omega_plus
        logger.warning(f"Outer density scaled by {factor} before verification")
        sol = replace(sol, density=perturb_outer(sol.density, factor))
    report = run_verification(sol, config, include_fv=args.include_fv)
    path = write_json(Path(config.out) / "verification.json", report.to_dict())
    print(report.format_summary())
    logger.info(f"Report: {path}")
    return 0 if report.passed else 1


# --- trace ---


def cmd_trace(args: argparse.Namespace, config: RunConfig) -> int:
    """Integrate one characteristic or particle path and write it as CSV."""
    sol = _solution(args, config)
    path = Path(config.out) / f"trace_{config.kind}.csv"
    try:
        result = trace(sol, config.kind, config.t0, config.r0, config.t1, allow_origin=args.allow_origin)
    except ReachedOrigin as e:
        if e.trace is not None:
            export_trace(path, sol, e.trace)
            logger.info(f"Partial trace written to {path}")
        raise
    export_trace(path, sol, result)
    for event, t, r in result.crossings:
        print(f"{event:<10} t={t:.10g}  r={r:.10g}")
    logger.info(f"Output: {path}")
    return 0


# --- fv ---


def cmd_fv(args: argparse.Namespace, config: RunConfig) -> int:
    """Grid convergence table plus snapshots of the finest run at the requested times."""
    sol = _solution(args, config)
    out = Path(config.out)
    base = replace(FVConfig.from_run_config(sol, config), flux=args.flux)
    rows = convergence_study(sol, config.cells, base, show_progress=True)
    columns = {key: [row[key] for row in rows] for key in rows[0]}
    write_csv(out / "fv_convergence.csv", columns, {**sol.params.to_dict(), "flux": base.flux, "t_end": base.t_end})

    snapshot_times = sorted(t for t in config.times if base.t_start < t <= base.t_end)
    state = init_from_similarity(sol, base)
    for i, t in enumerate(snapshot_times):
        state = advance(state, base, sol, t_end=t)
        rho_exact, u_exact = evaluate(sol, state.t, state.centers)
        snapshot = {"r": state.centers, "rho": state.rho, "u": state.u, "rho_exact": rho_exact, "u_exact": u_exact}
        write_csv(out / f"fv_snapshot_{i:02d}.csv", snapshot, {"t": state.t, "cells": base.cells, "flux": base.flux})
    logger.info(f"Convergence table and {len(snapshot_times)} snapshots written to {out}")
    return 0


COMMANDS = {
    "inspect": cmd_inspect,
    "sweep": cmd_sweep,
    "construct": cmd_construct,
    "eval": cmd_eval,
    "verify": cmd_verify,
    "trace": cmd_trace,
    "fv": cmd_fv,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=int, help="Dimension parameter m = n - 1 (1 or 2)")
    common.add_argument("--beta", type=float, help="Similarity exponent, -m < beta < 0")
    common.add_argument("--a", type=float, help="Sound speed")
    common.add_argument("--omega0", type=float, help="Density amplitude Omega(0-) < 0")
    common.add_argument("--tol", type=float, help="ODE relative tolerance")
    common.add_argument("--out", "-o", help="Output directory")
    common.add_argument("--config", "-c", help="Flat JSON run configuration (flags win)")
    common.add_argument("--verbose", "-v", action="store_true", help="Enable verbose logging")

    solution = argparse.ArgumentParser(add_help=False)
    solution.add_argument("--manifest", help="Reuse a solution.json instead of constructing")
    solution.add_argument("--xi-min", type=float, help="Lower truncation of the kink branch")
    solution.add_argument("--xi-max", type=float, help="Upper truncation of the outer branch")
    solution.add_argument("--x0", type=float, help="Start of the outer density integration in x = 1/xi")

    parser = argparse.ArgumentParser(
        description="Converging-diverging similarity flows of the radial isothermal Euler equations",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Critical-point data and the U* bound
  isothermal-collapse inspect --m 2 --beta -1

  # Admissibility over a beta grid
  isothermal-collapse sweep --m 1 --beta-steps 40 -o sweeps/m1

  # Construct once, verify from the manifest
  isothermal-collapse construct --m 2 --beta -1 -o runs/m2
  isothermal-collapse verify --manifest runs/m2/solution.json -o runs/m2

Exit codes: 0 success, 1 verification failed, 2 invalid input, 3 construction failure.

Environment variables:
  LOG_LEVEL               Logging level (default: INFO)
  ISOCOLLAPSE_WORKERS     Sweep pool size (default: CPU count)
  ISOCOLLAPSE_OUTPUT_DIR  Default output directory (default: output)
        """,
    )
    subparsers = parser.add_subparsers(dest="command", help="Command")

    subparsers.add_parser("inspect", parents=[common], help="Print critical-point data")

    sweep_parser = subparsers.add_parser("sweep", parents=[common], help="Admissibility over a beta grid")
    sweep_parser.add_argument("--beta-min", type=float, help="Smallest beta of the grid")
    sweep_parser.add_argument("--beta-max", type=float, help="Largest beta of the grid")
    sweep_parser.add_argument("--beta-steps", type=int, help="Number of grid points")
    sweep_parser.add_argument("--xi-min", type=float, help="Lower truncation of the kink branch")
    sweep_parser.add_argument("--processes", type=int, default=None, help="Number of processes")

    subparsers.add_parser("construct", parents=[common, solution], help="Build and export a solution")

    eval_parser = subparsers.add_parser("eval", parents=[common, solution], help="Field slices and integrals")
    eval_parser.add_argument("--times", type=float, nargs="+", help="Slice times")
    eval_parser.add_argument("--r-max", type=float, help="Largest radius of the slices")
    eval_parser.add_argument("--r-points", type=int, help="Radii per slice")
    eval_parser.add_argument("--r-bar", type=float, help="Radius of the integral time series")

    verify_parser = subparsers.add_parser("verify", parents=[common, solution], help="Run the verification checks")
    verify_parser.add_argument("--r-bar", type=float, help="Radius of the continuity checks")
    verify_parser.add_argument("--include-fv", action="store_true", help="Add the finite-volume cross-check")
    verify_parser.add_argument("--cells", type=int, nargs="+", help="Finite-volume grid sizes")
    verify_parser.add_argument(
        "--perturb-omega-plus", type=float, default=0.0, help="Scale the outer density by 1 + EPS first"
    )

    trace_parser = subparsers.add_parser("trace", parents=[common, solution], help="Characteristic or particle path")
    trace_parser.add_argument("--kind", choices=sorted(TRACE_KINDS), help="Path type")
    trace_parser.add_argument("--t0", type=float, help="Start time")
    trace_parser.add_argument("--r0", type=float, help="Start radius")
    trace_parser.add_argument("--t1", type=float, help="End time")
    trace_parser.add_argument("--allow-origin", action="store_true", help="Stop quietly at r = 0")

    fv_parser = subparsers.add_parser("fv", parents=[common, solution], help="Finite-volume cross-check")
    fv_parser.add_argument("--cells", type=int, nargs="+", help="Grid sizes of the convergence study")
    fv_parser.add_argument("--cfl", type=float, help="Courant number")
    fv_parser.add_argument("--t-start", type=float, help="Initial time (< 0)")
    fv_parser.add_argument("--t-end", type=float, help="Final time")
    fv_parser.add_argument("--times", type=float, nargs="+", help="Snapshot times")
    fv_parser.add_argument("--flux", default="hll", choices=sorted(RIEMANN_FLUXES), help="Numerical flux")

    return parser


def main(argv: list[str] | None = None):
    parser = build_parser()
    args = parser.parse_args(argv)

    # Configure logging
    settings = get_settings()
    log_level = logging.DEBUG if getattr(args, "verbose", False) else getattr(logging, settings.log_level, logging.INFO)
    logging.basicConfig(
        level=log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )

    if args.command not in COMMANDS:
        parser.print_help()
        raise SystemExit(2)

    out = args.out or settings.output_dir
    try:
        config = load_run_config(args)
        out = config.out
        status = COMMANDS[args.command](args, config)
    except SimilarityError as e:
        logger.error(f"{type(e).__name__}: {e}")
        path = write_error(out, e, args.command)
        logger.info(f"Error report: {path}")
        raise SystemExit(e.exit_code)
    except Exception as e:
        logger.exception(f"Error: {e}")
        raise SystemExit(3)
    if status:
        raise SystemExit(status)


if __name__ == "__main__":
    mp.freeze_support()
    main()
