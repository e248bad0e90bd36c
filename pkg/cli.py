"""
Command-line entry point for the PL-duality lab.

Subcommands:
    simulate   exact and/or RK4 trajectories of one dual system
    verify     property suites, written as a JSON report
    factorize  Iwasawa factors of a matrix or of the AKS exponential curve
    compare    momentum-image agreement of trajectory files

Exit status: 0 success, 1 validation or property failure, 2 bad input.
"""

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence
import numpy as np
from loguru import logger
from pydantic import ValidationError

from aks import AksCurve, aks_factors, aks_factors_generic, exact_trajectory, exp_curve
from algebra import Su2Vec, as_mat2c
from artifact_store import get_artifact_store
from config import settings
from errors import InputError, PltError, exit_code_for
from groups import iwasawa_factorize
from momentum_join import compare_files
from oracle import residual_report, rk4_integrate
from schemas import FactorizeResult, RunConfig, Trajectory
from state_builder import build_initial_state
from trajectory_io import render_trajectory, write_trajectory
from verification import SUITES, run_verification


def configure_logging(level: Optional[str] = None) -> None:
    """Send logs to stderr so stdout carries data only."""
    logger.remove()
    logger.add(sys.stderr, level=(level or settings.log_level).upper())


def _float_tuple(size: int, name: str):
    def parse(text: str) -> tuple[float, ...]:
        try:
            values = tuple(float(v) for v in text.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be {size} comma-separated numbers, got {text!r}")
        if len(values) != size:
            raise argparse.ArgumentTypeError(f"{name} must have {size} components, got {len(values)}")
        return values
    return parse


def _matrix(text: str) -> np.ndarray:
    """Rows separated by ';', entries by ',', each entry a Python complex literal."""
    try:
        rows = [[complex(entry.strip().replace("i", "j")) for entry in row.split(",")] for row in text.split(";")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Cannot read matrix {text!r}; use e.g. '1,0;1,1'")
    try:
        return as_mat2c(rows)
    except InputError as e:
        raise argparse.ArgumentTypeError(str(e))


def _emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    tmp = output.with_name(f".{output.name}.tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(output)
    logger.info(f"Wrote {output}")


# ===== simulate =====

def _deviation(exact: Trajectory, numeric: Trajectory) -> np.ndarray:
    return np.max(np.abs(exact.state_array() - numeric.state_array()), axis=1)


def cmd_simulate(config: RunConfig, residuals: Optional[Path] = None) -> int:
    """
    Run one simulation request and write its trajectory.

    Returns:
        Exit status
    """
    system, state0 = build_initial_state(config)
    deviation = None

    if config.method == "rk4":
        traj = rk4_integrate(system, state0, config.t_end, h=config.rk4_step, samples=config.samples)
    else:
        traj = exact_trajectory(system, state0, config.t_end, config.samples, config.tolerance)
        if config.method == "both":
            numeric = rk4_integrate(system, state0, config.t_end, h=config.rk4_step, samples=config.samples)
            deviation = _deviation(traj, numeric)
            logger.info(f"Max exact vs RK4 deviation: {deviation.max():.3e}")

    if config.output is not None:
        write_trajectory(traj, config.output, config.format, deviation)
    else:
        sys.stdout.write(render_trajectory(traj, config.format, deviation))

    if config.save_artifact:
        artifact_id = get_artifact_store().save(traj, deviation)
        logger.info(f"Saved artifact {artifact_id}")

    if residuals is not None:
        if len(traj.samples) < 3:
            raise InputError("Residual reports need at least 3 samples")
        _emit(residual_report(traj).model_dump_json(indent=2) + "\n", residuals)

    logger.info(f"simulate {config.system} finished: {len(traj.samples)} samples, method {config.method}")
    return 0


# ===== verify =====

def cmd_verify(suites: Sequence[str], seed: int, samples: Optional[int], output: Optional[Path]) -> int:
    report = run_verification(suites, seed, samples)
    _emit(report.model_dump_json(indent=2) + "\n", output)
    for failure in report.failures():
        print(
            f"FAILED {failure.suite}.{failure.name}: max defect {failure.max_defect:.3e} "
            f"(tolerance {failure.tolerance:g}) at sample {failure.worst_sample}, seed {failure.seed}",
            file=sys.stderr,
        )
    return 0 if report.passed else 1


# ===== factorize =====

def cmd_factorize(
    matrix: Optional[np.ndarray],
    curve: Optional[Sequence[float]],
    t: float,
) -> int:
    if curve is not None:
        X = Su2Vec.from_array(curve)
        target = exp_curve(X, t)
        g, b = aks_factors_generic(X, t)
        result = FactorizeResult(
            g=g, b=b, reconstruction_error=float(np.max(np.abs(g.matrix() @ b.matrix() - target)))
        )
        if AksCurve(X0=X).closed_form_valid:
            g_closed, b_closed = aks_factors(X, t)
            agreement = max(
                abs(g_closed.alpha - g.alpha), abs(g_closed.beta - g.beta),
                abs(b_closed.a - b.a), abs(b_closed.upper - b.upper),
            )
            result = result.model_copy(update={
                "closed_form_g": g_closed, "closed_form_b": b_closed, "closed_form_agreement": agreement,
            })
        else:
            logger.warning(f"det X = {X.det():.17g}: closed forms skipped")
    else:
        g, b = iwasawa_factorize(matrix)
        result = FactorizeResult(
            g=g, b=b, reconstruction_error=float(np.max(np.abs(g.matrix() @ b.matrix() - matrix)))
        )

    sys.stdout.write(result.model_dump_json(indent=2) + "\n")
    return 0


# ===== compare =====

def cmd_compare(paths: Sequence[Path], tolerance: float) -> int:
    report = compare_files(paths, tolerance)
    sys.stdout.write(report.model_dump_json(indent=2) + "\n")
    return 0 if report.passed else 1


# ===== Parser =====

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log-level", default=None, help="loguru level for stderr (default from PLT_LOG_LEVEL)")

    parser = argparse.ArgumentParser(prog="pltlab", description="Poisson-Lie T-duality laboratory on SL(2,C)")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[common], help="Simulate one dual system")
    sim.add_argument("--system", required=True, choices=["toda", "r2", "tb", "tsu2", "orbit"])
    sim.add_argument("--q0", type=float)
    sim.add_argument("--p0", type=float)
    sim.add_argument("--mu", type=float)
    sim.add_argument("--eps", type=float)
    sim.add_argument("--theta", type=float, help="Leaf angle in radians")
    sim.add_argument("--a", type=float)
    sim.add_argument("--b", type=float)
    sim.add_argument("--c", type=float)
    sim.add_argument("--eta", type=_float_tuple(3, "--eta"), help="Covector components, e.g. 0.5,0,1")
    sim.add_argument("--alpha", type=_float_tuple(2, "--alpha"), help="re,im")
    sim.add_argument("--beta", type=_float_tuple(2, "--beta"), help="re,im")
    sim.add_argument("--x0", type=_float_tuple(3, "--x0"), help="Momentum image a1,a2,a3")
    sim.add_argument("--t-end", type=float, default=1.0)
    sim.add_argument("--samples", type=int, default=101)
    sim.add_argument("--method", choices=["exact", "rk4", "both"], default="exact")
    sim.add_argument("--rk4-step", type=float, default=settings.rk4_step)
    sim.add_argument("--tolerance", type=float, default=settings.cli_normalization_tolerance,
                     help="Accepted |det J - 1| of the initial data")
    sim.add_argument("--output", type=Path)
    sim.add_argument("--format", choices=["csv", "json", "parquet"], default="csv")
    sim.add_argument("--save-artifact", action="store_true")
    sim.add_argument("--residuals", type=Path, help="Also write the residual report (JSON) here")

    ver = sub.add_parser("verify", parents=[common], help="Run the property suites")
    ver.add_argument("--suite", action="append", choices=["all", *SUITES],
                     help="Suite to run; repeatable (default all)")
    ver.add_argument("--seed", type=int, default=settings.default_seed)
    ver.add_argument("--samples", type=int, help="Override every property's sample count")
    ver.add_argument("--output", type=Path, help="Report path (default stdout)")

    fac = sub.add_parser("factorize", parents=[common], help="Iwasawa factorization")
    fac.add_argument("--matrix", type=_matrix, help="Entries 'l11,l12;l21,l22'")
    fac.add_argument("--curve", action="store_true", help="Factor exp(t L_f(X)) instead")
    fac.add_argument("--x", type=_float_tuple(3, "--x"), help="X coordinates for --curve")
    fac.add_argument("--t", type=float, default=1.0)

    cmp_ = sub.add_parser("compare", parents=[common], help="Compare momentum images of trajectory files")
    cmp_.add_argument("paths", type=Path, nargs="+")
    cmp_.add_argument("--tolerance", type=float, default=1e-9)

    return parser


_RUN_FIELDS = [
    "system", "q0", "p0", "mu", "eps", "theta", "a", "b", "c", "eta", "alpha", "beta", "x0",
    "t_end", "samples", "method", "rk4_step", "tolerance", "output", "format", "save_artifact",
]


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    try:
        if args.command == "simulate":
            config = RunConfig(**{name: getattr(args, name) for name in _RUN_FIELDS})
            return cmd_simulate(config, args.residuals)
        if args.command == "verify":
            return cmd_verify(args.suite or ["all"], args.seed, args.samples, args.output)
        if args.command == "factorize":
            if args.curve == (args.matrix is not None):
                raise InputError("Give either --matrix or --curve")
            if args.curve and args.x is None:
                raise InputError("--curve needs --x a1,a2,a3")
            return cmd_factorize(args.matrix, args.x if args.curve else None, args.t)
        return cmd_compare(args.paths, args.tolerance)
    except ValidationError as e:
        print(f"error: invalid input: {e}", file=sys.stderr)
        return 2
    except PltError as e:
        print(f"error: {e}", file=sys.stderr)
        return exit_code_for(e)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except RuntimeError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
