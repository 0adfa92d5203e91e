#!/usr/bin/env python3

"""
Command-line entry point: each subcommand runs one experiment, writes its tables as CSV plus a
JSON summary under the output directory and exits 0 on success, 1 on usage or configuration
errors and 2 when an invariant check fails.
"""

import argparse
import logging
import math
import sys
import time
from functools import partial
from importlib.metadata import PackageNotFoundError, version
from typing import Callable, Dict, List, Optional

import numpy as np

from robin_gap import asymptotics, disc_spectrum, dtn_circle, gap_model, specfun
from robin_gap.errors import ConfigError, DomainError, RobinGapError
from robin_gap.parallel import parallel_map
from robin_gap.report import Report, Table
from robin_gap.run_config import RunConfig
from robin_gap.verify import run_verification, verification_passed

try:
    VERSION = version("robin-gap")
except PackageNotFoundError:
    VERSION = "v0.1.0"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVARIANT = 2

DEFAULT_P_VALUES = [math.inf, 1.0, 2.0]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_range(text: str) -> List[int]:
    """
    Parse an integer range such as "0..2", "3" or "1,4,5".
    e.g. "0..2" -> [0, 1, 2]
    """
    values = []
    for part in text.split(","):
        part = part.strip()
        try:
            if ".." in part:
                lo, hi = part.split("..")
                values.extend(range(int(lo), int(hi) + 1))
            else:
                values.append(int(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"Invalid integer range: {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError(f"Empty integer range: {text!r}")
    return sorted(set(values))


def parse_beta_grid(text: str) -> List[float]:
    """
    Parse lo:hi:points into a log-spaced grid.
    e.g. "1e2:1e6:5" -> [1e2, 1e3, 1e4, 1e5, 1e6]
    """
    try:
        lo, hi, points = text.split(":")
        lo, hi, count = float(lo), float(hi), int(points)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected lo:hi:points, got {text!r}") from None
    if not (0 < lo < hi) or count < 2:
        raise argparse.ArgumentTypeError(f"Need 0 < lo < hi and at least 2 points, got {text!r}")
    return [float(beta) for beta in np.logspace(math.log10(lo), math.log10(hi), count)]


def parse_p(text: str) -> float:
    value = float(text)
    if math.isnan(value):
        raise argparse.ArgumentTypeError("p must be a number or inf")
    return value


def _common_options() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="Flat JSON run configuration")
    common.add_argument("--print-config", action="store_true", help="Print the effective configuration and exit")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--json", action="store_true", help="Also print the JSON summary to stdout")
    common.add_argument("--threads", type=int, help="Worker threads (default ROBIN_GAP_THREADS or 1)")
    common.add_argument("--debug", action="store_true", help="Enable debug logging")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = _Parser(prog="robin-gap", description="Large-coupling Robin Laplacian on the unit disc")
    parser.add_argument("--version", action="version", version=VERSION)
    commands = parser.add_subparsers(dest="command", required=True)

    zeros = commands.add_parser("zeros", parents=[common], help="Bessel and Airy zero tables")
    zeros.add_argument("--kind", choices=["dirichlet", "neumann", "airy"], default="dirichlet")
    zeros.add_argument("--n", type=parse_range, default=[0], help="Orders, e.g. 0..2")
    zeros.add_argument("--m", type=parse_range, default=[1], help="Indices, e.g. 1..3")

    commands.add_parser("verify", parents=[common], help="Run the acceptance suite")

    for name, help_text in (("rates", "Convergence-rate fits"), ("gap-norms", "Norms of D_inf - D_beta")):
        sub = commands.add_parser(name, parents=[common], help=help_text)
        sub.add_argument("--beta", type=float, action="append", help="Coupling value (repeatable)")
        sub.add_argument("--beta-grid", type=parse_beta_grid, help="Log grid lo:hi:points")
        sub.add_argument("--p", type=parse_p, action="append", help="Schatten exponent, inf for the operator norm")
        sub.add_argument("--trunc", type=int, help="Highest boundary mode n_max")

    expansion = commands.add_parser("expansion", parents=[common], help="Large-coupling expansion coefficients")
    expansion.add_argument("--n", type=parse_range, default=[0])
    expansion.add_argument("--m", type=parse_range, default=[1])
    expansion.add_argument("--beta", type=float, action="append", help="Couplings for the projection drift")
    expansion.add_argument("--beta0", type=float, default=1.0e3)
    expansion.add_argument("--ratio", type=float, default=2.0)
    expansion.add_argument("--levels", type=int, default=6)
    expansion.add_argument("--trunc", type=int, help="Dirichlet modes q_trunc in the cross-space sum")

    dtn = commands.add_parser("dtn", parents=[common], help="DtN spectrum and coupling weights")
    dtn.add_argument("--n", type=parse_range, default=list(range(0, 21)))
    dtn.add_argument("--trunc", type=int, help="Highest order for the diagnostics")

    robin = commands.add_parser("robin-eig", parents=[common], help="Robin eigenvalues of the disc")
    robin.add_argument("--n", type=parse_range, default=[0])
    robin.add_argument("--m", type=parse_range, default=[1])
    robin.add_argument("--beta", type=float, action="append", help="Coupling value (repeatable)")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the --config file, then flags."""
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    overrides = {"output_dir": args.out, "threads": args.threads, "beta_grid": getattr(args, "beta_grid", None)}
    trunc = getattr(args, "trunc", None)
    if args.command == "expansion":
        overrides["q_trunc"] = trunc
    elif args.command != "zeros":
        overrides["n_max"] = trunc
    return config.merged(overrides)


def cmd_zeros(args: argparse.Namespace, config: RunConfig) -> Report:
    report = Report(command="zeros", version=VERSION, config=config.to_dict())
    if args.kind == "airy":
        table = Table("zeros", ["family", "m", "value", "residual"])
        for m in args.m:
            zero = specfun.airy_negative_zero(m)
            table.add_row("airy", m, zero.value, zero.residual)
    else:
        family = specfun.ZeroFamily(args.kind)
        rows = [specfun.find_zero(family, n, m).to_row() for n in args.n for m in args.m]
        table = Table.from_records("zeros", rows)
    report.add_table(table)
    return report


def cmd_robin_eig(args: argparse.Namespace, config: RunConfig) -> Report:
    report = Report(command="robin-eig", version=VERSION, config=config.to_dict())
    betas = sorted(args.beta or config.beta_grid)
    rows = [disc_spectrum.robin_eigenvalue(n, m, beta).to_row() for n in args.n for m in args.m for beta in betas]
    report.add_table(Table.from_records("robin", rows))
    return report


def cmd_dtn(args: argparse.Namespace, config: RunConfig) -> Report:
    report = Report(command="dtn", version=VERSION, config=config.to_dict())
    modes = [dtn_circle.dtn_mode(n).to_row() for n in args.n]
    report.add_table(Table.from_records("dtn", modes))

    n_max = min(config.n_max, dtn_circle.MAX_DIAGNOSTIC_ORDER)
    bounded = report.add_table(Table("boundedness", ["s", "n_max", "sup", "argmax", "tail_trend", "analytic_bound"]))
    for s in (0.5, 1.0, 1.5):
        diag = dtn_circle.boundedness_diagnostics(n_max, s)
        bounded.add_row(s, diag.n_max, diag.sup, diag.argmax, diag.tail_trend, diag.analytic_bound)
        if diag.tail_trend == "increasing":
            report.flags.append(f"lambda_check^{2 * s:g} gamma^2 still increasing at n={n_max}")

    summary = report.add_table(Table("summary", ["quantity", "value", "tail_bound"]))
    trace = dtn_circle.dinf_trace(n_max)
    summary.add_row("dinf_trace", trace.value, trace.tail_bound)
    summary.add_row("growth_exponent", dtn_circle.growth_exponent(), 0.0)
    checkpoints = [c for c in (10, 100, 1000) if c <= n_max] or [n_max]
    for n, value in dtn_circle.hilbert_schmidt_partial_sums(checkpoints):
        summary.add_row(f"hilbert_schmidt_partial_{n}", value, math.inf)
    return report


def _p_values(args: argparse.Namespace) -> List[float]:
    return args.p or DEFAULT_P_VALUES


def _norm_label(p: float) -> str:
    return "operator" if p == math.inf else f"S{p:g}"


def cmd_gap_norms(args: argparse.Namespace, config: RunConfig) -> Report:
    report = Report(command="gap-norms", version=VERSION, config=config.to_dict())
    model = gap_model.build_model(config.n_max)
    table = report.add_table(Table("gap_norms", ["beta", "p", "value", "tail_bound", "tail_estimate", "estimate"]))
    for beta in sorted(args.beta or config.beta_grid):
        for p in _p_values(args):
            norm = gap_model.schatten_norm_gap(model, beta, p)
            table.add_row(beta, p, norm.value, norm.tail_bound, norm.tail_estimate, norm.estimate)
            if not norm.convergent:
                report.flags.append(f"S{p:g} diverges")
    return report


def cmd_rates(args: argparse.Namespace, config: RunConfig) -> Report:
    report = Report(command="rates", version=VERSION, config=config.to_dict())
    model = gap_model.build_model(config.n_max)
    betas = sorted(args.beta or config.beta_grid)
    points = report.add_table(Table("rate_points", ["norm", "beta", "value", "beta_value"]))
    fits = report.add_table(Table("rates", ["norm", "exponent", "log_constant", "r_squared"]))
    for p in _p_values(args):
        values = [gap_model.schatten_norm_gap(model, beta, p).estimate for beta in betas]
        label = _norm_label(p)
        for beta, value in zip(betas, values):
            points.add_row(label, beta, value, beta * value)
        fit = gap_model.rate_fit(list(zip(betas, values)))
        fits.add_row(label, fit.exponent, fit.log_constant, fit.r_squared)
    return report


def cmd_expansion(args: argparse.Namespace, config: RunConfig) -> Report:
    report = Report(command="expansion", version=VERSION, config=config.to_dict())
    coefficients = report.add_table(
        Table(
            "coefficients",
            [
                "n",
                "m",
                "c0",
                "c0_exact",
                "c1",
                "c1_predicted",
                "c2",
                "c2_oracle",
                "alpha_closed_form",
                "ill_conditioned",
            ],
        )
    )
    stability = report.add_table(Table("stability", ["n", "m", "level", "c0", "c1", "c2"]))
    matrix = report.add_table(
        Table("matrix", ["n", "m", "m_entry", "rharm", "same_space", "cross_space", "n_entry", "tail_bound"])
    )
    drift = report.add_table(Table("drift", ["n", "m", "beta", "drift"]))
    betas = sorted(args.beta or [1.0e2, 1.0e3, 1.0e4, 1.0e5])
    mapper = partial(parallel_map, threads=config.threads)
    if len(args.n) > asymptotics.MAX_COMPARISON_SET or len(args.m) > asymptotics.MAX_COMPARISON_SET:
        raise DomainError(f"Expansion runs are limited to {asymptotics.MAX_COMPARISON_SET} orders and indices")
    for n in args.n:
        for m in args.m:
            fit = asymptotics.extract_coefficients(
                n, m, args.beta0, args.ratio, args.levels, config.q_trunc, mapper=mapper
            )
            row = fit.to_row()
            coefficients.add_row(*[row[c] for c in coefficients.columns])
            for level in fit.stability:
                stability.add_row(n, m, level.level, level.c0, level.c1, level.c2)
            if abs(fit.c2 - fit.c2_closed_form) > asymptotics.DISCREPANCY_RTOL * abs(fit.c2):
                report.flags.append(f"CLOSED-FORM-DISCREPANCY ({n}, {m})")
            entry = asymptotics.n_matrix_entry(n, m, config.q_trunc)
            matrix.add_row(
                n, m, entry.m_entry, entry.rharm, entry.same_space, entry.cross_space, entry.n_entry, entry.tail_bound
            )
            drifts = mapper(lambda beta: asymptotics.projection_drift(n, m, beta), betas)
            for beta, value in zip(betas, drifts):
                drift.add_row(n, m, beta, value)
    return report


def cmd_verify(args: argparse.Namespace, config: RunConfig) -> Report:
    return run_verification(config, VERSION)


COMMANDS: Dict[str, Callable[[argparse.Namespace, RunConfig], Report]] = {
    "zeros": cmd_zeros,
    "verify": cmd_verify,
    "rates": cmd_rates,
    "gap-norms": cmd_gap_norms,
    "expansion": cmd_expansion,
    "dtn": cmd_dtn,
    "robin-eig": cmd_robin_eig,
}


def run(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one subcommand and return the exit code."""
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        logging.error(f"{e}. Use --help for usage.")
        return EXIT_USAGE

    log_level = logging.DEBUG if args.debug else logging.INFO
    logging.basicConfig(level=log_level, format="[%(asctime)s] %(levelname)s: %(message)s")

    try:
        config = load_config(args)
    except ConfigError as e:
        logging.error(f"Invalid configuration: {e}")
        return EXIT_USAGE

    if args.print_config:
        sys.stdout.write(config.to_json())
        return EXIT_OK

    logging.info(f"Starting {args.command} (robin-gap {VERSION})")
    started = time.perf_counter()
    try:
        report = COMMANDS[args.command](args, config)
    except (DomainError, ConfigError) as e:
        logging.error(f"{args.command}: {e}")
        return EXIT_USAGE
    except RobinGapError as e:
        logging.error(f"{args.command} failed an invariant check: {type(e).__name__}: {e}")
        return EXIT_INVARIANT
    elapsed = time.perf_counter() - started
    report.timing.setdefault(args.command, elapsed)

    for path in report.write(config.output_dir):
        logging.debug(f"Wrote {path}")
    if args.json:
        sys.stdout.write(report.to_json())
    logging.info(f"Finished {args.command} in {elapsed:.1f}s")

    if args.command == "verify" and not verification_passed(report):
        logging.error(f"Verification failed: {', '.join(report.flags)}")
        return EXIT_INVARIANT
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
