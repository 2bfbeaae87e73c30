"""Command-line front end: every computation as a CSV-producing subcommand.

SNR flags are in dB and converted once at the boundary; all internal math
is linear SNR and nats.  Every output file starts with a run manifest in
'#' comment lines; stripping those yields plain CSV with a header row.
Exit codes: 0 success, 2 usage error, 3 infeasible or numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .design import finite_design
from .errors import InfeasibleError, NumericsError
from .grassmann import (design_codebook, distortion_bounds, estimate_mu,
                        load_codebook, save_codebook)
from .onoff import info_rate_equal_power, sweep_rho
from .simulate import (SimConfig, capacity_approx, rate_csir,
                       rate_csitr_waterfill, rate_gated_codebook,
                       rate_multirank, rate_perfect_onoff, rate_with_codebook,
                       subtask_rng, _STREAM_MEASURE)
from .spectra import SystemDims, integrate, t_density_from_ratio
from .waterfill import a_of_nu, solve_nu

_LN2 = math.log(2.0)
_MU_TRIALS = 50_000


@dataclass(frozen=True)
class RunManifest:
    command: str
    parameters: dict
    seed: int
    tool_version: str = __version__
    timestamp: str = ""

    def comment_lines(self):
        ts = self.timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
        yield f"# beamcap {self.command}"
        yield f"# version: {self.tool_version}"
        yield f"# timestamp: {ts}"
        yield f"# seed: {self.seed}"
        params = " ".join(f"{k}={v}" for k, v in sorted(self.parameters.items()))
        yield f"# parameters: {params}"


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _write_csv(path, manifest: RunManifest, header, rows) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        for line in manifest.comment_lines():
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def _parse_db_list(text: str, parser: argparse.ArgumentParser, flag: str):
    try:
        vals = [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        parser.error(f"{flag} expects a comma-separated list of dB values")
    if not vals:
        parser.error(f"{flag} must contain at least one value")
    return vals


def _check_ratio(y: float, parser: argparse.ArgumentParser) -> None:
    if not (0.0 < y <= 1.0):
        parser.error(f"--y must lie in (0, 1], got {y}")


def cmd_asymptotic(args, parser) -> int:
    _check_ratio(args.y, parser)
    if args.points < 1:
        parser.error("--points must be >= 1")
    if args.rho_max < args.rho_min:
        parser.error("--rho-max must be >= --rho-min")
    db_grid = np.linspace(args.rho_min, args.rho_max, args.points)
    points = sweep_rho(args.y, [_db_to_linear(db) for db in db_grid])
    manifest = RunManifest("asymptotic", dict(y=args.y, rho_min=args.rho_min,
                                              rho_max=args.rho_max, points=args.points),
                           seed=args.seed)
    rows = [(f"{db:.6g}", pt.a, pt.sbar, pt.pbar_on, pt.rate, pt.rate / _LN2)
            for db, pt in zip(db_grid, points)]
    _write_csv(args.out, manifest,
               ["rho_db", "a_opt", "sbar", "pbar_on", "rate_nats_per_dim",
                "rate_bits_per_dim"], rows)
    return 0


def cmd_waterfill(args, parser) -> int:
    _check_ratio(args.y, parser)
    db_grid = _parse_db_list(args.rho_grid, parser, "--rho-grid")
    rows = []
    for db in db_grid:
        rho = _db_to_linear(db)
        if args.oracle == "quad":
            nu, cap = _waterfill_by_quadrature(rho, args.y)
            rows.append((f"{db:.6g}", nu, a_of_nu(nu, args.y), cap, cap / _LN2))
        else:
            sol = solve_nu(rho, args.y)
            rows.append((f"{db:.6g}", sol.nu, sol.a, sol.capacity, sol.capacity / _LN2))
    manifest = RunManifest("waterfill", dict(y=args.y, rho_grid=args.rho_grid,
                                             oracle=args.oracle), seed=args.seed)
    _write_csv(args.out, manifest,
               ["rho_db", "nu", "a", "capacity_nats_per_dim", "capacity_bits_per_dim"],
               rows)
    return 0


def _waterfill_by_quadrature(rho: float, y: float):
    """Independent route: solve the power constraint and evaluate capacity
    by adaptive quadrature of the defining integrals."""
    from .roots import bisect
    from .spectra import support_from_ratio, t_of_lambda_from_ratio

    sup = support_from_ratio(y)

    def a_of(nu):
        if 1.0 / nu < sup.lambda_minus:
            return 0.0
        return t_of_lambda_from_ratio(1.0 / nu, y)

    def power(nu):
        a = a_of(nu)
        f = lambda t: (nu - y / (1.0 + y - 2.0 * math.sqrt(y) * np.cos(t))) \
            * t_density_from_ratio(t, y)
        return integrate(f, a, math.pi, tol=1e-11)

    lo = (1.0 + 1e-9) / sup.lambda_plus
    hi = max(1.0, 2.0 * lo)
    while power(hi) < rho:
        hi *= 2.0
    nu = bisect(lambda v: power(v) - rho, lo, hi, xtol=1e-12 * hi)
    a = a_of(nu)
    f = lambda t: np.log(nu / y * (1.0 + y - 2.0 * math.sqrt(y) * np.cos(t))) \
        * t_density_from_ratio(t, y)
    return nu, integrate(f, a, math.pi, tol=1e-11)


def cmd_simulate(args, parser) -> int:
    if args.tx < 1 or args.rx < 1:
        parser.error("--tx and --rx must be >= 1")
    if args.trials < 1:
        parser.error("--trials must be >= 1")
    if args.strategy in ("codebook", "multirank") and args.rfb is None:
        parser.error(f"--strategy {args.strategy} requires --rfb")
    dims = SystemDims(tx=args.tx, rx=args.rx)
    db_grid = _parse_db_list(args.rho_db, parser, "--rho-db")

    rows = []
    for db in db_grid:
        rho = _db_to_linear(db)
        config = SimConfig(dims=dims, rho=rho, trials=args.trials, seed=args.seed)
        partition_text = ""
        p_on_text = ""
        if args.strategy == "perfect":
            strat = finite_design(dims, rho)
            est = rate_perfect_onoff(config, strat)
            predicted = dims.m * strat.predicted_rate
        elif args.strategy == "csitr":
            sol = solve_nu(rho, dims.y)
            est = rate_csitr_waterfill(config)
            predicted = dims.m * sol.capacity
        elif args.strategy == "csir":
            est = rate_csir(config)
            predicted = dims.m * info_rate_equal_power(dims.y, dims.m * rho / dims.tx)
        elif args.strategy == "codebook":
            est, predicted, p_on = _simulate_codebook(config, args.rfb)
            p_on_text = _fmt(p_on)
        else:  # multirank
            est, partition, p_on = rate_multirank(config, partition=None,
                                                  feedback_bits=args.rfb)
            predicted = float("nan")
            partition_text = ":".join(str(k) for k in partition)
            p_on_text = _fmt(p_on)
        rows.append((f"{db:.6g}", args.strategy, args.trials, est.mean_rate,
                     est.mean_rate / _LN2, est.std_error, est.mean_power_used,
                     predicted, partition_text, p_on_text))

    manifest = RunManifest("simulate",
                           dict(tx=args.tx, rx=args.rx, rho_db=args.rho_db,
                                strategy=args.strategy, rfb=args.rfb,
                                trials=args.trials), seed=args.seed)
    _write_csv(args.out, manifest,
               ["rho_db", "strategy", "trials", "rate_nats", "rate_bits",
                "std_error", "mean_power", "predicted_nats", "partition", "p_on"],
               rows)
    return 0


def _simulate_codebook(config: SimConfig, rfb: int):
    """Finite-codebook on/off simulation plus its efficiency-factor
    prediction.  Constant-beam designs use the full 2^rfb codebook; gated
    designs reserve one index for 'off' and quantize with the rest."""
    dims = config.dims
    strat = finite_design(dims, config.rho)
    if strat.kind == "constant_beams":
        size = 2 ** rfb
        rank = strat.s
    else:
        size = 2 ** rfb - 1
        rank = 1
    cb = design_codebook(dims.tx, rank, size,
                         subtask_rng(config.seed, 1, rank, size))
    mu_hat, _, _ = estimate_mu(cb, _MU_TRIALS,
                               subtask_rng(config.seed, _STREAM_MEASURE))
    if strat.kind == "constant_beams":
        est = rate_with_codebook(config, cb, strat.s, strat.p_on)
        predicted = dims.m * capacity_approx(dims, strat.s, mu_hat, config.rho)
    else:
        est = rate_gated_codebook(config, cb, strat.p_on, strat.kappa)
        # same derating recipe applied to the gated prediction
        predicted = dims.m * mu_hat * strat.predicted_rate
    return est, predicted, strat.p_on


def cmd_codebook(args, parser) -> int:
    if args.rank >= args.tx:
        parser.error("--rank must be < --tx")
    if args.rank < 1 or args.bits < 1:
        parser.error("--rank and --bits must be >= 1")
    size = 2 ** args.bits
    rng = subtask_rng(args.seed, 1, args.rank, size)
    cb = design_codebook(args.tx, args.rank, size, rng,
                         iterations=args.design_iters)
    mu_hat, offdiag, spread = estimate_mu(cb, _MU_TRIALS,
                                          subtask_rng(args.seed, _STREAM_MEASURE))
    bounds = distortion_bounds(args.tx, args.rank, args.bits)
    save_codebook(cb, args.out)
    if size < 10:
        print("warning: bounds assume a large codebook; "
              f"size {size} is below the regime where they are tight")
    print(f"codebook written to {args.out}: ltx={args.tx} rank={args.rank} size={size}")
    print(f"min pairwise d_c^2: {cb.min_pairwise_dc:.6g}")
    print(f"measured mean d_c^2: {cb.measured_mean_dc2:.6g} "
          f"(bounds [{bounds.lower:.6g}, {bounds.upper:.6g}])")
    print(f"mu_hat: {mu_hat:.6g} (bounds [{bounds.mu_lower:.6g}, {bounds.mu_upper:.6g}]) "
          f"offdiag_max={offdiag:.3g} diag_spread={spread:.3g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beamcap",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("asymptotic", help="optimal on/off design across SNR")
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--rho-min", type=float, required=True, help="dB")
    p.add_argument("--rho-max", type=float, required=True, help="dB")
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_asymptotic)

    p = sub.add_parser("waterfill", help="full-CSI water-filling capacity")
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--rho-grid", required=True, help="comma-separated dB list")
    p.add_argument("--oracle", choices=["closed", "quad"], default="closed")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_waterfill)

    p = sub.add_parser("simulate", help="Monte Carlo rate of a strategy")
    p.add_argument("--tx", type=int, required=True)
    p.add_argument("--rx", type=int, required=True)
    p.add_argument("--rho-db", required=True, help="comma-separated dB list")
    p.add_argument("--strategy", required=True,
                   choices=["perfect", "codebook", "csitr", "csir", "multirank"])
    p.add_argument("--rfb", type=int, default=None, help="feedback bits")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("codebook", help="design and measure a codebook")
    p.add_argument("--tx", type=int, required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--design-iters", type=int, default=2000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_codebook)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except (InfeasibleError, NumericsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
