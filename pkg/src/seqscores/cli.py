"""Command-line interface.

Exit codes: 0 success, 1 usage or configuration error, 2 data or runtime error.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Iterable, Iterator, TextIO

from . import bench, validation
from .calibration import (DEFAULT_BRACKETS, CalibrationError, CalibrationTarget, StreamModel,
                          calibrate_limit, check_compatible)
from .charts import CusumMeanConfig, CusumVarianceConfig, EwmaConfig
from .normal import phi
from .plot import emit_plot
from .scoring import ScoringConvention, is_batched, make_scorer

VARIANTS = ("individual", "batched", "conditional-individual", "conditional-batched")
CHARTS = ("none", "cusum-mean", "cusum-var", "ewma")
COLUMNS = ("index", "batch", "raw", "rank", "p", "z", "statistic", "limit", "signal")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def fmt(x: float) -> str:
    # repr-exact binary value rounded to 6 places (ties resolve half-even)
    return f"{x:.6f}"


def _read_rows(lines: Iterable[str], width: int) -> Iterator[tuple[int, list[float]]]:
    """Yield (line number, values) with ``width`` reals per line; a non-numeric first line is a header."""
    for lineno, line in enumerate(lines, 1):
        text = line.strip()
        if not text:
            continue
        fields = [f.strip() for f in text.split(",")]
        try:
            values = [float(f) for f in fields]
        except ValueError:
            if lineno == 1:
                continue
            raise DataError(f"line {lineno}: cannot parse {text!r} as numbers") from None
        if len(values) != width:
            raise DataError(f"line {lineno}: expected {width} value(s), got {len(values)}")
        if not all(math.isfinite(v) for v in values):
            raise DataError(f"line {lineno}: non-finite value in {text!r}")
        yield lineno, values


def _chart_config(args):
    if args.chart == "none":
        return None
    if args.chart == "cusum-mean":
        return CusumMeanConfig(args.k if args.k is not None else 0.25,
                               args.h if args.h is not None else 7.267, args.side)
    if args.chart == "cusum-var":
        return CusumVarianceConfig(args.k if args.k is not None else 0.793,
                                   args.h if args.h is not None else -1.645, args.m or 10)
    return EwmaConfig(args.lam, args.rho if args.rho is not None else 2.714, args.m or 1)


def _scorer(args):
    conditional = args.variant.startswith("conditional")
    if conditional:
        if args.theta is None or args.f_theta is None:
            raise UsageError(f"--variant {args.variant} needs --theta and --f-theta")
        if not 0.0 < args.f_theta < 1.0:
            raise UsageError("--f-theta must lie strictly inside (0, 1)")
    batched = args.variant in ("batched", "conditional-batched")
    if batched and (args.m is None or args.m < 2):
        raise UsageError(f"--variant {args.variant} needs --m >= 2")
    try:
        convention = ScoringConvention.parse(args.convention)
        return make_scorer(args.variant, m=args.m if batched else None, theta=args.theta,
                           f_theta=args.f_theta, convention=convention, window=args.window)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def run_stream(args, lines: Iterable[str], out: TextIO):
    """Score (and optionally chart) ``lines``, writing CSV to ``out``.

    Returns (chart config, engine, change-point estimate frozen at the first signal).
    """
    scorer = _scorer(args)
    config = _chart_config(args)
    if config is not None:
        try:
            check_compatible(config, args.variant, args.m)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    engine = config.engine() if config is not None else None
    batched = is_batched(scorer)
    width = scorer.m if batched else 1
    change_point = None
    out.write(",".join(COLUMNS) + "\n")
    for lineno, values in _read_rows(lines, width):
        scored = scorer.score_batch(values) if batched else [scorer.score(values[0])]
        if engine is None:
            chart = [None] * len(scored)
        elif isinstance(config, CusumMeanConfig):
            chart = [engine.step(s.z) for s in scored]
        else:
            chart = [None] * (len(scored) - 1) + [engine.step([s.z for s in scored])]
        last = chart[-1]
        if last is not None and engine.verdict.signal_step == last.step and change_point is None:
            change_point = getattr(engine, "change_point", None)
        for s, res in zip(scored, chart):
            row = [str(s.index), "" if s.batch is None else str(s.batch), fmt(s.raw), fmt(s.rank),
                   fmt(s.p), fmt(s.z)]
            if res is None:
                row += ["", "", ""]
            else:
                row += [fmt(res.statistic), fmt(res.limit), "1" if res.signal else "0"]
            out.write(",".join(row) + "\n")
    return config, engine, change_point


def _summary(config, engine, change_point=None) -> str:
    v = engine.verdict
    steps = len(v.statistic_path)
    if not v.signaled:
        return f"no signal after {steps} chart step(s)"
    unit = "observation" if isinstance(config, CusumMeanConfig) else "batch"
    if unit == "observation":
        text = f"A signal is triggered at observation {v.signal_step}"
    else:
        text = (f"A signal is triggered at batch {v.signal_step} "
                f"(observation {v.signal_step * config.m})")
    if change_point is not None:
        text += f"; change-point estimate (last zero of the CUSUM): {unit} {change_point}"
    return text


def _open_input(path: str | None):
    if path is None or path == "-":
        return sys.stdin
    return open(path, encoding="utf-8")


def cmd_score(args) -> int:
    args.chart = "none"
    with _open_input(args.input) as fh:
        run_stream(args, fh, sys.stdout)
    return 0


def cmd_chart(args) -> int:
    if args.chart == "none":
        raise UsageError("chart: --chart is required")
    with _open_input(args.input) as fh:
        config, engine, change_point = run_stream(args, fh, sys.stdout)
    print(_summary(config, engine, change_point), file=sys.stderr)
    if args.plot:
        path = engine.verdict.statistic_path
        if not path:
            raise DataError("no chart steps to plot")
        emit_plot(path, args.plot, engine.verdict.signal_step, title=config.name)
    return 0


def cmd_calibrate(args) -> int:
    if args.chart == "none":
        raise UsageError("calibrate: --chart is required")
    config = _chart_config(args)
    if args.stream == "normal":
        model = StreamModel("normal")
    else:
        model = StreamModel("sns", args.distribution, args.variant, f_theta=args.f_theta or 0.5,
                            convention=args.convention, window=args.window)
    bracket = tuple(args.bracket) if args.bracket else DEFAULT_BRACKETS[config.name]
    target = CalibrationTarget(config, args.target_arl, model, args.tolerance)
    limit, est = calibrate_limit(target, seed=args.seed, bracket=bracket,
                                 replications=args.replications, n_jobs=args.n_jobs)
    print("chart,limit_name,limit,arl0,std_error,replications,censored_fraction")
    print(f"{config.name},{config.limit_name},{fmt(limit)},{fmt(est.mean_rl)},{fmt(est.std_error)},"
          f"{est.replications},{fmt(est.censored_fraction)}")
    return 0


def cmd_table1(args) -> int:
    d = args.decimals
    print("i,sd_b1,b_for_unit_sd,b_approx,sd_with_b_approx")
    for r in validation.table1():
        print(f"{r.i},{r.sd_b1:.{d}f},{r.b_for_unit_sd:.{d}f},{r.b_approx:.{d}f},{r.sd_with_b_approx:.{d}f}")
    return 0


def cmd_dist_study(args) -> int:
    if args.study == "ecdf":
        s = validation.mean_ecdf_study(args.n, args.replications, seed=args.seed)
        print("x,mean_ecdf,phi")
        for x, y in zip(s.grid, s.mean_ecdf):
            print(f"{fmt(x)},{fmt(y)},{fmt(phi(float(x)))}")
    else:
        checkpoints = [int(float(c)) for c in args.checkpoints.split(",")]
        results = validation.path_gof_study(checkpoints, seed=args.seed)
        print("n,statistic,p_value")
        for c, r in zip(checkpoints, results):
            print(f"{c},{fmt(r.statistic)},{fmt(r.p_value)}")
    return 0


def cmd_bench(args) -> int:
    methods = [m.strip() for m in args.methods.split(",")]
    sizes = [int(float(n)) for n in args.n.split(",")]
    try:
        results = bench.run(methods, sizes, repeats=args.repeats, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print("\n".join(bench.to_csv_rows(results)))
    return 0


def _add_stream_options(p):
    p.add_argument("input", nargs="?", help="input file (default: stdin)")
    p.add_argument("--variant", choices=VARIANTS, default="individual")
    p.add_argument("--m", type=int, help="batch size for batched variants and batch charts")
    p.add_argument("--theta", type=float, help="known quantile (conditional variants)")
    p.add_argument("--f-theta", dest="f_theta", type=float, help="F(theta) (conditional variants)")
    p.add_argument("--convention", default="rankit",
                   help="rankit, vdw, blom, tukey, adaptive_b or fixed:<b> (default rankit)")
    p.add_argument("--window", type=int, help="compare only against the most recent W observations")
    p.add_argument("--seed", type=int, default=0)


def _add_chart_options(p, required: bool = False):
    p.add_argument("--chart", choices=CHARTS[1:] if required else CHARTS, default=None if required else "none",
                   required=required)
    p.add_argument("--side", choices=("upper", "lower", "both"), default="upper")
    p.add_argument("--k", type=float, help="allowance / reference value")
    p.add_argument("--h", type=float, help="decision interval (negative for cusum-var)")
    p.add_argument("--lambda", dest="lam", type=float, default=0.1)
    p.add_argument("--rho", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="seqscores", description="Sequential normal scores and control charts.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("score", help="transform a stream into sequential normal scores")
    _add_stream_options(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("chart", help="score a stream and run a control chart on the scores")
    _add_stream_options(p)
    _add_chart_options(p, required=True)
    p.add_argument("--plot", help="write an SVG of the chart statistic to this path")
    p.set_defaults(func=cmd_chart)

    p = sub.add_parser("calibrate", help="find the control limit giving a target in-control ARL")
    _add_chart_options(p, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--target-arl", dest="target_arl", type=float, required=True)
    p.add_argument("--replications", type=int, default=10_000)
    p.add_argument("--tolerance", type=float, default=0.02)
    p.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--stream", choices=("normal", "sns"), default="normal")
    p.add_argument("--distribution", default="normal")
    p.add_argument("--variant", choices=VARIANTS, default="individual")
    p.add_argument("--f-theta", dest="f_theta", type=float)
    p.add_argument("--convention", default="rankit")
    p.add_argument("--window", type=int)
    p.add_argument("--n-jobs", dest="n_jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("table1", help="regenerate the standard-deviation / b table")
    p.add_argument("--decimals", type=int, default=3)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("dist-study", help="finite-sample distribution studies")
    p.add_argument("--study", choices=("ecdf", "gof"), default="ecdf")
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--replications", type=int, default=1000)
    p.add_argument("--checkpoints", default="100,300,1000,3000")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_dist_study)

    p = sub.add_parser("bench", help="time SNS against re-ranking baselines")
    p.add_argument("--methods", default="sns,lepage-ref,mw-changepoint")
    p.add_argument("--n", default="1e3,1e4")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"seqscores: error: {exc}", file=sys.stderr)
        return 1
    except (DataError, CalibrationError, OSError, ValueError) as exc:
        print(f"seqscores: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
