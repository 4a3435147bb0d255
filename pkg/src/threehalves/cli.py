"""Command-line front end.

Exit codes: 0 ok, 1 usage error, 2 runtime fault, 3 selftest failure.
The default output directory can be overridden with ``THREEHALVES_OUT``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .checkpoint import Checkpoint
from .histogram import merge_all
from .orchestrator import (
    DEFAULT_CHECKPOINT_INTERVAL,
    RunConfig,
    analyze,
    default_out_dir,
    load_histogram,
    merge_results,
    monitors_dict,
    resume,
    run,
    runtime_dict,
    write_outputs,
)
from .selftest import run_selftest
from .stats import DEFAULT_PSI0

EXIT_OK, EXIT_USAGE, EXIT_FAULT, EXIT_SELFTEST = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _psi0(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("psi0 must lie strictly between 0 and 1")
    return value


def _bins_log2(text: str) -> int:
    value = int(text)
    if not 1 <= value <= 32:
        raise argparse.ArgumentTypeError("bins-log2 must be in 1..32")
    return value


def _fmt(x) -> str:
    return f"{x:.6g}" if isinstance(x, float) else str(x)


def _print_summary(analysis: dict) -> None:
    keys = ["n", "r", "tau", "df", "p_value", "method", "b_star", "b_finite", "posterior_lb", "psi0"]
    for key in keys:
        if key in analysis:
            print(f"{key:>13}: {_fmt(analysis[key])}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="threehalves", description="Fractional parts of (3/2)^n: generate, bin and test.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def analysis_flags(sp):
        sp.add_argument("--psi0", type=_psi0, default=DEFAULT_PSI0, help="prior probability of uniformity")
        sp.add_argument("--no-finite", action="store_true", help="skip the finite-n Dirichlet bound")
        sp.add_argument("--bound", choices=["asymptotic", "finite"], default="asymptotic",
                        help="Bayes factor bound used for the posterior bound")

    r = sub.add_parser("run", help="generate, bin and analyze exponents 1..n")
    r.add_argument("--n", type=_positive_int, required=True)
    r.add_argument("--bins-log2", type=_bins_log2, required=True, dest="k")
    r.add_argument("--workers", type=_positive_int, default=1)
    r.add_argument("--checkpoint-interval", type=_positive_int, default=DEFAULT_CHECKPOINT_INTERVAL)
    r.add_argument("--balanced", action="store_true", help="split segments by work instead of length")
    r.add_argument("--out", type=Path, default=None)
    analysis_flags(r)

    rs = sub.add_parser("resume", help="finish interrupted segments from their checkpoints")
    rs.add_argument("checkpoints", nargs="*", type=Path, help="checkpoint files (default: OUT/checkpoints/*.ckpt)")
    rs.add_argument("--bins-log2", type=_bins_log2, default=None, dest="k", help="refuse checkpoints with other k")
    rs.add_argument("--checkpoint-interval", type=_positive_int, default=DEFAULT_CHECKPOINT_INTERVAL)
    rs.add_argument("--out", type=Path, default=None)
    analysis_flags(rs)

    m = sub.add_parser("merge", help="merge histograms or checkpoints covering adjacent ranges")
    m.add_argument("inputs", nargs="+", type=Path)
    m.add_argument("--out", type=Path, default=None)
    analysis_flags(m)

    a = sub.add_parser("analyze", help="run the uniformity tests on a stored histogram")
    a.add_argument("input", type=Path)
    a.add_argument("--out", type=Path, default=None)
    analysis_flags(a)

    sub.add_parser("selftest", help="check the built-in reference vectors")

    e = sub.add_parser("export", help="write a histogram or its analysis as CSV or JSON")
    e.add_argument("--checkpoint", type=Path, required=True, help="checkpoint, histogram JSON or CSV")
    e.add_argument("--format", choices=["csv", "json"], required=True)
    e.add_argument("--analysis", action="store_true", help="export the analysis instead of the histogram")
    e.add_argument("--output", type=Path, default=None, help="file to write (default: stdout)")
    analysis_flags(e)
    return p


def _analysis_for(h, args) -> dict:
    return analyze(h, args.psi0, finite=not args.no_finite, bound=args.bound)


def _cmd_run(args) -> int:
    out = args.out or default_out_dir()
    if args.bound == "finite" and args.no_finite:
        raise UsageError("--bound finite needs the finite bound")
    cfg = RunConfig(
        n_total=args.n,
        k=args.k,
        workers=args.workers,
        checkpoint_interval=args.checkpoint_interval,
        psi0=args.psi0,
        out_dir=out,
        checkpoint_dir=out / "checkpoints",
        balanced=args.balanced,
        finite_bound=not args.no_finite,
    )
    res = run(cfg)
    analysis = _analysis_for(res.histogram, args)
    write_outputs(
        out,
        res.histogram,
        analysis,
        {
            "runtime.json": runtime_dict(args.n, res.elapsed, len(res.segments)),
            "monitors.json": monitors_dict(res.extremes, res.candidates),
        },
    )
    _print_summary(analysis)
    print(f"wrote {out}")
    return EXIT_OK


def _cmd_resume(args) -> int:
    out = args.out or default_out_dir()
    paths = args.checkpoints or sorted((out / "checkpoints").glob("*.ckpt"))
    if not paths:
        raise UsageError(f"no checkpoints given and none found under {out / 'checkpoints'}")
    cfg = None
    if args.k is not None:
        cfg = RunConfig(n_total=1, k=args.k, checkpoint_interval=args.checkpoint_interval)
    results = [resume(p, cfg) for p in paths]
    merged = merge_results(results)
    analysis = _analysis_for(merged.histogram, args)
    write_outputs(out, merged.histogram, analysis, {"monitors.json": monitors_dict(merged.extremes, merged.candidates)})
    _print_summary(analysis)
    return EXIT_OK


def _cmd_merge(args) -> int:
    out = args.out or default_out_dir()
    h = merge_all([load_histogram(p) for p in args.inputs])
    analysis = _analysis_for(h, args)
    write_outputs(out, h, analysis)
    _print_summary(analysis)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    h = load_histogram(args.input)
    analysis = _analysis_for(h, args)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "analysis.json").write_text(json.dumps(analysis, indent=2, sort_keys=True) + "\n")
    _print_summary(analysis)
    return EXIT_OK


def _cmd_export(args) -> int:
    h = load_histogram(args.checkpoint)
    if args.analysis:
        analysis = _analysis_for(h, args)
        if args.format == "json":
            text = json.dumps(analysis, indent=2, sort_keys=True) + "\n"
        else:
            text = "field,value\n" + "".join(f"{key},{analysis[key]}\n" for key in sorted(analysis))
    else:
        text = h.to_csv() if args.format == "csv" else h.to_json() + "\n"
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.write_text(text)
    return EXIT_OK


def _cmd_selftest(args) -> int:
    return EXIT_OK if run_selftest() else EXIT_SELFTEST


COMMANDS = {
    "run": _cmd_run,
    "resume": _cmd_resume,
    "merge": _cmd_merge,
    "analyze": _cmd_analyze,
    "export": _cmd_export,
    "selftest": _cmd_selftest,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"threehalves: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"threehalves: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAULT


if __name__ == "__main__":
    sys.exit(main())
