from __future__ import annotations

import argparse
import sys
from typing import Sequence

import structlog

from vacqrng import __version__
from vacqrng.app import commands
from vacqrng.core.config.settings import settings
from vacqrng.core.errors import QrngError
from vacqrng.core.logging.setup import configure_logging
from vacqrng.core.run.pipeline import STAGE_NAMES

log = structlog.get_logger()

EXIT_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="vacqrng",
        description="Vacuum-noise heterodyne QRNG post-processing: simulate, condition, calibrate, extract, test.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--log-level", default=None, help=f"default {settings.log_level}")
    p.add_argument("--log-format", choices=("json", "console"), default=None)
    p.add_argument("--workers", type=int, default=None, help="worker threads; results do not depend on it")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("simulate", help="simulate a two-quadrature ADC trace")
    s.add_argument("--photocurrent-ua", type=float, default=70.0)
    s.add_argument("--samples", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--config", default=None, help="pipeline config for source and ADC settings")
    s.add_argument("--sweep-dir", default=None, help="also write the calibration sweep here")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=commands.cmd_simulate)

    c = sub.add_parser("calibrate", help="fit shot-noise variance over a sweep directory")
    c.add_argument("trace_dir")
    c.add_argument("--operating-current-ua", type=float, default=None)
    c.add_argument("--factor", type=int, default=None, help="decimation factor for the pair rate")
    c.add_argument("--config", default=None)
    c.add_argument("-o", "--output", default=None, help="full calibration JSON")
    c.add_argument("--csv", default=None, help="(I, var_p, var_q) table")
    c.set_defaults(func=commands.cmd_calibrate)

    a = sub.add_parser("autocorr", help="autocorrelation CSV on stdout")
    a.add_argument("trace")
    a.add_argument("--max-lag", type=int, default=100)
    a.add_argument("--channel", choices=("p", "q"), default="p")
    a.add_argument("--filtered", action="store_true", help="band-pass before the ACF")
    a.add_argument("--envelope", action="store_true", help="analytic-signal envelope instead of the real ACF")
    a.add_argument("--config", default=None)
    a.set_defaults(func=commands.cmd_autocorr)

    e = sub.add_parser("extract", help="Toeplitz-hash a conditioned trace")
    e.add_argument("input")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--m", type=int, required=True)
    e.add_argument("--hmin", type=float, required=True)
    e.add_argument("--raw-bits", type=int, default=None)
    e.add_argument("--seed-file", default=None, help="n+m-1 bits, little-endian within bytes; OS entropy if omitted")
    e.add_argument("--insecure-allow", action="store_true", help="run even if the ratio condition fails")
    e.add_argument("-o", "--output", required=True)
    e.set_defaults(func=commands.cmd_extract)

    t = sub.add_parser("test", help="statistical battery over an extracted binary")
    t.add_argument("input")
    t.add_argument("--stream-bits", type=int, default=1_000_000)
    t.add_argument("--n-streams", type=int, default=100)
    t.add_argument("--alpha", type=float, default=0.01)
    t.add_argument("--json", action="store_true")
    t.set_defaults(func=commands.cmd_test)

    r = sub.add_parser("run", help="full pipeline from a config file")
    r.add_argument("config")
    r.add_argument("--run-id", default=None)
    r.add_argument("--runs-dir", default=None)
    r.add_argument("--run-dir", default=None, help="existing run directory to continue in")
    r.add_argument("--from-stage", choices=STAGE_NAMES, default=STAGE_NAMES[0])
    r.set_defaults(func=commands.cmd_run)

    rep = sub.add_parser("report", help="print the summary of a finished run")
    rep.add_argument("run_dir")
    rep.add_argument("--json", action="store_true")
    rep.set_defaults(func=commands.cmd_report)

    b = sub.add_parser("bench", help="extractor throughput")
    b.add_argument("--n", type=int, default=15000)
    b.add_argument("--m", type=int, default=10788)
    b.add_argument("--blocks", type=int, default=2000)
    b.add_argument("--minwall", type=float, default=1.0)
    b.add_argument("--json", action="store_true")
    b.set_defaults(func=commands.cmd_bench)

    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    configure_logging(
        level=args.log_level or settings.log_level,
        fmt=args.log_format or settings.log_format,
    )
    if args.workers is not None and args.workers < 1:
        parser.error("--workers must be >= 1")
    if args.cmd == "run" and args.from_stage != STAGE_NAMES[0] and not args.run_dir:
        parser.error("--from-stage needs --run-dir")

    try:
        return int(args.func(args))
    except (QrngError, OSError, ValueError) as exc:
        log.error("cli.failed", command=args.cmd, error_type=type(exc).__name__, error=str(exc))
        print(f"vacqrng {args.cmd}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
