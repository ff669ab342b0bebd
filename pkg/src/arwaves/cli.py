"""Command line front end: ``arwaves <subcommand> [options]``.

Errors are reported on stderr as one JSON object ``{"error": ..., "message": ...}``
with exit code 2 for invalid configuration and 3 for failures inside a module.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .config import OUTPUT_DIR_ENV, ExperimentConfig, run
from .errors import ConfigInvalid, ModuleError

EXIT_CONFIG = 2
EXIT_MODULE = 3


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises ConfigInvalid instead of exiting."""

    def error(self, message):
        raise ConfigInvalid(message)


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _int_range(text: str) -> List[int]:
    """``6..12`` (every integer), ``6..12:2`` (stepped) or ``6,8,10``."""
    try:
        if ".." in text:
            lo, rest = text.split("..", 1)
            hi, _, step = rest.partition(":")
            return list(range(int(lo), int(hi) + 1, int(step) if step else 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer range {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--seed", type=_u64, default=argparse.SUPPRESS, help="unsigned 64-bit seed (default 0)")
    g.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="cap on BLAS/OpenMP threads")
    g.add_argument("--out", default=argparse.SUPPRESS,
                   help=f"output file ('-' for stdout); default ${OUTPUT_DIR_ENV}/<subcommand>.<fmt> or stdout")
    g.add_argument("--format", choices=["csv", "json"], default=argparse.SUPPRESS)

    parser = _Parser(prog="arwaves", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)

    p = sub.add_parser("lattice", parents=[common], help="lattice points on a circle")
    p.add_argument("action", nargs="?", choices=["show", "scan"], default="show")
    p.add_argument("--n", type=int)
    p.add_argument("--limit", type=int)
    p.add_argument("--kappa", type=float)
    p.add_argument("--json", dest="format", action="store_const", const="json", default=argparse.SUPPRESS)
    p.add_argument("--csv", dest="format", action="store_const", const="csv", default=argparse.SUPPRESS)

    p = sub.add_parser("covariance", parents=[common], help="rescaled covariance against J0 on a disk grid")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid", type=float, default=0.01)
    p.add_argument("--radius", type=float, default=1.0)

    p = sub.add_parser("almost-period", parents=[common], help="almost period of the rescaled covariance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--mode", choices=["pigeonhole", "scan", "linearised"], default="pigeonhole")
    p.add_argument("--eps", type=float)
    p.add_argument("--radius", type=float, default=20.0, help="scan radius (scan mode)")
    p.add_argument("--h", type=float, default=0.01, help="scan grid spacing (scan mode)")

    p = sub.add_parser("simulate", parents=[common], help="sample a wave on a grid")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid", type=float, required=True)
    p.add_argument("--window", default="0,0,1,1")
    p.add_argument("--rescaled", action="store_true")

    p = sub.add_parser("optimality", parents=[common], help="Monte Carlo for random-direction kernels")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--N", type=_int_range, required=True)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--spacing", type=float)

    p = sub.add_parser("nodal", parents=[common], help="nodal set of one sampled wave")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--window", default="0,0,1,1")
    p.add_argument("--phi", choices=["const", "coordx", "bump"], default="const")
    p.add_argument("--rescaled", action="store_true")

    p = sub.add_parser("expected-length", parents=[common], help="mean nodal length against the closed form")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--h", type=float)

    p = sub.add_parser("correlation", parents=[common], help="full-torus versus small-ball nodal length")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, help="ball radius exponent; omit for the full torus")
    p.add_argument("--trials", type=int, default=300)
    p.add_argument("--h", type=float)

    p = sub.add_parser("compare-models", parents=[common], help="full versus linearised almost-period bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--scan-radius", type=float, default=50.0)

    return parser


_GLOBAL = ("seed", "threads", "out", "format")


def config_from_args(argv: Optional[List[str]] = None) -> ExperimentConfig:
    ns = vars(build_parser().parse_args(argv))
    sc = ns.pop("subcommand", None)
    if not sc:
        raise ConfigInvalid("no subcommand given")
    glob = {k: ns.pop(k) for k in _GLOBAL if k in ns}
    params = {k.replace("-", "_"): v for k, v in ns.items() if v is not None}
    return ExperimentConfig(
        subcommand=sc,
        params=params,
        seed=glob.get("seed", 0),
        threads=glob.get("threads"),
        out=glob.get("out"),
        format=glob.get("format"),
    )


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv: Optional[List[str]] = None) -> int:
    try:
        cfg = config_from_args(argv)
        run(cfg)
    except ConfigInvalid as exc:
        return _fail("ConfigInvalid", str(exc), EXIT_CONFIG)
    except ModuleError as exc:
        return _fail("ModuleError", str(exc), EXIT_MODULE)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
