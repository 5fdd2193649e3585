"""Command line: ``rstab analyze | verify | sweep --config run.yaml``.

Exit codes: 0 success, 1 check failure or domain error, 2 usage or
configuration error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .config import SUITES, as_plain, load_config
from .errors import (
    BadParams,
    ConfigError,
    MeshFormatError,
    MeshNotFound,
    PositivityLost,
    RStabError,
    SolverDivergence,
    UnknownSurface,
)

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3

_USAGE_ERRORS = (ConfigError, MeshNotFound, MeshFormatError, UnknownSurface, BadParams)
_SOLVER_ERRORS = (SolverDivergence, PositivityLost)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"rstab: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rstab", description="Stability of r-minimal and constant H_{r+1} hypersurfaces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="admissibility, operator, spectrum and stability verdict")
    a.add_argument("--config", required=True)

    v = sub.add_parser("verify", help="convergence and identity checks")
    v.add_argument("--config", required=True)
    v.add_argument("--suite", action="append", choices=SUITES,
                   help="suite to run (repeatable; default: config checks, else all)")

    s = sub.add_parser("sweep", help="analyze over a parameter range")
    s.add_argument("--config", required=True)
    s.add_argument("--param")
    s.add_argument("--from", dest="start", type=float)
    s.add_argument("--to", dest="stop", type=float)
    s.add_argument("--steps", type=int)
    s.add_argument("--bisect-tol", type=float)
    return p


def _emit(report: dict, path: Optional[str]) -> None:
    text = json.dumps(as_plain(report), indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _error(exc: RStabError) -> None:
    print(f"rstab: {exc.code}: {exc}", file=sys.stderr)


def _sweep_args(args, cfg):
    sw = cfg.sweep
    name = args.param or sw.get("param")
    start = args.start if args.start is not None else sw.get("from")
    stop = args.stop if args.stop is not None else sw.get("to")
    steps = args.steps if args.steps is not None else sw.get("steps")
    if name is None or start is None or stop is None or steps is None:
        raise ConfigError("sweep needs --param, --from, --to and --steps (or a sweep section)")
    return name, float(start), float(stop), int(steps)


def run(argv=None) -> int:
    from . import runner

    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        report_path = cfg.outputs.get("report")
        if args.command == "analyze":
            report = runner.analyze(cfg)
            _emit(report, report_path)
            st = report["stability"]
            lam = report["spectral"]["lambda"]
            print(f"lambda = {lam['value']:.10g} +- {lam['tol']:.3g}  verdict: {st['verdict']}",
                  file=sys.stderr)
            return EXIT_OK
        if args.command == "verify":
            report = runner.verify(cfg, args.suite)
            _emit(report, report_path)
            for name, res in report["suites"].items():
                print(f"{res['status']}  {name}", file=sys.stderr)
            return EXIT_OK if report["passed"] else EXIT_CHECK
        name, start, stop, steps = _sweep_args(args, cfg)
        report = runner.sweep(cfg, name, start, stop, steps, args.bisect_tol)
        _emit(report, report_path)
        return EXIT_OK
    except _USAGE_ERRORS as exc:
        _error(exc)
        return EXIT_USAGE
    except _SOLVER_ERRORS as exc:
        _error(exc)
        return EXIT_SOLVER
    except RStabError as exc:
        _error(exc)
        return EXIT_CHECK


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
