"""Command line interface: ``qdiode {steady,evolve,sweep,figure}``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .. import __version__
from ..errors import DiodeError, ValidationError
from ..observables import heat_current_dynamic
from ..solver import evolve, product_state, steady_state
from .config import load_config, parse_preparation, parse_run_config
from .emit import ResultTable, emit, to_csv
from .presets import FIGURE_IDS, figure_preset
from .sweep import run_sweep

log = logging.getLogger("qdiode")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _config_header(config) -> list[tuple[str, str]]:
    return [("tool", f"qdiode {__version__}"), ("config", json.dumps(config.as_dict(), sort_keys=True))]


def steady_table(report) -> ResultTable:
    """Per-subspace view of a steady report; totals go to the header."""
    cfg = report.config
    size = cfg.n_subspaces
    rows = np.column_stack([np.arange(1, size + 1), report.weights, report.subspace_populations,
                            report.cycle_rates])
    header = _config_header(cfg) + [
        ("q_left", _fmt(report.q_left)),
        ("q_right", _fmt(report.q_right)),
        ("q_aux", _fmt(report.q_aux)),
        ("residual", _fmt(report.residual)),
    ]
    return ResultTable(("subspace", "weight", "p_ee", "p_eg", "p_ge", "p_gg", "cycle_rate"), rows, header)


def _plain_steady(report) -> str:
    lines = [f"Q_L = {report.q_left:.10g}", f"Q_R = {report.q_right:.10g}"]
    if report.config.aux_bath is not None:
        lines.append(f"Q_aux = {report.q_aux:.10g}")
    lines.append(f"residual = {report.residual:.3g}")
    lines.append(f"{'m':>4} {'weight':>12} {'cycle rate':>14}")
    for m, (w, g) in enumerate(zip(report.weights, report.cycle_rates), 1):
        lines.append(f"{m:>4} {w:>12.6g} {g:>14.6g}")
    return "\n".join(lines) + "\n"


def _write(payload: bytes, out: Path | None) -> None:
    if out is None:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    else:
        out.write_bytes(payload)
        log.info("wrote %s", out)


def _emit_table(table: ResultTable, fmt: str, out: Path | None) -> None:
    _write(emit(table, fmt), out)
    if fmt == "svg" and out is not None:
        _write(emit(table, "csv"), out.with_suffix(".csv"))


def _with_preparation(spec, text: str | None):
    if text is None:
        return spec
    prep = parse_preparation(text)
    series = tuple(dataclasses.replace(s, preparation=prep) for s in spec.series)
    return dataclasses.replace(spec, series=series)


def cmd_steady(args) -> None:
    config = load_config(Path(args.config).read_text())
    prep = parse_preparation(args.weights) if args.weights else None
    report = steady_state(config, prep, method=args.method)
    if args.format == "plain":
        _write(_plain_steady(report).encode(), args.out)
    else:
        _write(to_csv(steady_table(report)).encode(), args.out)


def cmd_evolve(args) -> None:
    config = load_config(Path(args.config).read_text())
    prep = parse_preparation(args.weights) if args.weights else None
    if args.t_final <= 0 or args.count < 2:
        raise ValidationError("--t-final must be positive and --count at least 2")
    times = np.linspace(0.0, args.t_final, args.count)
    traj = evolve(config, product_state(config, args.initial[0], args.initial[1], prep), times)
    q_l, q_r = heat_current_dynamic(config, traj.states)
    rows = np.column_stack([times, q_l, q_r, traj.max_coherence()])
    table = ResultTable(("time", "q_left", "q_right", "max_coherence"), rows,
                        _config_header(config) + [("initial", args.initial), ("preparation", args.weights or "none")])
    _write(emit(table, "csv"), args.out)


def cmd_sweep(args) -> None:
    spec = parse_run_config(Path(args.spec).read_text(), name=Path(args.spec).stem)
    spec = _with_preparation(spec, args.weights)
    _emit_table(run_sweep(spec, threads=args.threads), args.format, args.out)


def cmd_figure(args) -> None:
    spec = _with_preparation(figure_preset(args.figure), args.weights)
    _emit_table(run_sweep(spec, threads=args.threads), args.format, args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdiode", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=None):
        p.add_argument("--out", type=Path, help="output file (default: stdout)")
        p.add_argument("--weights", metavar="SPEC",
                       help="aux preparation: excited, ground, weights:p1,.., fractions:f1,.., pure:f1,.., weak:T")
        if formats:
            p.add_argument("--format", choices=formats, default=formats[0])

    p = sub.add_parser("steady", help="steady state of one configuration")
    p.add_argument("config", help="TOML run document")
    p.add_argument("--method", choices=("numeric", "analytic"), default="numeric")
    common(p, ("csv", "plain"))
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("evolve", help="heat current along a trajectory")
    p.add_argument("config", help="TOML run document")
    p.add_argument("--t-final", type=float, required=True)
    p.add_argument("--count", type=int, default=201)
    p.add_argument("--initial", choices=("ee", "eg", "ge", "gg"), default="ee",
                   help="initial (left, right) state")
    common(p)
    p.set_defaults(func=cmd_evolve)

    for name, helptext in (("sweep", "run a sweep document"), ("figure", "run a figure preset")):
        p = sub.add_parser(name, help=helptext)
        if name == "sweep":
            p.add_argument("spec", help="TOML run document with a [sweep] section")
        else:
            p.add_argument("figure", metavar="ID", help=", ".join(FIGURE_IDS))
        p.add_argument("--threads", type=int, default=1)
        common(p, ("csv", "svg"))
        p.set_defaults(func=cmd_sweep if name == "sweep" else cmd_figure)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be at least 1")
    try:
        args.func(args)
    except ValidationError as exc:
        for problem in exc.problems:
            print(f"qdiode: invalid input: {problem}", file=sys.stderr)
        return 2
    except (DiodeError, OSError) as exc:
        print(f"qdiode: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
