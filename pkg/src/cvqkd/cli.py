"""Command-line interface: ``cvqkd {skr,optimize,constellation,verify}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import constellations as cons
from .channel import ChannelParams
from .ensemble import Constellation
from .errors import ConfigurationError, ConstellationError, NumericalError
from .optimizer import SUMMARY_FIELDS, TABLE_FIELDS, SearchSpec, optimize_four_state, table_rows
from .rates import DEFAULT_RESOLUTION, RateReport, format_value, parse_resolution, secret_key_rate

FAMILIES = ("psk", "apk", "oapk", "ud4", "file")


class SpecError(ConfigurationError):
    pass


@dataclass(frozen=True)
class ConstellationSpec:
    family: str
    args: tuple = ()
    path: str | None = None


def _spec_error(text: str, pos: int, msg: str) -> SpecError:
    return SpecError(f"constellation spec {text!r}, position {pos}: {msg}")


def parse_constellation_spec(text: str) -> ConstellationSpec:
    """Parse ``psk:N``, ``apk:N1,N2[,ratio]``, ``oapk:N1,N2``, ``ud4`` or ``file:<path>``.

    Positions in error messages are 0-based character offsets into ``text``.
    """
    family, sep, rest = text.partition(":")
    if family not in FAMILIES:
        raise _spec_error(text, 0, f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    start = len(family) + len(sep)
    if family == "ud4":
        if sep:
            raise _spec_error(text, len(family), "ud4 takes no arguments")
        return ConstellationSpec("ud4")
    if not sep or not rest:
        raise _spec_error(text, start, f"{family} needs arguments after ':'")
    if family == "file":
        return ConstellationSpec("file", path=rest)

    fields = []
    pos = start
    for chunk in rest.split(","):
        fields.append((pos, chunk))
        pos += len(chunk) + 1
    arity = {"psk": (1, 1), "apk": (2, 3), "oapk": (2, 2)}[family]
    if not arity[0] <= len(fields) <= arity[1]:
        raise _spec_error(text, start, f"{family} takes {'-'.join(map(str, sorted(set(arity))))} arguments, got {len(fields)}")
    values = []
    for i, (p, chunk) in enumerate(fields):
        if family == "apk" and i == 2:
            try:
                values.append(float(chunk))
            except ValueError:
                raise _spec_error(text, p, f"expected a number, got {chunk!r}") from None
            continue
        if not chunk.isdigit():
            raise _spec_error(text, p, f"expected a positive integer, got {chunk!r}")
        values.append(int(chunk))
    return ConstellationSpec(family, tuple(values))


def parse_tau_range(text: str) -> list[float]:
    """``start:end:count`` with both endpoints included."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigurationError(f"tau range {text!r} must look like start:end:count")
    try:
        start, end, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigurationError(f"tau range {text!r} has a non-numeric field") from None
    if count < 1:
        raise ConfigurationError(f"tau range count must be >= 1, got {count}")
    return [float(t) for t in np.linspace(start, end, count)]


def _parse_grid_range(text: str, name: str) -> tuple[float, float, int]:
    parts = text.split(":")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except (ValueError, IndexError):
        raise ConfigurationError(f"--{name} {text!r} must look like min:max:steps") from None
    return lo, hi, steps


def _validate_taus(taus) -> list[float]:
    for t in taus:
        if not (math.isfinite(t) and 0.0 < t <= 1.0):
            raise ConfigurationError(f"tau {t!r} outside (0, 1]")
    return list(taus)


def _search_template(args, tau: float) -> SearchSpec:
    a_lo, a_hi, a_n = _parse_grid_range(args.alpha1_grid, "alpha1-grid")
    p_lo, p_hi, p_n = _parse_grid_range(args.p1_grid, "p1-grid")
    return SearchSpec(tau, a_lo, a_hi, a_n, p_lo, p_hi, p_n, parse_resolution(args.resolution), args.refine)


def _ud_params(args) -> cons.FourStateUDParams:
    if getattr(args, "from_optimal", None) is not None:
        tau = _validate_taus([args.from_optimal])[0]
        result = optimize_four_state(_search_template(args, tau), workers=args.workers)
        return result.params
    if args.alpha1 is None or args.p1 is None:
        raise ConfigurationError("this family needs --alpha1 and --p1 (or --from-optimal TAU)")
    return cons.FourStateUDParams(args.alpha1, args.p1)


def build_from_spec(spec: ConstellationSpec, args) -> Constellation:
    if spec.family == "psk":
        return cons.build_psk(spec.args[0])
    if spec.family == "apk":
        return cons.build_apk(*spec.args)
    if spec.family == "ud4":
        return cons.build_four_state_ud(_ud_params(args))
    if spec.family == "oapk":
        n1, n2 = spec.args
        return cons.build_oapk(
            cons.OAPKParams(n1, n2, _ud_params(args), args.inner_offset, args.outer_offset)
        )
    try:
        return cons.load(spec.path)
    except OSError as exc:
        raise ConfigurationError(f"cannot read {spec.path}: {exc.strerror}") from None


def _resolve_taus(args) -> list[float]:
    if (args.tau is None) == (args.tau_range is None):
        raise ConfigurationError("give exactly one of --tau or --tau-range")
    taus = args.tau if args.tau is not None else parse_tau_range(args.tau_range)
    return _validate_taus(taus)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _skr_task(args):
    c, tau, resolution = args
    return secret_key_rate(c, ChannelParams(tau), resolution)


def _map(func, tasks, workers: int):
    if workers <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, tasks))


def cmd_skr(args) -> int:
    taus = _resolve_taus(args)
    resolution = parse_resolution(args.resolution)
    c = build_from_spec(parse_constellation_spec(args.constellation), args)
    reports: list[RateReport] = _map(_skr_task, [(c, t, resolution) for t in taus], args.workers)
    if args.format == "json":
        doc = {"constellation": c.to_dict(), "reports": [r.to_dict() for r in reports]}
        _emit(json.dumps(doc, indent=2) + "\n", args.output)
    else:
        _emit(_csv_text(RateReport.FIELDS, [r.csv_row() for r in reports]), args.output)
    return 0


def _tau_tag(tau: float) -> str:
    return format(tau, ".12g")


def cmd_optimize(args) -> int:
    taus = _resolve_taus(args)
    results = [optimize_four_state(_search_template(args, t), workers=args.workers) for t in taus]
    if args.format == "json":
        doc = {"rows": [r.summary() for r in results]}
        _emit(json.dumps(doc, indent=2) + "\n", args.output)
    else:
        rows = [[format_value(r.summary()[k]) for k in SUMMARY_FIELDS] for r in results]
        _emit(_csv_text(SUMMARY_FIELDS, rows), args.output)

    if args.emit_grids:
        out = Path(args.emit_grids)
        out.mkdir(parents=True, exist_ok=True)
        for r in results:
            (out / f"grid_tau{_tau_tag(r.spec.tau)}.csv").write_text(_csv_text(TABLE_FIELDS, table_rows(r)))
    if args.emit_constellation:
        out = Path(args.emit_constellation)
        out.mkdir(parents=True, exist_ok=True)
        for r in results:
            tag = _tau_tag(r.spec.tau)
            cons.dump(cons.build_four_state_ud(r.params), out / f"ud4_tau{tag}.json")
            for n1, n2 in ((4, 4), (8, 8)):
                c = cons.build_oapk(cons.OAPKParams(n1, n2, r.params, args.inner_offset, args.outer_offset))
                cons.dump(c, out / f"oapk{n1}-{n2}_tau{tag}.json")
    return 0


def cmd_constellation(args) -> int:
    c = build_from_spec(parse_constellation_spec(args.constellation), args)
    _emit(cons.dumps(c) + "\n", args.output)
    return 0


def cmd_verify(args) -> int:
    from .verification import run_oracle_suite

    results = run_oracle_suite(seed=args.seed, samples=args.samples, resolution=parse_resolution(args.resolution))
    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}" for r in results]
    _emit("\n".join(lines) + "\n", args.output)
    return 0 if all(r.passed for r in results) else 1


def _resolution_arg(text: str) -> tuple[int, int]:
    try:
        r, a = text.split(",")
        return parse_resolution((int(r), int(a)))
    except (ValueError, ConfigurationError):
        raise argparse.ArgumentTypeError(f"expected R,A (two positive integers), got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvqkd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--resolution", type=_resolution_arg, default=DEFAULT_RESOLUTION,
                        help="quadrature nodes as RADIAL,ANGULAR (default 96,128)")
    common.add_argument("--output", "-o", help="write to this file instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="Monte Carlo seed (verify)")
    common.add_argument("--workers", type=int, default=1, help="worker processes")

    family = argparse.ArgumentParser(add_help=False)
    family.add_argument("--alpha1", type=float, help="inner amplitude for ud4/oapk")
    family.add_argument("--p1", type=float, help="inner-pair probability for ud4/oapk")
    family.add_argument("--inner-offset", type=float, default=0.0, help="OAPK inner ring phase (rad)")
    family.add_argument("--outer-offset", type=float, default=None, help="OAPK outer ring phase (rad, default pi/N2)")

    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--alpha1-grid", default="0.05:0.9:64", help="min:max:steps")
    search.add_argument("--p1-grid", default="0.26:0.49:64", help="min:max:steps, inside (0.25, 0.5)")
    search.add_argument("--refine", action="store_true", help="one zoom pass around the coarse optimum")

    taus = argparse.ArgumentParser(add_help=False)
    taus.add_argument("--tau", type=float, action="append", help="transmittance (repeatable)")
    taus.add_argument("--tau-range", help="start:end:count, endpoints inclusive")
    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("skr", parents=[common, family, search, taus, fmt], help="secret key rate table")
    p.add_argument("--constellation", "-c", required=True, help="psk:N, apk:N1,N2[,R], oapk:N1,N2, ud4 or file:PATH")
    p.add_argument("--from-optimal", type=float, metavar="TAU",
                   help="take alpha1/p1 from the 4-state optimum at TAU")
    p.set_defaults(func=cmd_skr)

    p = sub.add_parser("optimize", parents=[common, search, taus, fmt], help="optimal 4-state UD parameters")
    p.add_argument("--emit-grids", metavar="DIR", help="write the full per-tau evaluation table as CSV")
    p.add_argument("--emit-constellation", metavar="DIR", help="write optimal 4UD and OAPK JSON files")
    p.add_argument("--inner-offset", type=float, default=0.0, help="OAPK inner ring phase (rad)")
    p.add_argument("--outer-offset", type=float, default=None, help="OAPK outer ring phase (rad, default pi/N2)")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("constellation", parents=[common, family, search], help="emit constellation JSON")
    p.add_argument("constellation", help="psk:N, apk:N1,N2[,R], oapk:N1,N2, ud4 or file:PATH")
    p.add_argument("--from-optimal", type=float, metavar="TAU", help="take alpha1/p1 from the 4-state optimum at TAU")
    p.set_defaults(func=cmd_constellation)

    p = sub.add_parser("verify", parents=[common], help="run the oracle self-checks")
    p.add_argument("--samples", type=int, default=200_000, help="Monte Carlo samples per case")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, ConstellationError, NumericalError) as exc:
        print(f"cvqkd {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
