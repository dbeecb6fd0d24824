"""Command-line front end: ``tanlab <subcommand> ...``.

Exit codes: 0 success, 2 bad flags, 3 resonant multiplier, 4 insufficient
series data, 5 I/O failure, 6 lift clearance violation.
"""
from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import re
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import mpmath

from . import __version__
from .core import (
    POLE,
    Polyline,
    TangentMap,
    asymptotic_values,
    derivative,
    evaluate,
    lift_curve,
)
from .errors import (
    ClearanceViolation,
    InsufficientData,
    IoFailure,
    LiftDivergence,
    RationalInput,
    ResonantMultiplier,
)
from .rotation import (
    QUADRATICS,
    bounded_type_prefix,
    brjuno_partial,
    continued_fraction,
    convergents,
    from_quotients,
    multiplier,
    named_quadratic,
)
from .scan import ScanConfig, render, scan_dynamical, scan_parameter, write_param_csv
from .siegel import SiegelConfig, bounded_disk_scan, linearizer, unboundedness_indicators

EXIT_USAGE = 2
EXIT_RESONANT = 3
EXIT_INSUFFICIENT = 4
EXIT_IO = 5
EXIT_CLEARANCE = 6

_COMPLEX_RE = re.compile(
    r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?"
    r"([+-](\d+(\.\d*)?|\.\d+)?([eE][+-]?\d+)?[ij])?$"
    r"|^[+-]?((\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?)?[ij]$"
)


class UsageError(Exception):
    pass


def parse_complex(text: str) -> complex:
    """Parse ``"a+bi"`` (spaces allowed around the sign, ``i`` or ``j``)."""
    s = re.sub(r"\s*([+-])\s*", r"\1", text.strip())
    if not s or not _COMPLEX_RE.match(s):
        raise UsageError(f"cannot parse complex number {text!r}")
    s = s.replace("i", "j")
    if s[-1] == "j" and (len(s) == 1 or s[-2] in "+-"):
        s = s[:-1] + "1j"
    return complex(s)


def _floats(text, n=None):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse list of numbers {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def _rotation(args, depth=60):
    """RotationNumber from --quadratic or --theta."""
    if getattr(args, "quadratic", None):
        if args.quadratic not in QUADRATICS:
            raise UsageError(f"unknown quadratic {args.quadratic!r}")
        return named_quadratic(args.quadratic, depth=depth, dps=args.precision)
    theta = getattr(args, "theta", None)
    if theta is None:
        return None
    if theta in QUADRATICS:
        return named_quadratic(theta, depth=depth, dps=args.precision)
    try:
        mpmath.mpf(theta)
    except (ValueError, TypeError):
        raise UsageError(f"cannot parse theta {theta!r}") from None
    try:
        return continued_fraction(theta, depth, dps=args.precision)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _tangent_map(args) -> TangentMap:
    if getattr(args, "lam", None) is not None:
        lam = parse_complex(args.lam)
    else:
        rn = _rotation(args)
        if rn is None:
            raise UsageError("give --lambda or --theta")
        lam = multiplier(rn)
    if lam == 0:
        raise UsageError("lambda must be nonzero")
    return TangentMap(lam)


def _pair(z):
    if z is POLE:
        return "Pole"
    return [z.real, z.imag]


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    input_hashes: dict = field(default_factory=dict)
    tool_version: str = __version__
    wall_clock_seconds: float = 0.0
    started_at: str = ""
    outputs: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)


def _out_dir(args) -> Path:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create output directory {out}: {exc}") from exc
    return out


def _config_echo(args):
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _write_manifest(out: Path, manifest: RunManifest, t0: float):
    manifest.wall_clock_seconds = round(time.perf_counter() - t0, 6)
    path = out / f"{manifest.subcommand}.manifest.json"
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(asdict(manifest), fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def _manifest(args):
    now = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return RunManifest(args.command, _config_echo(args), started_at=now)


def _emit(obj):
    print(json.dumps(obj))


def cmd_eval(args):
    fmap = _tangent_map(args)
    if args.z is None:
        raise UsageError("--z is required")
    z = parse_complex(args.z)
    _emit(
        {
            "lambda": _pair(fmap.lam),
            "z": _pair(z),
            "value": _pair(evaluate(fmap, z)),
            "derivative": _pair(derivative(fmap, z)),
            "asymptotic_values": [_pair(v) for v in asymptotic_values(fmap)],
        }
    )
    return 0


def cmd_siegel(args):
    t0 = time.perf_counter()
    rn = _rotation(args)
    if rn is None:
        raise UsageError("give --theta or --quadratic")
    rhos = _floats(args.rhos)
    config = SiegelConfig(
        coeffs=args.coeffs,
        precision_digits=args.precision,
        samples=args.samples,
        extent_threshold=args.extent_threshold,
        gap_threshold=args.gap_threshold,
    )
    series = linearizer(rn, config.coeffs, config.precision_digits)
    try:
        est = unboundedness_indicators(rn, rhos, config, series=series)
    except InsufficientData:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = _out_dir(args)
    manifest = _manifest(args)
    try:
        est.to_json(out / "siegel.json")
        est.write_traces_csv(out / "traces.csv")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    manifest.outputs = {"report": "siegel.json", "traces": "traces.csv"}
    manifest.extra = {"theta": mpmath.nstr(rn.theta, 30), "verdict": est.verdict.value}
    _write_manifest(out, manifest, t0)
    _emit(
        {
            "verdict": est.verdict.value,
            "radius_estimate": est.radius_estimate,
            "extent": est.extent,
            "image_gap": est.image_gap,
            "heuristic": True,
        }
    )
    return 0


def _resolution(text):
    parts = re.split(r"[x,]", text)
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise UsageError(f"cannot parse resolution {text!r}") from None
    if len(vals) == 1:
        vals = vals * 2
    if len(vals) != 2:
        raise UsageError(f"cannot parse resolution {text!r}")
    return tuple(vals)


def _scan_config(args, fmap):
    overrides = {}
    if args.max_iter is not None:
        overrides["max_iter"] = args.max_iter
    if args.cycle_tol is not None:
        overrides["cycle_tol"] = args.cycle_tol
    if args.cycle_max_period is not None:
        overrides["cycle_max_period"] = args.cycle_max_period
    if args.escape_im is not None:
        overrides["escape_im"] = args.escape_im
    try:
        return ScanConfig.for_map(fmap, **overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_scan(args):
    t0 = time.perf_counter()
    fmap = _tangent_map(args)
    rect = _floats(args.rect, 4)
    res = _resolution(args.res)
    config = _scan_config(args, fmap)
    try:
        grid = scan_dynamical(fmap, rect, res, config, threads=args.threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = _out_dir(args)
    written = render(grid, out / args.name, png=not args.no_png)
    manifest = _manifest(args)
    manifest.outputs = {k: Path(v).name for k, v in written.items()}
    manifest.extra = {"histogram": grid.histogram()}
    _write_manifest(out, manifest, t0)
    _emit(grid.histogram())
    return 0


def cmd_param_scan(args):
    t0 = time.perf_counter()
    thetas = None
    if args.thetas:
        thetas = []
        for item in args.thetas.split(","):
            item = item.strip()
            thetas.append(named_quadratic(item) if item in QUADRATICS else item)
    lo, hi = _floats(args.range, 2)
    samples = scan_parameter(
        (lo, hi), args.res, eps=args.eps, thetas=thetas, threads=args.threads
    )
    out = _out_dir(args)
    write_param_csv(samples, out / "param_scan.csv")
    manifest = _manifest(args)
    manifest.outputs = {"sweep": "param_scan.csv"}
    manifest.extra = {"errors": {repr(s.theta): s.error for s in samples if s.error}}
    _write_manifest(out, manifest, t0)
    _emit({"samples": len(samples), "siegel_flags": sum(s.siegel_flag for s in samples)})
    return 0


def cmd_cf(args):
    if args.quadratic:
        rn = _rotation(args, depth=args.depth)
    elif args.x is not None:
        try:
            rn = continued_fraction(args.x, args.depth, dps=args.precision)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        raise UsageError("give --x or --quadratic")
    top, _ = bounded_type_prefix(rn)
    try:
        brjuno = [brjuno_partial(rn, n).value for n in range(1, len(rn.quotients) + 1)]
    except RationalInput:
        brjuno = None
    _emit(
        {
            "theta": mpmath.nstr(rn.theta, 30),
            "quotients": list(rn.quotients),
            "convergents": [list(pq) for pq in convergents(rn)],
            "max_quotient": top,
            "brjuno_partials": brjuno,
            "rational": rn.rational,
        }
    )
    return 0


def _read_curve(path):
    pts = []
    try:
        with open(path, encoding="utf-8") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    for line in data.splitlines():
        line = line.strip()
        if not line or line.lower().startswith("re"):
            continue
        vals = _floats(line, 2)
        pts.append(complex(vals[0], vals[1]))
    if not pts:
        raise UsageError(f"no points in {path}")
    return pts, hashlib.sha256(data.encode("utf-8")).hexdigest()


def cmd_lift(args):
    t0 = time.perf_counter()
    fmap = _tangent_map(args)
    pts, digest = _read_curve(args.curve)
    base = parse_complex(args.base)
    curve = Polyline(pts)
    try:
        lifted = lift_curve(fmap, curve, base)
    except ValueError as exc:
        if isinstance(exc, ClearanceViolation):
            raise
        raise UsageError(str(exc)) from None
    back = fmap(lifted.points)
    deviation = float(abs(back - curve.points).max())
    out = _out_dir(args)
    try:
        with open(out / "lift.csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("index,re,im\n")
            for j, z in enumerate(lifted.points):
                fh.write(f"{j},{float(z.real)!r},{float(z.imag)!r}\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    manifest = _manifest(args)
    manifest.input_hashes = {str(args.curve): digest}
    manifest.outputs = {"lift": "lift.csv"}
    manifest.extra = {"max_roundtrip_deviation": deviation}
    _write_manifest(out, manifest, t0)
    end = complex(lifted.points[-1])
    _emit({"points": len(lifted), "end": _pair(end), "max_roundtrip_deviation": deviation})
    return 0


def _candidate(text):
    text = text.strip()
    if text in QUADRATICS:
        return named_quadratic(text)
    if text.startswith("e-2:"):
        k = int(text[4:])
        with mpmath.workdps(60):
            prefix = continued_fraction(mpmath.e - 2, k).quotients
        return text, from_quotients(prefix, tail=(1,))
    if text.startswith("cf:"):
        return text, from_quotients([int(a) for a in text[3:].split("/")], tail=(1,))
    return continued_fraction(text, 40)


DEFAULT_CANDIDATES = "golden,sqrt2m1,e-2:5,e-2:8,e-2:11"


def cmd_bounded_scan(args):
    t0 = time.perf_counter()
    try:
        candidates = [_candidate(c) for c in args.candidates.split(",")]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    config = SiegelConfig(coeffs=args.coeffs, precision_digits=args.precision)
    report = bounded_disk_scan(candidates, config, _floats(args.rhos), threads=args.threads)
    out = _out_dir(args)
    try:
        with open(out / "bounded_scan.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    manifest = _manifest(args)
    manifest.outputs = {"report": "bounded_scan.json"}
    _write_manifest(out, manifest, t0)
    _emit(
        {
            "heuristic": True,
            "ranking": [[e.label, e.verdict or e.error] for e in report.entries],
        }
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="tanlab-out", help="output directory")
    common.add_argument("--threads", type=int, default=1, help="worker threads (0 = auto)")
    common.add_argument("--precision", type=int, default=50, help="working decimal digits")

    lam = argparse.ArgumentParser(add_help=False)
    lam.add_argument("--lambda", dest="lam", help='complex parameter, e.g. "0.5+0i"')
    lam.add_argument("--theta", help="rotation number (decimal or golden/sqrt2m1)")

    p = argparse.ArgumentParser(prog="tanlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"tanlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("eval", parents=[common, lam], help="evaluate f, f' and asymptotic values")
    s.add_argument("--z")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("siegel", parents=[common], help="linearize and test unboundedness")
    s.add_argument("--theta")
    s.add_argument("--quadratic", choices=sorted(QUADRATICS))
    s.add_argument("--coeffs", type=int, default=SiegelConfig.coeffs)
    s.add_argument("--rhos", default="0.9,0.95,0.99,0.995")
    s.add_argument("--samples", type=int, default=SiegelConfig.samples)
    s.add_argument("--extent-threshold", type=float, default=SiegelConfig.extent_threshold)
    s.add_argument("--gap-threshold", type=float, default=SiegelConfig.gap_threshold)
    s.set_defaults(func=cmd_siegel)

    s = sub.add_parser("scan", parents=[common, lam], help="classify a dynamical-plane grid")
    s.add_argument("--rect", default="-1.5,-1.5,1.5,1.5", help="x0,y0,x1,y1")
    s.add_argument("--res", default="256", help="N or NXxNY")
    s.add_argument("--name", default="scan", help="image file stem")
    s.add_argument("--max-iter", type=int)
    s.add_argument("--cycle-tol", type=float)
    s.add_argument("--cycle-max-period", type=int)
    s.add_argument("--escape-im", type=float)
    s.add_argument("--no-png", action="store_true")
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("param-scan", parents=[common], help="sweep theta on the unit circle")
    s.add_argument("--range", default="0,1")
    s.add_argument("--res", type=int, default=64)
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--thetas", help="explicit comma-separated thetas (decimals or names)")
    s.set_defaults(func=cmd_param_scan)

    s = sub.add_parser("cf", parents=[common], help="continued fraction and Brjuno partials")
    s.add_argument("--x")
    s.add_argument("--quadratic", choices=sorted(QUADRATICS))
    s.add_argument("--depth", type=int, default=20)
    s.set_defaults(func=cmd_cf)

    s = sub.add_parser("lift", parents=[common, lam], help="lift a curve through f")
    s.add_argument("--curve", required=True, help="CSV of re,im rows")
    s.add_argument("--base", required=True, help="preimage of the first curve point")
    s.set_defaults(func=cmd_lift)

    s = sub.add_parser("bounded-scan", parents=[common], help="rank candidates by disk stability")
    s.add_argument(
        "--candidates",
        default=DEFAULT_CANDIDATES,
        help="comma list: golden, sqrt2m1, decimals, e-2:K (K quotients of e-2 then 1s), cf:a/b/c",
    )
    s.add_argument("--coeffs", type=int, default=SiegelConfig.coeffs)
    s.add_argument("--rhos", default="0.9,0.95,0.99,0.995")
    s.set_defaults(func=cmd_bounded_scan)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"tanlab {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResonantMultiplier as exc:
        print(f"tanlab {args.command}: resonant multiplier at n={exc.n}: {exc}", file=sys.stderr)
        return EXIT_RESONANT
    except InsufficientData as exc:
        print(f"tanlab {args.command}: InsufficientData: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except IoFailure as exc:
        print(f"tanlab {args.command}: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except ClearanceViolation as exc:
        print(
            f"tanlab {args.command}: curve comes within {exc.distance:.6g} of an "
            f"asymptotic value",
            file=sys.stderr,
        )
        return EXIT_CLEARANCE
    except LiftDivergence as exc:
        print(f"tanlab {args.command}: {exc}", file=sys.stderr)
        return EXIT_CLEARANCE


if __name__ == "__main__":
    sys.exit(main())
