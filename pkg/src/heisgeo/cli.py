"""Command-line front end: ``heisgeo <command> ...``.

Exit codes are 0 on success, 2 for bad input, 3 for I/O failures and 4 when
the computation itself fails. Settings come from defaults, then the JSON file
named by ``HEISGEO_CONFIG`` (or ``--config``), then explicit flags.
"""

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import serialize
from .core import HeisPoint
from .curves import DEFAULT_SAMPLES, horizontal_lift, length_H
from .fourier import EQUALITY_RTOL, HIGH_HARMONIC_RTOL, isoperimetric_report
from .geodesic import GeodesicParams, align_geodesics, distance, geodesic_to_point, unitary_to_json
from .oracle import DEFAULT_K, DEFAULT_QUADRATURE, DEFAULT_STARTS, RESIDUAL_BOUND, VariationalProblem

EXIT_OK, EXIT_INPUT, EXIT_IO, EXIT_COMPUTE = 0, 2, 3, 4
CONFIG_ENV = "HEISGEO_CONFIG"

DEFAULT_TOLERANCES = {
    "equality_rtol": EQUALITY_RTOL,
    "harmonic_rtol": HIGH_HARMONIC_RTOL,
    "oracle_residual": RESIDUAL_BOUND,
    "unitarity": 1e-12,
}


class InputError(Exception):
    pass


class ComputationError(Exception):
    pass


@dataclass
class Config:
    n: int = None
    samples: int = DEFAULT_SAMPLES
    harmonics: int = DEFAULT_K
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    format: str = "json"
    seed: int = 0

    def validate(self):
        if self.samples < 16:
            raise InputError(f"samples must be >= 16, got {self.samples}")
        if self.harmonics < 2:
            raise InputError(f"harmonics must be >= 2, got {self.harmonics}")
        if self.format not in ("json", "csv"):
            raise InputError(f"format must be 'json' or 'csv', got {self.format!r}")
        for name, value in self.tolerances.items():
            if not (isinstance(value, (int, float)) and value > 0):
                raise InputError(f"tolerance {name!r} must be a positive number, got {value!r}")
        return self


def load_config(path=None, overrides=None):
    """Merge defaults, an optional JSON file and explicit overrides."""
    cfg = Config()
    path = path or os.environ.get(CONFIG_ENV)
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"config {path}: line {exc.lineno}: {exc.msg}") from exc
        known = {f.name for f in fields(Config)}
        unknown = set(data) - known
        if unknown:
            raise InputError(f"config {path}: unknown keys {sorted(unknown)}")
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(data.pop("tolerances", {}))
        cfg = replace(cfg, tolerances=tol, **data)
    for key, value in (overrides or {}).items():
        if value is not None:
            setattr(cfg, key, value)
    return cfg.validate()


def _point(text, n=None):
    try:
        p = HeisPoint.parse(text)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if n is not None and p.n != n:
        raise InputError(f"point {text!r} has n={p.n}, config says n={n}")
    return p


def _complex_vector(text):
    parts = text.split(";")
    try:
        re = [float(v) for v in parts[0].split(",")]
        im = [float(v) for v in parts[1].split(",")] if len(parts) > 1 else [0.0] * len(re)
    except ValueError as exc:
        raise InputError(f"cannot parse direction {text!r}: {exc}") from exc
    if len(parts) > 2 or len(re) != len(im):
        raise InputError(f"direction must be 're1,..,ren[;im1,..,imn]', got {text!r}")
    return np.array(re) + 1j * np.array(im)


def _read_curve(path):
    try:
        return serialize.read_curve(path)
    except serialize.CurveFormatError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _report_paths(paths, cfg):
    first, second = paths if cfg.format == "csv" else paths[::-1]
    print(f"wrote {first} and {second}")


def _emit(obj):
    print(serialize.dumps(obj))


def cmd_distance(args, cfg):
    p, q = _point(args.p, cfg.n), _point(args.q)
    if p.n != q.n:
        raise InputError(f"dimension mismatch: n={p.n} vs n={q.n}")
    print(repr(distance(p, q)))


def cmd_geodesic(args, cfg):
    q = _point(args.q, cfg.n)
    if q.t == 0.0 and not np.any(q.z):
        raise InputError("target must differ from the origin")
    direction = _complex_vector(args.direction) if args.direction else None
    try:
        g = geodesic_to_point(q, direction=direction)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    curve = g.sample(cfg.samples)
    paths = serialize.write_curve(curve, args.out, g.metadata())
    _report_paths(paths, cfg)
    print(f"length {length_H(curve)!r} distance {g.length!r}")


def cmd_lift(args, cfg):
    curve, meta = _read_curve(args.curve)
    base = curve.base if hasattr(curve, "base") else curve
    lifted = horizontal_lift(base, args.t0)
    out = Path(args.out) if args.out else Path(args.curve).with_name(Path(args.curve).stem + "_lifted")
    paths = serialize.write_curve(lifted, out, meta)
    _report_paths(paths, cfg)
    print(f"horizontality_residual {lifted.horizontality_residual!r}")
    print(f"delta_t {float(lifted.t[-1] - lifted.t[0])!r}")


def cmd_iso(args, cfg):
    curve, _ = _read_curve(args.curve)
    base = curve.base if hasattr(curve, "base") else curve
    tol = cfg.tolerances
    try:
        report = isoperimetric_report(
            base, K=args.K, rtol=tol["equality_rtol"], harmonic_rtol=tol["harmonic_rtol"]
        )
    except ValueError as exc:
        raise ComputationError(str(exc)) from exc
    _emit(report.to_json())


def _geodesic_params(path):
    _, meta = _read_curve(path)
    try:
        return GeodesicParams.from_json(meta)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: metadata lacks geodesic parameters ({exc})") from exc


def cmd_align(args, cfg):
    p1, p2 = _geodesic_params(args.g1), _geodesic_params(args.g2)
    try:
        U = align_geodesics(p1, p2)
    except ValueError as exc:
        raise ComputationError(str(exc)) from exc
    deviation = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
    ok = deviation <= cfg.tolerances["unitarity"]
    _emit({"unitary": unitary_to_json(U), "unitarity": "ok" if ok else "failed", "max_deviation": deviation})
    if not ok:
        raise ComputationError(f"unitarity check failed: deviation {deviation:.3e}")


def cmd_oracle(args, cfg):
    from .oracle import minimize_length

    q = _point(args.target, cfg.n)
    try:
        prob = VariationalProblem(
            q.n,
            q,
            K=cfg.harmonics,
            M=args.quadrature,
            residual_bound=cfg.tolerances["oracle_residual"],
            n_starts=args.starts,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    try:
        result = minimize_length(prob, seed=cfg.seed, samples=cfg.samples)
    except (ValueError, ArithmeticError) as exc:
        raise ComputationError(str(exc)) from exc
    _emit(result.to_json())


def _selftest_checks():
    from .fourier import circle_curve
    from .geodesic import H_eval, H_inverse

    origin = HeisPoint.origin(1)
    yield "t-axis distance", abs(distance(HeisPoint([0], [0], 4 * math.pi), origin) - 2 * math.pi) < 1e-12
    yield "planar distance", distance(HeisPoint([3], [4], 0), origin) == 5.0
    yield "H round-trip", abs(float(H_eval(H_inverse(3.7))) - 3.7) < 1e-12
    rep = isoperimetric_report(circle_curve([0.3], [0.2], samples=256))
    yield "circle equality", rep.equality_case.value == "pos"
    g = geodesic_to_point(HeisPoint([0.4], [0.1], 0.9))
    yield "geodesic endpoint", bool(np.allclose(g.evaluate(g.s_end)[0], [0.4, 0.1, 0.9], atol=1e-12))


def cmd_selftest(args, cfg):
    failed = 0
    for name, ok in _selftest_checks():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
        failed += not ok
    if failed:
        raise ComputationError(f"{failed} self-test check(s) failed")


def build_parser():
    # Shared flags are accepted before or after the command name.
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    common.add_argument("--n", type=int, help="expected dimension n of point arguments")
    common.add_argument("--samples", type=int, help="samples M for sampled curves")
    common.add_argument("--harmonics", type=int, help="harmonics K for the oracle")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--format", choices=["json", "csv"], help="curve file listed first")
    parser = argparse.ArgumentParser(
        prog="heisgeo", description="Geodesics and distances in H^n.", parents=[common]
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    p = sub.add_parser("distance", help="CC distance between two points")
    p.add_argument("p")
    p.add_argument("q")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("geodesic", help="sample a shortest geodesic from the origin")
    p.add_argument("q")
    p.add_argument("--out", required=True, help="output path; .csv and .json are written")
    p.add_argument("--direction", help="family member for t-axis targets, 're1,..;im1,..'")
    p.set_defaults(func=cmd_geodesic)

    p = sub.add_parser("lift", help="horizontal lift of a planar curve file")
    p.add_argument("curve")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("iso", help="isoperimetric report of a closed curve file")
    p.add_argument("curve")
    p.add_argument("--K", type=int)
    p.set_defaults(func=cmd_iso)

    p = sub.add_parser("align", help="unitary carrying one t-axis geodesic onto another")
    p.add_argument("g1")
    p.add_argument("g2")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("oracle", help="brute-force shortest curve to a target")
    p.add_argument("target")
    p.add_argument("--starts", type=int, default=DEFAULT_STARTS)
    p.add_argument("--quadrature", type=int, default=DEFAULT_QUADRATURE)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("selftest", help="quick consistency checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        flags = {key: getattr(args, key, None) for key in ("n", "samples", "harmonics", "seed", "format")}
        cfg = load_config(getattr(args, "config", None), flags)
        args.func(args, cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ComputationError as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
