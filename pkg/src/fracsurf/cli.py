"""Subcommand pipeline tying the library into reproducible runs.

Configuration comes from an optional ``--config`` file (see
:mod:`fracsurf.config` for the schema) with command-line flags overriding
individual keys; without a config the defaults reproduce the built-in
worked example (sin(x^2+y^2) data on the unit square, alpha = 0.2).

Exit codes: 0 success, 1 validation/usage failure, 2 verification failure,
3 I/O failure.  Every ``verify-*`` subcommand wraps exactly one check
operation and prints the residual it returns; report-producing subcommands
write matplotlib figures next to their CSV output unless figures are
disabled.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .calculus import check_thm_partial_integral, cumulative_integral
from .config import RunSpec, parse_config, system_from_spec, validate_spec
from .errors import FracsurfError
from .export import export_cloud_csv, export_field_csv, export_pgm16
from .fif import (
    attractor_distance,
    chaos_game,
    check_matching,
    check_selfref,
    evaluate_many,
    sample,
)
from .fractional import check_thm_frac_derivative, check_thm_frac_integral, frac_integral_mixed, odd_odd_max
from .transforms import KernelSpec, transform_direct

SUBCOMMANDS = (
    "build",
    "sample",
    "render",
    "chaos",
    "verify-selfref",
    "integrate",
    "verify-partial",
    "frac-integrate",
    "verify-frac",
    "verify-frac-deriv",
    "transform",
    "verify-transform",
    "reproduce-example",
)

_DEFAULT_THRESHOLDS = {
    "verify-selfref": None,  # 2 * tol, resolved at run time
    "verify-partial": 5e-3,
    "verify-frac": 1e-2,
    "verify-frac-deriv": 5e-2,
    "verify-transform": 1e-2,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 instead of argparse's 2
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="fracsurf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="subcommand")
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--preset", default=None)
        p.add_argument("--grid-n", type=int, default=None)
        p.add_argument("--grid-m", type=int, default=None)
        p.add_argument("--rect", default=None, help="four numbers: a b c d")
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--resolution", type=int, default=None)
        p.add_argument("--nx", type=int, default=None)
        p.add_argument("--ny", type=int, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--threshold", type=float, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--n-points", type=int, default=None)
        p.add_argument("--burn-in", type=int, default=None)
        p.add_argument("--n-samples", type=int, default=None)
        p.add_argument("--gamma-p", type=float, default=None)
        p.add_argument("--gamma-q", type=float, default=None)
        p.add_argument("--kernel", default=None)
        p.add_argument("--lambda", dest="lam", type=float, default=None)
        p.add_argument("--points", default=None, help="per-axis transform values")
        p.add_argument("--axis", default=None)
        p.add_argument("--no-figures", action="store_true")
    return parser


_FLAG_FIELDS = {
    "out": "out_dir",
    "preset": "grid_preset",
    "grid_n": "grid_n",
    "grid_m": "grid_m",
    "alpha": "alpha",
    "resolution": "resolution",
    "nx": "nx",
    "ny": "ny",
    "tol": "tol",
    "threshold": "threshold",
    "seed": "seed",
    "n_points": "n_points",
    "burn_in": "burn_in",
    "n_samples": "n_samples",
    "gamma_p": "gamma_p",
    "gamma_q": "gamma_q",
    "kernel": "kernel",
    "lam": "lam",
    "axis": "axis",
}


def _spec_from_args(args) -> RunSpec:
    if args.config is not None:
        spec = parse_config(Path(args.config).read_text(encoding="utf-8"))
    else:
        spec = RunSpec()
    overrides = {}
    for flag, field in _FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field] = value
    if args.rect is not None:
        overrides["grid_rect"] = tuple(float(v) for v in args.rect.split())
    if args.points is not None:
        overrides["points"] = tuple(float(v) for v in args.points.split())
    if args.no_figures:
        overrides["figures"] = False
    if overrides:
        spec = dataclasses.replace(spec, **overrides)
        validate_spec(spec)
    return spec


def _outdir(spec: RunSpec) -> Path:
    path = Path(spec.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _verify_report(name, rows, threshold, spec, passed) -> None:
    """Print the residual table and drop csv + figure into the out dir."""
    width = max(len(label) for label, _ in rows)
    for label, value in rows:
        print(f"{label:<{width}}  {value:.17g}")
    print(f"threshold {threshold:.17g}: {'PASS' if passed else 'FAIL'}")
    out = _outdir(spec)
    lines = ["check,residual"] + [f"{label},{value:.17g}" for label, value in rows]
    (out / f"{name}.csv").write_text("\n".join(lines) + "\n", encoding="ascii")
    if spec.figures:
        from .figures import residual_png

        residual_png(
            [label for label, _ in rows],
            [value for _, value in rows],
            threshold,
            out / f"{name}.png",
            title=name,
        )


def _cmd_build(spec: RunSpec, args) -> int:
    sys_ = system_from_spec(spec)
    g = sys_.grid
    print(
        f"system: {g.n} x {g.m} patches on rect {g.rect}, "
        f"sigma = {sys_.sigma:.17g}, sup|q| = {sys_.q_sup:.17g}"
    )
    print(f"matching residual = {check_matching(sys_, spec.n_samples):.17g}")
    return 0


def _cmd_sample(spec: RunSpec, args) -> int:
    sys_ = system_from_spec(spec)
    field = sample(sys_, spec.nx, spec.ny, spec.tol)
    out = _outdir(spec)
    export_field_csv(field, out / "surface.csv")
    print(f"wrote {out / 'surface.csv'}")
    return 0


def _cmd_render(spec: RunSpec, args) -> int:
    sys_ = system_from_spec(spec)
    field = sample(sys_, spec.nx, spec.ny, spec.tol)
    out = _outdir(spec)
    export_field_csv(field, out / "surface.csv")
    export_pgm16(field, out / "surface.pgm")
    names = ["surface.csv", "surface.pgm"]
    if spec.figures:
        from .figures import surface_png

        surface_png(field, out / "surface.png", title=f"alpha = {spec.alpha}")
        names.append("surface.png")
    print(f"wrote {', '.join(str(out / n) for n in names)}")
    return 0


def _cmd_chaos(spec: RunSpec, args) -> int:
    sys_ = system_from_spec(spec)
    cloud = chaos_game(sys_, spec.n_points, spec.seed, spec.burn_in)
    out = _outdir(spec)
    export_cloud_csv(cloud, out / "cloud.csv")
    names = ["cloud.csv"]
    if spec.figures:
        from .figures import cloud_png

        cloud_png(cloud, out / "cloud.png", title=f"{len(cloud)} points")
        names.append("cloud.png")
    print(f"wrote {', '.join(str(out / n) for n in names)}")
    print(f"attractor distance = {attractor_distance(cloud, sys_, spec.tol):.17g}")
    return 0


def _cmd_verify_selfref(spec: RunSpec, args) -> int:
    sys_ = system_from_spec(spec)
    residual = check_selfref(sys_, spec.n_points, spec.tol)
    threshold = spec.threshold if spec.threshold is not None else 2.0 * spec.tol
    passed = residual <= threshold
    _verify_report(
        "verify-selfref", [("selfref", residual)], threshold, spec, passed
    )
    return 0 if passed else 2


def _cmd_integrate(spec: RunSpec, args) -> int:
    sys_ = system_from_spec(spec)
    field = sample(sys_, spec.resolution, spec.resolution, spec.tol)
    integ = cumulative_integral(field, spec.axis)
    out = _outdir(spec)
    export_field_csv(integ, out / "integral.csv")
    names = ["integral.csv"]
    if spec.figures:
        from .figures import heatmap_png

        heatmap_png(integ, out / "integral.png", title=f"running integral ({spec.axis})")
        names.append("integral.png")
    print(f"wrote {', '.join(str(out / n) for n in names)}")
    return 0


def _cmd_verify_partial(spec: RunSpec, args) -> int:
    sys_ = system_from_spec(spec)
    res = check_thm_partial_integral(sys_, spec.resolution, spec.tol)
    threshold = spec.threshold if spec.threshold is not None else 5e-3
    passed = res.equation_residual <= threshold
    _verify_report(
        "verify-partial",
        [("equation", res.equation_residual), ("generator-gap", res.generator_gap)],
        threshold,
        spec,
        passed,
    )
    return 0 if passed else 2


def _cmd_frac_integrate(spec: RunSpec, args) -> int:
    sys_ = system_from_spec(spec)
    field = sample(sys_, spec.resolution, spec.resolution, spec.tol)
    integ = frac_integral_mixed(field, (spec.gamma_p, spec.gamma_q))
    out = _outdir(spec)
    export_field_csv(integ, out / "frac_integral.csv")
    names = ["frac_integral.csv"]
    if spec.figures:
        from .figures import heatmap_png

        heatmap_png(
            integ,
            out / "frac_integral.png",
            title=f"mixed integral, gamma = ({spec.gamma_p}, {spec.gamma_q})",
        )
        names.append("frac_integral.png")
    print(f"wrote {', '.join(str(out / n) for n in names)}")
    return 0


def _patch_rows(residuals: np.ndarray):
    n, m = residuals.shape
    return [
        (f"patch({i},{j})", float(residuals[i - 1, j - 1]))
        for i in range(1, n + 1)
        for j in range(1, m + 1)
    ]


def _cmd_verify_frac(spec: RunSpec, args) -> int:
    sys_ = system_from_spec(spec)
    residuals = check_thm_frac_integral(
        sys_, (spec.gamma_p, spec.gamma_q), spec.resolution, spec.tol
    )
    threshold = spec.threshold if spec.threshold is not None else 1e-2
    passed = odd_odd_max(residuals) <= threshold
    _verify_report(
        "verify-frac", _patch_rows(residuals), threshold, spec, passed
    )
    print(f"odd/odd max = {odd_odd_max(residuals):.17g} (asserted patches)")
    return 0 if passed else 2


def _cmd_verify_frac_deriv(spec: RunSpec, args) -> int:
    sys_ = system_from_spec(spec)
    residuals = check_thm_frac_derivative(
        sys_, (spec.gamma_p, spec.gamma_q), spec.resolution, spec.tol
    )
    threshold = spec.threshold if spec.threshold is not None else 5e-2
    passed = odd_odd_max(residuals) <= threshold
    _verify_report(
        "verify-frac-deriv", _patch_rows(residuals), threshold, spec, passed
    )
    print(f"odd/odd max = {odd_odd_max(residuals):.17g} (asserted patches)")
    return 0 if passed else 2


def _cmd_transform(spec: RunSpec, args) -> int:
    sys_ = system_from_spec(spec)
    field = sample(sys_, spec.resolution, spec.resolution, spec.tol)
    k = KernelSpec(spec.kernel, spec.lam)
    out = _outdir(spec)
    lines = ["s,t,re,im"]
    for pt in spec.transform_points():
        value = complex(transform_direct(field, k, pt))
        lines.append(f"{pt.s:.17g},{pt.t:.17g},{value.real:.17g},{value.imag:.17g}")
    (out / "transform.csv").write_text("\n".join(lines) + "\n", encoding="ascii")
    print(f"wrote {out / 'transform.csv'} ({spec.kernel}, lambda = {spec.lam})")
    return 0


def _cmd_verify_transform(spec: RunSpec, args) -> int:
    from .transforms import check_transform_identity

    sys_ = system_from_spec(spec)
    k = KernelSpec(spec.kernel, spec.lam)
    residual = check_transform_identity(
        sys_, k, spec.transform_points(), spec.resolution, spec.tol
    )
    threshold = spec.threshold if spec.threshold is not None else 1e-2
    passed = residual <= threshold
    _verify_report(
        "verify-transform", [(spec.kernel, residual)], threshold, spec, passed
    )
    return 0 if passed else 2


def _cmd_reproduce_example(spec: RunSpec, args) -> int:
    sys_ = system_from_spec(spec)
    g = sys_.grid
    out = _outdir(spec)
    rows = ["x,y,z"]
    rows += [
        f"{g.xs[i]:.17g},{g.ys[j]:.17g},{g.zs[i, j]:.17g}"
        for i in range(g.n + 1)
        for j in range(g.m + 1)
    ]
    (out / "Z.csv").write_text("\n".join(rows) + "\n", encoding="ascii")
    field = sample(sys_, spec.resolution, spec.resolution, spec.tol)
    export_field_csv(field, out / "surface.csv")
    export_pgm16(field, out / "surface.pgm")
    if spec.figures:
        from .figures import surface_png

        surface_png(field, out / "fig1.png", title=f"alpha = {spec.alpha}")
    gx, gy = np.meshgrid(g.xs, g.ys, indexing="ij")
    node_err = float(np.max(np.abs(evaluate_many(sys_, gx, gy, spec.tol) - g.zs)))
    matching = check_matching(sys_, spec.n_samples)
    selfref = check_selfref(sys_, spec.n_points, spec.tol)
    report = [
        f"nodes = {(g.n + 1) * (g.m + 1)}",
        f"alpha = {spec.alpha:.17g}",
        f"interpolation max error = {node_err:.17g}",
        f"matching residual = {matching:.17g}",
        f"selfref residual = {selfref:.17g}",
    ]
    (out / "report.txt").write_text("\n".join(report) + "\n", encoding="ascii")
    print("\n".join(report))
    print(f"wrote Z.csv, surface.csv, surface.pgm, report.txt in {out}/")
    return 0


_HANDLERS = {
    "build": _cmd_build,
    "sample": _cmd_sample,
    "render": _cmd_render,
    "chaos": _cmd_chaos,
    "verify-selfref": _cmd_verify_selfref,
    "integrate": _cmd_integrate,
    "verify-partial": _cmd_verify_partial,
    "frac-integrate": _cmd_frac_integrate,
    "verify-frac": _cmd_verify_frac,
    "verify-frac-deriv": _cmd_verify_frac_deriv,
    "transform": _cmd_transform,
    "verify-transform": _cmd_verify_transform,
    "reproduce-example": _cmd_reproduce_example,
}


def cmd_run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(parser.format_usage(), file=sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.command is None:
        print(parser.format_usage(), file=sys.stderr)
        return 1
    try:
        spec = _spec_from_args(args)
        return _HANDLERS[args.command](spec, args)
    except FracsurfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(cmd_run(sys.argv[1:]))


if __name__ == "__main__":
    main()
