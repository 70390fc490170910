"""Command-line front end: ``se3conv <command> ...``.

Exit codes: 0 success, 1 a verification check failed, 2 I/O or parse error,
3 triangle violation or mismatched weight block header, 4 shape mismatch.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import textio
from .activation import relu_activation
from .clebsch_gordan import cg_scalar
from .config import get_tolerances, set_tolerances
from .conv import SE3Weights, iota, iota_inv, se3_conv_layer, tfn_layer
from .errors import (BlockHeaderMismatch, NotARotation, ParseError, Se3ConvError, ShapeMismatch,
                     TriangleViolation)
from .harmonics import eval_real_spherical_harmonics, wigner_D_real_euler
from .sampling import exact_euler_grid, fps_rotations, icosahedral_group
from .verify import DEFAULT_SEED, SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_IO, EXIT_TRIANGLE, EXIT_SHAPE = 0, 1, 2, 3, 4


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        textio.write_text(out, text)


def rescale_cloud(points: np.ndarray) -> np.ndarray:
    """Center on the centroid and scale so every point lies in the closed unit ball."""
    c = points - points.mean(axis=0)
    r = np.linalg.norm(c, axis=1).max()
    return c / r if r > 0 else c


# ---------------------------------------------------------------------------
# Commands


def cmd_verify(args) -> int:
    if args.report:
        # fail on an unwritable report path before spending time on the checks
        textio.write_text(args.report, "")
    rep = run_suite(args.suite, seed=args.seed, tolerance=args.tolerance,
                    progress=lambda r: print(r.line(), flush=True))
    print(f"SUMMARY {rep.n_passed}/{len(rep.checks)}")
    if args.report:
        textio.write_text(args.report, rep.render())
    return EXIT_OK if rep.all_passed else EXIT_FAIL


def cmd_convert_weights(args) -> int:
    w = textio.parse_weights(textio.read_text(args.input))
    form = "se3" if isinstance(w, SE3Weights) else "tfn"
    if form != args.src:
        raise BlockHeaderMismatch(f"{args.input} holds {form} weights, not {args.src}")
    if args.src != args.dst:
        w = iota(w) if args.src == "se3" else iota_inv(w)
    textio.write_text(args.output, textio.format_weights(w))
    return EXIT_OK


def run_conv(points: np.ndarray, field, cfg: textio.LayerConfig, weights, seed: int = 0,
             exclude_self: bool = False, direct: bool = False):
    """Apply one configured layer (and its optional activation) to a field.

    SE(3) weights are mapped to TFN form and both forms run through the TFN layer,
    so an SE(3) weight file and its converted TFN file give byte-identical output.
    ``direct`` evaluates SE(3) weights with the SE(3) layer instead.
    """
    form = "se3" if isinstance(weights, SE3Weights) else "tfn"
    if form != cfg.form:
        raise BlockHeaderMismatch(f"config declares form={cfg.form} but the weight file is {form}")
    excl = exclude_self or cfg.exclude_self
    field.uniform_channels()
    if form == "se3" and direct:
        out = se3_conv_layer(field, points, weights, cfg.kernel, lmax_out=cfg.lmax_out, exclude_self=excl)
    else:
        v = iota(weights) if form == "se3" else weights
        out = tfn_layer(field, points, v, cfg.kernel, lmax_out=cfg.lmax_out, exclude_self=excl)
    if cfg.activation == "relu":
        s = textio.parse_sample_set_name(cfg.activation_set, seed)
        out = relu_activation(out, s, lmax_out=cfg.truncate)
    elif cfg.truncate is not None:
        out = out.truncate(cfg.truncate) if cfg.truncate <= out.max_degree else out.padded(cfg.truncate)
    return out


def cmd_conv(args) -> int:
    points = textio.parse_cloud(textio.read_text(args.cloud))
    field = textio.parse_field(textio.read_text(args.field))
    cfg = textio.parse_layer_config(textio.read_text(args.layer), os.path.dirname(os.path.abspath(args.layer)))
    weights = textio.parse_weights(textio.read_text(cfg.weights_path))
    if args.rescale:
        points = rescale_cloud(points)
    out = run_conv(points, field, cfg, weights, args.seed, args.exclude_self, args.direct)
    _emit(textio.format_field(out), args.out)
    return EXIT_OK


def cmd_eval_basis(args) -> int:
    lines = []
    if args.sh is not None:
        l, m = int(args.sh[0]), int(args.sh[1])
        x = np.array([textio.parse_float(t) for t in args.sh[2:]])
        if l < 0 or abs(m) > l:
            raise ParseError(f"order m={m} out of range for degree l={l}")
        lines.append(textio.fmt(eval_real_spherical_harmonics(l, x)[m + l]))
    if args.cg is not None:
        l, lp, L, m, mp, M = args.cg
        lines.append(textio.fmt(cg_scalar(l, lp, m, mp, L, M)))
    if args.wigner is not None:
        l = int(args.wigner[0])
        if l < 0:
            raise ParseError("degree must be nonnegative")
        a, b, g = (textio.parse_float(t) for t in args.wigner[1:])
        lines.extend(textio.fmt_row(row) for row in wigner_D_real_euler(l, a, b, g))
    if not lines:
        raise ParseError("eval-basis needs --sh, --cg or --wigner")
    _emit("".join(s + "\n" for s in lines), args.out)
    return EXIT_OK


def cmd_sample_rotations(args) -> int:
    if args.kind == "ico":
        s = icosahedral_group()
    else:
        if args.param is None or args.param < 1:
            raise ParseError(f"--kind {args.kind} needs --param >= 1")
        s = exact_euler_grid(args.param) if args.kind == "grid" else fps_rotations(args.param, args.seed)
    _emit(textio.format_rotation_set(s), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="seed for verification streams and FPS tie-breaking")
    common.add_argument("--tolerance", type=float, default=argparse.SUPPRESS,
                        help="verify: replaces every check tolerance; elsewhere: rotation orthogonality tolerance")
    common.add_argument("--rescale", action="store_true", default=argparse.SUPPRESS,
                        help="center the point cloud and scale it into the unit ball")
    common.add_argument("--exclude-self", action="store_true", default=argparse.SUPPRESS,
                        help="drop the j = i term from point-cloud sums")

    p = argparse.ArgumentParser(prog="se3conv", description="SE(3) and TFN point-cloud convolutions.",
                                parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run the numerical verification suite")
    v.add_argument("--suite", choices=SUITES)
    v.add_argument("--report", help="also write the report to this file")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("convert-weights", parents=[common], help="map weights between SE(3) and TFN forms")
    c.add_argument("--from", dest="src", choices=("se3", "tfn"), required=True)
    c.add_argument("--to", dest="dst", choices=("se3", "tfn"), required=True)
    c.add_argument("input")
    c.add_argument("output")
    c.set_defaults(func=cmd_convert_weights)

    k = sub.add_parser("conv", parents=[common], help="apply a configured layer to a feature field")
    k.add_argument("--cloud", required=True)
    k.add_argument("--field", required=True)
    k.add_argument("--layer", required=True)
    k.add_argument("--out")
    k.add_argument("--direct", action="store_true", help="evaluate SE(3) weights without mapping to TFN form")
    k.set_defaults(func=cmd_conv)

    e = sub.add_parser("eval-basis", parents=[common], help="print harmonic, CG or Wigner values")
    e.add_argument("--sh", nargs=5, metavar=("L", "M", "X", "Y", "Z"))
    e.add_argument("--cg", nargs=6, type=int, metavar=("L1", "L2", "L", "M1", "M2", "M"))
    e.add_argument("--wigner", nargs=4, metavar=("L", "ALPHA", "BETA", "GAMMA"))
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval_basis)

    s = sub.add_parser("sample-rotations", parents=[common], help="emit a rotation sample set")
    s.add_argument("--kind", choices=("grid", "ico", "fps"), required=True)
    s.add_argument("--param", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample_rotations)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_IO if e.code else EXIT_OK
    args.seed = getattr(args, "seed", DEFAULT_SEED)
    args.tolerance = getattr(args, "tolerance", None)
    args.rescale = getattr(args, "rescale", False)
    args.exclude_self = getattr(args, "exclude_self", False)
    saved = get_tolerances()
    if args.tolerance is not None and args.command != "verify":
        set_tolerances(saved.replace(orth=args.tolerance))
    try:
        return args.func(args)
    except (TriangleViolation, BlockHeaderMismatch) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_TRIANGLE
    except ShapeMismatch as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SHAPE
    except (ParseError, NotARotation, Se3ConvError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    finally:
        set_tolerances(saved)


if __name__ == "__main__":
    sys.exit(main())
