"""Batch command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import appio
from .features import GvfParams, edge_saliency, gvf
from .metric import CostParams, MODE_FB, MODE_TUBE, anisotropy_ratio, control_set, directional_costs
from .pipeline import segment_fb, segment_tube

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems; the CLI contract wants 1
    def error(self, message):
        raise _UsageError(message)


def _add_metric_flags(p):
    p.add_argument("--alpha-f", type=float, default=2.0)
    p.add_argument("--alpha-b", type=float, default=3.0)
    p.add_argument("--beta-s", type=float, default=10.0)
    p.add_argument("--beta-d", type=float, default=10.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.1)


def build_parser():
    parser = _Parser(prog="frontprop",
                     description="Randers fronts-propagation image segmentation")
    sub = parser.add_subparsers(dest="command", required=True)

    fb = sub.add_parser("segment-fb", help="foreground/background Voronoi segmentation")
    fb.add_argument("--image", required=True)
    fb.add_argument("--seeds", required=True)
    _add_metric_flags(fb)
    fb.add_argument("--colorspace", choices=("rgb", "lab"), default="rgb")
    fb.add_argument("--out-label", required=True)
    fb.add_argument("--out-dist", required=True)
    fb.add_argument("--out-contours", required=True)

    tube = sub.add_parser("segment-tube", help="n_th-truncated tubularity segmentation")
    tube.add_argument("--image", required=True)
    tube.add_argument("--seeds", required=True)
    _add_metric_flags(tube)
    tube.add_argument("--colorspace", choices=("rgb", "lab"), default="rgb")
    tube.add_argument("--n-th", type=int, required=True)
    tube.add_argument("--mu", default="auto")
    tube.add_argument("--t-h", default="auto")
    tube.add_argument("--out-label", required=True)
    tube.add_argument("--out-dist", required=True)
    tube.add_argument("--out-contours", required=True)

    mi = sub.add_parser("metric-info", help="control set, kappa and directional costs at a pixel")
    mi.add_argument("--image", required=True)
    mi.add_argument("--point", required=True, help="X,Y pixel coordinates")
    mi.add_argument("--samples", type=int, default=64)
    _add_metric_flags(mi)
    mi.add_argument("--mode", choices=(MODE_FB, MODE_TUBE), default=MODE_FB)
    mi.add_argument("--out", required=True)

    gv = sub.add_parser("gvf", help="dump the gradient vector flow field")
    gv.add_argument("--image", required=True)
    _add_metric_flags(gv)
    gv.add_argument("--out", required=True)

    sv = sub.add_parser("serve", help="run the HTTP session service")
    sv.add_argument("--port", type=int, default=None)
    sv.add_argument("--static", default=None, help="directory of UI assets to serve at /")
    sv.add_argument("--host", default="127.0.0.1")
    return parser


def _params(args, mu="auto"):
    return CostParams(alpha_f=args.alpha_f, alpha_b=args.alpha_b,
                      beta_s=args.beta_s, beta_d=args.beta_d,
                      sigma=args.sigma, epsilon=args.epsilon, mu=mu)


def _cmd_segment_fb(args):
    img = appio.load_image(args.image)
    with open(args.seeds, "rb") as fh:
        seeds = appio.parse_seeds(fh.read(), img.grid)
    result = segment_fb(img, seeds, _params(args), colorspace=args.colorspace,
                        compute_kappa=False)
    appio.save_label_png(result.label_map, args.out_label)
    appio.write_distance_map(result.distance_map, args.out_dist)
    appio.save_contours_json(result.contours, args.out_contours)
    return EXIT_OK


def _cmd_segment_tube(args):
    img = appio.load_image(args.image)
    with open(args.seeds, "rb") as fh:
        seeds = appio.parse_seeds(fh.read(), img.grid)
    mu = "auto" if args.mu == "auto" else float(args.mu)
    t_h = None if args.t_h == "auto" else float(args.t_h)
    result = segment_tube(img, seeds, _params(args, mu=mu), n_th=args.n_th,
                          t_h=t_h, compute_kappa=False)
    appio.save_label_png(result.label_map, args.out_label)
    appio.write_distance_map(result.distance_map, args.out_dist)
    appio.save_contours_json(result.contours, args.out_contours)
    return EXIT_OK


def _cmd_metric_info(args):
    img = appio.load_image(args.image)
    try:
        sx, sy = (int(v) for v in args.point.split(","))
    except ValueError:
        raise _UsageError("--point expects X,Y") from None
    if not img.grid.contains(sx, sy):
        raise appio.DataError(f"point ({sx},{sy}) outside the image")
    from .pipeline import _metric_from_image
    from .grid import ScalarField
    zeta = ScalarField(img.grid, img.gray()) if args.mode == MODE_TUBE else None
    metric, _, _ = _metric_from_image(img, _params(args), args.mode, zeta=zeta)
    polygon = control_set(metric, (sx, sy), args.samples)
    # directional protocol: 72 rotations of g(x) at pi/36 steps
    records = directional_costs(metric, (sx, sy), n=72)
    payload = {
        "point": [sx, sy],
        "kappa": anisotropy_ratio(metric),
        "control_set": [[float(px), float(py)] for px, py in polygon],
        "directional_costs": records,
    }
    with open(args.out, "w") as fh:
        json.dump(payload, fh)
    return EXIT_OK


def _cmd_gvf(args):
    img = appio.load_image(args.image)
    rho = edge_saliency(img, args.sigma)
    res = gvf(rho, GvfParams(epsilon=args.epsilon))
    h = res.field.values
    payload = {
        "width": img.grid.width,
        "height": img.grid.height,
        "converged": res.converged,
        "iterations": res.iterations,
        "hx": np.round(h[..., 0], 9).ravel().tolist(),
        "hy": np.round(h[..., 1], 9).ravel().tolist(),
    }
    with open(args.out, "w") as fh:
        json.dump(payload, fh)
    return EXIT_OK


def _cmd_serve(args):
    from .server import serve
    port = args.port
    if port is None:
        port = int(os.environ.get("FFP_PORT", "8000"))
    serve(host=args.host, port=port, static_dir=args.static)
    return EXIT_OK


_COMMANDS = {
    "segment-fb": _cmd_segment_fb,
    "segment-tube": _cmd_segment_tube,
    "metric-info": _cmd_metric_info,
    "gvf": _cmd_gvf,
    "serve": _cmd_serve,
}


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (appio.DataError, FileNotFoundError, ValueError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (ArithmeticError, np.linalg.LinAlgError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
