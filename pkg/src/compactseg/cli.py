"""Command-line entry point: ``compactseg <subcommand> ...``.

Exit codes: 0 success, 1 error (including usage errors), 2 for ``segment``
when ADMM hit ``--max-iters`` without converging (the mask is still
written).
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import io
from .admm import AdmmConfig, run
from .baselines import gc_sweep_values, graphcut_segment
from .energy import DEFAULT_PROB_CLAMP, evaluate, unary_from_probability
from .errors import CompactSegError
from .grid import WeightConfig, apply_feature_weights, build_edges
from .linsolve import SolverConfig
from .metrics import dice
from .oracle import MAX_PIXELS, brute_force_full
from .phantom import KINDS, PhantomSpec, make_phantom

EXIT_OK, EXIT_ERROR, EXIT_MAX_ITERS = 0, 1, 2

log = logging.getLogger("compactseg")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _add_graph_flags(p):
    p.add_argument("--conn", type=int, choices=(4, 8, 6, 26), default=None,
                   help="neighbourhood; default 4 in 2-D, 6 in 3-D")
    p.add_argument("--image", help="PGM or raster image for edge-sensitive weights")
    p.add_argument("--sigma", type=float, nargs="+", default=None,
                   help="per-feature weight scales sigma_k (requires --image)")


def _add_admm_flags(p, lam_required=True):
    if lam_required:
        p.add_argument("--lambda", dest="lam", type=float, required=True,
                       help="compactness weight")
    p.add_argument("--mu1", type=float, default=2000.0, help="initial penalty on y = z")
    p.add_argument("--mu2", type=float, default=50.0, help="initial penalty on s = 1^T z")
    p.add_argument("--growth", type=float, default=1.01, help="per-iteration penalty factor")
    p.add_argument("--eps", type=float, default=1e-3, help="RMS convergence threshold")
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--pcg-tol", type=float, default=1e-8)
    p.add_argument("--pcg-max-iters", type=int, default=1000)
    p.add_argument("--prob-eps", type=float, default=DEFAULT_PROB_CLAMP,
                   help="probability clamp before taking logs")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="compactseg", description="Binary segmentation with a perimeter-squared over area prior.", formatter_class=fmt)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="{segment,phantom,evaluate,energy,sweep}",
                                parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("segment", formatter_class=fmt,
                       help="segment a probability map under the compactness prior")
    p.add_argument("--prob", required=True, help="float32 raster of foreground probabilities")
    _add_admm_flags(p)
    _add_graph_flags(p)
    p.add_argument("--seed-free", action="store_true",
                   help="accepted for script compatibility; segmentation never uses seeds")
    p.add_argument("--out", required=True, help="output mask (.pgm, or raw uint8 raster)")
    p.add_argument("--trace", help="per-iteration trace CSV")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("phantom", formatter_class=fmt, help="write a synthetic phantom")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--dims", type=int, nargs="+", default=[64, 64])
    p.add_argument("--noise", type=float, nargs=3, metavar=("P_IN", "P_OUT", "SIGMA_N"),
                   default=[0.8, 0.2, 0.25])
    p.add_argument("--radius", type=float)
    p.add_argument("--inner-radius", type=float)
    p.add_argument("--width", type=float)
    p.add_argument("--aspect", type=float, default=8.0)
    p.add_argument("--angle", type=float, default=0.0, help="bar rotation in degrees")
    p.add_argument("--branch-angle", type=float, default=60.0, help="bifurcation opening, degrees")
    p.add_argument("--center", type=float, nargs="+")
    p.add_argument("--blur", type=float, default=0.0, help="Gaussian blur of the noisy map (px)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-gt", required=True, help="ground-truth mask (.pgm or raster)")
    p.add_argument("--out-prob", required=True, help="float32 probability raster")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("evaluate", formatter_class=fmt, help="Dice overlap of two masks")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("energy", formatter_class=fmt, help="energy breakdown of a mask")
    p.add_argument("--mask", required=True)
    p.add_argument("--prob", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--prob-eps", type=float, default=DEFAULT_PROB_CLAMP)
    _add_graph_flags(p)
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("sweep", formatter_class=fmt,
                       help="Dice over a parameter grid for one method")
    p.add_argument("--method", choices=("gc", "compactness"), required=True)
    p.add_argument("--param-grid",
                   help="comma-separated values or 'log:START:STOP:N'; for gc the default is "
                        "20 log-spaced values over [1e-2, 1e2] x median|u|")
    p.add_argument("--prob", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--out", help="CSV output path (default: stdout)")
    _add_admm_flags(p, lam_required=False)
    _add_graph_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", formatter_class=fmt)
    p.add_argument("--prob", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--prob-eps", type=float, default=DEFAULT_PROB_CLAMP)
    _add_graph_flags(p)
    p.set_defaults(func=cmd_oracle)
    # keep the debugging command out of the help listing
    sub._choices_actions = [a for a in sub._choices_actions if a.dest != "oracle"]
    return parser


def _load_unaries(args):
    header, p = io.read_raster(args.prob, probability=True)
    return header.domain, unary_from_probability(p.astype(np.float64), args.prob_eps)


def _graph(args, domain):
    cfg = WeightConfig(connectivity=args.conn)
    graph = build_edges(domain, cfg.resolve_connectivity(domain))
    if args.image:
        if not args.sigma:
            raise CompactSegError("--image needs --sigma")
        features = io.read_image(args.image)
        graph = apply_feature_weights(
            graph, features, WeightConfig(args.conn, tuple(args.sigma), uniform=False)
        )
    elif args.sigma:
        raise CompactSegError("--sigma needs --image")
    return graph


def _admm_config(args, lam) -> AdmmConfig:
    return AdmmConfig(
        lam=lam,
        mu1_init=args.mu1,
        mu2_init=args.mu2,
        growth=args.growth,
        eps_conv=args.eps,
        max_iters=args.max_iters,
        solver=SolverConfig(args.pcg_tol, args.pcg_max_iters),
    )


def cmd_segment(args) -> int:
    domain, u = _load_unaries(args)
    graph = _graph(args, domain)
    result = run(u, graph, _admm_config(args, args.lam))
    io.write_mask(result.y, domain, args.out)
    if args.trace:
        io.write_trace_csv(result.trace, args.trace)
    rep = result.report
    log.info("iterations=%d converged=%s E=%.6g area=%d", result.iterations,
             result.converged, rep.energy, rep.area)
    if rep.empty:
        print("warning: empty segmentation", file=sys.stderr)
    return EXIT_OK if result.converged else EXIT_MAX_ITERS


def cmd_phantom(args) -> int:
    spec = PhantomSpec(
        kind=args.kind,
        dims=tuple(args.dims),
        center=tuple(args.center) if args.center else None,
        radius=args.radius,
        inner_radius=args.inner_radius,
        width=args.width,
        aspect=args.aspect,
        angle=args.angle,
        branch_angle=args.branch_angle,
        p_in=args.noise[0],
        p_out=args.noise[1],
        sigma_n=args.noise[2],
        blur=args.blur,
        seed=args.seed,
    )
    gt, prob = make_phantom(spec)
    io.write_mask(gt, spec.domain, args.out_gt)
    io.write_raster(prob, io.RasterHeader(spec.dims, "float32"), args.out_prob)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    d_pred, pred = io.read_mask(args.pred)
    d_gt, gt = io.read_mask(args.gt)
    if d_pred != d_gt:
        raise CompactSegError(f"mask dims differ: {d_pred.dims} vs {d_gt.dims}")
    print(f"dice={dice(pred, gt):.17g}")
    return EXIT_OK


def cmd_energy(args) -> int:
    domain, u = _load_unaries(args)
    d_mask, y = io.read_mask(args.mask)
    if d_mask != domain:
        raise CompactSegError(f"mask dims {d_mask.dims} differ from probability dims {domain.dims}")
    rep = evaluate(y, u, _graph(args, domain), args.lam)
    for key, value in rep.as_dict().items():
        print(f"{key}={value:.17g}" if isinstance(value, float) else f"{key}={value}")
    return EXIT_OK


def parse_grid(text: str) -> np.ndarray:
    if text.startswith("log:"):
        try:
            _, a, b, n = text.split(":")
            return np.logspace(np.log10(float(a)), np.log10(float(b)), int(n))
        except ValueError as exc:
            raise CompactSegError(f"bad log grid {text!r}; expected log:START:STOP:N") from exc
    try:
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError as exc:
        raise CompactSegError(f"bad parameter grid {text!r}") from exc


def cmd_sweep(args) -> int:
    domain, u = _load_unaries(args)
    d_gt, gt = io.read_mask(args.gt)
    if d_gt != domain:
        raise CompactSegError("ground-truth dims differ from probability dims")
    graph = _graph(args, domain)
    if args.param_grid:
        grid = parse_grid(args.param_grid)
    elif args.method == "gc":
        grid = gc_sweep_values(u)
    else:
        raise CompactSegError("--param-grid is required for the compactness method")
    lines = ["param,dice"]
    for value in grid:
        if args.method == "gc":
            y = graphcut_segment(u, float(value), graph)
        else:
            y = run(u, graph, _admm_config(args, float(value))).y
        lines.append(f"{value:.17g},{dice(y, gt):.17g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_oracle(args) -> int:
    domain, u = _load_unaries(args)
    if domain.size > MAX_PIXELS:
        raise CompactSegError(f"oracle handles at most {MAX_PIXELS} pixels")
    y, energy = brute_force_full(u, _graph(args, domain), args.lam)
    print("y=" + "".join(str(int(v)) for v in y))
    print(f"E={energy:.17g}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CompactSegError, OSError, ValueError) as exc:
        print(f"compactseg: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
