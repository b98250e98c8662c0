"""Command-line interface.

Subcommands: gen, solve, reproduce, sweep-psv, label-pointcloud.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 solver failure.
"""

import argparse
import os
import sys

from . import harness
from .errors import SparsevecError, SubproblemFail
from .models import load_points
from .solvers import CONVERGED

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SOLVER = 4


def _add_common(p):
    p.add_argument("--seed", type=int, default=None, help="base RNG seed")
    p.add_argument("--out", default=None, help="output file or directory")
    p.add_argument("--config", default=None, help="flat key=value config file")
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--no-timing", action="store_true",
                   help="write zeros in elapsed-time columns (byte-stable reruns)")
    p.add_argument("-o", "--override", action="append", default=[],
                   metavar="KEY=VAL", help="config override, repeatable")


def build_parser():
    ap = argparse.ArgumentParser(prog="sparsevec",
                                 description="Sparsest-vector-in-a-subspace toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic instance CSV")
    p.add_argument("model", choices=harness.MODELS)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--p1", type=int)
    p.add_argument("--p2", type=int)
    p.add_argument("--theta", type=float)
    _add_common(p)

    p = sub.add_parser("solve", help="run a solver on an instance")
    p.add_argument("instance", nargs="?", help="instance CSV (omit to generate inline)")
    p.add_argument("--solver", choices=harness.SOLVERS)
    p.add_argument("--loss")
    p.add_argument("--mu", type=float)
    p.add_argument("--seeds", help="comma-separated seed list")
    p.add_argument("--dist-tracking", choices=["on", "off"], default="on")
    _add_common(p)

    p = sub.add_parser("reproduce", help="rerun a benchmark figure configuration")
    p.add_argument("which", choices=["dpcp", "odl"])
    _add_common(p)

    p = sub.add_parser("sweep-psv", help="success-rate sweep over sparsity levels")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--p", type=int, default=1000)
    p.add_argument("--thetas", default="0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5")
    p.add_argument("--seeds", default=",".join(str(s) for s in range(20)))
    _add_common(p)

    p = sub.add_parser("label-pointcloud", help="label inliers/outliers via subspace fit")
    p.add_argument("points", help="CSV with one point per row")
    p.add_argument("--r", type=int, default=1, help="subspace co-dimension")
    p.add_argument("--tau", type=float, default=0.05, help="relative residual threshold")
    _add_common(p)
    return ap


def _layers(args):
    layers = []
    if args.config:
        layers.append(harness.parse_config_file(args.config))
    for ov in args.override:
        if "=" not in ov:
            raise ValueError(f"override must be KEY=VAL, got {ov!r}")
        k, v = ov.split("=", 1)
        layers.append({k.strip(): v.strip()})
    return layers


def _run(args):
    if args.command == "gen":
        cli = {k: getattr(args, k) for k in ("n", "p", "r", "p1", "p2", "theta")
               if getattr(args, k, None) is not None}
        cli["model"] = args.model
        cli["seed"] = args.seed if args.seed is not None else 0
        cfg = harness.resolve_config(cli, *_layers(args))
        out = args.out or f"{args.model}_seed{cfg['seed']}.csv"
        harness.cmd_gen(cfg, out)
        if not args.quiet:
            print(f"wrote {out}")
        return EXIT_OK

    if args.command == "solve":
        cli = {k: getattr(args, k) for k in ("solver", "loss", "mu", "seeds")
               if getattr(args, k, None) is not None}
        if args.seed is not None:
            cli["seeds"] = str(args.seed)
        cfg = harness.resolve_config(*_layers(args), cli)
        out_dir = args.out or "."
        os.makedirs(out_dir, exist_ok=True)
        summary, results = harness.cmd_solve(
            cfg, instance_path=args.instance, out_dir=out_dir,
            track_dist=args.dist_tracking == "on", no_timing=args.no_timing)
        if not args.quiet:
            sys.stdout.write(summary.format_csv(no_timing=args.no_timing))
        ok = all(r.status == CONVERGED for r in results)
        return EXIT_OK if ok else EXIT_SOLVER

    if args.command == "reproduce":
        out_dir = args.out or f"reproduce_{args.which}"
        paths = harness.cmd_reproduce(args.which, out_dir,
                                      seed=args.seed if args.seed is not None else 0,
                                      no_timing=args.no_timing)
        if not args.quiet:
            for path in paths:
                print(f"wrote {path}")
        return EXIT_OK

    if args.command == "sweep-psv":
        thetas = [float(t) for t in args.thetas.split(",") if t]
        seeds = [int(s) for s in args.seeds.split(",") if s != ""]
        out = args.out or "sweep_psv.csv"
        harness.cmd_sweep_psv(args.n, args.p, thetas, seeds, out_path=out)
        if not args.quiet:
            print(f"wrote {out}")
        return EXIT_OK

    if args.command == "label-pointcloud":
        points, _ = load_points(args.points)
        cfg_layers = _layers(args)
        cfg = {}
        for layer in cfg_layers:
            cfg.update(layer)
        labels, _, _, skipped = harness.cmd_label_pointcloud(
            points, args.r, cfg=cfg, tau=args.tau)
        if skipped and not args.quiet:
            print(f"warning: skipped {skipped} zero points", file=sys.stderr)
        out = args.out or "labeled_points.csv"
        harness.atomic_write(out, harness.format_labeled_points(points, labels))
        if not args.quiet:
            print(f"wrote {out}")
        return EXIT_OK

    raise AssertionError("unreachable")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except SubproblemFail as exc:
        print(f"error: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        path = getattr(exc, "filename", None)
        print(f"error: I/O failure{f' on {path}' if path else ''}: {exc}",
              file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, SparsevecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
