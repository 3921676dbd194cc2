"""
Command line interface
----------------------

::

    hiercloud validate campus3d.hier
    hiercloud synth --hier campus3d.hier --n 100000 --inconsistency 0.3 --cloud gt.hcpc --pred p.hcpd
    hiercloud ensemble p.hcpd --hier campus3d.hier --out he.hcpl
    hiercloud eval --gt gt.hcpc --labels HE=he.hcpl --hier campus3d.hier --alpha 1.0
    hiercloud sample gt.hcpc --method rbs --block 12 12 --n 2048 --seed 7 --count 4 --out samples/
    hiercloud loss --pred p.hcpd --gt gt.hcpc --hier campus3d.hier
    hiercloud stats gt.hcpc
    hiercloud split campus3d.split --clouds regions/

Exit status is 0 on success, 1 when an input is invalid and 2 on a usage error.

"""
import argparse
import logging
import os
import sys
from typing import Dict, List, Optional, Sequence  # noqa

import numpy as np

from . import ensemble, loss, synth
from .errors import HierCloudError
from .geom.sampling import METHODS, SampleSpec, Sampler
from .hierarchy import campus3d, read_hierarchy
from .io.clouds import read_cloud, write_cloud
from .io.labels import read_labels, write_labels
from .io.predictions import read_predictions, write_predictions
from .io.splits import apply_split, read_split
from .io.stats import file_stats
from .metrics import evaluate
from .utilities import THREADS_ENV, default_threads

logger = logging.getLogger(__name__)

CLOUD_EXTENSIONS = (".hcpc", ".csv")


def _hierarchy(path):
    return campus3d() if path is None else read_hierarchy(path)


def _floats(text):
    # type: (str) -> List[float]
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated numbers, got %r" % text)


def _per_level(values, count):
    # type: (List[float], int) -> List[float]
    """A single value repeated ``count`` times, or the values as given."""
    return values * count if len(values) == 1 else values


def _positive_int(text):
    # type: (str) -> int
    try:
        value = int(text)
    except ValueError:
        value = 0
    if value < 1:
        raise argparse.ArgumentTypeError("expected a positive integer, got %r" % text)
    return value


def cmd_validate(args):
    # type: (argparse.Namespace) -> int
    hierarchy = read_hierarchy(args.hierarchy)
    print("H=%i" % hierarchy.depth)
    for level in range(1, hierarchy.depth + 1):
        print("level %i: %i classes" % (level, hierarchy.widths[level - 1]))
    print("fc_paths=%i" % len(hierarchy.paths))
    if hierarchy.ignore_class is not None:
        print("ignore=%s" % hierarchy.ignore_class)
    if hierarchy.provisional:
        print("provisional: some edges are inferred")
    return 0


def cmd_sample(args):
    # type: (argparse.Namespace) -> int
    pc = read_cloud(args.cloud)
    spec = SampleSpec(
        args.method,
        voxel_size=args.voxel_size,
        length=args.block[0],
        width=args.block[1],
        n=args.n,
        seed=args.seed,
    )
    samples = Sampler(pc, spec, args.threads).draws(args.count)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
    extension = "csv" if args.format == "csv" else "hcpc"
    for draw, sample in enumerate(samples):
        center = "-" if sample.center is None else sample.center
        print("draw=%i points=%i center=%s padded=%i" % (draw, len(sample), center, sample.padded))
        if args.out:
            path = os.path.join(args.out, "sample_%04i.%s" % (draw, extension))
            if args.indices:
                np.savetxt(os.path.splitext(path)[0] + ".idx", sample.indices, fmt="%d")
            else:
                write_cloud(path, pc.subset(sample.indices), args.format)
    return 0


def cmd_synth(args):
    # type: (argparse.Namespace) -> int
    hierarchy = _hierarchy(args.hier)
    spec = synth.SynthSpec(
        hierarchy,
        n_points=args.n,
        geometry=args.geometry,
        label_noise=args.label_noise,
        inconsistency_rate=args.inconsistency,
        sharpness=args.sharpness,
        seed=args.seed,
        noise=args.noise,
    )
    pc = synth.gen_ground_truth(spec, args.threads)
    write_cloud(args.cloud, pc)
    logger.info("wrote %i ground-truth points to %s", len(pc), args.cloud)
    if args.pred:
        dists = synth.gen_predictions(spec, pc.hier_labels(hierarchy), args.threads)
        write_predictions(args.pred, dists)
        logger.info("wrote predictions to %s", args.pred)
    return 0


def cmd_ensemble(args):
    # type: (argparse.Namespace) -> int
    hierarchy = _hierarchy(args.hier)
    dists = read_predictions(args.predictions, hierarchy)
    if args.mode == "he":
        labels = ensemble.hierarchical_ensemble(hierarchy, dists, args.weights)
    else:
        labels = ensemble.mc_decision(hierarchy, dists)
    write_labels(args.out, labels)
    logger.info("decoded %i points with %s to %s", len(labels), args.mode.upper(), args.out)
    return 0


def _method_paths(specs):
    # type: (Sequence[str]) -> Dict[str, str]
    methods = {}  # type: Dict[str, str]
    for spec in specs:
        name, sep, path = spec.partition("=")
        if not sep:
            name, path = os.path.splitext(os.path.basename(spec))[0], spec
        methods[name] = path
    return methods


def cmd_eval(args, parser):
    # type: (argparse.Namespace, argparse.ArgumentParser) -> int
    if not args.pred and not args.labels:
        parser.error("eval needs --pred or --labels")
    if args.wcov and not (args.pred_instances and args.gt.lower().endswith(CLOUD_EXTENSIONS)):
        parser.error("--wcov needs a ground-truth cloud for --gt and --pred-instances")
    hierarchy = _hierarchy(args.hier)
    gt = read_labels(args.gt, hierarchy)
    predictions = {}  # type: Dict[str, np.ndarray]
    if args.pred:
        dists = read_predictions(args.pred, hierarchy)
        predictions["HE"] = ensemble.hierarchical_ensemble(hierarchy, dists)
        predictions["MC"] = ensemble.mc_decision(hierarchy, dists)
    for name, path in _method_paths(args.labels or []).items():
        predictions[name] = read_labels(path, hierarchy)
    gt_instances = pred_instances = None
    if args.wcov:
        gt_instances = read_cloud(args.gt).instance
        pred_instances = read_cloud(args.pred_instances).instance
        if gt_instances is None or pred_instances is None:
            raise HierCloudError("--wcov needs instance ids in both clouds")
    report = evaluate(
        hierarchy,
        gt,
        predictions,
        alphas=args.alpha or [1.0],
        gt_instances=gt_instances,
        pred_instances=pred_instances,
        wcov_level=args.wcov_level,
        threads=args.threads,
    )
    if args.out:
        with open(args.out, "w") as f:
            f.write(report.to_text())
    sys.stdout.write(report.to_text() if args.machine else report.to_table())
    if args.plot:
        from .view_geometry import plot_consistency

        plot_consistency(report, path=args.plot, test=True)
    return 0


def cmd_loss(args):
    # type: (argparse.Namespace) -> int
    hierarchy = _hierarchy(args.hier)
    dists = read_predictions(args.pred, hierarchy).normalize()
    targets = read_labels(args.gt, hierarchy)
    beta = _per_level(args.beta, hierarchy.depth)
    gamma = _per_level(args.gamma, hierarchy.depth - 1)
    weights = loss.LossWeights(beta, gamma).check(hierarchy)
    value = loss.total_loss(hierarchy, dists, targets, weights)
    print("total=%r" % value.total)
    print("prediction=%r" % value.prediction)
    print("consistency=%r" % value.consistency)
    for level, v in enumerate(value.prediction_levels, start=1):
        print("prediction/%i=%r" % (level, v))
    for level, v in enumerate(value.consistency_levels, start=1):
        print("consistency/%i=%r" % (level, v))
    return 0


def cmd_stats(args):
    # type: (argparse.Namespace) -> int
    sys.stdout.write(file_stats(args.cloud).to_text())
    return 0


def cmd_split(args):
    # type: (argparse.Namespace) -> int
    table = read_split(args.table)
    clouds = {}
    for name in sorted(os.listdir(args.clouds)):
        region, ext = os.path.splitext(name)
        if ext.lower() in CLOUD_EXTENSIONS and region in table.roles:
            clouds[region] = read_cloud(os.path.join(args.clouds, name))
    groups = apply_split(clouds, table)
    for role, regions in groups.items():
        points = sum(len(pc) for pc in regions.values())
        print("%s=%s points=%i" % (role, ",".join(regions), points))
    return 0


def build_parser():
    # type: () -> argparse.ArgumentParser
    parser = argparse.ArgumentParser(
        prog="hiercloud", description="Hierarchical labels for point cloud segmentation."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log debug messages")
    parser.add_argument("-q", "--quiet", action="store_true", help="log warnings only")
    parser.add_argument(
        "--threads",
        type=_positive_int,
        default=None,
        help="worker threads, default $%s or 1" % THREADS_ENV,
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("validate", help="check a hierarchy config")
    p.add_argument("hierarchy")

    p = sub.add_parser("sample", help="draw samples from a cloud")
    p.add_argument("cloud")
    p.add_argument("--method", choices=[m.replace("_", "-") for m in METHODS], default="rbs")
    p.add_argument("--voxel-size", type=float, default=0.15)
    p.add_argument("--block", type=float, nargs=2, metavar=("L", "W"), default=[12.0, 12.0])
    p.add_argument("--n", type=_positive_int, default=2048)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=_positive_int, default=1)
    p.add_argument("--out", help="directory for the sampled clouds")
    p.add_argument("--format", choices=["binary", "csv"], default="binary")
    p.add_argument("--indices", action="store_true", help="write index lists instead of clouds")

    p = sub.add_parser("synth", help="generate synthetic ground truth and predictions")
    p.add_argument("--hier", help="hierarchy config, default the bundled Campus3D tree")
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--geometry", choices=synth.GEOMETRIES, default="uniform")
    p.add_argument("--label-noise", type=float, default=0.0)
    p.add_argument("--inconsistency", type=float, default=0.0)
    p.add_argument("--sharpness", type=float, default=2.0)
    p.add_argument("--noise", type=float, default=0.0, help="Gaussian score noise, default none")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cloud", required=True, help="ground-truth cloud to write")
    p.add_argument("--pred", help="prediction file to write")

    p = sub.add_parser("ensemble", help="decode a prediction file")
    p.add_argument("predictions")
    p.add_argument("--hier")
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["he", "mc"], default="he")
    p.add_argument("--weights", type=_floats, help="per-level HE weights")

    p = sub.add_parser("eval", help="evaluate predictions against ground truth")
    p.add_argument("--gt", required=True, help="ground-truth cloud or label file")
    p.add_argument("--pred", help="prediction file, decoded with both HE and MC")
    p.add_argument("--labels", action="append", help="decoded labels as NAME=PATH, repeatable")
    p.add_argument("--hier")
    p.add_argument("--alpha", type=float, action="append", help="CP level, repeatable")
    p.add_argument("--wcov", action="store_true", help="report per-class WCov")
    p.add_argument("--wcov-level", type=int, help="level scored by WCov, default 4 or the leaf level")
    p.add_argument("--pred-instances", help="cloud holding predicted instance ids")
    p.add_argument("--out", help="write the machine-readable report here")
    p.add_argument("--machine", action="store_true", help="print the machine-readable report")
    p.add_argument("--plot", help="save a CP histogram plot here")

    p = sub.add_parser("loss", help="evaluate the multi-task loss of predictions")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--hier")
    p.add_argument(
        "--beta", type=_floats, default=[loss.DEFAULT_BETA], help="prediction weights, one or one per level"
    )
    p.add_argument(
        "--gamma",
        type=_floats,
        default=[loss.DEFAULT_GAMMA],
        help="consistency weights, one or one per pair of adjacent levels",
    )

    p = sub.add_parser("stats", help="describe a cloud")
    p.add_argument("cloud")

    p = sub.add_parser("split", help="group region clouds by a split table")
    p.add_argument("table")
    p.add_argument("--clouds", required=True, help="directory of <region>.hcpc or <region>.csv files")
    return parser


def run(argv=None):
    # type: (Optional[Sequence[str]]) -> int
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    if args.threads is None:
        try:
            args.threads = default_threads()
        except ValueError as e:
            parser.error(str(e))
    commands = {
        "validate": cmd_validate,
        "sample": cmd_sample,
        "synth": cmd_synth,
        "ensemble": cmd_ensemble,
        "eval": lambda a: cmd_eval(a, parser),
        "loss": cmd_loss,
        "stats": cmd_stats,
        "split": cmd_split,
    }
    try:
        return commands[args.command](args)
    except (ValueError, OSError) as e:
        sys.stderr.write("hiercloud %s: %s\n" % (args.command, e))
        return 1


def main():
    sys.exit(run())
