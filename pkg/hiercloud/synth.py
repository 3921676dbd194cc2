"""
Synthetic ground truth and classifier outputs
---------------------------------------------

`gen_ground_truth` draws a labelled cloud whose labels are fully consistent, either scattered uniformly over a box or
grouped into Gaussian blobs, one instance per blob. `gen_predictions` draws per-level distributions around those
labels which a decoder can be tested against.

Per level, the scores of a point are ``sharpness`` on its target class plus Gaussian noise of scale ``noise``, passed
through a softmax. With the default ``noise=0`` the true class holds the largest share and the remainder is spread
uniformly. A positive ``noise`` makes the classifier less regular.

A fraction ``inconsistency_rate`` of the points is corrupted: each of their levels independently, with probability
``corrupt_level_prob``, targets a random class instead, which breaks the tree relation between levels the way a
classifier confused by similar geometry does.

Points are generated in fixed-size chunks, each with its own generator keyed on the seed and the chunk number, so the
output is a pure function of the :class:`SynthSpec` and does not depend on the thread count.

"""
import copy
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence  # noqa

import numpy as np

from .ensemble import LevelDistributions, hierarchical_ensemble, mc_decision
from .errors import HierCloudError
from .geom.pointcloud import PointCloud
from .hierarchy import LabelHierarchy, check_labels  # noqa
from .loss import softmax
from .metrics import evaluate
from .utilities import chunk_ranges, derive_rng

logger = logging.getLogger(__name__)

GEOMETRIES = ("uniform", "clustered")
CHUNK_SIZE = 1 << 14

# stream keys for derive_rng
_LAYOUT, _POINTS, _PREDICTIONS = 0, 1, 2


class SynthSpec(object):
    """What to generate.

    :param hierarchy: The label tree.
    :param n_points: Number of points.
    :param geometry: ``uniform`` box or ``clustered`` blobs.
    :param label_noise: Probability that a point's ground-truth leaf is replaced by a random leaf.
    :param inconsistency_rate: Probability that a point's predictions are corrupted.
    :param sharpness: Score of the target class, larger is more confident.
    :param seed: 64-bit seed.
    :param noise: Scale of the Gaussian score noise. The default 0 spreads the remainder of each row uniformly.
    :param corrupt_level_prob: Probability that each level of a corrupted point targets a random class.
    :param blobs_per_class: Blobs per leaf class in clustered mode.
    :param extent: Side of the square footprint in meters.
    :param height: Height of the box in meters.
    :param blob_radius: Standard deviation of a blob in meters.
    """

    def __init__(
        self,
        hierarchy,  # type: LabelHierarchy
        n_points=10000,  # type: int
        geometry="uniform",  # type: str
        label_noise=0.0,  # type: float
        inconsistency_rate=0.0,  # type: float
        sharpness=2.0,  # type: float
        seed=0,  # type: int
        noise=0.0,  # type: float
        corrupt_level_prob=0.5,  # type: float
        blobs_per_class=2,  # type: int
        extent=100.0,  # type: float
        height=20.0,  # type: float
        blob_radius=2.0,  # type: float
    ):
        # type: (...) -> None
        if geometry not in GEOMETRIES:
            raise ValueError("geometry must be one of %s, got %r" % (GEOMETRIES, geometry))
        for name, rate in (
            ("label_noise", label_noise),
            ("inconsistency_rate", inconsistency_rate),
            ("corrupt_level_prob", corrupt_level_prob),
        ):
            if not 0 <= rate <= 1:
                raise ValueError("%s must be in [0, 1], got %r" % (name, rate))
        if not sharpness > 0:
            raise ValueError("sharpness must be positive, got %r" % sharpness)
        if n_points < 0 or noise < 0 or blobs_per_class < 1:
            raise ValueError("point count and noise must be non-negative and blobs_per_class positive")
        self.hierarchy = hierarchy
        self.n_points = int(n_points)
        self.geometry = geometry
        self.label_noise = float(label_noise)
        self.inconsistency_rate = float(inconsistency_rate)
        self.sharpness = float(sharpness)
        self.seed = int(seed)
        self.noise = float(noise)
        self.corrupt_level_prob = float(corrupt_level_prob)
        self.blobs_per_class = int(blobs_per_class)
        self.extent = float(extent)
        self.height = float(height)
        self.blob_radius = float(blob_radius)

    def __repr__(self):
        # type: () -> str
        class_name = type(self).__name__
        return (
            "{}(n_points={!r}, geometry={!r}, label_noise={!r}, "
            "inconsistency_rate={!r}, sharpness={!r}, seed={!r})"
        ).format(
            class_name,
            self.n_points,
            self.geometry,
            self.label_noise,
            self.inconsistency_rate,
            self.sharpness,
            self.seed,
        )

    @property
    def leaves(self):
        # type: () -> np.ndarray
        """The leaf classes points are drawn from: every leaf but the ignore class."""
        ignore = self.hierarchy.ignore_index(self.hierarchy.depth)
        leaves = np.array([i for i in range(self.hierarchy.widths[-1]) if i != ignore], dtype=np.int64)
        if not len(leaves):
            raise HierCloudError("the hierarchy has no leaf class besides the ignore class")
        return leaves

    def with_seed(self, seed):
        # type: (int) -> SynthSpec
        spec = copy.copy(self)
        spec.seed = int(seed)
        return spec


def _map_chunks(func, n, chunk_size, threads):
    ranges = chunk_ranges(n, chunk_size)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: func(*job), enumerate(ranges)))


def gen_ground_truth(spec, threads=1, chunk_size=CHUNK_SIZE):
    # type: (SynthSpec, int, int) -> PointCloud
    """A labelled cloud with fully consistent labels.

    Labels are stored as leaf indices, so `PointCloud.hier_labels` lifts them to full paths. Clustered clouds also
    carry one instance id per blob. Every point has a colour derived from its leaf class.
    """
    leaves = spec.leaves
    layout = derive_rng(spec.seed, _LAYOUT)
    palette = layout.integers(0, 256, size=(spec.hierarchy.widths[-1], 3))
    n_blobs = len(leaves) * spec.blobs_per_class
    blob_class = np.repeat(leaves, spec.blobs_per_class)
    blob_centers = np.column_stack(
        [
            layout.uniform(0, spec.extent, size=(n_blobs, 2)),
            layout.uniform(0, spec.height, size=n_blobs),
        ]
    )

    def chunk(number, bounds):
        start, stop = bounds
        n = stop - start
        rng = derive_rng(spec.seed, _POINTS, number)
        if spec.geometry == "clustered":
            # every blob gets points once there are as many points as blobs
            blob = (start + np.arange(n)) % n_blobs
            xyz = blob_centers[blob] + rng.normal(0.0, spec.blob_radius, size=(n, 3))
            leaf = blob_class[blob]
            instance = blob
        else:
            xyz = rng.uniform(0, 1, size=(n, 3)) * [spec.extent, spec.extent, spec.height]
            leaf = leaves[rng.integers(len(leaves), size=n)]
            instance = None
        noisy = rng.random(n) < spec.label_noise
        leaf = np.where(noisy, leaves[rng.integers(len(leaves), size=n)], leaf)
        return xyz, leaf, instance

    parts = _map_chunks(chunk, spec.n_points, chunk_size, threads)
    if not parts:
        return PointCloud(
            np.zeros((0, 3)),
            np.zeros((0, 3)),
            np.zeros(0, dtype=np.int64),
            np.zeros(0, dtype=np.int64) if spec.geometry == "clustered" else None,
        )
    leaf = np.concatenate([p[1] for p in parts])
    instance = None
    if spec.geometry == "clustered":
        instance = np.concatenate([p[2] for p in parts])
    logger.debug("generated %i %s points", len(leaf), spec.geometry)
    return PointCloud(np.concatenate([p[0] for p in parts]), palette[leaf], leaf, instance)


def gen_predictions(spec, gt, threads=1, chunk_size=CHUNK_SIZE):
    # type: (SynthSpec, np.ndarray, int, int) -> LevelDistributions
    """Per-level distributions concentrated on the ground truth, with corrupted points.

    :param spec: Sharpness, noise and corruption settings.
    :param gt: ``(N, H)`` ground-truth labels.
    :returns: Normalised distributions, one level per hierarchy level.
    """
    hierarchy = spec.hierarchy
    gt = check_labels(hierarchy, gt)

    def chunk(number, bounds):
        start, stop = bounds
        n = stop - start
        rng = derive_rng(spec.seed, _PREDICTIONS, number)
        corrupt = rng.random(n) < spec.inconsistency_rate
        levels = []
        for level, width in enumerate(hierarchy.widths):
            target = gt[start:stop, level].copy()
            swap = corrupt & (rng.random(n) < spec.corrupt_level_prob)
            target[swap] = rng.integers(width, size=int(swap.sum()))
            scores = spec.noise * rng.standard_normal((n, width))
            scores[np.arange(n), target] += spec.sharpness
            levels.append(softmax(scores))
        return levels

    parts = _map_chunks(chunk, len(gt), chunk_size, threads)
    if not parts:
        return LevelDistributions([np.zeros((0, w)) for w in hierarchy.widths])
    levels = [np.concatenate([p[level] for p in parts]) for level in range(hierarchy.depth)]
    return LevelDistributions(levels)


def simulate_direction(spec, seeds=range(20), threads=1):
    # type: (SynthSpec, Sequence[int], int) -> List[Dict[str, Any]]
    """Decode synthetic predictions with HE and MC over many seeds and compare them.

    :returns: One row per seed with both decoders' CR_1, their OA at every level and the HE minus MC OA deltas.
    """
    hierarchy = spec.hierarchy
    rows = []
    for seed in seeds:
        run = spec.with_seed(seed)
        gt = gen_ground_truth(run, threads).hier_labels(hierarchy)
        dists = gen_predictions(run, gt, threads)
        report = evaluate(
            hierarchy,
            gt,
            {"HE": hierarchical_ensemble(hierarchy, dists), "MC": mc_decision(hierarchy, dists)},
            threads=threads,
        )
        oa_he = [report.oa[("HE", level)] for level in range(1, hierarchy.depth + 1)]
        oa_mc = [report.oa[("MC", level)] for level in range(1, hierarchy.depth + 1)]
        rows.append(
            {
                "seed": seed,
                "cr_he": report.cr[("HE", 1.0)],
                "cr_mc": report.cr[("MC", 1.0)],
                "oa_he": oa_he,
                "oa_mc": oa_mc,
                "oa_delta": [he - mc for he, mc in zip(oa_he, oa_mc)],
                "report": report,
            }
        )
        logger.info(
            "seed %i: CR_1 HE %.3f MC %.3f, leaf OA delta %+.4f",
            seed,
            rows[-1]["cr_he"],
            rows[-1]["cr_mc"],
            rows[-1]["oa_delta"][-1],
        )
    return rows
