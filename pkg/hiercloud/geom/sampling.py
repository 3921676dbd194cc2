"""
Point cloud subsampling
-----------------------

Three samplers cut a large cloud into pieces a network can take:

- `voxel_downsample` keeps one point per occupied cell of a cubic grid, the point nearest its cell's centroid.
- `rbs` (random block sampling) picks a random center point and draws points from the ``l`` by ``w`` block around it.
- `rc_knn` (random-centered KNN) picks a random center point and takes its ``k`` nearest neighbours.

Every random draw gets its own generator keyed on ``(seed, draw)``, so a batch of draws is the same however many
threads produce it.

"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence  # noqa

import numpy as np

from ..errors import EmptyInputError, HierCloudError
from ..utilities import derive_rng
from .pointcloud import PointCloud  # noqa
from .spatial import SpatialIndex

logger = logging.getLogger(__name__)

METHODS = ("voxel", "rbs", "rc_knn")
DEFAULT_VOXEL_SIZE = 0.15
DEFAULT_BLOCK = 12.0
DEFAULT_SAMPLE_SIZE = 2048


class SampleSpec(object):
    """Parameters of a sampler.

    :param method: One of ``voxel``, ``rbs`` or ``rc_knn``.
    :param voxel_size: Voxel edge in meters.
    :param length: RBS block extent along x in meters.
    :param width: RBS block extent along y in meters.
    :param n: Points per sample (``k`` for RC-KNN).
    :param seed: 64-bit seed.
    """

    def __init__(
        self,
        method="rbs",
        voxel_size=DEFAULT_VOXEL_SIZE,
        length=DEFAULT_BLOCK,
        width=DEFAULT_BLOCK,
        n=DEFAULT_SAMPLE_SIZE,
        seed=0,
    ):
        # type: (str, float, float, float, int, int) -> None
        method = method.replace("-", "_")
        if method not in METHODS:
            raise ValueError("unknown sampling method %r, expected one of %s" % (method, METHODS))
        if not voxel_size > 0:
            raise ValueError("voxel size must be positive, got %r" % voxel_size)
        if not (length > 0 and width > 0):
            raise ValueError("block size must be positive, got %r x %r" % (length, width))
        if n < 1:
            raise ValueError("sample size must be at least 1, got %r" % n)
        self.method = method
        self.voxel_size = float(voxel_size)
        self.length = float(length)
        self.width = float(width)
        self.n = int(n)
        self.seed = int(seed)

    def __repr__(self):
        # type: () -> str
        class_name = type(self).__name__
        return "{}(method={!r}, voxel_size={!r}, length={!r}, width={!r}, n={!r}, seed={!r})".format(
            class_name, self.method, self.voxel_size, self.length, self.width, self.n, self.seed
        )


class Sample(object):
    """The indices of one draw.

    :param indices: Point indices, the center first for RBS and RC-KNN.
    :param center: Index of the center point, None for voxel sampling.
    :param padded: True if an RBS block held fewer points than asked for and points were repeated.
    """

    def __init__(self, indices, center=None, padded=False):
        # type: (np.ndarray, Optional[int], bool) -> None
        self.indices = np.asarray(indices, dtype=np.int64)
        self.center = center
        self.padded = padded

    def __repr__(self):
        # type: () -> str
        class_name = type(self).__name__
        return "{}(points={!r}, center={!r}, padded={!r})".format(
            class_name, len(self.indices), self.center, self.padded
        )

    def __len__(self):
        # type: () -> int
        return len(self.indices)


def voxel_keys(xyz, voxel_size, origin=None):
    # type: (np.ndarray, float, Optional[Sequence[float]]) -> np.ndarray
    """Integer cell coordinates of each point. Cells are half-open, ``[k * size, (k + 1) * size)`` from ``origin``."""
    xyz = np.asarray(xyz, dtype=np.float64)
    if origin is not None:
        xyz = xyz - np.asarray(origin, dtype=np.float64)
    return np.floor(xyz / voxel_size).astype(np.int64)


def voxel_downsample(pc, voxel_size=DEFAULT_VOXEL_SIZE, origin=None):
    # type: (PointCloud, float, Optional[Sequence[float]]) -> np.ndarray
    """Keep the point nearest the centroid of each occupied voxel.

    The grid is the lattice of ``voxel_size`` cubes through ``origin`` (default the coordinate origin), so the cell
    holding the cloud's minimum corner is the first cell on each axis and a downsampled cloud maps to the same cells
    again.

    :param pc: The cloud.
    :param voxel_size: Voxel edge in meters.
    :param origin: Optional grid origin.
    :returns: Retained point indices, ascending. Ties go to the smaller index.
    :raises EmptyInputError: If the cloud is empty.
    """
    if not voxel_size > 0:
        raise ValueError("voxel size must be positive, got %r" % voxel_size)
    pc.require_points()
    keys = voxel_keys(pc.xyz, voxel_size, origin)
    _, cell = np.unique(keys, axis=0, return_inverse=True)
    cell = cell.reshape(-1)
    n_cells = int(cell.max()) + 1
    counts = np.bincount(cell, minlength=n_cells)
    centroids = np.stack(
        [np.bincount(cell, weights=pc.xyz[:, axis], minlength=n_cells) for axis in range(3)], axis=1
    ) / counts[:, None]
    d2 = ((pc.xyz - centroids[cell]) ** 2).sum(axis=1)
    index = np.arange(len(pc))
    order = np.lexsort((index, d2, cell))
    first = np.ones(len(order), dtype=bool)
    first[1:] = cell[order][1:] != cell[order][:-1]
    kept = np.sort(order[first])
    logger.debug("voxel %g m: kept %i of %i points", voxel_size, len(kept), len(pc))
    return kept


def _index(pc, index):
    # type: (PointCloud, Optional[SpatialIndex]) -> SpatialIndex
    if index is not None:
        return index
    return SpatialIndex(pc.require_points().xyz)


def rbs(pc, length=DEFAULT_BLOCK, width=DEFAULT_BLOCK, n=DEFAULT_SAMPLE_SIZE, seed=0, draw=0, index=None):
    # type: (PointCloud, float, float, int, int, int, Optional[SpatialIndex]) -> Sample
    """Random block sampling.

    A center point is picked uniformly. The sample is the center followed by ``n - 1`` points drawn uniformly without
    replacement from the other points with ``|x - xc| <= length/2`` and ``|y - yc| <= width/2``. If the block holds
    fewer than ``n`` points, all of them are taken once and the rest are drawn from the block with replacement.

    :param pc: The cloud.
    :param index: A prebuilt `SpatialIndex` of the cloud, shared between draws.
    :returns: A `Sample`, with ``padded`` set when points had to be repeated.
    """
    index = _index(pc, index)
    rng = derive_rng(seed, draw)
    center = int(rng.integers(len(index)))
    block = index.block(index.xyz[center], length, width)
    others = block[block != center]
    if len(block) >= n:
        chosen = rng.choice(others, size=n - 1, replace=False)
        return Sample(np.concatenate([[center], chosen]), center, False)
    extra = rng.choice(block, size=n - len(block), replace=True)
    indices = np.concatenate([[center], rng.permutation(others), extra])
    logger.debug("draw %i: block around point %i holds %i of %i points, padded", draw, center, len(block), n)
    return Sample(indices, center, True)


def rc_knn(pc, k=DEFAULT_SAMPLE_SIZE, seed=0, draw=0, center=None, index=None):
    # type: (PointCloud, int, int, int, Optional[int], Optional[SpatialIndex]) -> np.ndarray
    """Random-centered K nearest neighbours.

    :param pc: The cloud.
    :param k: Number of points, at most the cloud size.
    :param center: Force the center point instead of drawing it.
    :param index: A prebuilt `SpatialIndex` of the cloud.
    :returns: The ``k`` nearest points to the center ordered by (distance, index), so the center comes first.
    :raises HierCloudError: If ``k`` is larger than the cloud.
    """
    if k > len(pc):
        raise HierCloudError("k=%i is larger than the cloud (%i points)" % (k, len(pc)))
    index = _index(pc, index)
    if center is None:
        center = int(derive_rng(seed, draw).integers(len(index)))
    elif not 0 <= center < len(index):
        raise HierCloudError("center %i is not a point of the cloud" % center)
    return index.knn(index.xyz[center], k)


def uniform_sample(pc, n=DEFAULT_SAMPLE_SIZE, seed=0, draw=0):
    # type: (PointCloud, int, int, int) -> np.ndarray
    """``n`` points drawn uniformly without replacement from the whole cloud, a baseline with no locality."""
    if not 1 <= n <= len(pc):
        raise HierCloudError("n=%i is not between 1 and the cloud size %i" % (n, len(pc)))
    return derive_rng(seed, draw).choice(len(pc), size=n, replace=False)


class Sampler(object):
    """Draws repeated samples from one cloud, sharing one spatial index.

    :param pc: The cloud.
    :param spec: What to draw.
    :param threads: Worker count for `draws`.
    """

    def __init__(self, pc, spec, threads=1):
        # type: (PointCloud, SampleSpec, int) -> None
        self.pc = pc.require_points()
        self.spec = spec
        self.threads = threads
        self.index = None if spec.method == "voxel" else SpatialIndex(pc.xyz)
        self._voxels = None  # type: Optional[np.ndarray]

    def __repr__(self):
        # type: () -> str
        class_name = type(self).__name__
        return "{}({!r}, points={!r})".format(class_name, self.spec, len(self.pc))

    def sample(self, draw=0):
        # type: (int) -> Sample
        spec = self.spec
        if spec.method == "voxel":
            if self._voxels is None:
                self._voxels = voxel_downsample(self.pc, spec.voxel_size)
            return Sample(self._voxels)
        if spec.method == "rbs":
            return rbs(self.pc, spec.length, spec.width, spec.n, spec.seed, draw, self.index)
        indices = rc_knn(self.pc, spec.n, spec.seed, draw, index=self.index)
        return Sample(indices, int(indices[0]))

    def draws(self, count):
        # type: (int) -> List[Sample]
        """Samples for draws ``0 .. count-1``, in draw order."""
        if self.spec.method == "voxel":
            return [self.sample(0)] * count
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            samples = list(pool.map(self.sample, range(count)))
        n_padded = sum(s.padded for s in samples)
        if n_padded:
            logger.info("%i of %i draws were padded", n_padded, count)
        return samples


def pick_region(table, seed, draw=0, role="train", sizes=None):
    # type: (Any, int, int, str, Optional[Dict[str, int]]) -> str
    """Pick a region of a split table to sample from.

    :param table: A `hiercloud.io.splits.SplitTable`.
    :param role: Which group to pick from.
    :param sizes: Optional point count per region. Regions are then picked in proportion to their size, otherwise
        uniformly.
    """
    regions = table.regions(role)
    if not regions:
        raise EmptyInputError("the split table has no %s regions" % role)
    p = None
    if sizes is not None:
        weights = np.array([sizes[r] for r in regions], dtype=np.float64)
        if weights.sum() <= 0:
            raise EmptyInputError("every %s region is empty" % role)
        p = weights / weights.sum()
    # keyed apart from the draw's own stream
    rng = derive_rng(seed, draw, 1)
    return regions[int(rng.choice(len(regions), p=p))]


def compare_samplers(pc, n=DEFAULT_SAMPLE_SIZE, length=DEFAULT_BLOCK, width=DEFAULT_BLOCK, seed=0, count=10):
    # type: (PointCloud, int, float, float, int, int) -> List[Dict[str, Any]]
    """Draw RBS and RC-KNN samples side by side and describe each one.

    :returns: One row per (method, draw) with the sample's x, y and z extents, its number of distinct points, its
        number of distinct leaf classes (when the cloud is labelled) and the RBS padded flag.
    """
    index = SpatialIndex(pc.require_points().xyz)
    leaves = None if pc.labels is None else pc.leaf_labels()
    rows = []
    for draw in range(count):
        samples = [
            ("rbs", rbs(pc, length, width, n, seed, draw, index)),
            ("rc_knn", Sample(rc_knn(pc, min(n, len(pc)), seed, draw, index=index))),
        ]
        for method, sample in samples:
            points = pc.xyz[sample.indices]
            extent = points.max(axis=0) - points.min(axis=0)
            rows.append(
                {
                    "method": method,
                    "draw": draw,
                    "x_extent": float(extent[0]),
                    "y_extent": float(extent[1]),
                    "z_extent": float(extent[2]),
                    "unique": int(len(np.unique(sample.indices))),
                    "classes": None if leaves is None else int(len(np.unique(leaves[sample.indices]))),
                    "padded": sample.padded,
                }
            )
    return rows
