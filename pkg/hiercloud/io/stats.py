"""Descriptive statistics of point clouds: point count, bounding box, mean height and point density."""
import logging
import math
import warnings
from typing import Optional  # noqa

import numpy as np
import shapely
from shapely.geometry import box

from ..errors import EmptyInputError, ShapeError
from ..geom.pointcloud import PointCloud  # noqa
from .clouds import CHUNK_SIZE, iter_cloud_chunks

logger = logging.getLogger(__name__)


class CloudStats(object):
    """Summary of one cloud.

    The footprint is the bounding box of the points seen from above, not the surveyed area of the region. Density is
    points per square meter of that footprint, NaN when the footprint has no area.

    :param count: Number of points.
    :param bbox_min: Minimum x, y and z.
    :param bbox_max: Maximum x, y and z.
    :param mean_z: Mean height.
    :param hull_area: Area of the convex hull of the points seen from above.
    """

    def __init__(self, count, bbox_min, bbox_max, mean_z, hull_area):
        # type: (int, np.ndarray, np.ndarray, float, float) -> None
        self.count = int(count)
        self.bbox_min = np.asarray(bbox_min, dtype=np.float64)
        self.bbox_max = np.asarray(bbox_max, dtype=np.float64)
        self.mean_z = float(mean_z)
        self.hull_area = float(hull_area)
        self.footprint_area = box(
            self.bbox_min[0], self.bbox_min[1], self.bbox_max[0], self.bbox_max[1]
        ).area
        if self.footprint_area > 0:
            self.density = self.count / self.footprint_area
        else:
            warnings.warn(
                "footprint of %i points has no area, density is undefined" % self.count,
                UserWarning,
            )
            self.density = math.nan

    def __repr__(self):
        # type: () -> str
        class_name = type(self).__name__
        return "{}(count={!r}, mean_z={!r}, density={!r})".format(
            class_name, self.count, self.mean_z, self.density
        )

    @property
    def extent(self):
        # type: () -> np.ndarray
        return self.bbox_max - self.bbox_min

    def to_text(self):
        # type: () -> str
        lines = [
            "points=%i" % self.count,
            "bbox_min=%s" % ",".join(repr(float(v)) for v in self.bbox_min),
            "bbox_max=%s" % ",".join(repr(float(v)) for v in self.bbox_max),
            "mean_height=%r" % self.mean_z,
            "footprint_area=%r" % self.footprint_area,
            "hull_area=%r" % self.hull_area,
            "points_per_m2=%r" % self.density,
        ]
        return "\n".join(lines) + "\n"


class CloudStatsAccumulator(object):
    """Streaming `CloudStats`, built chunk by chunk. Accumulators of separate chunks merge in any grouping."""

    def __init__(self):
        # type: () -> None
        self.count = 0
        self.z_sum = 0.0
        self.bbox_min = np.full(3, np.inf)
        self.bbox_max = np.full(3, -np.inf)
        # only the hull vertices of what has been seen so far are kept
        self.hull_points = np.zeros((0, 2))

    def __repr__(self):
        # type: () -> str
        class_name = type(self).__name__
        return "{}(count={!r})".format(class_name, self.count)

    def update(self, pc):
        # type: (PointCloud) -> CloudStatsAccumulator
        if not len(pc):
            return self
        self.count += len(pc)
        self.z_sum += math.fsum(pc.z)
        self.bbox_min = np.minimum(self.bbox_min, pc.xyz.min(axis=0))
        self.bbox_max = np.maximum(self.bbox_max, pc.xyz.max(axis=0))
        self.hull_points = _hull_vertices(np.concatenate([self.hull_points, pc.xyz[:, :2]]))
        return self

    def merge(self, other):
        # type: (CloudStatsAccumulator) -> CloudStatsAccumulator
        merged = CloudStatsAccumulator()
        merged.count = self.count + other.count
        merged.z_sum = self.z_sum + other.z_sum
        merged.bbox_min = np.minimum(self.bbox_min, other.bbox_min)
        merged.bbox_max = np.maximum(self.bbox_max, other.bbox_max)
        merged.hull_points = _hull_vertices(np.concatenate([self.hull_points, other.hull_points]))
        return merged

    def stats(self):
        # type: () -> CloudStats
        """The statistics of everything seen.

        :raises EmptyInputError: If no points were seen.
        """
        if not self.count:
            raise EmptyInputError("statistics of an empty cloud")
        return CloudStats(
            self.count,
            self.bbox_min,
            self.bbox_max,
            self.z_sum / self.count,
            _hull(self.hull_points).area,
        )


def _hull(xy):
    # type: (np.ndarray) -> shapely.Geometry
    return shapely.multipoints(xy).convex_hull


def _hull_vertices(xy):
    # type: (np.ndarray) -> np.ndarray
    if len(xy) <= 3:
        return xy
    return shapely.get_coordinates(_hull(xy))


def cloud_stats(pc):
    # type: (PointCloud) -> CloudStats
    """Count, bounding box, mean height and footprint density of a cloud.

    :raises EmptyInputError: If the cloud is empty.
    """
    if pc.xyz.ndim != 2:
        raise ShapeError("coordinates must be (N, 3)")
    return CloudStatsAccumulator().update(pc).stats()


def file_stats(path, chunk_size=CHUNK_SIZE):
    # type: (str, int) -> CloudStats
    """`cloud_stats` of a cloud file, read in chunks."""
    acc = CloudStatsAccumulator()
    for chunk in iter_cloud_chunks(path, chunk_size):
        acc.update(chunk)
    logger.debug("%s: %i points", path, acc.count)
    return acc.stats()
