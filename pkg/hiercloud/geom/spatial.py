"""Exact neighbourhood queries over a point cloud."""
import logging
from typing import Optional, Sequence  # noqa

import numpy as np
from sklearn.neighbors import KDTree

from ..errors import EmptyInputError, HierCloudError

logger = logging.getLogger(__name__)

# KD-tree radii are widened by this much before the exact numpy filter
RADIUS_SLACK = 1e-9


class SpatialIndex(object):
    """KD-trees over the 3D points and their 2D footprint, built once and shared by many queries.

    Queries use the trees to find a small candidate set and then decide membership and order from distances computed
    with numpy, so results are exact and ties are broken by point index.

    :param xyz: ``(N, 3)`` coordinates.
    :param leaf_size: KD-tree leaf size.
    """

    def __init__(self, xyz, leaf_size=40):
        # type: (np.ndarray, int) -> None
        self.xyz = np.ascontiguousarray(xyz, dtype=np.float64)
        if not len(self.xyz):
            raise EmptyInputError("cannot index an empty cloud")
        self.leaf_size = leaf_size
        self.tree = KDTree(self.xyz, leaf_size=leaf_size)
        self._footprint = None  # type: Optional[KDTree]
        logger.debug("built KD-tree over %i points", len(self.xyz))

    def __repr__(self):
        # type: () -> str
        class_name = type(self).__name__
        return "{}(points={!r})".format(class_name, len(self))

    def __len__(self):
        # type: () -> int
        return len(self.xyz)

    @property
    def footprint(self):
        # type: () -> KDTree
        if self._footprint is None:
            self._footprint = KDTree(self.xyz[:, :2], leaf_size=self.leaf_size)
        return self._footprint

    def squared_distances(self, indices, center):
        # type: (np.ndarray, np.ndarray) -> np.ndarray
        return ((self.xyz[indices] - center) ** 2).sum(axis=1)

    def knn(self, center, k):
        # type: (Sequence[float], int) -> np.ndarray
        """The ``k`` nearest points to ``center``, ordered by distance then index.

        :raises HierCloudError: If ``k`` is larger than the cloud.
        """
        if not 1 <= k <= len(self):
            raise HierCloudError("k=%i is not between 1 and the cloud size %i" % (k, len(self)))
        center = np.asarray(center, dtype=np.float64).reshape(3)
        dist, _ = self.tree.query(center[None, :], k=k)
        radius = dist[0, -1] * (1 + RADIUS_SLACK) + RADIUS_SLACK
        candidates = self.tree.query_radius(center[None, :], r=radius)[0].astype(np.int64)
        d2 = self.squared_distances(candidates, center)
        order = np.lexsort((candidates, d2))
        return candidates[order[:k]]

    def block(self, center, length, width):
        # type: (Sequence[float], float, float) -> np.ndarray
        """Indices of points with ``|x - cx| <= length/2`` and ``|y - cy| <= width/2``, ascending. Height is free."""
        center = np.asarray(center, dtype=np.float64)[:2]
        half = np.array([length / 2.0, width / 2.0])
        radius = np.hypot(*half) * (1 + RADIUS_SLACK) + RADIUS_SLACK
        candidates = self.footprint.query_radius(center[None, :], r=radius)[0].astype(np.int64)
        offsets = np.abs(self.xyz[candidates, :2] - center)
        inside = (offsets <= half).all(axis=1)
        return np.sort(candidates[inside])
