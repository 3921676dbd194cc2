"""Columnar point clouds with optional colours, labels and instance ids."""
from typing import Optional, Sequence, Union  # noqa

import numpy as np

from ..errors import EmptyInputError, HierCloudError, ShapeError
from ..hierarchy import LabelHierarchy, lift_labels  # noqa


class PointCloud(object):
    """N points with XYZ coordinates in meters.

    :param xyz: ``(N, 3)`` coordinates.
    :param rgb: Optional ``(N, 3)`` 8-bit colours.
    :param labels: Optional labels, either ``(N,)`` leaf class indices or ``(N, H)`` per-level class indices.
    :param instance: Optional ``(N,)`` instance ids, -1 where a point belongs to no instance.
    """

    def __init__(self, xyz, rgb=None, labels=None, instance=None):
        # type: (np.ndarray, Optional[np.ndarray], Optional[np.ndarray], Optional[np.ndarray]) -> None
        self.xyz = np.ascontiguousarray(xyz, dtype=np.float64).reshape(-1, 3)
        n = len(self.xyz)
        if not np.isfinite(self.xyz).all():
            bad = int(np.flatnonzero(~np.isfinite(self.xyz).all(axis=1))[0])
            raise HierCloudError("point %i has a non-finite coordinate" % bad)
        self.rgb = None if rgb is None else np.ascontiguousarray(rgb, dtype=np.uint8)
        if self.rgb is not None and self.rgb.shape != (n, 3):
            raise ShapeError("colours of shape %s for %i points" % (self.rgb.shape, n))
        self.labels = None if labels is None else np.ascontiguousarray(labels, dtype=np.int64)
        if self.labels is not None and (self.labels.ndim not in (1, 2) or len(self.labels) != n):
            raise ShapeError("labels of shape %s for %i points" % (self.labels.shape, n))
        self.instance = None if instance is None else np.ascontiguousarray(instance, dtype=np.int64)
        if self.instance is not None and self.instance.shape != (n,):
            raise ShapeError("instance ids of shape %s for %i points" % (self.instance.shape, n))

    def __repr__(self):
        # type: () -> str
        class_name = type(self).__name__
        columns = [c for c in ("rgb", "labels", "instance") if getattr(self, c) is not None]
        return "{}(points={!r}, columns={!r})".format(class_name, len(self), columns)

    def __len__(self):
        # type: () -> int
        return len(self.xyz)

    def __eq__(self, other):
        if not isinstance(other, PointCloud):
            return NotImplemented
        for column in ("xyz", "rgb", "labels", "instance"):
            mine, theirs = getattr(self, column), getattr(other, column)
            if (mine is None) != (theirs is None):
                return False
            if mine is not None and not np.array_equal(mine, theirs):
                return False
        return True

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    @property
    def x(self):
        # type: () -> np.ndarray
        return self.xyz[:, 0]

    @property
    def y(self):
        # type: () -> np.ndarray
        return self.xyz[:, 1]

    @property
    def z(self):
        # type: () -> np.ndarray
        return self.xyz[:, 2]

    @property
    def full_labels(self):
        # type: () -> bool
        """True if the labels hold every level rather than just the leaf."""
        return self.labels is not None and self.labels.ndim == 2

    def require_points(self):
        # type: () -> PointCloud
        if not len(self):
            raise EmptyInputError("the point cloud is empty")
        return self

    def subset(self, indices):
        # type: (Union[np.ndarray, Sequence[int], slice]) -> PointCloud
        """The cloud of the given points, in the given order. Repeated indices repeat points."""
        if not isinstance(indices, slice):
            indices = np.asarray(indices, dtype=np.int64)
        return PointCloud(
            self.xyz[indices],
            None if self.rgb is None else self.rgb[indices],
            None if self.labels is None else self.labels[indices],
            None if self.instance is None else self.instance[indices],
        )

    def hier_labels(self, hierarchy):
        # type: (LabelHierarchy) -> np.ndarray
        """``(N, H)`` labels, lifting leaf labels through the hierarchy when only leaves are stored."""
        if self.labels is None:
            raise HierCloudError("the point cloud has no labels")
        return lift_labels(hierarchy, self.labels)

    def leaf_labels(self):
        # type: () -> np.ndarray
        if self.labels is None:
            raise HierCloudError("the point cloud has no labels")
        return self.labels[:, -1] if self.full_labels else self.labels

    @classmethod
    def concatenate(cls, clouds):
        # type: (Sequence[PointCloud]) -> PointCloud
        """Stack clouds which carry the same optional columns."""
        if not clouds:
            return cls(np.zeros((0, 3)))

        def stack(column):
            parts = [getattr(pc, column) for pc in clouds]
            if all(p is None for p in parts):
                return None
            if any(p is None for p in parts):
                raise ShapeError("cannot concatenate clouds with and without %s" % column)
            return np.concatenate(parts)

        return cls(stack("xyz"), stack("rgb"), stack("labels"), stack("instance"))
