"""
Decoding per-level distributions into hierarchical labels
---------------------------------------------------------

`hierarchical_ensemble` (HE) picks, for each point, the root-to-leaf path of the label tree with the largest summed
likelihood::

    Y_HE = argmax over FC paths (y_1, ..., y_H) of  sum_h w_h * P^h(y_h)

so every decoded label is fully consistent. The weights w_h default to 1, which is the unweighted sum. Path scores
within `TIE_TOLERANCE` per level of the best score count as tied, and ties go to the path with the smallest leaf index.

`mc_decision` (MC) is the baseline which takes the argmax of every level independently, ignoring the tree. Decoding the
outputs of independent classifiers with HE (MC+HE) is just `hierarchical_ensemble` applied to those distributions.

"""
import logging
from typing import List, Optional, Sequence  # noqa

import numpy as np

from .errors import HierCloudError, ShapeError
from .hierarchy import LabelHierarchy  # noqa

logger = logging.getLogger(__name__)

ROW_TOLERANCE = 1e-6
TIE_TOLERANCE = 1e-12


class LevelDistributions(object):
    """Per-level predicted class distributions for a batch of points.

    :param levels: One ``(N, |C^h|)`` array per level, coarsest first.
    :param normalized: True if every row already sums to 1. Unnormalised rows are scaled to sum to 1 by `normalize`.
    """

    def __init__(self, levels, normalized=True):
        # type: (Sequence[np.ndarray], bool) -> None
        self.levels = [np.asarray(p, dtype=np.float64) for p in levels]
        self.normalized = normalized
        if not self.levels:
            raise ShapeError("distributions need at least one level")
        n_points = None
        for level, p in enumerate(self.levels, start=1):
            if p.ndim != 2:
                raise ShapeError("level %i distributions must be 2D, got shape %s" % (level, p.shape))
            if n_points is not None and len(p) != n_points:
                raise ShapeError(
                    "level %i has %i points but level 1 has %i" % (level, len(p), n_points)
                )
            n_points = len(p)
            if not np.isfinite(p).all() or (p < 0).any():
                raise HierCloudError("level %i has negative or non-finite entries" % level)
            if normalized and len(p):
                error = np.abs(p.sum(axis=1) - 1).max()
                if error > ROW_TOLERANCE:
                    raise HierCloudError(
                        "level %i rows marked normalized but sum to 1 +/- %g" % (level, error)
                    )

    def __repr__(self):
        # type: () -> str
        class_name = type(self).__name__
        return "{}(points={!r}, widths={!r})".format(class_name, self.n_points, self.widths)

    def __len__(self):
        # type: () -> int
        return self.n_points

    @property
    def n_points(self):
        # type: () -> int
        return len(self.levels[0])

    @property
    def depth(self):
        # type: () -> int
        return len(self.levels)

    @property
    def widths(self):
        # type: () -> List[int]
        return [p.shape[1] for p in self.levels]

    def check(self, hierarchy):
        # type: (LabelHierarchy) -> LevelDistributions
        """Raise `ShapeError` unless the level widths match the hierarchy."""
        if self.widths != hierarchy.widths:
            raise ShapeError(
                "distribution widths %s do not match hierarchy widths %s"
                % (self.widths, hierarchy.widths)
            )
        return self

    def normalize(self):
        # type: () -> LevelDistributions
        """A copy whose rows sum to 1."""
        if self.normalized:
            return self
        logger.debug("normalising %i rows over %i levels", self.n_points, self.depth)
        levels = []
        for level, p in enumerate(self.levels, start=1):
            sums = p.sum(axis=1, keepdims=True)
            if (sums == 0).any():
                row = int(np.flatnonzero(sums[:, 0] == 0)[0])
                raise HierCloudError("level %i row %i sums to zero" % (level, row))
            levels.append(p / sums)
        return LevelDistributions(levels, normalized=True)

    def subset(self, start, stop):
        # type: (int, int) -> LevelDistributions
        """The distributions of a contiguous range of points."""
        return LevelDistributions([p[start:stop] for p in self.levels], self.normalized)


def _weights(hierarchy, weights):
    # type: (LabelHierarchy, Optional[Sequence[float]]) -> np.ndarray
    if weights is None:
        return np.ones(hierarchy.depth)
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (hierarchy.depth,):
        raise ShapeError("expected %i level weights, got %i" % (hierarchy.depth, weights.size))
    if (weights < 0).any():
        raise ValueError("level weights must be non-negative")
    return weights


def path_scores(hierarchy, dists, weights=None):
    # type: (LabelHierarchy, LevelDistributions, Optional[Sequence[float]]) -> np.ndarray
    """The summed likelihood of every FC path, ``(N, |C^H|)`` with columns in leaf order.

    Scores are pushed from the roots to the leaves, so each node's score is its parent's score plus its own weighted
    probability.
    """
    dists = dists.check(hierarchy).normalize()
    w = _weights(hierarchy, weights)
    scores = w[0] * dists.levels[0]
    for level in range(2, hierarchy.depth + 1):
        scores = scores[:, hierarchy.parent_index(level)] + w[level - 1] * dists.levels[level - 1]
    return scores


def best_leaves(scores, depth):
    # type: (np.ndarray, int) -> np.ndarray
    """The first column of each row whose score is within ``depth * TIE_TOLERANCE`` of the row maximum."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    # equal sums reached in a different order can differ in the last bits
    top = scores.max(axis=1, keepdims=True)
    tied = np.isclose(scores, top, rtol=0, atol=depth * TIE_TOLERANCE)
    return tied.argmax(axis=1)


def hierarchical_ensemble(hierarchy, dists, weights=None):
    # type: (LabelHierarchy, LevelDistributions, Optional[Sequence[float]]) -> np.ndarray
    """Decode each point to the FC path with the largest summed likelihood.

    :param hierarchy: The label tree.
    :param dists: Per-level distributions, normalised first if marked unnormalised.
    :param weights: Optional non-negative per-level weights, default 1.
    :returns: ``(N, H)`` fully consistent labels.
    :raises ShapeError: If the distributions do not match the hierarchy.
    """
    leaves = best_leaves(path_scores(hierarchy, dists, weights), hierarchy.depth)
    return hierarchy.paths[leaves]


def mc_decision(hierarchy, dists):
    # type: (LabelHierarchy, LevelDistributions) -> np.ndarray
    """Decode each level independently by argmax, ties to the smallest class index.

    :returns: ``(N, H)`` labels which may be inconsistent.
    """
    dists = dists.check(hierarchy)
    labels = np.empty((dists.n_points, hierarchy.depth), dtype=np.int64)
    for level, p in enumerate(dists.levels):
        labels[:, level] = p.argmax(axis=1)
    return labels


def enumerate_paths_decoder(hierarchy, dists, weights=None):
    # type: (LabelHierarchy, LevelDistributions, Optional[Sequence[float]]) -> np.ndarray
    """HE by scoring every FC path separately. Slow, kept as a reference for `hierarchical_ensemble`."""
    dists = dists.check(hierarchy).normalize()
    w = _weights(hierarchy, weights)
    labels = np.empty((dists.n_points, hierarchy.depth), dtype=np.int64)
    paths = hierarchy.paths
    for i in range(dists.n_points):
        scores = np.empty((1, len(paths)))
        for leaf, path in enumerate(paths):
            scores[0, leaf] = sum(w[level] * dists.levels[level][i, path[level]] for level in range(hierarchy.depth))
        labels[i] = paths[best_leaves(scores, hierarchy.depth)[0]]
    return labels


DECODERS = {
    "he": hierarchical_ensemble,
    "mc": lambda hierarchy, dists, weights=None: mc_decision(hierarchy, dists),
}
