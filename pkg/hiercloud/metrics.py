"""
Consistency and segmentation metrics
------------------------------------

Consistency of hierarchical labels is measured by the consistency proportion (CP) of each point, the best agreement
between its label and any fully consistent path divided by H, and by the consistency rate CR_alpha, the fraction of
points whose CP reaches alpha.

Segmentation quality is measured per level from a `LevelConfusion`: overall accuracy (OA), per-class intersection over
union (IoU) and mean IoU. Instance segmentation is measured by weighted coverage (WCov).

Points whose ground truth is the hierarchy's ignore class are left out of every statistic. Points *predicted* as the
ignore class count as errors. All accumulators hold integer counts and merge associatively, so splitting the points
into chunks never changes a result.

"""
import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Union  # noqa

import numpy as np

from .errors import EmptyInputError, LevelError, ShapeError
from .hierarchy import LabelHierarchy, check_labels  # noqa
from .report import MetricReport
from .utilities import chunk_ranges

logger = logging.getLogger(__name__)

CHUNK_SIZE = 1 << 16
WCOV_LEVEL = 4


def consistency_counts(hierarchy, ys):
    # type: (LabelHierarchy, np.ndarray) -> np.ndarray
    """For each label, the largest number of levels on which it agrees with one FC path.

    This runs one root-to-leaf pass over the tree, carrying the best agreement count of each prefix, instead of
    comparing against every path.

    :param ys: An ``(N, H)`` array of labels.
    :returns: An ``(N,)`` integer array with values in ``0..H``.
    """
    ys = check_labels(hierarchy, ys)
    widths = hierarchy.widths
    scores = (ys[:, :1] == np.arange(widths[0])).astype(np.int64)
    for level in range(2, hierarchy.depth + 1):
        hits = ys[:, level - 1 : level] == np.arange(widths[level - 1])
        scores = scores[:, hierarchy.parent_index(level)] + hits
    return scores.max(axis=1)


def consistency_proportion(hierarchy, y):
    # type: (LabelHierarchy, Sequence[int]) -> Fraction
    """The CP of one label, as an exact fraction k/H."""
    count = consistency_counts(hierarchy, np.asarray(y).reshape(1, -1))[0]
    return Fraction(int(count), hierarchy.depth)


def as_fraction(alpha):
    # type: (Union[float, str, Fraction]) -> Fraction
    """Read a CP threshold exactly, so that ``0.8`` means 4/5 rather than the nearest double."""
    if isinstance(alpha, Fraction):
        value = alpha
    else:
        value = Fraction(str(alpha))
    if not 0 <= value <= 1:
        raise ValueError("alpha must be in [0, 1], got %s" % alpha)
    return value


def consistency_rate(hierarchy, ys, alpha=1.0, gt=None):
    # type: (LabelHierarchy, np.ndarray, Union[float, Fraction], Optional[np.ndarray]) -> float
    """The fraction of labels whose CP is at least ``alpha``.

    :param ys: ``(N, H)`` predicted labels.
    :param alpha: CP threshold in [0, 1].
    :param gt: Optional ``(N, H)`` ground truth. Points whose ground truth is the ignore class are left out.
    :raises EmptyInputError: If no points are left to evaluate.
    """
    stats = ConsistencyStats(hierarchy.depth)
    stats.update(hierarchy, ys, gt)
    return stats.cr(alpha)


class ConsistencyStats(object):
    """Per-point CP values and their histogram.

    :param depth: The hierarchy depth H.
    """

    def __init__(self, depth):
        # type: (int) -> None
        self.depth = depth
        self.counts = np.zeros(0, dtype=np.int64)

    def __repr__(self):
        # type: () -> str
        class_name = type(self).__name__
        return "{}(depth={!r}, points={!r})".format(class_name, self.depth, len(self))

    def __len__(self):
        # type: () -> int
        return len(self.counts)

    def update(self, hierarchy, ys, gt=None):
        # type: (LabelHierarchy, np.ndarray, Optional[np.ndarray]) -> ConsistencyStats
        counts = consistency_counts(hierarchy, ys)
        if gt is not None:
            counts = counts[~ignored_points(hierarchy, gt)]
        self.counts = np.concatenate([self.counts, counts])
        return self

    def merge(self, other):
        # type: (ConsistencyStats) -> ConsistencyStats
        """Combine with the stats of the following chunk of points."""
        if other.depth != self.depth:
            raise ShapeError("cannot merge stats of depth %i and %i" % (self.depth, other.depth))
        merged = ConsistencyStats(self.depth)
        merged.counts = np.concatenate([self.counts, other.counts])
        return merged

    @property
    def proportions(self):
        # type: () -> List[Fraction]
        """Each point's CP as an exact fraction."""
        return [Fraction(int(k), self.depth) for k in self.counts]

    @property
    def histogram(self):
        # type: () -> np.ndarray
        """Number of points at each CP level 0/H, 1/H, ..., H/H."""
        return np.bincount(self.counts, minlength=self.depth + 1)

    def cr(self, alpha=1.0):
        # type: (Union[float, Fraction]) -> float
        """The consistency rate at CP level ``alpha``."""
        if not len(self.counts):
            raise EmptyInputError("consistency rate of an empty set of labels")
        threshold = as_fraction(alpha) * self.depth
        hist = self.histogram
        passing = sum(int(n) for k, n in enumerate(hist) if k >= threshold)
        return passing / len(self.counts)


def ignored_points(hierarchy, gt):
    # type: (LabelHierarchy, np.ndarray) -> np.ndarray
    """Mask of points whose ground-truth leaf is the ignore class."""
    gt = check_labels(hierarchy, gt)
    ignore = hierarchy.ignore_index(hierarchy.depth)
    if ignore is None:
        return np.zeros(len(gt), dtype=bool)
    return gt[:, -1] == ignore


class LevelConfusion(object):
    """A confusion matrix at one granularity level.

    Rows are ground truth and columns are predictions. Points whose ground truth is the ignore class are only counted
    in ``ignored``.

    :param level: The granularity level.
    :param n_classes: Number of classes at the level.
    :param ignore_index: Index of the ignore class at the level, if any.
    """

    def __init__(self, level, n_classes, ignore_index=None):
        # type: (int, int, Optional[int]) -> None
        self.level = level
        self.ignore_index = ignore_index
        self.matrix = np.zeros((n_classes, n_classes), dtype=np.int64)
        self.ignored = 0

    def __repr__(self):
        # type: () -> str
        class_name = type(self).__name__
        return "{}(level={!r}, n_classes={!r}, points={!r}, ignored={!r})".format(
            class_name, self.level, self.n_classes, int(self.matrix.sum()), self.ignored
        )

    @property
    def n_classes(self):
        # type: () -> int
        return len(self.matrix)

    @classmethod
    def from_labels(cls, gt, pred, n_classes, level=1, ignore_index=None):
        # type: (np.ndarray, np.ndarray, int, int, Optional[int]) -> LevelConfusion
        """Count one level's ground truth against its predictions.

        :param gt: ``(N,)`` ground-truth class indices.
        :param pred: ``(N,)`` predicted class indices.
        """
        conf = cls(level, n_classes, ignore_index)
        return conf.update(gt, pred)

    def update(self, gt, pred):
        # type: (np.ndarray, np.ndarray) -> LevelConfusion
        gt = np.asarray(gt, dtype=np.int64)
        pred = np.asarray(pred, dtype=np.int64)
        if gt.shape != pred.shape:
            raise ShapeError(
                "level %i: %i ground-truth labels but %i predictions"
                % (self.level, gt.size, pred.size)
            )
        if self.ignore_index is not None:
            keep = gt != self.ignore_index
            self.ignored += int(len(gt) - keep.sum())
            gt, pred = gt[keep], pred[keep]
        k = self.n_classes
        self.matrix += np.bincount(gt * k + pred, minlength=k * k).reshape(k, k)
        return self

    def merge(self, other):
        # type: (LevelConfusion) -> LevelConfusion
        if other.matrix.shape != self.matrix.shape:
            raise ShapeError(
                "cannot merge level %i confusion of %i classes with %i classes"
                % (self.level, self.n_classes, other.n_classes)
            )
        merged = LevelConfusion(self.level, self.n_classes, self.ignore_index)
        merged.matrix = self.matrix + other.matrix
        merged.ignored = self.ignored + other.ignored
        return merged

    @property
    def total(self):
        # type: () -> int
        """Number of evaluated, non-ignored points."""
        return int(self.matrix.sum())


def overall_accuracy(conf):
    # type: (LevelConfusion) -> float
    """Correct predictions over all non-ignored points."""
    if conf.total == 0:
        raise EmptyInputError("level %i: every point is ignored" % conf.level)
    return int(np.trace(conf.matrix)) / conf.total


def per_class_iou(conf):
    # type: (LevelConfusion) -> np.ndarray
    """TP / (TP + FP + FN) for each class.

    Classes absent from both ground truth and prediction, and the ignore class, are undefined and reported as NaN.
    """
    tp = np.diag(conf.matrix)
    union = conf.matrix.sum(axis=0) + conf.matrix.sum(axis=1) - tp
    iou = np.full(conf.n_classes, np.nan)
    defined = union > 0
    iou[defined] = tp[defined] / union[defined]
    if conf.ignore_index is not None:
        iou[conf.ignore_index] = np.nan
    return iou


def mean_iou(conf):
    # type: (LevelConfusion) -> float
    """The mean of the defined per-class IoUs."""
    iou = per_class_iou(conf)
    defined = iou[~np.isnan(iou)]
    if not len(defined):
        raise EmptyInputError("level %i: no class has a defined IoU" % conf.level)
    return float(defined.mean())


class InstanceSet(object):
    """Per-point instance ids, -1 where a point belongs to no instance.

    :param ids: ``(N,)`` integer instance ids.
    """

    def __init__(self, ids):
        # type: (Sequence[int]) -> None
        self.ids = np.asarray(ids, dtype=np.int64).reshape(-1)

    def __repr__(self):
        # type: () -> str
        class_name = type(self).__name__
        return "{}(points={!r}, instances={!r})".format(class_name, len(self), self.n_instances)

    def __len__(self):
        # type: () -> int
        return len(self.ids)

    @property
    def n_instances(self):
        # type: () -> int
        return len(np.unique(self.ids[self.ids >= 0]))

    @classmethod
    def for_class(cls, ids, labels, class_index):
        # type: (Sequence[int], Sequence[int], int) -> InstanceSet
        """Restrict instance ids to the points labelled with one class at one level."""
        ids = np.asarray(ids, dtype=np.int64).copy()
        ids[np.asarray(labels) != class_index] = -1
        return cls(ids)


def wcov(gt, pred):
    # type: (InstanceSet, InstanceSet) -> float
    """Weighted coverage of ground-truth instances by predicted instances.

    Each ground-truth instance contributes its best IoU against any predicted instance, weighted by its share of all
    ground-truth instance points.

    :raises EmptyInputError: If there are no ground-truth instances.
    """
    if len(gt) != len(pred):
        raise ShapeError("%i ground-truth points but %i predicted points" % (len(gt), len(pred)))
    has_gt = gt.ids >= 0
    if not has_gt.any():
        raise EmptyInputError("no ground-truth instances")
    gt_keys, gt_inv = np.unique(gt.ids[has_gt], return_inverse=True)
    gt_sizes = np.bincount(gt_inv, minlength=len(gt_keys))
    has_pred = pred.ids >= 0
    if not has_pred.any():
        return 0.0
    pred_keys, pred_inv = np.unique(pred.ids[has_pred], return_inverse=True)
    pred_sizes = np.bincount(pred_inv, minlength=len(pred_keys))

    gt_of = np.full(len(gt), -1, dtype=np.int64)
    gt_of[has_gt] = gt_inv
    pred_of = np.full(len(pred), -1, dtype=np.int64)
    pred_of[has_pred] = pred_inv
    both = has_gt & has_pred
    n_pred = len(pred_keys)
    inter = np.bincount(
        gt_of[both] * n_pred + pred_of[both], minlength=len(gt_keys) * n_pred
    ).reshape(len(gt_keys), n_pred)
    union = gt_sizes[:, None] + pred_sizes[None, :] - inter
    best = (inter / union).max(axis=1)
    weights = gt_sizes / gt_sizes.sum()
    return float((weights * best).sum())


def _accumulate(hierarchy, gt, pred, start, stop):
    gt_chunk = gt[start:stop]
    pred_chunk = pred[start:stop]
    confusions = [
        LevelConfusion.from_labels(
            gt_chunk[:, level - 1],
            pred_chunk[:, level - 1],
            width,
            level,
            hierarchy.ignore_index(level),
        )
        for level, width in enumerate(hierarchy.widths, start=1)
    ]
    stats = ConsistencyStats(hierarchy.depth).update(hierarchy, pred_chunk, gt_chunk)
    return confusions, stats


def accumulate(hierarchy, gt, pred, threads=1, chunk_size=CHUNK_SIZE):
    # type: (LabelHierarchy, np.ndarray, np.ndarray, int, int) -> tuple
    """Build the per-level confusions and the consistency stats of one set of predictions.

    The points are cut into fixed-size chunks which are counted on a pool of ``threads`` workers and merged in chunk
    order, so the result does not depend on the thread count.
    """
    gt = check_labels(hierarchy, gt)
    pred = check_labels(hierarchy, pred)
    if len(gt) != len(pred):
        raise ShapeError("%i ground-truth labels but %i predictions" % (len(gt), len(pred)))
    ranges = chunk_ranges(len(gt), chunk_size) or [(0, 0)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda r: _accumulate(hierarchy, gt, pred, *r), ranges))
    confusions, stats = parts[0]
    for more_confusions, more_stats in parts[1:]:
        confusions = [a.merge(b) for a, b in zip(confusions, more_confusions)]
        stats = stats.merge(more_stats)
    return confusions, stats


def evaluate(
    hierarchy,  # type: LabelHierarchy
    gt,  # type: np.ndarray
    predictions,  # type: Dict[str, np.ndarray]
    alphas=(1.0,),  # type: Sequence[float]
    gt_instances=None,  # type: Optional[np.ndarray]
    pred_instances=None,  # type: Optional[np.ndarray]
    wcov_level=None,  # type: Optional[int]
    threads=1,  # type: int
    chunk_size=CHUNK_SIZE,  # type: int
):
    # type: (...) -> MetricReport
    """Evaluate one or more methods' hierarchical predictions against ground truth.

    :param hierarchy: The label tree.
    :param gt: ``(N, H)`` ground-truth labels.
    :param predictions: Method name to ``(N, H)`` predicted labels. The report keeps this order.
    :param alphas: CP thresholds for the CR rows.
    :param gt_instances: Optional ``(N,)`` ground-truth instance ids. WCov is reported when both instance arrays are
        given.
    :param pred_instances: Optional ``(N,)`` predicted instance ids, shared by all methods.
    :param wcov_level: The level whose classes are scored by WCov, default level 4 or the leaf level of a shallower
        tree.
    :raises LevelError: If ``wcov_level`` is not a level of the hierarchy.
    :param threads: Worker count for accumulation.
    :returns: A `MetricReport`.
    """
    gt = check_labels(hierarchy, gt)
    if wcov_level is None:
        wcov_level = min(WCOV_LEVEL, hierarchy.depth)
    if not 1 <= wcov_level <= hierarchy.depth:
        raise LevelError("WCov level %i is not a level of a %i-level hierarchy" % (wcov_level, hierarchy.depth))
    report = MetricReport(
        [list(hierarchy.classes(level)) for level in range(1, hierarchy.depth + 1)],
        [hierarchy.ignore_index(level) for level in range(1, hierarchy.depth + 1)],
        [float(alpha) for alpha in alphas],
    )
    for method, pred in predictions.items():
        confusions, stats = accumulate(hierarchy, gt, pred, threads, chunk_size)
        logger.info("%s: evaluated %i points (%i ignored)", method, len(stats), confusions[0].ignored)
        for conf in confusions:
            report.add_level(
                method,
                conf.level,
                overall_accuracy(conf),
                per_class_iou(conf),
                mean_iou(conf),
            )
        for alpha in report.alphas:
            report.add_cr(method, alpha, stats.cr(alpha))
        report.add_histogram(method, stats.histogram)
        if gt_instances is not None and pred_instances is not None:
            pred = check_labels(hierarchy, pred)
            for index in range(hierarchy.widths[wcov_level - 1]):
                if index == hierarchy.ignore_index(wcov_level):
                    continue
                gt_set = InstanceSet.for_class(gt_instances, gt[:, wcov_level - 1], index)
                if not gt_set.n_instances:
                    continue
                pred_set = InstanceSet.for_class(pred_instances, pred[:, wcov_level - 1], index)
                report.add_wcov(method, wcov_level, index, wcov(gt_set, pred_set))
    return report
