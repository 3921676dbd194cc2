"""
Multi-task losses and their gradients
-------------------------------------

The multi-task (MT) objective is the sum of a prediction loss and a consistency loss::

    L_MT = L_prediction + L_consistency

    L_prediction  = sum_h beta_h * CE_h
    L_consistency = sum_{h<H} gamma_h * sum_{(parent, child) edges between h and h+1} [P^{h+1}(child) - P^h(parent)]_+^2

where CE_h is the mean cross entropy at level h and ``[x]_+ = max(x, 0)``. Both terms are averaged over points, so the
loss does not depend on the batch size. Edges between duplicated classes (e.g. construction -> construction) are edges
like any other. Setting every gamma to 0 gives the ablation without the consistency term (MT_nc).

`total_loss_grad` returns the exact gradient of the loss with respect to pre-softmax scores, for use from an external
training loop. `finite_difference_grad` is a central-difference reference for checking it.

"""
import logging
from typing import Callable, List, Optional, Sequence  # noqa

import numpy as np

from .ensemble import LevelDistributions
from .errors import EmptyInputError, HierCloudError, ShapeError
from .hierarchy import LabelHierarchy, check_labels  # noqa

logger = logging.getLogger(__name__)

EPSILON = 1e-12
DEFAULT_BETA = 1.0
DEFAULT_GAMMA = 0.05


class LossWeights(object):
    """Per-level loss weights.

    :param beta: H prediction-loss weights.
    :param gamma: H-1 consistency-loss weights, one per pair of adjacent levels.
    """

    def __init__(self, beta, gamma):
        # type: (Sequence[float], Sequence[float]) -> None
        self.beta = np.asarray(beta, dtype=np.float64).reshape(-1)
        self.gamma = np.asarray(gamma, dtype=np.float64).reshape(-1)
        if (self.beta < 0).any() or (self.gamma < 0).any():
            raise ValueError("loss weights must be non-negative")
        if len(self.gamma) != max(len(self.beta) - 1, 0):
            raise ShapeError(
                "%i beta weights need %i gamma weights, got %i"
                % (len(self.beta), max(len(self.beta) - 1, 0), len(self.gamma))
            )

    def __repr__(self):
        # type: () -> str
        class_name = type(self).__name__
        return "{}(beta={!r}, gamma={!r})".format(class_name, self.beta.tolist(), self.gamma.tolist())

    @classmethod
    def defaults(cls, depth, beta=DEFAULT_BETA, gamma=DEFAULT_GAMMA):
        # type: (int, float, float) -> LossWeights
        """The same beta at every level and the same gamma at every pair of levels."""
        return cls([beta] * depth, [gamma] * (depth - 1))

    @property
    def depth(self):
        # type: () -> int
        return len(self.beta)

    def without_consistency(self):
        # type: () -> LossWeights
        """These weights with every gamma set to 0."""
        return LossWeights(self.beta, np.zeros_like(self.gamma))

    def check(self, hierarchy):
        # type: (LabelHierarchy) -> LossWeights
        if self.depth != hierarchy.depth:
            raise ShapeError(
                "%i level weights for a hierarchy of %i levels" % (self.depth, hierarchy.depth)
            )
        return self


class LossValue(object):
    """A loss split into its parts.

    :param prediction: Per-level weighted cross entropies.
    :param consistency: Per-level-pair weighted consistency penalties.
    """

    def __init__(self, prediction, consistency):
        # type: (Sequence[float], Sequence[float]) -> None
        self.prediction_levels = [float(v) for v in prediction]
        self.consistency_levels = [float(v) for v in consistency]
        self.prediction = _ordered_sum(self.prediction_levels)
        self.consistency = _ordered_sum(self.consistency_levels)
        self.total = self.prediction + self.consistency

    def __repr__(self):
        # type: () -> str
        class_name = type(self).__name__
        return "{}(total={!r}, prediction={!r}, consistency={!r})".format(
            class_name, self.total, self.prediction, self.consistency
        )

    def __add__(self, other):
        # type: (LossValue) -> LossValue
        """Combine a prediction-only and a consistency-only value."""
        prediction = self.prediction_levels or other.prediction_levels
        consistency = self.consistency_levels or other.consistency_levels
        return LossValue(prediction, consistency)


def _ordered_sum(values):
    # type: (Sequence[float]) -> float
    total = 0.0
    for v in values:
        total += v
    return total


def _targets(hierarchy, dists, targets):
    # type: (LabelHierarchy, LevelDistributions, np.ndarray) -> np.ndarray
    targets = check_labels(hierarchy, targets)
    if len(targets) != dists.n_points:
        raise ShapeError("%i targets for %i points" % (len(targets), dists.n_points))
    if not len(targets):
        raise EmptyInputError("loss of an empty batch")
    return targets


def prediction_loss(dists, targets, weights, hierarchy=None):
    # type: (LevelDistributions, np.ndarray, LossWeights, Optional[LabelHierarchy]) -> LossValue
    """Weighted sum of the per-level mean cross entropies.

    :param dists: Normalised per-level distributions.
    :param targets: ``(N, H)`` target labels.
    :param weights: Loss weights; only beta is used.
    :param hierarchy: Used to check shapes when given.
    :returns: A `LossValue` with no consistency part.
    """
    if hierarchy is not None:
        dists.check(hierarchy)
        weights.check(hierarchy)
        targets = _targets(hierarchy, dists, targets)
    else:
        targets = np.asarray(targets, dtype=np.int64)
        if targets.shape != (dists.n_points, dists.depth) or weights.depth != dists.depth:
            raise ShapeError("targets, weights and distributions do not have matching shapes")
        if not len(targets):
            raise EmptyInputError("loss of an empty batch")
    rows = np.arange(dists.n_points)
    levels = []
    for level, p in enumerate(dists.levels):
        picked = np.maximum(p[rows, targets[:, level]], EPSILON)
        levels.append(weights.beta[level] * float(np.mean(-np.log(picked))))
    return LossValue(levels, [])


def consistency_loss(hierarchy, dists, weights):
    # type: (LabelHierarchy, LevelDistributions, LossWeights) -> LossValue
    """Squared-hinge penalty on every tree edge whose child is more likely than its parent.

    :returns: A `LossValue` with no prediction part.
    """
    dists.check(hierarchy)
    weights.check(hierarchy)
    if not dists.n_points:
        raise EmptyInputError("loss of an empty batch")
    levels = []
    for level in range(1, hierarchy.depth):
        excess = _excess(hierarchy, dists.levels, level)
        levels.append(weights.gamma[level - 1] * float(np.mean((excess ** 2).sum(axis=1))))
    return LossValue([], levels)


def _excess(hierarchy, probs, level):
    # type: (LabelHierarchy, List[np.ndarray], int) -> np.ndarray
    """``max(P^{h+1}(child) - P^h(parent), 0)`` for every edge below ``level``, one column per child."""
    parents = hierarchy.parent_index(level + 1)
    return np.maximum(probs[level] - probs[level - 1][:, parents], 0.0)


def total_loss(hierarchy, dists, targets, weights):
    # type: (LabelHierarchy, LevelDistributions, np.ndarray, LossWeights) -> LossValue
    """Prediction loss plus consistency loss. With every gamma 0 this equals `prediction_loss`."""
    return prediction_loss(dists, targets, weights, hierarchy) + consistency_loss(
        hierarchy, dists, weights
    )


def softmax(scores):
    # type: (np.ndarray) -> np.ndarray
    """Row-wise softmax."""
    scores = np.asarray(scores, dtype=np.float64)
    shifted = np.exp(scores - scores.max(axis=1, keepdims=True))
    return shifted / shifted.sum(axis=1, keepdims=True)


def _check_scores(scores):
    # type: (Sequence[np.ndarray]) -> List[np.ndarray]
    scores = [np.asarray(s, dtype=np.float64) for s in scores]
    for level, s in enumerate(scores, start=1):
        if not np.isfinite(s).all():
            raise HierCloudError("level %i scores are not all finite" % level)
    return scores


def loss_from_scores(hierarchy, scores, targets, weights):
    # type: (LabelHierarchy, Sequence[np.ndarray], np.ndarray, LossWeights) -> LossValue
    """`total_loss` of the row-softmax of pre-softmax scores."""
    scores = _check_scores(scores)
    return total_loss(hierarchy, LevelDistributions([softmax(s) for s in scores]), targets, weights)


def total_loss_grad(hierarchy, scores, targets, weights):
    # type: (LabelHierarchy, Sequence[np.ndarray], np.ndarray, LossWeights) -> List[np.ndarray]
    """The exact gradient of `total_loss` composed with a row softmax, with respect to the scores.

    :param scores: One ``(N, |C^h|)`` array of pre-softmax scores per level.
    :param targets: ``(N, H)`` target labels.
    :param weights: Loss weights.
    :returns: One gradient array per level, shaped like ``scores``.
    :raises HierCloudError: If any score is not finite.
    """
    scores = _check_scores(scores)
    probs = [softmax(s) for s in scores]
    dists = LevelDistributions(probs).check(hierarchy)
    weights.check(hierarchy)
    targets = _targets(hierarchy, dists, targets)
    n = dists.n_points
    rows = np.arange(n)

    # gradient with respect to the probabilities
    grads = [np.zeros_like(p) for p in probs]
    for level, p in enumerate(probs):
        picked = p[rows, targets[:, level]]
        active = picked > EPSILON
        grads[level][rows[active], targets[active, level]] = (
            -weights.beta[level] / (n * picked[active])
        )
    for level in range(1, hierarchy.depth):
        excess = _excess(hierarchy, probs, level)
        push = 2.0 * weights.gamma[level - 1] / n * excess
        grads[level] += push
        parents = hierarchy.parent_index(level + 1)
        onehot = np.zeros((len(parents), hierarchy.widths[level - 1]))
        onehot[np.arange(len(parents)), parents] = 1.0
        grads[level - 1] -= push @ onehot

    # back through the softmax Jacobian
    return [p * (g - (g * p).sum(axis=1, keepdims=True)) for p, g in zip(probs, grads)]


def finite_difference_grad(func, scores, step=1e-6):
    # type: (Callable[[List[np.ndarray]], float], Sequence[np.ndarray], float) -> List[np.ndarray]
    """Central-difference gradient of a scalar function of per-level score arrays.

    :param func: Maps a list of score arrays to a float.
    :param scores: The point to differentiate at.
    :param step: Perturbation size.
    """
    scores = [np.array(s, dtype=np.float64) for s in scores]
    grads = []
    for s in scores:
        grad = np.zeros_like(s)
        for index in np.ndindex(*s.shape):
            original = s[index]
            s[index] = original + step
            upper = func(scores)
            s[index] = original - step
            lower = func(scores)
            s[index] = original
            grad[index] = (upper - lower) / (2 * step)
        grads.append(grad)
    return grads


def relative_error(analytic, numeric):
    # type: (Sequence[np.ndarray], Sequence[np.ndarray]) -> float
    """Largest absolute difference between two gradients relative to their largest component."""
    a = np.concatenate([np.ravel(g) for g in analytic])
    b = np.concatenate([np.ravel(g) for g in numeric])
    scale = max(np.abs(a).max(initial=0.0), np.abs(b).max(initial=0.0), 1e-300)
    return float(np.abs(a - b).max(initial=0.0) / scale)
