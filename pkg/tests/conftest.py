"""A module containing pytest fixtures that are used in multiple places in the test suite."""
import numpy as np
import pytest

from hiercloud.ensemble import LevelDistributions
from hiercloud.hierarchy import campus3d, parse_hierarchy, random_hierarchy

small_hier_txt = """
    levels 2
    level 1: A,B
    level 2: a1,a2,b1
    edge 2:a1 -> 1:A
    edge 2:a2 -> 1:A
    edge 2:b1 -> 1:B
    """

pair_hier_txt = """
    levels 2
    level 1: A,B
    level 2: a,b
    edge 2:a -> 1:A
    edge 2:b -> 1:B
    """

# twelve points on the small tree, as (level 1, level 2) class indices
metric_gt = np.array(
    [[0, 0]] * 4 + [[0, 1]] * 3 + [[1, 2]] * 5,
)
metric_pred = np.array(
    [
        [0, 0],
        [0, 0],
        [0, 0],
        [0, 1],
        [0, 1],
        [1, 1],
        [0, 0],
        [1, 2],
        [1, 2],
        [1, 2],
        [1, 1],
        [0, 0],
    ]
)


@pytest.fixture(scope="session")
def campus():
    """The bundled five-level Campus3D tree."""
    return campus3d()


@pytest.fixture()
def small_hier():
    """A two-level tree A -> {a1, a2}, B -> {b1}."""
    return parse_hierarchy(small_hier_txt)


@pytest.fixture()
def pair_hier():
    """A two-level tree with one child per parent."""
    return parse_hierarchy(pair_hier_txt)


@pytest.fixture()
def metric_labels():
    """Ground truth and predictions of the twelve-point metric fixture on `small_hier`."""
    return metric_gt.copy(), metric_pred.copy()


def random_distributions(rng, hierarchy, n_points):
    """Random normalised per-level distributions."""
    levels = []
    for width in hierarchy.widths:
        p = rng.random((n_points, width)) + 1e-3
        levels.append(p / p.sum(axis=1, keepdims=True))
    return LevelDistributions(levels)


def random_labels(rng, hierarchy, n_points):
    """Random, usually inconsistent, hierarchical labels."""
    return np.column_stack([rng.integers(w, size=n_points) for w in hierarchy.widths])


@pytest.fixture()
def random_trees():
    """Random trees of up to six levels and 50 leaves, some with an ignore class."""
    rng = np.random.default_rng(20)
    return [
        random_hierarchy(rng, ignore_class="unclassified" if i % 3 == 0 else None)
        for i in range(30)
    ]
