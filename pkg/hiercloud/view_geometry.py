"""Tools for visualising point clouds and evaluation results."""
from typing import Optional  # noqa
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .geom.pointcloud import PointCloud  # noqa
    from .hierarchy import LabelHierarchy  # noqa
    from .report import MetricReport  # noqa

try:
    from mpl_toolkits.mplot3d import Axes3D  # noqa
    import matplotlib.pyplot as plt
except (ImportError, RuntimeError):
    # this isn't always needed so we can ignore if it's not present
    pass


def _limits(xyz):
    """Equal-extent axis limits so the plot is not distorted."""
    if not len(xyz):
        return {"x": (0, 0), "y": (0, 0), "z": (0, 0)}
    lo = xyz.min(axis=0)
    max_delta = float((xyz.max(axis=0) - lo).max())
    return {axis: (lo[i], lo[i] + max_delta) for i, axis in enumerate("xyz")}


def _finish(fig, path, test):
    if path:
        fig.savefig(path)
    if not test:
        plt.show()
    return fig


def view_cloud(pc, hierarchy=None, level=None, max_points=20000, path=None, test=False):
    # type: (PointCloud, Optional[LabelHierarchy], Optional[int], int, Optional[str], bool) -> plt.Figure
    """Display a point cloud as a 3D scatter.

    :param pc: The cloud.
    :param hierarchy: Needed to colour leaf labels by a coarser level.
    :param level: Colour points by their class at this level. Default is the stored colours, or plain points.
    :param max_points: Show an evenly spaced subset of at most this many points.
    :param path: Also save the figure here.
    """
    step = max(1, int(np.ceil(len(pc) / float(max_points))))
    shown = pc.subset(slice(0, len(pc), step))
    fig = plt.figure()
    ax = fig.add_subplot(projection="3d")
    if level is not None:
        if hierarchy is None:
            raise ValueError("colouring by level needs a hierarchy")
        classes = shown.hier_labels(hierarchy)[:, level - 1]
        names = hierarchy.classes(level)
        for index in np.unique(classes):
            mask = classes == index
            ax.scatter(shown.x[mask], shown.y[mask], shown.z[mask], s=1, label=names[index])
        ax.legend(fontsize="small", markerscale=5)
    elif shown.rgb is not None:
        ax.scatter(shown.x, shown.y, shown.z, c=shown.rgb / 255.0, s=1)
    else:
        ax.scatter(shown.x, shown.y, shown.z, s=1)
    limits = _limits(shown.xyz)
    ax.set_xlim(limits["x"])
    ax.set_ylim(limits["y"])
    ax.set_zlim(limits["z"])
    return _finish(fig, path, test)


def plot_consistency(report, path=None, test=False):
    # type: (MetricReport, Optional[str], bool) -> plt.Figure
    """Bar chart of the share of points at each CP level, one group of bars per method."""
    fig, ax = plt.subplots()
    methods = [m for m in report.methods if m in report.histograms]
    width = 0.8 / max(len(methods), 1)
    for i, method in enumerate(methods):
        hist = np.asarray(report.histograms[method], dtype=float)
        shares = hist / hist.sum() if hist.sum() else hist
        positions = np.arange(len(hist)) + i * width
        ax.bar(positions, shares, width=width, label=method)
    if methods:
        depth = len(report.histograms[methods[0]]) - 1
        ax.set_xticks(np.arange(depth + 1) + 0.4 - width / 2)
        ax.set_xticklabels(["%i/%i" % (k, depth) for k in range(depth + 1)])
        ax.legend()
    ax.set_xlabel("CP")
    ax.set_ylabel("share of points")
    return _finish(fig, path, test)


def plot_iou(report, level, path=None, test=False):
    # type: (MetricReport, int, Optional[str], bool) -> plt.Figure
    """Per-class IoU bars at one level, one group of bars per method. Undefined IoUs are left blank."""
    names = report.level_classes[level - 1]
    ignore = report.ignore_indices[level - 1]
    shown = [i for i in range(len(names)) if i != ignore]
    fig, ax = plt.subplots()
    methods = [m for m in report.methods if (m, level) in report.iou]
    width = 0.8 / max(len(methods), 1)
    for i, method in enumerate(methods):
        iou = report.iou[(method, level)][shown]
        ax.bar(np.arange(len(shown)) + i * width, np.nan_to_num(iou), width=width, label=method)
    ax.set_xticks(np.arange(len(shown)) + 0.4 - width / 2)
    ax.set_xticklabels([names[i] for i in shown], rotation=45, ha="right")
    ax.set_ylabel("IoU")
    ax.set_title("level %i" % level)
    if methods:
        ax.legend()
    fig.tight_layout()
    return _finish(fig, path, test)
