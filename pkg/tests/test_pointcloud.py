"""Tests for the PointCloud container."""
import numpy as np
import pytest

from hiercloud.errors import EmptyInputError, HierCloudError, ShapeError
from hiercloud.geom.pointcloud import PointCloud


@pytest.fixture()
def cloud():
    xyz = [[0.0, 1.0, 2.0], [3.0, 4.0, 5.0], [6.0, 7.0, 8.0]]
    rgb = [[255, 0, 0], [0, 255, 0], [0, 0, 255]]
    return PointCloud(xyz, rgb=rgb, labels=[10, 3, 0], instance=[0, -1, 1])


def test_columns(cloud):
    # type: () -> None
    assert len(cloud) == 3
    assert cloud.x.tolist() == [0.0, 3.0, 6.0]
    assert cloud.z.tolist() == [2.0, 5.0, 8.0]
    assert not cloud.full_labels
    assert repr(cloud) == "PointCloud(points=3, columns=['rgb', 'labels', 'instance'])"


def test_subset(cloud):
    # type: () -> None
    sub = cloud.subset([2, 2, 0])
    assert sub.xyz[:, 0].tolist() == [6.0, 6.0, 0.0]
    assert sub.labels.tolist() == [0, 0, 10]
    assert sub.instance.tolist() == [1, 1, 0]
    assert cloud.subset(slice(0, 2)) == PointCloud(cloud.xyz[:2], cloud.rgb[:2], cloud.labels[:2], cloud.instance[:2])


def test_equality(cloud):
    # type: () -> None
    assert cloud == cloud.subset(np.arange(3))
    assert cloud != PointCloud(cloud.xyz)
    other = cloud.subset(np.arange(3))
    other.labels[0] = 11
    assert cloud != other


def test_labels(cloud, campus):
    # type: () -> None
    full = cloud.hier_labels(campus)
    assert full.shape == (3, 5)
    assert campus.names(full[0])[-1] == "roof"
    lifted = PointCloud(cloud.xyz, labels=full)
    assert lifted.full_labels
    assert lifted.leaf_labels().tolist() == [10, 3, 0]
    with pytest.raises(HierCloudError):
        PointCloud(cloud.xyz).leaf_labels()


def test_concatenate(cloud):
    # type: () -> None
    both = PointCloud.concatenate([cloud, cloud])
    assert len(both) == 6
    assert both.instance.tolist() == [0, -1, 1, 0, -1, 1]
    with pytest.raises(ShapeError):
        PointCloud.concatenate([cloud, PointCloud(cloud.xyz)])
    assert len(PointCloud.concatenate([])) == 0


def test_validation():
    # type: () -> None
    with pytest.raises(HierCloudError):
        PointCloud([[0.0, np.nan, 0.0]])
    with pytest.raises(ShapeError):
        PointCloud(np.zeros((2, 3)), rgb=np.zeros((3, 3)))
    with pytest.raises(ShapeError):
        PointCloud(np.zeros((2, 3)), labels=[1])
    with pytest.raises(ShapeError):
        PointCloud(np.zeros((2, 3)), instance=[[1, 2]])
    with pytest.raises(EmptyInputError):
        PointCloud(np.zeros((0, 3))).require_points()
