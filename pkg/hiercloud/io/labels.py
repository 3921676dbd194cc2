"""
Module for decoded label files
------------------------------

A label file holds the decoded hierarchical labels of N points, little-endian::

    magic     4 bytes   b"HCPL"
    version   u16       1
    H         u16       number of levels
    N         u64       number of points

followed by ``N x H`` u2 class indices, point by point.

"""
import logging
from typing import Optional  # noqa

import numpy as np

from ..errors import FormatError, HierCloudError
from ..hierarchy import LabelHierarchy, check_labels  # noqa
from . import clouds

logger = logging.getLogger(__name__)

MAGIC = b"HCPL"
VERSION = 1

HEADER = np.dtype([("magic", "S4"), ("version", "<u2"), ("depth", "<u2"), ("n", "<u8")])
LABEL = np.dtype("<u2")


def encode_labels(labels):
    # type: (np.ndarray) -> bytes
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 2 or labels.shape[1] < 1:
        raise HierCloudError("labels must be an (N, H) array, got shape %s" % (labels.shape,))
    if labels.size and (labels.min() < 0 or labels.max() > np.iinfo(LABEL).max):
        raise FormatError("label values must lie in [0, %i]" % np.iinfo(LABEL).max)
    header = np.array([(MAGIC, VERSION, labels.shape[1], len(labels))], dtype=HEADER)
    return header.tobytes() + labels.astype(LABEL).tobytes()


def write_labels(path, labels):
    # type: (str, np.ndarray) -> None
    """Write ``(N, H)`` hierarchical labels."""
    with open(path, "wb") as f:
        f.write(encode_labels(labels))
    logger.debug("wrote %i labels to %s", len(labels), path)


def decode_labels(data, path=None):
    # type: (bytes, Optional[str]) -> np.ndarray
    if len(data) < HEADER.itemsize:
        raise FormatError(
            "truncated header: expected %i bytes, got %i" % (HEADER.itemsize, len(data)),
            path,
            0,
            HEADER.itemsize,
            len(data),
        )
    header = np.frombuffer(data, HEADER, count=1)[0]
    if header["magic"] != MAGIC:
        raise FormatError("bad magic %r, expected %r" % (bytes(header["magic"]), MAGIC), path, 0)
    if header["version"] != VERSION:
        raise FormatError("unsupported version %i" % header["version"], path, 4)
    depth, n = int(header["depth"]), int(header["n"])
    expected = HEADER.itemsize + LABEL.itemsize * depth * n
    if len(data) != expected:
        raise FormatError(
            "%s: expected %i bytes for %i points, got %i"
            % ("truncated" if len(data) < expected else "trailing data", expected, n, len(data)),
            path,
            min(len(data), expected),
            expected,
            len(data),
        )
    values = np.frombuffer(data, LABEL, count=depth * n, offset=HEADER.itemsize)
    return values.astype(np.int64).reshape(n, depth)


def read_labels(path, hierarchy=None):
    # type: (str, Optional[LabelHierarchy]) -> np.ndarray
    """Read ``(N, H)`` labels from a label file or from the labels of a binary or CSV cloud.

    Clouds which store leaf labels only are lifted through ``hierarchy``, which is then required.

    :raises FormatError: If the file is malformed.
    :raises HierCloudError: If a cloud has no labels, or leaf labels come without a hierarchy.
    """
    if clouds.cloud_format(path) == "binary":
        with open(path, "rb") as f:
            data = f.read()
        if data[:4] != clouds.MAGIC:
            labels = decode_labels(data, path)
            return labels if hierarchy is None else check_labels(hierarchy, labels)
    pc = clouds.read_cloud(path)
    if pc.labels is None:
        raise HierCloudError("%s: the point cloud has no labels" % path)
    if hierarchy is None:
        if not pc.full_labels:
            raise HierCloudError("%s holds leaf labels only, a hierarchy is needed to lift them" % path)
        return pc.labels
    return pc.hier_labels(hierarchy)
