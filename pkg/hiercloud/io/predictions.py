"""
Module for prediction files
---------------------------

A prediction file holds the per-level class distributions of N points. It is little-endian::

    magic     4 bytes   b"HCPD"
    version   u16       1
    H         u16       number of levels
    N         u64       number of points
    widths    H x u32   classes per level

followed, level by level, by an ``N x width`` row-major matrix of f4 probabilities.

Rows are read back exactly as stored and are not renormalised, so reading then writing a file reproduces it byte for
byte. Decoders normalise rows themselves.

"""
import logging
from typing import List, NamedTuple, Optional  # noqa

import numpy as np

from ..ensemble import LevelDistributions
from ..errors import FormatError, ShapeError
from ..hierarchy import LabelHierarchy  # noqa

logger = logging.getLogger(__name__)

MAGIC = b"HCPD"
VERSION = 1

HEADER = np.dtype([("magic", "S4"), ("version", "<u2"), ("depth", "<u2"), ("n", "<u8")])
WIDTH = np.dtype("<u4")
PROBABILITY = np.dtype("<f4")

PredictionHeader = NamedTuple(
    "PredictionHeader", [("version", int), ("n_points", int), ("widths", List[int])]
)


def encode_predictions(dists):
    # type: (LevelDistributions) -> bytes
    header = np.array([(MAGIC, VERSION, dists.depth, dists.n_points)], dtype=HEADER)
    parts = [header.tobytes(), np.array(dists.widths, dtype=WIDTH).tobytes()]
    parts.extend(np.ascontiguousarray(p, dtype=PROBABILITY).tobytes() for p in dists.levels)
    return b"".join(parts)


def write_predictions(path, dists):
    # type: (str, LevelDistributions) -> None
    """Write per-level distributions as 32-bit floats."""
    with open(path, "wb") as f:
        f.write(encode_predictions(dists))
    logger.debug("wrote %i x %s predictions to %s", dists.n_points, dists.widths, path)


def decode_header(data, path=None):
    # type: (bytes, Optional[str]) -> PredictionHeader
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
    depth = int(header["depth"])
    if depth < 1:
        raise FormatError("a prediction file needs at least one level", path, 6)
    end = HEADER.itemsize + WIDTH.itemsize * depth
    if len(data) < end:
        raise FormatError(
            "truncated level widths: expected %i bytes, got %i" % (end, len(data)),
            path,
            HEADER.itemsize,
            end,
            len(data),
        )
    widths = [int(w) for w in np.frombuffer(data, WIDTH, count=depth, offset=HEADER.itemsize)]
    return PredictionHeader(int(header["version"]), int(header["n"]), widths)


def read_predictions(path, hierarchy=None):
    # type: (str, Optional[LabelHierarchy]) -> LevelDistributions
    """Read per-level distributions.

    :param path: The file.
    :param hierarchy: If given, the level widths must match it.
    :raises FormatError: On a bad header, truncation or non-finite or negative values.
    :raises ShapeError: If the widths do not match ``hierarchy``.
    """
    with open(path, "rb") as f:
        data = f.read()
    header = decode_header(data, path)
    n = header.n_points
    offset = HEADER.itemsize + WIDTH.itemsize * len(header.widths)
    expected = offset + PROBABILITY.itemsize * n * sum(header.widths)
    if len(data) != expected:
        raise FormatError(
            "%s: expected %i bytes for %i points, got %i"
            % ("truncated" if len(data) < expected else "trailing data", expected, n, len(data)),
            path,
            min(len(data), expected),
            expected,
            len(data),
        )
    levels = []
    for level, width in enumerate(header.widths, start=1):
        p = np.frombuffer(data, PROBABILITY, count=n * width, offset=offset).reshape(n, width)
        if not np.isfinite(p).all() or (p < 0).any():
            raise FormatError("level %i holds negative or non-finite values" % level, path, offset)
        levels.append(p.astype(np.float64))
        offset += PROBABILITY.itemsize * n * width
    dists = LevelDistributions(levels, normalized=False)
    if hierarchy is not None and dists.widths != hierarchy.widths:
        raise ShapeError(
            "%s: level widths %s do not match the hierarchy's %s" % (path, dists.widths, hierarchy.widths)
        )
    logger.debug("read %i x %s predictions from %s", n, header.widths, path)
    return dists
