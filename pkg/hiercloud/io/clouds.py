"""
Module for point cloud files
----------------------------

Point clouds are stored in one of two formats.

The binary format is little-endian and columnar. An 18-byte header::

    magic        4 bytes   b"HCPC"
    version      u16       1
    flags        u16       1 = colours, 2 = labels, 4 = instance ids, 8 = labels hold every level
    N            u64       number of points
    label_width  u16       0 without labels, 1 for leaf labels, H for full per-level labels

is followed by the columns in this order, each one contiguous: x, y and z as f8; r, g and b as u1 (with colours);
``N * label_width`` labels as u2, point by point (with labels); instance ids as i4 (with instance ids).

The CSV format has a header row naming the columns ``x,y,z[,r,g,b][,label][,instance]``, where full per-level labels
are named ``label_1`` to ``label_H``. Coordinates are written with enough digits to read back exactly.

"""
import csv
import logging
import os
from typing import Iterator, List, Optional, Tuple  # noqa

import numpy as np

from ..errors import FormatError
from ..geom.pointcloud import PointCloud
from ..utilities import chunk_ranges

logger = logging.getLogger(__name__)

MAGIC = b"HCPC"
VERSION = 1
COLOR = 1
LABELS = 2
INSTANCE = 4
FULL_LABELS = 8

HEADER = np.dtype(
    [("magic", "S4"), ("version", "<u2"), ("flags", "<u2"), ("n", "<u8"), ("label_width", "<u2")]
)
COORD = np.dtype("<f8")
CHANNEL = np.dtype("u1")
LABEL = np.dtype("<u2")
INSTANCE_ID = np.dtype("<i4")

CHUNK_SIZE = 1 << 20


def cloud_format(path, format=None):
    # type: (str, Optional[str]) -> str
    """``binary`` or ``csv``, from an explicit format or the file extension."""
    if format is not None:
        if format not in ("binary", "csv"):
            raise ValueError("unknown cloud format %r" % format)
        return format
    return "csv" if str(path).lower().endswith(".csv") else "binary"


def read_cloud(path, format=None):
    # type: (str, Optional[str]) -> PointCloud
    """Read a point cloud.

    :param path: The file.
    :param format: ``binary`` or ``csv``, default from the extension.
    :raises FormatError: On a bad magic number, truncation or a malformed row, naming the byte offset or line.
    """
    if cloud_format(path, format) == "csv":
        pc = _read_csv(path)
    else:
        with open(path, "rb") as f:
            data = f.read()
        pc = _decode(data, path)
    logger.debug("read %i points from %s", len(pc), path)
    return pc


def write_cloud(path, pc, format=None):
    # type: (str, PointCloud, Optional[str]) -> None
    """Write a point cloud in the binary or CSV format."""
    if cloud_format(path, format) == "csv":
        _write_csv(path, pc)
    else:
        with open(path, "wb") as f:
            f.write(encode_cloud(pc))
    logger.debug("wrote %i points to %s", len(pc), path)


def _flags(pc):
    # type: (PointCloud) -> Tuple[int, int]
    flags = 0
    label_width = 0
    if pc.rgb is not None:
        flags |= COLOR
    if pc.labels is not None:
        flags |= LABELS
        label_width = 1
        if pc.full_labels:
            flags |= FULL_LABELS
            label_width = pc.labels.shape[1]
    if pc.instance is not None:
        flags |= INSTANCE
    return flags, label_width


def _checked(values, dtype, column):
    # type: (np.ndarray, np.dtype, str) -> bytes
    info = np.iinfo(dtype)
    if len(values) and (values.min() < info.min or values.max() > info.max):
        raise FormatError("%s values must lie in [%i, %i]" % (column, info.min, info.max))
    return values.astype(dtype).tobytes()


def encode_cloud(pc):
    # type: (PointCloud) -> bytes
    """The binary form of a cloud."""
    flags, label_width = _flags(pc)
    header = np.array([(MAGIC, VERSION, flags, len(pc), label_width)], dtype=HEADER)
    parts = [header.tobytes()]
    parts.extend(pc.xyz[:, axis].astype(COORD).tobytes() for axis in range(3))
    if pc.rgb is not None:
        parts.extend(pc.rgb[:, channel].tobytes() for channel in range(3))
    if pc.labels is not None:
        parts.append(_checked(pc.labels.reshape(-1), LABEL, "label"))
    if pc.instance is not None:
        parts.append(_checked(pc.instance, INSTANCE_ID, "instance id"))
    return b"".join(parts)


def _columns(flags, label_width):
    # type: (int, int) -> List[Tuple[str, np.dtype, int]]
    """(name, dtype, values per point) of each column in file order."""
    columns = [("x", COORD, 1), ("y", COORD, 1), ("z", COORD, 1)]
    if flags & COLOR:
        columns += [("r", CHANNEL, 1), ("g", CHANNEL, 1), ("b", CHANNEL, 1)]
    if flags & LABELS:
        columns.append(("label", LABEL, label_width))
    if flags & INSTANCE:
        columns.append(("instance", INSTANCE_ID, 1))
    return columns


def read_header(data, path=None):
    # type: (bytes, Optional[str]) -> np.void
    """Parse and check the header of a binary cloud."""
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
    flags = int(header["flags"])
    if flags & ~(COLOR | LABELS | INSTANCE | FULL_LABELS):
        raise FormatError("unknown flags 0x%x" % flags, path, 6)
    width = int(header["label_width"])
    if bool(flags & LABELS) != (width > 0) or (width > 1 and not flags & FULL_LABELS):
        raise FormatError("label width %i does not match flags 0x%x" % (width, flags), path, 16)
    return header


def _decode(data, path=None):
    # type: (bytes, Optional[str]) -> PointCloud
    header = read_header(data, path)
    n = int(header["n"])
    flags = int(header["flags"])
    columns = _columns(flags, int(header["label_width"]))
    expected = HEADER.itemsize + sum(dtype.itemsize * per * n for _, dtype, per in columns)
    if len(data) != expected:
        raise FormatError(
            "%s: expected %i bytes for %i points, got %i"
            % ("truncated" if len(data) < expected else "trailing data", expected, n, len(data)),
            path,
            min(len(data), expected),
            expected,
            len(data),
        )
    values = {}
    offset = HEADER.itemsize
    for name, dtype, per in columns:
        values[name] = np.frombuffer(data, dtype, count=n * per, offset=offset)
        offset += dtype.itemsize * n * per
    return _assemble(values, flags, int(header["label_width"]), n)


def _assemble(values, flags, label_width, n):
    xyz = np.stack([values["x"], values["y"], values["z"]], axis=1)
    rgb = np.stack([values["r"], values["g"], values["b"]], axis=1) if flags & COLOR else None
    labels = None
    if flags & LABELS:
        labels = values["label"].astype(np.int64)
        if flags & FULL_LABELS:
            labels = labels.reshape(n, label_width)
    instance = values["instance"].astype(np.int64) if flags & INSTANCE else None
    return PointCloud(xyz, rgb, labels, instance)


def iter_cloud_chunks(path, chunk_size=CHUNK_SIZE, format=None):
    # type: (str, int, Optional[str]) -> Iterator[PointCloud]
    """Read a cloud as consecutive chunks of at most ``chunk_size`` points.

    Binary files are memory-mapped, so only one chunk is decoded at a time.
    """
    if cloud_format(path, format) == "csv":
        pc = _read_csv(path)
        for start, stop in chunk_ranges(len(pc), chunk_size):
            yield pc.subset(slice(start, stop))
        return
    if os.path.getsize(path) < HEADER.itemsize:
        with open(path, "rb") as f:
            read_header(f.read(), path)
    data = np.memmap(path, dtype=np.uint8, mode="r")
    header = read_header(data[: HEADER.itemsize].tobytes(), path)
    n = int(header["n"])
    flags = int(header["flags"])
    width = int(header["label_width"])
    columns = _columns(flags, width)
    expected = HEADER.itemsize + sum(dtype.itemsize * per * n for _, dtype, per in columns)
    if len(data) != expected:
        raise FormatError(
            "expected %i bytes for %i points, got %i" % (expected, n, len(data)),
            path,
            min(len(data), expected),
            expected,
            len(data),
        )
    for start, stop in chunk_ranges(n, chunk_size):
        values = {}
        offset = HEADER.itemsize
        for name, dtype, per in columns:
            lo = offset + dtype.itemsize * per * start
            hi = offset + dtype.itemsize * per * stop
            values[name] = np.frombuffer(data[lo:hi].tobytes(), dtype)
            offset += dtype.itemsize * per * n
        yield _assemble(values, flags, width, stop - start)


def csv_columns(pc):
    # type: (PointCloud) -> List[str]
    columns = ["x", "y", "z"]
    if pc.rgb is not None:
        columns += ["r", "g", "b"]
    if pc.full_labels:
        columns += ["label_%i" % level for level in range(1, pc.labels.shape[1] + 1)]
    elif pc.labels is not None:
        columns.append("label")
    if pc.instance is not None:
        columns.append("instance")
    return columns


def _write_csv(path, pc):
    # type: (str, PointCloud) -> None
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(csv_columns(pc))
        for i in range(len(pc)):
            row = [repr(float(v)) for v in pc.xyz[i]]
            if pc.rgb is not None:
                row += [str(int(v)) for v in pc.rgb[i]]
            if pc.labels is not None:
                row += [str(int(v)) for v in np.atleast_1d(pc.labels[i])]
            if pc.instance is not None:
                row.append(str(int(pc.instance[i])))
            writer.writerow(row)


def _parse_csv_header(names, path):
    # type: (List[str], str) -> Tuple[bool, int, bool]
    """(has colours, label columns, has instance ids) of a CSV header, checking its order."""
    names = [n.strip() for n in names]
    if names[:3] != ["x", "y", "z"]:
        raise FormatError("header must start with x,y,z, got %s" % ",".join(names), path, 1)
    rest = names[3:]
    has_rgb = rest[:3] == ["r", "g", "b"]
    if has_rgb:
        rest = rest[3:]
    n_labels = 0
    if rest[:1] == ["label"]:
        n_labels, rest = 1, rest[1:]
    else:
        while rest[:1] == ["label_%i" % (n_labels + 1)]:
            n_labels, rest = n_labels + 1, rest[1:]
        if n_labels == 1:
            n_labels = -1
    has_instance = rest[:1] == ["instance"]
    if has_instance:
        rest = rest[1:]
    if rest:
        raise FormatError("unexpected column %r" % rest[0], path, 1)
    return has_rgb, n_labels, has_instance


def _read_csv(path):
    # type: (str) -> PointCloud
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            names = next(reader)
        except StopIteration:
            raise FormatError("empty file, expected a header row", path, 1)
        has_rgb, n_labels, has_instance = _parse_csv_header(names, path)
        arity = len(names)
        rows = []
        for row in reader:
            if not row:
                continue
            if len(row) != arity:
                raise FormatError(
                    "expected %i columns, got %i" % (arity, len(row)), path, reader.line_num
                )
            try:
                rows.append(
                    [float(v) for v in row[:3]] + [int(v) for v in row[3:]]
                )
            except ValueError as e:
                raise FormatError("bad value: %s" % e, path, reader.line_num)
    table = np.array(rows, dtype=object).reshape(len(rows), arity)
    xyz = table[:, :3].astype(np.float64)
    col = 3
    rgb = None
    if has_rgb:
        rgb = table[:, 3:6].astype(np.int64)
        if len(rgb) and (rgb.min() < 0 or rgb.max() > 255):
            raise FormatError("colour values must lie in [0, 255]", path)
        col = 6
    labels = None
    width = abs(n_labels)
    if width:
        labels = table[:, col : col + width].astype(np.int64)
        labels = labels[:, 0] if n_labels == 1 else labels
        col += width
    instance = table[:, col].astype(np.int64) if has_instance else None
    return PointCloud(xyz, rgb, labels, instance)
