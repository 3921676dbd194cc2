"""Tests for reading and writing point cloud files."""
import numpy as np
import pytest

from hiercloud.errors import FormatError
from hiercloud.geom.pointcloud import PointCloud
from hiercloud.io.clouds import (
    HEADER,
    cloud_format,
    csv_columns,
    encode_cloud,
    iter_cloud_chunks,
    read_cloud,
    read_header,
    write_cloud,
)


def labelled_cloud(n=100, full=False, seed=0):
    rng = np.random.default_rng(seed)
    labels = rng.integers(15, size=n)
    if full:
        labels = np.column_stack([rng.integers(3, size=n)] + [rng.integers(w, size=n) for w in (4, 6, 9, 15)])
    return PointCloud(
        rng.normal(scale=100.0, size=(n, 3)),
        rgb=rng.integers(256, size=(n, 3)),
        labels=labels,
        instance=rng.integers(-1, 20, size=n),
    )


class TestBinary:
    def test_round_trip_is_exact(self, tmp_path):
        # type: () -> None
        pc = labelled_cloud()
        path = str(tmp_path / "region.hcpc")
        write_cloud(path, pc)
        again = read_cloud(path)
        assert again == pc
        with open(path, "rb") as f:
            assert f.read() == encode_cloud(again)

    def test_full_labels(self, tmp_path):
        # type: () -> None
        pc = labelled_cloud(full=True)
        path = str(tmp_path / "region.hcpc")
        write_cloud(path, pc)
        again = read_cloud(path)
        assert again.full_labels
        assert again == pc

    def test_layout(self):
        # type: () -> None
        pc = PointCloud([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]], labels=[7, 8])
        data = encode_cloud(pc)
        assert HEADER.itemsize == 18
        assert data[:4] == b"HCPC"
        assert len(data) == 18 + 2 * 3 * 8 + 2 * 2
        header = read_header(data)
        assert int(header["n"]) == 2
        assert int(header["flags"]) == 2
        assert int(header["label_width"]) == 1
        # columnar: all x first
        assert np.frombuffer(data[18:34], "<f8").tolist() == [1.0, 4.0]

    def test_xyz_only_and_empty(self, tmp_path):
        # type: () -> None
        for pc in [PointCloud([[0.5, -0.25, 1e300]]), PointCloud(np.zeros((0, 3)))]:
            path = str(tmp_path / "plain.hcpc")
            write_cloud(path, pc)
            assert read_cloud(path) == pc

    def test_truncated(self, tmp_path):
        # type: () -> None
        data = encode_cloud(labelled_cloud(10))
        path = tmp_path / "cut.hcpc"
        path.write_bytes(data[:-3])
        with pytest.raises(FormatError) as e:
            read_cloud(str(path))
        assert e.value.expected == len(data)
        assert e.value.actual == len(data) - 3
        assert "truncated" in str(e.value)

    def test_trailing_data(self, tmp_path):
        # type: () -> None
        data = encode_cloud(labelled_cloud(10))
        path = tmp_path / "long.hcpc"
        path.write_bytes(data + b"\x00")
        with pytest.raises(FormatError) as e:
            read_cloud(str(path))
        assert e.value.actual == len(data) + 1

    def test_bad_header(self, tmp_path):
        # type: () -> None
        data = encode_cloud(labelled_cloud(10))
        path = tmp_path / "bad.hcpc"
        path.write_bytes(b"XXXX" + data[4:])
        with pytest.raises(FormatError) as e:
            read_cloud(str(path))
        assert e.value.offset == 0
        path.write_bytes(data[:10])
        with pytest.raises(FormatError) as e:
            read_cloud(str(path))
        assert e.value.expected == 18

    def test_label_range(self):
        # type: () -> None
        with pytest.raises(FormatError):
            encode_cloud(PointCloud([[0.0, 0.0, 0.0]], labels=[70000]))

    def test_chunks(self, tmp_path):
        # type: () -> None
        pc = labelled_cloud(1000, full=True)
        path = str(tmp_path / "region.hcpc")
        write_cloud(path, pc)
        chunks = list(iter_cloud_chunks(path, chunk_size=300))
        assert [len(c) for c in chunks] == [300, 300, 300, 100]
        assert PointCloud.concatenate(chunks) == pc


class TestCSV:
    def test_round_trip(self, tmp_path):
        # type: () -> None
        pc = labelled_cloud(50, full=True)
        path = str(tmp_path / "region.csv")
        write_cloud(path, pc)
        with open(path) as f:
            header = f.readline().strip()
        assert header == "x,y,z,r,g,b,label_1,label_2,label_3,label_4,label_5,instance"
        assert read_cloud(path) == pc

    def test_leaf_labels(self, tmp_path):
        # type: () -> None
        pc = PointCloud([[0.1, 0.2, 0.3]], labels=[4])
        assert csv_columns(pc) == ["x", "y", "z", "label"]
        path = str(tmp_path / "leaf.csv")
        write_cloud(path, pc)
        again = read_cloud(path)
        assert not again.full_labels
        assert again == pc

    def test_arity_error_names_line(self, tmp_path):
        # type: () -> None
        path = tmp_path / "bad.csv"
        path.write_text("x,y,z,label\n0,0,0,1\n1,1,1\n")
        with pytest.raises(FormatError) as e:
            read_cloud(str(path))
        assert e.value.offset == 3

    def test_bad_value(self, tmp_path):
        # type: () -> None
        path = tmp_path / "bad.csv"
        path.write_text("x,y,z\n0,0,zero\n")
        with pytest.raises(FormatError) as e:
            read_cloud(str(path))
        assert e.value.offset == 2

    def test_bad_header(self, tmp_path):
        # type: () -> None
        for text in ["", "a,b,c\n", "x,y,z,colour\n"]:
            path = tmp_path / "bad.csv"
            path.write_text(text)
            with pytest.raises(FormatError):
                read_cloud(str(path))

    def test_chunks(self, tmp_path):
        # type: () -> None
        pc = labelled_cloud(25)
        path = str(tmp_path / "region.csv")
        write_cloud(path, pc)
        assert [len(c) for c in iter_cloud_chunks(path, chunk_size=10)] == [10, 10, 5]


def test_format_from_extension():
    # type: () -> None
    assert cloud_format("a/b.CSV") == "csv"
    assert cloud_format("a/b.hcpc") == "binary"
    assert cloud_format("a/b.csv", "binary") == "binary"
    with pytest.raises(ValueError):
        cloud_format("a/b", "las")
