"""Tests for metric reports."""
import numpy as np
import pytest

from hiercloud.errors import FormatError
from hiercloud.metrics import evaluate
from hiercloud.report import MetricReport


@pytest.fixture()
def report(small_hier, metric_labels):
    gt, pred = metric_labels
    return evaluate(small_hier, gt, {"HE": gt, "MC": pred}, alphas=[1.0, 0.5])


def test_text_round_trip(report):
    # type: () -> None
    again = MetricReport.from_text(report.to_text())
    assert again == report
    assert again.methods == ["HE", "MC"]
    assert again.alphas == [1.0, 0.5]
    assert again.oa[("MC", 2)] == report.oa[("MC", 2)]
    assert np.array_equal(again.iou[("MC", 2)], report.iou[("MC", 2)])
    assert again.histograms == report.histograms


def test_round_trip_keeps_nan_and_wcov():
    # type: () -> None
    report = MetricReport([["u", "a", "b"]], [0], [1.0])
    report.add_level("M", 1, 0.5, [np.nan, 0.25, 1.0], 0.625)
    report.add_cr("M", 1.0, 1.0)
    report.add_wcov("M", 1, 2, 0.375)
    again = MetricReport.from_text(report.to_text())
    assert np.isnan(again.iou[("M", 1)][0])
    assert again.wcov[("M", 1, 2)] == 0.375
    assert again.ignore_indices == [0]
    assert again == report


def test_text_keys(report):
    # type: () -> None
    lines = report.to_text().splitlines()
    assert lines[0].startswith("#")
    assert "methods=HE,MC" in lines
    assert "classes/2=a1,a2,b1" in lines
    assert "ignore/1=-" in lines
    assert "MC/cr/1.0=%r" % (10 / 12.0) in lines
    assert "MC/cp_histogram=0,2,10" in lines


def test_table(report):
    # type: () -> None
    rows = [row.split() for row in report.to_table().splitlines()]
    assert rows[0] == ["Level", "Class", "HE", "MC"]
    assert ["C1", "A", "100.0", "75.0"] in rows
    assert ["C2", "a1", "100.0", "50.0"] in rows
    assert ["a2", "100.0", "40.0"] in rows
    assert ["mIoU", "100.0", "50.0"] in rows
    assert ["OA", "100.0", "83.3"] in rows
    assert ["CR_1", "100.0", "83.3"] in rows
    assert ["CR_0.5", "100.0", "100.0"] in rows


def test_table_skips_ignore_class(campus):
    # type: () -> None
    gt = campus.paths[[0, 10, 10, 3]]
    table = evaluate(campus, gt, {"GT": gt}).to_table()
    assert "unclassified" not in table
    assert "roof" in table


def test_bad_method_name():
    # type: () -> None
    report = MetricReport([["a"]])
    with pytest.raises(ValueError):
        report.add_cr("M/1", 1.0, 1.0)


class TestParseErrors:
    def test_missing_equals(self, report):
        # type: () -> None
        text = report.to_text().splitlines()
        text.insert(3, "garbage")
        with pytest.raises(FormatError) as e:
            MetricReport.from_text("\n".join(text))
        assert e.value.offset == 4

    def test_unknown_method(self, report):
        # type: () -> None
        text = report.to_text() + "XX/1/oa=0.5\n"
        with pytest.raises(FormatError) as e:
            MetricReport.from_text(text)
        assert e.value.offset == len(text.splitlines())

    def test_bad_key(self, report):
        # type: () -> None
        text = report.to_text() + "HE/1/acc=0.5\n"
        with pytest.raises(FormatError):
            MetricReport.from_text(text)

    def test_missing_header(self):
        # type: () -> None
        with pytest.raises(FormatError):
            MetricReport.from_text("version=1\n")
        with pytest.raises(FormatError):
            MetricReport.from_text("version=2\nalphas=1.0\nmethods=M\n")
