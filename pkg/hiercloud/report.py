"""
Metric reports
--------------

A `MetricReport` collects the results of one or more methods: per-level OA, per-class IoU and mIoU, CR at a list of CP
levels, the CP histogram, and optionally per-class WCov.

Two serialisations are provided.

`MetricReport.to_text` writes a machine-readable ``key=value`` format that keeps full float precision and reads back
with `MetricReport.from_text`::

    # hiercloud metric report
    version=1
    alphas=1.0
    methods=HE,MC
    classes/1=unclassified,ground,construction
    ignore/1=0
    HE/1/oa=0.91
    HE/1/miou=0.86
    HE/1/iou/1=0.85
    HE/cr/1.0=1.0

`MetricReport.to_table` writes an aligned table for people: classes grouped by level down the rows, one column per
method, percentages to one decimal.

"""
import math
from typing import Dict, List, Optional, Sequence, Tuple  # noqa

import numpy as np

from .errors import FormatError

VERSION = 1


def _float(value):
    # type: (float) -> str
    return repr(float(value))


class MetricReport(object):
    """Accumulated evaluation results.

    :param level_classes: Class names per level, coarsest first.
    :param ignore_indices: Index of the ignore class at each level, or None.
    :param alphas: The CP levels reported as CR rows.
    """

    def __init__(self, level_classes, ignore_indices=None, alphas=(1.0,)):
        # type: (Sequence[Sequence[str]], Optional[Sequence[Optional[int]]], Sequence[float]) -> None
        self.level_classes = [list(names) for names in level_classes]
        if ignore_indices is None:
            ignore_indices = [None] * len(self.level_classes)
        self.ignore_indices = list(ignore_indices)
        self.alphas = [float(alpha) for alpha in alphas]
        self.methods = []  # type: List[str]
        self.oa = {}  # type: Dict[Tuple[str, int], float]
        self.miou = {}  # type: Dict[Tuple[str, int], float]
        self.iou = {}  # type: Dict[Tuple[str, int], np.ndarray]
        self.cr = {}  # type: Dict[Tuple[str, float], float]
        self.histograms = {}  # type: Dict[str, List[int]]
        self.wcov = {}  # type: Dict[Tuple[str, int, int], float]

    def __repr__(self):
        # type: () -> str
        class_name = type(self).__name__
        return "{}(levels={!r}, methods={!r})".format(class_name, self.depth, self.methods)

    def __eq__(self, other):
        if not isinstance(other, MetricReport):
            return NotImplemented
        return self.to_text() == other.to_text()

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    @property
    def depth(self):
        # type: () -> int
        return len(self.level_classes)

    def _method(self, method):
        # type: (str) -> None
        if not method or any(c in method for c in "/=,\n"):
            raise ValueError("method names may not contain '/', '=', ',' or newlines: %r" % method)
        if method not in self.methods:
            self.methods.append(method)

    def add_level(self, method, level, oa, iou, miou):
        # type: (str, int, float, Sequence[float], float) -> None
        self._method(method)
        self.oa[(method, level)] = float(oa)
        self.iou[(method, level)] = np.asarray(iou, dtype=float)
        self.miou[(method, level)] = float(miou)

    def add_cr(self, method, alpha, value):
        # type: (str, float, float) -> None
        self._method(method)
        self.cr[(method, float(alpha))] = float(value)

    def add_histogram(self, method, histogram):
        # type: (str, Sequence[int]) -> None
        self._method(method)
        self.histograms[method] = [int(n) for n in histogram]

    def add_wcov(self, method, level, index, value):
        # type: (str, int, int, float) -> None
        self._method(method)
        self.wcov[(method, level, index)] = float(value)

    def to_text(self):
        # type: () -> str
        """The machine-readable form, lossless."""
        lines = [
            "# hiercloud metric report",
            "version=%i" % VERSION,
            "alphas=%s" % ",".join(_float(a) for a in self.alphas),
            "methods=%s" % ",".join(self.methods),
        ]
        for level, names in enumerate(self.level_classes, start=1):
            lines.append("classes/%i=%s" % (level, ",".join(names)))
            ignore = self.ignore_indices[level - 1]
            lines.append("ignore/%i=%s" % (level, "-" if ignore is None else ignore))
        for method in self.methods:
            for level in range(1, self.depth + 1):
                if (method, level) not in self.oa:
                    continue
                lines.append("%s/%i/oa=%s" % (method, level, _float(self.oa[(method, level)])))
                lines.append("%s/%i/miou=%s" % (method, level, _float(self.miou[(method, level)])))
                for index, value in enumerate(self.iou[(method, level)]):
                    lines.append("%s/%i/iou/%i=%s" % (method, level, index, _float(value)))
            for alpha in self.alphas:
                if (method, alpha) in self.cr:
                    lines.append("%s/cr/%s=%s" % (method, _float(alpha), _float(self.cr[(method, alpha)])))
            if method in self.histograms:
                lines.append(
                    "%s/cp_histogram=%s" % (method, ",".join(str(n) for n in self.histograms[method]))
                )
            for (m, level, index), value in sorted(self.wcov.items()):
                if m == method:
                    lines.append("%s/wcov/%i/%i=%s" % (method, level, index, _float(value)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        # type: (str) -> MetricReport
        """Read back the output of `to_text`.

        :raises FormatError: On a malformed line, naming the line number.
        """
        fields = []  # type: List[Tuple[int, str, str]]
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise FormatError("expected key=value, got %r" % raw, offset=lineno)
            fields.append((lineno, key, value))
        header = {key: value for _, key, value in fields if "/" not in key}
        try:
            if int(header["version"]) != VERSION:
                raise FormatError("unsupported report version %s" % header["version"])
            alphas = [float(a) for a in header["alphas"].split(",") if a]
            methods = [m for m in header["methods"].split(",") if m]
        except (KeyError, ValueError) as e:
            raise FormatError("bad report header: %s" % e)
        classes = {}  # type: Dict[int, List[str]]
        ignores = {}  # type: Dict[int, Optional[int]]
        for lineno, key, value in fields:
            parts = key.split("/")
            if parts[0] == "classes":
                classes[int(parts[1])] = value.split(",")
            elif parts[0] == "ignore":
                ignores[int(parts[1])] = None if value == "-" else int(value)
        depth = len(classes)
        report = cls(
            [classes[level] for level in range(1, depth + 1)],
            [ignores.get(level) for level in range(1, depth + 1)],
            alphas,
        )
        report.methods = methods
        iou = {}  # type: Dict[Tuple[str, int], Dict[int, float]]
        for lineno, key, value in fields:
            parts = key.split("/")
            if len(parts) < 2 or parts[0] in ("classes", "ignore"):
                continue
            method = parts[0]
            if method not in methods:
                raise FormatError("unknown method %r" % method, offset=lineno)
            try:
                if parts[1] == "cr":
                    report.cr[(method, float(parts[2]))] = float(value)
                elif parts[1] == "cp_histogram":
                    report.histograms[method] = [int(n) for n in value.split(",")]
                elif parts[1] == "wcov":
                    report.wcov[(method, int(parts[2]), int(parts[3]))] = float(value)
                elif parts[2] == "oa":
                    report.oa[(method, int(parts[1]))] = float(value)
                elif parts[2] == "miou":
                    report.miou[(method, int(parts[1]))] = float(value)
                elif parts[2] == "iou":
                    iou.setdefault((method, int(parts[1])), {})[int(parts[3])] = float(value)
                else:
                    raise ValueError(key)
            except (IndexError, ValueError):
                raise FormatError("unrecognised report line %r" % key, offset=lineno)
        for (method, level), values in iou.items():
            report.iou[(method, level)] = np.array([values[i] for i in sorted(values)])
        return report

    def to_table(self):
        # type: () -> str
        """An aligned table: classes grouped by level down the rows, one column per method, in percent."""
        label_width = max(
            [len(name) for names in self.level_classes for name in names] + [len("CR_") + 6, 8]
        )
        col_width = max([len(m) for m in self.methods] + [6])
        header = "%-6s %-*s" % ("Level", label_width, "Class")
        header += "".join(" %*s" % (col_width, m) for m in self.methods)
        rows = [header, "-" * len(header)]

        def row(level_label, label, values):
            cells = "".join(" %*s" % (col_width, _percent(v)) for v in values)
            return "%-6s %-*s%s" % (level_label, label_width, label, cells)

        for level, names in enumerate(self.level_classes, start=1):
            if not any((m, level) in self.oa for m in self.methods):
                continue
            level_label = "C%i" % level
            for index, name in enumerate(names):
                if index == self.ignore_indices[level - 1]:
                    continue
                values = [self._iou_value(m, level, index) for m in self.methods]
                rows.append(row(level_label, name, values))
                level_label = ""
            rows.append(row("", "mIoU", [self.miou.get((m, level)) for m in self.methods]))
            rows.append(row("", "OA", [self.oa.get((m, level)) for m in self.methods]))
            rows.append("-" * len(header))
        for alpha in self.alphas:
            label = "CR_%s" % ("%g" % alpha)
            rows.append(row("", label, [self.cr.get((m, alpha)) for m in self.methods]))
        wcov_keys = sorted({(level, index) for (_, level, index) in self.wcov})
        if wcov_keys:
            rows.append("-" * len(header))
            for level, index in wcov_keys:
                name = self.level_classes[level - 1][index]
                values = [self.wcov.get((m, level, index)) for m in self.methods]
                rows.append(row("C%i" % level, "WCov " + name, values))
        return "\n".join(rows) + "\n"

    def _iou_value(self, method, level, index):
        # type: (str, int, int) -> Optional[float]
        iou = self.iou.get((method, level))
        if iou is None:
            return None
        return float(iou[index])


def _percent(value):
    # type: (Optional[float]) -> str
    if value is None or math.isnan(value):
        return "-"
    return "%.1f" % (100 * value)
