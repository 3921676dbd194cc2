"""Exceptions raised by hiercloud.

All of them derive from ``ValueError`` so that callers which already guard against bad values keep working.
"""
from typing import Optional  # noqa


class HierCloudError(ValueError):
    """Base class for all hiercloud errors."""


class HierarchyError(HierCloudError):
    """A hierarchy config could not be parsed or does not describe a valid tree."""

    def __init__(self, message, line=None, class_name=None):
        # type: (str, Optional[int], Optional[str]) -> None
        if line is not None:
            message = "line %i: %s" % (line, message)
        super(HierarchyError, self).__init__(message)
        self.line = line
        self.class_name = class_name


class LevelError(HierCloudError):
    """A granularity level is outside the range of a hierarchy."""


class ShapeError(HierCloudError):
    """Arrays do not match each other or the hierarchy they are used with."""


class EmptyInputError(HierCloudError):
    """An operation needs at least one (non-ignored) item but got none."""


class FormatError(HierCloudError):
    """A file is malformed.

    :param path: The file being read.
    :param offset: Byte offset for binary files, line number for text files.
    :param expected: Expected length in bytes, where the error is a truncation.
    :param actual: Actual length in bytes, where the error is a truncation.
    """

    def __init__(self, message, path=None, offset=None, expected=None, actual=None):
        # type: (str, Optional[str], Optional[int], Optional[int], Optional[int]) -> None
        where = []
        if path is not None:
            where.append(str(path))
        if offset is not None:
            where.append("at %i" % offset)
        if where:
            message = "%s: %s" % (" ".join(where), message)
        super(FormatError, self).__init__(message)
        self.path = path
        self.offset = offset
        self.expected = expected
        self.actual = actual
