"""
Module for split tables
-----------------------

A split table assigns each region of a dataset to the training, validation or test group::

    # region=role
    FASS=train
    PGP=val
    FOE=test

"""
import logging
import os
from typing import Dict, Iterator, List, Mapping  # noqa

from ..errors import FormatError, HierCloudError
from ..geom.pointcloud import PointCloud  # noqa

logger = logging.getLogger(__name__)

THIS_DIR = os.path.abspath(os.path.dirname(__file__))
CAMPUS3D_SPLIT = os.path.join(THIS_DIR, "..", "data", "campus3d.split")

ROLES = ("train", "val", "test")
ALIASES = {"validation": "val", "training": "train"}


class SplitTable(object):
    """Region name to role.

    :param roles: Mapping of region name to ``train``, ``val`` or ``test``. Table order is kept.
    """

    def __init__(self, roles):
        # type: (Mapping[str, str]) -> None
        self.roles = {}  # type: Dict[str, str]
        for region, role in roles.items():
            role = ALIASES.get(role, role)
            if role not in ROLES:
                raise HierCloudError("region %s has unknown role %r" % (region, role))
            self.roles[region] = role
        if not self.roles:
            raise HierCloudError("a split table needs at least one region")

    def __repr__(self):
        # type: () -> str
        class_name = type(self).__name__
        return "{}({!r})".format(class_name, self.roles)

    def __len__(self):
        # type: () -> int
        return len(self.roles)

    def __iter__(self):
        # type: () -> Iterator[str]
        return iter(self.roles)

    def __eq__(self, other):
        if not isinstance(other, SplitTable):
            return NotImplemented
        return list(self.roles.items()) == list(other.roles.items())

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def role_of(self, region):
        # type: (str) -> str
        try:
            return self.roles[region]
        except KeyError:
            raise HierCloudError("region %s is not in the split table" % region)

    def regions(self, role):
        # type: (str) -> List[str]
        role = ALIASES.get(role, role)
        if role not in ROLES:
            raise HierCloudError("unknown role %r" % role)
        return [region for region, r in self.roles.items() if r == role]

    def to_text(self):
        # type: () -> str
        return "".join("%s=%s\n" % item for item in self.roles.items())


def parse_split(source, path=None):
    # type: (str, str) -> SplitTable
    """Parse ``region=role`` lines.

    :raises FormatError: On a malformed or repeated line, naming the line number.
    """
    roles = {}  # type: Dict[str, str]
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        region, sep, role = line.partition("=")
        region, role = region.strip(), role.strip()
        if not sep or not region or not role:
            raise FormatError("expected region=role, got %r" % raw, path, lineno)
        if region in roles:
            raise FormatError("region %s appears twice" % region, path, lineno)
        role = ALIASES.get(role, role)
        if role not in ROLES:
            raise FormatError("region %s has unknown role %r" % (region, role), path, lineno)
        roles[region] = role
    if not roles:
        raise FormatError("no regions", path)
    return SplitTable(roles)


def read_split(path):
    # type: (str) -> SplitTable
    with open(path, encoding="utf-8") as f:
        return parse_split(f.read(), path)


def campus3d_split():
    # type: () -> SplitTable
    """The bundled Campus3D split: FASS, YIH, RA and UCC train, PGP validates, FOE tests."""
    return read_split(CAMPUS3D_SPLIT)


def apply_split(clouds, table):
    # type: (Mapping[str, PointCloud], SplitTable) -> Dict[str, Dict[str, PointCloud]]
    """Group region clouds by role.

    :param clouds: Region name to cloud.
    :param table: The split table. Every region it names must be in ``clouds``.
    :returns: ``{"train": {...}, "val": {...}, "test": {...}}``, each mapping region name to its cloud in table
        order. Regions missing from the table are left out.
    :raises HierCloudError: If a region of the table has no cloud.
    """
    for region in table:
        if region not in clouds:
            raise HierCloudError("region %s of the split table has no point cloud" % region)
    for region in clouds:
        if region not in table.roles:
            logger.warning("region %s is not in the split table and is left out", region)
    groups = {role: {} for role in ROLES}  # type: Dict[str, Dict[str, PointCloud]]
    for region, role in table.roles.items():
        groups[role][region] = clouds[region]
    return groups
