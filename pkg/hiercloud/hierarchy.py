"""
Class hierarchies as levelled label trees
-----------------------------------------

A `LabelHierarchy` holds H granularity levels. Level 1 is the coarsest. Each class at level h+1 has exactly one parent
at level h, so every leaf (a class at level H) induces exactly one root-to-leaf path. These paths are the fully
consistent (FC) hierarchical labels.

Coarse classes which do not split any further are repeated at the next level with the same name, e.g. `construction`
at levels 1 to 3. These duplicates are ordinary classes.

Hierarchies are read from a small line-based config format::

    # comments start with a hash
    levels 2
    level 1: ground,construction
    level 2: natural,man_made,construction
    ignore: unclassified
    edge 2:natural -> 1:ground
    edge 2:man_made -> 1:ground
    edge 2:construction -> 1:construction

Class order within a level is the file order. All tie-breaking in hiercloud refers to this order. A comment starting
``# provisional:`` marks a tree whose edges are partly inferred.

"""
import logging
import os
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union  # noqa

import numpy as np

from .errors import HierarchyError, LevelError, ShapeError

logger = logging.getLogger(__name__)

THIS_DIR = os.path.abspath(os.path.dirname(__file__))
CAMPUS3D_HIER = os.path.join(THIS_DIR, "data", "campus3d.hier")

HierLabel = Tuple[int, ...]


class ClassRef(object):
    """A class at one level of a hierarchy.

    :param level: Granularity level, 1 to H.
    :param index: Position of the class in the level's class list.
    """

    def __init__(self, level, index):
        # type: (int, int) -> None
        self.level = int(level)
        self.index = int(index)

    def __repr__(self):
        # type: () -> str
        class_name = type(self).__name__
        return "{}({!r}, {!r})".format(class_name, self.level, self.index)

    def __eq__(self, other):
        if not isinstance(other, ClassRef):
            return NotImplemented
        return (self.level, self.index) == (other.level, other.index)

    def __hash__(self):
        return hash((self.level, self.index))


class LabelHierarchy(object):
    """A class tree over H granularity levels.

    Instances are immutable after construction.

    :param level_classes: One list of class names per level, coarsest first.
    :param parent_of: Maps ``(level, child_name)`` to the name of its parent at ``level - 1`` for levels 2 to H.
    :param ignore_class: Name of the class excluded from metrics. It may be absent from some levels.
    :param provisional: Marks hierarchies whose edges are partly inferred.
    """

    def __init__(
        self,
        level_classes,  # type: Sequence[Sequence[str]]
        parent_of,  # type: Dict[Tuple[int, str], str]
        ignore_class=None,  # type: Optional[str]
        provisional=False,  # type: bool
    ):
        # type: (...) -> None
        if not level_classes:
            raise HierarchyError("a hierarchy needs at least one level")
        self._classes = [tuple(names) for names in level_classes]
        self.ignore_class = ignore_class
        self.provisional = provisional
        self._lookup = []  # type: List[Dict[str, int]]
        for level, names in enumerate(self._classes, start=1):
            if not names:
                raise HierarchyError("level %i has no classes" % level)
            lookup = {}  # type: Dict[str, int]
            for i, name in enumerate(names):
                if name in lookup:
                    raise HierarchyError(
                        'duplicate class "%s" at level %i' % (name, level),
                        class_name=name,
                    )
                lookup[name] = i
            self._lookup.append(lookup)
        self._parents = [np.zeros(0, dtype=np.int64)]
        for level in range(2, self.depth + 1):
            self._parents.append(self._build_parents(level, parent_of))
        for (level, child) in parent_of:
            if not 2 <= level <= self.depth or child not in self._lookup[level - 1]:
                raise HierarchyError(
                    'edge from unknown class "%s" at level %i' % (child, level),
                    class_name=child,
                )
        self._check_no_dead_ends()
        self._check_ignore()
        self._paths = self._build_paths()
        for array in self._parents + [self._paths]:
            array.setflags(write=False)

    def _build_parents(self, level, parent_of):
        # type: (int, Dict[Tuple[int, str], str]) -> np.ndarray
        parents = np.empty(len(self._classes[level - 1]), dtype=np.int64)
        above = self._lookup[level - 2]
        for i, name in enumerate(self._classes[level - 1]):
            try:
                parent = parent_of[(level, name)]
            except KeyError:
                raise HierarchyError(
                    'class "%s" at level %i has no parent' % (name, level),
                    class_name=name,
                )
            if parent not in above:
                raise HierarchyError(
                    'parent "%s" of class "%s" is not a class at level %i'
                    % (parent, name, level - 1),
                    class_name=name,
                )
            parents[i] = above[parent]
        return parents

    def _check_no_dead_ends(self):
        # type: () -> None
        for level in range(1, self.depth):
            has_child = np.zeros(len(self._classes[level - 1]), dtype=bool)
            has_child[self._parents[level]] = True
            if not has_child.all():
                name = self._classes[level - 1][int(np.argmin(has_child))]
                raise HierarchyError(
                    'class "%s" at level %i has no children' % (name, level),
                    class_name=name,
                )

    def _check_ignore(self):
        # type: () -> None
        if self.ignore_class is None:
            return
        for level in range(2, self.depth + 1):
            for i, name in enumerate(self._classes[level - 1]):
                parent = self._classes[level - 2][self._parents[level - 1][i]]
                if (name == self.ignore_class) != (parent == self.ignore_class):
                    raise HierarchyError(
                        'ignore class "%s" must be replicated down the tree, but "%s" at level %i has parent "%s"'
                        % (self.ignore_class, name, level, parent),
                        class_name=name,
                    )

    def _build_paths(self):
        # type: () -> np.ndarray
        n_leaves = len(self._classes[-1])
        paths = np.empty((n_leaves, self.depth), dtype=np.int64)
        paths[:, -1] = np.arange(n_leaves)
        for level in range(self.depth, 1, -1):
            paths[:, level - 2] = self._parents[level - 1][paths[:, level - 1]]
        return paths

    def __repr__(self):
        # type: () -> str
        class_name = type(self).__name__
        return "{}(depth={}, widths={})".format(class_name, self.depth, self.widths)

    def __eq__(self, other):
        if not isinstance(other, LabelHierarchy):
            return NotImplemented
        return (
            self._classes == other._classes
            and self.ignore_class == other.ignore_class
            and all(np.array_equal(a, b) for a, b in zip(self._parents, other._parents))
        )

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    @property
    def depth(self):
        # type: () -> int
        """The number of granularity levels, H."""
        return len(self._classes)

    @property
    def widths(self):
        # type: () -> List[int]
        """The number of classes at each level."""
        return [len(names) for names in self._classes]

    @property
    def level_classes(self):
        # type: () -> List[Tuple[str, ...]]
        return list(self._classes)

    def classes(self, level):
        # type: (int) -> Tuple[str, ...]
        """The class names at a level, in file order."""
        self._check_level(level)
        return self._classes[level - 1]

    def class_index(self, level, name):
        # type: (int, str) -> int
        self._check_level(level)
        try:
            return self._lookup[level - 1][name]
        except KeyError:
            raise HierarchyError(
                'no class "%s" at level %i' % (name, level), class_name=name
            )

    def ref(self, level, name):
        # type: (int, str) -> ClassRef
        """A `ClassRef` looked up by name."""
        return ClassRef(level, self.class_index(level, name))

    def name(self, ref):
        # type: (ClassRef) -> str
        self._check_ref(ref)
        return self._classes[ref.level - 1][ref.index]

    def names(self, y):
        # type: (Sequence[int]) -> Tuple[str, ...]
        """The class names of a hierarchical label."""
        return tuple(self._classes[h][int(c)] for h, c in enumerate(y))

    def parent_index(self, level):
        # type: (int) -> np.ndarray
        """For each class at ``level`` (2 to H), the index of its parent at ``level - 1``."""
        self._check_level(level)
        if level == 1:
            raise LevelError("level 1 classes have no parents")
        return self._parents[level - 1]

    def children_of(self, ref):
        # type: (ClassRef) -> List[ClassRef]
        self._check_ref(ref)
        if ref.level == self.depth:
            return []
        below = np.flatnonzero(self._parents[ref.level] == ref.index)
        return [ClassRef(ref.level + 1, i) for i in below]

    def ignore_index(self, level):
        # type: (int) -> Optional[int]
        """The index of the ignore class at a level, or None if that level has none."""
        self._check_level(level)
        if self.ignore_class is None:
            return None
        return self._lookup[level - 1].get(self.ignore_class)

    @property
    def paths(self):
        # type: () -> np.ndarray
        """All FC paths as a read-only ``(|C^H|, H)`` array, one row per leaf in leaf order."""
        return self._paths

    def fc_paths(self):
        # type: () -> List[HierLabel]
        return fc_paths(self)

    def project(self, ref, target_level):
        # type: (ClassRef, int) -> ClassRef
        return project(self, ref, target_level)

    def is_fully_consistent(self, y):
        # type: (Sequence[int]) -> bool
        return is_fully_consistent(self, y)

    def lift_leaf_labels(self, leaf_labels):
        # type: (Sequence[int]) -> np.ndarray
        return lift_leaf_labels(self, leaf_labels)

    def to_text(self):
        # type: () -> str
        return dump_hierarchy(self)

    def _check_level(self, level):
        # type: (int) -> None
        if not 1 <= level <= self.depth:
            raise LevelError(
                "level %s is outside the hierarchy levels 1 to %i" % (level, self.depth)
            )

    def _check_ref(self, ref):
        # type: (ClassRef) -> None
        self._check_level(ref.level)
        if not 0 <= ref.index < len(self._classes[ref.level - 1]):
            raise LevelError(
                "class index %i is outside level %i (%i classes)"
                % (ref.index, ref.level, len(self._classes[ref.level - 1]))
            )


def parse_hierarchy(source):
    # type: (str) -> LabelHierarchy
    """Parse the text of a hierarchy config.

    :param source: Config text (not a path, see `read_hierarchy`).
    :returns: A validated `LabelHierarchy`.
    :raises HierarchyError: On a malformed line, naming the line, or on an invalid tree, naming the class.
    """
    depth = None
    levels = {}  # type: Dict[int, List[str]]
    parent_of = {}  # type: Dict[Tuple[int, str], str]
    ignore_class = None
    provisional = False
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            if line[1:].strip().lower().startswith("provisional:"):
                provisional = True
            continue
        if not line:
            continue
        keyword = line.split(None, 1)[0].rstrip(":")
        if keyword == "levels":
            if depth is not None:
                raise HierarchyError("repeated levels header", line=lineno)
            try:
                depth = int(line.split(None, 1)[1])
            except (IndexError, ValueError):
                raise HierarchyError("expected 'levels H', got %r" % raw, line=lineno)
            if depth < 1:
                raise HierarchyError("levels must be at least 1", line=lineno)
        elif depth is None:
            raise HierarchyError("expected 'levels H' before %r" % raw, line=lineno)
        elif keyword == "level":
            level, names = _parse_level_line(line, lineno)
            if not 1 <= level <= depth:
                raise HierarchyError(
                    "level %i is outside 1 to %i" % (level, depth), line=lineno
                )
            if level in levels:
                raise HierarchyError("level %i declared twice" % level, line=lineno)
            levels[level] = names
        elif keyword == "edge":
            child, parent = _parse_edge_line(line, lineno)
            if child[0] != parent[0] + 1:
                raise HierarchyError(
                    "edge must join level h+1 to level h, got %i -> %i"
                    % (child[0], parent[0]),
                    line=lineno,
                    class_name=child[1],
                )
            if child in parent_of:
                raise HierarchyError(
                    'class "%s" at level %i has more than one parent'
                    % (child[1], child[0]),
                    line=lineno,
                    class_name=child[1],
                )
            parent_of[child] = parent[1]
        elif keyword == "ignore":
            ignore_class = line[len("ignore"):].lstrip(" :").strip()
            if not ignore_class:
                raise HierarchyError("expected 'ignore: name'", line=lineno)
        else:
            raise HierarchyError("unrecognised line %r" % raw, line=lineno)
    if depth is None:
        raise HierarchyError("missing 'levels H' header")
    missing = [h for h in range(1, depth + 1) if h not in levels]
    if missing:
        raise HierarchyError("no classes declared for level %i" % missing[0])
    level_classes = [levels[h] for h in range(1, depth + 1)]
    return LabelHierarchy(level_classes, parent_of, ignore_class, provisional)


def _parse_level_line(line, lineno):
    # type: (str, int) -> Tuple[int, List[str]]
    head, sep, tail = line.partition(":")
    try:
        level = int(head.split()[1])
    except (IndexError, ValueError):
        sep = ""
    if not sep:
        raise HierarchyError("expected 'level h: name1,name2,...'", line=lineno)
    names = [name.strip() for name in tail.split(",")]
    if any(not name for name in names):
        raise HierarchyError("empty class name at level %i" % level, line=lineno)
    return level, names


def _parse_edge_line(line, lineno):
    # type: (str, int) -> Tuple[Tuple[int, str], Tuple[int, str]]
    body = line.split(None, 1)[1] if len(line.split(None, 1)) > 1 else ""
    if "->" not in body:
        raise HierarchyError("expected 'edge h+1:child -> h:parent'", line=lineno)
    child, parent = (_parse_node(part, lineno) for part in body.split("->", 1))
    return child, parent


def _parse_node(text, lineno):
    # type: (str, int) -> Tuple[int, str]
    level, sep, name = text.strip().partition(":")
    try:
        level_number = int(level)
    except ValueError:
        sep = ""
    if not sep or not name.strip():
        raise HierarchyError("expected 'level:name', got %r" % text.strip(), line=lineno)
    return level_number, name.strip()


def dump_hierarchy(hierarchy):
    # type: (LabelHierarchy) -> str
    """Serialise a hierarchy to config text which `parse_hierarchy` reads back to an equal hierarchy."""
    lines = []
    if hierarchy.provisional:
        lines.append("# provisional: some edges are inferred")
    lines.append("levels %i" % hierarchy.depth)
    for level in range(1, hierarchy.depth + 1):
        lines.append("level %i: %s" % (level, ",".join(hierarchy.classes(level))))
    if hierarchy.ignore_class is not None:
        lines.append("ignore: %s" % hierarchy.ignore_class)
    for level in range(2, hierarchy.depth + 1):
        above = hierarchy.classes(level - 1)
        for name, parent in zip(hierarchy.classes(level), hierarchy.parent_index(level)):
            lines.append("edge %i:%s -> %i:%s" % (level, name, level - 1, above[parent]))
    return "\n".join(lines) + "\n"


def read_hierarchy(path):
    # type: (str) -> LabelHierarchy
    """Read and validate a hierarchy config file."""
    with open(path, encoding="utf-8") as f_in:
        hierarchy = parse_hierarchy(f_in.read())
    logger.debug("read %s: H=%i widths=%s", path, hierarchy.depth, hierarchy.widths)
    return hierarchy


def campus3d():
    # type: () -> LabelHierarchy
    """The bundled five-level Campus3D label tree."""
    return read_hierarchy(CAMPUS3D_HIER)


def fc_paths(hierarchy):
    # type: (LabelHierarchy) -> List[HierLabel]
    """All fully consistent labels, one per leaf class, in leaf-index order."""
    return [tuple(int(c) for c in row) for row in hierarchy.paths]


def project(hierarchy, ref, target_level):
    # type: (LabelHierarchy, ClassRef, int) -> ClassRef
    """The ancestor of a class at a coarser (or the same) level.

    :param ref: The class to project.
    :param target_level: A level between 1 and ``ref.level``.
    :raises LevelError: If the target level is out of range.
    """
    hierarchy._check_ref(ref)
    if not 1 <= target_level <= ref.level:
        raise LevelError(
            "cannot project level %i class to level %s" % (ref.level, target_level)
        )
    index = ref.index
    for level in range(ref.level, target_level, -1):
        index = int(hierarchy.parent_index(level)[index])
    return ClassRef(target_level, index)


def is_fully_consistent(hierarchy, y):
    # type: (LabelHierarchy, Sequence[int]) -> bool
    """True if each adjacent pair of levels in a label is an edge of the tree."""
    return bool(consistent_mask(hierarchy, np.asarray(y).reshape(1, -1))[0])


def consistent_mask(hierarchy, ys):
    # type: (LabelHierarchy, np.ndarray) -> np.ndarray
    """Vectorised `is_fully_consistent` over an ``(N, H)`` label array."""
    ys = check_labels(hierarchy, ys)
    mask = np.ones(len(ys), dtype=bool)
    for level in range(2, hierarchy.depth + 1):
        mask &= hierarchy.parent_index(level)[ys[:, level - 1]] == ys[:, level - 2]
    return mask


def lift_leaf_labels(hierarchy, leaf_labels):
    # type: (LabelHierarchy, Sequence[int]) -> np.ndarray
    """Expand per-point leaf classes into full ``(N, H)`` FC labels.

    :raises LevelError: If an index is not a leaf class, naming the point offset.
    """
    leaf_labels = np.asarray(leaf_labels, dtype=np.int64).reshape(-1)
    n_leaves = hierarchy.widths[-1]
    bad = np.flatnonzero((leaf_labels < 0) | (leaf_labels >= n_leaves))
    if len(bad):
        raise LevelError(
            "leaf label %i at point %i is outside level %i (%i classes)"
            % (leaf_labels[bad[0]], bad[0], hierarchy.depth, n_leaves)
        )
    return hierarchy.paths[leaf_labels]


def lift_labels(hierarchy, labels):
    # type: (LabelHierarchy, np.ndarray) -> np.ndarray
    """Accept either per-point leaf indices or full H-tuples and return ``(N, H)`` labels."""
    labels = np.asarray(labels)
    if labels.ndim == 1:
        return lift_leaf_labels(hierarchy, labels)
    return check_labels(hierarchy, labels)


def check_labels(hierarchy, ys):
    # type: (LabelHierarchy, np.ndarray) -> np.ndarray
    """Check an ``(N, H)`` label array against a hierarchy and return it as int64."""
    ys = np.asarray(ys, dtype=np.int64)
    if ys.ndim != 2 or ys.shape[1] != hierarchy.depth:
        raise ShapeError(
            "labels of shape %s do not have %i levels" % (ys.shape, hierarchy.depth)
        )
    for level, width in enumerate(hierarchy.widths, start=1):
        column = ys[:, level - 1]
        bad = np.flatnonzero((column < 0) | (column >= width))
        if len(bad):
            raise LevelError(
                "label %i at point %i is outside level %i (%i classes)"
                % (column[bad[0]], bad[0], level, width)
            )
    return ys


def random_hierarchy(rng, max_depth=6, max_leaves=50, ignore_class=None):
    # type: (np.random.Generator, int, int, Optional[str]) -> LabelHierarchy
    """A random tree for property tests.

    :param rng: Random generator.
    :param max_depth: Largest H to draw.
    :param max_leaves: Upper bound on the number of leaf classes.
    :param ignore_class: If given, a replicated ignore class is added as the first class of every level.
    """
    depth = int(rng.integers(1, max_depth + 1))
    extra = 1 if ignore_class else 0
    budget = max_leaves - extra
    width = int(rng.integers(1, min(4, budget) + 1))
    levels = [["l1c%i" % i for i in range(width)]]
    parent_of = {}
    for level in range(2, depth + 1):
        names = []
        above = levels[-1]
        for j, parent in enumerate(above):
            remaining_parents = len(above) - j - 1
            room = budget - len(names) - remaining_parents
            n_children = int(rng.integers(1, max(1, min(3, room)) + 1))
            for _ in range(n_children):
                name = "l%ic%i" % (level, len(names))
                names.append(name)
                parent_of[(level, name)] = parent
        levels.append(names)
    if ignore_class:
        levels = [[ignore_class] + names for names in levels]
        for level in range(2, depth + 1):
            parent_of[(level, ignore_class)] = ignore_class
    return LabelHierarchy(levels, parent_of, ignore_class)
