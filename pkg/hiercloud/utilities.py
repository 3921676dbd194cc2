"""Utilities for use in hiercloud."""
import logging
import os
from typing import Any, Optional  # noqa

import numpy as np

logger = logging.getLogger(__name__)

THREADS_ENV = "HIERCLOUD_THREADS"


def almostequal(first, second, places=7):
    # type: (Any, Any, int) -> bool
    """Tests a range of types for near equality."""
    try:
        # try converting to float first
        first = float(first)
        second = float(second)
        # test floats for near-equality
        return round(abs(second - first), places) == 0
    except ValueError:
        # handle non-float types
        return str(first) == str(second)
    except TypeError:
        # handle iterables
        first = list(first)
        second = list(second)
        if len(first) != len(second):
            return False
        return all(almostequal(a, b, places) for a, b in zip(first, second))


def default_threads(value=None):
    # type: (Optional[str]) -> int
    """The worker count to use when none is given explicitly.

    :param value: A raw value to parse. Defaults to the ``HIERCLOUD_THREADS`` environment variable, or 1.
    :returns: A positive thread count.
    """
    if value is None:
        value = os.environ.get(THREADS_ENV)
    if value is None or value == "":
        return 1
    try:
        threads = int(value)
    except ValueError:
        raise ValueError("%s must be a positive integer, got %r" % (THREADS_ENV, value))
    if threads < 1:
        raise ValueError("%s must be a positive integer, got %r" % (THREADS_ENV, value))
    return threads


def derive_rng(seed, *keys):
    # type: (int, *int) -> np.random.Generator
    """A random generator for one independent stream of a seeded computation.

    Streams are keyed on (seed, keys...) so draws made in parallel do not depend on scheduling.

    :param seed: The user-facing 64-bit seed.
    :param keys: Stream identifiers, e.g. a draw counter or a chunk number.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(k) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def chunk_ranges(n, chunk_size):
    """Split ``range(n)`` into consecutive ``(start, stop)`` pairs of at most ``chunk_size``."""
    return [(start, min(start + chunk_size, n)) for start in range(0, n, chunk_size)]
