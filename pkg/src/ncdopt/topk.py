"""Incremental maintenance of the k largest-magnitude coordinates.

Coordinates are ordered by the key (|x_j|, -j): larger magnitude first, and
among equal magnitudes the lower index wins.  The tracker keeps the top-k
set of that total order exact under single-coordinate updates, amortized
O(log d) each, using a pair of lazily pruned heaps.
"""

from __future__ import annotations

import heapq

import numpy as np

from .errors import InvalidParameterError, TrackerDesyncError


def topk_indices(x, k: int) -> np.ndarray:
    """Indices of the k largest |x_j|, ties toward lower index, sorted."""
    x = np.asarray(x, dtype=np.float64)
    if not 1 <= k <= x.size:
        raise InvalidParameterError(f"need 1 <= k <= d, got k={k}, d={x.size}")
    # lexsort uses the last key as primary: magnitude descending, index ascending
    order = np.lexsort((np.arange(x.size), -np.abs(x)))
    return np.sort(order[:k])


class TopKTracker:
    """Tracks the top-k coordinate set of a vector under point updates.

    ``in_top`` is a boolean membership array and ``signs`` the +-1 sign
    pattern with sign(0) = +1; both stay exactly consistent with a
    from-scratch selection (same tie rule) after every :meth:`update`.
    ``top_abs_sum`` is the running sum of top-set magnitudes; it is
    maintained incrementally and may accumulate float drift over very long
    runs, so exact consumers should recompute from the membership mask.
    """

    def __init__(self, x, k: int):
        x = np.asarray(x, dtype=np.float64)
        self.d = x.size
        self.k = int(k)
        if not 1 <= self.k <= self.d:
            raise InvalidParameterError(f"need 1 <= k <= d, got k={k}, d={self.d}")
        self.absval = np.abs(x)
        self.signs = np.where(x >= 0, 1.0, -1.0)
        self.in_top = np.zeros(self.d, dtype=bool)
        self.in_top[topk_indices(x, self.k)] = True
        self.top_abs_sum = float(self.absval[self.in_top].sum())
        self._version = np.zeros(self.d, dtype=np.int64)
        # min-heap over the top set keyed (|x|, -j): the root is the weakest member
        self._top_heap = [(self.absval[j], -j, 0, j) for j in np.flatnonzero(self.in_top)]
        heapq.heapify(self._top_heap)
        # min-heap over the rest keyed (-|x|, j): the root is the strongest outsider
        self._rest_heap = [(-self.absval[j], j, 0, j) for j in np.flatnonzero(~self.in_top)]
        heapq.heapify(self._rest_heap)

    def _push(self, j: int):
        if self.in_top[j]:
            heapq.heappush(self._top_heap, (self.absval[j], -j, self._version[j], j))
        else:
            heapq.heappush(self._rest_heap, (-self.absval[j], j, self._version[j], j))

    def _peek_top_weakest(self):
        h = self._top_heap
        while h:
            a, nj, ver, j = h[0]
            if ver == self._version[j] and self.in_top[j]:
                return j
            heapq.heappop(h)
        return None

    def _peek_rest_strongest(self):
        h = self._rest_heap
        while h:
            na, jj, ver, j = h[0]
            if ver == self._version[j] and not self.in_top[j]:
                return j
            heapq.heappop(h)
        return None

    def update(self, j: int, new_value: float):
        """Set coordinate ``j`` to ``new_value`` and restore the invariant."""
        j = int(j)
        old_abs = self.absval[j]
        self.absval[j] = abs(new_value)
        self.signs[j] = 1.0 if new_value >= 0 else -1.0
        self._version[j] += 1
        if self.in_top[j]:
            self.top_abs_sum += self.absval[j] - old_abs
        self._push(j)
        # a single-point change can unseat at most one member, but loop for safety
        while self.k < self.d:
            w = self._peek_top_weakest()
            s = self._peek_rest_strongest()
            if w is None or s is None:
                break
            if (self.absval[s], -s) <= (self.absval[w], -w):
                break
            self.in_top[w] = False
            self.in_top[s] = True
            self.top_abs_sum += self.absval[s] - self.absval[w]
            self._version[w] += 1
            self._version[s] += 1
            self._push(w)
            self._push(s)

    def top_set(self) -> np.ndarray:
        return np.flatnonzero(self.in_top)

    def resync_sum(self) -> float:
        """Recompute ``top_abs_sum`` exactly, shedding incremental drift."""
        self.top_abs_sum = float(self.absval[self.in_top].sum())
        return self.top_abs_sum

    def verify(self, x):
        """Raise if membership disagrees with a from-scratch selection on ``x``."""
        x = np.asarray(x, dtype=np.float64)
        if x.size != self.d:
            raise TrackerDesyncError("vector length changed under the tracker")
        if not np.allclose(np.abs(x), self.absval, rtol=0, atol=0):
            raise TrackerDesyncError("tracked magnitudes disagree with the vector")
        expect = topk_indices(x, self.k)
        got = self.top_set()
        if not np.array_equal(expect, got):
            raise TrackerDesyncError("top-k membership diverged from re-selection")
