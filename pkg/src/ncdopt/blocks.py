"""Contiguous block partitions and the smoothness-weighted norm family.

A partition splits the ``d`` coordinates into ``m`` contiguous blocks and
carries one smoothness constant ``L[i]`` per block.  The norm family

    ||x||_[s]   = sqrt( sum_i L_i^s     * ||x_i||^2 ),   s in [0, 1],
    ||y||_[s],* = sqrt( sum_i L_i^(-s)  * ||y_i||^2 ),

interpolates between the plain Euclidean norm (s = 0) and the fully
curvature-weighted norm (s = 1).  The two are dual to each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, PartitionError, ShapeError


@dataclass
class BlockPartition:
    """Partition of ``d`` coordinates into ``m`` contiguous blocks.

    Block ``i`` covers the half-open range ``offsets[i]:offsets[i+1]``.
    ``L`` holds one positive smoothness constant per block; fresh partitions
    use an all-ones placeholder until a loss oracle estimates the real
    curvature (see :meth:`with_L`).  Arrays are stored read-only: a partition
    never changes after construction.
    """

    d: int
    m: int
    offsets: np.ndarray
    L: np.ndarray
    _coord_L: np.ndarray | None = field(default=None, repr=False, compare=False)
    _block_of: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.offsets = np.ascontiguousarray(self.offsets, dtype=np.int64)
        self.L = np.ascontiguousarray(self.L, dtype=np.float64)
        if self.m < 1 or self.m > self.d:
            raise PartitionError(f"need 1 <= m <= d, got m={self.m}, d={self.d}")
        if self.offsets.shape != (self.m + 1,):
            raise PartitionError("offsets must have exactly m+1 entries")
        if self.offsets[0] != 0 or self.offsets[-1] != self.d:
            raise PartitionError("offsets must run from 0 to d")
        if np.any(np.diff(self.offsets) <= 0):
            raise PartitionError("every block must be nonempty")
        if self.L.shape != (self.m,):
            raise PartitionError("L must hold one constant per block")
        if not np.all(np.isfinite(self.L)) or np.any(self.L <= 0):
            raise PartitionError("block constants must be positive and finite")
        self.offsets.setflags(write=False)
        self.L.setflags(write=False)

    def block(self, i: int) -> slice:
        return slice(int(self.offsets[i]), int(self.offsets[i + 1]))

    def sizes(self) -> np.ndarray:
        return np.diff(self.offsets)

    def coord_L(self) -> np.ndarray:
        """Per-coordinate expansion of ``L`` (cached, read-only)."""
        if self._coord_L is None:
            w = np.repeat(self.L, self.sizes())
            w.setflags(write=False)
            self._coord_L = w
        return self._coord_L

    def block_of(self) -> np.ndarray:
        """Block index of every coordinate (cached, read-only)."""
        if self._block_of is None:
            idx = np.repeat(np.arange(self.m, dtype=np.int64), self.sizes())
            idx.setflags(write=False)
            self._block_of = idx
        return self._block_of

    @property
    def L_max(self) -> float:
        return float(self.L.max())

    @property
    def L_min(self) -> float:
        return float(self.L.min())

    def with_L(self, L) -> "BlockPartition":
        """Same block structure with new smoothness constants."""
        return BlockPartition(self.d, self.m, self.offsets, np.asarray(L, dtype=np.float64))


def uniform_partition(d: int, m: int) -> BlockPartition:
    """Split ``d`` coordinates into ``m`` near-equal contiguous blocks.

    The first ``d % m`` blocks get the extra coordinate.  ``L`` starts as the
    all-ones placeholder.
    """
    if m < 1 or m > d:
        raise PartitionError(f"need 1 <= m <= d, got m={m}, d={d}")
    base, extra = divmod(d, m)
    sizes = np.full(m, base, dtype=np.int64)
    sizes[:extra] += 1
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    return BlockPartition(d, m, offsets, np.ones(m))


def _coord_weights(part: BlockPartition, s: float) -> np.ndarray:
    if s == 0.0:
        return np.ones(part.d)
    w = part.coord_L()
    if s == 1.0:
        return w
    return w ** s


def _check_s(s: float):
    if not (0.0 <= s <= 1.0):
        raise InvalidParameterError(f"norm exponent s must lie in [0, 1], got {s}")


def _check_vec(x, part: BlockPartition) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (part.d,):
        raise ShapeError(f"expected a vector of length {part.d}, got shape {x.shape}")
    return x


def weighted_norm(x, part: BlockPartition, s: float) -> float:
    """``||x||_[s]`` with weights ``L_i^s``."""
    _check_s(s)
    x = _check_vec(x, part)
    w = _coord_weights(part, s)
    return float(np.sqrt(np.dot(w * x, x)))


def dual_weighted_norm(y, part: BlockPartition, s: float) -> float:
    """``||y||_[s],*`` with weights ``L_i^(-s)``, dual to :func:`weighted_norm`."""
    _check_s(s)
    y = _check_vec(y, part)
    if s == 0.0:
        w = np.ones(part.d)
    else:
        w = part.coord_L() ** (-s)
    return float(np.sqrt(np.dot(w * y, y)))


def t_s(part: BlockPartition, s: float) -> float:
    """``T_s = sum_i L_i^s``, the weight mass at exponent ``s``."""
    return float(np.sum(part.L ** s))
