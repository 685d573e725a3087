"""Smooth-loss oracles over a column-sliceable sparse design matrix.

The smooth term has the empirical form f(x) = (1/n) * sum_i psi(a_i' x; b_i)
for one of three row losses:

    least_squares   psi(z; b) = (z - b)^2 / 2
    logistic        psi(z; b) = log(1 + exp(-b z)),  b in {-1, +1}
    huber           psi(z; b) = H_delta(z - b),
                    H_delta(a) = a^2 / (2 delta) if |a| <= delta else |a| - delta/2

All of them depend on the data only through z = A x, so a single n-vector
cache of A x supports O(nnz_block) block gradients and block updates.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .blocks import BlockPartition
from .errors import (
    CacheInvalidError,
    InvalidParameterError,
    NumericOverflowError,
    ShapeError,
)

LIPSCHITZ_FLOOR = 1e-12
_POWER_ITERS = 20
_POWER_SAFETY = 1.01
_POWER_RTOL = 1e-6


@dataclass(frozen=True)
class LossSpec:
    """Tag for the row loss; ``delta`` is the huber transition width."""

    kind: str
    delta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("least_squares", "logistic", "huber"):
            raise InvalidParameterError(f"unknown loss kind {self.kind!r}")
        if self.kind == "huber" and self.delta <= 0:
            raise InvalidParameterError("huber needs delta > 0")

    @property
    def curvature_factor(self) -> float:
        """Max second derivative of the row loss in z."""
        if self.kind == "least_squares":
            return 1.0
        if self.kind == "logistic":
            return 0.25
        return 1.0 / self.delta


def least_squares() -> LossSpec:
    return LossSpec("least_squares")


def logistic() -> LossSpec:
    return LossSpec("logistic")


def huber(delta: float) -> LossSpec:
    return LossSpec("huber", delta=delta)


class DataMatrix:
    """Validated n-by-d design matrix stored column-compressed.

    Columns are (row-index, value) lists with strictly increasing indices and
    finite values; that is exactly canonical CSC form, so the storage is a
    ``scipy.sparse.csc_matrix``.  The matrix is immutable once built.
    """

    def __init__(self, matrix):
        if sp.issparse(matrix):
            csc = matrix.tocsc(copy=True)
        else:
            arr = np.asarray(matrix, dtype=np.float64)
            if arr.ndim != 2:
                raise ShapeError("design matrix must be 2-dimensional")
            csc = sp.csc_matrix(arr)
        csc.sum_duplicates()
        csc.sort_indices()
        csc = csc.astype(np.float64)
        if not np.all(np.isfinite(csc.data)):
            raise InvalidParameterError("design matrix entries must be finite")
        self.csc = csc
        self.n, self.d = csc.shape
        if self.n < 1 or self.d < 1:
            raise ShapeError("design matrix must have at least one row and column")

    @property
    def nnz(self) -> int:
        return self.csc.nnz

    def col(self, j: int):
        """Row indices and values of column ``j``."""
        a, b = self.csc.indptr[j], self.csc.indptr[j + 1]
        return self.csc.indices[a:b], self.csc.data[a:b]

    def matvec(self, x) -> np.ndarray:
        return self.csc @ np.asarray(x, dtype=np.float64)

    def toarray(self) -> np.ndarray:
        return self.csc.toarray()


class _BlockView:
    """Per-block column slices of the design matrix, precomputed once."""

    def __init__(self, A: DataMatrix, part: BlockPartition):
        self.fwd = []   # block columns, for A_blk @ delta
        self.bwd = []   # their transposes in row-compressed form, for A_blk' @ r
        self.nnz = np.zeros(part.m, dtype=np.int64)
        for i in range(part.m):
            blk = A.csc[:, part.block(i)]
            self.fwd.append(blk)
            self.bwd.append(blk.T.tocsr())
            self.nnz[i] = blk.nnz


@dataclass
class IterateState:
    """Mutable per-run pair (x, A x) owned by a single solver loop."""

    x: np.ndarray
    Ax: np.ndarray


class SmoothOracle:
    """Value / gradient / block-gradient access to the smooth loss.

    Holds the loss tag, the design matrix, the targets, and a block
    partition (only the offsets matter here; the constants live wherever the
    caller keeps them).  The oracle itself is immutable; per-run iterate
    state lives in :class:`IterateState` objects so concurrent runs can
    share one oracle.
    """

    def __init__(self, loss: LossSpec, A: DataMatrix, b, part: BlockPartition):
        b = np.asarray(b, dtype=np.float64)
        if b.shape != (A.n,):
            raise ShapeError(f"targets must have length n={A.n}, got {b.shape}")
        if not np.all(np.isfinite(b)):
            raise InvalidParameterError("targets must be finite")
        if part.d != A.d:
            raise ShapeError(f"partition covers {part.d} coordinates, matrix has {A.d}")
        if loss.kind == "logistic" and not np.all(np.isin(b, (-1.0, 1.0))):
            raise InvalidParameterError("logistic targets must be -1/+1")
        self.loss = loss
        self.A = A
        self.b = b
        self.part = part
        self.blocks = _BlockView(A, part)

    # -- row loss helpers -------------------------------------------
    def _row_values(self, z: np.ndarray) -> np.ndarray:
        b = self.b
        if self.loss.kind == "least_squares":
            r = z - b
            return 0.5 * r * r
        if self.loss.kind == "logistic":
            return np.logaddexp(0.0, -b * z)
        r = z - b
        a = np.abs(r)
        delta = self.loss.delta
        return np.where(a <= delta, r * r / (2.0 * delta), a - 0.5 * delta)

    def _row_grads(self, z: np.ndarray) -> np.ndarray:
        """d psi / d z at z, one value per row."""
        b = self.b
        if self.loss.kind == "least_squares":
            return z - b
        if self.loss.kind == "logistic":
            return -b * expit(-b * z)
        return np.clip((z - b) / self.loss.delta, -1.0, 1.0)

    # -- values and gradients ---------------------------------------
    def bind(self, x) -> IterateState:
        """Fresh iterate state with the cache computed from scratch."""
        x = np.array(x, dtype=np.float64, copy=True)
        if x.shape != (self.A.d,):
            raise ShapeError(f"iterate must have length d={self.A.d}")
        return IterateState(x=x, Ax=self.A.matvec(x))

    def value_from_product(self, Ax: np.ndarray) -> float:
        v = float(np.mean(self._row_values(Ax)))
        if not np.isfinite(v):
            raise NumericOverflowError("loss value is not finite")
        return v

    def value(self, state: IterateState) -> float:
        return self.value_from_product(state.Ax)

    def value_at(self, x) -> float:
        return self.value_from_product(self.A.matvec(np.asarray(x, dtype=np.float64)))

    def grad_weights(self, Ax: np.ndarray) -> np.ndarray:
        """Row weights w with grad f = A' w; w = psi'(Ax) / n."""
        return self._row_grads(Ax) / self.A.n

    def block_gradient_from(self, i: int, weights: np.ndarray) -> np.ndarray:
        return self.blocks.bwd[i] @ weights

    def block_gradient(self, state: IterateState, i: int) -> np.ndarray:
        return self.block_gradient_from(i, self.grad_weights(state.Ax))

    def full_gradient_from_product(self, Ax: np.ndarray) -> np.ndarray:
        # concatenation of block gradients, so block slices match bitwise
        w = self.grad_weights(Ax)
        return np.concatenate([self.blocks.bwd[i] @ w for i in range(self.part.m)])

    def full_gradient(self, state: IterateState) -> np.ndarray:
        return self.full_gradient_from_product(state.Ax)

    def full_gradient_at(self, x) -> np.ndarray:
        return self.full_gradient_from_product(self.A.matvec(np.asarray(x, dtype=np.float64)))

    def apply_block_step(self, state: IterateState, i: int, delta) -> None:
        """x_i += delta with the product cache updated in O(nnz_block)."""
        delta = np.asarray(delta, dtype=np.float64)
        blk = self.part.block(i)
        if delta.shape != (blk.stop - blk.start,):
            raise ShapeError("step length does not match the block size")
        state.x[blk] += delta
        state.Ax += self.blocks.fwd[i] @ delta

    def refresh(self, state: IterateState) -> None:
        state.Ax = self.A.matvec(state.x)

    def verify_cache(self, state: IterateState, rtol: float = 1e-10) -> None:
        exact = self.A.matvec(state.x)
        scale = max(1.0, float(np.abs(exact).max()))
        if float(np.abs(state.Ax - exact).max()) > rtol * scale:
            raise CacheInvalidError("product cache drifted beyond tolerance")

    # -- curvature estimation ---------------------------------------
    def _block_gram_top_eigenvalue(self, i: int) -> float:
        """Upper bound on lambda_max(A_blk' A_blk)."""
        fwd, bwd = self.blocks.fwd[i], self.blocks.bwd[i]
        if fwd.nnz == 0:
            return 0.0
        di = fwd.shape[1]
        if di == 1:
            v = fwd.data
            return float(np.dot(v, v))  # exact for a single column
        # power iteration with a deterministic, slightly tilted start
        v = 1.0 + 0.01 * np.arange(di) / di
        v /= np.linalg.norm(v)
        lam_prev = 0.0
        lam = 0.0
        for _ in range(_POWER_ITERS):
            w = bwd @ (fwd @ v)
            nw = float(np.linalg.norm(w))
            if nw == 0.0:
                return 0.0
            lam_prev, lam = lam, float(np.dot(v, w))
            v = w / nw
        if lam <= 0 or abs(lam - lam_prev) > _POWER_RTOL * lam:
            # not converged: squared Frobenius norm is always a valid upper bound
            return float(np.dot(fwd.data, fwd.data))
        return lam * _POWER_SAFETY

    def block_lipschitz(self) -> np.ndarray:
        """Per-block upper bounds on the gradient's block Lipschitz constants.

        Blocks whose columns are entirely zero get the floor value
        ``LIPSCHITZ_FLOOR`` and a warning.
        """
        fac = self.loss.curvature_factor / self.A.n
        L = np.empty(self.part.m)
        floored = []
        for i in range(self.part.m):
            li = fac * self._block_gram_top_eigenvalue(i)
            if li <= 0.0:
                li = LIPSCHITZ_FLOOR
                floored.append(i)
            L[i] = li
        if floored:
            warnings.warn(
                f"{len(floored)} block(s) have all-zero columns; their smoothness "
                f"constants were floored at {LIPSCHITZ_FLOOR:g}",
                RuntimeWarning,
                stacklevel=2,
            )
        return L

    def global_lipschitz(self) -> float:
        """Upper bound on the full gradient's Lipschitz constant."""
        A = self.A.csc
        fac = self.loss.curvature_factor / self.A.n
        v = 1.0 + 0.01 * np.arange(self.A.d) / self.A.d
        v /= np.linalg.norm(v)
        lam_prev = 0.0
        lam = 0.0
        for _ in range(30):
            w = A.T @ (A @ v)
            nw = float(np.linalg.norm(w))
            if nw == 0.0:
                return LIPSCHITZ_FLOOR
            lam_prev, lam = lam, float(np.dot(v, w))
            v = w / nw
        if lam <= 0 or abs(lam - lam_prev) > _POWER_RTOL * lam:
            return fac * float(np.dot(A.data, A.data))
        return fac * lam * _POWER_SAFETY
