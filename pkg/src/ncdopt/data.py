"""Synthetic instance generation and sparse labeled-text ingestion.

The text format is the common one distributed by sparse-dataset
repositories: one sample per line, ``label idx:val idx:val ...`` with
1-based strictly increasing feature indices, UTF-8, LF or CRLF endings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import (
    DatasetFormatError,
    EmptyDatasetError,
    InvalidParameterError,
)
from .oracles import DataMatrix


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for an equicorrelated Gaussian regression instance.

    Rows are a_i = sqrt(1 - rho) z_i + sqrt(rho) w_i 1 with z_i, w_i
    standard normal, so the population covariance has unit diagonal and
    off-diagonal ``rho_corr`` exactly.  The planted solution is binary with
    ``s_true`` ones at uniformly sampled positions, and
    b = A x_true + noise_sigma * standard normal.
    """

    n: int
    d: int
    s_true: int
    rho_corr: float = 0.7
    noise_sigma: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise InvalidParameterError("need n >= 1 and d >= 1")
        if not 1 <= self.s_true <= self.d:
            raise InvalidParameterError("need 1 <= s_true <= d")
        if not 0.0 <= self.rho_corr < 1.0:
            raise InvalidParameterError(
                "the common-factor construction covers rho_corr in [0, 1)"
            )
        if self.noise_sigma < 0:
            raise InvalidParameterError("noise_sigma must be nonnegative")


def gen_synthetic(spec: SyntheticSpec):
    """Draw one instance; returns ``(DataMatrix, b, x_true)``.

    The draw order (design, common factor, support, noise) is fixed, so
    equal seeds give bit-identical outputs.
    """
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    Z = rng.standard_normal((spec.n, spec.d))
    w = rng.standard_normal((spec.n, 1))
    dense = np.sqrt(1.0 - spec.rho_corr) * Z + np.sqrt(spec.rho_corr) * w
    x_true = np.zeros(spec.d)
    support = rng.choice(spec.d, size=spec.s_true, replace=False)
    x_true[support] = 1.0
    b = dense @ x_true
    if spec.noise_sigma > 0:
        b = b + spec.noise_sigma * rng.standard_normal(spec.n)
    return DataMatrix(dense), b, x_true


def read_sparse_dataset(path):
    """Parse a labeled sparse text file; returns ``(DataMatrix, labels)``.

    The dimension is the largest feature index seen.  Malformed tokens,
    0-based indices and non-increasing indices raise DatasetFormatError with
    the offending line number; a file with no samples raises
    EmptyDatasetError.  Labels are returned raw.
    """
    labels = []
    rows, cols, vals = [], [], []
    d = 0
    n = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            tokens = line.split()
            try:
                label = float(tokens[0])
            except ValueError:
                raise DatasetFormatError(
                    f"bad label {tokens[0]!r}", line=lineno
                ) from None
            prev = 0
            for tok in tokens[1:]:
                idx_s, sep, val_s = tok.partition(":")
                if not sep:
                    raise DatasetFormatError(
                        f"expected idx:val, got {tok!r}", line=lineno
                    )
                try:
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise DatasetFormatError(
                        f"bad feature token {tok!r}", line=lineno
                    ) from None
                if idx < 1:
                    raise DatasetFormatError(
                        f"feature indices are 1-based, got {idx}", line=lineno
                    )
                if idx <= prev:
                    raise DatasetFormatError(
                        f"indices must be strictly increasing, got {idx} after {prev}",
                        line=lineno,
                    )
                if not np.isfinite(val):
                    raise DatasetFormatError(
                        f"non-finite value in {tok!r}", line=lineno
                    )
                rows.append(n)
                cols.append(idx - 1)
                vals.append(val)
                prev = idx
            labels.append(label)
            n += 1
            d = max(d, prev)
    if n == 0:
        raise EmptyDatasetError(f"no samples in {path}")
    if d == 0:
        raise DatasetFormatError("no features anywhere in the file", line=n)
    coo = sp.coo_matrix(
        (np.array(vals), (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64))),
        shape=(n, d),
    )
    return DataMatrix(coo.tocsc()), np.array(labels)


def write_sparse_dataset(path, A, labels) -> None:
    """Write the matrix and labels in the text format read_sparse_dataset parses.

    Values are written with ``repr`` so a round trip reproduces every
    (row, col, val) exactly.
    """
    csr = A.csc.tocsr() if isinstance(A, DataMatrix) else sp.csr_matrix(A)
    labels = np.asarray(labels, dtype=np.float64)
    if labels.shape != (csr.shape[0],):
        raise InvalidParameterError("one label per row required")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i in range(csr.shape[0]):
            a, b = csr.indptr[i], csr.indptr[i + 1]
            parts = [repr(float(labels[i]))]
            parts += [
                f"{j + 1}:{float(v)!r}"
                for j, v in zip(csr.indices[a:b], csr.data[a:b])
            ]
            fh.write(" ".join(parts) + "\n")


def binarize_labels(labels, positive_set) -> np.ndarray:
    """Map labels in ``positive_set`` to +1 and everything else to -1."""
    labels = np.asarray(labels)
    return np.where(np.isin(labels, sorted(positive_set)), 1.0, -1.0)


def normalize_binary_labels(labels) -> np.ndarray:
    """Coerce a two-valued label vector to {-1, +1} (larger value positive)."""
    labels = np.asarray(labels, dtype=np.float64)
    values = np.unique(labels)
    if values.size > 2:
        raise InvalidParameterError(
            f"expected at most two label values, got {values.size}"
        )
    if set(values).issubset({-1.0, 1.0}):
        return labels.copy()
    if values.size == 1:
        return np.ones_like(labels)
    return np.where(labels == values[1], 1.0, -1.0)


def rescale_targets(targets, lo: float = -1.0, hi: float = 1.0) -> np.ndarray:
    """Affinely map [min, max] of the targets onto [lo, hi].

    A constant vector maps to the midpoint.
    """
    if hi < lo:
        raise InvalidParameterError("need lo <= hi")
    targets = np.asarray(targets, dtype=np.float64)
    t_min, t_max = float(targets.min()), float(targets.max())
    if t_max == t_min:
        return np.full_like(targets, 0.5 * (lo + hi))
    return lo + (targets - t_min) * ((hi - lo) / (t_max - t_min))
