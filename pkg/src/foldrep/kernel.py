"""Dissimilarity-to-kernel conversion and kernel matrix utilities.

Double centering turns a matrix of pairwise dissimilarities into an inner
product matrix (the classical multidimensional-scaling construction). No
indefiniteness correction is applied; downstream consumers get an honest
``is_psd`` flag instead.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

#: Magic bytes opening the binary square-matrix format.
MATRIX_MAGIC = b"FRM1"

#: Relative eigenvalue tolerance for the PSD flag.
PSD_RTOL = 1e-8


@dataclass
class DistanceMatrix:
    """Symmetric pairwise dissimilarities with an optional id per row."""

    values: np.ndarray
    ids: list[str] | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DataError("distance matrix must be square")
        if not np.all(np.isfinite(v)):
            raise DataError("distance matrix has non-finite entries")
        if np.any(v < 0):
            raise DataError("distance matrix has negative entries")
        if np.any(np.diag(v) != 0):
            raise DataError("distance matrix has a nonzero diagonal")
        if not np.array_equal(v, v.T):
            raise DataError("distance matrix is not symmetric")
        if self.ids is not None and len(self.ids) != v.shape[0]:
            raise DataError("id list does not match matrix size")
        self.values = v

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass
class KernelMatrix:
    """Symmetric similarity matrix with a PSD flag.

    Kernels produced by :func:`center_to_kernel` also carry the centering
    statistics (``row_means`` and ``grand_mean`` of the squared
    dissimilarities) needed for out-of-sample rows.
    """

    values: np.ndarray
    is_psd: bool
    row_means: np.ndarray | None = None
    grand_mean: float | None = None
    ids: list[str] | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _psd_flag(values: np.ndarray) -> bool:
    eigvals = np.linalg.eigvalsh(values)
    scale = np.max(np.abs(eigvals)) if eigvals.size else 0.0
    return bool(eigvals.min(initial=0.0) >= -PSD_RTOL * scale)


def center_to_kernel(distances) -> KernelMatrix:
    """Double-center squared dissimilarities into a kernel matrix.

    Computes K = -1/2 * C (D o D) C with C = I - 11^T/n, symmetrizes the
    result against floating-point drift, and flags positive
    semidefiniteness (smallest eigenvalue >= -1e-8 relative to the largest
    eigenvalue magnitude).
    """
    if isinstance(distances, DistanceMatrix):
        dm = distances
    else:
        dm = DistanceMatrix(np.asarray(distances))
    if dm.n < 2:
        raise DataError("centering needs at least 2 patterns")
    d2 = dm.values ** 2
    row_means = d2.mean(axis=1)
    grand_mean = float(d2.mean())
    k = -0.5 * (d2 - row_means[:, None] - row_means[None, :] + grand_mean)
    k = (k + k.T) / 2.0
    return KernelMatrix(
        values=k,
        is_psd=_psd_flag(k),
        row_means=row_means,
        grand_mean=grand_mean,
        ids=list(dm.ids) if dm.ids is not None else None,
    )


def kernel_row(train_kernel: KernelMatrix, test_pattern, train_patterns,
               dissimilarity) -> np.ndarray:
    """Out-of-sample kernel row for one test pattern.

    Applies the training centering statistics to the test pattern's
    squared dissimilarities, so a test pattern equal to training pattern k
    reproduces column k of the training kernel exactly.
    """
    if train_kernel.row_means is None or train_kernel.grand_mean is None:
        raise DataError("kernel carries no centering statistics")
    if not callable(dissimilarity):
        raise DataError("dissimilarity must be callable")
    if len(train_patterns) != train_kernel.n:
        raise DataError(
            "training pattern count %d does not match kernel size %d"
            % (len(train_patterns), train_kernel.n)
        )
    d2 = np.array(
        [float(dissimilarity(test_pattern, p)) ** 2 for p in train_patterns]
    )
    return -0.5 * (d2 - d2.mean() - train_kernel.row_means + train_kernel.grand_mean)


def kernel_rows(train_kernel: KernelMatrix, test_patterns, train_patterns,
                dissimilarity) -> np.ndarray:
    """Stack :func:`kernel_row` over a test collection."""
    return np.array([
        kernel_row(train_kernel, t, train_patterns, dissimilarity)
        for t in test_patterns
    ])


def gaussian_kernel(x: np.ndarray, sigma: float = 1.0) -> KernelMatrix:
    """Gaussian kernel matrix k(x, y) = exp(-||x - y||^2 / (2 sigma^2))."""
    rows = gaussian_rows(x, x, sigma)
    rows = (rows + rows.T) / 2.0
    return KernelMatrix(values=rows, is_psd=_psd_flag(rows))


def gaussian_rows(x: np.ndarray, y: np.ndarray, sigma: float = 1.0) -> np.ndarray:
    """Gaussian kernel evaluations between the rows of x and the rows of y."""
    if sigma <= 0:
        raise DataError("sigma must be positive")
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    sq = ((x[:, None, :] - y[None, :, :]) ** 2).sum(axis=2)
    return np.exp(-sq / (2.0 * sigma * sigma))


def save_matrix(path, values) -> None:
    """Write a square matrix as row-major float64 with an 8-byte header.

    Header: 4 magic bytes, then the matrix size as a little-endian uint32.
    """
    if isinstance(values, (DistanceMatrix, KernelMatrix)):
        values = values.values
    v = np.ascontiguousarray(np.asarray(values, dtype=np.float64))
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise DataError("only square matrices are persisted")
    with open(path, "wb") as fh:
        fh.write(MATRIX_MAGIC)
        fh.write(struct.pack("<I", v.shape[0]))
        fh.write(v.astype("<f8").tobytes())


def load_matrix(path) -> np.ndarray:
    """Read a matrix written by :func:`save_matrix`."""
    with open(path, "rb") as fh:
        header = fh.read(8)
        if len(header) != 8 or header[:4] != MATRIX_MAGIC:
            raise DataError("%s: not a matrix file" % path)
        (n,) = struct.unpack("<I", header[4:])
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n * n:
        raise DataError("%s: truncated matrix payload" % path)
    return data.reshape(n, n).astype(np.float64)


def export_matrix_csv(path, values) -> None:
    """Write a matrix as plain CSV for inspection."""
    if isinstance(values, (DistanceMatrix, KernelMatrix)):
        values = values.values
    np.savetxt(path, np.asarray(values, dtype=np.float64),
               delimiter=",", fmt="%.17g")
