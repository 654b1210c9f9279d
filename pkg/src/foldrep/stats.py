"""Principal component and canonical correlation analysis.

Both analyses are deterministic: loading and weight columns get a fixed
sign (largest-magnitude entry positive), so repeated runs and platform
changes cannot flip variates. Canonical correlation whitens each block
through an eigendecomposition whose spectrum is floored at a small
fraction of the average eigenvalue; the floor only engages on
rank-deficient blocks, leaving well-conditioned problems untouched.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError

#: Eigenvalues of a within-block covariance are floored at this fraction
#: of the block's average eigenvalue before inversion.
SPECTRUM_FLOOR_SCALE = 1e-8

DEFAULT_PERMUTATIONS = 999


@dataclass
class PcaResult:
    """Loadings are d x k with orthonormal columns; scores are n x k and
    mutually orthogonal; explained fractions are non-increasing and sum to
    at most 1 over the retained components."""

    loadings: np.ndarray
    scores: np.ndarray
    explained_fraction: np.ndarray
    eigenvalues: np.ndarray  # all of them, descending
    mean: np.ndarray
    scale: np.ndarray | None  # column scales when standardized


@dataclass
class CcaResult:
    """Canonical correlations with block weights, variate scores, and
    structure (variable-variate) correlations."""

    correlations: np.ndarray
    x_weights: np.ndarray
    y_weights: np.ndarray
    x_scores: np.ndarray
    y_scores: np.ndarray
    x_structure: np.ndarray
    y_structure: np.ndarray
    stabilized: bool


def _as_data(x, block: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise DataError("%s must be a non-empty 2-D matrix" % block)
    if not np.all(np.isfinite(x)):
        raise DataError("%s has non-finite entries" % block)
    return x


def _fix_signs(columns: np.ndarray, companion: np.ndarray | None = None):
    for c in range(columns.shape[1]):
        pivot = int(np.argmax(np.abs(columns[:, c])))
        if columns[pivot, c] < 0:
            columns[:, c] = -columns[:, c]
            if companion is not None:
                companion[:, c] = -companion[:, c]


def pca(x, k: int | None = None, standardize: bool = False,
        column_names=None) -> PcaResult:
    """Eigendecomposition of the covariance (or correlation) matrix.

    Columns are centered, and divided by their sample standard deviation
    when ``standardize`` is set; a zero-variance column is then an error
    naming the column. Each loading column's largest-magnitude entry is
    made positive.
    """
    x = _as_data(x, "data")
    n, d = x.shape
    if n < 2:
        raise DataError("need at least 2 rows")
    limit = min(n - 1, d)
    if k is None:
        k = limit
    if not 1 <= k <= limit:
        raise ConfigError("component count must lie in [1, min(n - 1, d)] = [1, %d]"
                          % limit)
    mean = x.mean(axis=0)
    centered = x - mean
    scale = None
    if standardize:
        scale = centered.std(axis=0, ddof=1)
        dead = np.flatnonzero(scale == 0.0)
        if dead.size:
            names = ([str(column_names[i]) for i in dead] if column_names
                     else [str(i) for i in dead])
            raise DataError("zero-variance column(s) under standardization: %s"
                            % ", ".join(names))
        centered = centered / scale
    cov = (centered.T @ centered) / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    eigvals = eigvals[::-1]
    eigvecs = eigvecs[:, ::-1]
    eigvals = np.clip(eigvals, 0.0, None)
    total = eigvals.sum()
    if total <= 0.0:
        raise DataError("data has no variance")
    loadings = eigvecs[:, :k].copy()
    _fix_signs(loadings)
    return PcaResult(
        loadings=loadings,
        scores=centered @ loadings,
        explained_fraction=eigvals[:k] / total,
        eigenvalues=eigvals,
        mean=mean,
        scale=scale,
    )


def components_of_cost_matrix(costs, k: int = 3) -> PcaResult:
    """PCA of a substitution-cost matrix, rows as observations.

    Raw covariance is used (costs already share the [0, 1] scale); pass
    the result of ``pca(costs.values, k, standardize=True)`` instead for
    the correlation-matrix variant.
    """
    return pca(costs.values, k=k, standardize=False,
               column_names=list(costs.alphabet))


def _floored_inverse_sqrt(cov: np.ndarray, floor_scale: float,
                          block: str) -> tuple[np.ndarray, bool]:
    eigvals, eigvecs = np.linalg.eigh(cov)
    trace = float(eigvals.sum())
    if not trace > 0.0:
        raise DataError("%s block has no variance" % block)
    floor = floor_scale * trace / cov.shape[0]
    engaged = bool((eigvals < floor).any())
    eigvals = np.maximum(eigvals, floor)
    inv_sqrt = (eigvecs / np.sqrt(eigvals)) @ eigvecs.T
    return inv_sqrt, engaged


def _structure(centered: np.ndarray, scores: np.ndarray) -> np.ndarray:
    var_sd = np.sqrt((centered ** 2).sum(axis=0))
    score_sd = np.sqrt((scores ** 2).sum(axis=0))
    out = np.zeros((centered.shape[1], scores.shape[1]))
    for j in range(centered.shape[1]):
        if var_sd[j] == 0.0:
            continue
        for c in range(scores.shape[1]):
            if score_sd[c] == 0.0:
                continue
            out[j, c] = float(centered[:, j] @ scores[:, c]
                              / (var_sd[j] * score_sd[c]))
    return np.clip(out, -1.0, 1.0)


def cca(x, y, floor_scale: float = SPECTRUM_FLOOR_SCALE) -> CcaResult:
    """Canonical correlations between two variable blocks on the same rows.

    Each block is whitened by the inverse square root of its covariance
    (spectrum floored, see module docstring); the canonical system is the
    singular value decomposition of the whitened cross-covariance.
    Correlations come out non-increasing in [0, 1].
    """
    x = _as_data(x, "x")
    y = _as_data(y, "y")
    if x.shape[0] != y.shape[0]:
        raise DataError("blocks have different row counts")
    n = x.shape[0]
    if n < 2:
        raise DataError("need at least 2 rows")
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    cxx = (xc.T @ xc) / (n - 1)
    cyy = (yc.T @ yc) / (n - 1)
    cxy = (xc.T @ yc) / (n - 1)
    wx, sx = _floored_inverse_sqrt(cxx, floor_scale, "x")
    wy, sy = _floored_inverse_sqrt(cyy, floor_scale, "y")
    u, sigma, vt = np.linalg.svd(wx @ cxy @ wy)
    m = min(x.shape[1], y.shape[1])
    x_weights = wx @ u[:, :m]
    y_weights = wy @ vt[:m].T
    _fix_signs(x_weights, companion=y_weights)
    x_scores = xc @ x_weights
    y_scores = yc @ y_weights
    return CcaResult(
        correlations=np.clip(sigma[:m], 0.0, 1.0),
        x_weights=x_weights,
        y_weights=y_weights,
        x_scores=x_scores,
        y_scores=y_scores,
        x_structure=_structure(xc, x_scores),
        y_structure=_structure(yc, y_scores),
        stabilized=sx or sy,
    )


def permutation_pvalues(x, y, n_permutations: int = DEFAULT_PERMUTATIONS,
                        seed: int = 0,
                        floor_scale: float = SPECTRUM_FLOOR_SCALE) -> np.ndarray:
    """Permutation p-values for each canonical correlation.

    Row alignment between the blocks is shuffled ``n_permutations`` times;
    p_i = (1 + #{permutations with r_i at least the observed r_i})
    / (1 + n_permutations).
    """
    if n_permutations < 1:
        raise ConfigError("need at least one permutation")
    observed = cca(x, y, floor_scale=floor_scale).correlations
    y = _as_data(y, "y")
    rng = np.random.default_rng(seed)
    exceed = np.zeros(observed.size, dtype=np.int64)
    for _ in range(n_permutations):
        shuffled = y[rng.permutation(y.shape[0])]
        r = cca(x, shuffled, floor_scale=floor_scale).correlations
        exceed += r >= observed
    return (1.0 + exceed) / (1.0 + n_permutations)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(v: float) -> str:
    return "%.17g" % v


def write_pca_report(directory, result: PcaResult, variable_names=None) -> dict:
    """CSV tables (explained fractions, loadings) plus a full-precision
    JSON bundle. Returns the written paths."""
    os.makedirs(directory, exist_ok=True)
    d, k = result.loadings.shape
    names = ([str(v) for v in variable_names] if variable_names is not None
             else ["var_%d" % i for i in range(d)])
    if len(names) != d:
        raise DataError("variable names do not match the loading rows")
    paths = {
        "explained": os.path.join(directory, "pca_explained.csv"),
        "loadings": os.path.join(directory, "pca_loadings.csv"),
        "json": os.path.join(directory, "pca.json"),
    }
    _write_csv(paths["explained"], ["component", "explained_fraction"],
               [[c + 1, _fmt(result.explained_fraction[c])] for c in range(k)])
    _write_csv(paths["loadings"],
               ["variable"] + ["component_%d" % (c + 1) for c in range(k)],
               [[names[j]] + [_fmt(result.loadings[j, c]) for c in range(k)]
                for j in range(d)])
    with open(paths["json"], "w") as fh:
        json.dump({
            "loadings": result.loadings.tolist(),
            "scores": result.scores.tolist(),
            "explained_fraction": result.explained_fraction.tolist(),
            "eigenvalues": result.eigenvalues.tolist(),
            "variable_names": names,
        }, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


def write_cca_report(directory, result: CcaResult, x_names=None, y_names=None,
                     pvalues=None) -> dict:
    """CSV tables (correlations, per-block structure correlations) plus a
    full-precision JSON bundle. Returns the written paths."""
    os.makedirs(directory, exist_ok=True)
    m = result.correlations.size
    x_names = ([str(v) for v in x_names] if x_names is not None
               else ["x_%d" % i for i in range(result.x_structure.shape[0])])
    y_names = ([str(v) for v in y_names] if y_names is not None
               else ["y_%d" % i for i in range(result.y_structure.shape[0])])
    if len(x_names) != result.x_structure.shape[0]:
        raise DataError("x names do not match the x block")
    if len(y_names) != result.y_structure.shape[0]:
        raise DataError("y names do not match the y block")
    paths = {
        "correlations": os.path.join(directory, "cca_correlations.csv"),
        "x_structure": os.path.join(directory, "cca_x_structure.csv"),
        "y_structure": os.path.join(directory, "cca_y_structure.csv"),
        "json": os.path.join(directory, "cca.json"),
    }
    header = ["variate", "correlation"]
    rows = [[c + 1, _fmt(result.correlations[c])] for c in range(m)]
    if pvalues is not None:
        pvalues = np.asarray(pvalues, dtype=np.float64)
        if pvalues.size != m:
            raise DataError("p-values do not match the correlation count")
        header.append("p_value")
        for c in range(m):
            rows[c].append(_fmt(pvalues[c]))
    _write_csv(paths["correlations"], header, rows)
    variates = ["variate_%d" % (c + 1) for c in range(m)]
    for key, names, block in (("x_structure", x_names, result.x_structure),
                              ("y_structure", y_names, result.y_structure)):
        _write_csv(paths[key], ["variable"] + variates,
                   [[names[j]] + [_fmt(block[j, c]) for c in range(m)]
                    for j in range(block.shape[0])])
    with open(paths["json"], "w") as fh:
        json.dump({
            "correlations": result.correlations.tolist(),
            "p_values": None if pvalues is None else pvalues.tolist(),
            "x_weights": result.x_weights.tolist(),
            "y_weights": result.y_weights.tolist(),
            "x_structure": result.x_structure.tolist(),
            "y_structure": result.y_structure.tolist(),
            "x_names": x_names,
            "y_names": y_names,
            "stabilized": result.stabilized,
        }, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths
