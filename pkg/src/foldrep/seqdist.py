"""Generalized Levenshtein distances with pluggable substitution costs.

Three cost schemes cover the package's sequence representations: unit costs
(classic edit distance), a substitution-cost matrix over a symbol alphabet,
and clamped Euclidean costs between real-vector elements. Insertions and
deletions cost ``indel_cost`` under every scheme.

The O(|a|*|b|) dynamic program lives in a compiled Cython core when the
extension was built, with a bitwise-identical pure-Python fallback selected
at import time.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial

import numpy as np

from .errors import DataError
from .kernel import DistanceMatrix

try:
    from . import _editdp as _core
except ImportError:  # extension not built; pure fallback
    from . import _editdp_py as _core

#: True when the compiled dynamic-programming core is in use.
COMPILED_CORE = bool(getattr(_core, "COMPILED", False))

#: Canonical one-letter amino-acid alphabet (alphabetical).
AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"


@dataclass(frozen=True)
class CostMatrix:
    """Square substitution-cost matrix over a symbol alphabet.

    Costs lie in [0, 1] with a zero diagonal. Symmetry is optional and only
    validated when declared.
    """

    values: np.ndarray
    alphabet: str = AMINO_ACIDS
    symmetric: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        k = len(self.alphabet)
        if len(set(self.alphabet)) != k or k == 0:
            raise DataError("alphabet symbols must be unique and non-empty")
        if v.shape != (k, k):
            raise DataError(
                "cost matrix shape %s does not match alphabet size %d"
                % (v.shape, k)
            )
        if not np.all(np.isfinite(v)):
            raise DataError("cost matrix has non-finite entries")
        if v.min() < 0.0 or v.max() > 1.0:
            raise DataError("cost matrix entries must lie in [0, 1]")
        if np.any(np.diag(v) != 0.0):
            raise DataError("cost matrix diagonal must be zero")
        if self.symmetric and not np.array_equal(v, v.T):
            raise DataError("cost matrix declared symmetric but is not")
        object.__setattr__(self, "values", v)

    def index(self, symbol) -> int:
        pos = self.alphabet.find(symbol) if isinstance(symbol, str) else -1
        if pos < 0:
            raise DataError("symbol %r not in scheme alphabet" % (symbol,))
        return pos


def _check_indel(indel_cost: float):
    if not indel_cost > 0:
        raise DataError("indel cost must be strictly positive")


@dataclass(frozen=True)
class UnitScheme:
    """Classic edit distance: every substitution between distinct symbols
    costs 1."""

    indel_cost: float = 1.0

    def __post_init__(self):
        _check_indel(self.indel_cost)


@dataclass(frozen=True)
class MatrixScheme:
    """Substitution costs looked up from a :class:`CostMatrix`."""

    costs: CostMatrix
    indel_cost: float = 1.0

    def __post_init__(self):
        _check_indel(self.indel_cost)


@dataclass(frozen=True)
class VectorScheme:
    """Sequences of real vectors; substitution costs min(1, scale * ||u - v||)."""

    scale: float = 1.0
    indel_cost: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise DataError("scale must be strictly positive")
        _check_indel(self.indel_cost)


def _encode(seq, index) -> np.ndarray:
    return np.array([index[s] for s in seq], dtype=np.int32)


def _encode_matrix(seq, cm: CostMatrix) -> np.ndarray:
    out = np.empty(len(seq), dtype=np.int32)
    for i, s in enumerate(seq):
        out[i] = cm.index(s)
    return out


def _as_vectors(seq) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(seq, dtype=np.float64))
    if arr.size == 0:
        return arr.reshape(0, 0)
    if arr.ndim != 2:
        raise DataError("vector sequences must be 2-dimensional arrays")
    return arr


def _unit_costs(k: int) -> np.ndarray:
    return 1.0 - np.eye(max(k, 1), dtype=np.float64)


def levenshtein(a, b, scheme) -> float:
    """Weighted edit distance between two sequences under a cost scheme.

    Sequences may be strings or sequences of hashable symbols (unit and
    matrix schemes) or 2-d arrays of vectors (vector scheme); empty
    sequences are allowed.
    """
    if isinstance(scheme, VectorScheme):
        va, vb = _as_vectors(a), _as_vectors(b)
        if va.shape[0] and vb.shape[0] and va.shape[1] != vb.shape[1]:
            raise DataError("vector elements have mismatched dimensions")
        if va.shape[0] == 0 and vb.shape[0]:
            va = va.reshape(0, vb.shape[1])
        if vb.shape[0] == 0 and va.shape[0]:
            vb = vb.reshape(0, va.shape[1])
        return float(_core.lev_vectors(va, vb, scheme.scale, scheme.indel_cost))
    if isinstance(scheme, MatrixScheme):
        ea = _encode_matrix(a, scheme.costs)
        eb = _encode_matrix(b, scheme.costs)
        return float(
            _core.lev_symbols(ea, eb, scheme.costs.values, scheme.indel_cost)
        )
    if isinstance(scheme, UnitScheme):
        index: dict = {}
        for s in a:
            index.setdefault(s, len(index))
        for s in b:
            index.setdefault(s, len(index))
        ea, eb = _encode(a, index), _encode(b, index)
        return float(
            _core.lev_symbols(ea, eb, _unit_costs(len(index)), scheme.indel_cost)
        )
    raise DataError("unknown cost scheme %r" % (scheme,))


def distance_fn(scheme):
    """The scheme as a plain ``(a, b) -> float`` dissimilarity callable."""
    return partial(levenshtein, scheme=scheme)


def pairwise_distances(patterns, scheme, ids=None) -> DistanceMatrix:
    """Symmetric matrix of pairwise distances over a pattern list.

    Each unordered pair is aligned once and mirrored, so the result is
    exactly symmetric regardless of scheme asymmetries.
    """
    patterns = list(patterns)
    n = len(patterns)
    if isinstance(scheme, VectorScheme):
        enc = [_as_vectors(p) for p in patterns]
        dims = {e.shape[1] for e in enc if e.shape[0]}
        if len(dims) > 1:
            raise DataError("vector elements have mismatched dimensions")
        dim = dims.pop() if dims else 0
        enc = [e.reshape(0, dim) if e.shape[0] == 0 else e for e in enc]
        pair = lambda x, y: _core.lev_vectors(x, y, scheme.scale, scheme.indel_cost)
    elif isinstance(scheme, MatrixScheme):
        enc = [_encode_matrix(p, scheme.costs) for p in patterns]
        costs = scheme.costs.values
        pair = lambda x, y: _core.lev_symbols(x, y, costs, scheme.indel_cost)
    elif isinstance(scheme, UnitScheme):
        index: dict = {}
        for p in patterns:
            for s in p:
                index.setdefault(s, len(index))
        enc = [_encode(p, index) for p in patterns]
        costs = _unit_costs(len(index))
        pair = lambda x, y: _core.lev_symbols(x, y, costs, scheme.indel_cost)
    else:
        raise DataError("unknown cost scheme %r" % (scheme,))
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            d = pair(enc[i], enc[j])
            out[i, j] = d
            out[j, i] = d
    return DistanceMatrix(values=out, ids=list(ids) if ids is not None else None)


def pam_to_costs(similarities, alphabet: str = AMINO_ACIDS) -> CostMatrix:
    """Rescale a substitution-similarity matrix (e.g. PAM120) to [0, 1] costs.

    The globally most similar pair maps to cost 0, the least similar to
    cost 1, and the diagonal is forced to zero.
    """
    s = np.asarray(similarities, dtype=np.float64)
    k = len(alphabet)
    if s.shape != (k, k):
        raise DataError("similarity matrix shape does not match alphabet")
    smax, smin = s.max(), s.min()
    if smax == smin:
        raise DataError("degenerate similarity range")
    costs = (smax - s) / (smax - smin)
    np.fill_diagonal(costs, 0.0)
    return CostMatrix(
        values=costs,
        alphabet=alphabet,
        symmetric=bool(np.array_equal(costs, costs.T)),
    )


def write_cost_matrix(path, cm: CostMatrix) -> None:
    """Write a cost matrix as text: one alphabet line, then one row per line."""
    with open(path, "w") as fh:
        fh.write(cm.alphabet + "\n")
        for row in cm.values:
            fh.write(" ".join("%.17g" % v for v in row) + "\n")


def read_cost_matrix(path) -> CostMatrix:
    """Read a cost matrix written by :func:`write_cost_matrix`."""
    with open(path) as fh:
        lines = [line.rstrip("\n") for line in fh]
    lines = [line for line in lines if line.strip()]
    if not lines:
        raise DataError("%s: empty cost matrix file" % path)
    alphabet = lines[0].strip()
    k = len(alphabet)
    if len(lines) != k + 1:
        raise DataError(
            "%s: expected %d matrix rows, found %d" % (path, k, len(lines) - 1)
        )
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != k:
            raise DataError("%s:%d: expected %d values" % (path, lineno, k))
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise DataError("%s:%d: malformed number" % (path, lineno)) from None
    values = np.array(rows, dtype=np.float64)
    return CostMatrix(
        values=values,
        alphabet=alphabet,
        symmetric=bool(np.array_equal(values, values.T)),
    )
