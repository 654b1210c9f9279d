"""Graph complexity measures: quadratic Renyi entropy and fuzzy ambiguity.

The ambiguity of a graph is the minimum, over vertex partitions, of the
De Luca-Termini fuzzy entropy of a membership vector derived from the
partition. Crisp structure (complete and regular graphs) reaches entropy
zero through the one-block partition; irregular structure cannot be made
crisp by any partition and keeps a strictly positive minimum.

Membership of vertex v assigned to block C: alpha * beta, where alpha is
the fraction of v's edges staying inside C and beta is v's within-block
degree relative to the block maximum. A non-isolated vertex forced into a
singleton block gets membership 1/(1 + deg v): a lone vertex whose edges
all point elsewhere is a poor fit for its own cluster, increasingly so the
more neighbors it has. Isolated vertices have membership 0 everywhere.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from .errors import ConfigError, DataError
from .graphcore import LabeledGraph, transition_view

_LN2 = math.log(2.0)

#: Partition sizes up to which ambiguity() enumerates exactly by default.
EXACT_LIMIT = 10

#: Default evaluation budget for the heuristic partition search.
DEFAULT_BUDGET = 2000


def renyi2_entropy(pi, normalize: bool = True) -> float:
    """Quadratic (2-order) Renyi entropy of a probability vector.

    Normalization divides by log n, giving a value in [0, 1] that reaches 1
    exactly on the uniform distribution; a single-element distribution is
    defined as 0.
    """
    p = np.asarray(pi, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise DataError("pi must be a non-empty vector")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-8:
        raise DataError("pi is not a probability distribution")
    raw = -math.log(float(np.dot(p, p)))
    if not normalize:
        return raw
    if p.size == 1:
        return 0.0
    return min(1.0, max(0.0, raw / math.log(p.size)))


def _neighbor_masks(graph: LabeledGraph) -> list[int]:
    masks = [0] * graph.n
    for i, j, _ in graph.edges:
        masks[i] |= 1 << j
        masks[j] |= 1 << i
    return masks


def _check_partition(n: int, partition) -> list[list[int]]:
    blocks = [sorted(int(v) for v in block) for block in partition]
    flat = [v for block in blocks for v in block]
    if len(flat) != n or set(flat) != set(range(n)) or any(not b for b in blocks):
        raise DataError("partition must cover every vertex exactly once")
    return blocks


def _memberships_from_masks(masks: list[int], degrees: list[int],
                            block_masks: list[int], n: int) -> np.ndarray:
    mu = np.zeros(n, dtype=np.float64)
    for bmask in block_masks:
        members = []
        m = bmask
        while m:
            v = (m & -m).bit_length() - 1
            members.append(v)
            m &= m - 1
        if len(members) == 1:
            v = members[0]
            mu[v] = 0.0 if degrees[v] == 0 else 1.0 / (1.0 + degrees[v])
            continue
        within = [(masks[v] & bmask).bit_count() for v in members]
        max_within = max(within)
        for v, wd in zip(members, within):
            if degrees[v] == 0 or max_within == 0:
                mu[v] = 0.0
            else:
                mu[v] = (wd / degrees[v]) * (wd / max_within)
    return mu


def fuzzify_partition(graph: LabeledGraph, partition, tconorm: str = "max") -> np.ndarray:
    """Membership vector of the fuzzy set induced by a vertex partition.

    Each vertex's memberships across blocks are combined with the chosen
    t-conorm ("max" or "probsum"); since a vertex only earns membership in
    its own block, both choices coincide for crisp partitions.
    """
    if tconorm not in ("max", "probsum"):
        raise ConfigError("tconorm must be 'max' or 'probsum', got %r" % (tconorm,))
    blocks = _check_partition(graph.n, partition)
    masks = _neighbor_masks(graph)
    degrees = [m.bit_count() for m in masks]
    block_masks = [sum(1 << v for v in block) for block in blocks]
    return _memberships_from_masks(masks, degrees, block_masks, graph.n)


def fuzzy_entropy(memberships) -> float:
    """De Luca-Termini entropy, normalized to [0, 1] by n*log(2)."""
    mu = np.asarray(memberships, dtype=np.float64)
    if mu.ndim != 1 or mu.size == 0:
        raise DataError("memberships must be a non-empty vector")
    if np.any(mu < 0) or np.any(mu > 1):
        raise DataError("memberships must lie in [0, 1]")
    total = 0.0
    for m in mu:
        if 0.0 < m < 1.0:
            total -= m * math.log(m) + (1.0 - m) * math.log(1.0 - m)
    return total / (mu.size * _LN2)


def _entropy_of_blocks(masks, degrees, block_masks, n) -> float:
    mu = _memberships_from_masks(masks, degrees, block_masks, n)
    total = 0.0
    for m in mu:
        if 0.0 < m < 1.0:
            total -= m * math.log(m) + (1.0 - m) * math.log(1.0 - m)
    return total / (n * _LN2)


def _iter_partitions(n: int):
    """All set partitions of range(n) as restricted-growth assignments."""
    a = [0] * n
    b = [0] * n  # b[i] = max(a[:i+1])
    while True:
        yield a
        # advance to the next restricted growth string
        i = n - 1
        while i > 0 and a[i] == b[i - 1] + 1:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        b[i] = max(b[i - 1], a[i])
        for j in range(i + 1, n):
            a[j] = 0
            b[j] = b[i]


def _assignment_to_masks(a: list[int]) -> list[int]:
    k = max(a) + 1
    masks = [0] * k
    for v, bi in enumerate(a):
        masks[bi] |= 1 << v
    return masks


def _exact_minimum(masks, degrees, n) -> float:
    best = math.inf
    for a in _iter_partitions(n):
        h = _entropy_of_blocks(masks, degrees, _assignment_to_masks(a), n)
        if h < best:
            best = h
            if best == 0.0:
                break
    return best


class _Budget:
    def __init__(self, limit: int):
        self.left = limit

    def take(self) -> bool:
        if self.left <= 0:
            return False
        self.left -= 1
        return True


def _canonical(a: tuple) -> tuple:
    relabel: dict = {}
    out = []
    for x in a:
        if x not in relabel:
            relabel[x] = len(relabel)
        out.append(relabel[x])
    return tuple(out)


def _heuristic_minimum(masks, degrees, n, budget_limit: int, seed: int) -> float:
    rng = np.random.default_rng(seed)
    budget = _Budget(budget_limit)
    cache: dict = {}

    def evaluate(a) -> float | None:
        key = _canonical(tuple(a))
        if key in cache:
            return cache[key]
        if not budget.take():
            return None
        h = _entropy_of_blocks(masks, degrees, _assignment_to_masks(list(key)), n)
        cache[key] = h
        return h

    best_h = math.inf
    best_a: tuple = tuple([0] * n)

    def consider(a) -> float | None:
        nonlocal best_h, best_a
        h = evaluate(a)
        if h is not None and h < best_h:
            best_h = h
            best_a = _canonical(tuple(a))
        return h

    consider([0] * n)
    consider(list(range(n)))

    # Greedy agglomerative pass: repeatedly take the best merge of two
    # edge-connected blocks, tracking the best partition along the path.
    a = list(range(n))
    while best_h > 0.0:
        k = max(a) + 1
        if k == 1:
            break
        bmasks = _assignment_to_masks(a)
        candidates = []
        for x, y in combinations(range(k), 2):
            joined = any((masks[v] & bmasks[y]) for v in range(n) if a[v] == x)
            if joined:
                candidates.append((x, y))
        if not candidates:
            break
        step_best = None
        for x, y in candidates:
            trial = [x if bi == y else bi for bi in a]
            h = evaluate(trial)
            if h is None:
                break
            if step_best is None or h < step_best[0]:
                step_best = (h, trial)
        if step_best is None:
            break
        a = step_best[1]
        if step_best[0] < best_h:
            best_h = step_best[0]
            best_a = _canonical(tuple(a))

    def local_search(start: list[int]):
        nonlocal best_h, best_a
        cur = list(_canonical(tuple(start)))
        cur_h = evaluate(cur)
        if cur_h is None:
            return
        improved = True
        while improved and budget.left > 0 and best_h > 0.0:
            improved = False
            for v in range(n):
                base = cur[v]
                targets = set(cur) | {max(cur) + 1}
                targets.discard(base)
                for t in sorted(targets):
                    trial = list(cur)
                    trial[v] = t
                    h = evaluate(trial)
                    if h is None:
                        return
                    if h < cur_h - 1e-15:
                        cur = list(_canonical(tuple(trial)))
                        cur_h = h
                        improved = True
                        if h < best_h:
                            best_h = h
                            best_a = tuple(cur)
            if cur_h < best_h:
                best_h = cur_h
                best_a = tuple(cur)

    local_search(list(best_a))
    # Restarts are capped independently of the budget: on small graphs the
    # cache can absorb every partition, and cached lookups are free.
    for _ in range(200):
        if budget.left <= 0 or best_h <= 0.0:
            break
        start = [int(x) for x in rng.integers(0, n, size=n)]
        local_search(start)
    return best_h


def ambiguity(graph: LabeledGraph, method: str = "auto",
              search_budget: int = DEFAULT_BUDGET, seed: int = 0) -> float:
    """Minimum fuzzy entropy over vertex partitions.

    Partitions are enumerated exhaustively up to 10 vertices; larger graphs
    use a seeded heuristic (greedy agglomeration plus restarted local
    search) limited to ``search_budget`` partition evaluations. ``method``
    forces "exact" or "heuristic" regardless of size.
    """
    if method not in ("auto", "exact", "heuristic"):
        raise ConfigError("method must be auto, exact, or heuristic")
    if search_budget < 3:
        raise ConfigError("search_budget must allow a few evaluations")
    n = graph.n
    masks = _neighbor_masks(graph)
    degrees = [m.bit_count() for m in masks]
    if method == "exact" or (method == "auto" and n <= EXACT_LIMIT):
        if n > 12:
            raise ConfigError("exact enumeration is limited to 12 vertices")
        return _exact_minimum(masks, degrees, n)
    return _heuristic_minimum(masks, degrees, n, search_budget, seed)


def complexity_features(graphs, labels=None, search_budget: int = DEFAULT_BUDGET,
                        seed: int = 0):
    """Per-graph (entropy, ambiguity) features plus a per-class summary.

    The entropy is the normalized quadratic Renyi entropy of the unweighted
    random walk's stationary distribution, so every graph must be free of
    isolated vertices. The summary maps each label to mean and sample
    standard deviation of both features.
    """
    feats = np.zeros((len(graphs), 2), dtype=np.float64)
    for idx, graph in enumerate(graphs):
        view = transition_view(graph, edge_weighted=False)
        feats[idx, 0] = renyi2_entropy(view.stationary, normalize=True)
        feats[idx, 1] = ambiguity(graph, search_budget=search_budget, seed=seed)
    summary: dict = {}
    if labels is not None:
        labels = list(labels)
        if len(labels) != len(graphs):
            raise DataError("labels and graphs differ in length")
        for lab in sorted({str(l) for l in labels}):
            rows = feats[[i for i, l in enumerate(labels) if str(l) == lab]]
            std = rows.std(ddof=1, axis=0) if rows.shape[0] > 1 else np.zeros(2)
            summary[lab] = {
                "count": int(rows.shape[0]),
                "entropy_mean": float(rows[:, 0].mean()),
                "entropy_std": float(std[0]),
                "ambiguity_mean": float(rows[:, 1].mean()),
                "ambiguity_std": float(std[1]),
            }
    return feats, summary
