"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written along a different algorithmic route
than the library code it checks: plain recursion instead of tabulation,
power iteration instead of closed forms, exhaustive enumeration instead of
search heuristics, and dense linear-algebra solves instead of iterative
updates. None of these functions import anything from ``foldrep`` except
plain data containers.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


def edit_distance_recursive(a, b, substitution, indel_cost):
    """Weighted edit distance by memoized prefix recursion.

    ``substitution(x, y)`` returns the cost of replacing ``x`` with ``y``.
    The recursion accumulates ``distance(prefix) + cost`` exactly like a
    row-by-row table fill, so results agree bitwise with a float64 dynamic
    program, not merely within a tolerance.
    """
    a = tuple(a)
    b = tuple(b)

    @lru_cache(maxsize=None)
    def dist(i, j):
        if i == 0 and j == 0:
            return 0.0
        options = []
        if i > 0:
            options.append(dist(i - 1, j) + indel_cost)
        if j > 0:
            options.append(dist(i, j - 1) + indel_cost)
        if i > 0 and j > 0:
            options.append(dist(i - 1, j - 1) + substitution(a[i - 1], b[j - 1]))
        return min(options)

    return dist(len(a), len(b))


def stationary_power_iteration(transition, tol=1e-15, max_iter=200_000):
    """Stationary distribution of a row-stochastic matrix by iteration.

    Iterates the lazy chain (T + I) / 2, which shares T's stationary
    distribution but is aperiodic, so the iteration also converges for
    bipartite (periodic) walks.
    """
    t = np.asarray(transition, dtype=np.float64)
    n = t.shape[0]
    lazy = (t + np.eye(n)) / 2.0
    pi = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = pi @ lazy
        nxt = nxt / nxt.sum()
        if np.abs(nxt - pi).sum() < tol:
            return nxt
        pi = nxt
    return pi


def iter_partitions(n):
    """All set partitions of range(n), each a list of sorted blocks.

    Recursive construction: the first element opens the first block, every
    later element either joins an existing block or opens a new one.
    """

    def extend(k, blocks):
        if k == n:
            yield [sorted(block) for block in blocks]
            return
        for i in range(len(blocks)):
            blocks[i].append(k)
            yield from extend(k + 1, blocks)
            blocks[i].pop()
        blocks.append([k])
        yield from extend(k + 1, blocks)
        blocks.pop()

    yield from extend(1, [[0]]) if n else iter(())


def membership_vector(n, edges, blocks):
    """Fuzzy membership of each vertex under a partition of the vertex set.

    A vertex in a block of size >= 2 gets (within-degree / degree) *
    (within-degree / block max within-degree). A connected vertex alone in
    its block gets 1 / (1 + degree); isolated vertices get 0.
    """
    adjacency = {v: set() for v in range(n)}
    for i, j in edges:
        adjacency[i].add(j)
        adjacency[j].add(i)
    mu = [0.0] * n
    for block in blocks:
        members = set(block)
        if len(block) == 1:
            v = block[0]
            degree = len(adjacency[v])
            mu[v] = 0.0 if degree == 0 else 1.0 / (1.0 + degree)
            continue
        within = {v: len(adjacency[v] & members) for v in block}
        top = max(within.values())
        for v in block:
            degree = len(adjacency[v])
            if degree == 0 or top == 0:
                mu[v] = 0.0
            else:
                mu[v] = (within[v] / degree) * (within[v] / top)
    return mu


def fuzzy_entropy_direct(mu):
    """De Luca-Termini entropy normalized by n*log 2, with 0*log 0 = 0."""
    total = 0.0
    for m in mu:
        if 0.0 < m < 1.0:
            total -= m * math.log(m) + (1.0 - m) * math.log(1.0 - m)
    return total / (len(mu) * math.log(2.0))


def ambiguity_exhaustive(n, edges):
    """Minimum fuzzy entropy over every partition, by full enumeration."""
    best = math.inf
    for blocks in iter_partitions(n):
        h = fuzzy_entropy_direct(membership_vector(n, edges, blocks))
        if h < best:
            best = h
    return best


def renyi2_direct(pi):
    """Normalized quadratic Renyi entropy straight from its formula."""
    pi = list(pi)
    collision = sum(p * p for p in pi)
    if len(pi) == 1:
        return 0.0
    return -math.log(collision) / math.log(len(pi))


def double_center_direct(distances):
    """Gram matrix from squared distances via the explicit centering matrix."""
    d = np.asarray(distances, dtype=np.float64)
    n = d.shape[0]
    centering = np.eye(n) - np.full((n, n), 1.0 / n)
    return -0.5 * centering @ (d * d) @ centering


def threshold_scan(pairs):
    """Brute-force length-threshold search over every integer candidate.

    ``pairs`` holds (length, label) with label +1 for the class predicted
    below the threshold. Returns (least error count, list of optimal
    integer thresholds in [min length, max length + 1]).
    """
    lengths = [p[0] for p in pairs]
    lo, hi = min(lengths), max(lengths) + 1
    best = None
    optimal = []
    for t in range(lo, hi + 1):
        errors = sum(1 for length, label in pairs
                     if (1 if length < t else -1) != label)
        if best is None or errors < best:
            best = errors
            optimal = [t]
        elif errors == best:
            optimal.append(t)
    return best, optimal


def svm_dual_bruteforce(kernel, labels, c):
    """Exact maximum of the C-SVM dual by active-set enumeration.

    Every assignment of each dual variable to {lower bound, upper bound,
    free} is tried; free variables are solved from the stationarity system
    together with the equality constraint, and the best feasible candidate
    wins. Exponential in n, so only for tiny problems.
    """
    k = np.asarray(kernel, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    n = y.size
    q = (y[:, None] * y[None, :]) * k
    eps = 1e-9

    def objective(alpha):
        return alpha.sum() - 0.5 * alpha @ q @ alpha

    best_obj = -math.inf
    best_alpha = None
    for code in range(3 ** n):
        state = []
        rest = code
        for _ in range(n):
            state.append(rest % 3)
            rest //= 3
        alpha = np.zeros(n)
        clamped = [i for i in range(n) if state[i] != 2]
        free = [i for i in range(n) if state[i] == 2]
        for i in clamped:
            alpha[i] = 0.0 if state[i] == 0 else c
        if free:
            # stationarity on the free set plus the equality constraint
            size = len(free)
            system = np.zeros((size + 1, size + 1))
            system[:size, :size] = q[np.ix_(free, free)]
            system[:size, size] = y[free]
            system[size, :size] = y[free]
            rhs = np.zeros(size + 1)
            rhs[:size] = 1.0 - q[np.ix_(free, clamped)] @ alpha[clamped]
            rhs[size] = -y[clamped] @ alpha[clamped]
            solution, *_ = np.linalg.lstsq(system, rhs, rcond=None)
            alpha[free] = solution[:size]
        if np.any(alpha < -eps) or np.any(alpha > c + eps):
            continue
        if abs(y @ alpha) > 1e-7:
            continue
        value = objective(np.clip(alpha, 0.0, c))
        if value > best_obj:
            best_obj = value
            best_alpha = np.clip(alpha, 0.0, c)
    return best_obj, best_alpha
