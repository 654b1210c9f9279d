"""Pure-Python dynamic-programming core for generalized edit distances.

Drop-in twin of the compiled module ``foldrep._editdp``. Both walk the
classic O(|a|*|b|) recurrence with two rolling rows and accumulate costs in
the same order, so results agree bitwise with the compiled core and with a
left-associated recursive expansion of the optimal edit script.
"""

from math import sqrt

COMPILED = False


def lev_symbols(a, b, costs, indel):
    """Edit distance between two integer-encoded symbol sequences.

    ``costs[i][j]`` is the substitution cost between codes i and j;
    insertions and deletions each cost ``indel``.
    """
    n = len(a)
    m = len(b)
    cost_rows = [list(map(float, row)) for row in costs]
    prev = [0.0] * (m + 1)
    for j in range(1, m + 1):
        prev[j] = prev[j - 1] + indel
    if n == 0:
        return prev[m]
    cur = [0.0] * (m + 1)
    for i in range(1, n + 1):
        row = cost_rows[a[i - 1]]
        cur[0] = prev[0] + indel
        for j in range(1, m + 1):
            best = prev[j - 1] + row[b[j - 1]]
            dele = prev[j] + indel
            if dele < best:
                best = dele
            ins = cur[j - 1] + indel
            if ins < best:
                best = ins
            cur[j] = best
        prev, cur = cur, prev
    return prev[m]


def lev_vectors(a, b, scale, indel):
    """Edit distance between two sequences of real vectors.

    Substitution cost is min(1, scale * euclidean(u, v)); insertions and
    deletions each cost ``indel``.
    """
    aa = [tuple(map(float, row)) for row in a]
    bb = [tuple(map(float, row)) for row in b]
    n = len(aa)
    m = len(bb)
    prev = [0.0] * (m + 1)
    for j in range(1, m + 1):
        prev[j] = prev[j - 1] + indel
    if n == 0:
        return prev[m]
    cur = [0.0] * (m + 1)
    for i in range(1, n + 1):
        u = aa[i - 1]
        cur[0] = prev[0] + indel
        for j in range(1, m + 1):
            v = bb[j - 1]
            acc = 0.0
            for k in range(len(u)):
                d = u[k] - v[k]
                acc += d * d
            sub = scale * sqrt(acc)
            if sub > 1.0:
                sub = 1.0
            best = prev[j - 1] + sub
            dele = prev[j] + indel
            if dele < best:
                best = dele
            ins = cur[j - 1] + indel
            if ins < best:
                best = ins
            cur[j] = best
        prev, cur = cur, prev
    return prev[m]
