"""Maximum-weight perfect matching with reproducible tie-breaking."""

from __future__ import annotations

from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment


def max_assignment(weights, tol: float = 1e-12) -> tuple[tuple[int, ...], float]:
    """Return ``(pi, value)`` maximizing ``sum_i weights[i, pi[i]]``.

    The optimal value comes from the Hungarian algorithm. Among optimal
    permutations the lexicographically smallest is returned: positions are
    fixed greedily, keeping the smallest column that still allows the
    optimum to be reached.
    """
    W = np.asarray(weights, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError(f"assignment needs a square matrix, got shape {W.shape}")
    n = W.shape[0]
    if n == 0:
        return (), 0.0
    rows, cols = linear_sum_assignment(W, maximize=True)
    best = float(W[rows, cols].sum())
    slack = tol * max(1.0, abs(best)) * n

    perm: list[int] = []
    free_rows = list(range(n))
    free_cols = list(range(n))
    acc = 0.0
    for i in range(n):
        free_rows.remove(i)
        for j in sorted(free_cols):
            rest_cols = [c for c in free_cols if c != j]
            if rest_cols:
                sub = W[np.ix_(free_rows, rest_cols)]
                r, c = linear_sum_assignment(sub, maximize=True)
                rest = float(sub[r, c].sum())
            else:
                rest = 0.0
            if acc + W[i, j] + rest >= best - slack:
                perm.append(j)
                acc += W[i, j]
                free_cols.remove(j)
                break
    return tuple(perm), best


def brute_force_assignment(weights) -> tuple[tuple[int, ...], float]:
    """Factorial enumeration; the first maximizer in lexicographic order."""
    W = np.asarray(weights, dtype=float)
    n = W.shape[0]
    best_perm, best = None, -np.inf
    for perm in permutations(range(n)):
        v = float(sum(W[i, perm[i]] for i in range(n)))
        if v > best + 1e-12:
            best_perm, best = perm, v
    return tuple(best_perm), best
