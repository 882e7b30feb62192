"""Matched wrap-around distance, minimum separation, and resolution checks.

The matched distance between two equal-size frequency sets is the exact
bottleneck-assignment optimum of the wrap-around error: the permutation
minimizing the worst per-frequency error on the unit circle. Small sets
are solved by enumeration; larger ones by binary search over candidate
error levels with a bipartite perfect-matching feasibility test. Ties
between optimal permutations resolve to the lexicographically smallest
one so results are deterministic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .exceptions import CardinalityMismatchError, SingleFrequencyError
from .linalg import validate_frequencies

BRUTE_FORCE_MAX = 8


@dataclass(frozen=True)
class MatchReport:
    """Optimal matching between an estimated and a reference frequency set.

    ``permutation[k]`` is the index of the estimate paired with reference
    frequency ``k``; ``md`` equals ``max(per_freq_errors)``.
    """

    md: float
    permutation: tuple[int, ...]
    per_freq_errors: np.ndarray


def wrap_distance(a: float, b: float) -> float:
    """Distance on the unit circle: ``min(|a-b| mod 1, 1 - |a-b| mod 1)``."""
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


def _cost_matrix(truth: np.ndarray, est: np.ndarray) -> np.ndarray:
    d = np.abs(truth[:, None] - est[None, :]) % 1.0
    return np.minimum(d, 1.0 - d)


def matched_distance(est, truth) -> MatchReport:
    """Exact matched (wrap-around) distance between two frequency sets.

    Minimizes over permutations the maximum circular error between paired
    frequencies. Both sets must have the same cardinality.
    """
    e = validate_frequencies(est)
    t = validate_frequencies(truth)
    if e.size != t.size:
        raise CardinalityMismatchError(f"sets have sizes {e.size} and {t.size}")
    cost = _cost_matrix(t, e)
    if t.size <= BRUTE_FORCE_MAX:
        perm = _brute_force_assignment(cost)
    else:
        perm = _bottleneck_assignment(cost)
    errors = cost[np.arange(t.size), perm]
    return MatchReport(md=float(errors.max()), permutation=tuple(int(j) for j in perm),
                       per_freq_errors=errors)


def _brute_force_assignment(cost: np.ndarray) -> np.ndarray:
    k = cost.shape[0]
    rows = np.arange(k)
    best_perm = None
    best_val = np.inf
    for perm in itertools.permutations(range(k)):
        val = cost[rows, perm].max()
        if val < best_val:
            best_val = val
            best_perm = perm
    return np.asarray(best_perm)


def _has_perfect_matching(adj: np.ndarray) -> bool:
    if adj.shape[0] == 0:
        return True
    if not adj.any(axis=1).all() or not adj.any(axis=0).all():
        return False
    match = maximum_bipartite_matching(csr_matrix(adj), perm_type="column")
    return bool((match >= 0).all())


def _bottleneck_assignment(cost: np.ndarray) -> np.ndarray:
    k = cost.shape[0]
    levels = np.unique(cost)
    lo, hi = 0, levels.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _has_perfect_matching(cost <= levels[mid]):
            hi = mid
        else:
            lo = mid + 1
    threshold = levels[lo]
    # lexicographically smallest permutation achieving the bottleneck value
    allowed = cost <= threshold
    perm = np.full(k, -1, dtype=int)
    free_cols = list(range(k))
    for row in range(k):
        for pos, col in enumerate(free_cols):
            if not allowed[row, col]:
                continue
            rest_rows = np.arange(row + 1, k)
            rest_cols = free_cols[:pos] + free_cols[pos + 1 :]
            if _has_perfect_matching(allowed[np.ix_(rest_rows, rest_cols)]):
                perm[row] = col
                free_cols.pop(pos)
                break
        if perm[row] < 0:  # cannot happen once threshold is feasible
            raise AssertionError("bottleneck assignment lost feasibility")
    return perm


def min_separation(freqs) -> float:
    """Smallest pairwise wrap-around distance within a frequency set."""
    f = validate_frequencies(freqs)
    if f.size < 2:
        raise SingleFrequencyError("separation needs at least two frequencies")
    cost = _cost_matrix(f, f)
    return float(cost[np.triu_indices(f.size, k=1)].min())


def resolution_achieved(est, truth) -> bool:
    """Whether the estimate resolves the reference set.

    True iff the matched distance is strictly below half the minimum
    separation of the reference frequencies.
    """
    report = matched_distance(est, truth)
    return report.md < min_separation(truth) / 2.0
