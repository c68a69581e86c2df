"""Exact l1 minimization by enumerating basic solutions.

``min ||x||_1 s.t. A x = b`` is the LP ``min 1^T (x+ + x-)`` over
``[A, -A] (x+, x-) = b, x+- >= 0``.  A basis of ``[A, -A]`` that contains
both ``a_i`` and ``-a_i`` is singular, so every nonsingular basis is a
column subset ``S`` of ``A`` plus a sign for each member, and the split
point is feasible exactly when the signs agree with ``A_S^{-1} b``.  We
therefore solve each ``A_S`` once and read off the unique feasible sign
pattern.  Nothing here is shared with the iterative solvers.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .errors import TooLargeForOracle

BUDGET = 10**6
TIE_TOL = 1e-9
COND_LIMIT = 1e12


@dataclass(frozen=True)
class OracleResult:
    optimal_value: float
    optimizer: np.ndarray
    unique: bool
    bases_examined: int

    def to_dict(self):
        return {
            "optimal_value": self.optimal_value,
            "optimizer": [float(v) for v in self.optimizer],
            "unique": self.unique,
            "bases_examined": self.bases_examined,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["optimal_value"]), np.array(d["optimizer"], dtype=float),
                   bool(d["unique"]), int(d["bases_examined"]))


def basic_solutions(A, b):
    """All basic solutions of ``A x = b`` as rows of an array, plus a count.

    Singular or badly conditioned column subsets are skipped.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    subsets = np.array(list(combinations(range(n), m)), dtype=np.intp).reshape(-1, m)
    blocks = np.transpose(A[:, subsets], (1, 0, 2))  # (C, m, m)
    sv = np.linalg.svd(blocks, compute_uv=False)
    ok = sv[:, -1] > sv[:, 0] / COND_LIMIT
    subsets, blocks = subsets[ok], blocks[ok]
    sols = np.linalg.solve(blocks, np.broadcast_to(b, (len(blocks), m))[..., None])[..., 0]
    X = np.zeros((len(subsets), n))
    np.put_along_axis(X, subsets, sols, axis=1)
    # guard against inaccurate solves
    resid = np.abs(X @ A.T - b).max(axis=1) if len(X) else np.zeros(0)
    good = resid <= 1e-9 * (1.0 + np.abs(b).max())
    return X[good], int(ok.sum())


def solve_l1_exact(inst, budget=BUDGET):
    """Return the optimum of ``min ||x||_1 s.t. A x = b`` by enumeration.

    ``unique`` is True iff exactly one distinct basic solution attains the
    minimum (within 1e-9).
    """
    m, n = inst.A.shape
    if comb(2 * n, m) > budget:
        raise TooLargeForOracle(f"C({2 * n}, {m}) = {comb(2 * n, m)} exceeds budget {budget}")
    X, examined = basic_solutions(inst.A, inst.b)
    if len(X) == 0:
        raise TooLargeForOracle("no nonsingular basis found")
    vals = np.abs(X).sum(axis=1)
    best = vals.min()
    winners = X[vals <= best + TIE_TOL]
    distinct = [winners[0]]
    for x in winners[1:]:
        if all(np.abs(x - d).max() > TIE_TOL for d in distinct):
            distinct.append(x)
    x_star = winners[np.argmin(vals[vals <= best + TIE_TOL])]
    return OracleResult(float(np.abs(x_star).sum()), x_star, len(distinct) == 1, examined)


def shortest_path_length(g):
    """Hop distance from source to sink and the number of shortest paths."""
    adj = [[] for _ in range(g.vertex_count)]
    for t, h in g.edges:
        adj[t].append(h)
        adj[h].append(t)
    dist = [-1] * g.vertex_count
    count = [0] * g.vertex_count
    dist[g.source], count[g.source] = 0, 1
    frontier = [g.source]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
                if dist[v] == dist[u] + 1:
                    count[v] += count[u]
        frontier = nxt
    return dist[g.sink], count[g.sink]
