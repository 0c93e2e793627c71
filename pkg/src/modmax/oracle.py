"""Exhaustive ground truth for small instances.

Brute-force maximum modularity enumerates every set partition via restricted
growth strings (B(n) of them, so the node count is capped), and the
subproblem certifier checks a claimed single-node optimum against basis
vectors, all small supports, and random feasible vectors.
"""

from __future__ import annotations

import math
import random
from itertools import combinations
from typing import Iterator, Optional, Sequence

from .graph import Graph, Partition

DEFAULT_MAX_N = 12  # B(12) ~ 4.2e6 partitions


def set_partitions(n: int) -> Iterator[list]:
    """Yield every set partition of range(n) as an assignment list.

    Assignments are restricted growth strings (a[0] = 0 and each a[j] is at
    most 1 + max of the prefix), produced in lexicographic order, so each of
    the B(n) partitions appears exactly once.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        yield []
        return
    a = [0] * n
    b = [1] * n  # b[j] = 1 + max(a[:j]); a[j] may range over 0..b[j]
    while True:
        yield a.copy()
        j = n - 1
        while j > 0 and a[j] >= b[j]:
            j -= 1
        if j == 0:
            return
        a[j] += 1
        nb = max(b[j], a[j] + 1)
        for i in range(j + 1, n):
            a[i] = 0
            b[i] = nb


def brute_force_max_modularity(g: Graph, max_n: int = DEFAULT_MAX_N
                               ) -> tuple[float, Partition]:
    """Exact maximum of modularity over all set partitions of the nodes.

    Ties keep the first partition in enumeration order. Work grows with the
    Bell number B(n), so graphs above `max_n` nodes are refused.

    Raises:
        ValueError: n exceeds max_n, or the graph has no edge weight.
    """
    n = g.n
    if n > max_n:
        raise ValueError(
            f"brute force over set partitions is capped at {max_n} nodes "
            f"(got {n}); raise max_n only if you can afford B(n) evaluations")
    if g.two_m <= 0:
        raise ValueError("modularity is undefined for a graph with no edge weight")
    rows = g._row_ids().tolist()
    cols = g.indices.tolist()
    wts = g.weights.tolist()
    entries = list(zip(rows, cols, wts))
    deg = g.degrees.tolist()
    two_m = g.two_m
    best_q = -math.inf
    best_a: Optional[list] = None
    deg_tot = [0.0] * n
    for a in set_partitions(n):
        w_in = 0.0
        for i, j, w in entries:
            if a[i] == a[j]:
                w_in += w
        top = 0
        for i in range(n):
            c = a[i]
            deg_tot[c] += deg[i]
            if c > top:
                top = c
        null = 0.0
        for c in range(top + 1):
            null += deg_tot[c] * deg_tot[c]
            deg_tot[c] = 0.0
        q = w_in / two_m - null / (two_m * two_m)
        if q > best_q:
            best_q = q
            best_a = a
    return best_q, Partition(best_a)


def verify_subproblem_optimum(q: Sequence[float], k: int, v_claimed,
                              samples: int = 200, seed: int = 0,
                              tol: float = 1e-9) -> bool:
    """Certify a claimed optimum of max q.v over the k-cardinality unit sphere.

    Checks q.v_claimed against (a) every basis vector, (b) the best feasible
    vector on every support of size <= k when the dimension is at most 12,
    and (c) `samples` random feasible vectors. Returns False as soon as any
    alternative beats the claim by more than `tol`.
    """
    q = [float(v) for v in q]
    r = len(q)
    value = sum(q[t] * v for t, v in v_claimed if 0 <= t < r)
    for t in range(r):
        if q[t] > value + tol:
            return False
    if 0 < r <= 12:
        for size in range(1, min(k, r) + 1):
            for support in combinations(range(r), size):
                pos_sq = sum(q[t] * q[t] for t in support if q[t] > 0)
                cand = math.sqrt(pos_sq) if pos_sq > 0 else max(q[t] for t in support)
                if cand > value + tol:
                    return False
    rng = random.Random(seed)
    for _ in range(samples):
        size = rng.randint(1, max(1, min(k, r)))
        support = rng.sample(range(r), size) if r else []
        vals = [rng.random() for _ in support]
        norm = math.sqrt(sum(v * v for v in vals))
        if norm == 0.0:
            continue
        cand = sum(q[t] * v / norm for t, v in zip(support, vals))
        if cand > value + tol:
            return False
    return True

