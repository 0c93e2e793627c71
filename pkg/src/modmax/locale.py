"""Block coordinate ascent on low-cardinality embeddings.

One step optimizes a single node's vector exactly: the subproblem is linear
in v_i, so the maximizer is the normalized top-k positive part of the
gradient, or a basis vector (best occupied coordinate, else an empty
community) when no gradient entry is positive. The loop runs over a FIFO
ring queue, re-enqueueing only neighbors of nodes that moved, and stops on
queue exhaustion, a sweep budget, or stagnating gains.

The working gradient is kept unscaled (2m times the true one); the update is
invariant to positive rescaling, and validated mode rescales where the
projected-gradient diagnostics need the true value.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .embedding import Embedding, SparseVec, axpy_into, dot, normalized, topk_plus
from .graph import Graph, Partition, dense_labels

# Stop after n consecutive updates whose modularity increment is below this.
STAGNATION_TOL = 1e-8

# Slack allowed when checking the per-update descent inequality.
DESCENT_SLACK = 1e-9


class RingQueue:
    """FIFO node queue with O(1) membership test; each node queued at most once."""

    __slots__ = ("_dq", "_member")

    def __init__(self, order, n: int):
        self._dq = deque(order)
        self._member = bytearray(n)
        for i in self._dq:
            self._member[i] = 1

    def __len__(self) -> int:
        return len(self._dq)

    def pop(self) -> int:
        i = self._dq.popleft()
        self._member[i] = 0
        return i

    def push(self, i: int) -> None:
        if not self._member[i]:
            self._member[i] = 1
            self._dq.append(i)


@dataclass
class AscentStats:
    """Counters from one coordinate-ascent run."""
    pops: int = 0
    moves: int = 0
    stagnated: bool = False


@dataclass
class ValidationLog:
    """Per-update projected-gradient diagnostics (validated mode).

    For every update this records the squared residual of the projected
    gradient step and the realized modularity increment, and flags any
    violation of ||P(v_i + grad)-v_i||^2 <= 2*dQ + slack. Steps that shrink
    the cardinality bound below the current support (the first rounding
    sweep) fall outside the inequality's premise and are only counted.
    """
    checks: int = 0
    transitions: int = 0
    violations: list = field(default_factory=list)
    residual_sq_sum: float = 0.0
    gain_scaled_sum: float = 0.0

    def record(self, g: Graph, i: int, grad: dict, v_old: SparseVec,
               gain: float, k: int) -> None:
        if len(v_old) > k:
            self.transitions += 1
            return
        scale = 1.0 / g.two_m
        x = {t: q * scale for t, q in grad.items()}
        for t, v in v_old:
            x[t] = x.get(t, 0.0) + v
        rsq = projection_residual_sq(x, k, v_old)
        dq = 2.0 * gain / g.two_m
        self.checks += 1
        self.residual_sq_sum += rsq
        self.gain_scaled_sum += dq
        if rsq > 2.0 * dq + DESCENT_SLACK:
            self.violations.append((i, rsq, dq))


def _restrict_labels(restrict) -> Optional[list]:
    if restrict is None:
        return None
    if isinstance(restrict, Partition):
        return restrict.assignment.tolist()
    return list(restrict)


def gradient(g: Graph, e: Embedding, i: int, restrict=None) -> dict:
    """Unscaled subproblem gradient for node i on its candidate support.

    Returns sum_{j in N(i), j != i} a_ij v_j - (d_i/2m)(z - d_i v_i) as a
    sparse dict covering the coordinates used by i's neighbors and by v_i
    itself; every other occupied coordinate is strictly nonpositive and every
    empty one is exactly zero, so this support suffices for the exact update.
    The self-loop term a_ii v_i is excluded: it is constant on the unit
    sphere, and dropping it keeps the update exact on aggregated graphs.
    When `restrict` is given the neighbor sum only sees j in i's community.
    """
    return _gradient(g, e, i, _restrict_labels(restrict))


def _gradient(g: Graph, e: Embedding, i: int, labels: Optional[list]) -> dict:
    q: dict[int, float] = {}
    vectors = e.vectors
    if labels is not None:
        mine = labels[i]
        for j, w in g.row(i):
            if j != i and labels[j] == mine:
                for t, v in vectors[j]:
                    q[t] = q.get(t, 0.0) + w * v
    else:
        for j, w in g.row(i):
            if j != i:
                for t, v in vectors[j]:
                    q[t] = q.get(t, 0.0) + w * v
    d = e._deg[i]
    vi = vectors[i]
    for t, _ in vi:
        q.setdefault(t, 0.0)
    if d != 0.0:
        scale = d / g.two_m
        z = e.z
        own = dict(vi)
        for t in q:
            q[t] -= scale * (z.get(t, 0.0) - d * own.get(t, 0.0))
    return q


def _select(q: dict, k: int, v_old: SparseVec, e: Embedding) -> SparseVec:
    """Closed-form subproblem optimum for gradient q (may allocate a coordinate)."""
    pos = topk_plus(q, k)
    if pos:
        return normalized(pos)
    # q <= 0 on every occupied candidate: an empty community (gradient exactly
    # zero) wins when the best entry is strictly negative; at zero ties the
    # node prefers its previous support, then the lowest index.
    best = max(q.values())
    if best < 0.0:
        return [(e.allocate_free_coordinate(), 1.0)]
    prev = dict(v_old)
    t_best = max((t for t, v in q.items() if v == best),
                 key=lambda t: (prev.get(t, 0.0), -t))
    return [(t_best, 1.0)]


def locale_update(g: Graph, e: Embedding, i: int, k: int, restrict=None,
                  validation: Optional[ValidationLog] = None
                  ) -> tuple[SparseVec, float]:
    """Apply the exact single-node update; returns (new v_i, unscaled gain).

    The gain is grad . (v_new - v_old); dividing by m = two_m/2 gives the
    exact modularity increment of the step.
    """
    return _update(g, e, i, k, _restrict_labels(restrict), validation)


def _update(g: Graph, e: Embedding, i: int, k: int, labels, validation
            ) -> tuple[SparseVec, float]:
    q = _gradient(g, e, i, labels)
    v_old = e.vectors[i]
    v_new = _select(q, k, v_old, e)
    gain = (sum(q.get(t, 0.0) * v for t, v in v_new)
            - sum(q[t] * v for t, v in v_old))
    if validation is not None:
        validation.record(g, i, q, v_old, gain, k)
    e.set_vector(i, v_new)
    return v_new, gain


def _ascend(g: Graph, e: Embedding, k: int, rounds: Optional[int] = None,
            restrict=None, order=None, validation=None,
            move_log: Optional[list] = None) -> AscentStats:
    """Run the ring-queue ascent loop until convergence or the sweep budget."""
    stats = AscentStats()
    n = g.n
    if n == 0 or g.two_m <= 0:
        return stats
    labels = _restrict_labels(restrict)
    queue = RingQueue(order if order is not None else range(n), n)
    limit = None if rounds is None else rounds * n
    m = g.two_m / 2.0
    stagnant = 0
    while queue:
        if limit is not None and stats.pops >= limit:
            break
        i = queue.pop()
        stats.pops += 1
        v_old = e.vectors[i]
        v_new, gain = _update(g, e, i, k, labels, validation)
        if v_new != v_old:
            stats.moves += 1
            if move_log is not None:
                move_log.append((i, v_new))
            for j, _ in g.row(i):
                if j != i:
                    queue.push(j)
        if gain / m < STAGNATION_TOL:
            stagnant += 1
            if stagnant >= n:
                stats.stagnated = True
                break
        else:
            stagnant = 0
    return stats


def locale_embeddings(g: Graph, p: Optional[Partition], k: int,
                      rounds: Optional[int] = 2, *, order=None,
                      validation=None, move_log=None) -> Embedding:
    """Optimize k-cardinality embeddings starting from partition p.

    Each node starts at the basis vector of its community (its own index for
    the singleton partition). `rounds` caps the run at that many sweeps of n
    queue pops; None runs to convergence. `move_log` collects
    (node, new vector) pairs for trajectory comparisons.
    """
    e = Embedding(g, k, partition=p)
    _ascend(g, e, k, rounds=rounds, order=order, validation=validation,
            move_log=move_log)
    return e


def locale_rounding(g: Graph, p: Optional[Partition], e: Embedding, *,
                    restricted: bool = False, order=None,
                    validation=None) -> Partition:
    """Round an embedding to a discrete partition by re-running with k = 1.

    The first sweep collapses every vector to unit cardinality; the loop then
    continues to convergence and the surviving support indices become the
    community ids (compacted). With `restricted` the neighbor sums only see
    j inside p's communities, which is the Leiden-style refinement move.
    """
    restrict = p if restricted else None
    _ascend(g, e, 1, rounds=None, restrict=restrict, order=order,
            validation=validation)
    labels = []
    for vec in e.vectors:
        if len(vec) != 1:
            raise AssertionError("rounding left a vector with cardinality != 1")
        labels.append(vec[0][0])
    dense, _ = dense_labels(np.asarray(labels, dtype=np.int64))
    return Partition(dense)


def embedding_objective(g: Graph, e: Embedding) -> float:
    """Exact relaxed modularity Q(V), including diagonal terms.

    Computed from scratch (fresh z), for reports and tests rather than the
    inner loop.
    """
    if g.two_m <= 0:
        raise ValueError("objective is undefined for a graph with no edge weight")
    vectors = e.vectors
    adj_term = 0.0
    for i in range(g.n):
        vi = vectors[i]
        for j, w in g.row(i):
            adj_term += w * dot(vi, vectors[j])
    z: dict[int, float] = {}
    for i, vec in enumerate(vectors):
        axpy_into(z, g.degrees[i], vec, drop_tol=0.0)
    null_term = sum(v * v for v in z.values()) / g.two_m
    return (adj_term - null_term) / g.two_m


def projection_residual_sq(x: dict, k: int, v_old: SparseVec) -> float:
    """||P(x) - v_old||^2 where P projects onto the k-cardinality unit sphere.

    Projection under the 2-norm maximizes x . v over the constraint set, so
    it reuses the closed-form selection; an empty community (value exactly 0)
    is always available as a target, mirroring the update's growth rule.
    """
    prev = dict(v_old)
    pos = topk_plus(x, k)
    if pos:
        proj = normalized(pos)
        sq = 0.0
        pd = dict(proj)
        for t in set(pd) | set(prev):
            diff = pd.get(t, 0.0) - prev.get(t, 0.0)
            sq += diff * diff
        return sq
    best = max(x.values()) if x else 0.0
    if best < 0.0:
        return 2.0  # basis of a fresh coordinate, disjoint from v_old
    t_best = max((t for t, v in x.items() if v == best),
                 key=lambda t: (prev.get(t, 0.0), -t))
    return 2.0 - 2.0 * prev.get(t_best, 0.0)


def projected_gradient_norm(g: Graph, e: Embedding, k: int) -> float:
    """||P(V + grad Q(V)) - V|| with the true 1/(2m)-scaled gradient."""
    total = 0.0
    scale = 1.0 / g.two_m
    for i in range(g.n):
        q = gradient(g, e, i)
        x = {t: v * scale for t, v in q.items()}
        for t, v in e.vectors[i]:
            x[t] = x.get(t, 0.0) + v
        total += projection_residual_sq(x, k, e.vectors[i])
    return math.sqrt(total)


@dataclass
class UpdateSnapshot:
    """Before/after record of one locale_update, for the descent check."""
    node: int
    v_before: SparseVec
    v_after: SparseVec
    grad_unscaled: dict
    gain_unscaled: float


def descent_inequality_check(g: Graph, e: Embedding, snap: UpdateSnapshot,
                             k: int) -> bool:
    """Check ||P(v_i + grad)-v_i||^2 <= 2*(Q(v+) - Q(v)) + 1e-9 for one update."""
    scale = 1.0 / g.two_m
    x = {t: v * scale for t, v in snap.grad_unscaled.items()}
    for t, v in snap.v_before:
        x[t] = x.get(t, 0.0) + v
    lhs = projection_residual_sq(x, k, snap.v_before)
    dq = 2.0 * snap.gain_unscaled / g.two_m
    return lhs <= 2.0 * dq + DESCENT_SLACK
