"""Low-cardinality nonnegative unit vectors over a growable community space.

Vectors are stored sparsely as index-sorted (coordinate, value) pairs with at
most k strictly positive entries and unit 2-norm. The Embedding keeps the
degree-weighted sum z = sum_j d_j v_j and per-coordinate occupancy counts up
to date incrementally, so one coordinate-ascent step never touches more than
the coordinates a node and its neighbors actually use.
"""

from __future__ import annotations

import heapq
import math
from typing import Optional, Sequence

SparseVec = list  # list[tuple[int, float]], index-sorted, positive values

# Accumulator entries below this magnitude are dropped to bound cancellation drift.
DROP_TOL = 1e-13


def topk_plus(q, k: int) -> SparseVec:
    """Keep the k largest strictly positive coordinates of q, zero the rest.

    Ties are broken toward the lower coordinate index. Accepts a dense
    sequence, a {coordinate: value} dict, or (coordinate, value) pairs; the
    result is index-sorted and unnormalized, empty when q has no positive
    coordinate.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if isinstance(q, dict):
        items = q.items()
    elif q and isinstance(q[0], tuple):
        items = q
    else:
        items = enumerate(q)
    pos = [(t, v) for t, v in items if v > 0.0]
    if len(pos) > k:
        pos = heapq.nlargest(k, pos, key=lambda e: (e[1], -e[0]))
    pos.sort()
    return pos


def normalized(vec: SparseVec) -> SparseVec:
    norm = math.sqrt(sum(v * v for _, v in vec))
    if norm <= 0.0:
        raise ValueError("cannot normalize an empty or zero vector")
    return [(t, v / norm) for t, v in vec]


def basis(t: int, r: int) -> SparseVec:
    """Unit vector e(t) in an r-dimensional community space."""
    if not 0 <= t < r:
        raise ValueError(f"coordinate {t} out of range [0, {r})")
    return [(t, 1.0)]


def dot(u: SparseVec, v: SparseVec) -> float:
    """Sparse dot product via sorted merge, O(card(u) + card(v))."""
    total = 0.0
    a, b = 0, 0
    while a < len(u) and b < len(v):
        tu, vu = u[a]
        tv, vv = v[b]
        if tu == tv:
            total += vu * vv
            a += 1
            b += 1
        elif tu < tv:
            a += 1
        else:
            b += 1
    return total


def axpy_into(acc: dict, scale: float, vec: SparseVec, drop_tol: float = DROP_TOL) -> dict:
    """acc += scale * vec on a sparse dict accumulator, dropping tiny entries."""
    for t, v in vec:
        nv = acc.get(t, 0.0) + scale * v
        if abs(nv) < drop_tol:
            acc.pop(t, None)
        else:
            acc[t] = nv
    return acc


def check_unit_vec(vec: SparseVec, k: int, tol: float = 1e-9) -> None:
    """Assert feasibility: sorted support, positive entries, card <= k, unit norm."""
    if len(vec) > k:
        raise AssertionError(f"cardinality {len(vec)} exceeds {k}")
    for a, b in zip(vec, vec[1:]):
        if a[0] >= b[0]:
            raise AssertionError("indices not strictly increasing")
    if any(v <= 0 for _, v in vec):
        raise AssertionError("stored values must be strictly positive")
    norm_sq = sum(v * v for _, v in vec)
    if abs(norm_sq - 1.0) > tol:
        raise AssertionError(f"norm^2 = {norm_sq} is not 1 within {tol}")


class Embedding:
    """Per-node sparse unit vectors plus maintained z and occupancy.

    The community-space dimension r starts at the node count and grows only
    when a node must move to an empty community and no vacated coordinate is
    available for reuse (LIFO free list). A full z recomputation runs every n
    updates to re-zero accumulated floating-point error.
    """

    __slots__ = ("n", "k", "r", "vectors", "z", "occupancy", "_free",
                 "_deg", "_updates", "_refresh_every")

    def __init__(self, graph, k: int, partition=None):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.n = graph.n
        self.k = k
        self.r = graph.n
        self._deg = graph.degrees.tolist()
        if partition is None:
            init = list(range(self.n))
        else:
            init = partition.compacted().assignment.tolist()
        self.vectors: list[SparseVec] = [[(c, 1.0)] for c in init]
        self.occupancy = [0] * self.r
        for c in init:
            self.occupancy[c] += 1
        # LIFO free list; seeded descending so fresh pops hand out low ids first
        self._free = [t for t in range(self.r - 1, -1, -1) if self.occupancy[t] == 0]
        self.z: dict[int, float] = {}
        self._updates = 0
        self._refresh_every = max(self.n, 1)
        self.refresh_z()

    def refresh_z(self) -> None:
        """Recompute z = sum_j d_j v_j from scratch."""
        z: dict[int, float] = {}
        for i, vec in enumerate(self.vectors):
            d = self._deg[i]
            if d != 0.0:
                axpy_into(z, d, vec)
        self.z = z

    def allocate_free_coordinate(self) -> int:
        """Pop a vacated coordinate, or grow r by one when none is free."""
        while self._free:
            t = self._free.pop()
            if self.occupancy[t] == 0:
                return t
        if self.r >= self.n * self.k:
            raise AssertionError(f"community space would exceed n*k = {self.n * self.k}")
        t = self.r
        self.r += 1
        self.occupancy.append(0)
        return t

    def set_vector(self, i: int, new: SparseVec) -> bool:
        """Replace v_i, updating z and occupancy; returns False on a no-op."""
        old = self.vectors[i]
        if new == old:
            return False
        d = self._deg[i]
        occ = self.occupancy
        z = self.z
        a, b = 0, 0
        while a < len(old) or b < len(new):
            ta = old[a][0] if a < len(old) else None
            tb = new[b][0] if b < len(new) else None
            if tb is None or (ta is not None and ta < tb):
                t, va = old[a]
                a += 1
                occ[t] -= 1
                if occ[t] == 0:
                    self._free.append(t)
                    z.pop(t, None)  # exact: no occupants means z_t = 0
                else:
                    nv = z.get(t, 0.0) - d * va
                    if abs(nv) < DROP_TOL:
                        z.pop(t, None)
                    else:
                        z[t] = nv
            elif ta is None or tb < ta:
                t, vb = new[b]
                b += 1
                occ[t] += 1
                if d != 0.0:
                    z[t] = z.get(t, 0.0) + d * vb
            else:
                va, vb = old[a][1], new[b][1]
                t = ta
                a += 1
                b += 1
                delta = d * (vb - va)
                if delta != 0.0:
                    nv = z.get(t, 0.0) + delta
                    if abs(nv) < DROP_TOL:
                        z.pop(t, None)
                    else:
                        z[t] = nv
        self.vectors[i] = new
        self._updates += 1
        if self._updates % self._refresh_every == 0:
            self.refresh_z()
        return True

    def check_invariants(self, tol: float = 1e-8) -> None:
        """Verify unit norms, occupancy counts, z consistency, and the r bound."""
        if self.r > self.n * self.k:
            raise AssertionError("r exceeds n*k")
        occ = [0] * self.r
        for vec in self.vectors:
            check_unit_vec(vec, self.k)
            for t, _ in vec:
                occ[t] += 1
        if occ != self.occupancy:
            raise AssertionError("occupancy counts out of sync")
        fresh: dict[int, float] = {}
        for i, vec in enumerate(self.vectors):
            axpy_into(fresh, self._deg[i], vec)
        for t in set(fresh) | set(self.z):
            if abs(fresh.get(t, 0.0) - self.z.get(t, 0.0)) > tol:
                raise AssertionError(f"z[{t}] drifted beyond {tol}")

    def write(self, stream) -> None:
        """Dump one "node_id idx:val idx:val ..." line per node."""
        for i, vec in enumerate(self.vectors):
            body = " ".join(f"{t}:{v:.12g}" for t, v in vec)
            stream.write(f"{i} {body}\n" if body else f"{i}\n")
