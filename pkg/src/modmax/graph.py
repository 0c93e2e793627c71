"""Sparse undirected weighted graphs, modularity, and partition-driven aggregation.

Graphs are stored in compressed sparse row form with every ordered entry
present (both (i, j) and (j, i); a self-loop contributes one diagonal entry).
All modularity-style sums therefore run over ordered pairs including i = j,
which makes aggregation preserve modularity exactly.
"""

from __future__ import annotations

from pathlib import Path
from typing import IO, Iterable, Iterator

import numpy as np


class EdgeListError(ValueError):
    """Malformed or invalid edge-list input, with the offending line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def dense_labels(assignment: np.ndarray) -> tuple[np.ndarray, int]:
    """Relabel arbitrary community ids to 0..C-1 in first-appearance order."""
    uniq, first, inverse = np.unique(assignment, return_index=True, return_inverse=True)
    rank = np.empty(len(uniq), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(uniq))
    return rank[inverse], len(uniq)


class Partition:
    """Per-node community assignment with derived community bookkeeping."""

    __slots__ = ("assignment",)

    def __init__(self, assignment: Iterable[int]):
        arr = np.asarray(assignment, dtype=np.int64)
        if arr.ndim != 1:
            raise ValueError("assignment must be one-dimensional")
        self.assignment = arr

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(np.arange(n, dtype=np.int64))

    @property
    def n(self) -> int:
        return len(self.assignment)

    @property
    def community_count(self) -> int:
        return len(np.unique(self.assignment))

    def members(self) -> dict[int, list[int]]:
        """Community id -> sorted list of member nodes."""
        out: dict[int, list[int]] = {}
        for i, c in enumerate(self.assignment.tolist()):
            out.setdefault(c, []).append(i)
        return out

    def compacted(self) -> "Partition":
        """Same grouping with dense ids 0..C-1 in first-appearance order."""
        labels, _ = dense_labels(self.assignment)
        return Partition(labels)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.assignment, other.assignment)

    def __repr__(self) -> str:
        return f"Partition({self.assignment.tolist()})"


class Graph:
    """Immutable undirected weighted graph in CSR layout.

    Attributes:
        n: node count.
        indptr, indices, weights: CSR arrays; neighbor lists sorted by id and
            duplicate-free, one diagonal entry per self-loop.
        degrees: d_i = sum of row i weights (diagonal counted once).
        two_m: total of all ordered entries, equals degrees.sum().
        node_labels: original input ids, indexed by dense node id.
    """

    __slots__ = ("n", "indptr", "indices", "weights", "degrees", "two_m",
                 "node_labels", "_rows")

    def __init__(self, indptr, indices, weights, node_labels=None):
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.n = len(self.indptr) - 1
        if np.any(self.weights < 0):
            raise ValueError("edge weights must be nonnegative")
        degrees = np.zeros(self.n)
        np.add.at(degrees, self._row_ids(), self.weights)
        self.degrees = degrees
        self.two_m = float(self.weights.sum())
        if node_labels is None:
            node_labels = np.arange(self.n, dtype=np.int64)
        self.node_labels = np.asarray(node_labels, dtype=np.int64)
        self._rows = None

    @classmethod
    def from_entries(cls, n: int, entries: dict[tuple[int, int], float],
                     node_labels=None) -> "Graph":
        """Build from a symmetric {(i, j): weight} map (diagonal stored once)."""
        keys = sorted(entries)
        indices = np.fromiter((j for _, j in keys), dtype=np.int64, count=len(keys))
        weights = np.fromiter((entries[k] for k in keys), dtype=np.float64, count=len(keys))
        counts = np.zeros(n, dtype=np.int64)
        for i, _ in keys:
            counts[i] += 1
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return cls(indptr, indices, weights, node_labels)

    def _row_ids(self) -> np.ndarray:
        return np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))

    def row(self, i: int) -> list[tuple[int, float]]:
        """Neighbor list of node i as (neighbor, weight) pairs, sorted by id."""
        if self._rows is None:
            idx = self.indices.tolist()
            wts = self.weights.tolist()
            ptr = self.indptr.tolist()
            self._rows = [list(zip(idx[ptr[i]:ptr[i + 1]], wts[ptr[i]:ptr[i + 1]]))
                          for i in range(self.n)]
        return self._rows[i]

    def edge_count(self) -> int:
        """Number of undirected edges, counting each self-loop once."""
        diag = int(np.count_nonzero(self.indices == self._row_ids()))
        return (len(self.indices) - diag) // 2 + diag

    def validate(self) -> None:
        """Check CSR invariants; raises ValueError on the first violation."""
        rows = self._row_ids()
        for i in range(self.n):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            nbrs = self.indices[lo:hi]
            if np.any(np.diff(nbrs) <= 0):
                raise ValueError(f"row {i}: neighbors not strictly increasing")
        order = np.lexsort((rows, self.indices))
        mirror_i = self.indices[order]
        mirror_j = rows[order]
        if not (np.array_equal(rows, mirror_i) and np.array_equal(self.indices, mirror_j)
                and np.allclose(self.weights, self.weights[order], rtol=0, atol=0)):
            raise ValueError("adjacency is not symmetric")
        row_sums = np.zeros(self.n)
        np.add.at(row_sums, rows, self.weights)
        if not np.allclose(row_sums, self.degrees, rtol=1e-12, atol=0):
            raise ValueError("degrees do not match row sums")
        if self.two_m > 0 and abs(self.degrees.sum() - self.two_m) > 1e-12 * self.two_m:
            raise ValueError("two_m does not match degree total")


def _iter_lines(source) -> Iterator[tuple[int, str]]:
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            yield from enumerate((ln.decode("utf-8") for ln in fh), start=1)
        return
    if isinstance(source, bytes):
        yield from enumerate(source.decode("utf-8").splitlines(), start=1)
        return
    for lineno, line in enumerate(source, start=1):
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        yield lineno, line


def load_edge_list(source, weighted: bool = False) -> Graph:
    """Parse a SNAP-style edge list into a Graph.

    Lines are "u v" or "u v w"; '#' starts a comment line; blank lines are
    skipped. Node ids are arbitrary nonnegative ints, remapped to dense
    0..n-1 in first-appearance order. Duplicate undirected edges have their
    weights summed; "u u w" stores a self-loop of weight w. Without the
    weighted flag every edge has weight 1 and any third column is ignored.

    Raises:
        EdgeListError: malformed line or non-positive weight.
    """
    remap: dict[int, int] = {}
    entries: dict[tuple[int, int], float] = {}

    def node_id(token: str, lineno: int) -> int:
        try:
            raw = int(token)
        except ValueError:
            raise EdgeListError(lineno, f"not an integer node id: {token!r}") from None
        if raw < 0:
            raise EdgeListError(lineno, f"negative node id: {raw}")
        dense = remap.get(raw)
        if dense is None:
            dense = len(remap)
            remap[raw] = dense
        return dense

    for lineno, line in _iter_lines(source):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        if len(parts) not in (2, 3):
            raise EdgeListError(lineno, f"expected 2 or 3 fields, got {len(parts)}")
        u = node_id(parts[0], lineno)
        v = node_id(parts[1], lineno)
        w = 1.0
        if weighted and len(parts) == 3:
            try:
                w = float(parts[2])
            except ValueError:
                raise EdgeListError(lineno, f"not a number: {parts[2]!r}") from None
            if w < 0:
                raise EdgeListError(lineno, f"negative weight: {w}")
            if w == 0:
                raise EdgeListError(lineno, "zero weight edge")
        if u == v:
            entries[(u, u)] = entries.get((u, u), 0.0) + w
        else:
            entries[(u, v)] = entries.get((u, v), 0.0) + w
            entries[(v, u)] = entries.get((v, u), 0.0) + w

    labels = np.fromiter(remap.keys(), dtype=np.int64, count=len(remap))
    return Graph.from_entries(len(remap), entries, labels)


def write_edge_list(dest, g: Graph) -> None:
    """Serialize a graph as "u v w" lines (upper triangle, original ids)."""
    close = False
    if isinstance(dest, (str, Path)):
        dest = open(dest, "w", encoding="utf-8")
        close = True
    try:
        labels = g.node_labels.tolist()
        rows = g._row_ids().tolist()
        cols = g.indices.tolist()
        wts = g.weights.tolist()
        for i, j, w in zip(rows, cols, wts):
            if i <= j:
                dest.write(f"{labels[i]} {labels[j]} {w!r}\n")
    finally:
        if close:
            dest.close()


def modularity(g: Graph, p: Partition) -> float:
    """Newman modularity of the partition, per ordered-pair convention.

    Q = (1/2m) sum_ij [a_ij - d_i d_j / 2m] delta(c_i = c_j), with the i = j
    terms included.

    Raises:
        ValueError: empty graph (two_m == 0) or partition/graph size mismatch.
    """
    if g.two_m <= 0:
        raise ValueError("modularity is undefined for a graph with no edge weight")
    if p.n != g.n:
        raise ValueError(f"partition covers {p.n} nodes, graph has {g.n}")
    labels, count = dense_labels(p.assignment)
    same = labels[g._row_ids()] == labels[g.indices]
    w_in = float(g.weights[same].sum())
    deg_tot = np.bincount(labels, weights=g.degrees, minlength=count)
    return w_in / g.two_m - float(np.sum((deg_tot / g.two_m) ** 2))


def aggregate(g: Graph, p: Partition) -> Graph:
    """Contract each community to one node, summing ordered-pair weights.

    The output diagonal a_cc collects all ordered intra-community entries, so
    modularity of any coarser partition is preserved exactly; output degrees
    are the community degree totals and two_m is unchanged.
    """
    if p.n != g.n:
        raise ValueError(f"partition covers {p.n} nodes, graph has {g.n}")
    labels, count = dense_labels(p.assignment)
    ci = labels[g._row_ids()]
    cj = labels[g.indices]
    pair_ids = ci * count + cj
    uniq, inverse = np.unique(pair_ids, return_inverse=True)
    sums = np.bincount(inverse, weights=g.weights)
    entries = {(int(pid) // count, int(pid) % count): float(w)
               for pid, w in zip(uniq, sums)}
    return Graph.from_entries(count, entries)


def community_is_connected(g: Graph, p: Partition, c: int) -> bool:
    """True iff the subgraph induced by community c's members is connected."""
    members = np.flatnonzero(p.assignment == c)
    if len(members) == 0:
        raise ValueError(f"unknown community id: {c}")
    member_set = set(members.tolist())
    start = int(members[0])
    seen = {start}
    stack = [start]
    while stack:
        i = stack.pop()
        for j, w in g.row(i):
            if w > 0 and j in member_set and j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == len(member_set)


def write_partition(dest, g: Graph, p: Partition) -> None:
    """Write "original_node_id community_id" lines sorted by node id."""
    if p.n != g.n:
        raise ValueError(f"partition covers {p.n} nodes, graph has {g.n}")
    close = False
    if isinstance(dest, (str, Path)):
        dest = open(dest, "w", encoding="utf-8")
        close = True
    try:
        pairs = sorted(zip(g.node_labels.tolist(), p.assignment.tolist()))
        for label, comm in pairs:
            dest.write(f"{label} {comm}\n")
    finally:
        if close:
            dest.close()


def read_partition(source, g: Graph) -> Partition:
    """Read a partition file back, aligned to the graph's dense node ids.

    Raises:
        ValueError: unknown node id, duplicate entry, or missing nodes.
    """
    label_to_dense = {int(lab): i for i, lab in enumerate(g.node_labels.tolist())}
    assignment = np.full(g.n, -1, dtype=np.int64)
    for lineno, line in _iter_lines(source):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        if len(parts) != 2:
            raise EdgeListError(lineno, f"expected 2 fields, got {len(parts)}")
        try:
            label, comm = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListError(lineno, f"not an integer pair: {text!r}") from None
        dense = label_to_dense.get(label)
        if dense is None:
            raise EdgeListError(lineno, f"unknown node id: {label}")
        if assignment[dense] != -1:
            raise EdgeListError(lineno, f"duplicate assignment for node {label}")
        assignment[dense] = comm
    if np.any(assignment == -1):
        missing = g.node_labels[assignment == -1][:5].tolist()
        raise ValueError(f"partition is missing nodes, e.g. {missing}")
    return Partition(assignment)
