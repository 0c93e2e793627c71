"""Multi-level community detection drivers.

Three pipelines share one level loop: the classic greedy local-move +
aggregate (louvain), greedy + refinement (leiden), and the low-cardinality
embedding variant (locale), where each level runs a bounded embedding phase
followed by k=1 rounding. Refinement re-clusters every community from
singletons with moves restricted to the community, which splits internally
disconnected groups before aggregation; the incoming communities then seed
the next level. Extra full passes reuse the previous flat partition as the
starting point.

The greedy local move is implemented directly on discrete assignments (not
as a k=1 embedding run) so the two routes can cross-check each other
move-for-move.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .embedding import Embedding
from .graph import Graph, Partition, aggregate, dense_labels, modularity
from .locale import (RingQueue, STAGNATION_TOL, ValidationLog,
                     locale_embeddings, locale_rounding)

ALGORITHMS = ("louvain", "leiden", "locale")


@dataclass
class RunConfig:
    """Knobs for one detection run."""
    algorithm: str = "locale"
    k: int = 8
    inner_rounds: Optional[int] = 2  # None runs the embedding phase to convergence
    iterations: int = 1
    seed: Optional[int] = None
    validated: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.inner_rounds is not None and self.inner_rounds < 1:
            raise ValueError("inner_rounds must be >= 1 or None")


@dataclass
class LevelRecord:
    """One multi-level stage: sizes and flat modularity after rounding."""
    nodes: int
    communities: int
    modularity: float
    seconds: float


@dataclass
class IterationRecord:
    """One full multi-level pass."""
    modularity: float
    seconds: float
    levels: list = field(default_factory=list)


class RefineAggregate(NamedTuple):
    """Result of one refine-and-aggregate step."""
    graph: Graph
    partition: Partition  # incoming communities on the aggregated nodes
    done: bool
    node_map: np.ndarray  # level node -> aggregated node id


def greedy_local_move(g: Graph, p: Optional[Partition] = None, *, order=None,
                      move_log: Optional[list] = None) -> Partition:
    """Exact discrete local move to convergence; returns a compacted partition.

    Starts from p (singletons when omitted) and repeatedly moves the popped
    node to the community with the best modularity gain, with an empty
    community winning over strictly negative gains. Ordering, tie-breaking,
    empty-community reuse, and stopping rules all match the embedding loop at
    k = 1, which is what `move_log` (a list collecting (node, community)
    moves) lets tests verify.
    """
    n = g.n
    if p is None:
        comm = list(range(n))
    else:
        if p.n != n:
            raise ValueError(f"partition covers {p.n} nodes, graph has {g.n}")
        comm = p.compacted().assignment.tolist()
    if n == 0 or g.two_m <= 0:
        return Partition(comm)

    deg = g.degrees.tolist()
    two_m = g.two_m
    m = two_m / 2.0
    r = n
    deg_tot = [0.0] * r
    size = [0] * r
    for i, c in enumerate(comm):
        deg_tot[c] += deg[i]
        size[c] += 1
    free = [c for c in range(r - 1, -1, -1) if size[c] == 0]

    queue = RingQueue(order if order is not None else range(n), n)
    stagnant = 0
    while queue:
        i = queue.pop()
        ci = comm[i]
        d = deg[i]
        w_to = {ci: 0.0}
        for j, w in g.row(i):
            if j != i:
                w_to[comm[j]] = w_to.get(comm[j], 0.0) + w
        if d != 0.0:
            scale = d / two_m
            for c in w_to:
                w_to[c] -= scale * (deg_tot[c] - (d if c == ci else 0.0))
        # Exact argmax mirroring the k=1 embedding selection: best positive
        # entry (ties to the lower id), else an empty community when all
        # entries are negative, else the zero-gain tie-break favoring the
        # current community and then the lower id.
        best_c, best_q = None, 0.0
        for c, q in w_to.items():
            if q > 0.0 and (best_c is None or q > best_q
                            or (q == best_q and c < best_c)):
                best_c, best_q = c, q
        if best_c is None:
            m1 = max(w_to.values())
            if m1 < 0.0:
                while free:
                    c = free.pop()
                    if size[c] == 0:
                        break
                else:
                    r += 1
                    deg_tot.append(0.0)
                    size.append(0)
                    c = r - 1
                best_c, best_q = c, 0.0
            else:
                ties = [c for c, q in w_to.items() if q == m1]
                best_c = ci if ci in ties else min(ties)
                best_q = m1
        gain = best_q - w_to[ci]
        if best_c != ci:
            comm[i] = best_c
            deg_tot[ci] -= d
            deg_tot[best_c] += d
            size[ci] -= 1
            size[best_c] += 1
            if size[ci] == 0:
                free.append(ci)
            if move_log is not None:
                move_log.append((i, best_c))
            for j, _ in g.row(i):
                if j != i:
                    queue.push(j)
        if gain / m < STAGNATION_TOL:
            stagnant += 1
            if stagnant >= n:
                break
        else:
            stagnant = 0
    return Partition(comm).compacted()


def _refine(g: Graph, p: Partition, *, order=None, validation=None) -> Partition:
    """Restricted rounding from singletons: splits disconnected communities."""
    e = Embedding(g, 1)
    return locale_rounding(g, p, e, restricted=True, order=order,
                           validation=validation)


def refine_and_aggregate(g: Graph, p: Partition, *, order=None,
                         validation=None) -> RefineAggregate:
    """Refine p within its communities, then contract the refined partition.

    `done` signals a stationary level: the incoming partition keeps every node
    alone, so further levels cannot merge anything new. The returned partition
    places each aggregated node (one refined piece) in the community of p it
    came from, seeding the next level; `node_map` is kept so flat partitions
    on the original nodes can be reconstructed.
    """
    if p.n != g.n:
        raise ValueError(f"partition covers {p.n} nodes, graph has {g.n}")
    done = p.community_count == g.n
    refined = _refine(g, p, order=order, validation=validation)
    node_map = refined.assignment  # already dense, first-appearance order
    coarse = np.empty(int(node_map.max()) + 1 if len(node_map) else 0,
                      dtype=np.int64)
    coarse[node_map] = p.assignment
    return RefineAggregate(aggregate(g, refined), Partition(coarse), done,
                           node_map.copy())


def flatten(stack) -> Partition:
    """Compose per-level assignments down to the original node ids.

    Every element maps one level's nodes to the next level's ids; the last
    maps to final community ids.

    Raises:
        ValueError: consecutive levels have inconsistent sizes.
    """
    if not stack:
        raise ValueError("empty partition stack")
    flat = np.asarray(stack[0] if not isinstance(stack[0], Partition)
                      else stack[0].assignment, dtype=np.int64)
    for level in stack[1:]:
        nxt = np.asarray(level if not isinstance(level, Partition)
                         else level.assignment, dtype=np.int64)
        if len(flat) and (flat.max() >= len(nxt) or flat.min() < 0):
            raise ValueError("inconsistent partition stack: id out of range")
        flat = nxt[flat]
    return Partition(flat)


def leiden_locale(g: Graph, cfg: RunConfig, *,
                  validation: Optional[ValidationLog] = None
                  ) -> tuple[Partition, list[IterationRecord]]:
    """Run the full multi-level method; returns the flat partition and trace.

    Per level: optimize (embeddings + rounding, or the greedy move for the
    baselines), then refine and aggregate until a level is stationary.
    louvain skips refinement and aggregates the moved partition directly.
    Additional iterations restart from the previous flat partition.
    """
    if g.n == 0 or g.two_m <= 0:
        raise ValueError("cannot run community detection on an empty graph")
    if cfg.validated and validation is None:
        validation = ValidationLog()
    rng = random.Random(cfg.seed) if cfg.seed is not None else None

    def draw_order(n: int):
        if rng is None:
            return None
        order = list(range(n))
        rng.shuffle(order)
        return order

    flat: Optional[Partition] = None
    records: list[IterationRecord] = []
    for _ in range(cfg.iterations):
        t_iter = time.perf_counter()
        level_g = g
        init = flat
        maps: list[np.ndarray] = []
        levels: list[LevelRecord] = []
        while True:
            t_level = time.perf_counter()
            if cfg.algorithm == "locale":
                emb = locale_embeddings(level_g, init, cfg.k, cfg.inner_rounds,
                                        order=draw_order(level_g.n),
                                        validation=validation)
                part = locale_rounding(level_g, init, emb,
                                       order=draw_order(level_g.n),
                                       validation=validation)
            else:
                part = greedy_local_move(level_g, init,
                                         order=draw_order(level_g.n))
            flat_now = flatten(maps + [part]) if maps else part
            levels.append(LevelRecord(level_g.n, part.community_count,
                                      modularity(g, flat_now),
                                      time.perf_counter() - t_level))
            if part.community_count == level_g.n:
                break
            if cfg.algorithm == "louvain":
                refined = part.compacted()
                next_init = None  # one node per community: singleton start
            else:
                refined = _refine(level_g, part, order=draw_order(level_g.n),
                                  validation=validation)
                node_map = refined.assignment
                coarse = np.empty(int(node_map.max()) + 1, dtype=np.int64)
                coarse[node_map] = part.assignment
                next_init = Partition(coarse)
            agg = aggregate(level_g, refined)
            if agg.n == level_g.n:
                break  # refinement re-split everything: no progress possible
            maps.append(refined.assignment)
            level_g = agg
            init = next_init
        flat = flatten(maps + [part]).compacted()
        records.append(IterationRecord(modularity(g, flat),
                                       time.perf_counter() - t_iter, levels))
    return flat, records
