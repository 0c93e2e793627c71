"""Shared graph builders for the test suite."""

from __future__ import annotations

import io
import random
from pathlib import Path

import pytest

from modmax import Graph, load_edge_list

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def graph_from_text(text: str, weighted: bool = False) -> Graph:
    return load_edge_list(io.BytesIO(text.encode()), weighted=weighted)


def single_edge() -> Graph:
    return graph_from_text("0 1\n")


def path3() -> Graph:
    return graph_from_text("0 1\n1 2\n")


def triangle() -> Graph:
    return graph_from_text("0 1\n1 2\n0 2\n")


def barbell() -> Graph:
    """Two triangles {0,1,2} and {3,4,5} joined by the bridge 2-3."""
    return graph_from_text("0 1\n1 2\n0 2\n3 4\n4 5\n3 5\n2 3\n")


def erdos_renyi(n: int, p: float, seed: int, weighted: bool = False) -> Graph:
    """Seeded G(n, p); a fallback edge keeps the graph non-empty.

    Ids missing from every drawn edge are simply absent, so the node count
    can come out below n.
    """
    rng = random.Random(seed)
    lines = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                if weighted:
                    lines.append(f"{i} {j} {rng.uniform(0.1, 3.0):.6f}")
                else:
                    lines.append(f"{i} {j}")
    if not lines:
        lines.append("0 1")
    return graph_from_text("\n".join(lines) + "\n", weighted=weighted)


@pytest.fixture
def zachary() -> Graph:
    return load_edge_list(DATA_DIR / "zachary.txt")
