"""Re-score a translation lattice with word-level confidence labels.

Edges whose word is labeled good get their cost reduced by the reward;
edges labeled bad are penalized.  A continuous variant scales the reward by
(2 * p_good - 1), so p_good = 0.5 is neutral.  Words without a confidence
entry keep their baseline cost.  The best path is found by topological
relaxation over the acyclic graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isfinite
from typing import Callable, Mapping, Optional, Union

from .types import Label, ValidationError


@dataclass(frozen=True)
class Edge:
    head: int
    tail: int
    word: str
    cost: float


@dataclass(frozen=True)
class Lattice:
    """Directed acyclic word graph; by convention node 0 is the start and
    node n_nodes-1 the end unless stated otherwise."""

    n_nodes: int
    edges: tuple[Edge, ...]
    start: int = 0
    end: Optional[int] = None

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValidationError("lattice needs at least one node")
        end = self.n_nodes - 1 if self.end is None else self.end
        object.__setattr__(self, "end", end)
        if not (0 <= self.start < self.n_nodes and 0 <= end < self.n_nodes):
            raise ValidationError("start/end nodes out of range")
        for e in self.edges:
            if not (0 <= e.head < self.n_nodes and 0 <= e.tail < self.n_nodes):
                raise ValidationError(f"edge {e} references a node outside 0..{self.n_nodes - 1}")
            if not isfinite(e.cost):
                raise ValidationError(f"edge {e} has non-finite cost")
        _topological_order(self)  # raises on cycles
        forward = _reachable(self, forward=True)
        backward = _reachable(self, forward=False)
        for v in range(self.n_nodes):
            if v not in forward or v not in backward:
                raise ValidationError(f"node {v} lies on no start-to-end path")


def _reachable(lat: "Lattice", forward: bool) -> set[int]:
    adj: dict[int, list[int]] = {}
    for e in lat.edges:
        a, b = (e.head, e.tail) if forward else (e.tail, e.head)
        adj.setdefault(a, []).append(b)
    seen = {lat.start if forward else lat.end}
    stack = list(seen)
    while stack:
        v = stack.pop()
        for w in adj.get(v, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def read_lattice(path) -> Lattice:
    """Text format: header ``NODES n``, then ``from to word cost`` lines."""
    edges = []
    with open(path, encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 2 or header[0] != "NODES":
            raise ValidationError("lattice file must start with 'NODES n'")
        try:
            n_nodes = int(header[1])
        except ValueError:
            raise ValidationError(f"bad node count {header[1]!r}") from None
        for lineno, line in enumerate(f, 2):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ValidationError(f"line {lineno}: expected 'from to word cost'")
            try:
                edges.append(Edge(int(parts[0]), int(parts[1]), parts[2], float(parts[3])))
            except ValueError:
                raise ValidationError(f"line {lineno}: malformed edge") from None
    return Lattice(n_nodes, tuple(edges))


def write_lattice(lat: Lattice, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"NODES {lat.n_nodes}\n")
        for e in lat.edges:
            f.write(f"{e.head} {e.tail} {e.word} {e.cost!r}\n")


Confidence = Union[Mapping[str, object], Callable[[str], object]]


def _adjustment(value, reward: float, penalty: float) -> float:
    if value is None:
        return 0.0
    if isinstance(value, Label):
        return -reward if value is Label.G else penalty
    p_good = float(value)
    if not 0.0 <= p_good <= 1.0:
        raise ValidationError(f"confidence {p_good} outside [0,1]")
    return -reward * (2.0 * p_good - 1.0)


def _topological_order(lat: Lattice) -> list[int]:
    children: list[list[int]] = [[] for _ in range(lat.n_nodes)]
    indeg = [0] * lat.n_nodes
    for i, e in enumerate(lat.edges):
        children[e.head].append(i)
        indeg[e.tail] += 1
    queue = [v for v in range(lat.n_nodes) if indeg[v] == 0]
    order = []
    while queue:
        v = queue.pop()
        order.append(v)
        for ei in children[v]:
            t = lat.edges[ei].tail
            indeg[t] -= 1
            if indeg[t] == 0:
                queue.append(t)
    if len(order) != lat.n_nodes:
        raise ValidationError("lattice contains a cycle")
    return order


def rescore(
    lat: Lattice,
    confidence: Confidence,
    reward: float = 0.0,
    penalty: float = 0.0,
) -> tuple[list[str], float]:
    """Best start-to-end path after confidence adjustment.

    ``confidence`` maps a word to a :class:`Label`, a good-probability in
    [0,1], or None for "no information"; it may be a mapping or a callable.
    Returns the word sequence and its adjusted total cost.
    """
    if reward < 0 or penalty < 0:
        raise ValidationError("reward and penalty must be >= 0")
    lookup = confidence if callable(confidence) else confidence.get
    adjusted = [
        e.cost + _adjustment(lookup(e.word), reward, penalty) for e in lat.edges
    ]
    order = _topological_order(lat)
    INF = float("inf")
    dist = [INF] * lat.n_nodes
    back: list[Optional[int]] = [None] * lat.n_nodes
    dist[lat.start] = 0.0
    by_head: list[list[int]] = [[] for _ in range(lat.n_nodes)]
    for i, e in enumerate(lat.edges):
        by_head[e.head].append(i)
    for v in order:
        if dist[v] == INF:
            continue
        for ei in by_head[v]:
            e = lat.edges[ei]
            cand = dist[v] + adjusted[ei]
            if cand < dist[e.tail]:
                dist[e.tail] = cand
                back[e.tail] = ei
    if dist[lat.end] == INF:
        raise ValidationError(f"end node {lat.end} unreachable from start {lat.start}")
    words = []
    node = lat.end
    while node != lat.start:
        ei = back[node]
        words.append(lat.edges[ei].word)
        node = lat.edges[ei].head
    return list(reversed(words)), dist[lat.end]
