"""Directed acyclic graphs, CI statements, and the single-CI network construction.

Nodes are 0-indexed internally; labels are presentation-only. All values are
immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

import itertools
import random
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator

from .errors import (
    CycleError,
    DuplicateLabelError,
    InvalidStatementError,
    ParseError,
    UnknownLabelError,
)

LABEL_RE = re.compile(r"^[A-Za-z0-9_^]+$")


def _topological_order(node_count: int, edges: Iterable[tuple[int, int]]) -> list[int]:
    """Kahn's algorithm; raises CycleError if no topological order exists."""
    indeg = [0] * node_count
    children: list[list[int]] = [[] for _ in range(node_count)]
    for i, j in edges:
        indeg[j] += 1
        children[i].append(j)
    ready = deque(i for i in range(node_count) if indeg[i] == 0)
    order = []
    while ready:
        v = ready.popleft()
        order.append(v)
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    if len(order) != node_count:
        raise CycleError("edge set contains a directed cycle")
    return order


@dataclass(frozen=True)
class Dag:
    """A directed acyclic graph over indexed nodes.

    ``edges`` holds ordered (parent, child) index pairs. Construction
    validates index ranges, rejects self-loops, and checks acyclicity.
    """

    node_count: int
    edges: frozenset[tuple[int, int]] = frozenset()
    node_labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.node_count < 1:
            raise InvalidStatementError("node_count must be positive")
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        labels = tuple(self.node_labels) or tuple(f"v{i}" for i in range(self.node_count))
        if len(labels) != self.node_count:
            raise InvalidStatementError("node_labels length must equal node_count")
        if len(set(labels)) != len(labels):
            raise DuplicateLabelError("node labels must be distinct")
        for lab in labels:
            if not LABEL_RE.match(lab):
                raise ParseError(f"invalid node label {lab!r}")
        object.__setattr__(self, "node_labels", labels)
        for i, j in self.edges:
            if i == j:
                raise CycleError(f"self-loop at node {i}")
            if not (0 <= i < self.node_count and 0 <= j < self.node_count):
                raise InvalidStatementError(f"edge ({i}, {j}) out of range")
        _topological_order(self.node_count, self.edges)

    @cached_property
    def parents(self) -> tuple[frozenset[int], ...]:
        out = [set() for _ in range(self.node_count)]
        for i, j in self.edges:
            out[j].add(i)
        return tuple(frozenset(s) for s in out)

    @cached_property
    def children(self) -> tuple[frozenset[int], ...]:
        out = [set() for _ in range(self.node_count)]
        for i, j in self.edges:
            out[i].add(j)
        return tuple(frozenset(s) for s in out)

    @cached_property
    def topological_order(self) -> tuple[int, ...]:
        return tuple(_topological_order(self.node_count, self.edges))

    def descendants(self, node: int) -> frozenset[int]:
        """Nodes reachable from ``node`` by a directed path of length >= 1."""
        seen: set[int] = set()
        stack = list(self.children[node])
        while stack:
            v = stack.pop()
            if v not in seen:
                seen.add(v)
                stack.extend(self.children[v])
        return frozenset(seen)

    def ancestors_of_set(self, nodes: Iterable[int]) -> frozenset[int]:
        """The given nodes plus every node with a directed path into them."""
        seen = set(nodes)
        stack = list(seen)
        while stack:
            v = stack.pop()
            for p in self.parents[v]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return frozenset(seen)

    def index_of(self, label: str) -> int:
        try:
            return self.node_labels.index(label)
        except ValueError:
            raise UnknownLabelError(f"unknown node label {label!r}") from None

    def remove_edge(self, edge: tuple[int, int]) -> "Dag":
        return Dag(self.node_count, self.edges - {edge}, self.node_labels)


@dataclass(frozen=True)
class CiStatement:
    """A disjoint triple (A, C, B) asserting that A and B are independent given C.

    Statements are stored in a canonical orientation: the A/B sides may be
    swapped on construction so that symmetric statements compare equal.
    """

    a: frozenset[int]
    c: frozenset[int]
    b: frozenset[int]

    def __post_init__(self):
        a, c, b = frozenset(self.a), frozenset(self.c), frozenset(self.b)
        if not a or not b:
            raise InvalidStatementError("A and B must be nonempty")
        if a & b or a & c or b & c:
            raise InvalidStatementError("A, B, C must be pairwise disjoint")
        for v in a | b | c:
            if not isinstance(v, int) or v < 0:
                raise InvalidStatementError("node indices must be nonnegative integers")
        if tuple(sorted(a)) > tuple(sorted(b)):
            a, b = b, a
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "b", b)

    @property
    def nodes(self) -> frozenset[int]:
        return self.a | self.b | self.c

    def sort_key(self):
        return (tuple(sorted(self.a)), tuple(sorted(self.c)), tuple(sorted(self.b)))

    def __repr__(self):
        fmt = lambda s: "{" + ",".join(map(str, sorted(s))) + "}"
        return f"CiStatement({fmt(self.a)} _||_ {fmt(self.b)} | {fmt(self.c)})"


@dataclass(frozen=True)
class CiSet:
    """A set of CI statements, deduplicated under the A<->B symmetry."""

    statements: frozenset[CiStatement] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "statements", frozenset(self.statements))

    def __contains__(self, stmt: CiStatement) -> bool:
        return stmt in self.statements

    def __iter__(self) -> Iterator[CiStatement]:
        return iter(sorted(self.statements, key=CiStatement.sort_key))

    def __len__(self) -> int:
        return len(self.statements)

    def __or__(self, other: "CiSet") -> "CiSet":
        return CiSet(self.statements | other.statements)

    def issubset(self, other: "CiSet") -> bool:
        return self.statements <= other.statements


def parse_dag(text: str) -> Dag:
    """Parse the DAG file format.

    First non-comment line is ``nodes: <label>+``; each following line is
    ``<label> -> <label>``. ``#`` starts a comment.
    """
    labels: list[str] | None = None
    edges: set[tuple[int, int]] = set()
    index: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if labels is None:
            if not line.startswith("nodes:"):
                raise ParseError(f"line {lineno}: expected 'nodes:' header")
            labels = line[len("nodes:"):].split()
            if not labels:
                raise ParseError(f"line {lineno}: empty node list")
            for lab in labels:
                if not LABEL_RE.match(lab):
                    raise ParseError(f"line {lineno}: invalid label {lab!r}")
                if lab in index:
                    raise DuplicateLabelError(f"line {lineno}: duplicate label {lab!r}")
                index[lab] = len(index)
            continue
        parts = line.split("->")
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected '<label> -> <label>'")
        src, dst = parts[0].strip(), parts[1].strip()
        for lab in (src, dst):
            if lab not in index:
                raise UnknownLabelError(f"line {lineno}: unknown label {lab!r}")
        edges.add((index[src], index[dst]))
    if labels is None:
        raise ParseError("missing 'nodes:' header")
    return Dag(len(labels), frozenset(edges), tuple(labels))


def dag_to_text(g: Dag) -> str:
    """Serialize a Dag in the DAG file format (inverse of parse_dag)."""
    lines = ["nodes: " + " ".join(g.node_labels)]
    for i, j in sorted(g.edges):
        lines.append(f"{g.node_labels[i]} -> {g.node_labels[j]}")
    return "\n".join(lines) + "\n"


def dag_to_dot(g: Dag) -> str:
    """Serialize a Dag as standard DOT digraph text."""
    lines = ["digraph G {"]
    for lab in g.node_labels:
        lines.append(f'  "{lab}";')
    for i, j in sorted(g.edges):
        lines.append(f'  "{g.node_labels[i]}" -> "{g.node_labels[j]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def local_ci_set(g: Dag) -> CiSet:
    """The per-node statements "node is independent of its non-descendants
    given its parents", omitting nodes whose non-descendant set is empty.

    The non-descendant set of i excludes i itself, its parents, and its
    descendants.
    """
    stmts = set()
    for i in range(g.node_count):
        ndes = set(range(g.node_count)) - g.descendants(i) - g.parents[i] - {i}
        if ndes:
            stmts.add(CiStatement(frozenset({i}), g.parents[i], frozenset(ndes)))
    return CiSet(frozenset(stmts))


def single_ci_network(n: int, stmt: CiStatement) -> Dag:
    """Build the network whose implied CI set contains exactly the given
    statement: complete index-ordered graphs within A, B, C and the
    remainder R, plus the edge families C x A, C x B, and (A|B|C) x R.
    """
    if any(v >= n for v in stmt.nodes):
        raise InvalidStatementError("statement references nodes outside [0, n)")
    a, b, c = stmt.a, stmt.b, stmt.c
    rest = frozenset(range(n)) - a - b - c
    edges: set[tuple[int, int]] = set()
    for group in (a, b, c, rest):
        members = sorted(group)
        edges.update((i, j) for i, j in itertools.combinations(members, 2))
    edges.update((i, j) for i in c for j in a)
    edges.update((i, j) for i in c for j in b)
    edges.update((i, j) for i in (a | b | c) for j in rest)
    return Dag(n, frozenset(edges))


def random_dag(rng: random.Random, n: int, edge_prob: float = 0.5,
               labels: tuple[str, ...] = ()) -> Dag:
    """A random DAG: random topological order, each compatible edge kept
    independently with probability ``edge_prob``.
    """
    order = list(range(n))
    rng.shuffle(order)
    edges = set()
    for pos_i in range(n):
        for pos_j in range(pos_i + 1, n):
            if rng.random() < edge_prob:
                edges.add((order[pos_i], order[pos_j]))
    return Dag(n, frozenset(edges), labels)
