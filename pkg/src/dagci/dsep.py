"""d-separation queries, implied CI sets, and the k=1 inclusion problem."""

from __future__ import annotations

import itertools
from collections import deque
from typing import Iterable, Iterator

from .dag import CiSet, CiStatement, Dag
from .errors import (
    InvalidStatementError,
    NodeCountMismatchError,
    ParseError,
    TooManyNodesError,
    UnknownLabelError,
)

ENUMERATION_CAP = 10

_UP = 0    # arrived against an edge (from a child), or a start node
_DOWN = 1  # arrived along an edge (from a parent)


def _validate_query(g: Dag, a: frozenset[int], b: frozenset[int], c: frozenset[int]):
    if not a or not b:
        raise InvalidStatementError("A and B must be nonempty")
    if a & b or a & c or b & c:
        raise InvalidStatementError("A, B, C must be pairwise disjoint")
    for v in a | b | c:
        if not (0 <= v < g.node_count):
            raise InvalidStatementError(f"node {v} outside [0, {g.node_count})")


def d_separated(g: Dag, a: Iterable[int], b: Iterable[int], c: Iterable[int]) -> bool:
    """Whether every path between A and B is blocked given C.

    Reachability (ball-passing) formulation, linear in the edge count: walk
    (node, direction) states from A; a collider may only be crossed when it
    has a descendant in C, a non-collider only when it is outside C.
    """
    a, b, c = frozenset(a), frozenset(b), frozenset(c)
    _validate_query(g, a, b, c)
    anc_c = g.ancestors_of_set(c)
    queue = deque((x, _UP) for x in a)
    visited: set[tuple[int, int]] = set()
    while queue:
        y, direction = queue.popleft()
        if (y, direction) in visited:
            continue
        visited.add((y, direction))
        if y in b:
            return False
        if direction == _UP and y not in c:
            for p in g.parents[y]:
                queue.append((p, _UP))
            for ch in g.children[y]:
                queue.append((ch, _DOWN))
        elif direction == _DOWN:
            if y not in c:
                for ch in g.children[y]:
                    queue.append((ch, _DOWN))
            if y in anc_c:
                for p in g.parents[y]:
                    queue.append((p, _UP))
    return True


def d_separated_by_paths(g: Dag, a: Iterable[int], b: Iterable[int], c: Iterable[int]) -> bool:
    """Brute-force oracle: enumerate all simple undirected paths from A to B
    and test the path-blocking criterion on each. Exponential; for
    cross-validation on small graphs only.
    """
    a, b, c = frozenset(a), frozenset(b), frozenset(c)
    _validate_query(g, a, b, c)
    desc_hits_c = [bool(g.descendants(v) & c) for v in range(g.node_count)]
    neighbors: list[list[tuple[int, bool]]] = [[] for _ in range(g.node_count)]
    for i, j in g.edges:
        neighbors[i].append((j, False))  # leaving i along i -> j
        neighbors[j].append((i, True))   # leaving j against i -> j

    def active_path_exists(start: int) -> bool:
        # Stack entries: (node, arrived_into, path_nodes). arrived_into is True
        # when the previous edge points into the node (None at the start).
        stack: list[tuple[int, bool | None, frozenset[int]]] = [
            (start, None, frozenset({start}))
        ]
        while stack:
            node, arrived_into, path = stack.pop()
            for nxt, leaves_against in neighbors[node]:
                if nxt in path:
                    continue
                if arrived_into is not None:
                    # ``node`` is interior: apply the blocking rules to it.
                    collider = arrived_into and leaves_against
                    if collider:
                        if node not in c and not desc_hits_c[node]:
                            continue
                    else:
                        if node in c:
                            continue
                if nxt in b:
                    return True
                stack.append((nxt, not leaves_against, path | {nxt}))
        return False

    return not any(active_path_exists(x) for x in a)


def all_ci_statements(n: int) -> Iterator[CiStatement]:
    """All disjoint triples with nonempty A and B over n nodes, one
    representative per A<->B symmetry class (min(A|B) placed in A).
    """
    for roles in itertools.product(range(4), repeat=n):
        a = frozenset(i for i, r in enumerate(roles) if r == 1)
        b = frozenset(i for i, r in enumerate(roles) if r == 2)
        if not a or not b:
            continue
        if min(a | b) not in a:
            continue
        c = frozenset(i for i, r in enumerate(roles) if r == 3)
        yield CiStatement(a, c, b)


def implied_ci_set(g: Dag, max_nodes: int = ENUMERATION_CAP) -> CiSet:
    """All CI statements d-separated in g (the network's implied CI set).

    Enumerates every disjoint triple, so the node count is capped
    (4**n queries).
    """
    if g.node_count > max_nodes:
        raise TooManyNodesError(
            f"implied_ci_set capped at {max_nodes} nodes, got {g.node_count}"
        )
    return CiSet(frozenset(
        s for s in all_ci_statements(g.node_count) if d_separated(g, s.a, s.b, s.c)
    ))


def inclusion_implies(g1: Dag, g0: Dag, max_nodes: int = ENUMERATION_CAP) -> bool:
    """Whether g1 implies g0: every CI implied by g0 is d-separated in g1."""
    if g1.node_count != g0.node_count:
        raise NodeCountMismatchError("g1 and g0 must share a node count")
    for stmt in implied_ci_set(g0, max_nodes):
        if not d_separated(g1, stmt.a, stmt.b, stmt.c):
            return False
    return True


# --- CI statement text syntax: "A1,A2 _||_ B1 | C1,C2" ----------------------

def _parse_side(text: str, index: dict[str, int]) -> frozenset[int]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    out = set()
    for name in names:
        if name not in index:
            raise UnknownLabelError(f"unknown label {name!r} in CI statement")
        out.add(index[name])
    return frozenset(out)


def parse_ci(text: str, labels: Iterable[str]) -> CiStatement:
    """Parse ``A1,A2 _||_ B1 | C1,C2`` against an ordered label list.

    The ``| ...`` part is optional and means C is empty.
    """
    index = {lab: i for i, lab in enumerate(labels)}
    if "_||_" not in text:
        raise ParseError("CI statement must contain '_||_'")
    left, right = text.split("_||_", 1)
    if "|" in right:
        mid, cond = right.split("|", 1)
    else:
        mid, cond = right, ""
    a = _parse_side(left, index)
    b = _parse_side(mid, index)
    c = _parse_side(cond, index)
    if not a or not b:
        raise InvalidStatementError("both sides of '_||_' must be nonempty")
    return CiStatement(a, c, b)


def format_ci(stmt: CiStatement, labels: Iterable[str]) -> str:
    labels = tuple(labels)
    side = lambda s: ",".join(labels[i] for i in sorted(s))
    out = f"{side(stmt.a)} _||_ {side(stmt.b)}"
    if stmt.c:
        out += f" | {side(stmt.c)}"
    return out


def parse_ci_set(text: str) -> tuple[CiSet, tuple[str, ...]]:
    """Parse a CI-set file: optional ``vars: <label>+`` header, then one CI
    statement per line. Without a header, labels are indexed in order of
    first appearance. Returns the set and the ordered label tuple.
    """
    labels: list[str] = []
    declared = False
    stmt_lines: list[str] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not declared and not stmt_lines and line.startswith("vars:"):
            labels = line[len("vars:"):].split()
            declared = True
            continue
        stmt_lines.append(line)
    if not declared:
        seen = set()
        for line in stmt_lines:
            for token in line.replace("_||_", " ").replace("|", " ").replace(",", " ").split():
                if token not in seen:
                    seen.add(token)
                    labels.append(token)
    stmts = {parse_ci(line, labels) for line in stmt_lines}
    return CiSet(frozenset(stmts)), tuple(labels)
