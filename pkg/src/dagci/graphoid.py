"""Semigraphoid closure of a CI set.

The engine applies the four standard inference rules (symmetry,
decomposition, weak union, contraction) to a worklist until no new
statement appears. The rules are probabilistically sound but incomplete, so
membership in the closure certifies implication while absence proves
nothing.
"""

from __future__ import annotations

import itertools
from collections import deque
from typing import Iterable

from .dag import CiSet, CiStatement
from .errors import InvalidStatementError, TooManyNodesError

ENUMERATION_CAP = 10


def _proper_nonempty_subsets(s: frozenset[int]):
    members = sorted(s)
    for size in range(1, len(members)):
        for combo in itertools.combinations(members, size):
            yield frozenset(combo)


def _orientations(stmt: CiStatement):
    yield stmt.a, stmt.c, stmt.b
    yield stmt.b, stmt.c, stmt.a


def semigraphoid_closure(s: CiSet | Iterable[CiStatement], n: int,
                         max_nodes: int = ENUMERATION_CAP) -> CiSet:
    """Least fixed point of the statement set under the four semigraphoid
    rules, restricted to statements with nonempty A and B. Symmetry is
    handled by the canonical statement orientation.
    """
    if n > max_nodes:
        raise TooManyNodesError(f"closure capped at {max_nodes} nodes, got {n}")
    seeds = list(s)
    for stmt in seeds:
        if any(v >= n for v in stmt.nodes):
            raise InvalidStatementError(f"{stmt} references nodes outside [0, {n})")

    closed: set[CiStatement] = set()
    pending: deque[CiStatement] = deque(seeds)
    while pending:
        stmt = pending.popleft()
        if stmt in closed:
            continue
        closed.add(stmt)
        derived: list[CiStatement] = []
        for x, z, y in _orientations(stmt):
            # X _||_ (Y',W) | Z gives X _||_ Y' | Z (decomposition) and
            # X _||_ Y' | (Z,W) (weak union), for every split of Y.
            for w in _proper_nonempty_subsets(y):
                rest = y - w
                derived.append(CiStatement(x, z, rest))
                derived.append(CiStatement(x, z | w, rest))
        # Contraction: X _||_ Y | Z together with X _||_ W | (Z,Y) gives
        # X _||_ (Y,W) | Z. Try the processed statement in both roles
        # against everything derived so far.
        for other in closed:
            for first, second in ((stmt, other), (other, stmt)):
                for x1, z1, y1 in _orientations(first):
                    for x2, z2, w2 in _orientations(second):
                        if x2 == x1 and z2 == z1 | y1:
                            derived.append(CiStatement(x1, z1, y1 | w2))
        for d in derived:
            if d not in closed:
                pending.append(d)
    return CiSet(frozenset(closed))


def closure_implies(s: CiSet | Iterable[CiStatement], target: CiStatement, n: int,
                    max_nodes: int = ENUMERATION_CAP) -> bool:
    """Whether the target statement is derivable from ``s`` under the
    semigraphoid rules. A False result is not a refutation.
    """
    if any(v >= n for v in target.nodes):
        raise InvalidStatementError("target references nodes outside the universe")
    return target in semigraphoid_closure(s, n, max_nodes)
