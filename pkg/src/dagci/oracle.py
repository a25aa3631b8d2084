"""Numerical search for distributions that satisfy antecedent constraints
while violating a target CI.

The search runs independent random restarts. Each restart samples a
structure (a DAG in which the antecedents hold for every factorization,
when one can be found), fills it with random conditional tables, and
hill-climbs by coordinate-wise multiplicative perturbation with simplex
renormalization. Functional dependencies are imposed structurally through
deterministic tables, never by penalty. Every candidate is re-verified with
the exact/approximate predicates before it is returned; an empty result is
inconclusive, never a proof.
"""

from __future__ import annotations

import itertools
import math
import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .dag import CiSet, CiStatement, Dag, local_ci_set, random_dag
from .dist import JointDist, check_ci, check_fd, satisfies_network
from .dsep import d_separated
from .errors import InvalidStatementError, NodeCountMismatchError
from .graphoid import closure_implies

DENSE_TABLE_CAP = 4096
CLOSURE_PRECHECK_NODES = 8
CLOSURE_PRECHECK_STATEMENTS = 10


@dataclass(frozen=True)
class OracleBudget:
    """Search budget: restart/iteration counts, RNG seed, per-variable
    cardinalities, and the feasibility/violation thresholds.
    """

    restarts: int = 64
    iterations: int = 2000
    seed: int = 0
    cards: tuple[int, ...] | int | None = None
    eps_sat: float = 1e-9
    delta_vio: float = 1e-3

    def __post_init__(self):
        if self.restarts < 1 or self.iterations < 0:
            raise InvalidStatementError("restarts must be >= 1 and iterations >= 0")
        if not self.eps_sat < self.delta_vio:
            raise InvalidStatementError("eps_sat must be smaller than delta_vio")
        if self.cards is not None and not isinstance(self.cards, int):
            object.__setattr__(self, "cards", tuple(int(c) for c in self.cards))

    def resolve_cards(self, n: int) -> tuple[int, ...]:
        if self.cards is None:
            return (2,) * n
        if isinstance(self.cards, int):
            return (self.cards,) * n
        if len(self.cards) != n:
            raise NodeCountMismatchError("budget cardinalities do not match n")
        return self.cards


def _prod(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out *= v
    return out


def _random_topo_order(rng: random.Random, n: int, edges: set[tuple[int, int]]) -> list[int]:
    indeg = [0] * n
    children = [[] for _ in range(n)]
    for i, j in edges:
        indeg[j] += 1
        children[i].append(j)
    ready = sorted(i for i in range(n) if indeg[i] == 0)
    order = []
    while ready:
        v = ready.pop(rng.randrange(len(ready)))
        order.append(v)
        for c in sorted(children[v]):
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
        ready.sort()
    return order


class _Candidate:
    """A factorized parameterization: per-node parent sets plus conditional
    tables, materialized into a float JointDist on demand.
    """

    def __init__(self, cards: Sequence[int], parent_sets: Sequence[tuple[int, ...]],
                 labels: Sequence[str]):
        self.cards = tuple(cards)
        self.parent_sets = tuple(parent_sets)
        self.labels = tuple(labels)
        self.tables: list[dict[tuple[int, ...], list[float]]] = [
            {} for _ in range(len(cards))
        ]
        self.continuous: list[int] = []

    def fill(self, rng: random.Random, deterministic: set[int],
             injective: set[int], uniform_root_prob: float = 0.5):
        for i, parents in enumerate(self.parent_sets):
            card = self.cards[i]
            cfgs = list(itertools.product(*(range(self.cards[j]) for j in parents)))
            if i in deterministic:
                if i in injective and card >= len(cfgs):
                    values = rng.sample(range(card), len(cfgs))
                else:
                    values = [rng.randrange(card) for _ in cfgs]
                for cfg, val in zip(cfgs, values):
                    row = [0.0] * card
                    row[val] = 1.0
                    self.tables[i][cfg] = row
                continue
            self.continuous.append(i)
            if not parents and rng.random() < uniform_root_prob:
                self.tables[i][()] = [1.0 / card] * card
                continue
            for cfg in cfgs:
                raw = [rng.expovariate(1.0) for _ in range(card)]
                total = sum(raw)
                self.tables[i][cfg] = [x / total for x in raw]

    def perturb(self, rng: random.Random):
        """Multiply one conditional entry by a random factor and renormalize
        its row. Returns an undo closure. Zero entries stay zero, so
        deterministic rows are never proposed.
        """
        node = self.continuous[rng.randrange(len(self.continuous))]
        table = self.tables[node]
        cfg = list(table)[rng.randrange(len(table))]
        row = table[cfg]
        entry = rng.randrange(len(row))
        old = list(row)
        row[entry] *= math.exp(rng.gauss(0.0, 0.7))
        total = sum(row)
        table[cfg] = [x / total for x in row]

        def undo():
            table[cfg] = old

        return undo

    def materialize(self) -> JointDist:
        """Expand the factorization along a topological order, so the cost
        is proportional to the support rather than the full product space.
        """
        n = len(self.cards)
        indeg = [len(ps) for ps in self.parent_sets]
        children = [[] for _ in range(n)]
        for i, ps in enumerate(self.parent_sets):
            for j in ps:
                children[j].append(i)
        ready = deque(i for i in range(n) if indeg[i] == 0)
        order = []
        while ready:
            v = ready.popleft()
            order.append(v)
            for c in children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        partial: list[tuple[list[int | None], float]] = [([None] * n, 1.0)]
        for node in order:
            parents = self.parent_sets[node]
            table = self.tables[node]
            grown = []
            for assign, prob in partial:
                row = table[tuple(assign[j] for j in parents)]
                for val, weight in enumerate(row):
                    if weight:
                        extended = list(assign)
                        extended[node] = val
                        grown.append((extended, prob * weight))
            partial = grown
        mass = {}
        for assign, prob in partial:
            mass[tuple(assign)] = prob
        return JointDist(self.labels, self.cards, mass, exact=False)


def _search(budget: OracleBudget, restart_tag: str, build_candidate,
            antecedent_residual, target: CiStatement, fd_checks) -> JointDist | None:
    """Shared restart/improvement loop. ``build_candidate(rng)`` returns a
    filled _Candidate (or None to skip the restart) plus the list of CI
    statements that are only penalized, not structurally enforced;
    ``antecedent_residual(p)`` must return the worst antecedent residual for
    final verification.
    """
    for r in range(budget.restarts):
        rng = random.Random(f"{budget.seed}:{restart_tag}:{r}")
        built = build_candidate(rng)
        if built is None:
            continue
        cand, penalty_stmts = built
        p = cand.materialize()

        def objective(dist):
            pen = 0.0
            worst = 0.0
            for stmt in penalty_stmts:
                res = check_ci(dist, stmt).residual
                pen += res * res
                worst = max(worst, res)
            viol = check_ci(dist, target).residual
            return pen - viol, worst, viol

        obj, worst_pen, viol = objective(p)
        for step in range(budget.iterations + 1):
            if viol > budget.delta_vio and worst_pen < budget.eps_sat:
                if (antecedent_residual(p) < budget.eps_sat
                        and all(check(p) for check in fd_checks)
                        and check_ci(p, target).residual > budget.delta_vio):
                    return p
            if step == budget.iterations or not cand.continuous:
                break
            undo = cand.perturb(rng)
            p2 = cand.materialize()
            obj2, worst2, viol2 = objective(p2)
            if obj2 < obj:
                p, obj, worst_pen, viol = p2, obj2, worst2, viol2
            else:
                undo()
    return None


def refute_implication(antecedent_cis: CiSet | Iterable[CiStatement],
                       antecedent_fds: Sequence[tuple[Iterable[int], int]],
                       target: CiStatement,
                       budget: OracleBudget = OracleBudget(),
                       labels: tuple[str, ...] | None = None) -> JointDist | None:
    """Search for a distribution satisfying the antecedent CIs and
    functional dependencies (variable indices are 0-based) while violating
    the target CI. Returns None when the budget is exhausted or the target
    is derivable from the CI antecedents.
    """
    cis = list(antecedent_cis)
    fds = [(frozenset(a), int(b)) for a, b in antecedent_fds]
    mentioned = set(target.nodes)
    for stmt in cis:
        mentioned |= stmt.nodes
    for a, b in fds:
        mentioned |= a | {b}
    if budget.cards is not None and not isinstance(budget.cards, int):
        n = len(budget.cards)
    else:
        n = max(mentioned) + 1
    if any(v >= n for v in mentioned):
        raise InvalidStatementError("statement references variables outside the space")
    cards = budget.resolve_cards(n)
    if labels is None:
        labels = tuple(f"v{i}" for i in range(n))

    if (n <= CLOSURE_PRECHECK_NODES and len(cis) <= CLOSURE_PRECHECK_STATEMENTS
            and closure_implies(cis, target, n)):
        return None

    # Structural plan: one generating fd per dependent variable, acyclic.
    gen: dict[int, frozenset[int]] = {}
    struct_edges: set[tuple[int, int]] = set()
    leftovers: list[tuple[frozenset[int], int]] = []

    def reaches(src: int, dst: set[int]) -> bool:
        seen, stack = set(), [src]
        while stack:
            v = stack.pop()
            for i, j in struct_edges:
                if i == v and j not in seen:
                    if j in dst:
                        return True
                    seen.add(j)
                    stack.append(j)
        return False

    for a, b in fds:
        if b in a:
            continue  # vacuous, always true
        if b in gen or reaches(b, set(a)):
            leftovers.append((a, b))
            continue
        gen[b] = a
        struct_edges.update((x, b) for x in a)
    injective = {
        b for b, a in gen.items()
        if len(a) == 1 and (frozenset({b}), next(iter(a))) in leftovers
    }

    def qualifies(g: Dag) -> bool:
        if d_separated(g, target.a, target.b, target.c):
            return False
        return all(d_separated(g, s.a, s.b, s.c) for s in cis)

    def draw_structure(rng: random.Random) -> Dag:
        order = _random_topo_order(rng, n, struct_edges)
        position = {v: i for i, v in enumerate(order)}
        edges = set(struct_edges)
        for v in range(n):
            if v in gen:
                continue
            for p in order[: position[v]]:
                if rng.random() < 0.4:
                    edges.add((p, v))
        return Dag(n, frozenset(edges), labels)

    def build_candidate(rng: random.Random):
        g = None
        for _ in range(30):
            cand_g = draw_structure(rng)
            if qualifies(cand_g):
                g = cand_g
                penalty = []
                break
        if g is None:
            g = draw_structure(rng)
            penalty = list(cis)
        cand = _Candidate(cards, tuple(tuple(sorted(g.parents[i])) for i in range(n)), labels)
        cand.fill(rng, deterministic=set(gen), injective=injective)
        return cand, penalty

    def antecedent_residual(p: JointDist) -> float:
        worst = 0.0
        for stmt in cis:
            worst = max(worst, check_ci(p, stmt).residual)
        return worst

    fd_checks = [
        (lambda p, a=a, b=b: check_fd(p, a, b, tolerance=budget.eps_sat))
        for a, b in fds if b not in a
    ]
    return _search(budget, "ci", build_candidate, antecedent_residual, target, fd_checks)


def refute_network_implication(g1: Dag, g2: Dag, target: CiStatement,
                               budget: OracleBudget = OracleBudget()) -> JointDist | None:
    """Search for a distribution satisfying both network structures while
    violating the target CI. Candidates factorize a structure in which both
    networks' local CIs are d-separated when such a structure exists
    (antecedents then hold exactly); otherwise they factorize g1 and g2's
    local residuals are penalized. Returns None if either network alone
    d-separates the target (the implication provably holds) or when the
    budget is exhausted.
    """
    if g1.node_count != g2.node_count:
        raise NodeCountMismatchError("networks must share a node count")
    n = g1.node_count
    if any(v >= n for v in target.nodes):
        raise InvalidStatementError("target references nodes outside the networks")
    if (d_separated(g1, target.a, target.b, target.c)
            or d_separated(g2, target.a, target.b, target.c)):
        return None
    cards = budget.resolve_cards(n)
    labels = g1.node_labels
    locals_union = list(CiSet(local_ci_set(g1).statements | local_ci_set(g2).statements))
    locals2 = list(local_ci_set(g2))

    def qualifies(g: Dag) -> bool:
        if d_separated(g, target.a, target.b, target.c):
            return False
        return all(d_separated(g, s.a, s.b, s.c) for s in locals_union)

    fixed = g1 if qualifies(g1) else (g2 if qualifies(g2) else None)
    dense = _prod(cards) <= DENSE_TABLE_CAP

    def build_candidate(rng: random.Random):
        g = fixed
        if g is None:
            for _ in range(30):
                cand_g = random_dag(rng, n, 0.5, labels)
                if qualifies(cand_g):
                    g = cand_g
                    break
        penalty = []
        if g is None:
            g = g1
            penalty = locals2
        parent_sets = tuple(tuple(sorted(g.parents[i])) for i in range(n))
        if dense:
            deterministic: set[int] = set()
        else:
            deterministic = {i for i in range(n) if parent_sets[i]}
            root_states = _prod(cards[i] for i in range(n) if not parent_sets[i])
            if root_states > DENSE_TABLE_CAP:
                return None
        cand = _Candidate(cards, parent_sets, labels)
        cand.fill(rng, deterministic=deterministic, injective=set(),
                  uniform_root_prob=0.5 if not dense else 0.0)
        return cand, penalty

    def antecedent_residual(p: JointDist) -> float:
        return max(satisfies_network(p, g1).residual,
                   satisfies_network(p, g2).residual)

    return _search(budget, "net", build_candidate, antecedent_residual, target,
                   fd_checks=[])


def counterexample_report(p: JointDist, antecedent_cis: Iterable[CiStatement] = (),
                          antecedent_fds: Sequence[tuple[Iterable[int], int]] = (),
                          networks: Sequence[Dag] = (),
                          target: CiStatement | None = None) -> list[str]:
    """One human-readable residual line per constraint, for the CLI report."""
    lines = []
    for stmt in antecedent_cis:
        lines.append(f"# antecedent {stmt} residual {check_ci(p, stmt).residual!r}")
    for a, b in antecedent_fds:
        ok = check_fd(p, frozenset(a), b)
        lines.append(f"# antecedent fd {sorted(a)} -> {b} holds {ok}")
    for idx, g in enumerate(networks, start=1):
        lines.append(f"# network {idx} residual {satisfies_network(p, g).residual!r}")
    if target is not None:
        lines.append(f"# target {target} residual {check_ci(p, target).residual!r}")
    return lines
