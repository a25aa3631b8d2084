"""Implication-instance forms, the instance rewritings, the two-network
compiler, and the constructive witness builders.

Instances index their variables 1-based (matching the instance file format);
compiled networks use 0-based node indices like every Dag. Witness builders
operate in exact rational mode only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .dag import CiStatement, Dag
from .dist import (
    JointDist,
    STATE_GUARD,
    check_fd,
    check_mutual_independence,
    marginal,
    marginal_vector,
)
from .errors import (
    AlreadyDuplicatedError,
    AntecedentViolatedError,
    GuardExceededError,
    InvalidInstanceError,
    InvalidStatementError,
    MissingDuplicateError,
    NodeCountMismatchError,
    ParseError,
    RangeTooLargeError,
)

FdEntry = tuple[frozenset[int], int]


def _normalize_fds(fds: Iterable, n: int, allow_vacuous: bool) -> tuple[FdEntry, ...]:
    out = []
    for entry in fds:
        a, b = entry
        a = frozenset(int(v) for v in a)
        b = int(b)
        if not a:
            raise InvalidInstanceError("functional dependency with empty A")
        if any(not (1 <= v <= n) for v in a) or not (1 <= b <= n):
            raise InvalidInstanceError("functional dependency index out of range")
        if b in a and not allow_vacuous:
            raise InvalidInstanceError(f"dependent variable {b} inside its own A")
        out.append((a, b))
    return tuple(out)


def _normalize_target(target, n: int):
    if target is None:
        return None
    a0, b0 = target
    a0 = frozenset(int(v) for v in a0)
    b0 = int(b0)
    if len(a0) != 1:
        raise InvalidInstanceError("target A must be a singleton")
    if any(not (1 <= v <= n) for v in a0) or not (1 <= b0 <= n) or b0 in a0:
        raise InvalidInstanceError("target indices invalid")
    return (a0, b0)


@dataclass(frozen=True)
class ImplicationAInstance:
    """An instance in the uniform-variables form: functional dependencies,
    optional pairwise independencies, and a singleton functional-dependency
    target. Decision-problem instances need n >= 3 and a target; witness
    construction also accepts n = 1, 2 and a missing target.
    """

    n: int
    fds: tuple[FdEntry, ...] = ()
    pairwise_indep: tuple[tuple[int, int], ...] = ()
    target: tuple[frozenset[int], int] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInstanceError("n must be positive")
        object.__setattr__(self, "fds", _normalize_fds(self.fds, self.n, allow_vacuous=True))
        pairs = []
        for c0, c1 in self.pairwise_indep:
            c0, c1 = int(c0), int(c1)
            if c0 == c1 or not (1 <= c0 <= self.n and 1 <= c1 <= self.n):
                raise InvalidInstanceError(f"bad independence pair ({c0}, {c1})")
            pairs.append((c0, c1))
        object.__setattr__(self, "pairwise_indep", tuple(pairs))
        object.__setattr__(self, "target", _normalize_target(self.target, self.n))


@dataclass(frozen=True)
class ImplicationInstance:
    """An instance in the two-group form: two mutual-independence groups,
    functional dependencies, a singleton target, and optionally the
    duplicated target variable b0'.

    The fd list preserves order and multiplicity; entries with the
    dependent variable inside A are vacuous (always true) and tolerated
    here, but must be stripped before compiling networks. The groups may
    overlap: the undecidable decision-problem form uses disjoint groups,
    but the compiler and witnesses are well-defined without that.
    """

    n: int
    c1: frozenset[int] = frozenset()
    c2: frozenset[int] = frozenset()
    fds: tuple[FdEntry, ...] = ()
    target: tuple[frozenset[int], int] | None = None
    b0_prime: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInstanceError("n must be positive")
        c1 = frozenset(int(v) for v in self.c1)
        c2 = frozenset(int(v) for v in self.c2)
        for v in c1 | c2:
            if not (1 <= v <= self.n):
                raise InvalidInstanceError(f"group index {v} out of range")
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "c2", c2)
        object.__setattr__(self, "fds", _normalize_fds(self.fds, self.n, allow_vacuous=True))
        object.__setattr__(self, "target", _normalize_target(self.target, self.n))
        if self.b0_prime is not None:
            if self.target is None:
                raise InvalidInstanceError("b0_prime requires a target")
            a0, b0 = self.target
            bp = int(self.b0_prime)
            if not (1 <= bp <= self.n) or bp in a0 or bp == b0:
                raise InvalidInstanceError("b0_prime must avoid the target variables")
            entries = set(self.fds)
            if (frozenset({b0}), bp) not in entries or (frozenset({bp}), b0) not in entries:
                raise InvalidInstanceError(
                    "b0_prime requires both ({b0}, b0') and ({b0'}, b0) fd entries"
                )
            object.__setattr__(self, "b0_prime", bp)


def strip_vacuous_fds(inst: ImplicationInstance) -> ImplicationInstance:
    """Drop fd entries whose dependent variable sits inside its own A; they
    impose nothing and the network compiler rejects them.
    """
    kept = tuple((a, b) for a, b in inst.fds if b not in a)
    return ImplicationInstance(inst.n, inst.c1, inst.c2, kept, inst.target, inst.b0_prime)


def duplicate_target_variable(inst: ImplicationInstance) -> ImplicationInstance:
    """Add a fresh variable equivalent to the target's dependent variable:
    n grows by one and the two defining fd entries are appended.
    """
    if inst.b0_prime is not None:
        raise AlreadyDuplicatedError("instance already has a duplicated target variable")
    if inst.target is None:
        raise InvalidInstanceError("cannot duplicate without a target")
    _, b0 = inst.target
    bp = inst.n + 1
    fds = inst.fds + ((frozenset({b0}), bp), (frozenset({bp}), b0))
    return ImplicationInstance(inst.n + 1, inst.c1, inst.c2, fds, inst.target, bp)


def compile_pairwise_independencies(inst: ImplicationAInstance) -> ImplicationAInstance:
    """Rewrite each pairwise independence into functional dependencies: a
    fresh variable completes the pair to a triple informationally
    equivalent to (V1, V2, V3). Leaves an instance with no pairwise
    independencies.
    """
    n = inst.n
    fds = list(inst.fds)
    base = frozenset({1, 2, 3})
    for j, (c0, c1) in enumerate(inst.pairwise_indep, start=1):
        fresh = n + j
        triple = frozenset({c0, c1, fresh})
        for b in (c0, c1, fresh):
            fds.append((base, b))
        for b in sorted(base):
            fds.append((triple, b))
    return ImplicationAInstance(n + len(inst.pairwise_indep), tuple(fds), (), inst.target)


def build_implication_b(inst: ImplicationAInstance) -> ImplicationInstance:
    """Rewrite a pairwise-independency-free instance into the two-group
    form over 9n+2 variables: the original variables become V_1..V_n inside
    the V/W/M/Q layout, the two groups are {Q, V1, V2, V3} and
    {M_1..M_3n, W_3n+1}, and the fd list spells out every antecedent family
    (equivalences expanded into both directions, joint dependents expanded
    per variable; the expansion keeps duplicates and vacuous entries).
    """
    if inst.pairwise_indep:
        raise InvalidInstanceError(
            "pairwise independencies must be compiled away first"
        )
    n = inst.n
    v = lambda i: i                      # 1..3n
    w = lambda i: 3 * n + i              # 1..3n+1
    m = lambda i: 6 * n + 1 + i          # 1..3n
    q = 9 * n + 2
    total = 9 * n + 2

    fds: list[FdEntry] = []
    for i in range(1, 3 * n + 1):
        fds.append((frozenset({w(i + 1), m(i)}), w(i)))
        fds.append((frozenset({w(i), m(i)}), w(i + 1)))
    fds.append((frozenset({w(3 * n + 1), q}), w(1)))
    for i in (1, 2, 3):
        fds.append((frozenset({w(i)}), v(i)))
        fds.append((frozenset({v(i)}), w(i)))
    base = frozenset({v(1), v(2), v(3)})
    for i in range(1, 3 * n + 1):
        fds.append((base, v(i)))
    for i in range(1, 3 * n + 1):
        fds.append((frozenset({w(i), q}), v(i)))
    for i in range(1, n + 1):
        triple = (v(i), v(i + n), v(i + 2 * n))
        for b in triple:
            fds.append((base, b))
        for b in sorted(base):
            fds.append((frozenset(triple), b))
    for a, b in inst.fds:
        fds.append((frozenset(a), b))

    c1 = frozenset({q, v(1), v(2), v(3)})
    c2 = frozenset({m(i) for i in range(1, 3 * n + 1)} | {w(3 * n + 1)})
    return ImplicationInstance(total, c1, c2, tuple(fds), inst.target)


@dataclass(frozen=True)
class NodeRole:
    """The role a compiled network node plays: U_i, Y_i, Z_i, or X_i^j."""

    kind: str
    i: int
    j: int | None = None

    @property
    def label(self) -> str:
        if self.kind == "X":
            return f"X_{self.i}^{self.j}"
        return f"{self.kind}_{self.i}"


def _node_layout(n: int, k: int):
    """Node indexing for the compiled networks: all U_i first, then Y_i,
    then X_i^j grouped by i then j, then Z_i.
    """
    u = lambda i: i - 1
    y = lambda i: n + i - 1
    x = lambda i, j: 2 * n + (i - 1) * k + (j - 1)
    z = lambda i: 2 * n + n * k + i - 1
    roles: list[NodeRole] = []
    roles += [NodeRole("U", i) for i in range(1, n + 1)]
    roles += [NodeRole("Y", i) for i in range(1, n + 1)]
    for i in range(1, n + 1):
        roles += [NodeRole("X", i, j) for j in range(1, k + 1)]
    roles += [NodeRole("Z", i) for i in range(1, n + 1)]
    return u, y, x, z, tuple(roles)


@dataclass(frozen=True)
class ReductionOutput:
    """The compiled pair of networks, the target CI over their nodes, and
    the role of every node.
    """

    network1: Dag
    network2: Dag
    target_ci: CiStatement
    roles: tuple[NodeRole, ...]


def compile_two_networks(inst: ImplicationInstance) -> ReductionOutput:
    """Compile an instance with a duplicated target into the two network
    structures over n(k+3) nodes whose joint implication of the target CI
    encodes the instance's implication.
    """
    if inst.target is None:
        raise InvalidInstanceError("instance has no target")
    if inst.b0_prime is None:
        raise MissingDuplicateError("instance needs the duplicated target variable")
    for a, b in inst.fds:
        if b in a:
            raise InvalidInstanceError(
                "vacuous fd entries cannot be compiled; strip them first"
            )
    n, k = inst.n, len(inst.fds)
    u, y, x, z, roles = _node_layout(n, k)
    labels = tuple(r.label for r in roles)
    everyone = range(1, n + 1)

    def u_layer(group: frozenset[int]) -> set[tuple[int, int]]:
        rest = [i for i in everyone if i not in group]
        edges = {(u(i), u(ip)) for i in group for ip in rest}
        edges |= {(u(i), u(ip)) for i in rest for ip in rest if i < ip}
        return edges

    edges1 = u_layer(inst.c1)
    for i in everyone:
        chain = [u(i), y(i)] + [x(i, j) for j in range(1, k + 1)] + [z(i)]
        edges1 |= set(zip(chain, chain[1:]))

    edges2 = u_layer(inst.c2)
    for i in everyone:
        edges2.add((u(i), z(i)))
        edges2.add((z(i), y(i)))
    for j, (a_j, b_j) in enumerate(inst.fds, start=1):
        for i in everyone:
            if i != b_j:
                edges2.add((u(i), x(i, j)))
        for i in sorted(a_j):
            edges2.add((x(i, j), x(b_j, j)))

    a0, b0 = inst.target
    (a0_var,) = a0
    target = CiStatement(
        frozenset({y(b0)}), frozenset({y(a0_var)}), frozenset({y(inst.b0_prime)})
    )
    node_count = n * (k + 3)
    return ReductionOutput(
        Dag(node_count, frozenset(edges1), labels),
        Dag(node_count, frozenset(edges2), labels),
        target,
        roles,
    )


def _verify_instance_antecedents(inst: ImplicationInstance, pv: JointDist):
    if pv.variable_count != inst.n:
        raise NodeCountMismatchError("distribution does not cover the instance variables")
    for group in (inst.c1, inst.c2):
        if len(group) >= 2:
            res = check_mutual_independence(pv, {i - 1 for i in group})
            if not res.holds:
                raise AntecedentViolatedError(
                    f"group {sorted(group)} is not mutually independent"
                )
    for a, b in inst.fds:
        if b in a:
            continue
        if not check_fd(pv, {i - 1 for i in a}, b - 1):
            raise AntecedentViolatedError(
                f"variable {b} is not a function of {sorted(a)}"
            )


def trivial_witness(inst: ImplicationInstance, pv: JointDist) -> JointDist:
    """The witness that sets every role variable of index i to V_i. Valid
    whenever pv satisfies the instance's antecedents; it then satisfies
    both compiled networks exactly.
    """
    if not pv.exact:
        raise InvalidStatementError("witness construction requires exact mode")
    if inst.b0_prime is None:
        raise MissingDuplicateError("instance needs the duplicated target variable")
    _verify_instance_antecedents(inst, pv)
    n, k = inst.n, len(inst.fds)
    _, _, _, _, roles = _node_layout(n, k)
    labels = tuple(r.label for r in roles)
    cards = tuple(pv.cards[r.i - 1] for r in roles)
    mass = {}
    for outcome, m in pv.mass.items():
        mass[tuple(outcome[r.i - 1] for r in roles)] = m
    return JointDist(labels, cards, mass)


def _class_ranks(points: Sequence[tuple], x_values: Sequence) -> dict:
    """Rank each point within its class of equal x-value, in ascending
    point order. The map point -> (x, rank) is a bijection when all classes
    share a size.
    """
    counters: dict = {}
    ranks = {}
    for pt in sorted(points):
        xv = x_values[pt] if isinstance(x_values, dict) else x_values[points.index(pt)]
        ranks[pt] = counters.get(xv, 0)
        counters[xv] = ranks[pt] + 1
    return ranks


@dataclass(frozen=True)
class IidExtension:
    """Completion functions returned by the extension builder: one value
    tuple per function, indexed by the support point of V.
    """

    y_functions: tuple[tuple[int, ...], ...]


def iid_extend_witness(p_v: JointDist, x_functions: Sequence[Sequence[int]],
                       ell: int, n: int | None = None) -> IidExtension | None:
    """Given V uniform on ell**n points and X_i = f_i(V) with ranges of
    size at most ell, return uniform cardinality-ell functions Y_1..Y_{n-k}
    that make ((X_i), (Y_i)) informationally equivalent to V, or None when
    the X_i are not mutually independent uniform with cardinality ell.

    The construction enumerates each joint X-preimage in ascending support
    order and splits the within-class rank into base-ell digits.
    """
    if not p_v.exact or p_v.variable_count != 1:
        raise InvalidStatementError("V must be a single exact variable")
    size = p_v.cards[0]
    if len(p_v.mass) != size or any(m != Fraction(1, size) for m in p_v.mass.values()):
        raise InvalidStatementError("V must be uniform over its full range")
    if ell < 1:
        raise InvalidStatementError("ell must be positive")
    if n is None:
        n = 0
        while ell ** n < size:
            n += 1
        if ell == 1 and size == 1:
            n = len(x_functions)
    if ell ** n != size:
        raise InvalidStatementError(f"support size {size} is not {ell}**{n}")
    k = len(x_functions)
    if k > n:
        raise InvalidStatementError("more functions than coordinates")
    for f in x_functions:
        if len(f) != size:
            raise InvalidStatementError("each function must cover the support")
        if len(set(f)) > ell:
            raise RangeTooLargeError("function range exceeds ell")

    joint = [tuple(f[v] for f in x_functions) for v in range(size)]
    counts: dict = {}
    for t in joint:
        counts[t] = counts.get(t, 0) + 1
    expected = ell ** (n - k)
    if len(counts) != ell ** k or any(c != expected for c in counts.values()):
        return None

    seen: dict = {}
    dig = n - k
    y_functions = [[0] * size for _ in range(dig)]
    for v in range(size):
        rank = seen.get(joint[v], 0)
        seen[joint[v]] = rank + 1
        for t in range(dig):
            y_functions[t][v] = (rank // ell ** t) % ell
    return IidExtension(tuple(tuple(f) for f in y_functions))


def implication_b_witness(pv: JointDist, inst: ImplicationAInstance) -> JointDist:
    """Build the joint distribution over the rewritten variable set
    (V_1..V_3n, W_1..W_3n+1, M_1..M_3n, Q) that satisfies every antecedent
    of the two-group rewriting, starting from V_1..V_n uniform with a
    common cardinality and satisfying the instance's antecedents.

    The sample space is the base triple times the fresh pad coordinates;
    padded sums modulo the cardinality realize the W and M layers, and Q
    packs the pad coordinates into one variable.
    """
    if not pv.exact:
        raise InvalidStatementError("witness construction requires exact mode")
    if inst.pairwise_indep:
        raise InvalidInstanceError("compile pairwise independencies away first")
    n = inst.n
    if pv.variable_count != n:
        raise NodeCountMismatchError("distribution does not cover the instance variables")
    ell = pv.cards[0]
    if any(c != ell for c in pv.cards):
        raise AntecedentViolatedError("all variables must share one cardinality")
    unif = Fraction(1, ell)
    for i in range(n):
        if marginal_vector(pv, i) != [unif] * ell:
            raise AntecedentViolatedError(f"variable {i + 1} is not uniform")
    for a, b in inst.fds:
        if b in a:
            continue
        if not check_fd(pv, {i - 1 for i in a}, b - 1):
            raise AntecedentViolatedError(f"variable {b} is not a function of {sorted(a)}")
    head = min(n, 3)
    if head >= 2 and not check_mutual_independence(pv, range(head)).holds:
        raise AntecedentViolatedError("the leading variables are not mutually independent")

    pads = 3 * n - 2
    states = ell ** (9 * n + 1) * ell ** pads
    if states > STATE_GUARD:
        raise GuardExceededError(
            f"witness state space {states} exceeds guard {STATE_GUARD}"
        )

    sources = list(itertools.product(range(ell), repeat=3))
    # Values of the given variables on each source point.
    v_base: dict[tuple, list[int]] = {}
    if n >= 3:
        for i in range(3, n):
            if not check_fd(pv, {0, 1, 2}, i):
                raise AntecedentViolatedError(
                    f"variable {i + 1} is not a function of the base triple"
                )
        by_triple = {}
        for outcome in pv.mass:
            key = outcome[:3]
            if key in by_triple and by_triple[key] != outcome:
                raise AntecedentViolatedError("base triple does not determine the variables")
            by_triple[key] = outcome
        if len(by_triple) != ell ** 3:
            raise AntecedentViolatedError("base triple is not uniform over its cube")
        for s in sources:
            v_base[s] = list(by_triple[s])
    else:
        for s in sources:
            v_base[s] = list(s[:n])

    # Extend every given variable to an informationally complete triple.
    v_all: dict[tuple, list[int]] = {s: [0] * (3 * n) for s in sources}
    source_index = {s: idx for idx, s in enumerate(sources)}
    v_dist = JointDist(("s",), (ell ** 3,), {
        (i,): Fraction(1, ell ** 3) for i in range(ell ** 3)
    })
    for i in range(1, n + 1):
        xf = [v_base[s][i - 1] for s in sources]
        ext = iid_extend_witness(v_dist, [xf], ell, 3)
        if ext is None:
            raise AntecedentViolatedError(f"variable {i} is not uniform on the source")
        y1, y2 = ext.y_functions
        for s in sources:
            idx = source_index[s]
            v_all[s][i - 1] = xf[idx]
            v_all[s][i + n - 1] = y1[idx]
            v_all[s][i + 2 * n - 1] = y2[idx]

    variables = (
        tuple(f"V{i}" for i in range(1, 3 * n + 1))
        + tuple(f"W{i}" for i in range(1, 3 * n + 2))
        + tuple(f"M{i}" for i in range(1, 3 * n + 1))
        + ("Q",)
    )
    cards = (ell,) * (9 * n + 1) + (ell ** pads,)
    mass = {}
    weight = Fraction(1, ell ** (3 + pads))
    for s in sources:
        v_vals = v_all[s]
        for pad in itertools.product(range(ell), repeat=pads):
            w_vals = [0] * (3 * n + 1)
            for i in range(1, 3 * n + 2):
                if i <= 3:
                    w_vals[i - 1] = v_vals[i - 1]
                elif i <= 3 * n:
                    w_vals[i - 1] = (v_vals[i - 1] + pad[i - 4]) % ell
                else:
                    w_vals[i - 1] = (v_vals[0] + pad[-1]) % ell
            m_vals = [
                (w_vals[i - 1] + w_vals[i]) % ell for i in range(1, 3 * n + 1)
            ]
            q_val = sum(p * ell ** t for t, p in enumerate(pad))
            outcome = tuple(v_vals) + tuple(w_vals) + tuple(m_vals) + (q_val,)
            mass[outcome] = mass.get(outcome, Fraction(0)) + weight
    return JointDist(variables, cards, mass)


# --- instance file format -----------------------------------------------------

def parse_instance(text: str) -> ImplicationAInstance | ImplicationInstance:
    """Parse the instance file format: ``n``, optional ``group1``/``group2``
    lines, repeated ``fd <A-indices> -> <b>`` lines, optional
    ``indep <c0> <c1>`` lines, ``target <A0> -> <b0>``, optional
    ``dup <b0'>``. Group or dup lines select the two-group form; indep
    lines select the uniform-variables form.
    """
    n = None
    groups: dict[str, frozenset[int]] = {}
    fds: list[FdEntry] = []
    pairs: list[tuple[int, int]] = []
    target = None
    dup = None

    def arrow(rest: str, lineno: int) -> tuple[frozenset[int], int]:
        if "->" not in rest:
            raise ParseError(f"line {lineno}: expected '<indices> -> <index>'")
        left, right = rest.split("->", 1)
        try:
            a = frozenset(int(t) for t in left.split())
            b = int(right.strip())
        except ValueError:
            raise ParseError(f"line {lineno}: bad index") from None
        return a, b

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        try:
            if key == "n":
                n = int(rest)
            elif key in ("group1", "group2"):
                groups[key] = frozenset(int(t) for t in rest.split())
            elif key == "fd":
                fds.append(arrow(rest, lineno))
            elif key == "indep":
                c0, c1 = rest.split()
                pairs.append((int(c0), int(c1)))
            elif key == "target":
                target = arrow(rest, lineno)
            elif key == "dup":
                dup = int(rest)
            else:
                raise ParseError(f"line {lineno}: unknown directive {key!r}")
        except ValueError:
            raise ParseError(f"line {lineno}: bad integer") from None
    if n is None:
        raise ParseError("missing 'n' line")
    if pairs and (groups or dup is not None):
        raise ParseError("indep lines cannot be mixed with group/dup lines")
    if pairs or (not groups and dup is None):
        return ImplicationAInstance(n, tuple(fds), tuple(pairs), target)
    return ImplicationInstance(
        n,
        groups.get("group1", frozenset()),
        groups.get("group2", frozenset()),
        tuple(fds),
        target,
        dup,
    )


def format_instance(inst: ImplicationAInstance | ImplicationInstance) -> str:
    lines = [f"n {inst.n}"]
    if isinstance(inst, ImplicationInstance):
        if inst.c1:
            lines.append("group1 " + " ".join(map(str, sorted(inst.c1))))
        if inst.c2:
            lines.append("group2 " + " ".join(map(str, sorted(inst.c2))))
    for a, b in inst.fds:
        lines.append("fd " + " ".join(map(str, sorted(a))) + f" -> {b}")
    if isinstance(inst, ImplicationAInstance):
        for c0, c1 in inst.pairwise_indep:
            lines.append(f"indep {c0} {c1}")
    if inst.target is not None:
        a0, b0 = inst.target
        lines.append("target " + " ".join(map(str, sorted(a0))) + f" -> {b0}")
    if isinstance(inst, ImplicationInstance) and inst.b0_prime is not None:
        lines.append(f"dup {inst.b0_prime}")
    return "\n".join(lines) + "\n"
