"""Exact finite discrete joint distributions and the predicates built on them.

Distributions default to exact rational arithmetic (Fraction masses); sampled
distributions use float masses tagged with ``exact=False`` and a tolerance.
Zero-mass outcomes are omitted from the stored table, which is otherwise the
dense table over the full product space. All values are immutable and all
predicates are pure.
"""

from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .dag import Dag, local_ci_set
from .errors import (
    GuardExceededError,
    InvalidStatementError,
    NodeCountMismatchError,
    NotNormalizedError,
    ParseError,
)

STATE_GUARD = 2 ** 24
DEFAULT_TOLERANCE = 1e-9


def _prod(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out *= v
    return out


@dataclass(frozen=True)
class JointDist:
    """An exact (or float-tagged approximate) joint pmf over named variables."""

    variables: tuple[str, ...]
    cards: tuple[int, ...]
    mass: dict
    exact: bool = True
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        variables = tuple(self.variables)
        cards = tuple(int(c) for c in self.cards)
        if len(variables) != len(cards):
            raise InvalidStatementError("variables and cardinalities must align")
        if len(set(variables)) != len(variables):
            raise InvalidStatementError("variable names must be distinct")
        if any(c < 1 for c in cards):
            raise InvalidStatementError("cardinalities must be positive")
        if _prod(cards) > STATE_GUARD:
            raise GuardExceededError(
                f"state space {_prod(cards)} exceeds guard {STATE_GUARD}"
            )
        cleaned = {}
        total = Fraction(0) if self.exact else 0.0
        for outcome, m in self.mass.items():
            outcome = tuple(outcome)
            if len(outcome) != len(cards) or any(
                not (0 <= x < c) for x, c in zip(outcome, cards)
            ):
                raise InvalidStatementError(f"outcome {outcome} out of range")
            if self.exact:
                m = Fraction(m)
            else:
                m = float(m)
            if m < 0:
                raise NotNormalizedError("negative mass")
            if m != 0:
                cleaned[outcome] = m
                total += m
        if self.exact:
            if total != 1:
                raise NotNormalizedError(f"masses sum to {total}, expected 1")
        elif abs(total - 1.0) > self.tolerance:
            raise NotNormalizedError(f"masses sum to {total!r}, expected 1")
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "cards", cards)
        object.__setattr__(self, "mass", cleaned)

    @property
    def variable_count(self) -> int:
        return len(self.variables)

    def p(self, outcome: Sequence[int]):
        return self.mass.get(tuple(outcome), Fraction(0) if self.exact else 0.0)

    def support(self) -> list[tuple[int, ...]]:
        return sorted(self.mass)

    def _zero(self):
        return Fraction(0) if self.exact else 0.0


def _project(mass: Mapping, idx: Sequence[int]) -> dict:
    out: dict = {}
    for outcome, m in mass.items():
        key = tuple(outcome[i] for i in idx)
        if key in out:
            out[key] += m
        else:
            out[key] = m
    return out


def _check_var_set(p: JointDist, s: Iterable[int], name: str = "S") -> frozenset[int]:
    s = frozenset(s)
    for v in s:
        if not (0 <= v < p.variable_count):
            raise InvalidStatementError(f"{name} references variable {v} out of range")
    return s


def marginal(p: JointDist, s: Iterable[int]) -> JointDist:
    """Marginal distribution over the variable subset ``s`` (index order)."""
    s = _check_var_set(p, s)
    if not s:
        raise InvalidStatementError("marginal requires a nonempty variable set")
    idx = sorted(s)
    return JointDist(
        tuple(p.variables[i] for i in idx),
        tuple(p.cards[i] for i in idx),
        _project(p.mass, idx),
        exact=p.exact,
        tolerance=p.tolerance,
    )


def marginal_vector(p: JointDist, var: int) -> list:
    """The single-variable marginal as a dense probability vector."""
    proj = _project(p.mass, [var])
    zero = p._zero()
    return [proj.get((x,), zero) for x in range(p.cards[var])]


@dataclass(frozen=True)
class CheckResult:
    """A boolean verdict plus the maximum residual of the defining identity."""

    holds: bool
    residual: object

    def __bool__(self) -> bool:
        return self.holds


def check_ci(p: JointDist, stmt) -> CheckResult:
    """Test X_A _||_ X_B | X_C via the product identity
    p(a,b,c) * p(c) == p(a,c) * p(b,c) over all outcomes.

    Outcomes where either pair marginal vanishes satisfy the identity
    automatically, so only support pairs per conditioning outcome are
    scanned. Returns the verdict and the maximum absolute residual.
    """
    a = _check_var_set(p, stmt.a, "A")
    b = _check_var_set(p, stmt.b, "B")
    c = _check_var_set(p, stmt.c, "C")
    idx = sorted(a | b | c)
    pos = {v: i for i, v in enumerate(idx)}
    a_pos = tuple(pos[v] for v in sorted(a))
    b_pos = tuple(pos[v] for v in sorted(b))
    c_pos = tuple(pos[v] for v in sorted(c))
    joint = _project(p.mass, idx)

    groups: dict = {}
    for outcome, m in joint.items():
        ck = tuple(outcome[i] for i in c_pos)
        ak = tuple(outcome[i] for i in a_pos)
        bk = tuple(outcome[i] for i in b_pos)
        g = groups.get(ck)
        if g is None:
            g = groups[ck] = [p._zero(), {}, {}, {}]
        g[0] += m
        g[1][ak] = g[1].get(ak, p._zero()) + m
        g[2][bk] = g[2].get(bk, p._zero()) + m
        g[3][(ak, bk)] = m

    zero = p._zero()
    residual = zero
    for pc, pa_map, pb_map, pab_map in groups.values():
        for ak, pa in pa_map.items():
            for bk, pb in pb_map.items():
                r = abs(pab_map.get((ak, bk), zero) * pc - pa * pb)
                if r > residual:
                    residual = r
    tol = 0 if p.exact else p.tolerance
    return CheckResult(residual <= tol, residual)


def check_mutual_independence(p: JointDist, s: Iterable[int]) -> CheckResult:
    """Whether the variables in ``s`` are mutually independent: every member
    is independent of the joint of the others.
    """
    s = _check_var_set(p, s)
    if len(s) < 2:
        raise InvalidStatementError("mutual independence needs at least two variables")
    from .dag import CiStatement

    residual = p._zero()
    holds = True
    for i in sorted(s):
        res = check_ci(p, CiStatement(frozenset({i}), frozenset(), s - {i}))
        holds = holds and res.holds
        if res.residual > residual:
            residual = res.residual
    return CheckResult(holds, residual)


def check_fd(p: JointDist, a: Iterable[int], b: int, tolerance: float | None = None) -> bool:
    """Whether variable ``b`` is a function of the variables in ``a``: every
    positive-probability outcome of A admits exactly one value of b.

    In approximate mode, determinism is thresholded: the stray conditional
    mass per A-outcome must not exceed the tolerance.
    """
    a = _check_var_set(p, a, "A")
    if not a:
        raise InvalidStatementError("A must be nonempty")
    if b in a:
        raise InvalidStatementError("dependent variable must not be in A")
    if not (0 <= b < p.variable_count):
        raise InvalidStatementError(f"variable {b} out of range")
    idx = sorted(a) + [b]
    joint = _project(p.mass, idx)
    groups: dict = {}
    for outcome, m in joint.items():
        groups.setdefault(outcome[:-1], []).append(m)
    if p.exact:
        return all(len(ms) == 1 for ms in groups.values())
    tol = p.tolerance if tolerance is None else tolerance
    for ms in groups.values():
        total = sum(ms)
        if total - max(ms) > tol * total:
            return False
    return True


def satisfies_network(p: JointDist, g: Dag) -> CheckResult:
    """Whether p satisfies the network: all of its local CI statements hold.
    The residual is the maximum over those statements.
    """
    if g.node_count != p.variable_count:
        raise NodeCountMismatchError("network and distribution sizes differ")
    residual = p._zero()
    holds = True
    for stmt in local_ci_set(g):
        res = check_ci(p, stmt)
        holds = holds and res.holds
        if res.residual > residual:
            residual = res.residual
    return CheckResult(holds, residual)


def _factorized_joint(g: Dag, cards: Sequence[int], tables: dict) -> dict:
    """Multiply per-node conditional tables into a joint mass dict."""
    mass = {}
    for outcome in itertools.product(*(range(c) for c in cards)):
        m = None
        for i in range(g.node_count):
            cfg = tuple(outcome[j] for j in sorted(g.parents[i]))
            f = tables[i][cfg][outcome[i]]
            m = f if m is None else m * f
            if not m:
                break
        if m:
            mass[outcome] = m
    return mass


def _broadcast_cards(g: Dag, cards) -> tuple[int, ...]:
    if isinstance(cards, int):
        return (cards,) * g.node_count
    cards = tuple(int(c) for c in cards)
    if len(cards) != g.node_count:
        raise NodeCountMismatchError("cardinality list does not match node count")
    return cards


def sample_factorized(g: Dag, cards, seed: int) -> JointDist:
    """A random distribution satisfying ``g``: each conditional table row is
    drawn from the flat simplex distribution. Deterministic per seed;
    approximate (float) mode.
    """
    cards = _broadcast_cards(g, cards)
    if _prod(cards) > STATE_GUARD:
        raise GuardExceededError("state space exceeds guard")
    rng = random.Random(seed)
    tables: dict = {}
    for i in range(g.node_count):
        parents = sorted(g.parents[i])
        tables[i] = {}
        for cfg in itertools.product(*(range(cards[j]) for j in parents)):
            row = [rng.expovariate(1.0) for _ in range(cards[i])]
            total = sum(row)
            tables[i][cfg] = [x / total for x in row]
    return JointDist(
        tuple(g.node_labels), cards, _factorized_joint(g, cards, tables), exact=False
    )


def sample_factorized_rational(g: Dag, cards, seed: int, resolution: int = 12) -> JointDist:
    """Like sample_factorized but with exact rational conditional tables:
    each row is a random positive integer composition normalized exactly.
    """
    cards = _broadcast_cards(g, cards)
    if _prod(cards) > STATE_GUARD:
        raise GuardExceededError("state space exceeds guard")
    rng = random.Random(seed)
    tables: dict = {}
    for i in range(g.node_count):
        parents = sorted(g.parents[i])
        tables[i] = {}
        for cfg in itertools.product(*(range(cards[j]) for j in parents)):
            row = [rng.randint(1, resolution) for _ in range(cards[i])]
            total = sum(row)
            tables[i][cfg] = [Fraction(x, total) for x in row]
    return JointDist(tuple(g.node_labels), cards, _factorized_joint(g, cards, tables))


@dataclass(frozen=True)
class StatisticPartition:
    """A statistic represented as a partition of the positive-probability
    outcomes of its base variables; blocks are numbered by first occurrence
    in lexicographic outcome order, so equal partitions compare equal.
    """

    base_variables: tuple[int, ...]
    blocks: dict

    @property
    def block_count(self) -> int:
        return len(set(self.blocks.values())) if self.blocks else 0

    def block_of(self, outcome: Sequence[int]) -> int:
        return self.blocks[tuple(outcome)]


def minimal_sufficient_statistic(p: JointDist, x: Iterable[int], u: Iterable[int]) -> StatisticPartition:
    """Partition the positive-probability X-outcomes by equality of the
    conditional distribution of U given X (the coarsest function of X that
    keeps all information about U).
    """
    x = _check_var_set(p, x, "X")
    u = _check_var_set(p, u, "U")
    if not x or not u:
        raise InvalidStatementError("X and U must be nonempty")
    if x & u:
        raise InvalidStatementError("X and U must be disjoint")
    x_idx, u_idx = sorted(x), sorted(u)
    idx = sorted(x | u)
    pos = {v: i for i, v in enumerate(idx)}
    x_pos = tuple(pos[v] for v in x_idx)
    u_pos = tuple(pos[v] for v in u_idx)
    joint = _project(p.mass, idx)
    px: dict = {}
    cond: dict = {}
    for outcome, m in joint.items():
        xk = tuple(outcome[i] for i in x_pos)
        uk = tuple(outcome[i] for i in u_pos)
        px[xk] = px.get(xk, p._zero()) + m
        cond.setdefault(xk, {})[uk] = m
    u_support = sorted({uk for d in cond.values() for uk in d})
    zero = p._zero()
    vectors = {
        xk: tuple(d.get(uk, zero) / px[xk] for uk in u_support)
        for xk, d in cond.items()
    }
    blocks: dict = {}
    labels: dict = {}
    if p.exact:
        for xk in sorted(vectors):
            vec = vectors[xk]
            if vec not in labels:
                labels[vec] = len(labels)
            blocks[xk] = labels[vec]
    else:
        reps: list[tuple[tuple, int]] = []
        for xk in sorted(vectors):
            vec = vectors[xk]
            for rep, lab in reps:
                if max(abs(r - v) for r, v in zip(rep, vec)) <= p.tolerance:
                    blocks[xk] = lab
                    break
            else:
                reps.append((vec, len(reps)))
                blocks[xk] = len(reps) - 1
    return StatisticPartition(tuple(x_idx), blocks)


def append_statistic(p: JointDist, part: StatisticPartition, label: str) -> JointDist:
    """Extend p with one more variable holding the partition's block id."""
    base = part.base_variables
    mass = {}
    for outcome, m in p.mass.items():
        block = part.block_of(tuple(outcome[i] for i in base))
        mass[outcome + (block,)] = m
    card = max(part.blocks.values()) + 1 if part.blocks else 1
    return JointDist(
        p.variables + (label,),
        p.cards + (card,),
        mass,
        exact=p.exact,
        tolerance=p.tolerance,
    )


class Majorization(enum.Enum):
    A_OVER_B = "A_over_B"
    B_OVER_A = "B_over_A"
    BOTH = "both"
    NEITHER = "neither"


def _validate_vector(vec: Sequence) -> list:
    out = list(vec)
    if any(v < 0 for v in out):
        raise NotNormalizedError("probability vector has a negative entry")
    total = sum(out, Fraction(0)) if all(isinstance(v, (int, Fraction)) for v in out) else sum(out)
    if isinstance(total, Fraction):
        if total != 1:
            raise NotNormalizedError(f"vector sums to {total}")
    elif abs(total - 1.0) > 1e-9:
        raise NotNormalizedError(f"vector sums to {total!r}")
    return out


def majorizes(pa: Sequence, pb: Sequence) -> Majorization:
    """Compare two probability vectors by descending prefix sums.

    A_OVER_B means pa majorizes pb; BOTH means the descending
    rearrangements are equal.
    """
    da = sorted(_validate_vector(pa), reverse=True)
    db = sorted(_validate_vector(pb), reverse=True)
    length = max(len(da), len(db))
    da += [0] * (length - len(da))
    db += [0] * (length - len(db))
    if da == db:
        return Majorization.BOTH
    sa = sb = 0
    a_ge = b_ge = True
    for x, y in zip(da, db):
        sa += x
        sb += y
        if sa < sb:
            a_ge = False
        if sb < sa:
            b_ge = False
    if a_ge:
        return Majorization.A_OVER_B
    if b_ge:
        return Majorization.B_OVER_A
    return Majorization.NEITHER


# --- distribution file format ------------------------------------------------

def parse_dist(text: str) -> JointDist:
    """Parse the distribution file format.

    Header ``vars: <label:card>+``, optional ``mode: approximate <tol>``
    line, then ``<outcome ints> <numerator>/<denominator>`` per line;
    omitted outcomes have mass 0. ``#`` starts a comment.
    """
    variables: list[str] = []
    cards: list[int] = []
    exact = True
    tolerance = DEFAULT_TOLERANCE
    mass: dict = {}
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not header_seen:
            if not line.startswith("vars:"):
                raise ParseError(f"line {lineno}: expected 'vars:' header")
            for token in line[len("vars:"):].split():
                if ":" not in token:
                    raise ParseError(f"line {lineno}: expected '<label>:<card>'")
                name, card = token.rsplit(":", 1)
                variables.append(name)
                try:
                    cards.append(int(card))
                except ValueError:
                    raise ParseError(f"line {lineno}: bad cardinality {card!r}") from None
            header_seen = True
            continue
        if line.startswith("mode:"):
            parts = line.split()
            if len(parts) < 2 or parts[1] not in ("exact", "approximate"):
                raise ParseError(f"line {lineno}: bad mode line")
            exact = parts[1] == "exact"
            if len(parts) > 2:
                tolerance = float(parts[2])
            continue
        tokens = line.split()
        if len(tokens) != len(variables) + 1:
            raise ParseError(f"line {lineno}: expected {len(variables)} outcomes and a mass")
        try:
            outcome = tuple(int(t) for t in tokens[:-1])
            value = Fraction(tokens[-1])
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"line {lineno}: bad outcome or mass") from None
        mass[outcome] = value if exact else float(value)
    if not header_seen:
        raise ParseError("missing 'vars:' header")
    return JointDist(tuple(variables), tuple(cards), mass, exact=exact, tolerance=tolerance)


def dist_to_text(p: JointDist) -> str:
    """Serialize a distribution (inverse of parse_dist). Float masses are
    written as their exact dyadic fractions so the round-trip is lossless.
    """
    lines = ["vars: " + " ".join(f"{v}:{c}" for v, c in zip(p.variables, p.cards))]
    if not p.exact:
        lines.append(f"mode: approximate {p.tolerance!r}")
    for outcome in p.support():
        m = p.mass[outcome]
        frac = m if isinstance(m, Fraction) else Fraction(*m.as_integer_ratio())
        lines.append(" ".join(map(str, outcome)) + f" {frac.numerator}/{frac.denominator}")
    return "\n".join(lines) + "\n"
