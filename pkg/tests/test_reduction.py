import itertools
import random
from fractions import Fraction

import pytest

from dagci import (
    CiStatement,
    Dag,
    ImplicationAInstance,
    ImplicationInstance,
    JointDist,
    OracleBudget,
    build_implication_b,
    check_ci,
    check_fd,
    check_mutual_independence,
    compile_pairwise_independencies,
    compile_two_networks,
    d_separated,
    duplicate_target_variable,
    format_instance,
    iid_extend_witness,
    implication_b_witness,
    parse_instance,
    refute_network_implication,
    satisfies_network,
    strip_vacuous_fds,
    trivial_witness,
)
from dagci.errors import (
    AlreadyDuplicatedError,
    AntecedentViolatedError,
    GuardExceededError,
    InvalidInstanceError,
    MissingDuplicateError,
    RangeTooLargeError,
)
from dagci.selftest import figure2_instance, xor_pv

F = Fraction


def uniform_v(size: int) -> JointDist:
    return JointDist(("v",), (size,), {(i,): F(1, size) for i in range(size)})


class TestDuplicateTargetVariable:
    def test_plain(self):
        inst = ImplicationInstance(n=3, target=(frozenset({1}), 3))
        out = duplicate_target_variable(inst)
        assert out.n == 4
        assert out.fds == ((frozenset({3}), 4), (frozenset({4}), 3))
        assert out.b0_prime == 4

    def test_keeps_existing_fds(self):
        inst = ImplicationInstance(
            n=4, fds=((frozenset({1, 3}), 2),), target=(frozenset({1}), 3)
        )
        out = duplicate_target_variable(inst)
        assert out.n == 5
        assert (frozenset({3}), 5) in out.fds and (frozenset({5}), 3) in out.fds

    def test_already_duplicated(self):
        inst = duplicate_target_variable(
            ImplicationInstance(n=3, target=(frozenset({1}), 3))
        )
        with pytest.raises(AlreadyDuplicatedError):
            duplicate_target_variable(inst)


class TestBuildRewriting:
    def test_variable_count(self):
        inst = build_implication_b(ImplicationAInstance(n=3, target=(frozenset({1}), 2)))
        assert inst.n == 29

    def test_fd_entry_count(self):
        inst = build_implication_b(ImplicationAInstance(n=3, target=(frozenset({1}), 2)))
        assert len(inst.fds) == 61

    def test_groups_disjoint(self):
        for n in (1, 2, 3, 4):
            inst = build_implication_b(ImplicationAInstance(n=n))
            assert not (inst.c1 & inst.c2)
            assert len(inst.c1) == 4
            assert len(inst.c2) == 3 * n + 1

    def test_rejects_remaining_pairwise(self):
        inst = ImplicationAInstance(n=3, pairwise_indep=((1, 2),))
        with pytest.raises(InvalidInstanceError):
            build_implication_b(inst)

    def test_pairwise_precompilation(self):
        inst = ImplicationAInstance(n=4, pairwise_indep=((1, 4), (2, 4)))
        out = compile_pairwise_independencies(inst)
        assert out.pairwise_indep == ()
        assert out.n == 6
        assert len(out.fds) == 12
        assert (frozenset({1, 4, 5}), 2) in out.fds


class TestCompileTwoNetworks:
    def test_figure_fixture_counts(self):
        out = compile_two_networks(figure2_instance())
        assert out.network1.node_count == 24
        assert len(out.network1.edges) == 25
        assert len(out.network2.edges) == 26

    def test_node_ordering_and_roles(self):
        out = compile_two_networks(figure2_instance())
        labels = out.network1.node_labels
        assert labels[:8] == ("U_1", "U_2", "U_3", "U_4", "Y_1", "Y_2", "Y_3", "Y_4")
        assert labels[8:11] == ("X_1^1", "X_1^2", "X_1^3")
        assert labels[-4:] == ("Z_1", "Z_2", "Z_3", "Z_4")
        assert [r.label for r in out.roles] == list(labels)

    def test_target_over_y_nodes(self):
        out = compile_two_networks(figure2_instance())
        y = {lab: i for i, lab in enumerate(out.network1.node_labels)}
        assert out.target_ci == CiStatement(
            frozenset({y["Y_3"]}), frozenset({y["Y_1"]}), frozenset({y["Y_4"]})
        )

    def test_missing_duplicate(self):
        inst = ImplicationInstance(n=3, target=(frozenset({1}), 3))
        with pytest.raises(MissingDuplicateError):
            compile_two_networks(inst)

    def test_vacuous_fds_rejected_then_strippable(self):
        base = duplicate_target_variable(
            ImplicationInstance(n=3, target=(frozenset({1}), 3))
        )
        vac = ImplicationInstance(
            base.n, base.c1, base.c2,
            base.fds + ((frozenset({1, 2}), 2),), base.target, base.b0_prime,
        )
        with pytest.raises(InvalidInstanceError):
            compile_two_networks(vac)
        stripped = strip_vacuous_fds(vac)
        assert compile_two_networks(stripped).network1.node_count == 4 * (2 + 3)

    def test_random_instances_compile_acyclic(self):
        rng = random.Random(17)
        built = 0
        for _ in range(60):
            n = rng.randint(3, 5)
            indices = list(range(1, n + 1))
            a0 = rng.choice(indices)
            b0 = rng.choice([i for i in indices if i != a0])
            fds = []
            for _ in range(rng.randint(0, 2)):
                b = rng.choice(indices)
                pool = [i for i in indices if i != b]
                a = frozenset(rng.sample(pool, rng.randint(1, min(2, len(pool)))))
                fds.append((a, b))
            inst = ImplicationInstance(
                n=n,
                c1=frozenset(rng.sample(indices, rng.randint(0, n))),
                c2=frozenset(rng.sample(indices, rng.randint(0, n))),
                fds=tuple(fds),
                target=(frozenset({a0}), b0),
            )
            inst = duplicate_target_variable(inst)
            out = compile_two_networks(inst)  # Dag construction checks acyclicity
            assert out.network1.node_count == inst.n * (len(inst.fds) + 3)
            built += 1
        assert built == 60


class TestTrivialWitness:
    def test_figure_witness_properties(self):
        inst = figure2_instance()
        out = compile_two_networks(inst)
        witness = trivial_witness(inst, xor_pv())
        res1 = satisfies_network(witness, out.network1)
        res2 = satisfies_network(witness, out.network2)
        assert res1.holds and res1.residual == 0
        assert res2.holds and res2.residual == 0
        assert not check_ci(witness, out.target_ci).holds

    def test_antecedent_violation_rejected(self):
        inst = figure2_instance()
        mass = {}
        for v1, v3, v4 in itertools.product((0, 1), repeat=3):
            mass[(v1, v1 ^ v3, v3, v4)] = F(1, 8)  # V4 independent, not a copy
        bad = JointDist(("V1", "V2", "V3", "V4"), (2, 2, 2, 2), mass)
        with pytest.raises(AntecedentViolatedError):
            trivial_witness(inst, bad)

    def test_missing_duplicate(self, xor_triple):
        inst = ImplicationInstance(n=3, target=(frozenset({1}), 3))
        with pytest.raises(MissingDuplicateError):
            trivial_witness(inst, xor_triple)


class TestImplicationBWitness:
    def test_n1_pad_layer_mutually_independent(self):
        inst = ImplicationAInstance(n=1)
        pv = JointDist(("V1",), (2,), {(0,): F(1, 2), (1,): F(1, 2)})
        witness = implication_b_witness(pv, inst)
        inst_b = build_implication_b(inst)
        res = check_mutual_independence(witness, {i - 1 for i in inst_b.c2})
        assert res.holds and res.residual == 0

    def test_n1_cyclic_dependency(self):
        inst = ImplicationAInstance(n=1)
        pv = JointDist(("V1",), (2,), {(0,): F(1, 2), (1,): F(1, 2)})
        witness = implication_b_witness(pv, inst)
        # W_1 is recoverable from (W_4, Q): indices V1,V2,V3,W1..W4,M1..M3,Q
        names = witness.variables
        w1, w4, q = names.index("W1"), names.index("W4"), names.index("Q")
        assert check_fd(witness, {w4, q}, w1)

    def test_degenerate_cardinality_one(self):
        inst = ImplicationAInstance(n=2)
        pv = JointDist(("V1", "V2"), (1, 1), {(0, 0): F(1)})
        witness = implication_b_witness(pv, inst)
        inst_b = build_implication_b(inst)
        for a, b in inst_b.fds:
            if b not in a:
                assert check_fd(witness, {i - 1 for i in a}, b - 1)

    def test_nonuniform_rejected(self):
        inst = ImplicationAInstance(n=1)
        pv = JointDist(("V1",), (2,), {(0,): F(1, 3), (1,): F(2, 3)})
        with pytest.raises(AntecedentViolatedError):
            implication_b_witness(pv, inst)

    def test_guard(self):
        inst = ImplicationAInstance(n=3)
        mass = {o: F(1, 8) for o in itertools.product((0, 1), repeat=3)}
        pv = JointDist(("V1", "V2", "V3"), (2, 2, 2), mass)
        with pytest.raises(GuardExceededError):
            implication_b_witness(pv, inst)


class TestIidExtension:
    def test_bit_split(self):
        ext = iid_extend_witness(uniform_v(4), [[v >> 1 for v in range(4)]], 2)
        assert ext is not None
        (y,) = ext.y_functions
        pairs = {((v >> 1), y[v]) for v in range(4)}
        assert len(pairs) == 4
        assert sorted(y).count(0) == 2

    def test_and_function_has_no_extension(self):
        and_f = [(v >> 1) & (v & 1) for v in range(4)]
        assert iid_extend_witness(uniform_v(4), [and_f], 2) is None

    def test_full_split_boundary(self):
        low = [v & 1 for v in range(4)]
        high = [v >> 1 for v in range(4)]
        ext = iid_extend_witness(uniform_v(4), [low, high], 2)
        assert ext is not None and ext.y_functions == ()

    def test_range_too_large(self):
        with pytest.raises(RangeTooLargeError):
            iid_extend_witness(uniform_v(4), [[0, 1, 2, 0]], 2)


class TestRoundTrip:
    def test_failing_instance_has_witness_counterexample(self):
        inst = figure2_instance()
        out = compile_two_networks(inst)
        witness = trivial_witness(inst, xor_pv())
        assert not check_ci(witness, out.target_ci).holds

    def test_holding_instance_is_never_refuted(self):
        # All of U_1..U_3 independent in network 1, so the Y-branches are
        # disconnected there and the target is d-separated: the oracle must
        # report no counterexample.
        inst = ImplicationInstance(
            n=3,
            c1=frozenset({1, 2, 3}),
            fds=((frozenset({2}), 3), (frozenset({3}), 2)),
            target=(frozenset({1}), 2),
            b0_prime=3,
        )
        out = compile_two_networks(inst)
        assert d_separated(out.network1, out.target_ci.a, out.target_ci.b, out.target_ci.c)
        budget = OracleBudget(seed=0, restarts=2, iterations=50)
        assert refute_network_implication(out.network1, out.network2, out.target_ci, budget) is None


class TestInstanceFiles:
    def test_two_group_roundtrip(self):
        inst = figure2_instance()
        parsed = parse_instance(format_instance(inst))
        assert parsed == inst

    def test_uniform_form_roundtrip(self):
        inst = ImplicationAInstance(
            n=4, fds=((frozenset({1, 2}), 3),), pairwise_indep=((1, 4),),
            target=(frozenset({1}), 3),
        )
        parsed = parse_instance(format_instance(inst))
        assert parsed == inst

    def test_fig2_text(self):
        text = """
n 4
group1 1 2
group2 2 3
fd 1 3 -> 2
fd 3 -> 4
fd 4 -> 3
target 1 -> 3
dup 4
"""
        assert parse_instance(text) == figure2_instance()
