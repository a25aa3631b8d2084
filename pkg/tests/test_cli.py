import os

import pytest

from dagci import parse_dag, parse_dist, parse_ci
from dagci.cli import main
from dagci.selftest import figure2_instance
from dagci.reduction import format_instance

CHAIN = "nodes: a b c\na -> b\nb -> c\n"

FIG2 = format_instance(figure2_instance())

XOR_PV = """vars: V1:2 V2:2 V3:2 V4:2
0 0 0 0 1/4
0 1 1 1 1/4
1 1 0 0 1/4
1 0 1 1 1/4
"""

REFUTE_CI_SPEC = """vars: a:2 b:2 c:2
ci a _||_ b
target a _||_ b | c
"""

REFUTE_NET_SPEC = """vars: a:2 b:2 c:2
network chain.dag
target a _||_ c
"""


@pytest.fixture
def chain_file(tmp_path):
    path = tmp_path / "chain.dag"
    path.write_text(CHAIN)
    return str(path)


class TestDsep:
    def test_true_exit_zero(self, chain_file, capsys):
        assert main(["dsep", chain_file, "a _||_ c | b"]) == 0
        assert capsys.readouterr().out.strip() == "true"

    def test_false_exit_one(self, chain_file, capsys):
        assert main(["dsep", chain_file, "a _||_ c"]) == 1
        assert capsys.readouterr().out.strip() == "false"

    def test_bad_file_exit_two(self, tmp_path, capsys):
        bad = tmp_path / "bad.dag"
        bad.write_text("nodes: a\na -> z\n")
        assert main(["dsep", str(bad), "a _||_ a"]) == 2
        assert "error:" in capsys.readouterr().err


class TestCiListing:
    def test_localci_roundtrips(self, chain_file, capsys):
        assert main(["localci", chain_file]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert out == ["a _||_ c | b"]
        g = parse_dag(CHAIN)
        for line in out:
            parse_ci(line, g.node_labels)

    def test_impliedci(self, chain_file, capsys):
        assert main(["impliedci", chain_file]) == 0
        assert "a _||_ c | b" in capsys.readouterr().out


class TestInclusion:
    def test_markov_equivalence(self, tmp_path, capsys):
        fwd = tmp_path / "f.dag"
        rev = tmp_path / "r.dag"
        fwd.write_text(CHAIN)
        rev.write_text("nodes: a b c\nc -> b\nb -> a\n")
        assert main(["inclusion", str(fwd), str(rev)]) == 0
        assert capsys.readouterr().out.strip() == "true"
        assert main(["inclusion", str(fwd), str(fwd)]) == 0

    def test_rejection(self, tmp_path, capsys):
        g1 = tmp_path / "g1.dag"
        g0 = tmp_path / "g0.dag"
        g1.write_text("nodes: a b\na -> b\n")
        g0.write_text("nodes: a b\n")
        assert main(["inclusion", str(g1), str(g0)]) == 1
        assert capsys.readouterr().out.strip() == "false"


class TestClosure:
    def test_contraction_derived(self, tmp_path, capsys):
        cis = tmp_path / "set.ci"
        cis.write_text("vars: a b c\na _||_ b\na _||_ c | b\n")
        assert main(["closure", str(cis), "3"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert "a _||_ b,c" in lines


class TestReduce:
    def test_writes_networks_and_figures(self, tmp_path, capsys):
        inst = tmp_path / "fig2.inst"
        inst.write_text(FIG2)
        out_dir = tmp_path / "out"
        assert main(["reduce", str(inst), "--out", str(out_dir)]) == 0
        net1 = parse_dag((out_dir / "network1.dag").read_text())
        net2 = parse_dag((out_dir / "network2.dag").read_text())
        assert len(net1.edges) == 25
        assert len(net2.edges) == 26
        target_line = (out_dir / "target.ci").read_text().strip()
        assert parse_ci(target_line, net1.node_labels)
        for name in ("network1.png", "network2.png"):
            png = out_dir / name
            assert png.exists()
            assert png.read_bytes()[:4] == b"\x89PNG"
        stdout = capsys.readouterr().out
        assert "network1 edges 25" in stdout

    def test_no_plot_and_dot(self, tmp_path):
        inst = tmp_path / "fig2.inst"
        inst.write_text(FIG2)
        out_dir = tmp_path / "out"
        assert main([
            "reduce", str(inst), "--out", str(out_dir), "--no-plot", "--format", "dot",
        ]) == 0
        assert (out_dir / "network1.dot").read_text().startswith("digraph")
        assert not (out_dir / "network1.png").exists()


class TestRefute:
    def test_deterministic_output(self, tmp_path, capsys):
        spec = tmp_path / "ci.spec"
        spec.write_text(REFUTE_CI_SPEC)
        args = ["refute", str(spec), "--seed", "7", "--restarts", "8",
                "--iterations", "200"]
        assert main(args) == 1
        first = capsys.readouterr().out
        assert main(args) == 1
        second = capsys.readouterr().out
        assert first == second

    def test_counterexample_roundtrips(self, tmp_path, capsys):
        spec = tmp_path / "ci.spec"
        spec.write_text(REFUTE_CI_SPEC)
        assert main(["refute", str(spec), "--seed", "1", "--restarts", "8",
                     "--iterations", "200"]) == 1
        out = capsys.readouterr().out
        dist = parse_dist(out)
        assert dist.variables == ("a", "b", "c")
        assert "# target" in out

    def test_network_spec_inconclusive(self, tmp_path, capsys):
        (tmp_path / "chain.dag").write_text(CHAIN)
        spec = tmp_path / "net.spec"
        spec.write_text("vars: a:2 b:2 c:2\nnetwork chain.dag\ntarget a _||_ c | b\n")
        assert main(["refute", str(spec), "--seed", "1"]) == 0
        assert capsys.readouterr().out.strip() == "inconclusive"

    def test_network_spec_refuted(self, tmp_path, capsys):
        (tmp_path / "chain.dag").write_text(CHAIN)
        spec = tmp_path / "net.spec"
        spec.write_text(REFUTE_NET_SPEC)
        assert main(["refute", str(spec), "--seed", "1", "--restarts", "8",
                     "--iterations", "200"]) == 1
        out = capsys.readouterr().out
        assert "# network 1 residual" in out


class TestWitness:
    def test_trivial_witness(self, tmp_path, capsys):
        inst = tmp_path / "fig2.inst"
        inst.write_text(FIG2)
        pv = tmp_path / "pv.dist"
        pv.write_text(XOR_PV)
        out_file = tmp_path / "w.dist"
        assert main(["witness", str(inst), str(pv), "--out", str(out_file)]) == 0
        witness = parse_dist(out_file.read_text())
        assert witness.variable_count == 24
        assert len(witness.mass) == 4

    def test_rewriting_witness(self, tmp_path, capsys):
        inst = tmp_path / "a.inst"
        inst.write_text("n 1\n")
        pv = tmp_path / "pv.dist"
        pv.write_text("vars: V1:2\n0 1/2\n1 1/2\n")
        assert main(["witness", str(inst), str(pv)]) == 0
        witness = parse_dist(capsys.readouterr().out)
        assert witness.variable_count == 11
