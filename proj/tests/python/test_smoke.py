"""Smoke tests for the steinrl Python module."""

import pytest

import steinrl

PATH4 = """SECTION Graph
Nodes 4
Edges 4
E 1 2 1
E 2 3 1
E 3 4 1
E 1 4 5
END
SECTION Terminals
Terminals 2
T 1
T 4
END
EOF
"""


def test_parse_and_round_trip():
    inst = steinrl.parse_steinlib(PATH4)
    assert inst.vertex_count == 4
    assert inst.terminals == [0, 3]
    assert steinrl.parse_steinlib(steinrl.write_steinlib(inst)) == inst


def test_parse_error_is_value_error():
    with pytest.raises(ValueError):
        steinrl.parse_steinlib("SECTION Graph\nNodes 2\n")


def test_exact_and_classic():
    inst = steinrl.parse_steinlib(PATH4)
    best = steinrl.exact(inst)
    assert best.cost == 3.0
    assert best.edges == [(0, 1), (1, 2), (2, 3)]
    assert steinrl.kmb(inst).cost == 3.0


def test_verify_tree_rejects_non_edge():
    inst = steinrl.Instance(3, [(0, 1, 1.0), (1, 2, 1.0)], [0, 2])
    assert steinrl.verify_tree(inst, [(0, 1), (1, 2)]).cost == 2.0
    with pytest.raises(steinrl.TreeError):
        steinrl.verify_tree(inst, [(0, 2)])


def test_generated_agent_is_verified():
    inst = steinrl.generate("rr:n=20", seed=7)
    assert inst == steinrl.generate("rr:n=20", seed=7)
    qnet = steinrl.initialize_qnet(p=8, k=2, seed=1)
    tree = steinrl.agent(inst, qnet)
    assert steinrl.verify_tree(inst, tree.edges).cost == tree.cost
    assert tree.cost >= steinrl.exact(inst).cost


def test_sat_reduction_recovers_assignment():
    inst, witness = steinrl.reduce_sat("p cnf 2 2\n1 -2 0\n2 0\n")
    tree = steinrl.exact(inst)
    assert tree.cost <= inst.bound
    assert steinrl.recover(witness, tree) == [1, 1]


def test_metrics():
    assert steinrl.metric_gain(86, 90) == pytest.approx(0.9556, abs=1e-4)
    assert steinrl.metric_r(86, 83) == pytest.approx(1.0361, abs=1e-4)
    with pytest.raises(ValueError):
        steinrl.metric_b(1.0, 0.0)


def test_bench_is_deterministic():
    first = steinrl.bench("rr:n=12", "classic,exact", count=3, seed=4)
    second = steinrl.bench("rr:n=12", ["classic", "exact"], count=3, seed=4, jobs=2)
    assert first == second
    assert len(first["rows"]) == 6
    exact = [a for a in first["aggregates"] if a["method"] == "exact"][0]
    assert exact["mean_ratio"] <= 1.0
