import pytest
from hypothesis import given, settings

from gpcert.boardgame import CollapseMap, reduce_to_echelon
from gpcert.harness.criteria import load_golden
from gpcert.trees import (
    INTERNAL,
    LEAF,
    ROOT,
    all_labelings,
    build_forest,
    extract_labeling,
    reassemble,
    subtree_stats,
)

from .test_boardgame import collapse_maps


@pytest.fixture
def example_forest():
    return build_forest(CollapseMap(3, (2, 2, 3, 5)))


def test_golden_forest(example_forest):
    g = load_golden("forest_k3.json")
    f = example_forest
    assert f.distinguished_tree == g["distinguished_tree"]
    for j, want in g["trees"].items():
        j = int(j)
        assert f.internal_of(j) == want["internal"]
        assert f.leaves_of(j) == want["leaves"]
        if want["internal"]:
            assert list(extract_labeling(f, j).sigma) == want["sigma"]


def test_bare_edge_tree(example_forest):
    assert example_forest.root_child[0] == (LEAF, 1)
    with pytest.raises(ValueError):
        extract_labeling(example_forest, 1)
    assert all_labelings(example_forest)[1] is None


def test_single_contraction():
    f = build_forest(CollapseMap(1, (1,)))
    assert f.children((ROOT, 1)) == ((INTERNAL, 1),)
    assert set(f.children((INTERNAL, 1))) == {(LEAF, 1), (LEAF, 2)}
    assert f.kind((LEAF, 1)) == f.kind((LEAF, 2)) == "leaf-distinguished"


def test_k2_r1():
    f = build_forest(CollapseMap(2, (2,)))
    assert f.children((ROOT, 1)) == ((LEAF, 1),)
    assert f.children((ROOT, 2)) == ((INTERNAL, 1),)
    assert set(f.leaves_of(2)) == {2, 3}
    assert f.distinguished_tree == 2


def test_golden_kappa_path():
    g = load_golden("kappa_path.json")
    f = build_forest(CollapseMap(g["k"], g["rho"]))
    lab = extract_labeling(f, 1)
    for a, b in g["kappa_minus"].items():
        assert lab.kappa_minus[int(a)] == b
    for a, b in g["kappa_plus"].items():
        assert lab.kappa_plus[int(a)] == b
    for q, b in g["kappa_plus_power"].items():
        assert lab.kappa_plus_power(int(q)) == b
    leaves = sorted(a for a in range(lab.m + 1, 2 * lab.m + 2) if lab.leaf_is_distinguished(a))
    assert leaves == g["distinguished_leaves"]


@pytest.mark.parametrize(
    "k,rho,j,alpha,expected",
    [
        (1, (1,), 1, 1, (1, 0)),
        (3, (2, 2, 3, 5), 2, 1, (3, 2)),
        (3, (2, 2, 3, 5), 3, 1, (1, 2)),
    ],
)
def test_subtree_stats_examples(k, rho, j, alpha, expected):
    lab = extract_labeling(build_forest(CollapseMap(k, rho)), j)
    assert subtree_stats(lab, alpha) == expected


def test_subtree_stats_rejects_leaf_label():
    lab = extract_labeling(build_forest(CollapseMap(1, (1,))), 1)
    with pytest.raises(ValueError):
        subtree_stats(lab, 2)


@settings(max_examples=300, deadline=None)
@given(collapse_maps())
def test_forest_invariants(m):
    f = build_forest(m)
    parents = {}
    for v in f.vertices:
        kids = f.children(v)
        if v[0] == ROOT:
            assert len(kids) == 1
        elif v[0] == INTERNAL:
            assert len(kids) == 2
        for c in kids:
            assert c not in parents
            parents[c] = v
    assert set(parents) == {v for v in f.vertices if v[0] != ROOT}
    assert sum(len(f.internal_of(j)) for j in range(1, m.k + 1)) == m.r
    assert sum(len(f.leaves_of(j)) for j in range(1, m.k + 1)) == m.k + m.r
    dist = [v for v in f.vertices if f.kind(v) == "leaf-distinguished"]
    assert len(dist) == 2
    assert all(f.tree_of(v) == f.distinguished_tree for v in dist)
    assert sum(f.is_distinguished(j) for j in range(1, m.k + 1)) == 1
    assert reassemble(f) == m.rho


@settings(max_examples=200, deadline=None)
@given(collapse_maps())
def test_labeling_invariants(m):
    f = build_forest(m)
    for j, lab in all_labelings(f).items():
        if lab is None:
            continue
        assert lab.sigma[0] == 1
        assert sorted(lab.time_binding.values()) == f.internal_of(j)
        d, b = subtree_stats(lab, 1)
        assert d == lab.m
        leaves = [a for a in lab.subtree(1) if lab.is_leaf(a)]
        assert sorted(leaves) == list(range(lab.m + 1, 2 * lab.m + 2))
        if lab.distinguished:
            assert b == lab.m - 1
            # the last label hosts the final contraction
            assert lab.time_binding[lab.m] == m.r
        else:
            assert b == lab.m + 1


@settings(max_examples=200, deadline=None)
@given(collapse_maps())
def test_echelon_sigma_nondecreasing(m):
    form, _ = reduce_to_echelon(m)
    for lab in all_labelings(build_forest(form)).values():
        if lab is not None:
            assert list(lab.sigma) == sorted(lab.sigma)


def test_dot_and_text(example_forest):
    dot = example_forest.to_dot()
    assert dot.startswith("digraph") and "v4 -> u7" in dot
    assert "tree 2 (distinguished)" in example_forest.adjacency_text()
