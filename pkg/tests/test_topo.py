import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import mixtures
from ridgetopo import model, piplot, topo
from ridgetopo.errors import ZeroWeightPair
from ridgetopo.model import Mixture
from ridgetopo.ridgeline import CriticalKind
from ridgetopo.topo import LinkReason, Method


def test_single_component():
    m = Mixture.from_arrays([[1.0, -2.0]], [np.eye(2)], [1.0])
    rep = topo.full_topography(m)
    assert rep.method is Method.SINGLE and rep.mode_count == 1
    np.testing.assert_allclose(rep.modes[0].x, [1.0, -2.0])


def test_example1(ex1):
    rep = topo.full_topography(ex1)
    assert rep.method is Method.EXACT_K2
    assert rep.summary() == "3 modes, 2 saddles"
    centre = min(rep.modes, key=lambda c: abs(c.alpha[1] - 0.5))
    np.testing.assert_allclose(centre.x, [0.952, 0.048], atol=5e-4)
    # modes and saddles alternate along the ridgeline
    order = sorted(rep.critical_points, key=lambda c: c.alpha[1])
    assert [c.kind is CriticalKind.MODE for c in order] == [True, False, True, False, True]


def test_example2(ex2):
    rep = topo.full_topography(ex2)
    assert rep.mode_count == 4 and rep.saddle_count == 3


def test_example3_modes_near_means(ex3):
    rep = topo.full_topography(ex3)
    assert rep.method is Method.GRID_K3 and rep.mode_count == 3
    for mode in rep.modes:
        assert np.min(np.linalg.norm(ex3.means - mode.x, axis=1)) <= 0.25


def test_example4_five_modes(ex4):
    rep = topo.full_topography(ex4)
    assert rep.mode_count == 5 and not rep.heuristic


@pytest.mark.parametrize("pair", [(0, 1), (1, 2)])
def test_example4_pairs_cross_five_times(ex4, pair):
    i, j = pair
    assert topo.pair_weight(ex4, i, j) == pytest.approx(0.5)
    assert len(piplot.solve_pi_equation(ex4, i, j, 0.5)) == 5
    assert topo.analyze_pair(ex4, i, j).mode_count == 3


def test_duplicate_components_unimodal_pair():
    m = Mixture.from_arrays([[0.0, 1.0]] * 2, [np.diag([1.0, 2.0])] * 2, [0.3, 0.7])
    rep = topo.analyze_pair(m, 0, 1)
    assert rep.mode_count == 1
    np.testing.assert_allclose(rep.modes[0].x, [0.0, 1.0], atol=1e-10)


def test_zero_weight_pair():
    m = Mixture.from_arrays([[0.0], [1.0], [5.0]], [[[1.0]]] * 3, [0.0, 0.0, 1.0])
    with pytest.raises(ZeroWeightPair):
        topo.analyze_pair(m, 0, 1)


def test_zero_weight_component_dropped():
    m = Mixture.from_arrays([[0.0], [6.0], [3.0]], [[[1.0]]] * 3, [0.5, 0.5, 0.0])
    rep = topo.full_topography(m)
    assert rep.method is Method.EXACT_K2 and rep.mode_count == 2
    assert all(c.alpha[2] == 0.0 for c in rep.critical_points)


def test_equal_weights_override(ex1):
    skewed = ex1.with_weights([0.99, 0.01])
    assert topo.analyze_pair(skewed, 0, 1).mode_count == 1
    assert topo.analyze_pair(skewed, 0, 1, equal_weights=True).mode_count == 3


@pytest.mark.parametrize("n", [1, 3, 4])
def test_reported_points_are_critical(n):
    m = model.load_example(n)
    for c in topo.full_topography(m).critical_points:
        assert model.relative_gradient(m, c.x) <= 1e-8
        np.testing.assert_allclose(model.posterior(m, c.x), c.alpha, atol=1e-8)


def test_k4_is_heuristic():
    rng = np.random.default_rng(3)
    means = np.array([[0.0, 0.0], [8.0, 0.0], [0.0, 8.0], [8.0, 8.0]])
    m = Mixture.from_arrays(means + rng.normal(scale=0.1, size=(4, 2)), [np.eye(2)] * 4, [0.25] * 4)
    rep = topo.full_topography(m, n_starts=200)
    assert rep.method is Method.MULTISTART and rep.heuristic
    assert rep.summary() == "4 modes, 0 saddles (heuristic)"
    assert any("heuristic" in d for d in rep.diagnostics)


@given(mixtures(k=3, dims=(2,)), st.permutations(range(3)))
def test_mode_set_invariant_under_relabelling(m, perm):
    p = Mixture(tuple(m.components[i] for i in perm), m.weights[list(perm)])
    a = sorted(tuple(np.round(c.x, 5)) for c in topo.full_topography(m, resolution=120).modes)
    b = sorted(tuple(np.round(c.x, 5)) for c in topo.full_topography(p, resolution=120).modes)
    assert len(a) == len(b)
    np.testing.assert_allclose(a, b, atol=1e-6)


@given(mixtures(k=2))
def test_k2_kinds_alternate(m):
    rep = topo.full_topography(m)
    order = sorted(rep.critical_points, key=lambda c: c.alpha[1])
    is_mode = [c.kind is CriticalKind.MODE for c in order]
    assert is_mode == [n % 2 == 0 for n in range(len(order))] and rep.mode_count >= 1


def test_report_json(ex1):
    d = topo.full_topography(ex1).to_dict()
    assert d["method"] == "ExactK2" and d["mode_count"] == 3 and len(d["pairs"]) == 1
    assert {"alpha", "x", "elevation", "kind", "neg_eigs"} <= set(d["critical_points"][0])


# linkage


def test_identical_components_one_block():
    m = Mixture.from_arrays([[1.0, 1.0]] * 3, [np.eye(2)] * 3, [0.2, 0.3, 0.5])
    g = topo.linkage_graph(m)
    assert len(g.edges) == 3 and all(e.reason is LinkReason.UNIMODAL for e in g.edges)
    assert g.supercomponents == [[0, 1, 2]]


def test_example4_three_singletons(ex4):
    g = topo.linkage_graph(ex4)
    assert g.edges == [] and g.supercomponents == [[0], [1], [2]]
    assert topo.supercomponents(ex4) == [[0], [1], [2]]


def test_two_far_pairs_of_near_duplicates():
    # within each pair Mahalanobis^2 = 1 < 4, across pairs it is 400
    means = [[0.0, 0.0], [1.0, 0.0], [20.0, 0.0], [21.0, 0.0]]
    m = Mixture.from_arrays(means, [np.eye(2)] * 4, [0.25] * 4)
    assert topo.supercomponents(m) == [[0, 1], [2, 3]]


def test_high_pass_edges():
    m = Mixture.from_arrays([[0.0], [2.5]], [[[1.0]], [[1.0]]], [0.5, 0.5])
    rep = topo.analyze_pair(m, 0, 1)
    ratio = rep.saddle_ratio()
    assert rep.mode_count == 2 and 0.0 < ratio < 1.0
    assert topo.linkage_graph(m).edges == []
    edge = topo.linkage_graph(m, high_pass_tau=ratio - 1e-6).edges[0]
    assert edge.reason is LinkReason.HIGH_PASS and edge.saddle_ratio == pytest.approx(ratio)
    assert topo.linkage_graph(m, high_pass_tau=ratio + 1e-6).edges == []
    with pytest.raises(ValueError):
        topo.linkage_graph(m, high_pass_tau=1.5)


def test_dot_output():
    m = Mixture.from_arrays([[0.0], [0.5], [30.0]], [[[1.0]]] * 3, [1 / 3] * 3)
    g = topo.linkage_graph(m)
    assert g.to_dot() == "graph linkage {\n  1;\n  2;\n  3;\n  1 -- 2;\n}\n"
    assert g.to_dict()["supercomponents"] == [[1, 2], [3]]


@given(mixtures(k=3, dims=(1, 2)))
def test_supercomponents_partition_nodes(m):
    g = topo.linkage_graph(m)
    assert sorted(n for b in g.supercomponents for n in b) == [0, 1, 2]
    for e in g.edges:
        assert any(e.i in b and e.j in b for b in g.supercomponents)
