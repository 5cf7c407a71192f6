import math
from collections import Counter

import numpy as np
import pytest
from scipy import stats

import oracles
from permclass.analytic import ClassSpec, build_offspring_model
from permclass.errors import InsufficientRealizationError, InvalidInputError
from permclass.limit_trees import (n_proper_trees, sample_limit_pointed_tree,
                                   sample_limit_skeleton_tree, sample_proper_tree, sample_stretch)
from permclass.perm import pattern_at
from permclass.trees import Gadget, decode_packed


@pytest.fixture(scope="module")
def s4():
    spec = ClassSpec.load("simple4")
    return spec, build_offspring_model(spec)


def test_n_proper_trees():
    assert [n_proper_trees(k) for k in range(1, 5)] == [1, 2, 12, 120]
    for k in range(1, 7):
        assert n_proper_trees(k) == math.factorial(k) * math.comb(2 * k - 2, k - 1) // k


@pytest.mark.parametrize("k", [2, 3])
def test_proper_trees_uniform(k):
    rng = np.random.default_rng(k)
    draws = 1000 * n_proper_trees(k)
    counts = Counter()
    for _ in range(draws):
        deg, marks = sample_proper_tree(k, rng)
        assert deg[0] == 1 and sorted(m for m in marks if m) == list(range(1, k + 1))
        assert all(d in (0, 2) for d in deg[1:])
        counts[(tuple(deg), tuple(marks))] += 1
    assert len(counts) == n_proper_trees(k)
    obs = np.array(list(counts.values()))
    assert stats.chisquare(obs).pvalue > 0.001


def test_proper_tree_k1():
    deg, marks = sample_proper_tree(1, np.random.default_rng(0))
    assert deg == [1, 0] and marks == [0, 1]
    with pytest.raises(InvalidInputError):
        sample_proper_tree(0, np.random.default_rng(0))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_stretch_total_matches_quadrature(k):
    rng = np.random.default_rng(10 + k)
    totals = np.array([sample_stretch(k, rng).sum() for _ in range(4000)])
    res = stats.kstest(totals, np.vectorize(lambda x: oracles.chi_cdf_by_quadrature(x, k)))
    assert res.statistic < 0.03
    # the quadrature CDF and the chi(2k) law coincide
    for x in (0.5, 1.0, 2.0, 3.5):
        assert oracles.chi_cdf_by_quadrature(x, k) == pytest.approx(stats.chi(2 * k).cdf(x), abs=1e-9)


def test_stretch_split_is_flat_dirichlet():
    k = 3
    rng = np.random.default_rng(4)
    s = np.array([sample_stretch(k, rng) for _ in range(4000)])
    assert s.shape[1] == 2 * k - 1
    props = s / s.sum(axis=1, keepdims=True)
    for j in range(2 * k - 1):
        assert stats.kstest(props[:, j], stats.beta(1, 2 * k - 2).cdf).pvalue > 0.001
    # the split is independent of the total
    assert abs(np.corrcoef(s.sum(axis=1), props[:, 0])[0, 1]) < 0.06


def test_spine_degrees_size_biased(s4):
    spec, model = s4
    rng = np.random.default_rng(2)
    degs = []
    T = sample_limit_pointed_tree(model, spec, 3000, rng, left_budget=0, right_budget=0)
    for i in range(1, T.height + 1):
        v = T.spine[i]
        degs.append(T.degree[v])
    degs = np.array(degs)
    se = degs.std() / math.sqrt(len(degs))
    assert abs(degs.mean() - (1 + model.sigma2)) < 4 * se
    # position of the spine child is uniform given the degree
    pos = np.array([T.child_index[T.spine[i - 1]] for i in range(1, T.height + 1)])
    u = (pos + rng.random(len(pos))) / degs
    assert stats.kstest(u, "uniform").pvalue > 0.001


def test_left_child_gadget_rate(s4):
    spec, model = s4
    rng = np.random.default_rng(3)
    T = sample_limit_pointed_tree(model, spec, 20000, rng, left_budget=0, right_budget=0)
    hits = 0
    for i in range(1, T.height + 1):
        v = T.spine[i]
        hits += T.child_index[T.spine[i - 1]] > 0 and isinstance(T.dec[v], Gadget)
    d = np.arange(model.K + 1)
    q = np.array([spec.q(int(x)) if x >= 2 else 1 for x in d], dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(d >= 2, model.hat_pmf * (1 - 1 / d) * (q - 1) / q, 0.0)
    want = float(terms.sum())
    est = hits / T.height
    assert abs(est - want) < 3 * math.sqrt(want * (1 - want) / T.height) + 1e-3


def test_certified_window_matches_finite_decoding(s4):
    spec, model = s4
    checked = 0
    for seed in range(120):
        T = sample_limit_pointed_tree(model, spec, 1, np.random.default_rng(seed), fringe_cap=5000)
        try:
            T.ensure_window(2, 2)
        except InsufficientRealizationError:
            continue
        while T.certifying_gadget(2, 2) is None and T.height < 200:
            T.grow(T.height + 1)
        if any(T.cap_hit.values()) or T.certifying_gadget(2, 2) is None:
            continue
        tree, leaf = T.to_finite()
        nu = decode_packed(tree)
        assert T.read_window(2, 2) == pattern_at(nu, range(leaf - 2, leaf + 3))
        checked += 1
    assert checked > 30


def test_signed_window_matches_finite_decoding():
    spec = ClassSpec.load("separable")
    model = build_offspring_model(spec)
    checked = 0
    for seed in range(120):
        T = sample_limit_pointed_tree(model, spec, 1, np.random.default_rng(seed), fringe_cap=5000)
        try:
            T.ensure_window(2, 2)
        except InsufficientRealizationError:
            continue
        if any(T.cap_hit.values()):
            continue
        tree, leaf = T.to_finite()
        nu = decode_packed(tree)
        # the finite root is a skew sum, which fixes the sign at the parent of the pointed leaf
        sign = (-1) ** T.height
        assert T.read_window(2, 2, sign=sign) == pattern_at(nu, range(leaf - 2, leaf + 3))
        with pytest.raises(InsufficientRealizationError):
            T.read_window(2, 2)
        checked += 1
    assert checked > 30


def test_window_errors(s4):
    spec, model = s4
    T = sample_limit_pointed_tree(model, spec, 1, np.random.default_rng(0), left_budget=3,
                                  right_budget=3)
    with pytest.raises(InvalidInputError):
        T.ensure_window(5, 1)
    with pytest.raises(InsufficientRealizationError):
        T.window_leaves(50, 0)


@pytest.mark.parametrize("k,t", [(1, 0), (2, 1), (3, 2)])
def test_skeleton_tree_structure(s4, k, t):
    spec, model = s4
    rng = np.random.default_rng(k + 10 * t)
    for _ in range(20):
        L = sample_limit_skeleton_tree(k, t, model, rng, spec=spec)
        assert len(L.marks) == k and len(L.essential) == 2 * k
        assert len(L.segments) == 2 * k - 1
        assert all(len(path) == 2 * t for _, _, path in L.segments)
        assert len(L.branch_vertices) == k - 1
        assert all(L.arena.degree[m] == 0 for m in L.marks)
        assert len(L.stretch) == 2 * k - 1 and (L.stretch > 0).all()
        for v in L.branch_vertices:
            assert L.arena.degree[v] >= 2
    with pytest.raises(InvalidInputError):
        sample_limit_skeleton_tree(1, 0, model, rng, omega=(1,))


def test_skeleton_tree_explored(s4):
    spec, model = s4
    rng = np.random.default_rng(5)
    L = sample_limit_skeleton_tree(2, 1, model, rng, spec=spec, omega=(0, 2, 3), explore_cap=10 ** 6)
    a = L.arena
    assert all(ch is not None for kids in a.children for ch in kids)
    assert all(a.degree[m] in (0, 2, 3) for m in L.marks)
