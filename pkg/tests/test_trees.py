import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from permclass.analytic import ClassSpec
from permclass.errors import ClassMembershipError, InvalidInputError
from permclass.perm import Permutation, all_permutations, pattern_at, plus_components
from permclass.sampler import ClassSampler, SamplerConfig
from permclass.textio import parse_canonical, parse_packed, tree_to_text
from permclass.trees import (STAR, CanonicalTree, Gadget, PackedTree, PlaneTree, canonical_tree,
                             class_membership, decode_packed, eval_tree, forest_decode,
                             forest_encode, pack, read_forest_pattern, read_pattern,
                             substitution_decompose, unpack)

P = Permutation.parse
perms = st.integers(1, 12).flatmap(lambda n: st.permutations(list(range(1, n + 1))))
NU = P("13 12 5 3 4 2 6 11 9 10 1 7 8")


def test_plane_tree_arrays():
    t = PlaneTree([2, 0, 3, 0, 0, 0])
    assert list(t.parent) == [-1, 0, 0, 2, 2, 2]
    assert list(t.child_index) == [0, 0, 1, 0, 1, 2]
    assert list(t.depth) == [0, 1, 1, 2, 2, 2]
    assert list(t.subtree_end) == [6, 2, 6, 4, 5, 6]
    assert list(t.leaf_count) == [4, 1, 3, 1, 1, 1]
    assert t.size == 4 and t.height() == 2
    assert t.children(0) == [1, 2]
    assert list(t.leaves) == [1, 3, 4, 5]
    assert t.subtree(2).degrees == (3, 0, 0, 0)


def test_gadget():
    g = Gadget(P("2413"), (2, 1, 1, 2))
    assert g.size == 6
    assert g.effective == P("236145")
    assert g.slot_of_leaf == (0, 0, 1, 2, 3, 3)
    with pytest.raises(InvalidInputError):
        Gadget(P("2413"), (1, 1, 1))


def test_decompose_examples():
    assert substitution_decompose("231") == (P("21"), [P("12"), P("1")])
    assert substitution_decompose("1234") == (P("1234"), [P("1")] * 4)
    assert substitution_decompose("2413") == (P("2413"), [P("1")] * 4)
    with pytest.raises(InvalidInputError):
        substitution_decompose("1")


@settings(max_examples=300, deadline=None)
@given(perms.filter(lambda p: len(p) >= 2))
def test_decompose_is_valid(nu):
    from permclass.perm import substitute, is_simple
    theta, parts = substitution_decompose(nu)
    assert substitute(theta, parts) == Permutation(nu)
    if theta.is_increasing():
        assert all(len(plus_components(p)) == 1 for p in parts)
    elif not theta.is_decreasing():
        assert is_simple(theta)


def test_canonical_tree_examples():
    assert canonical_tree("1").degrees == (0,)
    t = canonical_tree("231")
    assert tree_to_text(t) == "(- (+ . .) .)"
    assert eval_tree(t) == P("231")
    # a plus-plus edge is not canonical, but still evaluates
    loose = CanonicalTree([2, 2, 0, 0, 0], [P("12"), P("12"), None, None, None], check=False)
    assert eval_tree(loose) == P("123")
    with pytest.raises(InvalidInputError):
        loose.validate()


@pytest.mark.parametrize("n", range(1, 7))
def test_canonical_round_trip_small(n):
    for nu in all_permutations(n):
        assert eval_tree(canonical_tree(nu)) == nu


def test_pack_worked_example():
    packed = pack(canonical_tree(NU))
    assert tree_to_text(packed) == "(* . . (g 2413 [P2,L,L,P2] (* . (* . .) .) . (* . (* . .)) . . .))"
    assert decode_packed(packed) == NU
    assert unpack(packed) == canonical_tree(NU)


def test_pack_separable_is_same_shape_all_stars():
    ct = canonical_tree("3 2 1 5 4 7 6")
    with pytest.raises(InvalidInputError):
        pack(ct)            # plus root
    comp = canonical_tree("7 5 6 3 4 1 2")
    pk = pack(comp)
    assert pk.degrees == comp.degrees
    assert all(d in (None, STAR) for d in pk.decorations)


@settings(max_examples=300, deadline=None)
@given(perms)
def test_pack_unpack_round_trip(nu):
    for comp in plus_components(nu):
        ct = canonical_tree(comp)
        pk = pack(ct)
        pk.validate()
        assert unpack(pk) == ct
        assert decode_packed(pk) == comp


@settings(max_examples=300, deadline=None)
@given(perms)
def test_forest_round_trip(nu):
    nu = Permutation(nu)
    f = forest_encode(nu)
    assert len(f.trees) == len(plus_components(nu))
    assert forest_decode(f) == nu


def test_forest_examples():
    assert len(forest_encode("231").trees) == 1
    f = forest_encode(Permutation.identity(5))
    assert len(f.trees) == 5 and all(t.degrees == (0,) for t in f.trees)


def test_class_membership():
    sep, s4 = ClassSpec.load("separable"), ClassSpec.load("simple4")
    assert not class_membership("2413", sep)
    assert class_membership("2413", s4)
    for spec in (sep, s4):
        assert class_membership(Permutation.identity(6), spec)
        assert class_membership(Permutation.decreasing(6), spec)
    assert not class_membership("24153", s4)
    with pytest.raises(ClassMembershipError):
        forest_encode("2413", sep)


@pytest.mark.parametrize("n", range(1, 8))
def test_membership_matches_oracle(n):
    sep, s4 = ClassSpec.load("separable"), ClassSpec.load("simple4")
    for nu in all_permutations(n):
        assert class_membership(nu, sep) == oracles.in_separable(nu.values)
        assert class_membership(nu, s4) == oracles.in_simple4(nu.values)


def test_read_pattern_worked_example():
    packed = pack(canonical_tree(NU))
    # l1, l2 meet at a star one step below the gadget; l1, l3 sit under its first and fifth children
    assert read_pattern(packed, [4, 6, 12]) == P("213")
    # two leaves under the same Plus slot never form an inversion
    assert read_pattern(packed, [12, 13]) == P("12")
    with pytest.raises(InvalidInputError):
        read_pattern(packed, [3, 3])


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(["separable", "simple4"]), st.integers(1, 12), st.integers(0, 2 ** 32),
       st.data())
def test_read_pattern_matches_pattern_at(name, n, seed, data):
    sampler = ClassSampler(ClassSpec.load(name), SamplerConfig(method="exact"))
    rng = np.random.default_rng(seed)
    tree = sampler.packed_tree(n, rng)
    nu = decode_packed(tree)
    idx = sorted(data.draw(st.sets(st.integers(1, n), min_size=1, max_size=n)))
    assert read_pattern(tree, idx) == pattern_at(nu, idx)
    forest = sampler.forest(n, rng)
    nu = forest_decode(forest)
    assert read_forest_pattern(forest, idx) == pattern_at(nu, idx)


def test_tree_validation():
    with pytest.raises(InvalidInputError):
        PackedTree([1, 0], [STAR, None])
    with pytest.raises(InvalidInputError):
        PackedTree([3, 0, 0, 0], [Gadget(P("2413"), (1, 1, 1, 1)), None, None, None])
    with pytest.raises(InvalidInputError):
        CanonicalTree([3, 0, 0, 0], [P("132"), None, None, None])
    with pytest.raises(InvalidInputError):
        PlaneTree([2, 0], [None, None])


def test_text_round_trips():
    packed = pack(canonical_tree(NU))
    assert parse_packed(tree_to_text(packed)) == packed
    ct = canonical_tree(NU)
    assert parse_canonical(tree_to_text(ct)) == ct
