"""Substitution decomposition, canonical trees and packed trees.

Trees are stored as preorder arrays: ``degrees[v]`` is the outdegree of the
v-th vertex in depth-first order and ``decorations[v]`` its decoration
(``None`` on leaves).  Parent, depth and subtree extents are derived on demand.

Canonical tree decorations are permutations: the increasing permutation of
size k stands for the k-ary direct sum, the decreasing one for the skew sum,
anything else is a simple permutation.

Packed tree decorations are either ``STAR`` (a sum node whose sign is
recovered from the alternation rule) or a :class:`Gadget`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from . import kernels
from .errors import ClassMembershipError, InvalidInputError
from .perm import (Permutation, as_perm, is_simple, minus_components, pattern_at,
                   plus_components, std, substitute)

STAR = "*"


@dataclass(frozen=True)
class Gadget:
    """A simple root ``alpha`` whose children are leaves or increasing runs.

    ``slots[i] == 1`` is a leaf slot, ``slots[i] == m >= 2`` is a direct sum
    of size m.  The gadget has ``sum(slots)`` leaves.
    """

    root: Permutation
    slots: tuple

    def __post_init__(self):
        if len(self.slots) != len(self.root):
            raise InvalidInputError("gadget needs one slot per entry of its root")
        if any(m < 1 for m in self.slots):
            raise InvalidInputError("slot sizes must be positive")

    @property
    def size(self) -> int:
        return sum(self.slots)

    @cached_property
    def effective(self) -> Permutation:
        """The permutation of the gadget's leaves: alpha[1...1, ..., 1...m]."""
        return substitute(self.root, [Permutation.identity(m) for m in self.slots])

    @cached_property
    def slot_of_leaf(self) -> tuple:
        out = []
        for j, m in enumerate(self.slots):
            out.extend([j] * m)
        return tuple(out)


class PlaneTree:
    """Rooted plane tree in preorder with optional decorations."""

    def __init__(self, degrees: Sequence[int], decorations: Sequence | None = None):
        self.degrees = tuple(int(d) for d in degrees)
        if decorations is None:
            decorations = (None,) * len(self.degrees)
        self.decorations = tuple(decorations)
        if len(self.decorations) != len(self.degrees):
            raise InvalidInputError("degrees and decorations differ in length")
        self._arrays = kernels.tree_arrays(np.asarray(self.degrees, dtype=np.int64))

    def __eq__(self, other):
        return (type(self) is type(other) and self.degrees == other.degrees
                and self.decorations == other.decorations)

    def __hash__(self):
        return hash((self.degrees, self.decorations))

    def __repr__(self):
        from .textio import tree_to_text
        return f"{type(self).__name__}({tree_to_text(self)!r})"

    @property
    def n_vertices(self) -> int:
        return len(self.degrees)

    @property
    def parent(self) -> np.ndarray:
        return self._arrays[0]

    @property
    def child_index(self) -> np.ndarray:
        return self._arrays[1]

    @property
    def depth(self) -> np.ndarray:
        return self._arrays[2]

    @property
    def subtree_end(self) -> np.ndarray:
        return self._arrays[3]

    @property
    def leaf_count(self) -> np.ndarray:
        return self._arrays[4]

    @property
    def size(self) -> int:
        """Number of leaves."""
        return int(self._arrays[4][0])

    @cached_property
    def leaves(self) -> np.ndarray:
        """Vertex ids of the leaves in depth-first order."""
        return np.flatnonzero(np.asarray(self.degrees) == 0)

    def children(self, v: int) -> list[int]:
        out = []
        c = v + 1
        end = self.subtree_end
        for _ in range(self.degrees[v]):
            out.append(c)
            c = int(end[c])
        return out

    def subtree(self, v: int) -> "PlaneTree":
        e = int(self.subtree_end[v])
        return type(self)(self.degrees[v:e], self.decorations[v:e])

    def height(self) -> int:
        return int(self.depth.max())


def _perm_kind(p: Permutation) -> str:
    if p.is_increasing():
        return "+"
    if p.is_decreasing():
        return "-"
    return "s"


class CanonicalTree(PlaneTree):
    """Decomposition tree with no plus-plus or minus-minus edges."""

    def __init__(self, degrees, decorations, check: bool = True):
        super().__init__(degrees, decorations)
        if check:
            self.validate()

    def validate(self) -> None:
        par = self.parent
        for v, (d, dec) in enumerate(zip(self.degrees, self.decorations)):
            if d == 0:
                if dec is not None:
                    raise InvalidInputError("leaves carry no decoration")
                continue
            if not isinstance(dec, Permutation) or len(dec) != d or d < 2:
                raise InvalidInputError(f"vertex {v}: decoration must be a permutation of size {d} >= 2")
            kind = _perm_kind(dec)
            if kind == "s" and (d < 4 or not is_simple(dec)):
                raise InvalidInputError(f"vertex {v}: {dec} is neither monotone nor simple")
            if v > 0 and kind != "s":
                pdec = self.decorations[par[v]]
                if _perm_kind(pdec) == kind:
                    raise InvalidInputError(f"vertex {v}: {kind}{kind} edge is not canonical")

    def simple_decorations(self) -> list[Permutation]:
        return [d for d in self.decorations if d is not None and _perm_kind(d) == "s"]


class PackedTree(PlaneTree):
    """Canonical tree with each simple vertex merged with its direct-sum children."""

    def __init__(self, degrees, decorations, check: bool = True):
        super().__init__(degrees, decorations)
        if check:
            self.validate()

    def validate(self) -> None:
        for v, (d, dec) in enumerate(zip(self.degrees, self.decorations)):
            if d == 0:
                if dec is not None:
                    raise InvalidInputError("leaves carry no decoration")
            elif dec == STAR:
                if d < 2:
                    raise InvalidInputError(f"vertex {v}: star needs at least two children")
            elif isinstance(dec, Gadget):
                if dec.size != d:
                    raise InvalidInputError(f"vertex {v}: gadget of size {dec.size} on {d} children")
                if len(dec.root) < 4 or not is_simple(dec.root):
                    raise InvalidInputError(f"vertex {v}: gadget root {dec.root} is not simple")
            else:
                raise InvalidInputError(f"vertex {v}: bad decoration {dec!r}")

    @cached_property
    def star_signs(self) -> np.ndarray:
        """+1 / -1 for star vertices (plus / minus after unpacking), 0 elsewhere."""
        sign = np.zeros(self.n_vertices, dtype=np.int64)
        par = self.parent
        for v, dec in enumerate(self.decorations):
            if dec != STAR:
                continue
            if v == 0 or isinstance(self.decorations[par[v]], Gadget):
                sign[v] = -1
            else:
                sign[v] = -sign[par[v]]
        return sign

    def simple_decorations(self) -> list[Permutation]:
        return [d.root for d in self.decorations if isinstance(d, Gadget)]


@dataclass(frozen=True)
class DecoratedForest:
    trees: tuple

    @property
    def size(self) -> int:
        return sum(t.size for t in self.trees)


# ---------------------------------------------------------------- decomposition

def _largest_block_from(v: Sequence[int], i: int, n: int) -> int:
    """Largest j such that v[i..j] is a block of size < n (0-based, inclusive)."""
    best = i
    lo = hi = v[i]
    for j in range(i + 1, n):
        x = v[j]
        if x < lo:
            lo = x
        elif x > hi:
            hi = x
        if hi - lo == j - i and j - i + 1 < n:
            best = j
    return best


def substitution_decompose(nu) -> tuple[Permutation, list[Permutation]]:
    """Return ``(theta, parts)`` with ``nu = theta[parts]`` (top level of the substitution decomposition).

    theta is increasing with plus-indecomposable parts, decreasing with
    minus-indecomposable parts, or simple of size >= 4.
    """
    nu = as_perm(nu)
    n = len(nu)
    if n < 2:
        raise InvalidInputError("size-1 permutations have no decomposition")
    parts = plus_components(nu)
    if len(parts) > 1:
        return Permutation.identity(len(parts)), parts
    parts = minus_components(nu)
    if len(parts) > 1:
        return Permutation.decreasing(len(parts)), parts
    v = nu.values
    bounds = []
    i = 0
    while i < n:
        j = _largest_block_from(v, i, n)
        bounds.append((i, j))
        i = j + 1
    theta = std([v[a] for a, _ in bounds])
    return theta, [std(v[a : b + 1]) for a, b in bounds]


def canonical_tree(nu) -> CanonicalTree:
    nu = as_perm(nu)
    degrees, decs = [], []
    stack = [nu]
    while stack:
        p = stack.pop()
        if len(p) == 1:
            degrees.append(0)
            decs.append(None)
            continue
        theta, parts = substitution_decompose(p)
        degrees.append(len(theta))
        decs.append(theta)
        stack.extend(reversed(parts))
    return CanonicalTree(degrees, decs, check=False)


def _decode(tree: PlaneTree, kinds, perms) -> np.ndarray:
    ptr = np.zeros(tree.n_vertices, dtype=np.int64)
    data = []
    for v, p in perms:
        ptr[v] = len(data)
        data.extend(p.values)
    return kernels.decode_values(np.asarray(tree.degrees, dtype=np.int64),
                                 np.asarray(kinds, dtype=np.int64), ptr,
                                 np.asarray(data or [0], dtype=np.int64))


def eval_tree(tree: CanonicalTree) -> Permutation:
    """Nested substitution along the tree."""
    kinds = [0 if d == 0 else kernels.KIND_PERM for d in tree.degrees]
    perms = [(v, p) for v, p in enumerate(tree.decorations) if p is not None]
    return Permutation(_decode(tree, kinds, perms).tolist(), check=False)


def decode_packed(tree: PackedTree) -> Permutation:
    """The permutation of a packed tree, without building the canonical tree."""
    kinds = []
    perms = []
    for v, dec in enumerate(tree.decorations):
        if dec is None:
            kinds.append(kernels.KIND_LEAF)
        elif dec == STAR:
            kinds.append(kernels.KIND_STAR)
        else:
            kinds.append(kernels.KIND_PERM)
            perms.append((v, dec.effective))
    return Permutation(_decode(tree, kinds, perms).tolist(), check=False)


def pack(tree: CanonicalTree) -> PackedTree:
    if tree.degrees[0] > 0 and _perm_kind(tree.decorations[0]) == "+":
        raise InvalidInputError("only plus-indecomposable permutations have a packed tree")
    degrees, decs = [], []
    stack = [0]
    D = tree.decorations
    while stack:
        v = stack.pop()
        d = tree.degrees[v]
        if d == 0:
            degrees.append(0)
            decs.append(None)
            continue
        kids = tree.children(v)
        if _perm_kind(D[v]) != "s":
            degrees.append(d)
            decs.append(STAR)
            stack.extend(reversed(kids))
            continue
        slots, sub = [], []
        for c in kids:
            if tree.degrees[c] > 0 and _perm_kind(D[c]) == "+":
                slots.append(tree.degrees[c])
                sub.extend(tree.children(c))
            else:
                slots.append(1)
                sub.append(c)
        degrees.append(len(sub))
        decs.append(Gadget(D[v], tuple(slots)))
        stack.extend(reversed(sub))
    return PackedTree(degrees, decs, check=False)


def unpack(tree: PackedTree) -> CanonicalTree:
    signs = tree.star_signs
    degrees, decs = [], []
    stack: list = [0]
    while stack:
        item = stack.pop()
        if isinstance(item, tuple):
            degrees.append(item[1])
            decs.append(Permutation.identity(item[1]))
            continue
        v = item
        d = tree.degrees[v]
        dec = tree.decorations[v]
        if d == 0:
            degrees.append(0)
            decs.append(None)
            continue
        kids = tree.children(v)
        if dec == STAR:
            degrees.append(d)
            decs.append(Permutation.identity(d) if signs[v] > 0 else Permutation.decreasing(d))
            stack.extend(reversed(kids))
            continue
        seq: list = []
        pos = 0
        for m in dec.slots:
            if m == 1:
                seq.append(kids[pos])
            else:
                seq.append(("plus", m))
                seq.extend(kids[pos : pos + m])
            pos += m
        degrees.append(len(dec.slots))
        decs.append(dec.root)
        stack.extend(reversed(seq))
    return CanonicalTree(degrees, decs, check=False)


def class_membership(nu, spec) -> bool:
    return all(spec.contains_simple(a) for a in canonical_tree(nu).simple_decorations())


def forest_encode(nu, spec=None) -> DecoratedForest:
    """Split nu into plus-components and pack each of them."""
    trees = []
    for comp in plus_components(nu):
        ct = canonical_tree(comp)
        if spec is not None:
            for a in ct.simple_decorations():
                if not spec.contains_simple(a):
                    raise ClassMembershipError(f"simple decoration {a} is not in class {spec.name}")
        trees.append(pack(ct))
    return DecoratedForest(tuple(trees))


def forest_decode(forest: DecoratedForest) -> Permutation:
    out = []
    shift = 0
    for t in forest.trees:
        vals = decode_packed(t) if isinstance(t, PackedTree) else eval_tree(t)
        out.extend(v + shift for v in vals.values)
        shift += len(vals)
    return Permutation(out, check=False)


# ---------------------------------------------------------------- pattern reading

def _star_is_minus(tree: PackedTree, u: int) -> bool:
    par = tree.parent
    dist = 0
    w = u
    while w != 0:
        w = int(par[w])
        dist += 1
        if isinstance(tree.decorations[w], Gadget):
            return dist % 2 == 1
    return int(tree.depth[u]) % 2 == 0


def _pair_inverted(tree: PackedTree, x: int, y: int) -> bool:
    """True if leaf vertex x (earlier) has a larger value than leaf vertex y."""
    par, dep, cidx = tree.parent, tree.depth, tree.child_index
    while dep[x] > dep[y]:
        x = int(par[x])
    while dep[y] > dep[x]:
        y = int(par[y])
    while par[x] != par[y]:
        x, y = int(par[x]), int(par[y])
    u = int(par[x])
    dec = tree.decorations[u]
    if dec == STAR:
        return _star_is_minus(tree, u)
    i1, i2 = int(cidx[x]), int(cidx[y])
    j1, j2 = dec.slot_of_leaf[i1], dec.slot_of_leaf[i2]
    if j1 == j2:
        return False
    return dec.root.values[j1] > dec.root.values[j2]


def read_pattern(tree: PackedTree, leaves: Sequence[int]) -> Permutation:
    """pat_I of the permutation encoded by ``tree``, read from closest common ancestors.

    ``leaves`` are one-based leaf indices in depth-first order.
    """
    n = tree.size
    prev = 0
    for i in leaves:
        if i <= prev or i > n:
            raise InvalidInputError(f"leaf indices must be strictly increasing in 1..{n}")
        prev = i
    verts = [int(tree.leaves[i - 1]) for i in leaves]
    k = len(verts)
    below = [0] * k
    for a in range(k):
        for b in range(a + 1, k):
            if _pair_inverted(tree, verts[a], verts[b]):
                below[a] += 1
            else:
                below[b] += 1
    return Permutation([b + 1 for b in below], check=False)


def read_forest_pattern(forest: DecoratedForest, leaves: Sequence[int]) -> Permutation:
    """pat_I of a forest's permutation: leaves in different trees never form an inversion."""
    values = []
    offset = 0
    rank_shift = 0
    pos = 0
    idx = list(leaves)
    for t in forest.trees:
        mine = []
        while pos < len(idx) and idx[pos] <= offset + t.size:
            mine.append(idx[pos] - offset)
            pos += 1
        if mine:
            sub = read_pattern(t, mine) if isinstance(t, PackedTree) else pattern_at(eval_tree(t), mine)
            values.extend(v + rank_shift for v in sub.values)
            rank_shift += len(mine)
        offset += t.size
    if pos != len(idx) or not idx:
        raise InvalidInputError(f"leaf indices must be strictly increasing in 1..{forest.size}")
    return Permutation(values, check=False)
