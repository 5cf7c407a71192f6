"""Rooted permutations, local distances and the tree-to-permutation maps.

A rooted permutation (nu, i) stands for the total order on [-i+1, n-i]
obtained by shifting positions so that the root sits at 0.  Restriction
r_h keeps the positions in [-h, h].
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidInputError
from .perm import Permutation, as_perm, interval_pattern
from .trees import PackedTree, decode_packed


@dataclass(frozen=True)
class RootedPermutation:
    perm: Permutation
    root: int  # one-based

    def __post_init__(self):
        if not 1 <= self.root <= len(self.perm):
            raise InvalidInputError(f"root {self.root} outside 1..{len(self.perm)}")

    @classmethod
    def of(cls, perm, root: int) -> "RootedPermutation":
        return cls(as_perm(perm), int(root))

    @property
    def span(self) -> tuple[int, int]:
        """Relative positions of the first and last entries."""
        return 1 - self.root, len(self.perm) - self.root

    def __str__(self):
        return f"({self.perm}, {self.root})"


def restrict_rooted(rp: RootedPermutation, h: int) -> RootedPermutation:
    """r_h: pattern on the positions within distance h of the root."""
    if h < 0:
        raise InvalidInputError("h must be non-negative")
    n, i = len(rp.perm), rp.root
    a, b = max(1, i - h), min(n, i + h)
    return RootedPermutation(interval_pattern(rp.perm, a, b), i - a + 1)


def perm_local_distance(x: RootedPermutation, y: RootedPermutation, h_max: int | None = None) -> float:
    """2^(-sup{h >= 1 : r_h(x) = r_h(y)}), with sup of the empty set taken as 0."""
    if x == y:
        return 0.0
    limit = max(len(x.perm), len(y.perm))
    if h_max is not None:
        limit = min(limit, h_max)
    best = 0
    for h in range(1, limit + 1):
        if restrict_rooted(x, h) != restrict_rooted(y, h):
            break
        best = h
    return 2.0 ** (-best)


def _fringe_key(tree: PackedTree, leaf: int, h: int):
    """Pointed fringe at the h-th ancestor of the leaf (clamped at the root)."""
    v = int(tree.leaves[leaf - 1])
    u = v
    for _ in range(h):
        if u == 0:
            break
        u = int(tree.parent[u])
    e = int(tree.subtree_end[u])
    return tree.degrees[u:e], tree.decorations[u:e], v - u, u == 0


def tree_local_distance(x: tuple, y: tuple) -> float:
    """Distance between pointed packed trees given as (tree, one-based leaf index).

    2^(-sup{h >= 0 : the pointed fringes at height h agree}); 0 if they agree
    at every height.
    """
    tx, lx = x
    ty, ly = y
    h = 0
    while True:
        kx = _fringe_key(tx, lx, h)
        ky = _fringe_key(ty, ly, h)
        if kx[:3] != ky[:3]:
            return 2.0 ** (-(h - 1)) if h > 0 else 1.0
        if kx[3] and ky[3]:
            return 0.0
        h += 1


def realize_rooted_finite(tree: PackedTree, leaf: int) -> RootedPermutation:
    """The rooted permutation of a finite pointed packed tree."""
    return RootedPermutation(decode_packed(tree), leaf)


def realize_rooted_permutation(pointed, window: int, sign: int | None = None) -> RootedPermutation:
    """r_window of the rooted permutation of a pointed tree.

    ``pointed`` is either a finite ``(PackedTree, leaf)`` pair or a
    ``PointedPackedTree`` realization of the limit; the latter needs enough
    explored leaves and, unless ``sign`` is given, a certifying gadget.
    """
    if isinstance(pointed, tuple):
        return restrict_rooted(realize_rooted_finite(*pointed), window)
    pointed.ensure_window(window, window)
    return RootedPermutation(pointed.read_window(window, window, sign), window + 1)


def realize_signed(pointed, window: int, sign: int) -> RootedPermutation:
    if sign not in (1, -1):
        raise InvalidInputError("sign must be +1 or -1")
    return realize_rooted_permutation(pointed, window, sign)
