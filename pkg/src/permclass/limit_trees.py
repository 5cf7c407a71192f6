"""Finite realizations of the limit trees.

``PointedPackedTree`` realizes the pointed Kesten-type tree: a spine
u_0 (the pointed leaf), u_1, u_2, ... where u_i has a size-biased number of
children, u_{i-1} sits at a uniform position among them, and every other
child roots an independent Galton-Watson tree.  The spine is extended
upward on demand and the side branches are explored depth-first starting
from the side that faces u_0, so the leaves nearest to u_0 are generated
first.  A leaf budget per side stops the exploration once enough leaves are
known; unexplored children are kept as ``None`` stubs.

``LimitSkeleton`` realizes the k-marked limit tree: a uniform proper k-tree,
a stretch vector, edges blown up into paths of length 2t+1, and thickening
with size-biased and doubly size-biased degrees.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analytic import ClassSpec, OffspringModel
from .errors import InsufficientRealizationError, InvalidInputError
from .perm import Permutation
from .sampler import decoration_from_rank, randbelow
from .trees import STAR, Gadget, PackedTree


def _draw(cdf: np.ndarray, rng) -> int:
    return int(np.searchsorted(cdf, rng.random(), side="right"))


def _cdf(pmf: np.ndarray) -> np.ndarray:
    c = np.cumsum(pmf)
    c[-1] = 1.0
    return c


class _Arena:
    """Append-only vertex storage shared by the limit trees."""

    def __init__(self, model: OffspringModel, spec: ClassSpec | None, rng):
        self.model = model
        self.spec = spec
        self.rng = rng
        self.parent: list = []
        self.child_index: list = []
        self.degree: list = []
        self.dec: list = []
        self.children: list = []
        self.level: list = []
        self.cdf = model.cdf
        self.hat_cdf = _cdf(model.hat_pmf)
        self.star_cdf = _cdf(model.star_pmf)

    def decoration(self, d: int):
        if d == 0:
            return None
        if self.spec is None or not self.spec.simples:
            return STAR
        return decoration_from_rank(self.spec, d, randbelow(self.rng, self.spec.q(d)))

    def new_vertex(self, d: int, parent: int, cidx: int, level: int) -> int:
        v = len(self.degree)
        self.parent.append(parent)
        self.child_index.append(cidx)
        self.degree.append(d)
        self.dec.append(self.decoration(d))
        self.children.append([None] * d)
        self.level.append(level)
        if parent >= 0:
            self.children[parent][cidx] = v
        return v

    def n_vertices(self) -> int:
        return len(self.degree)


class PointedPackedTree(_Arena):
    """Lazily grown realization of the pointed limit tree."""

    def __init__(self, model: OffspringModel, spec: ClassSpec | None, rng,
                 left_budget: int | None = None, right_budget: int | None = None,
                 fringe_cap: int = 100_000):
        super().__init__(model, spec, rng)
        self.fringe_cap = fringe_cap
        self.budget = {"L": left_budget, "R": right_budget}
        self.side_leaves = {"L": [], "R": []}
        self.explored = {"L": 0, "R": 0}
        self.active = {"L": left_budget != 0, "R": right_budget != 0}
        self.cap_hit = {"L": False, "R": False}
        self.branch_of: list = []
        self.spine = [self.new_vertex(0, -1, 0, 0)]
        self.branch_of.append(0)

    @property
    def height(self) -> int:
        return len(self.spine) - 1

    def grow(self, h: int) -> None:
        """Extend the spine to height h, exploring the new side branches."""
        while self.height < h:
            below = self.spine[-1]
            i = len(self.spine)
            d = _draw(self.hat_cdf, self.rng)
            pos = int(self.rng.integers(d))
            v = len(self.degree)
            self.parent.append(-1)
            self.child_index.append(0)
            self.degree.append(d)
            self.dec.append(self.decoration(d))
            self.children.append([None] * d)
            self.level.append(-i)
            self.branch_of.append(i)
            self.children[v][pos] = below
            self.parent[below] = v
            self.child_index[below] = pos
            self.spine.append(v)
            for c in range(pos + 1, d):
                if not self.active["R"]:
                    break
                self._explore(v, c, "R", i)
            for c in range(pos - 1, -1, -1):
                if not self.active["L"]:
                    break
                self._explore(v, c, "L", i)

    def _explore(self, parent: int, cidx: int, side: str, branch: int) -> None:
        """Depth-first exploration of a Galton-Watson branch from the side facing u_0."""
        leaves = self.side_leaves[side]
        budget = self.budget[side]
        stack = [(parent, cidx)]
        while stack:
            p, c = stack.pop()
            if self.explored[side] >= self.fringe_cap:
                self.active[side] = False
                self.cap_hit[side] = True
                return
            d = _draw(self.cdf, self.rng)
            v = self.new_vertex(d, p, c, self.level[p] + 1)
            self.branch_of.append(branch)
            self.explored[side] += 1
            if d == 0:
                leaves.append(v)
                if budget is not None and len(leaves) >= budget:
                    self.active[side] = False
                    return
                continue
            order = range(d) if side == "L" else range(d - 1, -1, -1)
            # pushed so that the child nearest to u_0 is popped first
            stack.extend((v, j) for j in order)

    def ensure_window(self, left: int, right: int, max_height: int = 100_000) -> None:
        """Grow the spine until both sides hold enough explored leaves."""
        for side, need in (("L", left), ("R", right)):
            if need and self.budget[side] is not None and self.budget[side] < need:
                raise InvalidInputError(f"side budget {self.budget[side]} below window {need}")
        while len(self.side_leaves["L"]) < left or len(self.side_leaves["R"]) < right:
            if self.cap_hit["L"] or self.cap_hit["R"] or self.height >= max_height:
                raise InsufficientRealizationError("fringe cap reached before the window was filled")
            self.grow(self.height + 1)

    def window_leaves(self, left: int, right: int) -> list:
        if len(self.side_leaves["L"]) < left or len(self.side_leaves["R"]) < right:
            raise InsufficientRealizationError("window exceeds the explored leaves")
        return self.side_leaves["L"][:left][::-1] + [self.spine[0]] + self.side_leaves["R"][:right]

    def certifying_gadget(self, left: int, right: int) -> int | None:
        """Spine index of the lowest gadget ancestor whose fringe holds the window, if realized."""
        leaves = self.window_leaves(left, right)
        j = max(self.branch_of[v] for v in leaves)
        for i in range(max(j, 1), len(self.spine)):
            if isinstance(self.dec[self.spine[i]], Gadget):
                return i
        return None

    # -- pattern reading

    def _cca(self, x: int, y: int):
        lev, par = self.level, self.parent
        while lev[x] > lev[y]:
            x = par[x]
        while lev[y] > lev[x]:
            y = par[y]
        while par[x] != par[y]:
            x, y = par[x], par[y]
        return par[x], x, y

    def _star_minus(self, u: int, sign: int | None) -> bool:
        if sign is not None:
            # the parent of u_0 carries the sign, then signs alternate with depth
            return sign * (-1) ** (self.level[u] + 1) < 0
        dist = 0
        w = u
        while True:
            w = self.parent[w]
            dist += 1
            if w < 0:
                raise InsufficientRealizationError("no gadget ancestor in the realized spine")
            if isinstance(self.dec[w], Gadget):
                return dist % 2 == 1

    def _inverted(self, x: int, y: int, sign: int | None) -> bool:
        u, cx, cy = self._cca(x, y)
        dec = self.dec[u]
        if dec == STAR:
            return self._star_minus(u, sign)
        j1 = dec.slot_of_leaf[self.child_index[cx]]
        j2 = dec.slot_of_leaf[self.child_index[cy]]
        return j1 != j2 and dec.root.values[j1] > dec.root.values[j2]

    def read_window(self, left: int, right: int, sign: int | None = None) -> Permutation:
        """Order of the leaves at offsets -left..right around u_0.

        Without ``sign`` every sum node needs a gadget ancestor (the window
        must be certified); with ``sign`` = +1 or -1 the parent of u_0 is a
        direct (resp. skew) sum and signs alternate from there.
        """
        leaves = self.window_leaves(left, right)
        if sign is None and len(leaves) > 1 and self.certifying_gadget(left, right) is None:
            raise InsufficientRealizationError("no gadget-rooted fringe contains the window")
        k = len(leaves)
        below = [0] * k
        for a in range(k):
            for b in range(a + 1, k):
                if self._inverted(leaves[a], leaves[b], sign):
                    below[a] += 1
                else:
                    below[b] += 1
        return Permutation([b + 1 for b in below], check=False)

    def to_finite(self) -> tuple[PackedTree, int]:
        """The realized tree as a packed tree rooted at the top spine vertex, and the pointed leaf index."""
        degrees, decs = [], []
        leaf_idx = None
        nleaves = 0
        stack = [self.spine[-1]]
        while stack:
            v = stack.pop()
            if v is None:
                raise InsufficientRealizationError("realization has unexplored branches")
            degrees.append(self.degree[v])
            decs.append(self.dec[v])
            if self.degree[v] == 0:
                nleaves += 1
                if v == self.spine[0]:
                    leaf_idx = nleaves
            stack.extend(reversed(self.children[v]))
        return PackedTree(degrees, decs, check=False), leaf_idx


def sample_limit_pointed_tree(model: OffspringModel, spec: ClassSpec | None, height: int,
                              rng, fringe_cap: int = 100_000, left_budget: int | None = None,
                              right_budget: int | None = None) -> PointedPackedTree:
    t = PointedPackedTree(model, spec, rng, left_budget, right_budget, fringe_cap)
    t.grow(height)
    return t


# ---------------------------------------------------------------- k-marked limit tree

def n_proper_trees(k: int) -> int:
    """Number of proper k-trees: 2^(k-1) (2k-3)!!, i.e. k! times a Catalan number."""
    return 2 ** (k - 1) * math.prod(range(1, 2 * k - 2, 2))


def sample_proper_tree(k: int, rng) -> tuple[list, list]:
    """Uniform proper k-tree by Remy's insertion.

    Returns preorder degrees (root has degree 1) and the mark label (1..k)
    of each vertex, 0 for unmarked vertices.
    """
    if k < 1:
        raise InvalidInputError("k must be positive")
    # binary tree on nodes; node 0 is the first leaf
    kids: list = [None]
    label = [1]
    par = [-1]
    top = 0
    for i in range(2, k + 1):
        x = int(rng.integers(len(kids)))
        y = len(kids)
        z = y + 1
        kids.extend([None, None])
        label.extend([0, i])
        par.extend([par[x], y])
        pair = (x, z) if rng.integers(2) == 0 else (z, x)
        kids[y] = list(pair)
        if par[x] >= 0:
            siblings = kids[par[x]]
            siblings[siblings.index(x)] = y
        else:
            top = y
        par[x] = y
    degrees, marks = [1], [0]
    stack = [top]
    while stack:
        v = stack.pop()
        if kids[v] is None:
            degrees.append(0)
            marks.append(label[v])
        else:
            degrees.append(2)
            marks.append(0)
            stack.extend(reversed(kids[v]))
    return degrees, marks


def sample_stretch(k: int, rng) -> np.ndarray:
    """Edge lengths with density proportional to (sum s) exp(-(sum s)^2 / 2) on the positive orthant.

    The total is chi-distributed with 2k degrees of freedom and the
    proportions are uniform on the simplex.
    """
    total = math.sqrt(rng.chisquare(2 * k))
    return total * rng.dirichlet(np.ones(2 * k - 1))


@dataclass
class LimitSkeleton:
    arena: _Arena
    root: int
    marks: list
    essential: list
    segments: list
    stretch: np.ndarray
    proper_degrees: list
    proper_marks: list
    t: int
    branch_vertices: list = field(default_factory=list)


def sample_limit_skeleton_tree(k: int, t: int, model: OffspringModel, rng,
                               spec: ClassSpec | None = None, omega=(0,),
                               explore_cap: int = 0) -> LimitSkeleton:
    """Realize the k-marked limit tree around its essential vertices.

    Every edge of a uniform proper k-tree becomes a path of length 2t+1;
    vertices of outdegree one get a size-biased degree, branching vertices a
    doubly size-biased one, with the existing children at uniformly chosen
    positions.  Marks get a degree drawn from xi conditioned on ``omega``.
    Grafted Galton-Watson branches are explored up to ``explore_cap``
    vertices each (0 keeps them as stubs).
    """
    degrees, marks_lab = sample_proper_tree(k, rng)
    stretch = sample_stretch(k, rng)
    arena = _Arena(model, spec, rng)
    om = [d for d in omega if 0 <= d <= model.K and model.pmf[d] > 0]
    if not om:
        raise InvalidInputError("omega has zero probability")
    om_cdf = _cdf(np.array([model.pmf[d] for d in om]))

    # preorder walk of the proper tree, emitting the blown-up tree
    n = len(degrees)
    kids = [[] for _ in range(n)]
    st = []
    for v in range(n):
        if st:
            p = st[-1]
            kids[p[0]].append(v)
            p[1] -= 1
            if p[1] == 0:
                st.pop()
        if degrees[v] > 0:
            st.append([v, degrees[v]])

    marks = [None] * k
    essential = []
    segments = []
    branch_vertices = []

    def place(v_proper, parent, cidx, level):
        """Create the vertex for a proper-tree vertex and return its id."""
        deg_p = degrees[v_proper]
        if deg_p == 0:
            d = om[_draw(om_cdf, rng)]
        elif deg_p == 1:
            d = _draw(arena.hat_cdf, rng)
        else:
            d = _draw(arena.star_cdf, rng)
        return arena.new_vertex(d, parent, cidx, level)

    def positions(d, m):
        return sorted(rng.choice(d, size=m, replace=False).tolist()) if m else []

    root = place(0, -1, 0, 0)
    essential.append(root)
    work = [(0, root)]
    while work:
        vp, v = work.pop()
        m = degrees[vp]
        if m == 0:
            marks[marks_lab[vp] - 1] = v
            continue
        slots = positions(arena.degree[v], m)
        for child_p, slot in zip(kids[vp], slots):
            # path of 2t intermediate vertices, each with a size-biased degree
            cur, cur_slot = v, slot
            path = []
            for _ in range(2 * t):
                d = _draw(arena.hat_cdf, rng)
                w = arena.new_vertex(d, cur, cur_slot, arena.level[cur] + 1)
                path.append(w)
                cur, cur_slot = w, int(rng.integers(d))
            w = place(child_p, cur, cur_slot, arena.level[cur] + 1)
            essential.append(w)
            segments.append((v, w, path))
            if degrees[child_p] == 2:
                branch_vertices.append(w)
            work.append((child_p, w))

    if explore_cap:
        for v in range(arena.n_vertices()):
            for c, ch in enumerate(arena.children[v]):
                if ch is None:
                    _explore_full(arena, v, c, explore_cap)
    return LimitSkeleton(arena, root, marks, essential, segments, stretch, degrees,
                         marks_lab, t, branch_vertices)


def _explore_full(arena: _Arena, parent: int, cidx: int, cap: int) -> bool:
    stack = [(parent, cidx)]
    made = 0
    while stack:
        if made >= cap:
            return False
        p, c = stack.pop()
        d = _draw(arena.cdf, arena.rng)
        v = arena.new_vertex(d, p, c, arena.level[p] + 1)
        made += 1
        stack.extend((v, j) for j in range(d - 1, -1, -1))
    return True
