"""Marked subtrees, their t-neighbourhoods and contracted skeletons.

For a plane tree T and marks v_1..v_k, R(T, v) is the union of the marks
and their ancestors.  Essential vertices are the root, the marks and the
closest common ancestors of pairs of marks.  R^[t] adds every branch hanging
off R at distance at most t from an essential vertex.  Between two successive
essential vertices at distance L > 2t, the vertices further than t from both
ends are deleted; the middle segment (L - 2t edges) becomes one edge whose
label is s times its length, so a single deleted vertex gives label 2s.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .trees import PlaneTree


@dataclass(frozen=True)
class SkeletonView:
    degrees: tuple            # preorder degrees of the contracted tree
    marks: tuple              # positions of v_1..v_k in the contracted tree
    labelled_edges: tuple     # position of the lower end of each middle edge
    edge_deleted: tuple       # deleted-vertex count on each of those edges
    deleted: tuple            # deleted-vertex count per segment, padded to 2k-1
    lengths: tuple            # middle-segment length per segment (0 if none), padded
    s: float
    t: int
    k: int
    generic: bool
    essential_depths: tuple   # depths in T of the non-root essential vertices, preorder
    essential_kinds: tuple    # mark label (1..k) or 0 for a branching vertex

    @property
    def labels(self) -> np.ndarray:
        return self.s * np.asarray(self.lengths, dtype=float)

    @property
    def shape_key(self) -> tuple:
        return self.degrees, self.marks, self.labelled_edges

    def to_json(self) -> str:
        from .textio import tree_to_text
        return json.dumps({
            "shape": tree_to_text(PlaneTree(self.degrees)),
            "marks": list(self.marks),
            "labelled_edges": list(self.labelled_edges),
            "deleted": list(self.deleted),
            "labels": self.labels.tolist(),
            "s": self.s, "t": self.t, "k": self.k, "generic": self.generic,
        })


def _marked_structure(tree: PlaneTree, marks):
    """R as a set plus the unique R-child map and the essential set."""
    par = tree.parent
    inR: set = set()
    for m in marks:
        if not 0 <= m < tree.n_vertices:
            raise InvalidInputError(f"mark {m} is not a vertex")
        v = int(m)
        while v >= 0 and v not in inR:
            inR.add(v)
            v = int(par[v])
    rcount: dict = {}
    rchild: dict = {}
    for v in inR:
        if v != 0:
            p = int(par[v])
            rcount[p] = rcount.get(p, 0) + 1
            rchild[p] = v
    markset = set(int(m) for m in marks)
    essential = {0} | markset | {v for v, c in rcount.items() if c >= 2}
    return inR, rcount, rchild, markset, essential


def _distances(tree: PlaneTree, inR, rchild, essential):
    """For each R vertex: nearest essential ancestor-or-self and descendant-or-self."""
    dep = tree.depth
    par = tree.parent
    order = sorted(inR)
    up, down = {}, {}
    for v in order:
        up[v] = v if v in essential else up[int(par[v])]
    for v in reversed(order):
        down[v] = v if v in essential else down[rchild[v]]
    dist = {}
    for v in order:
        dist[v] = min(int(dep[v] - dep[up[v]]), int(dep[down[v]] - dep[v]))
    return up, down, dist


def extract_skeleton(tree: PlaneTree, marks, t: int, s: float = 1.0) -> SkeletonView:
    """The contracted t-neighbourhood of the marked subtree, with its edge labels."""
    if t < 0:
        raise InvalidInputError("t must be non-negative")
    k = len(marks)
    if k == 0:
        raise InvalidInputError("need at least one mark")
    deg = tree.degrees
    dep = tree.depth
    par = tree.parent
    end = tree.subtree_end
    inR, rcount, rchild, markset, essential = _marked_structure(tree, marks)
    up, down, dist = _distances(tree, inR, rchild, essential)

    out: list = []
    pos_of: dict = {}
    labelled = []
    edge_deleted = []
    # items: (vertex, is_branch, deleted count if the edge above is a middle edge)
    stack: list = [(0, False, None)]
    while stack:
        v, is_branch, cnt = stack.pop()
        if is_branch:
            out.extend(deg[v : int(end[v])])
            continue
        pos = len(out)
        pos_of[v] = pos
        if cnt is not None:
            labelled.append(pos)
            edge_deleted.append(cnt)
        emitted = []
        c = v + 1
        for _ in range(deg[v]):
            if c in inR:
                x, y = up[v], down[c]
                L = int(dep[y] - dep[x])
                if L >= 2 * t + 1 and int(dep[v] - dep[x]) == t:
                    # middle edge: skip the vertices further than t from both ends
                    w = c
                    while w not in essential and dist[w] > t:
                        w = rchild[w]
                    emitted.append((w, False, L - 2 * t - 1))
                else:
                    emitted.append((c, False, None))
            elif dist[v] <= t:
                emitted.append((c, True, None))
            c = int(end[c])
        out.append(len(emitted))
        stack.extend(reversed(emitted))

    ess_sorted = sorted(essential)
    seg_len = [int(dep[y] - dep[up[int(par[y])]]) for y in ess_sorted if y != 0]
    segs = [max(0, L - 2 * t - 1) for L in seg_len]
    mids = [L - 2 * t if L > 2 * t else 0 for L in seg_len]
    pad = [0] * max(0, 2 * k - 1 - len(segs))
    generic = len(essential) == 2 * k and all(L >= 2 * t + 1 for L in seg_len)
    mark_label = {}
    for i, m in enumerate(marks):
        mark_label.setdefault(int(m), i + 1)
    return SkeletonView(
        degrees=tuple(out),
        marks=tuple(pos_of[int(m)] for m in marks),
        labelled_edges=tuple(labelled),
        edge_deleted=tuple(edge_deleted),
        deleted=tuple(segs + pad),
        lengths=tuple(mids + pad),
        s=float(s), t=t, k=k, generic=generic,
        essential_depths=tuple(int(dep[y]) for y in ess_sorted if y != 0),
        essential_kinds=tuple(mark_label.get(y, 0) for y in ess_sorted if y != 0))


def expand_skeleton(view: SkeletonView) -> tuple[tuple, tuple]:
    """Re-insert the deleted vertices as unary vertices.

    Returns the preorder degrees and mark positions of R^[t].
    """
    insert = dict(zip(view.labelled_edges, view.edge_deleted))
    degrees = []
    newpos = {}
    for p, d in enumerate(view.degrees):
        degrees.extend([1] * insert.get(p, 0))
        newpos[p] = len(degrees)
        degrees.append(d)
    return tuple(degrees), tuple(newpos[m] for m in view.marks)


def reduced_tree(tree: PlaneTree, marks) -> tuple[PlaneTree, tuple]:
    """R*: R(T, v) without its non-root vertices of outdegree one (marks are kept).

    Returns the shape and the mark label (1..k, 0 if unmarked) of each vertex.
    """
    inR, rcount, rchild, markset, essential = _marked_structure(tree, marks)
    label = {}
    for i, m in enumerate(marks):
        label.setdefault(int(m), i + 1)
    deg = tree.degrees
    end = tree.subtree_end
    kept = lambda v: v == 0 or v in markset or rcount.get(v, 0) != 1

    def next_kept(c):
        while not kept(c):
            c = rchild[c]
        return c

    degrees, labels = [], []
    stack = [0]
    while stack:
        v = stack.pop()
        kids = []
        c = v + 1
        for _ in range(deg[v]):
            if c in inR:
                kids.append(next_kept(c))
            c = int(end[c])
        degrees.append(len(kids))
        labels.append(label.get(v, 0))
        stack.extend(reversed(kids))
    return PlaneTree(degrees), tuple(labels)


def is_proper_k_tree(shape: PlaneTree, labels, k: int) -> bool:
    d = shape.degrees
    if d[0] != 1:
        return False
    leaves = [labels[v] for v in range(len(d)) if d[v] == 0]
    if sorted(leaves) != list(range(1, k + 1)):
        return False
    return all(x in (0, 2) for x in d[1:]) and all(
        labels[v] == 0 for v in range(len(d)) if d[v] > 0)


def shape_probability(view: SkeletonView, model, omega=(0,)) -> float:
    """p_G for a generic contracted shape; 0 for non-generic ones."""
    if not view.generic:
        return 0.0
    k = view.k
    pom = model.omega_mass(omega)
    dbl = math.prod(range(1, 2 * k - 2, 2))
    logp = -k * math.log(pom) - (k - 1) * math.log(model.sigma2) - math.log(dbl)
    pmf = model.pmf
    for d in view.degrees:
        if d > model.K or pmf[d] == 0:
            return 0.0
        logp += math.log(pmf[d])
    return math.exp(logp)


def label_density(u, k: int) -> float:
    """h(u): density of the limiting label vector of a k-marked skeleton."""
    u = np.asarray(u, dtype=float)
    if u.shape != (2 * k - 1,) or np.any(u < 0):
        return 0.0
    L = float(u.sum())
    return math.prod(range(1, 2 * k - 2, 2)) * L * math.exp(-L * L / 2)


def scaled_labels(view: SkeletonView, model, n: int, omega=(0,)) -> np.ndarray:
    """Labels scaled by c_Omega sigma n^(-1/2)."""
    c = math.sqrt(model.omega_mass(omega))
    return view.labels * c * model.sigma / math.sqrt(n)
