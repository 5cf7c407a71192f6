"""Pure-Python versions of the hot loops.

Semantics match ``_ckernels.pyx`` exactly (same inputs, same uniform
consumption), so results do not depend on which backend is loaded.
"""
import bisect

import numpy as np

from .errors import InvalidInputError

KIND_LEAF = 0
KIND_STAR = 1
KIND_PERM = 2


def tree_arrays(degrees):
    """Parent, child index, depth, subtree end and leaf count of a preorder degree sequence."""
    deg = [int(d) for d in degrees]
    n = len(deg)
    if n == 0:
        raise InvalidInputError("empty tree")
    parent = [-1] * n
    cidx = [0] * n
    depth = [0] * n
    stack = []
    for v in range(n):
        if stack:
            top = stack[-1]
            p = top[0]
            parent[v] = p
            cidx[v] = top[1]
            depth[v] = depth[p] + 1
            top[1] += 1
            if top[1] == deg[p]:
                stack.pop()
        elif v > 0:
            raise InvalidInputError("degree sequence closes before its end")
        if deg[v] < 0:
            raise InvalidInputError("negative degree")
        if deg[v] > 0:
            stack.append([v, 0])
    if stack:
        raise InvalidInputError("degree sequence is incomplete")
    end = list(range(1, n + 1))
    leaves = [1 if d == 0 else 0 for d in deg]
    for v in range(n - 1, 0, -1):
        p = parent[v]
        leaves[p] += leaves[v]
        if end[v] > end[p]:
            end[p] = end[v]
    as_arr = lambda x: np.asarray(x, dtype=np.int64)
    return as_arr(parent), as_arr(cidx), as_arr(depth), as_arr(end), as_arr(leaves)


def decode_values(degrees, kinds, perm_ptr, perm_data, root_sign=-1):
    """Values of the leaves (in preorder) of a tree read by nested substitution.

    ``kinds[v]`` is 0 for a leaf, 1 for a star vertex whose sign follows the
    alternation rule, 2 for a vertex carrying the explicit permutation
    ``perm_data[perm_ptr[v]:perm_ptr[v] + degrees[v]]``.
    """
    deg = [int(d) for d in degrees]
    kinds = [int(k) for k in kinds]
    parent, _, _, end, leaves = tree_arrays(deg)
    parent = parent.tolist()
    end = end.tolist()
    leaves = leaves.tolist()
    n = len(deg)
    off = [0] * n
    sign = [0] * n
    out = []
    for v in range(n):
        d = deg[v]
        if d == 0:
            out.append(off[v] + 1)
            continue
        kids = []
        c = v + 1
        for _ in range(d):
            kids.append(c)
            c = end[c]
        acc = off[v]
        k = kinds[v]
        if k == KIND_STAR:
            if v == 0:
                s = root_sign
            elif kinds[parent[v]] == KIND_PERM:
                s = -1
            else:
                s = -sign[parent[v]]
            sign[v] = s
            seq = kids if s > 0 else kids[::-1]
            for c in seq:
                off[c] = acc
                acc += leaves[c]
        elif k == KIND_PERM:
            base = int(perm_ptr[v])
            inv = [0] * d
            for j in range(d):
                inv[int(perm_data[base + j]) - 1] = j
            for r in range(d):
                c = kids[inv[r]]
                off[c] = acc
                acc += leaves[c]
        else:
            raise InvalidInputError(f"vertex {v} has children but kind {k}")
    return np.asarray(out, dtype=np.int64)


def gw_sample(cdf, uniforms, n_leaves, max_vertices, max_attempts, out):
    """Galton-Watson attempts in preorder until one has exactly ``n_leaves`` leaves.

    Each vertex consumes one uniform, mapped to a degree by inverse CDF.  An
    attempt is aborted as soon as it must end with more than ``n_leaves``
    leaves or exceeds ``max_vertices``.

    Returns ``(status, start, attempts)``.  On success ``status`` is the number
    of vertices written to ``out`` and ``start`` the offset of the successful
    attempt.  ``status == -3`` means ``uniforms`` ran out during the attempt
    starting at ``start``; the caller extends the buffer from there and calls
    again.  ``status == -5`` means ``max_attempts`` attempts all failed.
    """
    cdf_l = cdf.tolist() if hasattr(cdf, "tolist") else list(cdf)
    nu = len(uniforms)
    pos = 0
    attempts = 0
    while attempts < max_attempts:
        start = pos
        need = 1
        leaves = 0
        nv = 0
        ok = True
        while need > 0:
            if nv >= max_vertices:
                ok = False
                break
            if pos >= nu:
                return -3, start, attempts
            d = bisect.bisect_right(cdf_l, uniforms[pos])
            pos += 1
            out[nv] = d
            nv += 1
            need += d - 1
            if d == 0:
                leaves += 1
            if leaves + need > n_leaves:
                ok = False
                break
        attempts += 1
        if ok and leaves == n_leaves:
            return nv, start, attempts
    return -5, pos, attempts


def count_inversions(values):
    """Inversions of a sequence of distinct values in 1..max (Fenwick tree over values)."""
    vals = [int(v) for v in values]
    n = len(vals)
    if n == 0:
        return 0
    m = max(vals)
    tree = [0] * (m + 1)
    inv = 0
    seen = 0
    for v in vals:
        s = 0
        i = v
        while i > 0:
            s += tree[i]
            i -= i & -i
        inv += seen - s
        seen += 1
        i = v
        while i <= m:
            tree[i] += 1
            i += i & -i
    return inv
