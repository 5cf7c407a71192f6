# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; see _pykernels.py for the reference semantics."""
import numpy as np
cimport numpy as cnp

from .errors import InvalidInputError

cnp.import_array()

ctypedef cnp.int64_t i64


def tree_arrays(degrees):
    cdef i64[::1] deg = np.ascontiguousarray(degrees, dtype=np.int64)
    cdef Py_ssize_t n = deg.shape[0]
    if n == 0:
        raise InvalidInputError("empty tree")
    parent_a = np.full(n, -1, dtype=np.int64)
    cidx_a = np.zeros(n, dtype=np.int64)
    depth_a = np.zeros(n, dtype=np.int64)
    end_a = np.arange(1, n + 1, dtype=np.int64)
    leaves_a = np.zeros(n, dtype=np.int64)
    stack_v_a = np.zeros(n, dtype=np.int64)
    stack_c_a = np.zeros(n, dtype=np.int64)
    cdef i64[::1] parent = parent_a
    cdef i64[::1] cidx = cidx_a
    cdef i64[::1] depth = depth_a
    cdef i64[::1] end = end_a
    cdef i64[::1] leaves = leaves_a
    cdef i64[::1] sv = stack_v_a
    cdef i64[::1] sc = stack_c_a
    cdef Py_ssize_t top = 0, v
    cdef i64 p
    for v in range(n):
        if top > 0:
            p = sv[top - 1]
            parent[v] = p
            cidx[v] = sc[top - 1]
            depth[v] = depth[p] + 1
            sc[top - 1] += 1
            if sc[top - 1] == deg[p]:
                top -= 1
        elif v > 0:
            raise InvalidInputError("degree sequence closes before its end")
        if deg[v] < 0:
            raise InvalidInputError("negative degree")
        if deg[v] > 0:
            sv[top] = v
            sc[top] = 0
            top += 1
    if top > 0:
        raise InvalidInputError("degree sequence is incomplete")
    for v in range(n):
        if deg[v] == 0:
            leaves[v] = 1
    for v in range(n - 1, 0, -1):
        p = parent[v]
        leaves[p] += leaves[v]
        if end[v] > end[p]:
            end[p] = end[v]
    return parent_a, cidx_a, depth_a, end_a, leaves_a


def decode_values(degrees, kinds, perm_ptr, perm_data, root_sign=-1):
    cdef i64[::1] deg = np.ascontiguousarray(degrees, dtype=np.int64)
    cdef i64[::1] kind = np.ascontiguousarray(kinds, dtype=np.int64)
    cdef i64[::1] ptr = np.ascontiguousarray(perm_ptr, dtype=np.int64)
    cdef i64[::1] pdata = np.ascontiguousarray(perm_data, dtype=np.int64)
    parent_a, _, _, end_a, leaves_a = tree_arrays(deg)
    cdef i64[::1] parent = parent_a
    cdef i64[::1] end = end_a
    cdef i64[::1] leaves = leaves_a
    cdef Py_ssize_t n = deg.shape[0]
    off_a = np.zeros(n, dtype=np.int64)
    sign_a = np.zeros(n, dtype=np.int64)
    kids_a = np.zeros(n + 1, dtype=np.int64)
    inv_a = np.zeros(n + 1, dtype=np.int64)
    out_a = np.zeros(leaves_a[0], dtype=np.int64)
    cdef i64[::1] off = off_a
    cdef i64[::1] sign = sign_a
    cdef i64[::1] kids = kids_a
    cdef i64[::1] inv = inv_a
    cdef i64[::1] out = out_a
    cdef Py_ssize_t v, j, r, d, lp = 0
    cdef i64 c, acc, s, base, rs = root_sign
    for v in range(n):
        d = deg[v]
        if d == 0:
            out[lp] = off[v] + 1
            lp += 1
            continue
        c = v + 1
        for j in range(d):
            kids[j] = c
            c = end[c]
        acc = off[v]
        if kind[v] == 1:
            if v == 0:
                s = rs
            elif kind[parent[v]] == 2:
                s = -1
            else:
                s = -sign[parent[v]]
            sign[v] = s
            if s > 0:
                for j in range(d):
                    off[kids[j]] = acc
                    acc += leaves[kids[j]]
            else:
                for j in range(d - 1, -1, -1):
                    off[kids[j]] = acc
                    acc += leaves[kids[j]]
        elif kind[v] == 2:
            base = ptr[v]
            for j in range(d):
                inv[pdata[base + j] - 1] = j
            for r in range(d):
                c = kids[inv[r]]
                off[c] = acc
                acc += leaves[c]
        else:
            raise InvalidInputError(f"vertex {v} has children but kind {kind[v]}")
    return out_a


def gw_sample(cdf, uniforms, Py_ssize_t n_leaves, Py_ssize_t max_vertices,
              Py_ssize_t max_attempts, out):
    cdef double[::1] c = np.ascontiguousarray(cdf, dtype=np.float64)
    cdef double[::1] u = np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef i64[::1] o = out
    cdef Py_ssize_t K = c.shape[0], nu = u.shape[0]
    cdef Py_ssize_t need, leaves, nv, pos = 0, start, attempts = 0, lo, hi, mid
    cdef bint ok
    cdef double x
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
            x = u[pos]
            pos += 1
            lo = 0
            hi = K
            while lo < hi:
                mid = (lo + hi) >> 1
                if x < c[mid]:
                    hi = mid
                else:
                    lo = mid + 1
            o[nv] = lo
            nv += 1
            need += lo - 1
            if lo == 0:
                leaves += 1
            if leaves + need > n_leaves:
                ok = False
                break
        attempts += 1
        if ok and leaves == n_leaves:
            return nv, start, attempts
    return -5, pos, attempts


def count_inversions(values):
    cdef i64[::1] vals = np.ascontiguousarray(values, dtype=np.int64)
    cdef Py_ssize_t n = vals.shape[0], i
    if n == 0:
        return 0
    cdef i64 m = 0
    for i in range(n):
        if vals[i] > m:
            m = vals[i]
    tree_a = np.zeros(m + 1, dtype=np.int64)
    cdef i64[::1] tree = tree_a
    cdef i64 inv = 0, s, j, seen = 0
    for i in range(n):
        s = 0
        j = vals[i]
        while j > 0:
            s += tree[j]
            j -= j & -j
        inv += seen - s
        seen += 1
        j = vals[i]
        while j <= m:
            tree[j] += 1
            j += j & -j
    return int(inv)
