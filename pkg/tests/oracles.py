"""Brute-force reference implementations, written without the package internals."""
from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations, permutations

import numpy as np


def std(seq):
    order = sorted(seq)
    return tuple(order.index(x) + 1 for x in seq)


def pattern(nu, idx):
    """Pattern at one-based indices."""
    return std([nu[i - 1] for i in idx])


def occurrences(pi, nu):
    k = len(pi)
    pi = tuple(pi)
    return sum(1 for c in combinations(range(len(nu)), k) if std([nu[i] for i in c]) == pi)


def contains(nu, pi):
    k = len(pi)
    pi = tuple(pi)
    return any(std([nu[i] for i in c]) == pi for c in combinations(range(len(nu)), k))


def consecutive(pi, nu):
    k = len(pi)
    return sum(1 for i in range(len(nu) - k + 1) if std(nu[i:i + k]) == tuple(pi))


def is_interval(nu, a, b):
    vals = nu[a:b + 1]
    return max(vals) - min(vals) == b - a


def is_simple(nu):
    n = len(nu)
    if n < 4:
        return False
    return not any(is_interval(nu, a, b) for a in range(n) for b in range(a + 1, n)
                   if b - a + 1 < n)


@lru_cache(maxsize=None)
def simples(n):
    return tuple(p for p in permutations(range(1, n + 1)) if is_simple(p))


def in_separable(nu):
    return not (contains(nu, (2, 4, 1, 3)) or contains(nu, (3, 1, 4, 2)))


def in_simple4(nu):
    """Members of the substitution closure of {2413, 3142}.

    Every simple permutation of size at least 7 contains a simple one of
    size 5 or 6, so the basis consists of simple permutations of those sizes.
    """
    for m in (5, 6):
        if m > len(nu):
            break
        bad = set(simples(m))
        if any(std([nu[i] for i in c]) in bad for c in combinations(range(len(nu)), m)):
            return False
    return True


MEMBER = {"separable": in_separable, "simple4": in_simple4}


def plus_indecomposable(nu):
    n = len(nu)
    return not any(max(nu[:i]) == i for i in range(1, n))


@lru_cache(maxsize=None)
def class_members(name, n):
    f = MEMBER[name]
    return tuple(p for p in permutations(range(1, n + 1)) if f(p))


def class_counts(name, N):
    """(p_n, c_n) for n = 1..N by enumeration."""
    c = [len(class_members(name, n)) for n in range(1, N + 1)]
    p = [sum(1 for x in class_members(name, n) if plus_indecomposable(x)) for n in range(1, N + 1)]
    return p, c


def socc12(alpha):
    return sum(1 for i, j in combinations(range(len(alpha)), 2) if alpha[i] < alpha[j])


def gadget_count(k, simples_by_size):
    """q_k: the star plus, for each simple alpha, the compositions of k into |alpha| parts."""
    if k < 2:
        return 0
    return 1 + sum(len(group) * math.comb(k - 1, a - 1) for a, group in simples_by_size.items())


def kappa_simple4():
    """Root in (0, 1) of 8 k^3 (1+k)^2 - 2 + (1+k)^2 = 0, via numpy.roots."""
    # 8k^3 (1 + 2k + k^2) + k^2 + 2k - 1
    coeffs = [8, 16, 8, 1, 2, -1]
    roots = np.roots(coeffs)
    real = [r.real for r in roots if abs(r.imag) < 1e-12 and 0 < r.real < 1]
    assert len(real) == 1
    return real[0]


def p_by_case_sums(kappa, simples_by_size, K=600):
    """p from the three explicit case sums over outdegrees (before any closed form).

    Star at the common ancestor with an even positive distance to the nearest
    gadget ancestor, plus same-branch and different-branch gadget cases.
    """
    t0 = kappa / (1 + kappa)
    q = [gadget_count(k, simples_by_size) for k in range(K + 1)]
    pmf = np.zeros(K + 1)
    pmf[2:] = [q[k] * t0 ** (k - 1) for k in range(2, K + 1)]
    pmf[0] = 1 - pmf.sum()
    ks = np.arange(K + 1)
    sigma2 = float((ks ** 2 * pmf).sum() - 1)
    hat = ks * pmf
    eta = 1 - sum(hat[k] / q[k] for k in range(2, K + 1))
    geo_even = (1 - eta) / (2 - eta)
    star = lambda k: k * (k - 1) * pmf[k] / sigma2
    part1 = sum(geo_even * star(k) / q[k] for k in range(2, K + 1))
    part2 = part3 = 0.0
    for k in range(4, K + 1):
        w = star(k) * (q[k] - 1) / q[k]
        for a, group in simples_by_size.items():
            if a > k:
                continue
            same = sum(math.comb(k - (j - i) - 1, a - 1) for i in range(1, k + 1)
                       for j in range(i + 1, k + 1)) / (math.comb(k - 1, a - 1) * math.comb(k, 2))
            frac = len(group) * math.comb(k - 1, a - 1) / (q[k] - 1)
            part2 += w * frac * same
            for alpha in group:
                occ = socc12(alpha) / math.comb(a, 2)
                part3 += w * math.comb(k - 1, a - 1) / (q[k] - 1) * occ * (1 - same)
        if k > 60 and star(k) < 1e-18:
            break
    return part1 + part2 + part3, sigma2


def brownian3(p):
    """Size-3 marginal: two binary shapes, independent signs."""
    r = p * (1 - p) / 2
    return {(1, 2, 3): p * p, (3, 2, 1): (1 - p) ** 2, (1, 3, 2): r, (2, 1, 3): r,
            (2, 3, 1): r, (3, 1, 2): r}


def binary_tree_patterns(k, p):
    """Law of the size-k pattern by enumeration over all binary trees and sign vectors."""
    def trees(m):
        if m == 1:
            return ["."]
        out = []
        for i in range(1, m):
            for left in trees(i):
                for right in trees(m - i):
                    out.append((left, right))
        return out

    def evaluate(t, signs):
        if t == ".":
            return [1]
        s = next(signs)
        a, b = evaluate(t[0], signs), evaluate(t[1], signs)
        if s > 0:
            return a + [x + len(a) for x in b]
        return [x + len(b) for x in a] + b

    shapes = trees(k)
    law = {}
    for t in shapes:
        for signs in np.ndindex(*([2] * (k - 1))):
            w = math.prod(p if s == 0 else 1 - p for s in signs) / len(shapes)
            perm = tuple(evaluate(t, iter(1 if s == 0 else -1 for s in signs)))
            law[perm] = law.get(perm, 0.0) + w
    return law


def induced_subtree(degrees, keep):
    """Preorder degrees of the subgraph induced by an ancestor-closed vertex set."""
    n = len(degrees)
    parent = [-1] * n
    stack = []
    for v in range(n):
        if stack:
            parent[v] = stack[-1][0]
            stack[-1][1] -= 1
            if stack[-1][1] == 0:
                stack.pop()
        if degrees[v]:
            stack.append([v, degrees[v]])
    kept = sorted(keep)
    idx = {v: i for i, v in enumerate(kept)}
    out = [0] * len(kept)
    for v in kept:
        if parent[v] >= 0:
            out[idx[parent[v]]] += 1
    return out, parent, idx


def r_t_oracle(degrees, marks, t):
    """R^[t] by definition, with the deleted middle vertices kept as unary vertices.

    Returns (preorder degrees, mark positions, deleted-vertex counts per segment).
    """
    n = len(degrees)
    _, parent, _ = induced_subtree(degrees, range(n))
    depth = [0] * n
    for v in range(1, n):
        depth[v] = depth[parent[v]] + 1
    R = set()
    for m in marks:
        v = m
        while v >= 0:
            R.add(v)
            v = parent[v]
    kids = {v: [c for c in range(n) if parent[c] == v] for v in R}
    rkids = {v: [c for c in kids[v] if c in R] for v in R}
    essential = {0} | set(marks) | {v for v in R if len(rkids[v]) >= 2}

    def anc_ess(v):
        u = v
        while u not in essential:
            u = parent[u]
        return u

    def desc_ess(v):
        u = v
        while u not in essential:
            u = rkids[u][0]
        return u

    dist = {v: min(depth[v] - depth[anc_ess(v)], depth[desc_ess(v)] - depth[v]) for v in R}
    keep = set(R)
    for v in R:
        if dist[v] <= t:
            for c in kids[v]:
                if c not in R:
                    # whole branch
                    stack = [c]
                    while stack:
                        w = stack.pop()
                        keep.add(w)
                        stack.extend(x for x in range(w + 1, n) if parent[x] == w)
    out, _, idx = induced_subtree(degrees, keep)
    deleted = []
    for y in sorted(essential - {0}):
        x = anc_ess(parent[y])
        L = depth[y] - depth[x]
        deleted.append(max(0, L - 2 * t - 1))
    return out, [idx[m] for m in marks], deleted


def chi_cdf_by_quadrature(x, k):
    """CDF of the density proportional to L^(2k-1) exp(-L^2/2), integrated numerically."""
    from scipy import integrate
    f = lambda L: L ** (2 * k - 1) * math.exp(-L * L / 2)
    Z = integrate.quad(f, 0, math.inf)[0]
    return integrate.quad(f, 0, x)[0] / Z


@lru_cache(maxsize=None)
def shapes(n):
    """Preorder degree tuples of plane trees with n leaves and no unary vertex."""
    if n == 1:
        return ((0,),)
    out = []
    for k in range(2, n + 1):
        for parts in _compositions(n, k):
            acc = [(k,)]
            for m in parts:
                acc = [a + s for a in acc for s in shapes(m)]
            out.extend(acc)
    return tuple(out)


def _compositions(n, k):
    for cuts in combinations(range(1, n), k - 1):
        b = (0,) + cuts + (n,)
        yield tuple(b[i + 1] - b[i] for i in range(k))
