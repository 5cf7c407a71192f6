"""Uniform samplers for packed trees and class permutations.

A uniform permutation of size n in the class is a sequence of packed trees
(one per plus-component).  Component sizes follow the exact counts of the
sequence construction; each tree is a uniform packed tree with m leaves,
which is a Galton-Watson tree conditioned on m leaves with uniform
decorations.

Tree shapes come from one of three samplers:

* ``exact``: recursive method on exact integer tables, for m <= ``n_exact_max``;
* ``gw_rejection``: unconditioned Galton-Watson attempts with early abort;
* ``cycle_lemma``: i.i.d. leaf-terminated blocks conditioned on their total
  increment, rotated into a valid depth-first sequence.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .analytic import (ClassSpec, OffspringModel, SeriesTable, build_offspring_model,
                       compute_counting_series)
from .errors import InvalidInputError, ResourceLimitError, RetryLimitError
from .perm import Permutation
from .trees import STAR, DecoratedForest, Gadget, PackedTree, forest_decode

log = logging.getLogger(__name__)

METHODS = ("exact", "gw_rejection", "cycle_lemma", "gw")
GW_REJECTION_MAX = 256


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def randbelow(rng: np.random.Generator, n: int) -> int:
    """Uniform integer in [0, n) for arbitrarily large n."""
    if n <= 0:
        raise InvalidInputError("randbelow needs a positive bound")
    if n < 2 ** 62:
        return int(rng.integers(n))
    k = n.bit_length()
    nbytes = (k + 7) // 8
    while True:
        r = int.from_bytes(rng.bytes(nbytes), "little") >> (8 * nbytes - k)
        if r < n:
            return r


def choose_weighted(rng, weights, total=None) -> int:
    """Index i with probability weights[i] / total (exact for integer weights)."""
    if total is None:
        total = sum(weights)
    if isinstance(total, int):
        r = randbelow(rng, total)
    else:
        r = rng.random() * total
    acc = 0
    for i, w in enumerate(weights):
        acc += w
        if r < acc:
            return i
    return len(weights) - 1


# ---------------------------------------------------------------- decorations

def _unrank_composition(d: int, parts: int, rank: int) -> tuple:
    """The rank-th composition of d into ``parts`` positive parts (lexicographic cuts)."""
    cuts = []
    x = 1
    r = rank
    for left in range(parts - 1, 0, -1):
        while True:
            block = math.comb(d - 1 - x, left - 1)
            if r < block:
                cuts.append(x)
                x += 1
                break
            r -= block
            x += 1
    bounds = [0] + cuts + [d]
    return tuple(bounds[i + 1] - bounds[i] for i in range(parts))


@lru_cache(maxsize=None)
def _gadget(root: Permutation, slots: tuple) -> Gadget:
    return Gadget(root, slots)


def decoration_from_rank(spec: ClassSpec, d: int, r: int):
    """The r-th of the q_d decorations of a vertex with d children (0 is the star)."""
    if r == 0:
        return STAR
    r -= 1
    for a in sorted(spec.simples):
        group = spec.simples[a]
        if a > d:
            break
        ncomp = math.comb(d - 1, a - 1)
        block = len(group) * ncomp
        if r < block:
            return _gadget(group[r // ncomp], _unrank_composition(d, a, r % ncomp))
        r -= block
    raise InvalidInputError(f"rank out of range for degree {d}")


def decorate(degrees, spec: ClassSpec, rng) -> PackedTree:
    """Uniform decorations on a packed-tree shape."""
    deg = np.asarray(degrees, dtype=np.int64)
    decs: list = [None if d == 0 else STAR for d in deg.tolist()]
    if spec.simples:
        kmin = min(spec.simples)
        idx = np.flatnonzero(deg >= kmin)
        if len(idx):
            qs = np.array([spec.q(int(deg[v])) for v in idx], dtype=np.int64)
            ranks = rng.integers(0, qs)
            for v, r in zip(idx.tolist(), ranks.tolist()):
                if r:
                    decs[v] = decoration_from_rank(spec, int(deg[v]), r)
    return PackedTree(deg.tolist(), decs, check=False)


# ---------------------------------------------------------------- tree shapes

def sample_shape_exact(table: SeriesTable, m: int, rng) -> list:
    """Uniform packed-tree shape with m leaves weighted by decoration counts."""
    if m > table.N:
        raise ResourceLimitError(f"exact tables only reach {table.N}")
    PP = table.plus_power_table()
    p = table.p
    out = []
    stack = [m]
    while stack:
        s = stack.pop()
        if s == 1:
            out.append(0)
            continue
        ks = list(range(2, s + 1))
        k = ks[choose_weighted(rng, [table.q(k) * PP[k][s] for k in ks], p[s])]
        sizes = []
        rest = s
        for left in range(k, 1, -1):
            js = list(range(1, rest - left + 2))
            w = [p[j] * PP[left - 1][rest - j] for j in js]
            j = js[choose_weighted(rng, w, PP[left][rest])]
            sizes.append(j)
            rest -= j
        sizes.append(rest)
        out.append(k)
        stack.extend(reversed(sizes))
    return out


def sample_shape_gw_rejection(model: OffspringModel, n: int, rng, max_attempts: int = 10 ** 7,
                              cap_factor: int = 64) -> np.ndarray:
    """Galton-Watson tree conditioned on n leaves, by rejection with early abort."""
    cap = cap_factor * n
    buf = max(4096, 16 * n)
    u = rng.random(buf)
    out = np.empty(cap + 1, dtype=np.int64)
    used = 0
    while used < max_attempts:
        status, start, att = kernels.gw_sample(model.cdf, u, n, cap, max_attempts - used, out)
        used += att
        if status > 0:
            return out[:status].copy()
        if status == -3:
            u = np.concatenate([u[start:], rng.random(buf)])
            continue
        break
    raise RetryLimitError(f"no tree with {n} leaves after {used} attempts")


def sample_shape_cycle_lemma(model: OffspringModel, n: int, rng,
                             max_attempts: int = 100_000) -> np.ndarray:
    """Galton-Watson tree conditioned on n leaves from conditioned i.i.d. blocks.

    A depth-first degree sequence cut after each leaf gives n blocks: a
    geometric number of internal vertices (degree law xi given xi >= 2)
    followed by a leaf.  The tree condition is that the n block increments
    add up to n - 1; exactly one rotation by whole blocks is then a valid
    depth-first sequence, and every tree arises from exactly n block
    sequences.
    """
    if n == 1:
        return np.zeros(1, dtype=np.int64)
    cdf = np.cumsum(model.internal_pmf)
    cdf[-1] = 1.0
    for _ in range(max_attempts):
        J = rng.geometric(model.a, size=n) - 1
        M = int(J.sum())
        if M == 0:
            continue
        d = np.searchsorted(cdf, rng.random(M), side="right")
        if int(d.sum()) - M != n - 1:
            continue
        deg = np.zeros(M + n, dtype=np.int64)
        leaf_pos = np.cumsum(J + 1) - 1
        mask = np.ones(M + n, dtype=bool)
        mask[leaf_pos] = False
        deg[mask] = d
        walk = np.cumsum(deg - 1)
        k = int(np.argmin(walk))
        return np.roll(deg, -(k + 1))
    raise RetryLimitError(f"cycle-lemma sampler failed {max_attempts} times for n={n}")


# ---------------------------------------------------------------- the class sampler

@dataclass
class SamplerConfig:
    method: str = "gw"
    n_exact_max: int = 64
    max_attempts: int = 10 ** 7
    cap_factor: int = 64

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidInputError(f"method must be one of {METHODS}")


@dataclass
class ClassSampler:
    """Samples uniform permutations (or packed forests) of a class."""

    spec: ClassSpec
    config: SamplerConfig = field(default_factory=SamplerConfig)
    model: OffspringModel | None = None

    def __post_init__(self):
        if self.model is None and self.config.method != "exact":
            self.model = build_offspring_model(self.spec)
        self._exact: SeriesTable | None = None
        self._scaled: SeriesTable | None = None

    def exact_table(self, n: int) -> SeriesTable:
        if n > self.config.n_exact_max:
            raise ResourceLimitError(f"exact method limited to n <= {self.config.n_exact_max}")
        if self._exact is None or self._exact.N < n:
            self._exact = compute_counting_series(self.spec, max(n, 16), exact=True)
        return self._exact

    def scaled_table(self, n: int) -> SeriesTable:
        if self._scaled is None or self._scaled.N < n:
            m = self.model or build_offspring_model(self.spec)
            rho = m.t0 - (m.t0 ** 2 / (1 - m.t0) + self.spec.S(m.kappa))
            self._scaled = compute_counting_series(self.spec, max(n, 64), exact=False, scale=rho)
        return self._scaled

    def forest_sizes(self, n: int, rng) -> list:
        """Component sizes of a uniform class permutation of size n."""
        if n < 1:
            raise InvalidInputError("n must be positive")
        if n <= self.config.n_exact_max:
            tab = self.exact_table(n)
        else:
            tab = self.scaled_table(n)
        p, c = tab.p, tab.c
        sizes = []
        rest = n
        while rest > 0:
            w = [p[k] * (c[rest - k] if k < rest else 1) for k in range(1, rest + 1)]
            total = c[rest] if tab.exact else None
            k = 1 + choose_weighted(rng, w, total)
            sizes.append(k)
            rest -= k
        return sizes

    def tree_shape(self, m: int, rng, method: str | None = None) -> np.ndarray:
        method = method or self.config.method
        if m == 1:
            return np.zeros(1, dtype=np.int64)
        if method == "gw":
            method = "gw_rejection" if m <= GW_REJECTION_MAX else "cycle_lemma"
        if method == "exact":
            return np.asarray(sample_shape_exact(self.exact_table(m), m, rng), dtype=np.int64)
        if method == "gw_rejection":
            return sample_shape_gw_rejection(self.model, m, rng, self.config.max_attempts,
                                             self.config.cap_factor)
        return sample_shape_cycle_lemma(self.model, m, rng)

    def packed_tree(self, m: int, rng, method: str | None = None) -> PackedTree:
        return decorate(self.tree_shape(m, rng, method), self.spec, rng)

    def forest(self, n: int, rng, method: str | None = None) -> DecoratedForest:
        return DecoratedForest(tuple(self.packed_tree(m, rng, method)
                                     for m in self.forest_sizes(n, rng)))

    def permutation(self, n: int, rng, method: str | None = None) -> Permutation:
        return forest_decode(self.forest(n, rng, method))


def sample_uniform_class_perm(spec: ClassSpec, n: int, seed=None, method: str = "gw") -> Permutation:
    return ClassSampler(spec, SamplerConfig(method=method)).permutation(n, make_rng(seed))
