"""Permutations and the elementary pattern operations.

Permutations are stored as tuples of one-based values.  Index sets passed to
pattern functions are one-based and sorted.
"""
from __future__ import annotations

import itertools
import math
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError


class Permutation:
    """An immutable permutation of ``1..n`` in one-line notation."""

    __slots__ = ("values", "_hash")

    def __init__(self, values: Iterable[int], check: bool = True):
        vals = tuple(int(v) for v in values)
        if check:
            n = len(vals)
            if n == 0:
                raise InvalidInputError("empty permutation")
            if sorted(vals) != list(range(1, n + 1)):
                raise InvalidInputError(f"not a permutation of 1..{n}: {vals}")
        self.values = vals
        self._hash = hash(vals)

    @classmethod
    def parse(cls, text: str) -> "Permutation":
        """Parse ``"2 4 1 3"``, ``"2,4,1,3"`` or compact ``"2413"`` (only for n <= 9)."""
        s = text.strip()
        if not s:
            raise InvalidInputError("empty permutation text")
        if "," in s or " " in s:
            parts = [p for p in s.replace(",", " ").split() if p]
            try:
                return cls(int(p) for p in parts)
            except ValueError as exc:
                raise InvalidInputError(f"bad permutation text {text!r}") from exc
        if not s.isdigit():
            raise InvalidInputError(f"bad permutation text {text!r}")
        if len(s) > 9:
            raise InvalidInputError("compact notation is only allowed for n <= 9")
        return cls(int(c) for c in s)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(1, n + 1), check=False)

    @classmethod
    def decreasing(cls, n: int) -> "Permutation":
        return cls(range(n, 0, -1), check=False)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __iter__(self):
        return iter(self.values)

    def __eq__(self, other) -> bool:
        if isinstance(other, Permutation):
            return self.values == other.values
        return NotImplemented

    def __lt__(self, other: "Permutation") -> bool:
        return (len(self), self.values) < (len(other), other.values)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Permutation({self.text()!r})"

    def __str__(self) -> str:
        return self.text()

    def text(self, compact: bool | None = None) -> str:
        if compact is None:
            compact = len(self) <= 9
        if compact:
            return "".join(str(v) for v in self.values)
        return " ".join(str(v) for v in self.values)

    def inverse(self) -> "Permutation":
        inv = [0] * len(self)
        for i, v in enumerate(self.values):
            inv[v - 1] = i + 1
        return Permutation(inv, check=False)

    def is_increasing(self) -> bool:
        return all(v == i + 1 for i, v in enumerate(self.values))

    def is_decreasing(self) -> bool:
        n = len(self)
        return all(v == n - i for i, v in enumerate(self.values))


def as_perm(x) -> Permutation:
    if isinstance(x, Permutation):
        return x
    if isinstance(x, str):
        return Permutation.parse(x)
    return Permutation(x)


def std(seq: Sequence) -> Permutation:
    """Standardize a sequence of distinct comparable values."""
    order = sorted(range(len(seq)), key=lambda i: seq[i])
    out = [0] * len(seq)
    for rank, i in enumerate(order, 1):
        out[i] = rank
    if len(set(seq)) != len(seq):
        raise InvalidInputError("std needs distinct values")
    return Permutation(out, check=False)


def _check_indices(n: int, idx: Sequence[int]) -> None:
    if len(idx) == 0:
        raise InvalidInputError("empty index set")
    prev = 0
    for i in idx:
        if i <= prev or i > n:
            raise InvalidInputError(f"indices must be strictly increasing in 1..{n}: {list(idx)}")
        prev = i


def pattern_at(nu, idx: Sequence[int]) -> Permutation:
    """pat_I(nu) for a sorted one-based index set I."""
    nu = as_perm(nu)
    _check_indices(len(nu), idx)
    return std([nu.values[i - 1] for i in idx])


def interval_pattern(nu, a: int, b: int) -> Permutation:
    """pat_[a,b](nu)."""
    nu = as_perm(nu)
    if not 1 <= a <= b <= len(nu):
        raise InvalidInputError(f"bad interval [{a},{b}] for size {len(nu)}")
    return std(nu.values[a - 1 : b])


def _contains_at(vals, pi_vals, idx) -> bool:
    sub = [vals[i] for i in idx]
    order = sorted(range(len(sub)), key=sub.__getitem__)
    return all(pi_vals[j] == r + 1 for r, j in enumerate(order))


MAX_BRUTE_PATTERN = 6


def count_occurrences(pi, nu, force: bool = False) -> int:
    """Number of index sets I with pat_I(nu) = pi (exhaustive)."""
    pi, nu = as_perm(pi), as_perm(nu)
    k = len(pi)
    if k > MAX_BRUTE_PATTERN and not force:
        raise InvalidInputError(f"pattern of size {k} > {MAX_BRUTE_PATTERN}; pass force=True")
    if k > len(nu):
        return 0
    if k == 2:
        inv = count_inversions(nu.values)
        tot = len(nu) * (len(nu) - 1) // 2
        return tot - inv if pi.values == (1, 2) else inv
    return sum(1 for idx in itertools.combinations(range(len(nu)), k)
               if _contains_at(nu.values, pi.values, idx))


def count_consecutive(pi, nu) -> int:
    """Number of windows [i, i+k-1] with pat equal to pi."""
    pi, nu = as_perm(pi), as_perm(nu)
    k = len(pi)
    n = len(nu)
    if k > n:
        return 0
    codes = window_codes(np.asarray(nu.values), k)
    return int(np.count_nonzero(codes == perm_code(pi.values)))


def perm_code(vals: Sequence[int]) -> int:
    """Integer code of a small pattern (base-k digits of the values)."""
    k = len(vals)
    c = 0
    for v in vals:
        c = c * k + (v - 1)
    return c


def window_codes(values: np.ndarray, k: int) -> np.ndarray:
    """Codes of std of every length-k window of ``values``."""
    win = np.lib.stride_tricks.sliding_window_view(values, k)
    ranks = np.argsort(np.argsort(win, axis=1), axis=1)
    weights = k ** np.arange(k - 1, -1, -1)
    return ranks @ weights


def density(pi, nu) -> float:
    pi, nu = as_perm(pi), as_perm(nu)
    if len(pi) > len(nu):
        return 0.0
    return count_occurrences(pi, nu) / math.comb(len(nu), len(pi))


def count_inversions(values: Sequence[int]) -> int:
    """Pairs i < j with values[i] > values[j]."""
    from . import kernels
    arr = np.asarray(values, dtype=np.int64)
    if len(arr) and (arr.min() < 1 or arr.max() > len(arr)):
        # the kernel indexes a Fenwick tree by value, so compress to ranks 1..n
        arr = np.argsort(np.argsort(arr, kind="stable"), kind="stable") + 1
    return kernels.count_inversions(arr)


def substitute(theta, parts: Sequence) -> Permutation:
    """theta[parts[0], ..., parts[d-1]]."""
    theta = as_perm(theta)
    parts = [as_perm(p) for p in parts]
    if len(parts) != len(theta):
        raise InvalidInputError(f"{len(theta)} parts expected, got {len(parts)}")
    sizes = [len(p) for p in parts]
    offset = [0] * len(theta)
    acc = 0
    for j in sorted(range(len(theta)), key=lambda j: theta.values[j]):
        offset[j] = acc
        acc += sizes[j]
    out = []
    for j, p in enumerate(parts):
        out.extend(v + offset[j] for v in p.values)
    return Permutation(out, check=False)


def direct_sum(parts: Sequence) -> Permutation:
    return substitute(Permutation.identity(len(parts)), parts)


def skew_sum(parts: Sequence) -> Permutation:
    return substitute(Permutation.decreasing(len(parts)), parts)


def is_block(nu, a: int, b: int) -> bool:
    vals = as_perm(nu).values[a - 1 : b]
    return max(vals) - min(vals) == b - a


def is_simple(nu) -> bool:
    """Simple: size > 2 and no block of size strictly between 1 and n."""
    nu = as_perm(nu)
    n = len(nu)
    if n <= 2:
        return False
    v = nu.values
    for i in range(n):
        lo = hi = v[i]
        for j in range(i + 1, n):
            x = v[j]
            if x < lo:
                lo = x
            elif x > hi:
                hi = x
            if hi - lo == j - i and j - i + 1 < n:
                return False
    return True


def plus_components(nu) -> list[Permutation]:
    """Maximal decomposition nu = 1[...] into plus-indecomposable parts."""
    nu = as_perm(nu)
    out, start, mx = [], 0, 0
    for i, v in enumerate(nu.values):
        mx = max(mx, v)
        if mx == i + 1:
            out.append(std(nu.values[start : i + 1]))
            start = i + 1
    return out


def minus_components(nu) -> list[Permutation]:
    nu = as_perm(nu)
    n = len(nu)
    out, start, mn = [], 0, n + 1
    for i, v in enumerate(nu.values):
        mn = min(mn, v)
        if mn == n - i:
            out.append(std(nu.values[start : i + 1]))
            start = i + 1
    return out


def all_permutations(n: int):
    for p in itertools.permutations(range(1, n + 1)):
        yield Permutation(p, check=False)


def simple_permutations(n: int) -> list[Permutation]:
    return [p for p in all_permutations(n) if is_simple(p)]
