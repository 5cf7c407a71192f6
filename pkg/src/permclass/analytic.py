"""Class specifications, counting series and the limit parameters.

The generating functions satisfy ``P = z + Q(P)`` and ``C = P/(1-P)`` with
``Q(z) = z^2/(1-z) + S(z/(1-z))``.  Writing ``Q(P) = P*C + S(C)`` gives a
recurrence where coefficient n only needs coefficients below n, which is
how the tables are filled.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import CriticalityError, InvalidInputError, NeedsLargerCutoffError
from .perm import Permutation, count_occurrences, is_simple, substitute

log = logging.getLogger(__name__)

SQRT2M1 = math.sqrt(2.0) - 1.0


@dataclass(frozen=True)
class ClassSpec:
    """Substitution-closed class given by its set of simple permutations.

    ``truncation`` is ``None`` when ``simples`` is the complete (finite)
    family; otherwise the family is only known up to that size.
    """

    name: str
    simples: dict = field(default_factory=dict)
    truncation: int | None = None
    rho_S: float | None = None

    def __post_init__(self):
        for k, group in self.simples.items():
            for a in group:
                if len(a) != k or not is_simple(a):
                    raise InvalidInputError(f"{a} is not a simple permutation of size {k}")
            if len(set(group)) != len(group):
                raise InvalidInputError(f"duplicate simples of size {k}")
        if self.truncation is not None and self.simples and max(self.simples) > self.truncation:
            raise InvalidInputError("simples larger than the declared truncation")

    @classmethod
    def from_dict(cls, d: dict) -> "ClassSpec":
        try:
            simples = {int(k): tuple(sorted(Permutation.parse(s) for s in v))
                       for k, v in d.get("simples", {}).items()}
            return cls(name=str(d.get("name", "custom")), simples=simples,
                       truncation=d.get("truncation"), rho_S=d.get("rho_S"))
        except (TypeError, AttributeError, ValueError) as exc:
            raise InvalidInputError(f"bad class specification: {exc}") from exc

    @classmethod
    def load(cls, arg: str) -> "ClassSpec":
        """A builtin name or a path to a JSON file."""
        if arg in BUILTINS:
            return BUILTINS[arg]
        path = Path(arg)
        if not path.exists():
            raise InvalidInputError(f"unknown class {arg!r} (builtins: {', '.join(BUILTINS)})")
        return cls.from_dict(json.loads(path.read_text()))

    def to_dict(self) -> dict:
        d = {"name": self.name,
             "simples": {str(k): [a.text() for a in v] for k, v in sorted(self.simples.items())}}
        if self.truncation is not None:
            d["truncation"] = self.truncation
        if self.rho_S is not None:
            d["rho_S"] = self.rho_S
        return d

    @cached_property
    def simple_set(self) -> frozenset:
        return frozenset(a for g in self.simples.values() for a in g)

    def contains_simple(self, alpha: Permutation) -> bool:
        return alpha in self.simple_set

    @property
    def k_max(self) -> int:
        return max(self.simples, default=0)

    def s(self, k: int) -> int:
        return len(self.simples.get(k, ()))

    @cached_property
    def occ12(self) -> dict:
        """Total number of 12-occurrences over the simples of each size."""
        return {k: sum(count_occurrences(Permutation.identity(2), a) for a in g)
                for k, g in self.simples.items()}

    def S(self, z: float, der: int = 0) -> float:
        tot = 0.0
        for k, g in self.simples.items():
            if k >= der:
                tot += len(g) * math.perm(k, der) * z ** (k - der)
        return tot

    def Occ12(self, z: float) -> float:
        return sum(c * z ** (k - 2) for k, c in self.occ12.items())

    def q(self, k: int) -> int:
        """Number of packed-tree decorations of a vertex with k children."""
        if k < 2:
            return 0
        return 1 + sum(len(g) * math.comb(k - 1, a - 1) for a, g in self.simples.items())


BUILTINS = {
    "separable": ClassSpec("separable"),
    "simple4": ClassSpec("simple4", {4: (Permutation.parse("2413"), Permutation.parse("3142"))}),
}


# ---------------------------------------------------------------- series

@dataclass
class SeriesTable:
    """Coefficients p_n, c_n for n = 0..N.

    Exact tables hold Python integers.  Scaled tables hold floats
    ``p_n * x**n`` for a scale x near the radius, which keeps large-n ratios
    representable.
    """

    spec: ClassSpec
    N: int
    p: list
    c: list
    exact: bool
    scale: float = 1.0
    _powers: list | None = None

    def q(self, k: int) -> int:
        return self.spec.q(k)

    def plus_power_table(self) -> list:
        """``PP[k][m] = [z^m] P^k`` for 1 <= k <= m <= N (exact tables only)."""
        if not self.exact:
            raise InvalidInputError("power tables need exact coefficients")
        if self._powers is None:
            N = self.N
            p = self.p
            PP = [None, list(p)]
            for k in range(2, N + 1):
                prev = PP[k - 1]
                row = [0] * (N + 1)
                for m in range(k, N + 1):
                    row[m] = sum(p[j] * prev[m - j] for j in range(1, m - k + 2))
                PP.append(row)
            self._powers = PP
        return self._powers


def compute_counting_series(spec: ClassSpec, N: int, exact: bool = True,
                            scale: float = 1.0) -> SeriesTable:
    if N < 1:
        raise InvalidInputError("N must be positive")
    if spec.truncation is not None and N > spec.truncation:
        log.info("class %s truncated at %d: coefficients above are lower bounds",
                 spec.name, spec.truncation)
    sizes = sorted(spec.simples)
    amax = max(sizes, default=1)
    if exact:
        if scale != 1.0:
            raise InvalidInputError("exact tables are unscaled")
        p = [0] * (N + 1)
        c = [0] * (N + 1)
        pw = {a: [0] * (N + 1) for a in range(2, amax + 1)}
        for n in range(1, N + 1):
            for a in range(2, amax + 1):
                lower = c if a == 2 else pw[a - 1]
                pw[a][n] = sum(c[j] * lower[n - j] for j in range(1, n))
            pc = sum(p[j] * c[n - j] for j in range(1, n))
            pn = (1 if n == 1 else 0) + pc + sum(spec.s(a) * pw[a][n] for a in sizes)
            p[n] = pn
            c[n] = pn + pc
        return SeriesTable(spec, N, p, c, True)
    p = np.zeros(N + 1)
    c = np.zeros(N + 1)
    pw = {a: np.zeros(N + 1) for a in range(2, amax + 1)}
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, N + 1):
            for a in range(2, amax + 1):
                lower = c if a == 2 else pw[a - 1]
                pw[a][n] = np.dot(c[1:n], lower[n - 1 : 0 : -1])
            pc = np.dot(p[1:n], c[n - 1 : 0 : -1])
            pn = (scale if n == 1 else 0.0) + pc + sum(spec.s(a) * pw[a][n] for a in sizes)
            p[n] = pn
            c[n] = pn + pc
    if not np.all(np.isfinite(p)):
        raise NeedsLargerCutoffError("scaled series overflowed; choose a scale closer to the radius")
    return SeriesTable(spec, N, p.tolist(), c.tolist(), False, scale)


# ---------------------------------------------------------------- criticality and kappa

def _kappa_equation(spec: ClassSpec, k: float) -> float:
    return spec.S(k, 1) - 2.0 / (1.0 + k) ** 2 + 1.0


def criticality_classify(spec: ClassSpec) -> str:
    if spec.truncation is None:
        # a finite family has an entire S, so the equation always has a root
        return "critical_generic"
    if spec.rho_S is None:
        return "undetermined"
    r = float(spec.rho_S)
    diff = _kappa_equation(spec, r)
    if abs(diff) <= 1e-12:
        return "critical_boundary"
    return "critical_generic" if diff > 0 else "subcritical"


def solve_kappa(spec: ClassSpec, tol: float = 1e-12) -> tuple[float, float]:
    """Root of S'(k) = 2/(1+k)^2 - 1 by bisection; returns (kappa, residual)."""
    crit = criticality_classify(spec)
    if crit in ("subcritical", "undetermined"):
        raise CriticalityError(f"class {spec.name} is {crit}")
    lo, hi = 0.0, SQRT2M1
    if spec.rho_S is not None:
        hi = min(hi, float(spec.rho_S))
    if _kappa_equation(spec, hi) < 0:
        raise CriticalityError("no root below the radius of S")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _kappa_equation(spec, mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            break
    k = 0.5 * (lo + hi)
    res = abs(_kappa_equation(spec, k))
    if res > tol:
        raise CriticalityError(f"bisection residual {res:.3g} above {tol}")
    return k, res


# ---------------------------------------------------------------- offspring law

@dataclass
class OffspringModel:
    """Law of the number of children in the packed-tree Galton-Watson model.

    ``pmf[k]`` for k = 0..K with the tail beyond K folded into K.
    """

    spec: ClassSpec
    kappa: float
    t0: float
    a: float
    sigma2: float
    p: float
    pmf: np.ndarray
    folded_mass: float
    criticality: str

    @property
    def K(self) -> int:
        return len(self.pmf) - 1

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @cached_property
    def cdf(self) -> np.ndarray:
        c = np.cumsum(self.pmf)
        c[-1] = 1.0
        return c

    @cached_property
    def hat_pmf(self) -> np.ndarray:
        """Size-biased law: P(hat xi = k) proportional to k P(xi = k)."""
        w = np.arange(self.K + 1) * self.pmf
        return w / w.sum()

    @cached_property
    def star_pmf(self) -> np.ndarray:
        """P(xi* = k) = k(k-1) P(xi = k) / sigma^2."""
        k = np.arange(self.K + 1)
        w = k * (k - 1) * self.pmf
        return w / w.sum()

    @cached_property
    def internal_pmf(self) -> np.ndarray:
        """Law of xi conditioned on xi >= 2."""
        w = self.pmf.copy()
        w[:2] = 0.0
        return w / w.sum()

    def mean(self) -> float:
        return float(np.dot(np.arange(self.K + 1), self.pmf))

    def variance(self) -> float:
        k = np.arange(self.K + 1)
        return float(np.dot(k * k, self.pmf) - self.mean() ** 2)

    def omega_mass(self, omega) -> float:
        return float(sum(self.pmf[d] for d in omega if 0 <= d <= self.K))

    def limits_dict(self) -> dict:
        return {"class": self.spec.name, "criticality": self.criticality,
                "kappa": self.kappa, "t0": self.t0, "a": self.a, "sigma2": self.sigma2,
                "p": self.p, "cutoff": self.K, "folded_mass": self.folded_mass}


def build_offspring_model(spec: ClassSpec, cutoff: int | None = None,
                          tol: float = 1e-9) -> OffspringModel:
    crit = criticality_classify(spec)
    kappa, _ = solve_kappa(spec)
    t0 = kappa / (1.0 + kappa)
    a = 1.0 - kappa - spec.S(kappa) * (1.0 + kappa) / kappa
    sigma2 = kappa * (1.0 + kappa) ** 3 * spec.S(kappa, 2) + 4.0 * kappa
    p = 2.0 * (kappa * (1.0 + kappa) ** 3 * spec.Occ12(kappa) + kappa) / sigma2
    probs = [a, 0.0]
    k = 2
    while True:
        probs.append(spec.q(k) * t0 ** (k - 1))
        tail = 1.0 - sum(probs)
        if cutoff is not None:
            if k >= cutoff:
                break
        elif tail < 1e-15 or k > 10_000:
            break
        k += 1
    folded = max(0.0, 1.0 - sum(probs))
    if folded > tol:
        raise NeedsLargerCutoffError(f"folded tail mass {folded:.3g} exceeds {tol}")
    probs[-1] += folded
    pmf = np.asarray(probs)
    return OffspringModel(spec, kappa, t0, a, sigma2, p, pmf, folded, crit)


def scaling_parameter(spec: ClassSpec) -> float:
    return build_offspring_model(spec).p


def keyres1_formula(model: OffspringModel) -> float:
    """P(branching vertex is a star at even positive distance from its nearest gadget ancestor)."""
    k = model.kappa
    return 2.0 / model.sigma2 * k * k * (k + 2.0)


def gadget_ancestor_rate(model: OffspringModel) -> float:
    """Probability that a size-biased spine vertex carries a gadget."""
    d = np.arange(model.K + 1)
    q = np.array([model.spec.q(int(x)) if x >= 2 else 1 for x in d], dtype=float)
    return float(np.sum(model.hat_pmf * (q - 1.0) / q))


def comb_identity_sides(k: int, a: int) -> tuple[Fraction, Fraction]:
    """Both sides of the same-slot identity for two leaves of a uniform composition."""
    lhs = Fraction(sum(math.comb(k - (j - i) - 1, a - 1)
                       for i in range(1, k + 1) for j in range(i + 1, k + 1)),
                   math.comb(k - 1, a - 1) * math.comb(k, 2))
    rhs = Fraction(2, a + 1) * Fraction(k - a, k - 1)
    return lhs, rhs


# ---------------------------------------------------------------- radius

@dataclass
class RadiusEstimate:
    rho: float
    delta: float
    P_at_rho: float
    N: int


def estimate_radius(spec: ClassSpec, N: int = 4000) -> RadiusEstimate:
    """Radius of P from coefficient ratios, with a linear extrapolation in 1/n.

    P(rho) sums the series and adds the n^{-3/2} tail fitted on the last term.
    """
    rough = compute_counting_series(spec, 60, exact=True)
    x = rough.p[59] / rough.p[60]
    tab = compute_counting_series(spec, N, exact=False, scale=x)
    p = np.asarray(tab.p)
    n = np.arange(N + 1)
    r = p[2:] / p[1:-1]  # r[m-1] = p_{m+1}/p_m, scaled by 1/x
    m = n[1:-1]
    mu = m[1:] * r[1:] - m[:-1] * r[:-1]  # extrapolated growth, per 1/x
    rho_seq = x / mu
    rho = float(rho_seq[-1])
    delta = float(abs(rho_seq[-1] - rho_seq[-2]))
    terms = p[1:] * (rho / x) ** n[1:]
    C = terms[-1] * N ** 1.5
    tail = C * 2.0 / math.sqrt(N + 0.5)
    return RadiusEstimate(rho, delta, float(terms.sum() + tail), N)


# ---------------------------------------------------------------- Brownian separable marginals

def brownian_marginal(k: int, p: float) -> dict:
    """Law of the size-k pattern of the biased Brownian separable permuton.

    Uniform binary plane tree with k leaves, independent signs (+ with probability p).
    """
    if k < 1:
        raise InvalidInputError("k must be positive")
    dist = {1: {Permutation.identity(1): 1.0}}
    inc, dec = Permutation.identity(2), Permutation.decreasing(2)
    for m in range(2, k + 1):
        acc: dict = {}
        for i in range(1, m):
            for A, wa in dist[i].items():
                for B, wb in dist[m - i].items():
                    w = wa * wb
                    for theta, ws in ((inc, p), (dec, 1.0 - p)):
                        key = substitute(theta, [A, B])
                        acc[key] = acc.get(key, 0.0) + w * ws
        dist[m] = acc
    cat = math.comb(2 * (k - 1), k - 1) // k
    return {pi: w / cat for pi, w in dist[k].items()}
