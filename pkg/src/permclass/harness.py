"""Monte Carlo experiments that compare finite samples with the limit predictions.

Every experiment returns an :class:`ExperimentReport` made of checks with an
estimate, its standard error, the target and a pass flag.  Sampling is split
into fixed-size blocks with seeds spawned from the experiment seed, so the
output does not depend on how many worker threads run the blocks
(``PERMCLASS_THREADS``).
"""
from __future__ import annotations

import csv
import json
import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .analytic import (ClassSpec, brownian_marginal, build_offspring_model,
                       comb_identity_sides, compute_counting_series, estimate_radius,
                       keyres1_formula)
from .limit_trees import PointedPackedTree, n_proper_trees, sample_limit_skeleton_tree
from .perm import Permutation, count_inversions, perm_code, window_codes
from .sampler import ClassSampler, SamplerConfig
from .skeleton import (extract_skeleton, is_proper_k_tree, reduced_tree, scaled_labels,
                       shape_probability)
from .trees import Gadget, STAR, PlaneTree

BLOCK = 25


@dataclass
class Check:
    parameter: str
    estimate: float
    se: float | None
    target: float | None
    passed: bool
    note: str = ""


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    checks: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, parameter, estimate, se, target, passed, note="") -> Check:
        c = Check(parameter, float(estimate), None if se is None else float(se),
                  None if target is None else float(target), bool(passed), note)
        self.checks.append(c)
        return c

    def within(self, parameter, estimate, se, target, nse=3.0, note="") -> Check:
        ok = abs(estimate - target) <= nse * se if se > 0 else abs(estimate - target) < 1e-12
        return self.add(parameter, estimate, se, target, ok, note or f"|est-target| <= {nse} SE")

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "config": self.config, "passed": self.passed,
                "checks": [asdict(c) for c in self.checks], "extra": self.extra}

    def csv_rows(self) -> list:
        return [{"experiment": self.experiment, "parameter": c.parameter, "estimate": c.estimate,
                 "se": "" if c.se is None else c.se, "target": "" if c.target is None else c.target,
                 "pass": c.passed} for c in self.checks]

    def summary(self) -> str:
        lines = []
        for c in self.checks:
            se = "" if c.se is None else f" se={c.se:.4g}"
            tg = "" if c.target is None else f" target={c.target:.6g}"
            lines.append(f"[{'PASS' if c.passed else 'FAIL'}] {self.experiment}:{c.parameter} "
                         f"est={c.estimate:.6g}{se}{tg} {c.note}".rstrip())
        return "\n".join(lines)


def write_reports(reports, json_path=None, csv_path=None) -> None:
    if json_path:
        with open(json_path, "w") as fh:
            json.dump([r.to_dict() for r in reports], fh, indent=2)
    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["experiment", "parameter", "estimate", "se",
                                               "target", "pass"])
            w.writeheader()
            for r in reports:
                w.writerows(r.csv_rows())


def n_threads() -> int:
    try:
        return max(1, int(os.environ.get("PERMCLASS_THREADS", "1")))
    except ValueError:
        return 1


def run_blocks(fn, total: int, seed, block: int = BLOCK, threads: int | None = None) -> list:
    """Call ``fn(rng, count)`` on blocks of ``total`` items and concatenate, in block order."""
    if isinstance(seed, np.random.Generator):
        seed = int(seed.integers(2 ** 63))
    nblocks = (total + block - 1) // block
    seqs = np.random.SeedSequence(seed).spawn(nblocks)
    counts = [min(block, total - i * block) for i in range(nblocks)]
    jobs = [(np.random.default_rng(s), c) for s, c in zip(seqs, counts)]
    threads = threads or n_threads()
    if threads == 1:
        parts = [fn(r, c) for r, c in jobs]
    else:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda rc: fn(*rc), jobs))
    return [x for p in parts for x in p]


def mean_se(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0


# ---------------------------------------------------------------- pattern densities

def subset_pattern_frequencies(values: np.ndarray, k: int, m: int, rng) -> np.ndarray:
    """Frequencies (indexed by perm_code) of the patterns of m uniform k-subsets."""
    n = len(values)
    if k > n:
        raise ValueError("pattern longer than the permutation")
    rows = []
    have = 0
    while have < m:
        idx = rng.integers(0, n, size=(int(m * 1.3) + 16, k))
        idx.sort(axis=1)
        idx = idx[(np.diff(idx, axis=1) > 0).all(axis=1)]
        rows.append(idx)
        have += len(idx)
    idx = np.concatenate(rows)[:m]
    ranks = np.argsort(np.argsort(values[idx], axis=1), axis=1)
    codes = ranks @ (k ** np.arange(k - 1, -1, -1))
    return np.bincount(codes, minlength=k ** k) / m


def estimate_pattern_density(spec: ClassSpec, n: int, samples: int, pi, rng=0,
                             subsets: int = 2000) -> tuple[float, float, int]:
    """Mean over sampled permutations of the frequency of pi among uniform index subsets.

    Returns (estimate, SE, sample count).
    """
    pi = Permutation(pi) if not isinstance(pi, Permutation) else pi
    if len(pi) > 4:
        raise ValueError("patterns of size at most 4")
    sampler = ClassSampler(spec)
    code = perm_code(pi.values)

    def block(r, count):
        return [subset_pattern_frequencies(np.asarray(sampler.permutation(n, r).values),
                                           len(pi), subsets, r)[code] for _ in range(count)]

    x = run_blocks(block, samples, rng)
    m, se = mean_se(x)
    return m, se, samples


def consecutive_profile(spec: ClassSpec, n: int, samples: int, pi, rng=0) -> dict:
    """Per-sample c-occ(pi)/n with its mean and SD."""
    pi = Permutation(pi) if not isinstance(pi, Permutation) else pi
    sampler = ClassSampler(spec)
    code = perm_code(pi.values)
    k = len(pi)

    def block(r, count):
        out = []
        for _ in range(count):
            v = np.asarray(sampler.permutation(n, r).values)
            out.append(np.count_nonzero(window_codes(v, k) == code) / n if n >= k else 0.0)
        return out

    x = np.asarray(run_blocks(block, samples, rng))
    return {"values": x, "mean": float(x.mean()), "sd": float(x.std(ddof=1)),
            "se": float(x.std(ddof=1) / math.sqrt(samples)), "samples": samples}


SIZE3 = [Permutation(p) for p in ((1, 2, 3), (1, 3, 2), (2, 1, 3), (2, 3, 1), (3, 1, 2), (3, 2, 1))]


def pattern_experiment(spec: ClassSpec, n: int = 1000, samples: int = 200, triples: int = 2000,
                       seed=0) -> ExperimentReport:
    model = build_offspring_model(spec)
    sampler = ClassSampler(spec, SamplerConfig(), model)
    rep = ExperimentReport("pattern", {"class": spec.name, "n": n, "samples": samples,
                                       "triples": triples, "seed": seed})

    def block(rng, count):
        out = []
        for _ in range(count):
            v = np.asarray(sampler.permutation(n, rng).values)
            d12 = 1.0 - count_inversions(v) / math.comb(n, 2)
            out.append((d12, subset_pattern_frequencies(v, 3, triples, rng)))
        return out

    res = run_blocks(block, samples, seed)
    m, se = mean_se([r[0] for r in res])
    rep.within("density(12)", m, se, model.p)
    rho3 = brownian_marginal(3, model.p)
    for pi in SIZE3:
        m, se = mean_se([r[1][perm_code(pi.values)] for r in res])
        rep.within(f"density({pi})", m, se, rho3[pi])
    return rep


# ---------------------------------------------------------------- consecutive patterns and gamma

def estimate_gamma(spec: ClassSpec, patterns, samples: int = 20000, seed=0,
                   model=None) -> dict:
    """Frequencies of the order on positions 0..m-1 of the limiting rooted permutation.

    Returns ``{pattern: (estimate, se)}``.  For classes without simple
    permutations the sign at the parent of the pointed leaf is a fair coin.
    """
    model = model or build_offspring_model(spec)
    patterns = [Permutation(p) if not isinstance(p, Permutation) else p for p in patterns]
    m = len(patterns[0])
    if any(len(p) != m for p in patterns):
        raise ValueError("patterns must share their size")
    signed = not spec.simples

    def block(rng, count):
        out = []
        for _ in range(count):
            t = PointedPackedTree(model, spec, rng, left_budget=0, right_budget=m - 1)
            t.ensure_window(0, m - 1)
            if signed:
                sign = 1 if rng.random() < 0.5 else -1
                out.append(t.read_window(0, m - 1, sign))
            else:
                while t.certifying_gadget(0, m - 1) is None:
                    t.grow(t.height + 1)
                out.append(t.read_window(0, m - 1))
        return out

    res = Counter(run_blocks(block, samples, seed))
    out = {}
    for p in patterns:
        f = res[p] / samples
        out[p] = (f, math.sqrt(max(f * (1 - f), 1e-300) / samples))
    return out


def gamma_experiment(spec: ClassSpec, size: int = 2, samples: int = 20000, seed=0) -> ExperimentReport:
    from itertools import permutations
    pats = [Permutation(p) for p in permutations(range(1, size + 1))]
    rep = ExperimentReport("gamma", {"class": spec.name, "size": size, "samples": samples,
                                     "seed": seed})
    g = estimate_gamma(spec, pats, samples, seed)
    tot = sum(v[0] for v in g.values())
    rep.add(f"sum gamma (size {size})", tot, None, 1.0, abs(tot - 1) < 1e-9)
    for p, (f, se) in g.items():
        rep.add(f"gamma({p})", f, se, None, True, "estimate")
    if size == 2:
        a, b = g[Permutation((1, 2))], g[Permutation((2, 1))]
        rep.within("gamma(12)-gamma(21)", a[0] - b[0], 2 * a[1], 0.0,
                   note="symmetric classes: both equal 1/2")
    return rep


def consecutive_experiment(spec: ClassSpec, ns=(500, 2000), samples: int = 100,
                           pattern=(2, 1), gamma_samples: int = 40000, seed=0) -> ExperimentReport:
    pi = Permutation(pattern)
    model = build_offspring_model(spec)
    rep = ExperimentReport("consecutive", {"class": spec.name, "ns": list(ns), "samples": samples,
                                           "pattern": str(pi), "seed": seed})
    sds, means = [], []
    for j, n in enumerate(ns):
        prof = consecutive_profile(spec, n, samples, pi, [seed, j])
        sds.append(prof["sd"])
        means.append((prof["mean"], prof["se"]))
        rep.add(f"sd c-occ({pi})/n at n={n}", sds[-1], None, None, True, "estimate")
    ratio = sds[0] / sds[-1]
    expect = math.sqrt(ns[-1] / ns[0])
    rep.add(f"sd ratio n={ns[0]}/n={ns[-1]}", ratio, None, expect, ratio >= 1.7,
            "ratio >= 1.7 (sqrt scaling predicts %.3g)" % expect)
    g, gse = estimate_gamma(spec, [pi], gamma_samples, [seed, 99], model)[pi]
    m, se = means[-1]
    rep.within(f"mean c-occ({pi})/n at n={ns[-1]} vs gamma", m, math.hypot(se, gse), g,
               note=f"gamma={g:.5g}+-{gse:.2g}; 3 combined SE")
    return rep


# ---------------------------------------------------------------- skeleton

def skeleton_experiment(spec: ClassSpec, n: int = 2000, k: int = 1, t: int = 0,
                        samples: int = 2000, seed=0, min_expected: float = 25.0) -> ExperimentReport:
    """Skeletons of uniform packed trees with k uniform marked leaves."""
    model = build_offspring_model(spec)
    sampler = ClassSampler(spec, SamplerConfig(), model)
    rep = ExperimentReport("skeleton", {"class": spec.name, "n": n, "k": k, "t": t,
                                        "samples": samples, "seed": seed})

    def block(rng, count):
        out = []
        for _ in range(count):
            tree = PlaneTree(sampler.tree_shape(n, rng))
            marks = [int(x) for x in rng.choice(tree.leaves, size=k)]
            red, lab = reduced_tree(tree, marks)
            out.append((extract_skeleton(tree, marks, t), red, lab))
        return out

    res = run_blocks(block, samples, seed)
    L = np.array([scaled_labels(r[0], model, n).sum() for r in res])
    ks = stats.kstest(L, stats.chi(df=2 * k).cdf)
    rep.add("KS label sum vs chi(2k)", ks.statistic, None, 0.05, ks.statistic < 0.05,
            f"KS statistic < 0.05 (p={ks.pvalue:.3g})")
    gen = [r[0] for r in res if r[0].generic]
    rep.add("generic fraction", len(gen) / samples, None, None, True, "estimate")

    if k >= 2:
        proper = Counter(lab for _, red, lab in res if is_proper_k_tree(red, lab, k))
        tot = sum(proper.values())
        expected = 1.0 / n_proper_trees(k)
        se = math.sqrt(expected * (1 - expected) / tot)
        for lab, cnt in sorted(proper.items()):
            rep.within(f"proper tree {''.join(str(x) for x in lab if x)}", cnt / tot, se, expected)
    # height parities of the non-root essential vertices
    if gen:
        for j in range(len(gen[0].essential_depths)):
            par = np.array([v.essential_depths[j] % 2 for v in gen])
            rep.within(f"parity of essential vertex {j + 1}", par.mean(),
                       0.5 / math.sqrt(len(par)), 0.5)
    freq = Counter(v.shape_key for v in gen)
    example = {v.shape_key: v for v in gen}
    tested = 0
    for key, cnt in freq.most_common():
        pg = shape_probability(example[key], model)
        if pg * samples < min_expected:
            continue
        tested += 1
        rep.within(f"shape p_G #{tested}", cnt / samples, math.sqrt(pg * (1 - pg) / samples), pg)
    rep.extra["shapes_tested"] = tested
    return rep


# ---------------------------------------------------------------- giant component

def giant_component_stats(spec: ClassSpec, n: int, samples: int, rng=0) -> np.ndarray:
    """Rows of (left count, right count, size deficit) of the largest plus-component."""
    sampler = ClassSampler(spec, SamplerConfig())

    def block(r, count):
        out = []
        for _ in range(count):
            sizes = sampler.forest_sizes(n, r)
            j = int(np.argmax(sizes))
            out.append((j, len(sizes) - 1 - j, n - sizes[j]))
        return out

    return np.array(run_blocks(block, samples, rng), dtype=np.int64)


def giant_experiment(spec: ClassSpec, n: int = 1000, samples: int = 2000, seed=0,
                     support: int = 4, n_small: int | None = None) -> ExperimentReport:
    """Components on each side of the largest plus-component against geometric(P(rho_P))."""
    q = estimate_radius(spec).P_at_rho
    rep = ExperimentReport("giant", {"class": spec.name, "n": n, "samples": samples, "seed": seed})
    res = giant_component_stats(spec, n, samples, [seed, 0])
    target = np.array([q ** j * (1 - q) for j in range(support + 1)])
    for side, name in ((0, "left"), (1, "right")):
        x = res[:, side]
        emp = np.bincount(np.minimum(x, support + 1), minlength=support + 2)[: support + 1] / samples
        tv = 0.5 * float(np.abs(emp - target).sum())
        rep.add(f"TV {name} side count on 0..{support}", tv, None, 0.05, tv < 0.05,
                "vs geometric(P(rho_P))")
        f0 = float(np.mean(x == 0))
        rep.within(f"P({name} count = 0)", f0, math.sqrt(target[0] * (1 - target[0]) / samples),
                   target[0])
    # the two sides have the same law
    d = res[:, 0] - res[:, 1]
    m, se = mean_se(d)
    rep.within("mean left - right count", m, se, 0.0)
    if n_small:
        small = giant_component_stats(spec, n_small, samples, [seed, 1])
        m1, m2 = float(np.median(small[:, 2])), float(np.median(res[:, 2]))
        rep.add(f"median deficit n={n_small} vs n={n}", m2 - m1, None, 0.0, abs(m2 - m1) <= 1,
                f"medians {m1:g} and {m2:g} within 1")
    rep.extra["P(rho)"] = q
    return rep


# ---------------------------------------------------------------- internal formula checks

def keyres1_experiment(spec: ClassSpec, samples: int = 40000, t: int = 40, seed=0) -> ExperimentReport:
    """Monte Carlo check of the star-at-even-distance probability on 2-marked limit trees."""
    model = build_offspring_model(spec)
    rep = ExperimentReport("keyres1", {"class": spec.name, "samples": samples, "t": t, "seed": seed})

    def block(rng, count):
        out = []
        for _ in range(count):
            sk = sample_limit_skeleton_tree(2, t, model, rng, spec)
            a = sk.arena
            u = sk.branch_vertices[0]
            if a.dec[u] != STAR:
                out.append((0, True))
                continue
            w, d = u, 0
            while True:
                w = a.parent[w]
                d += 1
                if w < 0:
                    out.append((0, False))
                    break
                if isinstance(a.dec[w], Gadget):
                    out.append((1 if d % 2 == 0 else 0, True))
                    break
        return out

    res = run_blocks(block, samples, seed)
    x = [r[0] for r in res]
    m, se = mean_se(x)
    rep.within("P(star, even distance to gadget)", m, se, keyres1_formula(model))
    rep.extra["uncertified"] = sum(1 for r in res if not r[1])
    ok = all(a == b for k in range(2, 13) for a_ in range(1, k + 1)
             for a, b in [comb_identity_sides(k, a_)])
    rep.add("same-slot identity, k <= 12", 1.0 if ok else 0.0, None, 1.0, ok, "exact rational check")
    return rep


# ---------------------------------------------------------------- sampler checks

def uniformity_experiment(spec: ClassSpec, n: int = 6, draws: int = 100_000, seed=0,
                          method: str = "exact") -> ExperimentReport:
    sampler = ClassSampler(spec, SamplerConfig(method=method))
    count = compute_counting_series(spec, n).c[n]
    rep = ExperimentReport("uniformity", {"class": spec.name, "n": n, "draws": draws,
                                          "method": method, "seed": seed})
    res = Counter(run_blocks(lambda rng, c: [sampler.permutation(n, rng) for _ in range(c)],
                             draws, seed, block=1000))
    rep.add("distinct permutations", len(res), None, count, len(res) == count)
    obs = np.array(list(res.values()) + [0] * (count - len(res)))
    chi = stats.chisquare(obs)
    rep.add("chi-square p-value", chi.pvalue, None, 0.001, chi.pvalue > 0.001, f"over {count} cells")
    return rep


def sampler_agreement_experiment(spec: ClassSpec, n: int = 8, draws: int = 50_000, seed=0,
                                 method: str = "gw_rejection") -> ExperimentReport:
    """Two-sample chi-square between the exact sampler and a Galton-Watson sampler, over tree shapes."""
    rep = ExperimentReport("sampler_agreement", {"class": spec.name, "n": n, "draws": draws,
                                                 "method": method, "seed": seed})
    ex = ClassSampler(spec, SamplerConfig(method="exact"))
    gw = ClassSampler(spec, SamplerConfig(method=method))
    a = Counter(run_blocks(lambda rng, c: [tuple(ex.tree_shape(n, rng)) for _ in range(c)],
                           draws, [seed, 0], block=1000))
    b = Counter(run_blocks(lambda rng, c: [tuple(gw.tree_shape(n, rng)) for _ in range(c)],
                           draws, [seed, 1], block=1000))
    keys = sorted(set(a) | set(b))
    tab = np.array([[a[k] for k in keys], [b[k] for k in keys]], dtype=float)
    # pool cells whose expected count is below 5
    exp = tab.sum(axis=0) / 2
    big = exp >= 5
    pooled = np.column_stack([tab[:, big], tab[:, ~big].sum(axis=1)]) if (~big).any() else tab[:, big]
    chi = stats.chi2_contingency(pooled)
    rep.add("two-sample chi-square p-value", chi.pvalue, None, 0.001, chi.pvalue > 0.001,
            f"{pooled.shape[1]} cells after pooling")
    return rep


EXPERIMENTS = {
    "pattern": pattern_experiment,
    "consecutive": consecutive_experiment,
    "gamma": gamma_experiment,
    "skeleton": skeleton_experiment,
    "giant": giant_experiment,
    "keyres1": keyres1_experiment,
    "uniformity": uniformity_experiment,
    "agreement": sampler_agreement_experiment,
}
