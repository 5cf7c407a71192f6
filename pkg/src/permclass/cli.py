"""Command line entry point: ``permclass {limits,sample,decompose,pack,stats}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .analytic import ClassSpec, build_offspring_model, estimate_radius
from .errors import (ClassMembershipError, CriticalityError, InvalidInputError,
                     ResourceLimitError, RetryLimitError)
from .perm import Permutation
from .textio import forest_to_text, tree_to_text
from .trees import canonical_tree, forest_decode, forest_encode, substitution_decompose

log = logging.getLogger("permclass")


def _cmd_limits(args) -> int:
    spec = ClassSpec.load(args.cls)
    model = build_offspring_model(spec, cutoff=args.cutoff)
    out = model.limits_dict()
    if args.radius:
        r = estimate_radius(spec)
        out.update({"rho_P": r.rho, "P_at_rho": r.P_at_rho})
    print(json.dumps(out, indent=2))
    return 0


def _cmd_sample(args) -> int:
    import numpy as np
    from .sampler import ClassSampler, SamplerConfig
    spec = ClassSpec.load(args.cls)
    cfg = SamplerConfig(method=args.method, n_exact_max=max(64, args.n))
    sampler = ClassSampler(spec, cfg)
    rng = np.random.default_rng(args.seed)
    for _ in range(args.count):
        forest = sampler.forest(args.n, rng)
        line = forest_decode(forest).text(compact=False)
        if args.emit_trees:
            line += "\t" + forest_to_text(forest)
        print(line)
    return 0


def _cmd_decompose(args) -> int:
    nu = Permutation.parse(args.perm)
    if len(nu) == 1:
        print(json.dumps({"perm": nu.text(), "kind": "leaf"}))
        return 0
    theta, parts = substitution_decompose(nu)
    kind = ("plus" if theta == Permutation.identity(len(theta)) else
            "minus" if theta == Permutation.decreasing(len(theta)) else "simple")
    out = {"perm": nu.text(), "kind": kind, "theta": theta.text(),
           "parts": [p.text() for p in parts]}
    if args.tree:
        out["canonical_tree"] = tree_to_text(canonical_tree(nu))
    print(json.dumps(out))
    return 0


def _cmd_pack(args) -> int:
    nu = Permutation.parse(args.perm)
    spec = ClassSpec.load(args.cls) if args.cls else None
    print(forest_to_text(forest_encode(nu, spec)))
    return 0


def _cmd_stats(args) -> int:
    from . import harness
    spec = ClassSpec.load(args.cls)
    kw = {"seed": args.seed}
    exp = args.experiment
    if args.samples is not None:
        kw["samples"] = args.samples
    if exp in ("pattern", "skeleton", "giant") and args.n is not None:
        kw["n"] = args.n
    if exp == "consecutive" and args.n is not None:
        kw["ns"] = (args.n_small or args.n // 4, args.n)
    if exp == "giant" and args.n_small:
        kw["n_small"] = args.n_small
    if exp == "skeleton":
        kw["k"] = args.k
        kw["t"] = args.t
    if exp == "gamma":
        kw["size"] = args.size
    report = harness.EXPERIMENTS[exp](spec, **kw)
    print(report.summary())
    harness.write_reports([report], args.out, args.csv)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="permclass",
                                 description="Substitution-closed permutation classes as decorated trees.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("limits", help="criticality and limit parameters as JSON")
    p.add_argument("--class", dest="cls", default="separable")
    p.add_argument("--cutoff", type=int, default=None, help="offspring truncation for infinite families")
    p.add_argument("--radius", action="store_true", help="also estimate rho_P and P(rho_P)")
    p.set_defaults(func=_cmd_limits)

    p = sub.add_parser("sample", help="uniform class permutations, one per line")
    p.add_argument("--class", dest="cls", default="separable")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--method", choices=["exact", "gw", "gw_rejection", "cycle_lemma"], default="gw")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--emit-trees", action="store_true", help="append the packed forest after a tab")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("decompose", help="substitution decomposition of a permutation")
    p.add_argument("perm")
    p.add_argument("--tree", action="store_true", help="also print the canonical tree")
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("pack", help="packed forest of a permutation")
    p.add_argument("perm")
    p.add_argument("--class", dest="cls", default=None, help="check membership in this class")
    p.set_defaults(func=_cmd_pack)

    from .harness import EXPERIMENTS
    p = sub.add_parser("stats", help="run a Monte Carlo experiment")
    p.add_argument("--experiment", choices=sorted(EXPERIMENTS), required=True)
    p.add_argument("--class", dest="cls", default="separable")
    p.add_argument("-n", type=int, default=None)
    p.add_argument("--n-small", type=int, default=None, help="smaller size for two-size comparisons")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("-k", type=int, default=1)
    p.add_argument("-t", type=int, default=0)
    p.add_argument("--size", type=int, default=2, help="pattern size for the gamma experiment")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="JSON report path")
    p.add_argument("--csv", default=None, help="CSV report path")
    p.set_defaults(func=_cmd_stats)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InvalidInputError, ClassMembershipError, CriticalityError, ResourceLimitError,
            RetryLimitError) as e:
        print(f"permclass: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
