"""Command-line entry point.

    locald ldd --algo {expclock,mpx,whp} (--graph FILE | --family SPEC) ...
    locald pack --ilp FILE.json --eps E ...
    locald cover --ilp FILE.json --eps E ...
    locald adversarial {clique,mpx} --size K --eps E --trials T
    locald verify --suite {observations,tails,claims}

Reports are JSON (schema-validated) with an optional per-trial CSV.  The exit
code is nonzero on any invariant violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

from . import harness
from .errors import LocaldError
from .graph import generate, parse_graph
from .ilp import instance_from_json
from .sim import profile_from_name


def _seed_default() -> int:
    return int(os.environ.get("LOCALD_SEED", "0"))


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="base seed (default: $LOCALD_SEED or 0)")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--profile", choices=["paper", "desk"], default="desk")
    p.add_argument("--profile-json", default=None, help="JSON file with constant-profile field overrides")
    p.add_argument("--nhat", type=int, default=None, help="advertised vertex-count upper bound")
    p.add_argument("--out", default=None, help="write the JSON report here (default: stdout)")
    p.add_argument("--csv", default=None, help="also write per-trial rows as CSV")


def _profile_name(args) -> str:
    # overrides are applied by registering a one-off named profile
    if args.profile_json:
        with open(args.profile_json) as fh:
            overrides = json.load(fh)
        prof = profile_from_name(args.profile, overrides)
        from . import sim

        name = f"{args.profile}+overrides"
        sim.PROFILES[name] = prof
        return name
    return args.profile


def _load_graph(args):
    if args.graph:
        with open(args.graph) as fh:
            return parse_graph(fh.read()), f"file:{args.graph}"
    seed = args.seed if args.seed is not None else _seed_default()
    return generate(args.family, seed=seed), args.family


def _emit(report: harness.TrialReport, args) -> None:
    text = report.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.csv:
        report.write_csv(args.csv)


def _cmd_ldd(args) -> int:
    G, family = _load_graph(args)
    if args.algo in ("expclock", "mpx") and args.lam is None:
        raise LocaldError(f"--algo {args.algo} requires --lambda")
    if args.algo == "whp" and args.eps is None:
        raise LocaldError("--algo whp requires --eps")
    spec = harness.ExperimentSpec(
        algorithm=args.algo,
        graph=G,
        family=family,
        eps=args.eps,
        lam=args.lam,
        n_tilde=args.nhat or G.n,
        profile=_profile_name(args),
        seed=args.seed if args.seed is not None else _seed_default(),
        trials=args.trials,
    )
    _emit(harness.run_trials(spec), args)
    return 0


def _cmd_ilp(args, algorithm: str) -> int:
    with open(args.ilp) as fh:
        inst = instance_from_json(fh.read())
    spec = harness.ExperimentSpec(
        algorithm=algorithm,
        ilp=inst,
        family=f"file:{args.ilp}",
        eps=args.eps,
        n_tilde=args.nhat or inst.var_count,
        profile=_profile_name(args),
        seed=args.seed if args.seed is not None else _seed_default(),
        trials=args.trials,
    )
    _emit(harness.run_trials(spec), args)
    return 0


def _cmd_adversarial(args) -> int:
    seed = args.seed if args.seed is not None else _seed_default()
    if args.family == "clique":
        rep = harness.claim_clique(args.size, args.eps, args.trials, seed)
    else:
        rep = harness.claim_mpx(args.size, args.eps, args.trials, seed)
    print(json.dumps(asdict(rep), sort_keys=True, indent=1))
    return 0


def _cmd_verify(args) -> int:
    seed = args.seed if args.seed is not None else _seed_default()
    suites = {
        "observations": lambda: harness.observations_suite(seed=seed),
        "tails": lambda: harness.tails_suite(seed=seed),
        "claims": lambda: harness.claims_suite(seed=seed),
    }
    results = suites[args.suite]()
    worst = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        if not ok:
            worst = 1
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="locald", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ldd", help="run a decomposition algorithm over seeded trials")
    p.add_argument("--algo", choices=["expclock", "mpx", "whp"], required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help="graph file ('n m' header plus edge lines)")
    src.add_argument("--family", help="family spec, e.g. cycle(200) or gnp(500,0.006)")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_ldd)

    for name, algo in (("pack", "pack"), ("cover", "cover")):
        p = sub.add_parser(name, help=f"approximate a {algo}ing ILP over seeded trials")
        p.add_argument("--ilp", required=True, help="ILP JSON file")
        p.add_argument("--eps", type=float, required=True)
        _add_common(p)
        p.set_defaults(func=lambda a, algo=algo: _cmd_ilp(a, algo))

    p = sub.add_parser("adversarial", help="reproduce an adversarial-family claim")
    p.add_argument("family", choices=["clique", "mpx"])
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_adversarial)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=["observations", "tails", "claims"], required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LocaldError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
