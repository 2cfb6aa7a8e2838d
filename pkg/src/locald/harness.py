"""Monte Carlo experiment runner, adversarial-claim reproductions, and
concentration-tail checks.

Every experiment is exactly reproducible from (spec, seed): trial k runs with
seed spec.seed + k, within-trial execution is deterministic, and any invariant
violation aborts with the offending seed.  Statistical acceptance uses
one-sided tests at 3 sigma against analytic bounds; bounds, not exact values,
are what the guarantees provide, so only bound-direction failures are errors.
"""

from __future__ import annotations

import csv
import json
import math
import random
from dataclasses import dataclass, field

import numpy as np
from jsonschema import validate as _validate_schema

from .classic import exp_clock_ldd, mpx_cluster, sparse_cover
from .covering import approx_cover
from .errors import InvariantViolation, LocaldError
from .graph import (
    Graph,
    Hypergraph,
    clique,
    gaifman_graph,
    mpx_adversarial,
    mpx_adversarial_parts,
    validate_decomposition,
)
from .ilp import (
    IlpInstance,
    Sense,
    associated_hypergraph,
    make_instance,
    solve_on,
    weight,
)
from .packing import approx_pack
from .sim import make_context
from .whp import whp_ldd

REPORT_SCHEMA = {
    "type": "object",
    "required": ["config", "records", "aggregates"],
    "properties": {
        "config": {
            "type": "object",
            "required": ["algorithm", "seed", "trials", "profile"],
            "properties": {
                "algorithm": {"type": "string"},
                "seed": {"type": "integer"},
                "trials": {"type": "integer", "minimum": 1},
                "profile": {"type": "string"},
            },
        },
        "records": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["trial", "seed", "metrics"],
                "properties": {
                    "trial": {"type": "integer"},
                    "seed": {"type": "integer"},
                    "metrics": {"type": "object"},
                },
            },
        },
        "aggregates": {"type": "object"},
    },
}


@dataclass(frozen=True)
class ExperimentSpec:
    """What to run: an algorithm, its topology or instance, and parameters."""

    algorithm: str                     # expclock | mpx | sparsecover | whp | pack | cover
    graph: Graph | None = None
    hypergraph: Hypergraph | None = None
    ilp: IlpInstance | None = None
    family: str | None = None          # echo of the family spec, for the report
    eps: float | None = None
    lam: float | None = None
    n_tilde: int | None = None
    profile: str = "desk"
    seed: int = 0
    trials: int = 1


@dataclass
class TrialReport:
    config: dict
    records: list[dict]
    aggregates: dict = field(default_factory=dict)

    def finalize(self) -> "TrialReport":
        metrics: dict[str, list[float]] = {}
        for rec in self.records:
            for k, v in rec["metrics"].items():
                metrics.setdefault(k, []).append(float(v))
        agg = {}
        for k, xs in sorted(metrics.items()):
            arr = np.asarray(xs)
            agg[k] = {
                "mean": float(arr.mean()),
                "q05": float(np.quantile(arr, 0.05)),
                "q50": float(np.quantile(arr, 0.50)),
                "q95": float(np.quantile(arr, 0.95)),
                "ci95": ci_halfwidth(arr),
            }
        self.aggregates.update(agg)
        return self

    def to_dict(self) -> dict:
        return {"config": self.config, "records": self.records, "aggregates": self.aggregates}

    def to_json(self) -> str:
        doc = self.to_dict()
        _validate_schema(doc, REPORT_SCHEMA)
        return json.dumps(doc, sort_keys=True, indent=1)

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["trial", "seed", "metric", "value"])
            for rec in self.records:
                for k in sorted(rec["metrics"]):
                    out.writerow([rec["trial"], rec["seed"], k, rec["metrics"][k]])


def ci_halfwidth(xs) -> float:
    """95% normal-approximation half-width of the mean estimate."""
    arr = np.asarray(xs, dtype=float)
    if arr.size < 2:
        return 0.0
    return float(1.96 * arr.std(ddof=1) / math.sqrt(arr.size))


def binomial_sigma(p_hat: float, trials: int) -> float:
    return math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / trials)


def run_trials(spec: ExperimentSpec) -> TrialReport:
    """Execute independent seeded trials, validating every run's definitional
    invariants, and aggregate the per-trial metrics."""
    if spec.trials < 1:
        raise LocaldError("trials must be >= 1")
    runner = _RUNNERS.get(spec.algorithm)
    if runner is None:
        raise LocaldError(f"unknown algorithm {spec.algorithm!r}; expected one of {sorted(_RUNNERS)}")

    config = {
        "algorithm": spec.algorithm,
        "family": spec.family,
        "eps": spec.eps,
        "lambda": spec.lam,
        "n_tilde": spec.n_tilde,
        "profile": spec.profile,
        "seed": spec.seed,
        "trials": spec.trials,
    }
    report = TrialReport(config=config, records=[])
    extras: dict = {}
    shared: dict = {}
    for k in range(spec.trials):
        trial_seed = spec.seed + k
        try:
            metrics = runner(spec, trial_seed, extras, shared)
        except InvariantViolation as exc:
            raise InvariantViolation(f"trial {k} (seed {trial_seed}): {exc}") from exc
        report.records.append({"trial": k, "seed": trial_seed, "metrics": metrics})
    report.finalize()
    for key, counts in extras.items():
        report.aggregates[key] = [c / spec.trials for c in counts]
    return report


def _need(spec, attr):
    val = getattr(spec, attr)
    if val is None:
        raise LocaldError(f"algorithm {spec.algorithm!r} requires {attr}")
    return val


def _graph_of(spec) -> Graph:
    if spec.graph is not None:
        return spec.graph
    raise LocaldError(f"algorithm {spec.algorithm!r} requires a graph")


def _run_expclock(spec, seed, extras, shared):
    G = _graph_of(spec)
    lam = _need(spec, "lam")
    ctx = make_context(G, spec.n_tilde or G.n, seed, spec.profile)
    D = exp_clock_ldd(ctx, lam, check=False)
    bound = 8.0 * ctx.ln_nhat / lam
    rep = validate_decomposition(G, D, eps=1.0, d=bound)
    if not rep.non_adjacent_ok:
        raise InvariantViolation("exp_clock_ldd produced adjacent clusters")
    if rep.max_strong_diameter > bound:
        raise InvariantViolation(f"strong diameter {rep.max_strong_diameter} above {bound}")
    counts = extras.setdefault("vertex_deletion_freq", [0] * G.n)
    for v in D.deleted():
        counts[v] += 1
    return {
        "deleted_fraction": rep.deleted_fraction,
        "max_weak_diameter": rep.max_weak_diameter,
        "max_strong_diameter": rep.max_strong_diameter,
        "cluster_count": D.cluster_count,
        "rounds": ctx.ledger.total_rounds,
    }


def _run_mpx(spec, seed, extras, shared):
    G = _graph_of(spec)
    lam = _need(spec, "lam")
    ctx = make_context(G, spec.n_tilde or G.n, seed, spec.profile)
    res = mpx_cluster(ctx, lam, check=True)
    cut_fraction = len(res.cut_edges) / G.m if G.m else 0.0
    return {"cut_fraction": cut_fraction, "rounds": ctx.ledger.total_rounds}


def _run_sparsecover(spec, seed, extras, shared):
    H = spec.hypergraph
    if H is None:
        raise LocaldError("sparsecover requires a hypergraph")
    lam = _need(spec, "lam")
    ctx = make_context(H, spec.n_tilde or H.n, seed, spec.profile)
    cover = sparse_cover(ctx, lam, check=True)
    mult = np.array(cover.multiplicities(range(H.n)))
    counts = extras.setdefault("multiplicity_ge_k", [0] * 5)
    for k in range(len(counts)):
        counts[k] += float((mult >= k).mean())
    return {
        "mean_multiplicity": float(mult.mean()),
        "max_multiplicity": int(mult.max()),
        "cluster_count": len(cover.clusters),
        "rounds": ctx.ledger.total_rounds,
    }


def _run_whp(spec, seed, extras, shared):
    G = _graph_of(spec)
    eps = _need(spec, "eps")
    ctx = make_context(G, spec.n_tilde or G.n, seed, spec.profile)
    D = whp_ldd(ctx, eps, check=True)
    params = ctx.params(eps, "ldd")
    deleted = len(D.deleted())
    return {
        "deleted_fraction": deleted / G.n,
        "within_budget": 1.0 if deleted <= eps * G.n else 0.0,
        "cluster_count": D.cluster_count,
        "rounds": ctx.ledger.total_rounds,
        "t": params.t,
        "R": params.R,
    }


def _run_pack(spec, seed, extras, shared):
    inst = _need(spec, "ilp")
    ctx = make_context(associated_hypergraph(inst), spec.n_tilde or inst.var_count, seed, spec.profile)
    cache = shared.setdefault("solve_cache", {})
    out = approx_pack(ctx, inst, _need(spec, "eps"), check=True, cache=cache)
    return {
        "weight": weight(out, range(inst.var_count), inst.weights),
        "rounds": ctx.ledger.total_rounds,
    }


def _run_cover(spec, seed, extras, shared):
    inst = _need(spec, "ilp")
    ctx = make_context(associated_hypergraph(inst), spec.n_tilde or inst.var_count, seed, spec.profile)
    cache = shared.setdefault("solve_cache", {})
    out = approx_cover(ctx, inst, _need(spec, "eps"), check=True, cache=cache)
    return {
        "weight": weight(out, range(inst.var_count), inst.weights),
        "rounds": ctx.ledger.total_rounds,
    }


_RUNNERS = {
    "expclock": _run_expclock,
    "mpx": _run_mpx,
    "sparsecover": _run_sparsecover,
    "whp": _run_whp,
    "pack": _run_pack,
    "cover": _run_cover,
}


# -- adversarial-claim reproductions -------------------------------------------


@dataclass(frozen=True)
class ClaimReport:
    estimate: float
    ci95: float
    analytic_bound: float
    trials: int

    @property
    def sigma(self) -> float:
        return self.ci95 / 1.96 if self.ci95 else 0.0


def claim_clique(n: int, eps: float, trials: int, seed: int = 0) -> ClaimReport:
    """Frequency of runs of the vertex LDD on K_n (rate eps) that delete at
    least n-1 vertices.  Whenever the top two clocks differ by at most 1,
    every non-top vertex sees a runner-up within 1 of its best, so the whole
    clique but one vertex is deleted; that event has probability 1 - e^{-eps}.
    """
    if n < 3:
        raise LocaldError("claim_clique needs n >= 3")
    G = clique(n)
    hits = 0
    for k in range(trials):
        ctx = make_context(G, n, seed + k, "desk")
        D = exp_clock_ldd(ctx, eps, check=False)
        if len(D.deleted()) >= n - 1:
            hits += 1
    p_hat = hits / trials
    return ClaimReport(
        estimate=p_hat,
        ci95=1.96 * binomial_sigma(p_hat, trials),
        analytic_bound=1.0 - math.exp(-eps),
        trials=trials,
    )


@dataclass(frozen=True)
class MpxClaimReport:
    event_freq: float
    event_ci95: float
    cut_freq: float
    cut_ci95: float
    event_bound: float
    event_bound_exact: float
    cut_threshold: float
    trials: int


def claim_mpx(t: int, eps: float, trials: int, seed: int = 0) -> MpxClaimReport:
    """Frequency of the witnessing event {w1 in S_L, w2 in S_R,
    T_{w2} > T_{w3} + 2, T_{w1} < T_{w2} + 1} over the top-three clocks, and of
    cut fractions >= t^2/(t^2+4t), for the MPX partition of the adversarial
    family at rate eps.  The event forces the whole complete-bipartite core to
    be cut, which is asserted per trial.

    event_bound multiplies the factors (t/(4t+2)) (t/(4t+1)) e^{-2 eps}
    (1 - e^{-eps}).  The exact event probability replaces e^{-2 eps} by
    e^{-4 eps}: the gap between the second and third largest of i.i.d.
    exponentials is the minimum of two excesses, i.e. Exp(2 eps), so
    P[gap > 2] = e^{-4 eps}.  event_bound_exact records that value.
    """
    if t < 2:
        raise LocaldError("claim_mpx needs t >= 2")
    G = mpx_adversarial(t)
    parts = mpx_adversarial_parts(t)
    m = G.m
    cut_threshold = t * t / (t * t + 4 * t)
    events = 0
    heavy_cuts = 0
    for k in range(trials):
        ctx = make_context(G, G.n, seed + k, "desk")
        res = mpx_cluster(ctx, eps, check=False)
        order = sorted(res.clocks, key=lambda v: (-res.clocks[v], v))
        w1, w2, w3 = order[0], order[1], order[2]
        event = (
            w1 in parts.s_left
            and w2 in parts.s_right
            and res.clocks[w2] > res.clocks[w3] + 2
            and res.clocks[w1] < res.clocks[w2] + 1
        )
        cut_fraction = len(res.cut_edges) / m
        heavy = cut_fraction >= cut_threshold
        if event and not heavy:
            raise InvariantViolation(f"witnessing event without a heavy cut at seed {seed + k}")
        events += event
        heavy_cuts += heavy
    rank_factor = (t / (4 * t + 2)) * (t / (4 * t + 1))
    e_hat = events / trials
    c_hat = heavy_cuts / trials
    return MpxClaimReport(
        event_freq=e_hat,
        event_ci95=1.96 * binomial_sigma(e_hat, trials),
        cut_freq=c_hat,
        cut_ci95=1.96 * binomial_sigma(c_hat, trials),
        event_bound=rank_factor * math.exp(-2 * eps) * (1 - math.exp(-eps)),
        event_bound_exact=rank_factor * math.exp(-4 * eps) * (1 - math.exp(-eps)),
        cut_threshold=cut_threshold,
        trials=trials,
    )


# -- tail-bound checks ----------------------------------------------------------


@dataclass(frozen=True)
class TailCheckReport:
    empirical_tail: float
    analytic_bound: float
    threshold: float
    sigma3: float
    trials: int

    @property
    def ok(self) -> bool:
        return self.empirical_tail <= self.analytic_bound + self.sigma3


def tail_check(dist: str, params: dict, trials: int, seed: int = 0) -> TailCheckReport:
    """Sample a sum, estimate the tail at the analytic threshold, and compare
    against the bound plus three sigma.

    bernoulli-sum: X = sum of n Bernoulli(p); for delta >= 0,
        P[X > (1+delta) mu] <= exp(-delta^2 mu / (2+delta)).
    geometric-sum: X = sum of n geometric(p) (support 1, 2, ...); for
        delta > 1/p - 1, P[X > mu + delta n] <= exp(-p^2 delta n / 6).
    """
    n, p, delta = int(params["n"]), float(params["p"]), float(params["delta"])
    if not 0 < p <= 1:
        raise LocaldError(f"p must lie in (0,1], got {p}")
    rng = np.random.default_rng(seed)
    if dist == "bernoulli-sum":
        if delta < 0:
            raise LocaldError("bernoulli-sum needs delta >= 0")
        mu = n * p
        threshold = (1.0 + delta) * mu
        samples = rng.binomial(n, p, size=trials)
        bound = math.exp(-delta * delta * mu / (2.0 + delta))
    elif dist == "geometric-sum":
        if delta <= 1.0 / p - 1.0:
            raise LocaldError(f"geometric-sum needs delta > 1/p - 1 = {1.0 / p - 1.0}, got {delta}")
        mu = n / p
        threshold = mu + delta * n
        samples = rng.negative_binomial(n, p, size=trials) + n
        bound = math.exp(-p * p * delta * n / 6.0)
    else:
        raise LocaldError(f"unknown tail distribution {dist!r}")
    tail = float((samples > threshold).mean())
    sigma = math.sqrt(max(bound * (1.0 - bound), 1.0 / trials) / trials)
    return TailCheckReport(
        empirical_tail=tail,
        analytic_bound=bound,
        threshold=threshold,
        sigma3=3.0 * sigma,
        trials=trials,
    )


# -- random benchmark inputs -----------------------------------------------------


def random_hypergraph(n: int, m: int, k: int, seed: int) -> Hypergraph:
    """m distinct k-uniform hyperedges on n vertices."""
    rng = random.Random(seed)
    seen: set[frozenset] = set()
    edges = []
    while len(edges) < m:
        e = frozenset(rng.sample(range(n), k))
        if e not in seen:
            seen.add(e)
            edges.append(e)
    return Hypergraph(n, edges)


def random_instance(sense, n: int, m: int, seed: int, max_weight: int = 5) -> IlpInstance:
    """A random small ILP; covering bounds keep the all-ones assignment feasible."""
    sense = Sense(sense) if not isinstance(sense, Sense) else sense
    rng = random.Random(seed)
    weights = [rng.randint(1, max_weight) for _ in range(n)]
    rows = []
    for _ in range(m):
        size = rng.randint(2, min(4, n))
        support = tuple(sorted(rng.sample(range(n), size)))
        coeffs = tuple(rng.randint(1, 3) for _ in support)
        total = sum(coeffs)
        if sense == Sense.PACKING:
            bound = rng.randint(max(coeffs), max(max(coeffs), total - 1))
        else:
            bound = rng.randint(1, total)
        rows.append((support, coeffs, bound))
    return make_instance(sense, n, weights, rows)


# -- verification suites -----------------------------------------------------------


def observations_suite(instances: int = 40, max_vars: int = 10, subsets_per_instance: int = 30,
                       seed: int = 0, cap: int = 24) -> list[tuple[str, bool, str]]:
    """Exact local-vs-global inequality chains on a random corpus.

    packing: W(P*, S) <= W(P_S^local, S) <= W(P*, N^1(S));
    covering: W(Q_S^local, S) <= W(Q*, S) <= W(Q*, V).
    Both must hold with zero violations.
    """
    rng = random.Random(seed)
    failures = []
    checked = 0
    for i in range(instances):
        sense = Sense.PACKING if i % 2 == 0 else Sense.COVERING
        n = rng.randint(4, max_vars)
        inst = random_instance(sense, n, rng.randint(2, 2 * n), seed=seed * 7919 + i)
        gaif = gaifman_graph(associated_hypergraph(inst))
        star = solve_on(inst, range(n), cap=cap)
        w = inst.weights
        for _ in range(subsets_per_instance):
            size = rng.randint(1, min(6, n))
            S = frozenset(rng.sample(range(n), size))
            local = solve_on(inst, S, cap=cap)
            checked += 1
            if sense == Sense.PACKING:
                n1 = set(S)
                for v in S:
                    n1.update(gaif.adjacency[v])
                lo, mid, hi = weight(star, S, w), weight(local, S, w), weight(star, n1, w)
                if not lo <= mid <= hi:
                    failures.append(f"packing instance {i} S={sorted(S)}: {lo},{mid},{hi}")
            else:
                lo, mid, hi = (
                    weight(local, S, w),
                    weight(star, S, w),
                    weight(star, range(n), w),
                )
                if not lo <= mid <= hi:
                    failures.append(f"covering instance {i} S={sorted(S)}: {lo},{mid},{hi}")
    ok = not failures
    detail = f"{checked} subset checks, {len(failures)} violations"
    if failures:
        detail += "; first: " + failures[0]
    return [("local-vs-global inequality chains", ok, detail)]


def tails_suite(trials: int = 100_000, seed: int = 0) -> list[tuple[str, bool, str]]:
    out = []
    r = tail_check("bernoulli-sum", {"n": 1000, "p": 0.5, "delta": 0.2}, trials, seed)
    out.append(("bernoulli-sum tail", r.ok, f"empirical {r.empirical_tail:.2e} vs bound {r.analytic_bound:.2e}"))
    r = tail_check("geometric-sum", {"n": 100, "p": 0.5, "delta": 1.5}, trials, seed)
    out.append(("geometric-sum tail", r.ok, f"empirical {r.empirical_tail:.2e} vs bound {r.analytic_bound:.2e}"))
    return out


def claims_suite(trials: int = 600, seed: int = 0) -> list[tuple[str, bool, str]]:
    out = []
    r = claim_clique(30, 0.3, trials, seed)
    thr = r.analytic_bound - 3 * r.sigma
    out.append(("clique mass-deletion claim", r.estimate >= thr, f"estimate {r.estimate:.3f} vs {thr:.3f}"))
    r = claim_mpx(8, 0.3, trials, seed)
    ok = r.cut_freq >= r.event_freq - (r.event_ci95 + r.cut_ci95)
    out.append(("adversarial edge-cut claim", ok, f"event {r.event_freq:.4f}, heavy-cut {r.cut_freq:.4f}"))
    return out
