"""Sampled ball-carving pipeline for (1-eps)-approximate packing programs.

The preparation step runs prep_copies * ln(nhat) independent exponential-clock
decompositions (rate 1/2) of the constraint hypergraph's Gaifman graph; every
resulting cluster becomes a component that acts fully independently: it
estimates its own weight and the weight of its 8tR-radius region, samples
itself as a carving centre with probability proportional to their ratio, and
carves weighted layers.  Deleted variables are assigned zero, which never
violates a packing constraint; removed balls and the phase-3 clusters each
solve their local restriction exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .classic import exp_clock_labels
from .errors import InvariantViolation, LocaldError
from .graph import DELETED
from .ilp import Assignment, IlpInstance, Sense, feasible, solve_on, weight
from .sim import SimContext, View


@dataclass(frozen=True)
class Component:
    """One cluster of one preparation decomposition, with its weight estimates."""

    key: tuple[int, int]            # (decomposition index, cluster index)
    members: frozenset[int]
    own_weight: int                 # W of the exact local solve on the members
    region_weight: int              # W of the exact local solve on N^{8tR}(members)


@dataclass(frozen=True)
class ComponentEstimates:
    components: tuple[Component, ...]


def _prepare_components(ctx: SimContext, inst: IlpInstance, eps: float, flavor: str,
                        cluster_runs, cache: dict) -> ComponentEstimates:
    """Shared preparation: estimate weights for every cluster of every run.

    ``cluster_runs(k, tag)`` yields the clusters of the k-th decomposition.
    Deleted vertices of those decompositions simply form no component.
    """
    params = ctx.params(eps, flavor)
    region_radius = 8 * params.t * params.R
    dist = ctx.graph.distance_matrix()
    copies = math.ceil(ctx.profile.prep_copies * ctx.ln_nhat)
    cap = ctx.profile.bf_cap
    w = inst.weights
    ctx.set_phase("prep")
    ctx.ledger.charge("prep", region_radius)

    comps = []
    for k in range(copies):
        for ci, members in enumerate(cluster_runs(k, f"prep.{k}")):
            mlist = sorted(members)
            own_sol = solve_on(inst, members, None, cap, cache)
            own = weight(own_sol, members, w)
            region = frozenset((dist[mlist].min(axis=0) <= region_radius).nonzero()[0].tolist())
            region_sol = solve_on(inst, region, None, cap, cache)
            region_w = weight(region_sol, region, w)
            if own > region_w:
                raise InvariantViolation(
                    f"component {(k, ci)}: own weight {own} exceeds region weight {region_w}"
                )
            if region_w == 0 and own != 0:
                raise InvariantViolation(f"component {(k, ci)}: zero region but positive own weight")
            comps.append(Component((k, ci), frozenset(members), own, region_w))
    return ComponentEstimates(tuple(comps))


def pack_prepare(ctx: SimContext, inst: IlpInstance, eps: float, cache: dict | None = None) -> ComponentEstimates:
    """Preparation for packing: components from exponential-clock runs at rate 1/2."""
    if inst.sense != Sense.PACKING:
        raise LocaldError("pack_prepare applies to packing instances only")
    if cache is None:
        cache = {}

    def runs(k, tag):
        labels = exp_clock_labels(ctx, 0.5, tag)
        clusters: dict[int, set[int]] = {}
        for v, lab in labels.items():
            if lab is not DELETED:
                clusters.setdefault(lab, set()).add(v)
        return [clusters[c] for c in sorted(clusters)]

    return _prepare_components(ctx, inst, eps, "packing", runs, cache)


@dataclass(frozen=True)
class PackCarve:
    deleted: frozenset[int]         # the variable layer S_{j*+1}, assigned zero
    removed: frozenset[int]         # the ball N^{j*}(C)
    j_star: int


def grow_and_carve_packing(view: View, interval: tuple[int, int], inst: IlpInstance,
                           solution: Assignment) -> PackCarve:
    """Pick j* on the mod-3 grid of [a, b-1] minimising the local solution's
    weight on the triple S_j | S_{j+1} | S_{j+2}; delete the middle layer of
    the winning triple and remove the ball N^{j*}(C).

    ``solution`` is the exact local optimum on the gathered ground set; its
    weight on the chosen triple is at most a 1/R fraction of its total weight
    (asserted: the candidate triples partition the interval).
    """
    a, b = interval
    if a % 3 != 1 or (b - a + 1) % 3 != 0:
        raise LocaldError(f"packing interval [{a},{b}] is not a length-3k window starting at 1 mod 3")
    if view.radius < b - 1:
        raise LocaldError(f"view radius {view.radius} is smaller than required {b - 1}")
    w = inst.weights
    layer_w = {}
    for v, d in view.dist.items():
        if a <= d <= b and solution[v]:
            layer_w[d] = layer_w.get(d, 0) + w[v]
    candidates = range(a, b - 1, 3)
    triple = {j: layer_w.get(j, 0) + layer_w.get(j + 1, 0) + layer_w.get(j + 2, 0) for j in candidates}
    j_star = min(candidates, key=lambda j: (triple[j], j))
    total = weight(solution, view.vertices, w)
    n_cand = len(triple)
    if triple[j_star] * n_cand > total:
        raise InvariantViolation("grow_and_carve_packing picked a triple above the interval average")
    return PackCarve(deleted=view.layer(j_star + 1), removed=view.ball(j_star), j_star=j_star)


def _pack_iteration(ctx, inst, components, live, deleted, units, interval, tag, prob_factor, cap, cache):
    """One concurrent carving round over the sampled components."""
    snapshot = set(live)
    carves = []
    for comp in sorted(components, key=lambda c: c.key):
        sources = comp.members & snapshot
        if not sources:
            continue
        p = 0.0 if comp.region_weight == 0 else prob_factor * comp.own_weight / comp.region_weight
        if not ctx.bernoulli(f"C{comp.key[0]}.{comp.key[1]}", tag, p):
            continue
        view = ctx.gather_view(sources, interval[1] - 1, live=snapshot)
        sol = solve_on(inst, view.vertices, None, cap, cache)
        carves.append((comp.key, grow_and_carve_packing(view, interval, inst, sol)))

    new_deleted = set()
    for _, cr in carves:
        new_deleted |= cr.deleted
    claimed: set[int] = set()
    for key, cr in carves:
        members = frozenset(cr.removed - new_deleted - claimed)
        claimed |= members
        if members:
            units.append((("ball", key), members))
    deleted |= new_deleted
    return frozenset(snapshot - new_deleted - claimed)


def approx_pack(ctx: SimContext, inst: IlpInstance, eps: float, check: bool = True,
                cache: dict | None = None) -> Assignment:
    """(1-eps)-approximate packing: preparation, t sampled carving iterations,
    one boosted round, an exponential-clock pass on the residual, and exact
    local solves on every final solving unit.  Feasibility is unconditional
    and asserted.

    ``cache`` memoises exact solves by ground set; it may be shared across
    seeds of the same instance.
    """
    if inst.sense != Sense.PACKING:
        raise LocaldError("approx_pack applies to packing instances only")
    if not 0 < eps < 1:
        raise LocaldError(f"eps must lie in (0,1), got {eps}")
    if ctx.graph.n != inst.var_count:
        raise LocaldError("context topology does not match the instance's variable count")

    if cache is None:
        cache = {}
    cap = ctx.profile.bf_cap
    est = pack_prepare(ctx, inst, eps, cache)
    params = ctx.params(eps, "packing")
    ivals = ctx.intervals(eps, "packing")

    live = frozenset(range(inst.var_count))
    deleted: set[int] = set()
    units: list[tuple[tuple, frozenset[int]]] = []

    for i in range(1, params.t + 1):
        tag = f"pack1.{i}"
        ctx.set_phase(tag)
        live = _pack_iteration(ctx, inst, est.components, live, deleted, units,
                               ivals[i - 1], tag, float(2**i), cap, cache)
    ctx.set_phase("pack2")
    boost = (2 ** (params.t + 1)) * math.log(20.0 / eps)
    live = _pack_iteration(ctx, inst, est.components, live, deleted, units,
                           ivals[params.t], "pack2", boost, cap, cache)

    ctx.set_phase("pack3")
    lam = eps / ctx.profile.phase3_lambda_divisor
    labels3 = exp_clock_labels(ctx, lam, "pack3", live=live)
    clusters3: dict[int, set[int]] = {}
    for v, lab in labels3.items():
        if lab is DELETED:
            deleted.add(v)
        else:
            clusters3.setdefault(lab, set()).add(v)
    for c in sorted(clusters3):
        units.append((("p3", c), frozenset(clusters3[c])))

    out = [0] * inst.var_count
    for _, members in units:
        sol = solve_on(inst, members, None, cap, cache)
        for v in members:
            out[v] = sol[v]
    out_t = tuple(out)

    if check:
        _check_pack(ctx, inst, units, deleted, out_t)
    return out_t


def _check_pack(ctx, inst, units, deleted, out) -> None:
    label: dict[int, tuple] = {}
    for key, members in units:
        for v in members:
            label[v] = key
    seen = set(deleted)
    for key, members in units:
        overlap = seen & members
        if overlap:
            raise InvariantViolation(f"packing unit {key} overlaps earlier assignment at {sorted(overlap)[:5]}")
        seen |= members
    if len(seen) != inst.var_count:
        raise InvariantViolation("packing units plus deletions do not partition the variables")
    for u, v in ctx.graph.edges():
        lu, lv = label.get(u), label.get(v)
        if lu is not None and lv is not None and lu != lv:
            raise InvariantViolation(f"packing units {lu} and {lv} are adjacent in the Gaifman graph")
    bad = feasible(inst, out)
    if bad:
        raise InvariantViolation(f"approx_pack output violates constraints {[j for j, _ in bad]} (seed={ctx.seed})")
