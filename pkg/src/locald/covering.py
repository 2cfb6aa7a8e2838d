"""Sampled hyperedge-deleting pipeline for (1+eps)-approximate covering programs.

Covering cannot tolerate deleted variables (a zero on an unclustered variable
may break a constraint), so the carving deletes satisfied hyperedges instead:
per carve, the exact local solution is fixed permanently to one on the two
chosen layers, and every hyperedge spanning those layers -- now satisfied by
the fixed ones -- is deleted, splitting the hypergraph into non-adjacent
parts.  Removed balls solve their surviving internal hyperedges in isolation;
the sparsified residual is finished off with a sparse cover plus bitwise-OR
local solves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .classic import _solve_live, cover_and_solve, sparse_cover
from .errors import InfeasibleError, InvariantViolation, LocaldError
from .ilp import Assignment, FixedState, IlpInstance, Sense, feasible, weight
from .packing import ComponentEstimates, _prepare_components
from .sim import SimContext, View


def cover_prepare(ctx: SimContext, inst: IlpInstance, eps: float, cache: dict | None = None) -> ComponentEstimates:
    """Preparation for covering: components are the clusters of prep_copies *
    ln(nhat) independent sparse covers at rate ln(21/20) (geometric parameter
    20/21)."""
    if inst.sense != Sense.COVERING:
        raise LocaldError("cover_prepare applies to covering instances only")
    if cache is None:
        cache = {}
    lam = math.log(21.0 / 20.0)

    def runs(k, tag):
        cover = sparse_cover(ctx, lam, tag)
        return [set(c) for c in cover.clusters]

    return _prepare_components(ctx, inst, eps, "covering", runs, cache)


@dataclass(frozen=True)
class CoverCarveResult:
    fixed_ones: frozenset[int]          # variables the local solution sets to 1 on the pair
    deleted_hyperedges: frozenset[int]  # constraint ids spanning both chosen layers
    removed: frozenset[int]             # the ball N^{j*}(C)
    j_star: int                         # odd


def grow_and_carve_covering(view: View, interval: tuple[int, int], inst: IlpInstance,
                            solution: Assignment, live_constraints) -> CoverCarveResult:
    """Choose the odd j* in [a, b] minimising the local solution's weight on
    S_{j*} | S_{j*+1}; permanently fix that solution's ones on the pair and
    delete every live hyperedge whose support meets both layers.

    A hyperedge is a clique of the Gaifman graph, so it spans at most two
    consecutive BFS layers; a deleted hyperedge therefore lies inside the pair
    and is satisfied by the fixed ones.  The chosen pair's weight is at most a
    1/R fraction of the solution's total weight (the R odd pairs partition the
    interval; asserted).
    """
    a, b = interval
    if a % 2 != 1 or (b - a + 1) % 2 != 0:
        raise LocaldError(f"covering interval [{a},{b}] must start odd with even length")
    if view.radius < b:
        raise LocaldError(f"view radius {view.radius} is smaller than interval end {b}")
    w = inst.weights
    layer_w: dict[int, int] = {}
    for v, d in view.dist.items():
        if a <= d <= b and solution[v]:
            layer_w[d] = layer_w.get(d, 0) + w[v]
    candidates = range(a, b, 2)
    pair = {j: layer_w.get(j, 0) + layer_w.get(j + 1, 0) for j in candidates}
    j_star = min(candidates, key=lambda j: (pair[j], j))
    total = weight(solution, view.vertices, w)
    if pair[j_star] * len(pair) > total:
        raise InvariantViolation("grow_and_carve_covering picked a pair above the interval average")

    lo = view.layer(j_star)
    hi = view.layer(j_star + 1)
    fixed_ones = frozenset(v for v in lo | hi if solution[v])
    dropped = []
    for j in live_constraints:
        support = inst.constraints[j].support
        if any(v in lo for v in support) and any(v in hi for v in support):
            dropped.append(j)
    return CoverCarveResult(
        fixed_ones=fixed_ones,
        deleted_hyperedges=frozenset(dropped),
        removed=view.ball(j_star),
        j_star=j_star,
    )


def _assert_deleted_satisfied(inst, dropped, fixed: FixedState, seed) -> None:
    ones = set(fixed.ones())
    for j in dropped:
        c = inst.constraints[j]
        lhs = sum(a for v, a in zip(c.support, c.coeffs) if v in ones)
        if lhs < c.bound:
            raise InvariantViolation(f"deleted hyperedge {j} is not satisfied by the fixed ones (seed={seed})")


def approx_cover(ctx: SimContext, inst: IlpInstance, eps: float, check: bool = True,
                 cache: dict | None = None) -> Assignment:
    """(1+eps)-approximate covering: preparation, t sampled carving iterations
    on the live hypergraph, exact solves on the isolated removed units, and a
    sparse-cover solve of the residual at rate ln((eps+5)/5).  Feasibility of
    the full original instance is asserted.

    ``cache`` memoises exact solves; entries are keyed by ground set, live
    constraints and fixed statuses, so it may be shared across seeds.
    """
    if inst.sense != Sense.COVERING:
        raise LocaldError("approx_cover applies to covering instances only")
    if not 0 < eps < 1:
        raise LocaldError(f"eps must lie in (0,1), got {eps}")
    if ctx.graph.n != inst.var_count:
        raise LocaldError("context topology does not match the instance's variable count")
    if feasible(inst, (1,) * inst.var_count):
        raise InfeasibleError("the all-ones assignment violates a constraint: instance is infeasible")

    if cache is None:
        cache = {}
    cap = ctx.profile.bf_cap
    est = cover_prepare(ctx, inst, eps, cache)
    params = ctx.params(eps, "covering")
    ivals = ctx.intervals(eps, "covering")

    live_v = frozenset(range(inst.var_count))
    live_c = set(range(len(inst.constraints)))
    fixed = FixedState.all_free(inst.var_count)
    units: list[tuple[tuple, frozenset[int]]] = []
    unit_edges: dict[tuple, list[int]] = {}

    for i in range(1, params.t + 1):
        tag = f"cover1.{i}"
        ctx.set_phase(tag)
        live_v = _cover_iteration(ctx, inst, est.components, live_v, live_c, fixed,
                                  units, unit_edges, ivals[i - 1], tag, float(2**i), cap, cache, check)

    # completing the picture: isolated units, then the residual hypergraph
    ctx.set_phase("cover2")
    out = [0] * inst.var_count
    for key, members in units:
        sol = _solve_live(inst, members, unit_edges[key], fixed, cap, cache)
        for v in members:
            if sol[v]:
                out[v] = 1
    if live_c:
        lam = math.log((eps + 5.0) / 5.0)
        cover = sparse_cover(
            ctx, lam, tag="cover2", live=live_v,
            hyperedges=[inst.constraints[j].support for j in sorted(live_c)],
            check=check,
        )
        _charge_cover_gather(ctx, cover)
        residual = cover_and_solve(ctx, inst, cover, fixed, live_constraints=live_c, cap=cap, cache=cache)
        for v, bit in enumerate(residual):
            if bit:
                out[v] = 1
    for v in fixed.ones():
        out[v] = 1
    out_t = tuple(out)

    if check:
        bad = feasible(inst, out_t)
        if bad:
            raise InvariantViolation(
                f"approx_cover output violates constraints {[j for j, _ in bad]} (seed={ctx.seed})"
            )
    return out_t


def _cover_iteration(ctx, inst, components, live_v, live_c, fixed, units, unit_edges,
                     interval, tag, prob_factor, cap, cache, check):
    """One concurrent covering carve round against the current snapshots."""
    snapshot_v = set(live_v)
    snapshot_c = set(live_c)
    snapshot_fixed = fixed.copy()

    carves = []
    for comp in sorted(components, key=lambda c: c.key):
        sources = comp.members & snapshot_v
        if not sources:
            continue
        p = 0.0 if comp.region_weight == 0 else prob_factor * comp.own_weight / comp.region_weight
        if not ctx.bernoulli(f"C{comp.key[0]}.{comp.key[1]}", tag, p):
            continue
        view = ctx.gather_view(sources, interval[1], live=snapshot_v)
        sol = _solve_live(inst, view.vertices, snapshot_c, snapshot_fixed, cap, cache)
        carves.append((comp.key, grow_and_carve_covering(view, interval, inst, sol, snapshot_c)))

    dropped = set()
    for key, cr in carves:
        for v in cr.fixed_ones:
            fixed.fix_one(v)
        dropped |= cr.deleted_hyperedges
    if check:
        _assert_deleted_satisfied(inst, dropped, fixed, ctx.seed)
    live_c -= dropped

    claimed: set[int] = set()
    for key, cr in carves:
        members = frozenset(cr.removed - claimed)
        claimed |= members
        if members:
            units.append((("ball", key), members))
            unit_edges[("ball", key)] = []
    next_live = frozenset(snapshot_v - claimed)

    # constraints whose support left the live vertex set belong to exactly one
    # unit; anything straddling a unit boundary must already have been deleted
    claimed_unit = {}
    for key, members in units:
        for v in members:
            claimed_unit.setdefault(v, key)
    for j in sorted(live_c):
        support = inst.constraints[j].support
        if all(v in next_live for v in support):
            continue
        owners = {claimed_unit.get(v) for v in support}
        if len(owners) != 1 or None in owners:
            raise InvariantViolation(
                f"constraint {j} straddles a carve boundary without being deleted (seed={ctx.seed})"
            )
        live_c.discard(j)
        unit_edges[owners.pop()].append(j)
    return next_live


def _charge_cover_gather(ctx, cover) -> None:
    # solving a cluster locally costs a gather of its weak diameter
    dist = ctx.graph.distance_matrix()
    worst = 0
    for cluster in cover.clusters:
        members = sorted(cluster)
        if len(members) > 1:
            worst = max(worst, int(dist[members][:, members].max()))
    ctx.ledger.charge(ctx.current_phase, worst)
