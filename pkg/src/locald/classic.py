"""Exponential-clock clustering: vertex LDD, MPX edge-cut partition, hypergraph
sparse cover, and the simple covering solver over a sparse cover.

All three clock algorithms share the same machinery: every vertex u draws
T_u ~ Exp(lambda) (inverse CDF on a 64-bit uniform from its stream), resets
T_u = 0 when T_u >= 4 ln(nhat)/lambda, and exposes shifted values
m^(v)_u = T_u - dist(v, u) to nearby vertices.  Ties in m-values break by
smaller vertex id, identically everywhere; a runner-up tie at exactly
m1 - 1 counts as deletion.

Visibility: a vertex's value travels floor(T_u) + 1 hops.  One hop beyond
floor(T_u) every shifted value is already below 0, while the join rule needs
candidates down to m1 - 1 >= -1 and the deletion rule compares against values
as low as -1; the extra hop therefore makes every decision identical to the
idealised untruncated process (two singleton clusters with tiny clocks would
otherwise sit adjacent without either noticing the other).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation, LocaldError
from .graph import (
    DELETED,
    Decomposition,
    Graph,
    Hypergraph,
    induced_distance_matrix,
    validate_decomposition,
)
from .ilp import (
    Assignment,
    FixedState,
    IlpInstance,
    Sense,
    brute_force_opt,
    local_restrict,
    weight,
)
from .sim import SimContext


@dataclass(frozen=True)
class ClockRound:
    """Per-vertex clocks and the top-two shifted values of one broadcast."""

    verts: tuple[int, ...]          # live vertex ids, ascending
    clocks: np.ndarray              # T_v aligned to verts
    m: np.ndarray                   # m[i, j] = T_j - dist(i, j), -inf if invisible
    m1: np.ndarray
    top: np.ndarray                 # index into verts of the argmax, ties to smaller id
    m2: np.ndarray                  # best value from any other vertex


def clock_round(ctx: SimContext, lam: float, tag: str, live=None) -> ClockRound:
    if lam <= 0:
        raise LocaldError(f"clock rate lambda must be positive, got {lam}")
    G = ctx.graph
    verts = tuple(range(G.n)) if live is None else tuple(sorted(live))
    reset_cap = 4.0 * ctx.ln_nhat / lam
    ctx.ledger.charge(ctx.current_phase, math.ceil(reset_cap) + 1)
    if not verts:
        empty = np.zeros(0)
        return ClockRound(verts, empty, np.zeros((0, 0)), empty, np.zeros(0, dtype=int), empty)
    T = np.array([ctx.exponential(v, tag, lam) for v in verts])
    T[T >= reset_cap] = 0.0
    D, _ = induced_distance_matrix(G, None if live is None else verts)
    m = T[None, :] - D
    m[D > np.floor(T)[None, :] + 1.0] = -np.inf
    m1 = m.max(axis=1)
    top = m.argmax(axis=1)
    rest = m.copy()
    rest[np.arange(len(verts)), top] = -np.inf
    m2 = rest.max(axis=1)
    return ClockRound(verts, T, m, m1, top, m2)


def exp_clock_labels(ctx: SimContext, lam: float, tag: str, live=None) -> dict[int, int | None]:
    """Raw vertex-LDD outcome: centre id per live vertex, DELETED for deletions.

    A vertex is deleted iff its runner-up satisfies m2 >= m1 - 1; otherwise it
    joins the cluster of the argmax vertex.
    """
    rnd = clock_round(ctx, lam, tag, live)
    out: dict[int, int | None] = {}
    for i, v in enumerate(rnd.verts):
        if rnd.m2[i] >= rnd.m1[i] - 1.0:
            out[v] = DELETED
        else:
            out[v] = rnd.verts[rnd.top[i]]
    return out


def exp_clock_ldd(ctx: SimContext, lam: float, tag: str = "expclock", check: bool = True) -> Decomposition:
    """Whole-graph exponential-clock low-diameter decomposition.

    Every cluster's strong diameter is at most 8 ln(nhat)/lambda on every run;
    with check=True this and mutual non-adjacency are asserted, raising
    InvariantViolation on failure.
    """
    labels = exp_clock_labels(ctx, lam, tag)
    D = Decomposition.from_labels([labels[v] for v in range(ctx.graph.n)])
    if check:
        bound = 8.0 * ctx.ln_nhat / lam
        report = validate_decomposition(ctx.graph, D, eps=1.0, d=bound)
        if not report.non_adjacent_ok:
            raise InvariantViolation(f"exp_clock_ldd produced adjacent clusters (seed={ctx.seed})")
        if report.max_strong_diameter > bound:
            raise InvariantViolation(
                f"exp_clock_ldd strong diameter {report.max_strong_diameter} exceeds {bound} (seed={ctx.seed})"
            )
    return D


@dataclass(frozen=True)
class MpxResult:
    cluster_of: dict[int, int]          # vertex -> centre id
    cut_edges: frozenset[tuple[int, int]]
    clocks: dict[int, float]


def mpx_cluster(ctx: SimContext, lam: float, tag: str = "mpx", check: bool = True) -> MpxResult:
    """MPX-style partition: every vertex joins its argmax centre, no vertex is
    deleted, and an edge is cut iff its endpoints hold different cluster ids."""
    rnd = clock_round(ctx, lam, tag)
    cluster = {v: rnd.verts[rnd.top[i]] for i, v in enumerate(rnd.verts)}
    cut = frozenset((u, v) for u, v in ctx.graph.edges() if cluster[u] != cluster[v])
    clocks = {v: float(rnd.clocks[i]) for i, v in enumerate(rnd.verts)}
    if check:
        _check_mpx(ctx.graph, cluster, clocks, ctx.seed)
    return MpxResult(cluster_of=cluster, cut_edges=cut, clocks=clocks)


def _check_mpx(G: Graph, cluster: dict[int, int], clocks: dict[int, float], seed: int) -> None:
    # removing cut edges must leave each cluster connected, with every member
    # within max T_v of its centre
    max_t = max(clocks.values(), default=0.0)
    D = G.distance_matrix()
    for v, c in cluster.items():
        if D[v, c] > max_t + 1:
            raise InvariantViolation(f"mpx member {v} lies {D[v, c]} hops from centre {c} (seed={seed})")
    # connectivity: walk from each centre along same-cluster edges
    members: dict[int, set[int]] = {}
    for v, c in cluster.items():
        members.setdefault(c, set()).add(v)
    for c, group in members.items():
        seen = {c}
        stack = [c]
        while stack:
            x = stack.pop()
            for y in G.adjacency[x]:
                if y in group and y not in seen:
                    seen.add(y)
                    stack.append(y)
        if seen != group:
            raise InvariantViolation(f"mpx cluster of centre {c} is disconnected (seed={seed})")


@dataclass(frozen=True)
class SparseCover:
    """Overlapping vertex subsets; every hyperedge lies fully inside >= 1 of them."""

    clusters: tuple[frozenset[int], ...]

    def multiplicity(self, v: int) -> int:
        return sum(1 for c in self.clusters if v in c)

    def multiplicities(self, vertices) -> list[int]:
        return [self.multiplicity(v) for v in vertices]


def sparse_cover(
    ctx: SimContext,
    lam: float,
    tag: str = "sparsecover",
    live=None,
    hyperedges=None,
    check: bool = True,
) -> SparseCover:
    """Clock clustering where v joins the cluster of every v_j with
    m^(v)_{v_j} >= m1 - 1 (no deletions).

    Coverage of every (live) hyperedge is deterministic and checked on every
    run.  ``hyperedges`` defaults to the hyperedges of the context topology.
    """
    if hyperedges is None:
        if not isinstance(ctx.topology, Hypergraph):
            raise LocaldError("sparse_cover needs a hypergraph topology or explicit hyperedges")
        hyperedges = ctx.topology.hyperedges
    rnd = clock_round(ctx, lam, tag, live)
    clusters: dict[int, set[int]] = {}
    if len(rnd.verts):
        joins = rnd.m >= (rnd.m1 - 1.0)[:, None]
        for i, v in enumerate(rnd.verts):
            for j in np.flatnonzero(joins[i]):
                clusters.setdefault(rnd.verts[j], set()).add(v)
    cover = SparseCover(tuple(frozenset(s) for _, s in sorted(clusters.items())))
    if check:
        for e in hyperedges:
            e = frozenset(e)
            if not any(e <= c for c in cover.clusters):
                raise InvariantViolation(f"sparse_cover left hyperedge {sorted(e)} uncovered (seed={ctx.seed})")
    return cover


def cover_and_solve(
    ctx: SimContext,
    inst: IlpInstance,
    cover: SparseCover,
    fixed: FixedState | None = None,
    live_constraints=None,
    cap: int | None = None,
    cache: dict | None = None,
) -> Assignment:
    """Solve each cluster's local covering restriction exactly and take the
    bitwise OR of the solution vectors.

    Every live constraint must be covered by some cluster (hard error
    otherwise); the result then satisfies all of them.  The combined weight
    never exceeds the sum of the local optima, which is asserted per run.
    """
    if inst.sense != Sense.COVERING:
        raise LocaldError("cover_and_solve applies to covering instances only")
    if fixed is None:
        fixed = FixedState.all_free(inst.var_count)
    if cap is None:
        cap = ctx.profile.bf_cap
    live = set(range(len(inst.constraints))) if live_constraints is None else set(live_constraints)

    uncovered = [
        j for j in sorted(live)
        if not any(frozenset(inst.constraints[j].support) <= c for c in cover.clusters)
    ]
    if uncovered:
        raise LocaldError(f"cover does not contain constraints {uncovered}; cover_and_solve precondition violated")

    out = [0] * inst.var_count
    local_weight_sum = 0
    cache = {} if cache is None else cache
    for cluster in cover.clusters:
        sol = _solve_live(inst, cluster, live, fixed, cap, cache)
        local_weight_sum += weight(sol, cluster, inst.weights)
        for v in cluster:
            if sol[v]:
                out[v] = 1
    out_t = tuple(out)
    if weight(out_t, range(inst.var_count), inst.weights) > local_weight_sum:
        raise InvariantViolation("cover_and_solve: OR of local solutions outweighs their sum (accounting bug)")
    for j in sorted(live):
        c = inst.constraints[j]
        if sum(a * out_t[v] for v, a in zip(c.support, c.coeffs)) < c.bound:
            raise InvariantViolation(f"cover_and_solve left covered constraint {j} unsatisfied (seed={ctx.seed})")
    return out_t


def _solve_live(inst, ground, live_constraints, fixed, cap, cache):
    """Exact covering solve on a ground set, keeping only live constraints
    whose support lies inside it."""
    gset = frozenset(ground)
    local = local_restrict(inst, gset)
    keep = [k for k, j in enumerate(local.origin) if j in live_constraints]
    trimmed = type(local)(
        parent=inst,
        ground=local.ground,
        constraints=tuple(local.constraints[k] for k in keep),
        origin=tuple(local.origin[k] for k in keep),
    )
    key = (gset, trimmed.origin, fixed.signature(gset))
    hit = cache.get(key)
    if hit is not None:
        return hit
    sol = brute_force_opt(trimmed, fixed, cap)
    cache[key] = sol
    return sol
