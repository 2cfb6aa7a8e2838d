"""Three-phase low-diameter decomposition whose deletion bound holds with high
probability: iterative sampled ball-growing-and-carving (phase 1), one boosted
round (phase 2), and an exponential-clock pass on the sparsified residual
(phase 3), plus the optional brute-force diameter refinement.

Concurrent carving semantics: all centres of one iteration compute their cut
against the same snapshot of the residual graph; conflicts resolve as
delete > remove > live, and a vertex inside two removed balls joins the ball
of the lower-id centre.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .classic import exp_clock_labels
from .errors import InvariantViolation, LocaldError
from .graph import DELETED, Decomposition, Graph, bfs_distances
from .sim import SimContext, View


@dataclass(frozen=True)
class CarveResult:
    """One ball-growing-and-carving outcome: the deleted layer S_{j*} and the
    removed ball N^{j*-1}(centre), both within the live graph."""

    deleted: frozenset[int]
    removed: frozenset[int]
    j_star: int


def grow_and_carve(view: View, interval: tuple[int, int]) -> CarveResult:
    """Delete the sparsest layer S_{j*} with j* in [a, b] (ties to smallest j)
    and remove the inner ball of radius j* - 1."""
    a, b = interval
    if view.radius < b:
        raise LocaldError(f"view radius {view.radius} is smaller than interval end {b}")
    sizes = {j: 0 for j in range(a, b + 1)}
    ball_before = 0
    interval_total = 0
    for d in view.dist.values():
        if d < a:
            ball_before += 1
        elif d <= b:
            sizes[d] += 1
            interval_total += 1
    j_star = min(range(a, b + 1), key=lambda j: (sizes[j], j))
    # pigeonhole: the minimum layer cannot exceed the interval average
    if sizes[j_star] * (b - a + 1) > interval_total:
        raise InvariantViolation("grow_and_carve picked a layer above the interval average")
    deleted = view.layer(j_star)
    removed = view.ball(j_star - 1)
    assert not (deleted & removed)
    return CarveResult(deleted=deleted, removed=removed, j_star=j_star)


@dataclass
class PhaseState:
    """Residual graph bookkeeping threaded through the phases.

    live, the union of recorded cluster members, and deleted_so_far partition
    the vertex set at all times.
    """

    live: frozenset[int]
    clusters_so_far: list[tuple[int, frozenset[int]]] = field(default_factory=list)  # (centre, members)
    deleted_so_far: frozenset[int] = frozenset()
    n_v: dict[int, int] = field(default_factory=dict)

    def check_partition(self, n: int) -> None:
        covered = set(self.live) | set(self.deleted_so_far)
        for _, members in self.clusters_so_far:
            covered |= members
        total = len(self.live) + len(self.deleted_so_far) + sum(len(m) for _, m in self.clusters_so_far)
        if total != n or len(covered) != n:
            raise InvariantViolation("live/removed/deleted no longer partition the vertex set")


def _carve_iteration(ctx: SimContext, state: PhaseState, centres, interval) -> PhaseState:
    """Run all sampled centres concurrently against the current snapshot and
    merge with delete > remove > live, lower centre id claiming overlaps."""
    snapshot = set(state.live)
    carves = []
    for c in sorted(centres):
        view = ctx.gather_view(c, interval[1], live=snapshot)
        carves.append((c, grow_and_carve(view, interval)))
    deleted = set()
    for _, cr in carves:
        deleted |= cr.deleted
    claims: dict[int, int] = {}
    new_clusters = []
    for c, cr in carves:
        members = {v for v in cr.removed if v not in deleted and v not in claims}
        for v in members:
            claims[v] = c
        if members:
            new_clusters.append((c, frozenset(members)))
    next_live = frozenset(snapshot - deleted - set(claims))
    out = PhaseState(
        live=next_live,
        clusters_so_far=state.clusters_so_far + new_clusters,
        deleted_so_far=state.deleted_so_far | deleted,
        n_v=state.n_v,
    )
    out.check_partition(ctx.graph.n)
    return out


def whp_phase1(ctx: SimContext, eps: float) -> PhaseState:
    """t iterations of sampled carving with p_{v,i} = min(1, 2^i ln(nhat)/n_v).

    n_v = |N^{4tR}(v)| is computed once, in the original graph, before the
    first iteration; it is not recomputed on residual graphs.
    """
    params = ctx.params(eps, "ldd")
    ivals = ctx.intervals(eps, "ldd")
    ln_nhat = ctx.ln_nhat

    ctx.set_phase("prep")
    ctx.ledger.charge("prep", 4 * params.t * params.R)
    D = ctx.graph.distance_matrix()
    n_v = {v: int((D[v] <= 4 * params.t * params.R).sum()) for v in range(ctx.graph.n)}

    state = PhaseState(live=frozenset(range(ctx.graph.n)), n_v=n_v)
    for i in range(1, params.t + 1):
        tag = f"phase1.{i}"
        ctx.set_phase(tag)
        centres = [
            v for v in sorted(state.live)
            if ctx.bernoulli(v, tag, (2**i) * ln_nhat / n_v[v])
        ]
        state = _carve_iteration(ctx, state, centres, ivals[i - 1])
    return state


def whp_phase2(ctx: SimContext, state: PhaseState, eps: float) -> PhaseState:
    """One boosted sampling round with interval I_{t+1} = [R+1, 2R]."""
    params = ctx.params(eps, "ldd")
    interval = ctx.intervals(eps, "ldd")[params.t]
    ln_nhat = ctx.ln_nhat
    boost = math.log(20.0 / eps)
    tag = "phase2"
    ctx.set_phase(tag)
    centres = [
        v for v in sorted(state.live)
        if ctx.bernoulli(v, tag, (2 ** (params.t + 1)) * ln_nhat * boost / state.n_v[v])
    ]
    return _carve_iteration(ctx, state, centres, interval)


def whp_ldd(ctx: SimContext, eps: float, refine: bool = False, check: bool = True) -> Decomposition:
    """The assembled decomposition: phases 1-2, then an exponential-clock pass
    with rate eps/10 on the residual, one cluster per carved ball plus the
    phase-3 clusters, everything else deleted.

    With refine set, the phases run at eps/2 and each cluster is then
    re-decomposed internally (centralised, no extra simulated rounds) so the
    weak diameter drops to O(log(nhat)/eps).
    """
    if not 0 < eps < 1:
        raise LocaldError(f"eps must lie in (0,1), got {eps}")
    if refine:
        core = whp_ldd(ctx, eps / 2.0, refine=False, check=check)
        return refine_clusters(ctx.graph, core, eps, n_tilde=ctx.n_tilde, check=check)

    params = ctx.params(eps, "ldd")
    state = whp_phase1(ctx, eps)
    state = whp_phase2(ctx, state, eps)

    lam = eps / ctx.profile.phase3_lambda_divisor
    ctx.set_phase("phase3")
    labels3 = exp_clock_labels(ctx, lam, "phase3", live=state.live)

    labels: list = [None] * ctx.graph.n
    for v in state.deleted_so_far:
        labels[v] = DELETED
    ball_keys = set()
    for centre, members in state.clusters_so_far:
        key = ("ball", centre)
        ball_keys.add(key)
        for v in members:
            labels[v] = key
    for v, lab in labels3.items():
        labels[v] = DELETED if lab is DELETED else ("p3", lab)
    D = Decomposition.from_labels(labels)

    if check:
        _check_whp(ctx, D, labels, params, lam, ball_keys)
    return D


def _check_whp(ctx, D, raw_labels, params, lam, ball_keys) -> None:
    for u, v in ctx.graph.edges():
        lu, lv = raw_labels[u], raw_labels[v]
        if lu is not DELETED and lv is not DELETED and lu != lv:
            raise InvariantViolation(f"whp_ldd clusters {lu} and {lv} are adjacent (seed={ctx.seed})")
    ball_bound = 2 * (params.t + 2) * params.R
    p3_bound = 8.0 * ctx.ln_nhat / lam
    dist = ctx.graph.distance_matrix()
    groups: dict = {}
    for v, lab in enumerate(raw_labels):
        if lab is not DELETED:
            groups.setdefault(lab, []).append(v)
    for lab, members in groups.items():
        if len(members) < 2:
            continue
        diam = float(dist[members][:, members].max())
        bound = ball_bound if lab in ball_keys else p3_bound
        if diam > bound:
            raise InvariantViolation(
                f"whp_ldd cluster {lab} has weak diameter {diam} > {bound} (seed={ctx.seed})"
            )


def refine_clusters(G: Graph, D: Decomposition, eps: float, n_tilde: int | None = None,
                    check: bool = True) -> Decomposition:
    """Centralised re-decomposition inside each cluster.

    Repeatedly carve BFS balls from the lowest-id live vertex, growing the
    radius until the next layer holds at most (eps/2) of the current ball,
    then deleting that layer and emitting the ball.  Each ball stops within
    log(size)/log(1+eps/2) steps, and at most an eps/2 fraction of each
    cluster is deleted.
    """
    if not 0 < eps <= 1:
        raise LocaldError(f"eps must lie in (0,1], got {eps}")
    labels: list = [DELETED] * G.n
    next_id = 0
    for cluster in D.clusters():
        live = set(cluster)
        deleted_here = 0
        while live:
            root = min(live)
            dist = bfs_distances(G, root, live=live)
            by_layer: dict[int, list[int]] = {}
            for v, d in dist.items():
                by_layer.setdefault(d, []).append(v)
            ball = 0
            r = 0
            while True:
                ball += len(by_layer.get(r, ()))
                nxt = by_layer.get(r + 1, ())
                if len(nxt) * 2 <= eps * ball:
                    break
                r += 1
            if check and ball > 1:
                step_bound = math.log(len(cluster)) / math.log1p(eps / 2.0) + 1.0
                if r > step_bound:
                    raise InvariantViolation(f"refinement ball grew for {r} steps, above {step_bound}")
            for d in range(r + 1):
                for v in by_layer.get(d, ()):
                    labels[v] = next_id
                    live.discard(v)
            for v in by_layer.get(r + 1, ()):
                live.discard(v)
                deleted_here += 1
            next_id += 1
        if check and deleted_here * 2 > eps * len(cluster):
            raise InvariantViolation(
                f"refinement deleted {deleted_here} of a {len(cluster)}-vertex cluster, above eps/2"
            )
    out = Decomposition.from_labels(labels)
    if check and n_tilde is not None:
        bound = 2.0 * (math.log(max(n_tilde, 3)) / math.log1p(eps / 2.0) + 1.0)
        dist = G.distance_matrix()
        for cluster in out.clusters():
            members = sorted(cluster)
            if len(members) > 1:
                diam = float(dist[members][:, members].max())
                if diam > bound:
                    raise InvariantViolation(f"refined cluster diameter {diam} exceeds {bound}")
    return out
