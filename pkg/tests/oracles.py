"""Independent brute-force oracles used to freeze expected values.

Everything here is written from the definitions (queues, itertools, bitmasks)
without touching the package's solver or BFS internals, so the tests check the
artifact against a second, unrelated code path.
"""

from __future__ import annotations

import itertools
from collections import deque
from fractions import Fraction

from locald.ilp import Sense


def bfs_oracle(adjacency, source):
    """Plain queue BFS returning {vertex: distance}."""
    dist = {source: 0}
    q = deque([source])
    while q:
        v = q.popleft()
        for u in adjacency[v]:
            if u not in dist:
                dist[u] = dist[v] + 1
                q.append(u)
    return dist


def all_pairs_oracle(adjacency):
    return [bfs_oracle(adjacency, v) for v in range(len(adjacency))]


def is_bipartite(adjacency):
    color = {}
    for s in range(len(adjacency)):
        if s in color:
            continue
        color[s] = 0
        q = deque([s])
        while q:
            v = q.popleft()
            for u in adjacency[v]:
                if u not in color:
                    color[u] = 1 - color[v]
                    q.append(u)
                elif color[u] == color[v]:
                    return False
    return True


def enumerate_ilp_opt(inst, ground=None, forced=None):
    """Definition-level optimum by full enumeration over the ground set.

    forced maps variable -> bit.  Returns (best_weight, assignment) or None if
    no completion is feasible (covering).  Packing keeps every constraint with
    outside variables at zero; covering keeps only constraints inside ground.
    """
    n = inst.var_count
    ground = sorted(range(n)) if ground is None else sorted(ground)
    forced = forced or {}
    free = [v for v in ground if v not in forced]
    base = {v: forced.get(v, 0) for v in range(n)}
    maximize = inst.sense == Sense.PACKING

    rows = []
    for c in inst.constraints:
        if inst.sense == Sense.COVERING and not all(v in ground for v in c.support):
            continue
        rows.append(c)

    best = None
    for bits in itertools.product((0, 1), repeat=len(free)):
        x = dict(base)
        for v, b in zip(free, bits):
            x[v] = b
        for v in range(n):
            if v not in ground and v not in forced:
                x[v] = 0
        ok = True
        for c in rows:
            lhs = sum(a * x[v] for v, a in zip(c.support, c.coeffs))
            if maximize and lhs > c.bound:
                ok = False
                break
            if not maximize and lhs < c.bound:
                ok = False
                break
        if not ok:
            continue
        w = sum(inst.weights[v] * x[v] for v in ground)
        if best is None or (w > best[0] if maximize else w < best[0]):
            best = (w, tuple(x[v] for v in range(n)))
    return best


def enumerate_bounded_opt(bounded):
    """Optimum of a bounded-integer instance by full product enumeration."""
    maximize = bounded.sense == Sense.PACKING
    best = None
    for vals in itertools.product(*(range(c + 1) for c in bounded.caps)):
        ok = True
        for c in bounded.constraints:
            lhs = sum(a * vals[v] for v, a in zip(c.support, c.coeffs))
            if maximize and lhs > c.bound:
                ok = False
                break
            if not maximize and lhs < c.bound:
                ok = False
                break
        if not ok:
            continue
        w = sum(w_ * v_ for w_, v_ in zip(bounded.weights, vals))
        if best is None or (w > best[0] if maximize else w < best[0]):
            best = (w, vals)
    return best


def _closed_neighborhood_masks(adjacency):
    masks = []
    for v, nbrs in enumerate(adjacency):
        m = 1 << v
        for u in nbrs:
            m |= 1 << u
        masks.append(m)
    return masks


def domination_number(adjacency):
    """gamma(G) by increasing-size subset enumeration with bitmasks."""
    n = len(adjacency)
    masks = _closed_neighborhood_masks(adjacency)
    full = (1 << n) - 1
    for k in range(n + 1):
        for subset in itertools.combinations(range(n), k):
            covered = 0
            for v in subset:
                covered |= masks[v]
            if covered == full:
                return k
    raise AssertionError("unreachable")


def vertex_cover_number(adjacency):
    """tau(G) by increasing-size subset enumeration."""
    edges = [(u, v) for u in range(len(adjacency)) for v in adjacency[u] if u < v]
    if not edges:
        return 0
    n = len(adjacency)
    for k in range(n + 1):
        for subset in itertools.combinations(range(n), k):
            s = set(subset)
            if all(u in s or v in s for u, v in edges):
                return k
    raise AssertionError("unreachable")


def independence_number(adjacency):
    n = len(adjacency)
    best = 0
    for mask in range(1 << n):
        ok = True
        for v in range(n):
            if not mask >> v & 1:
                continue
            for u in adjacency[v]:
                if u > v and mask >> u & 1:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            best = max(best, bin(mask).count("1"))
    return best
