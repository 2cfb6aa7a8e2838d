"""Graphs, hypergraphs, distances, decomposition validation, and generators.

Vertices are always ``0..n-1``.  Graphs are simple and undirected, and are
immutable after construction; derived structures (induced subgraphs, Gaifman
graphs) are fresh values carrying an id-translation table back to the parent.
Distances are unweighted BFS distances; unreachable pairs have distance
``INFINITE`` (``math.inf``), an explicit value rather than a sentinel integer.
"""

from __future__ import annotations

import math
import random
import re
from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import shortest_path

from .errors import GraphError

INFINITE = math.inf

#: Label used for unclustered vertices in a ``Decomposition``.
DELETED = None


class Graph:
    """Immutable simple undirected graph given by sorted adjacency lists."""

    __slots__ = ("adjacency", "_csr", "_dist")

    def __init__(self, adjacency):
        adj = tuple(tuple(sorted(set(nbrs))) for nbrs in adjacency)
        n = len(adj)
        for v, nbrs in enumerate(adj):
            for u in nbrs:
                if not 0 <= u < n:
                    raise GraphError(f"neighbor id {u} out of range for n={n}")
                if u == v:
                    raise GraphError(f"self-loop at vertex {v}")
                if v not in adj[u]:
                    raise GraphError(f"adjacency not symmetric at edge {{{u},{v}}}")
        self.adjacency = adj
        self._csr = None
        self._dist = None

    # -- construction ------------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        adj = [[] for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            adj[u].append(v)
            adj[v].append(u)
        return cls(adj)

    # -- basic accessors ----------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.adjacency)

    @property
    def m(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def neighbors(self, v: int) -> tuple[int, ...]:
        self._check_vertex(v)
        return self.adjacency[v]

    def edges(self):
        """Edges as (u, v) with u < v, in edge-scan order."""
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u < v:
                    yield (u, v)

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise GraphError(f"vertex id {v} out of range for n={self.n}")

    def __eq__(self, other):
        return isinstance(other, Graph) and self.adjacency == other.adjacency

    def __hash__(self):
        return hash(self.adjacency)

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"

    # -- distances ----------------------------------------------------------

    def csr(self) -> sp.csr_matrix:
        if self._csr is None:
            rows, cols = [], []
            for u, nbrs in enumerate(self.adjacency):
                rows.extend([u] * len(nbrs))
                cols.extend(nbrs)
            data = np.ones(len(rows), dtype=np.int8)
            self._csr = sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))
        return self._csr

    def distance_matrix(self) -> np.ndarray:
        """All-pairs BFS distances as floats; ``inf`` marks unreachable pairs."""
        if self._dist is None:
            if self.n == 0:
                self._dist = np.zeros((0, 0))
            elif self.m == 0:
                d = np.full((self.n, self.n), INFINITE)
                np.fill_diagonal(d, 0.0)
                self._dist = d
            else:
                self._dist = shortest_path(self.csr(), method="D", unweighted=True, directed=False)
        return self._dist

    def dist(self, u: int, v: int) -> float:
        self._check_vertex(u)
        self._check_vertex(v)
        return float(self.distance_matrix()[u, v])


def bfs_distances(G: Graph, sources, live=None, max_depth=None) -> dict[int, int]:
    """BFS from one or more sources, optionally restricted to a live vertex set.

    Returns a dict vertex -> distance for every reached vertex within
    ``max_depth``.  ``live`` restricts both the sources and the traversal to the
    induced subgraph on that set (residual-graph distances).
    """
    if isinstance(sources, int):
        sources = (sources,)
    dist: dict[int, int] = {}
    q = deque()
    for s in sources:
        G._check_vertex(s)
        if live is not None and s not in live:
            continue
        if s not in dist:
            dist[s] = 0
            q.append(s)
    while q:
        v = q.popleft()
        d = dist[v]
        if max_depth is not None and d >= max_depth:
            continue
        for u in G.adjacency[v]:
            if u in dist or (live is not None and u not in live):
                continue
            dist[u] = d + 1
            q.append(u)
    return dist


def neighborhood(G: Graph, v: int, r: int) -> frozenset[int]:
    """The r-radius ball {u : dist(u, v) <= r}, by breadth-first exploration."""
    if r < 0:
        raise GraphError(f"radius must be non-negative, got {r}")
    return frozenset(bfs_distances(G, v, max_depth=r))


def induced_subgraph(G: Graph, S) -> tuple[Graph, tuple[int, ...]]:
    """Induced subgraph on S plus the id-translation table back to G.

    Entry i of the table is the parent id of vertex i in the new graph.
    """
    table = tuple(sorted(S))
    pos = {v: i for i, v in enumerate(table)}
    adj = [[pos[u] for u in G.adjacency[v] if u in pos] for v in table]
    return Graph(adj), table


def induced_distance_matrix(G: Graph, live=None) -> tuple[np.ndarray, tuple[int, ...]]:
    """Distances within the live-induced subgraph; returns (matrix, id table)."""
    if live is None or len(live) == G.n:
        return G.distance_matrix(), tuple(range(G.n))
    sub, table = induced_subgraph(G, live)
    return sub.distance_matrix(), table


def connected_components(G: Graph, live=None) -> list[frozenset[int]]:
    verts = range(G.n) if live is None else sorted(live)
    liveset = None if live is None else set(live)
    seen: set[int] = set()
    comps = []
    for v in verts:
        if v in seen:
            continue
        comp = frozenset(bfs_distances(G, v, live=liveset))
        seen |= comp
        comps.append(comp)
    return comps


def set_diameter(G: Graph, S, mode: str = "weak") -> float:
    """Max pairwise distance within S, in G (weak) or in G[S] (strong).

    Returns ``INFINITE`` when S is disconnected under the relevant metric.
    """
    S = sorted(S)
    if not S:
        raise GraphError("set_diameter: empty vertex set")
    for v in S:
        G._check_vertex(v)
    if len(S) == 1:
        return 0.0
    if mode == "weak":
        D = G.distance_matrix()
        return float(D[np.ix_(S, S)].max())
    if mode == "strong":
        sub, _ = induced_subgraph(G, S)
        return float(sub.distance_matrix().max())
    raise GraphError(f"unknown diameter mode {mode!r}")


# -- decompositions ---------------------------------------------------------


@dataclass(frozen=True)
class Decomposition:
    """Per-vertex cluster label (or DELETED) with compact cluster ids."""

    assignment: tuple
    cluster_count: int

    @classmethod
    def from_labels(cls, labels) -> "Decomposition":
        """Compact arbitrary hashable labels (None = deleted) to 0..k-1."""
        remap: dict = {}
        out = []
        for lab in labels:
            if lab is DELETED:
                out.append(DELETED)
            else:
                if lab not in remap:
                    remap[lab] = len(remap)
                out.append(remap[lab])
        return cls(tuple(out), len(remap))

    @property
    def n(self) -> int:
        return len(self.assignment)

    def clusters(self) -> list[frozenset[int]]:
        sets: list[set[int]] = [set() for _ in range(self.cluster_count)]
        for v, lab in enumerate(self.assignment):
            if lab is not DELETED:
                sets[lab].add(v)
        return [frozenset(s) for s in sets]

    def deleted(self) -> frozenset[int]:
        return frozenset(v for v, lab in enumerate(self.assignment) if lab is DELETED)


@dataclass(frozen=True)
class ValidationReport:
    non_adjacent_ok: bool
    max_weak_diameter: float
    max_strong_diameter: float
    deleted_count: int
    deleted_fraction: float
    weak_diameter_ok: bool
    deleted_fraction_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.non_adjacent_ok and self.weak_diameter_ok and self.deleted_fraction_ok


def validate_decomposition(G: Graph, D: Decomposition, eps: float, d: float) -> ValidationReport:
    """Check a decomposition against the defining conditions.

    Does not raise on violation; the report carries the facts.  Non-adjacency is
    equivalent to an exhaustive edge scan: for every edge, labels are equal or at
    least one endpoint is deleted.
    """
    if D.n != G.n:
        raise GraphError(f"decomposition covers {D.n} vertices, graph has {G.n}")
    lab = D.assignment
    non_adjacent = True
    for u, v in G.edges():
        if lab[u] is not DELETED and lab[v] is not DELETED and lab[u] != lab[v]:
            non_adjacent = False
            break

    max_weak = 0.0
    max_strong = 0.0
    if D.cluster_count:
        dist = G.distance_matrix()
        # strong diameters via one shortest-path run on the intra-cluster graph
        intra_rows, intra_cols = [], []
        for u, v in G.edges():
            if lab[u] is not DELETED and lab[u] == lab[v]:
                intra_rows.extend((u, v))
                intra_cols.extend((v, u))
        if intra_rows:
            intra = sp.csr_matrix(
                (np.ones(len(intra_rows), dtype=np.int8), (intra_rows, intra_cols)),
                shape=(G.n, G.n),
            )
            sdist = shortest_path(intra, method="D", unweighted=True, directed=False)
        else:
            sdist = np.full((G.n, G.n), INFINITE)
            np.fill_diagonal(sdist, 0.0)
        for cluster in D.clusters():
            idx = sorted(cluster)
            block = np.ix_(idx, idx)
            max_weak = max(max_weak, float(dist[block].max()))
            max_strong = max(max_strong, float(sdist[block].max()))

    deleted = sum(1 for x in lab if x is DELETED)
    frac = deleted / G.n if G.n else 0.0
    return ValidationReport(
        non_adjacent_ok=non_adjacent,
        max_weak_diameter=max_weak,
        max_strong_diameter=max_strong,
        deleted_count=deleted,
        deleted_fraction=frac,
        weak_diameter_ok=max_weak <= d,
        deleted_fraction_ok=deleted <= eps * G.n + 1e-9,
    )


# -- hypergraphs ------------------------------------------------------------


class Hypergraph:
    """Immutable hypergraph: n vertices plus a sequence of nonempty hyperedges."""

    __slots__ = ("vertex_count", "hyperedges", "_gaifman")

    def __init__(self, vertex_count: int, hyperedges):
        if vertex_count < 0:
            raise GraphError("vertex_count must be non-negative")
        edges = tuple(frozenset(e) for e in hyperedges)
        for i, e in enumerate(edges):
            if not e:
                raise GraphError(f"hyperedge {i} is empty")
            for v in e:
                if not 0 <= v < vertex_count:
                    raise GraphError(f"hyperedge {i} mentions vertex {v} >= n={vertex_count}")
        self.vertex_count = vertex_count
        self.hyperedges = edges
        self._gaifman = None

    @property
    def n(self) -> int:
        return self.vertex_count

    @property
    def m(self) -> int:
        return len(self.hyperedges)

    def __eq__(self, other):
        return (
            isinstance(other, Hypergraph)
            and self.vertex_count == other.vertex_count
            and self.hyperedges == other.hyperedges
        )

    def __repr__(self):
        return f"Hypergraph(n={self.n}, m={self.m})"


def gaifman_graph(H: Hypergraph) -> Graph:
    """The primal graph: u ~ v iff u != v and some hyperedge contains both.

    This graph defines all distances, neighborhoods, and simulated
    communication for hypergraph algorithms.  Vertex ids coincide with H's.
    """
    if H._gaifman is not None:
        return H._gaifman
    adj: list[set[int]] = [set() for _ in range(H.n)]
    for e in H.hyperedges:
        members = sorted(e)
        for i, u in enumerate(members):
            for v in members[i + 1 :]:
                adj[u].add(v)
                adj[v].add(u)
    G = Graph(adj)
    H._gaifman = G
    return G


# -- text formats -----------------------------------------------------------


def parse_graph(text: str) -> Graph:
    """Graph text format: first line "n m", then m lines "u v" with u < v."""
    tokens = text.split()
    if len(tokens) < 2:
        raise GraphError("graph text must start with 'n m'")
    n, m = int(tokens[0]), int(tokens[1])
    nums = tokens[2:]
    if len(nums) != 2 * m:
        raise GraphError(f"expected {2 * m} edge endpoints, got {len(nums)}")
    edges = []
    for i in range(m):
        u, v = int(nums[2 * i]), int(nums[2 * i + 1])
        if not u < v:
            raise GraphError(f"edge line {i} must satisfy u < v, got {u} {v}")
        edges.append((u, v))
    return Graph.from_edges(n, edges)


def format_graph(G: Graph) -> str:
    lines = [f"{G.n} {G.m}"]
    lines.extend(f"{u} {v}" for u, v in G.edges())
    return "\n".join(lines) + "\n"


def parse_hypergraph(text: str) -> Hypergraph:
    """Hypergraph text format: "n m" then m lines listing one hyperedge each."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise GraphError("empty hypergraph text")
    n, m = (int(x) for x in lines[0].split())
    if len(lines) - 1 != m:
        raise GraphError(f"expected {m} hyperedge lines, got {len(lines) - 1}")
    return Hypergraph(n, [[int(x) for x in ln.split()] for ln in lines[1:]])


def format_hypergraph(H: Hypergraph) -> str:
    lines = [f"{H.n} {H.m}"]
    lines.extend(" ".join(str(v) for v in sorted(e)) for e in H.hyperedges)
    return "\n".join(lines) + "\n"


# -- generators -------------------------------------------------------------


def path(n: int) -> Graph:
    _check_size(n)
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> Graph:
    _check_size(n)
    if n < 3:
        raise GraphError(f"cycle needs n >= 3, got {n}")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def clique(n: int) -> Graph:
    _check_size(n)
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def grid(w: int, h: int) -> Graph:
    _check_size(w)
    _check_size(h)
    edges = []
    for y in range(h):
        for x in range(w):
            v = y * w + x
            if x + 1 < w:
                edges.append((v, v + 1))
            if y + 1 < h:
                edges.append((v, v + w))
    return Graph.from_edges(w * h, edges)


def gnp(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi G(n, p).  Uses only the provided seed; no ambient randomness."""
    _check_size(n)
    if not 0.0 <= p <= 1.0:
        raise GraphError(f"gnp probability must be in [0,1], got {p}")
    rng = random.Random(seed)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return Graph.from_edges(n, edges)


@dataclass(frozen=True)
class MpxAdversarialParts:
    """Named vertex groups of the MPX adversarial family (n = 4t+2)."""

    u: int
    v: int
    s_left: frozenset[int]
    s_right: frozenset[int]
    left: frozenset[int]
    right: frozenset[int]


def mpx_adversarial_parts(t: int) -> MpxAdversarialParts:
    _check_size(t)
    return MpxAdversarialParts(
        u=0,
        v=1,
        s_left=frozenset(range(2, 2 + t)),
        s_right=frozenset(range(2 + t, 2 + 2 * t)),
        left=frozenset(range(2 + 2 * t, 2 + 3 * t)),
        right=frozenset(range(2 + 3 * t, 2 + 4 * t)),
    )


def mpx_adversarial(t: int) -> Graph:
    """Two hubs with pendant groups joined by a complete bipartite core.

    Vertices {u} | {v} | S_L | S_R | L | R with |S_L|=|S_R|=|L|=|R|=t, edges
    L x R complete bipartite, u joined to S_L | L, v joined to S_R | R; hence
    n = 4t+2 and m = t^2 + 4t.
    """
    parts = mpx_adversarial_parts(t)
    edges = [(parts.u, w) for w in sorted(parts.s_left | parts.left)]
    edges += [(parts.v, w) for w in sorted(parts.s_right | parts.right)]
    edges += [(a, b) for a in sorted(parts.left) for b in sorted(parts.right)]
    return Graph.from_edges(4 * t + 2, edges)


_FAMILY_RE = re.compile(r"^\s*([a-z_]+)\s*\(\s*([^)]*)\s*\)\s*$")


def generate(spec: str, seed: int | None = None) -> Graph:
    """Build a graph from a family spec string such as "cycle(200)" or "gnp(500,0.006)"."""
    m = _FAMILY_RE.match(spec)
    if not m:
        raise GraphError(f"cannot parse family spec {spec!r}")
    name = m.group(1)
    args = [a.strip() for a in m.group(2).split(",")] if m.group(2).strip() else []
    if name == "path":
        return path(int(args[0]))
    if name == "cycle":
        return cycle(int(args[0]))
    if name == "clique":
        return clique(int(args[0]))
    if name == "grid":
        return grid(int(args[0]), int(args[1]))
    if name == "gnp":
        if seed is None:
            raise GraphError("gnp requires a seed")
        return gnp(int(args[0]), float(args[1]), seed)
    if name == "mpx_adversarial":
        return mpx_adversarial(int(args[0]))
    raise GraphError(f"unknown graph family {name!r}")


def _check_size(n: int) -> None:
    if n <= 0:
        raise GraphError(f"size must be positive, got {n}")


# -- reductions -------------------------------------------------------------


def subdivide(G: Graph, x: int) -> Graph:
    """Replace each edge {u,v} by a path of length 2x+1 through 2x fresh vertices.

    Original ids come first; fresh ids are assigned in edge-scan order, so the
    output has |V| + 2x|E| vertices and (2x+1)|E| edges.  x = 0 returns an
    isomorphic copy.
    """
    if x < 0:
        raise GraphError(f"subdivision parameter must be non-negative, got {x}")
    if x == 0:
        return Graph(G.adjacency)
    edges = []
    nxt = G.n
    for u, v in G.edges():
        chain = [u] + list(range(nxt, nxt + 2 * x)) + [v]
        nxt += 2 * x
        edges.extend(zip(chain, chain[1:]))
    return Graph.from_edges(nxt, edges)


def dominating_gadget(G: Graph) -> Graph:
    """For every edge e = {u,v}, add a vertex w_e adjacent to exactly u and v.

    The domination number of the result equals the vertex cover number of G,
    which is brute-force checkable on small inputs.
    """
    edges = list(G.edges())
    new_edges = list(edges)
    nxt = G.n
    for u, v in edges:
        new_edges.append((u, nxt))
        new_edges.append((v, nxt))
        nxt += 1
    return Graph.from_edges(nxt, new_edges)
