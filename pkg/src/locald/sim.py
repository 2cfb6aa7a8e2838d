"""Seeded execution context enforcing locality and accounting simulated rounds.

Locality is enforced by view-restricted data access: algorithms read only the
immutable r-radius views they explicitly request, and the ledger charges the
declared radius under the current phase tag (in the LOCAL model an r-round
algorithm is equivalent to gathering the r-radius neighborhood).  Per-vertex
randomness is derived from (seed, vertex id, phase tag) so results are
independent of iteration order and thread count.
"""

from __future__ import annotations

import hashlib
import math
from contextlib import contextmanager
from dataclasses import dataclass, field, replace

from .errors import GraphError, LocaldError
from .graph import Graph, Hypergraph, bfs_distances, gaifman_graph

_U64 = float(1 << 64)


@dataclass(frozen=True)
class ConstantProfile:
    """The multiplicative constants of the algorithms.

    The "paper" profile reproduces the published constants exactly; they exist
    for asymptotic union bounds and make the carving radius R vastly exceed any
    desk-scale graph diameter, so the "desk" profile shrinks c_r and
    prep_copies (and tightens the brute-force cap) to keep experiments feasible
    while preserving all definitional invariants.
    """

    name: str
    c_r: int = 200                 # multiplier in R = ceil(c_r * t * ln(nhat) / eps)
    t_offset: int = 20             # t = ceil(log2(t_offset / eps))
    prep_copies: int = 16          # decompositions in the preparation step, times ln(nhat)
    phase3_lambda_divisor: int = 10  # phase-3 rate is eps / this
    covering_t_offset: int = 8     # covering t = ceil(log2(ln nhat) + log2(1/eps) + this)
    bf_cap: int = 28               # brute-force free-variable cap

    def __post_init__(self):
        for f in ("c_r", "t_offset", "prep_copies", "phase3_lambda_divisor", "covering_t_offset", "bf_cap"):
            if getattr(self, f) <= 0:
                raise LocaldError(f"profile constant {f} must be strictly positive")


PAPER_PROFILE = ConstantProfile(name="paper")
DESK_PROFILE = ConstantProfile(name="desk", c_r=2, prep_copies=2, bf_cap=24)

PROFILES = {"paper": PAPER_PROFILE, "desk": DESK_PROFILE}


def profile_from_name(name: str, overrides: dict | None = None) -> ConstantProfile:
    if name not in PROFILES:
        raise LocaldError(f"unknown profile {name!r}; expected one of {sorted(PROFILES)}")
    prof = PROFILES[name]
    if overrides:
        prof = replace(prof, **overrides)
    return prof


@dataclass(frozen=True)
class LddParams:
    t: int
    R: int

    @property
    def r_prime(self) -> int:
        # buffer used by the packing pipeline ("R' := R + 1")
        return self.R + 1


def derive_params(profile: ConstantProfile, n_tilde: int, eps: float, flavor: str = "ldd") -> LddParams:
    """t and R for a flavor.  log is base 2, ln is natural (t counts halvings
    of eps through the 2^i sampling schedule).

    n_tilde is treated as at least 2 so the logarithms stay positive, and R is
    at least 1 so intervals remain well formed on tiny inputs.
    """
    if not 0 < eps < 1:
        raise LocaldError(f"eps must lie in (0,1), got {eps}")
    nt = max(n_tilde, 2)
    if flavor in ("ldd", "packing"):
        t = math.ceil(math.log2(profile.t_offset / eps))
    elif flavor == "covering":
        t = math.ceil(math.log2(math.log(nt)) + math.log2(1 / eps) + profile.covering_t_offset)
    else:
        raise LocaldError(f"unknown flavor {flavor!r}")
    t = max(t, 1)
    R = max(1, math.ceil(profile.c_r * t * math.log(nt) / eps))
    return LddParams(t=t, R=R)


def intervals(params: LddParams, flavor: str = "ldd") -> list[tuple[int, int]]:
    """The carving intervals [a_i, b_i], returned as [I_1, I_2, ...] with I_1
    outermost.

    ldd: t+1 length-R intervals covering [R+1, (t+2)R];
    packing: t+1 length-3R' intervals covering [3R'+1, 3(t+2)R'];
    covering: t length-2R intervals covering [2R+1, 2(t+1)R].
    """
    t, R = params.t, params.R
    if flavor == "ldd":
        return [((t - i + 2) * R + 1, (t - i + 3) * R) for i in range(1, t + 2)]
    if flavor == "packing":
        s = 3 * params.r_prime
        return [((t - i + 2) * s + 1, (t - i + 3) * s) for i in range(1, t + 2)]
    if flavor == "covering":
        s = 2 * R
        return [((t - i + 1) * s + 1, (t - i + 2) * s) for i in range(1, t + 1)]
    raise LocaldError(f"unknown flavor {flavor!r}")


class RoundLedger:
    """Per-phase max gather radius; cumulative rounds is their sum."""

    __slots__ = ("phase_radius",)

    def __init__(self):
        self.phase_radius: dict[str, int] = {}

    def charge(self, tag: str, radius: int) -> None:
        if radius < 0:
            raise LocaldError("cannot charge a negative radius")
        self.phase_radius[tag] = max(self.phase_radius.get(tag, 0), radius)

    @property
    def total_rounds(self) -> int:
        return sum(self.phase_radius.values())

    def as_dict(self) -> dict[str, int]:
        return dict(sorted(self.phase_radius.items()))


@dataclass(frozen=True)
class View:
    """Immutable snapshot of the r-radius neighborhood of a centre.

    Distances are measured in the live-induced subgraph the gather was made
    against, so a view never leaks information about vertices outside it.  For
    hypergraph topologies the view also lists the hyperedges fully inside it
    plus boundary markers for the partially visible ones.
    """

    centre: frozenset[int]
    radius: int
    dist: dict[int, int]
    inside_hyperedges: tuple[int, ...] = ()
    boundary_hyperedges: tuple[int, ...] = ()

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(self.dist)

    def layer(self, j: int) -> frozenset[int]:
        return frozenset(v for v, d in self.dist.items() if d == j)

    def ball(self, j: int) -> frozenset[int]:
        return frozenset(v for v, d in self.dist.items() if d <= j)


class SimContext:
    """One seeded run over a fixed topology.

    A context is used by one logical run; independent contexts (trials) run in
    parallel freely.  Hypergraph locality is mediated by the Gaifman graph.
    """

    def __init__(self, topology, n_tilde: int, seed: int, profile: ConstantProfile):
        if isinstance(topology, Hypergraph):
            graph = gaifman_graph(topology)
        elif isinstance(topology, Graph):
            graph = topology
        else:
            raise LocaldError(f"topology must be a Graph or Hypergraph, not {type(topology).__name__}")
        if n_tilde < graph.n:
            raise LocaldError(f"n_tilde={n_tilde} is below the vertex count {graph.n}")
        self.topology = topology
        self.graph = graph
        self.n_tilde = n_tilde
        self.seed = int(seed)
        self.profile = profile
        self.ledger = RoundLedger()
        self._phase = "init"

    @property
    def ln_nhat(self) -> float:
        """ln(n_tilde), floored at ln(2) so rate and radius formulas stay positive."""
        return math.log(max(self.n_tilde, 2))

    # -- phases ---------------------------------------------------------------

    def set_phase(self, tag: str) -> None:
        self._phase = tag

    @contextmanager
    def phase(self, tag: str):
        prev = self._phase
        self._phase = tag
        try:
            yield self
        finally:
            self._phase = prev

    @property
    def current_phase(self) -> str:
        return self._phase

    # -- randomness -------------------------------------------------------------

    def _raw64(self, unit, tag: str) -> int:
        msg = f"{self.seed}|{unit}|{tag}".encode()
        return int.from_bytes(hashlib.blake2b(msg, digest_size=8).digest(), "big")

    def uniform(self, unit, tag: str) -> float:
        """One 64-bit-uniform draw in [0, 1) from the (seed, unit, tag) stream."""
        return self._raw64(unit, tag) / _U64

    def exponential(self, unit, tag: str, lam: float) -> float:
        """Inverse-CDF exponential sample with rate lam."""
        if lam <= 0:
            raise LocaldError(f"exponential rate must be positive, got {lam}")
        u = self.uniform(unit, tag)
        return -math.log1p(-u) / lam

    def bernoulli(self, unit, tag: str, p: float) -> bool:
        """Probabilities are clipped to [0, 1] before sampling."""
        return self.uniform(unit, tag) < min(1.0, max(0.0, p))

    # -- parameters ---------------------------------------------------------------

    def params(self, eps: float, flavor: str = "ldd") -> LddParams:
        return derive_params(self.profile, self.n_tilde, eps, flavor)

    def intervals(self, eps: float, flavor: str = "ldd") -> list[tuple[int, int]]:
        return intervals(self.params(eps, flavor), flavor)

    # -- views ---------------------------------------------------------------------

    def gather_view(self, centre, r: int, live=None) -> View:
        """Gather N^r(centre) in the (live-restricted) topology.

        ``centre`` may be a vertex id or a set of vertex ids (a component
        gathers the union of its members' balls).  The ledger records r under
        the current phase tag with max semantics.
        """
        if r < 0:
            raise GraphError(f"gather radius must be non-negative, got {r}")
        sources = (centre,) if isinstance(centre, int) else tuple(sorted(centre))
        for s in sources:
            self.graph._check_vertex(s)
        self.ledger.charge(self._phase, r)
        dist = bfs_distances(self.graph, sources, live=live, max_depth=r)
        inside: tuple[int, ...] = ()
        boundary: tuple[int, ...] = ()
        if isinstance(self.topology, Hypergraph):
            ins, bnd = [], []
            for j, e in enumerate(self.topology.hyperedges):
                hit = sum(1 for v in e if v in dist)
                if hit == len(e):
                    ins.append(j)
                elif hit:
                    bnd.append(j)
            inside, boundary = tuple(ins), tuple(bnd)
        return View(
            centre=frozenset(sources),
            radius=r,
            dist=dist,
            inside_hyperedges=inside,
            boundary_hyperedges=boundary,
        )


def make_context(topology, n_tilde: int, seed: int, profile: ConstantProfile | str = "desk") -> SimContext:
    """Fresh context with a zeroed ledger; derived parameters computable on demand."""
    if isinstance(profile, str):
        profile = profile_from_name(profile)
    return SimContext(topology, n_tilde, seed, profile)
