"""Packing/covering ILP instances, local restrictions, and exact solves.

Coefficients and bounds are exact rationals (``fractions.Fraction``); no
floating point enters any feasibility decision.  Assignments are plain tuples
of 0/1 ints.  Instances are immutable and shareable; ``brute_force_opt`` is a
pure function of its inputs, so independent solves may run in parallel.
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BruteForceCapExceeded, IlpError, InfeasibleError
from .graph import Graph, Hypergraph, gaifman_graph

DEFAULT_BF_CAP = 28

#: Free-variable count at or below which solves enumerate with numpy instead
#: of branch and bound.
_ENUM_LIMIT = 16

Assignment = tuple  # tuple of 0/1 ints, one per variable


class Sense(enum.Enum):
    PACKING = "packing"
    COVERING = "covering"


class Status(enum.IntEnum):
    FREE = 0
    FIXED_ONE = 1
    DELETED_ZERO = 2


@dataclass(frozen=True)
class Constraint:
    """One row: sum of coeffs[i] * x[support[i]] compared against bound."""

    support: tuple[int, ...]
    coeffs: tuple[Fraction, ...]
    bound: Fraction

    def scaled(self) -> tuple[tuple[int, ...], int]:
        """Integer coefficients and bound after clearing denominators."""
        k = 1
        for c in self.coeffs:
            k = k * c.denominator // math.gcd(k, c.denominator)
        k = k * self.bound.denominator // math.gcd(k, self.bound.denominator)
        return tuple(int(c * k) for c in self.coeffs), int(self.bound * k)


class IlpInstance:
    """A 0/1 packing or covering integer linear program."""

    __slots__ = ("sense", "var_count", "weights", "constraints")

    def __init__(self, sense: Sense, var_count: int, weights, constraints):
        if var_count < 0:
            raise IlpError("var_count must be non-negative")
        w = tuple(int(x) for x in weights)
        if len(w) != var_count:
            raise IlpError(f"expected {var_count} weights, got {len(w)}")
        if any(x < 0 for x in w):
            raise IlpError("weights must be non-negative")
        if sum(w) >= 2**63:
            raise IlpError("total weight exceeds machine-integer budget")
        rows = []
        for j, c in enumerate(constraints):
            support = tuple(c.support)
            if len(set(support)) != len(support):
                raise IlpError(f"constraint {j}: duplicate variables in support")
            if not support:
                raise IlpError(f"constraint {j}: empty support")
            for v in support:
                if not 0 <= v < var_count:
                    raise IlpError(f"constraint {j}: variable {v} out of range")
            coeffs = tuple(Fraction(x) for x in c.coeffs)
            if len(coeffs) != len(support):
                raise IlpError(f"constraint {j}: coeffs/support length mismatch")
            if any(x <= 0 for x in coeffs):
                raise IlpError(f"constraint {j}: coefficients must be strictly positive")
            bound = Fraction(c.bound)
            if bound < 0:
                raise IlpError(f"constraint {j}: bound must be non-negative")
            rows.append(Constraint(support, coeffs, bound))
        self.sense = sense
        self.var_count = var_count
        self.weights = w
        self.constraints = tuple(rows)

    def __eq__(self, other):
        return (
            isinstance(other, IlpInstance)
            and self.sense == other.sense
            and self.var_count == other.var_count
            and self.weights == other.weights
            and self.constraints == other.constraints
        )

    def __repr__(self):
        return f"IlpInstance({self.sense.value}, n={self.var_count}, m={len(self.constraints)})"


def make_instance(sense, var_count, weights, rows) -> IlpInstance:
    """Build an instance from (vars, coeffs, bound) triples."""
    cons = [Constraint(tuple(s), tuple(Fraction(x) for x in c), Fraction(b)) for s, c, b in rows]
    return IlpInstance(Sense(sense) if not isinstance(sense, Sense) else sense, var_count, weights, cons)


# -- JSON round-trip ----------------------------------------------------------


def _num_to_json(x: Fraction):
    if x.denominator == 1:
        return int(x)
    f = float(x)
    if Fraction(f) == x:
        return f
    return f"{x.numerator}/{x.denominator}"


def _num_from_json(x) -> Fraction:
    if isinstance(x, str):
        num, den = x.split("/")
        return Fraction(int(num), int(den))
    return Fraction(x)


def instance_to_json(inst: IlpInstance) -> str:
    doc = {
        "sense": inst.sense.value,
        "n": inst.var_count,
        "weights": list(inst.weights),
        "constraints": [
            {
                "vars": list(c.support),
                "coeffs": [_num_to_json(x) for x in c.coeffs],
                "bound": _num_to_json(c.bound),
            }
            for c in inst.constraints
        ],
    }
    return json.dumps(doc, sort_keys=True)


def instance_from_json(text: str) -> IlpInstance:
    doc = json.loads(text)
    return make_instance(
        doc["sense"],
        doc["n"],
        doc["weights"],
        [
            (tuple(c["vars"]), tuple(_num_from_json(x) for x in c["coeffs"]), _num_from_json(c["bound"]))
            for c in doc["constraints"]
        ],
    )


# -- fixed/free state ---------------------------------------------------------


class FixedState:
    """Per-variable Free / FixedOne / DeletedZero status.

    A variable never transitions out of FixedOne or DeletedZero; violating
    calls raise.  Setting the same terminal status twice is a no-op.
    """

    __slots__ = ("status",)

    def __init__(self, status):
        self.status = list(status)

    @classmethod
    def all_free(cls, n: int) -> "FixedState":
        return cls([Status.FREE] * n)

    def copy(self) -> "FixedState":
        return FixedState(self.status)

    def is_free(self, v: int) -> bool:
        return self.status[v] == Status.FREE

    def fix_one(self, v: int) -> None:
        if self.status[v] == Status.DELETED_ZERO:
            raise IlpError(f"variable {v} is DeletedZero and cannot become FixedOne")
        self.status[v] = Status.FIXED_ONE

    def delete_zero(self, v: int) -> None:
        if self.status[v] == Status.FIXED_ONE:
            raise IlpError(f"variable {v} is FixedOne and cannot become DeletedZero")
        self.status[v] = Status.DELETED_ZERO

    def ones(self):
        return [v for v, s in enumerate(self.status) if s == Status.FIXED_ONE]

    def signature(self, variables) -> tuple:
        """Hashable summary of non-free statuses among the given variables."""
        return tuple((v, int(self.status[v])) for v in sorted(variables) if self.status[v] != Status.FREE)


# -- hypergraph view ----------------------------------------------------------


def associated_hypergraph(inst: IlpInstance) -> Hypergraph:
    """One hyperedge per constraint, equal to its support; vertices = variables."""
    return Hypergraph(inst.var_count, [c.support for c in inst.constraints])


# -- local restriction --------------------------------------------------------


@dataclass(frozen=True)
class LocalInstance:
    """A restriction of a parent instance to a ground set of variables.

    ``origin[i]`` is the parent constraint index of local constraint i, the
    id-translation back to the parent.
    """

    parent: IlpInstance
    ground: tuple[int, ...]
    constraints: tuple[Constraint, ...]
    origin: tuple[int, ...]

    @property
    def sense(self) -> Sense:
        return self.parent.sense


def local_restrict(inst: IlpInstance, S) -> LocalInstance:
    """Restrict to S: packing keeps intersecting constraints with outside
    variables zeroed; covering keeps only constraints fully inside S."""
    Sset = frozenset(S)
    for v in Sset:
        if not 0 <= v < inst.var_count:
            raise IlpError(f"restriction variable {v} out of range")
    kept, origin = [], []
    for j, c in enumerate(inst.constraints):
        if inst.sense == Sense.PACKING:
            pairs = [(v, a) for v, a in zip(c.support, c.coeffs) if v in Sset]
            if not pairs:
                continue
            kept.append(Constraint(tuple(v for v, _ in pairs), tuple(a for _, a in pairs), c.bound))
            origin.append(j)
        else:
            if all(v in Sset for v in c.support):
                kept.append(c)
                origin.append(j)
    return LocalInstance(inst, tuple(sorted(Sset)), tuple(kept), tuple(origin))


# -- weights and feasibility --------------------------------------------------


def weight(a: Assignment, S, w) -> int:
    """W(a, S) = sum over v in S of w[v] * a[v], exact integer."""
    return sum(w[v] * a[v] for v in S)


def feasible(inst: IlpInstance, a: Assignment) -> list[tuple[int, Fraction]]:
    """Violated constraint indices with achieved values; empty iff feasible."""
    if len(a) != inst.var_count:
        raise IlpError(f"assignment length {len(a)} != var_count {inst.var_count}")
    out = []
    for j, c in enumerate(inst.constraints):
        lhs = sum(coef * a[v] for v, coef in zip(c.support, c.coeffs))
        ok = lhs <= c.bound if inst.sense == Sense.PACKING else lhs >= c.bound
        if not ok:
            out.append((j, lhs))
    return out


# -- exact local optimisation -------------------------------------------------


def brute_force_opt(local: LocalInstance, fixed: FixedState | None = None, cap: int = DEFAULT_BF_CAP) -> Assignment:
    """Exact optimum of a local instance over all completions respecting fixed.

    FixedOne variables are 1, DeletedZero are 0, variables outside the ground
    set are 0.  Packing maximizes and covering minimizes total weight over the
    ground set.  Raises InfeasibleError for unsatisfiable covering restrictions
    and BruteForceCapExceeded when the free count exceeds the cap.
    """
    inst = local.parent
    if fixed is None:
        fixed = FixedState.all_free(inst.var_count)
    free = [v for v in local.ground if fixed.status[v] == Status.FREE]
    forced_one = frozenset(v for v in local.ground if fixed.status[v] == Status.FIXED_ONE)
    if len(free) > cap:
        raise BruteForceCapExceeded(
            f"{len(free)} free variables in a ground set of {len(local.ground)} exceeds cap {cap}"
        )

    # integer-scaled rows: (coeff per free var, residual bound after fixed ones)
    rows = []
    for c in local.constraints:
        coeffs, bound = c.scaled()
        by_var = dict(zip(c.support, coeffs))
        base = sum(by_var[v] for v in c.support if v in forced_one)
        rows.append(([by_var.get(v, 0) for v in free], bound - base))

    w = [inst.weights[v] for v in free]
    maximize = inst.sense == Sense.PACKING

    if len(free) <= _ENUM_LIMIT:
        choice = _enumerate_opt(rows, w, maximize)
    else:
        choice = _branch_and_bound(rows, w, maximize)
    if choice is None:
        raise InfeasibleError(
            f"{inst.sense.value} restriction to {len(local.ground)} variables has no feasible completion"
        )

    values = [0] * inst.var_count
    for v in forced_one:
        values[v] = 1
    for v, bit in zip(free, choice):
        values[v] = bit
    return tuple(values)


def _enumerate_opt(rows, w, maximize):
    """Vectorized exhaustive enumeration over <= _ENUM_LIMIT free variables."""
    k = len(w)
    patterns = np.arange(1 << k, dtype=np.int64)
    bits = (patterns[:, None] >> np.arange(k)) & 1
    ok = np.ones(1 << k, dtype=bool)
    for coeffs, bound in rows:
        lhs = bits @ np.asarray(coeffs, dtype=np.int64)
        ok &= (lhs <= bound) if maximize else (lhs >= bound)
    if not ok.any():
        return None
    weights = bits @ np.asarray(w, dtype=np.int64)
    weights = np.where(ok, weights, -1 if maximize else np.iinfo(np.int64).max)
    best = int(np.argmax(weights) if maximize else np.argmin(weights))
    return [int(b) for b in bits[best]]


def _branch_and_bound(rows, w, maximize):
    """Exact DFS with weight and constraint-satisfiability pruning."""
    k = len(w)
    order = sorted(range(k), key=lambda i: -w[i])
    coeff_cols = [[rows[j][0][i] for j in range(len(rows))] for i in order]
    bounds = [b for _, b in rows]
    wts = [w[i] for i in order]
    suffix_w = [0] * (k + 1)
    for i in range(k - 1, -1, -1):
        suffix_w[i] = suffix_w[i + 1] + wts[i]
    # per constraint: total coefficient mass of variables at positions >= i
    suffix_c = [[0] * len(rows) for _ in range(k + 1)]
    for i in range(k - 1, -1, -1):
        suffix_c[i] = [suffix_c[i + 1][j] + coeff_cols[i][j] for j in range(len(rows))]

    best_val = None
    best_choice = None
    lhs = [0] * len(rows)
    choice = [0] * k

    def ok_zero(i):
        # covering: a constraint must stay reachable using positions > i
        sc = suffix_c[i + 1]
        return all(lhs[j] + sc[j] >= bounds[j] for j in range(len(rows)))

    def ok_one(i):
        col = coeff_cols[i]
        if maximize:
            return all(lhs[j] + col[j] <= bounds[j] for j in range(len(rows)))
        return True

    def rec(i, cur):
        nonlocal best_val, best_choice
        if maximize and best_val is not None and cur + suffix_w[i] <= best_val:
            return
        if not maximize and best_val is not None and cur >= best_val:
            return
        if i == k:
            if not maximize and any(lhs[j] < bounds[j] for j in range(len(rows))):
                return
            if best_val is None or (cur > best_val if maximize else cur < best_val):
                best_val = cur
                best_choice = choice.copy()
            return
        col = coeff_cols[i]
        if ok_one(i):
            choice[i] = 1
            for j in range(len(rows)):
                lhs[j] += col[j]
            rec(i + 1, cur + wts[i])
            for j in range(len(rows)):
                lhs[j] -= col[j]
            choice[i] = 0
        if maximize or ok_zero(i):
            rec(i + 1, cur)

    rec(0, 0)
    if best_choice is None:
        return None
    out = [0] * k
    for pos, i in enumerate(order):
        out[i] = best_choice[pos]
    return out


def solve_on(inst: IlpInstance, S, fixed: FixedState | None = None, cap: int = DEFAULT_BF_CAP,
             cache: dict | None = None) -> Assignment:
    """``brute_force_opt(local_restrict(inst, S))`` with optional memoisation.

    The cache key includes the non-free statuses inside S, so entries stay
    valid as the pipeline fixes more variables elsewhere.
    """
    Sset = frozenset(S)
    if cache is not None:
        key = (Sset, fixed.signature(Sset) if fixed is not None else ())
        hit = cache.get(key)
        if hit is not None:
            return hit
    result = brute_force_opt(local_restrict(inst, Sset), fixed, cap)
    if cache is not None:
        cache[key] = result
    return result


# -- bounded-integer reduction -------------------------------------------------


class BoundedIntInstance:
    """Like IlpInstance but each variable ranges over 0..cap[v], cap >= 1."""

    __slots__ = ("sense", "var_count", "weights", "caps", "constraints")

    def __init__(self, sense: Sense, var_count: int, weights, caps, constraints):
        base = IlpInstance(sense, var_count, weights, constraints)
        caps = tuple(int(c) for c in caps)
        if len(caps) != var_count or any(c < 1 for c in caps):
            raise IlpError("each variable needs an integer range cap >= 1")
        self.sense = base.sense
        self.var_count = base.var_count
        self.weights = base.weights
        self.caps = caps
        self.constraints = base.constraints


@dataclass(frozen=True)
class BitCodec:
    """Maps binary-instance assignments back to bounded-integer values."""

    caps: tuple[int, ...]
    groups: tuple[tuple[int, ...], ...]  # bit variable ids per original variable, LSB first
    clamp: bool

    def decode(self, a: Assignment) -> tuple[int, ...]:
        out = []
        for cap, bits in zip(self.caps, self.groups):
            val = sum(a[b] << k for k, b in enumerate(bits))
            out.append(min(val, cap) if self.clamp else val)
        return tuple(out)


def binarize(general: BoundedIntInstance) -> tuple[IlpInstance, BitCodec]:
    """Expand each 0..cap variable into ceil(log2(cap+1)) bit variables.

    Weights and coefficients scale by powers of two.  Out-of-range bit patterns
    are excluded by one extra packing constraint per affected variable; that
    upper bound is not expressible in covering form, so for covering the codec
    clamps decoded values to the cap and a warning is emitted whenever cap+1 is
    not a power of two (decoded optima can then differ from the true
    bounded-integer optimum).
    """
    groups = []
    weights = []
    nxt = 0
    for v in range(general.var_count):
        nbits = max(1, math.ceil(math.log2(general.caps[v] + 1)))
        groups.append(tuple(range(nxt, nxt + nbits)))
        weights.extend(general.weights[v] << k for k in range(nbits))
        nxt += nbits
    if sum(weights) >= 2**63:
        raise IlpError("binarize: scaled weights overflow the machine-integer budget")

    rows = []
    for c in general.constraints:
        support, coeffs = [], []
        for v, a in zip(c.support, c.coeffs):
            for k, b in enumerate(groups[v]):
                support.append(b)
                coeffs.append(a * (1 << k))
        rows.append(Constraint(tuple(support), tuple(coeffs), c.bound))

    clamp = False
    for v in range(general.var_count):
        top = (1 << len(groups[v])) - 1
        if top == general.caps[v]:
            continue
        if general.sense == Sense.PACKING:
            rows.append(
                Constraint(groups[v], tuple(Fraction(1 << k) for k in range(len(groups[v]))), Fraction(general.caps[v]))
            )
        else:
            clamp = True
    if clamp:
        warnings.warn(
            "binarize: covering variables with non-power-of-two ranges are decoded "
            "by clamping; decoded optima may deviate from the bounded-integer optimum",
            stacklevel=2,
        )
    binary = IlpInstance(general.sense, nxt, weights, rows)
    return binary, BitCodec(general.caps, tuple(groups), clamp or general.sense == Sense.COVERING)


# -- standard graph-problem encodings ------------------------------------------


def mis_instance(G: Graph, weights=None) -> IlpInstance:
    """Maximum(-weight) independent set as a packing program."""
    w = weights if weights is not None else [1] * G.n
    return make_instance(Sense.PACKING, G.n, w, [((u, v), (1, 1), 1) for u, v in G.edges()])


def vertex_cover_instance(G: Graph, weights=None) -> IlpInstance:
    """Minimum(-weight) vertex cover as a covering program."""
    w = weights if weights is not None else [1] * G.n
    return make_instance(Sense.COVERING, G.n, w, [((u, v), (1, 1), 1) for u, v in G.edges()])


def dominating_set_instance(G: Graph, weights=None) -> IlpInstance:
    """Minimum(-weight) dominating set as a covering program."""
    w = weights if weights is not None else [1] * G.n
    rows = []
    for v in range(G.n):
        closed = tuple(sorted({v, *G.adjacency[v]}))
        rows.append((closed, (1,) * len(closed), 1))
    return make_instance(Sense.COVERING, G.n, w, rows)
