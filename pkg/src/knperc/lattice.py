"""Z^d geometry, the per-vertex neighbor-choice field, and edge-rule variants.

Each vertex of Z^d independently picks a uniform k-subset of its 2d nearest
neighbors (the axis directions).  Four graphs are built from the same choice
field:

* DnG -- a directed edge to each chosen neighbor,
* UnG -- the undirected edge {u, v} is open when u picks v OR v picks u,
* BnG -- open when both pick each other,
* XnG -- open when exactly one picks the other.

All single-edge, pair and degree laws are carried as exact rationals;
floating point only appears at reporting boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import comb
from typing import Dict, FrozenSet, Iterable, Optional, Tuple

from .errors import ValidationError
from .rng import direction_shuffle

Vertex = Tuple[int, ...]


class Variant(str, Enum):
    DNG = "dng"
    UNG = "ung"
    BNG = "bng"
    XNG = "xng"

    @classmethod
    def coerce(cls, value: "Variant | str") -> "Variant":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValidationError(f"unknown variant {value!r}; expected one of dng/ung/bng/xng")


@dataclass(frozen=True, order=True)
class Direction:
    """One of the 2d axis directions of Z^d.  Ordering is (axis, sign)."""

    axis: int
    sign: int

    def __neg__(self) -> "Direction":
        return Direction(self.axis, -self.sign)

    @property
    def code(self) -> int:
        """Dense code 2*axis + (sign > 0); code ^ 1 is the opposite direction."""
        return 2 * self.axis + (1 if self.sign > 0 else 0)

    @classmethod
    def from_code(cls, code: int) -> "Direction":
        return cls(code // 2, 1 if code & 1 else -1)


def all_directions(d: int) -> Tuple[Direction, ...]:
    return tuple(Direction.from_code(c) for c in range(2 * d))


def ell1(v: Vertex) -> int:
    return sum(abs(c) for c in v)


def linf(v: Vertex) -> int:
    return max(abs(c) for c in v)


def neighbor(v: Vertex, code: int) -> Vertex:
    axis, up = code // 2, code & 1
    delta = 1 if up else -1
    return v[:axis] + (v[axis] + delta,) + v[axis + 1:]


@dataclass(frozen=True)
class ModelSpec:
    """Model parameters: dimension d, neighbors chosen k, edge rule, master seed."""

    d: int
    k: int
    variant: Variant = Variant.DNG
    master_seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", Variant.coerce(self.variant))
        if self.d < 1:
            raise ValidationError(f"dimension d must be >= 1, got {self.d}")
        if not 1 <= self.k <= 2 * self.d:
            raise ValidationError(f"need 1 <= k <= 2d, got k={self.k}, d={self.d}")
        if not 0 <= self.master_seed < (1 << 64):
            raise ValidationError("master_seed must be an unsigned 64-bit integer")

    @property
    def two_d(self) -> int:
        return 2 * self.d


ChoiceSet = FrozenSet[Direction]


class ChoiceField:
    """Lazy deterministic map vertex -> full direction shuffle.

    The configuration is a pure function of (spec.master_seed, vertex); the
    memo only caches what exploration touches.  A field is scoped to one
    Monte Carlo trial so distinct trials stay independent.
    """

    def __init__(self, spec: ModelSpec):
        self.spec = spec
        self._shuffles: Dict[Vertex, Tuple[int, ...]] = {}
        self._choices: Dict[Vertex, FrozenSet[int]] = {}

    def shuffle(self, v: Vertex) -> Tuple[int, ...]:
        perm = self._shuffles.get(v)
        if perm is None:
            perm = direction_shuffle(self.spec.master_seed, v, self.spec.two_d)
            self._shuffles[v] = perm
        return perm

    def choice_codes(self, v: Vertex, k: Optional[int] = None) -> FrozenSet[int]:
        """Direction codes chosen by v: the first k entries of its shuffle."""
        if k is None or k == self.spec.k:
            cached = self._choices.get(v)
            if cached is None:
                cached = frozenset(self.shuffle(v)[: self.spec.k])
                self._choices[v] = cached
            return cached
        if not 1 <= k <= self.spec.two_d:
            raise ValidationError(f"need 1 <= k <= 2d, got k={k}")
        return frozenset(self.shuffle(v)[:k])


def sample_choice(field: ChoiceField, v: Vertex) -> ChoiceSet:
    """The uniform k-subset of directions chosen by v (memoized, deterministic)."""
    return frozenset(Direction.from_code(c) for c in field.choice_codes(v))


def edge_open(field: ChoiceField, u: Vertex, direction: "Direction | int") -> bool:
    """Whether the (directed or undirected) edge at u in the given direction is open.

    DnG asks about the directed edge (u, u+dir); the undirected variants ask
    about {u, u+dir}.
    """
    code = direction.code if isinstance(direction, Direction) else int(direction)
    forward = code in field.choice_codes(u)
    variant = field.spec.variant
    if variant is Variant.DNG:
        return forward
    backward = (code ^ 1) in field.choice_codes(neighbor(u, code))
    if variant is Variant.UNG:
        return forward or backward
    if variant is Variant.BNG:
        return forward and backward
    return forward ^ backward  # XnG


def edge_open_probability(spec: ModelSpec) -> Fraction:
    """Exact single-edge open probability for the spec's variant."""
    d, k = spec.d, spec.k
    if spec.variant is Variant.DNG:
        return Fraction(k, 2 * d)
    if spec.variant is Variant.UNG:
        return Fraction(k * (4 * d - k), 4 * d * d)
    if spec.variant is Variant.BNG:
        return Fraction(k * k, 4 * d * d)
    return Fraction(k * (2 * d - k), 2 * d * d)  # XnG


class PairRelation(str, Enum):
    """Supported two-edge relations for pair_probability.

    DIRECTED_SAME_SOURCE returns a conditional probability; the adjacent
    relations return the joint open probability; DISJOINT returns the product
    of marginals.
    """

    DIRECTED_SAME_SOURCE = "directed-same-source"
    BNG_ADJACENT = "bng-adjacent-undirected"
    UNG_ADJACENT = "ung-adjacent-undirected"
    XNG_ADJACENT = "xng-adjacent-undirected"
    DISJOINT = "disjoint"


def pair_probability(spec: ModelSpec, relation: "PairRelation | str") -> Fraction:
    """Exact pair law for two edges in the stated relation.

    * directed-same-source (DnG): P(second directed edge open | first open)
      for two edges out of one vertex, (k-1)/(2d-1).
    * bng-adjacent-undirected (BnG): joint open probability of two undirected
      edges sharing a vertex.
    * ung-adjacent-undirected (UnG): same, computed by exact conditioning on
      the shared vertex's choice set.
    * xng-adjacent-undirected (XnG, k >= 2): same, closed form.
    * disjoint (any variant): product of marginals (vertex-disjoint edges are
      independent).
    """
    relation = PairRelation(relation)
    d, k = spec.d, spec.k
    if relation is PairRelation.DISJOINT:
        return edge_open_probability(spec) ** 2
    if relation is PairRelation.DIRECTED_SAME_SOURCE:
        if spec.variant is not Variant.DNG:
            raise ValidationError("directed-same-source is defined for DnG only")
        return Fraction(k - 1, 2 * d - 1)
    if relation is PairRelation.BNG_ADJACENT:
        if spec.variant is not Variant.BNG:
            raise ValidationError("bng-adjacent-undirected is defined for BnG only")
        return Fraction(k * (k - 1), 2 * d * (2 * d - 1)) * Fraction(k * k, 4 * d * d)
    if relation is PairRelation.UNG_ADJACENT:
        if spec.variant is not Variant.UNG:
            raise ValidationError("ung-adjacent-undirected is defined for UnG only")
        return _ung_adjacent_joint(d, k)
    if spec.variant is not Variant.XNG:
        raise ValidationError("xng-adjacent-undirected is defined for XnG only")
    if k < 2:
        raise ValidationError("the XnG adjacent pair law is stated for k >= 2")
    num = (2 * d - k) * (k * (4 * k - 1) * (2 * d - k) - k * k)
    return Fraction(num, 8 * d ** 3 * (2 * d - 1))


def _ung_adjacent_joint(d: int, k: int) -> Fraction:
    # Condition on how many of the two shared-vertex directions x chose
    # (hypergeometric); given that, the two reciprocation events are
    # independent across the two distinct far endpoints.
    total = comb(2 * d, k)
    h2 = Fraction(comb(2 * d - 2, k - 2), total) if k >= 2 else Fraction(0)
    h1 = Fraction(comb(2 * d - 2, k - 1), total) if k >= 1 else Fraction(0)
    h0 = Fraction(comb(2 * d - 2, k), total)
    back = Fraction(k, 2 * d)
    return h2 + 2 * h1 * back + h0 * back * back


def _binomial_pmf(n: int, p: Fraction) -> Tuple[Fraction, ...]:
    q = 1 - p
    return tuple(comb(n, i) * p ** i * q ** (n - i) for i in range(n + 1))


def degree_pmf(spec: ModelSpec) -> Tuple[Fraction, ...]:
    """Exact degree distribution on {0..2d} (outdegree for DnG).

    DnG: point mass at k.  BnG: Binomial(k, k/2d).  UnG: k + Binomial(2d-k,
    k/2d).  XnG has no closed form in the source material; it is the exact
    convolution of Binomial(k, 1-k/2d) (chosen neighbors that do not
    reciprocate) and Binomial(2d-k, k/2d) (unchosen neighbors that point back),
    which are conditionally independent given the vertex's own choice set.
    """
    d, k = spec.d, spec.k
    size = 2 * d + 1
    if spec.variant is Variant.DNG:
        return tuple(Fraction(1) if i == k else Fraction(0) for i in range(size))
    back = Fraction(k, 2 * d)
    if spec.variant is Variant.BNG:
        pmf = _binomial_pmf(k, back)
        return pmf + (Fraction(0),) * (size - len(pmf))
    if spec.variant is Variant.UNG:
        extra = _binomial_pmf(2 * d - k, back)
        out = [Fraction(0)] * size
        for i, p in enumerate(extra):
            out[k + i] = p
        return tuple(out)
    # XnG: convolution of the two conditional binomials.
    a = _binomial_pmf(k, 1 - back)
    b = _binomial_pmf(2 * d - k, back)
    out = [Fraction(0)] * size
    for i, pa in enumerate(a):
        for j, pb in enumerate(b):
            out[i + j] += pa * pb
    return tuple(out)


def degree_mean(spec: ModelSpec) -> Fraction:
    pmf = degree_pmf(spec)
    return sum((Fraction(i) * p for i, p in enumerate(pmf)), Fraction(0))
