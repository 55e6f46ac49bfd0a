"""Exact joint laws for small collections of dual-lattice edges.

A dual edge of the planar (sub)lattice is closed exactly when the primal edge
it crosses is closed.  The contour arguments only ever need joint closure
probabilities for a handful of edges around at most four primal vertices, so
everything here is computed exactly:

* UnG: an edge is closed iff neither endpoint chooses it, so closure events
  factor over vertices into "my choice set avoids these directions".
* BnG: closure is the complement of "both endpoints choose", handled by
  inclusion-exclusion over edge subsets; all-open events factor over vertices
  into "my choice set contains these directions".

A literal product-space enumerator over the incident vertices' choice sets
(LocalConfigSpace) is shipped alongside as the audit oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import comb
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple

from .budget import guard
from .errors import ValidationError
from .lattice import ModelSpec, Variant, Vertex

PrimalEdge = Tuple[Vertex, Vertex]
DualVertex = Tuple[int, int]  # (i, j) stands for the dual point (i+1/2, j+1/2)


def _direction_code(u: Vertex, v: Vertex) -> int:
    diff = [b - a for a, b in zip(u, v)]
    if sum(abs(x) for x in diff) != 1:
        raise ValidationError(f"{u} and {v} are not nearest neighbors")
    axis = next(i for i, x in enumerate(diff) if x != 0)
    return 2 * axis + (1 if diff[axis] > 0 else 0)


def _incidence(edges: Sequence[PrimalEdge]) -> Dict[Vertex, List[int]]:
    """Map each incident vertex to the direction codes of its path edges."""
    by_vertex: Dict[Vertex, List[int]] = {}
    for u, v in edges:
        by_vertex.setdefault(u, []).append(_direction_code(u, v))
        by_vertex.setdefault(v, []).append(_direction_code(v, u))
    for v, codes in by_vertex.items():
        if len(set(codes)) != len(codes):
            raise ValidationError(f"repeated edge at vertex {v}")
    return by_vertex


def all_closed_probability(spec: ModelSpec, edges: Sequence[PrimalEdge]) -> Fraction:
    """Exact probability that every listed primal edge is closed."""
    if spec.variant not in (Variant.UNG, Variant.BNG):
        raise ValidationError("dual-closure laws are implemented for UnG and BnG")
    by_vertex = _incidence(edges)
    two_d, k = spec.two_d, spec.k
    total = comb(two_d, k)
    if spec.variant is Variant.UNG:
        # closed = no endpoint chooses the edge: per vertex, avoid all its codes.
        prob = Fraction(1)
        for codes in by_vertex.values():
            prob *= Fraction(comb(two_d - len(codes), k), total)
        return prob
    # BnG: inclusion-exclusion over which edges are (bidirectionally) open.
    edge_list = list(edges)
    acc = Fraction(0)
    for r in range(len(edge_list) + 1):
        for subset in combinations(range(len(edge_list)), r):
            must = _incidence([edge_list[i] for i in subset]) if subset else {}
            term = Fraction(1)
            for codes in must.values():
                m = len(codes)
                if m > k:
                    term = Fraction(0)
                    break
                term *= Fraction(comb(two_d - m, k - m), total)
            acc += (-1) ** r * term
    return acc


def closed_edge_marginal(spec: ModelSpec) -> Fraction:
    """P(one primal edge closed): UnG (1 - k/2d)^2, BnG 1 - (k/2d)^2."""
    p = Fraction(spec.k, spec.two_d)
    if spec.variant is Variant.UNG:
        return (1 - p) ** 2
    if spec.variant is Variant.BNG:
        return 1 - p * p
    raise ValidationError("dual-closure laws are implemented for UnG and BnG")


# ---------------------------------------------------------------------------
# Named pair geometries.
# ---------------------------------------------------------------------------

#: Two dual edges sharing a dual vertex whose primal edges share a primal
#: vertex (the dual path turns); the only correlated pair geometry.
ORTHOGONAL_PAIR: Tuple[PrimalEdge, PrimalEdge] = (
    ((1, 0), (1, 1)),
    ((0, 1), (1, 1)),
)

#: Two collinear dual edges sharing a dual vertex; their primal edges are
#: parallel and vertex-disjoint, hence independent.
PARALLEL_PAIR: Tuple[PrimalEdge, PrimalEdge] = (
    ((1, 0), (1, 1)),
    ((0, 0), (0, 1)),
)

#: Far-apart dual edges; independent.
DISJOINT_PAIR: Tuple[PrimalEdge, PrimalEdge] = (
    ((1, 0), (1, 1)),
    ((5, 0), (5, 1)),
)

_GEOMETRIES = {
    "orthogonal-sharing-dual-vertex": ORTHOGONAL_PAIR,
    "parallel-adjacent": PARALLEL_PAIR,
    "disjoint": DISJOINT_PAIR,
}


def _embed(edge: PrimalEdge, d: int) -> PrimalEdge:
    """Embed a planar edge into Z^d (plane spanned by the first two axes)."""
    pad = (0,) * (d - 2)
    (a, b) = edge
    return (tuple(a) + pad, tuple(b) + pad)


def joint_dual_closed(spec: ModelSpec, geometry: str) -> Fraction:
    """Exact probability that both dual edges of the named geometry are closed.

    Supported models: the planar UnG cases and the BnG restricted to a
    two-dimensional plane of Z^d (vertices still choose among all 2d
    directions).
    """
    if geometry not in _GEOMETRIES:
        raise ValidationError(
            f"unsupported geometry {geometry!r}; expected one of {sorted(_GEOMETRIES)}"
        )
    if spec.d < 2:
        raise ValidationError("dual-edge geometries live in a plane (d >= 2)")
    e1, e2 = (_embed(e, spec.d) for e in _GEOMETRIES[geometry])
    return all_closed_probability(spec, (e1, e2))


# ---------------------------------------------------------------------------
# Dual paths.
# ---------------------------------------------------------------------------


def dual_edge_to_primal(a: DualVertex, b: DualVertex) -> PrimalEdge:
    """The unique primal edge crossing the dual edge a-b (2D)."""
    (x1, y1), (x2, y2) = a, b
    if abs(x1 - x2) + abs(y1 - y2) != 1:
        raise ValidationError("dual vertices are not adjacent")
    if y1 == y2:  # horizontal dual edge crosses a vertical primal edge
        x = max(x1, x2)
        return ((x, y1), (x, y1 + 1))
    y = max(y1, y2)
    return ((x1, y), (x1 + 1, y))


def dual_path_to_primal(path: Sequence[DualVertex]) -> List[PrimalEdge]:
    if len(path) < 2:
        raise ValidationError("a dual path needs at least two vertices")
    if len(set(path)) != len(path):
        raise ValidationError("dual path must be self-avoiding")
    return [dual_edge_to_primal(a, b) for a, b in zip(path, path[1:])]


def path_closed_probability(spec: ModelSpec, path: Sequence[DualVertex]) -> Fraction:
    """Exact probability that a given self-avoiding dual path is fully closed."""
    return all_closed_probability(spec, dual_path_to_primal(path))


def enumerate_dual_paths(length: int) -> Iterator[Tuple[DualVertex, ...]]:
    """All self-avoiding dual paths of the given edge count from a fixed root.

    Fixing the first step kills the symmetries that a joint closure law cannot
    see; every geometry of K consecutive dual edges appears.
    """
    if length < 1:
        raise ValidationError("path length must be >= 1")
    if length > 8:
        raise ValidationError("dual path enumeration is supported for K <= 8")
    start: DualVertex = (0, 0)
    first: DualVertex = (1, 0)

    def extend(path: List[DualVertex]) -> Iterator[Tuple[DualVertex, ...]]:
        if len(path) == length + 1:
            yield tuple(path)
            return
        x, y = path[-1]
        for nxt in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if nxt not in path:
                path.append(nxt)
                yield from extend(path)
                path.pop()

    yield from extend([start, first])


def path_closed_bound(spec: ModelSpec, length: int) -> Fraction:
    """Max over all length-K dual path geometries of the exact closure law.

    Each geometry is asserted to be at most marginal^K on the way, which is
    the inequality the contour argument consumes.
    """
    marginal = closed_edge_marginal(spec)
    best = Fraction(0)
    for path in enumerate_dual_paths(length):
        p = all_closed_probability(spec, dual_path_to_primal(path))
        assert p <= marginal ** length, (path, p)
        best = max(best, p)
    return best


# ---------------------------------------------------------------------------
# Literal enumeration oracle.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalConfigSpace:
    """Product space of the choice sets of finitely many vertices.

    Iterates every joint assignment (C(2d,k)^#vertices cases, each weighted
    equally); exists so the fast factorized laws above can be audited case by
    case.
    """

    spec: ModelSpec
    vertices: Tuple[Vertex, ...]

    def case_count(self) -> int:
        return comb(self.spec.two_d, self.spec.k) ** len(self.vertices)

    def assignments(self) -> Iterator[Dict[Vertex, frozenset]]:
        subsets = [
            frozenset(c) for c in combinations(range(self.spec.two_d), self.spec.k)
        ]
        for combo in product(subsets, repeat=len(self.vertices)):
            yield dict(zip(self.vertices, combo))


def all_closed_by_enumeration(spec: ModelSpec, edges: Sequence[PrimalEdge]) -> Fraction:
    """Oracle: exhaust the incident vertices' choice sets and count closed cases."""
    by_vertex = _incidence(edges)
    vertices = tuple(sorted(by_vertex))
    space = LocalConfigSpace(spec, vertices)
    guard(space.case_count() * len(edges), "local joint enumeration")
    closed_cases = 0
    for assignment in space.assignments():
        ok = True
        for u, v in edges:
            fwd = _direction_code(u, v) in assignment[u]
            back = _direction_code(v, u) in assignment[v]
            is_open = (fwd or back) if spec.variant is Variant.UNG else (fwd and back)
            if is_open:
                ok = False
                break
        closed_cases += ok
    return Fraction(closed_cases, space.case_count())
