"""Randomized coupling from a (k+1)-choice field in d+1 dimensions to a
k-choice field in d dimensions.

For each projected vertex x' of Z^d the kernel looks at the column of source
vertices (x', level) perpendicular to Z^d:

* Step 1 -- if the source vertex at the current level has at least k open
  planar edges, keep a uniform k-subset of them (all tagged with that level).
* Step 2 -- otherwise exactly k-1 planar edges are open and both vertical
  edges must be open; pick a vertical direction uniformly, walk the column
  level by level, and adopt the first planar direction not already present,
  tagged with the level where it was found.

The derived choice sets are uniform k-subsets, iid over vertices, and any
derived connection is witnessed by a directed open path in the source graph
(the explicit certificate built below), which is what makes boundary-reach
monotone along the (k, d) -> (k+1, d+1) diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .errors import BudgetExceededError, ValidationError
from .explore import BoxRegion, ClusterResult, explore, linf
from .lattice import ChoiceField, Direction, ModelSpec, Variant, Vertex, neighbor
from .rng import bounded_int, derive_seed, vertex_seed


@dataclass(frozen=True)
class DerivedChoice:
    """k distinct planar directions, each tagged with its discovery level."""

    directions: Tuple[Direction, ...]
    levels: Tuple[int, ...]
    depth: int  # vertical steps walked by the repeat loop (0 when Step 1 fired)

    def __post_init__(self) -> None:
        assert len(self.directions) == len(self.levels)
        assert len(set(self.directions)) == len(self.directions)


class ColumnField:
    """Lazy view of a (k+1, d+1) directed choice field through its columns.

    Auxiliary kernel randomness is a per-column hash stream, so derived
    choices do not depend on exploration order.
    """

    def __init__(self, k: int, d: int, field_seed: int, aux_seed: int,
                 level_budget: int = 100_000):
        if k < 1 or d < 1:
            raise ValidationError("need k >= 1 and d >= 1")
        self.k = k
        self.d = d
        self.source_spec = ModelSpec(d + 1, k + 1, Variant.DNG, field_seed)
        self.field = ChoiceField(self.source_spec)
        self.aux_seed = aux_seed
        self.level_budget = level_budget

    def source_choice(self, x: Vertex, level: int) -> frozenset:
        return self.field.choice_codes(x + (level,))


def derive_choice(col: ColumnField, x: Vertex, start_level: int) -> DerivedChoice:
    """Run the coupling kernel for one projected vertex at the given level."""
    k, d = col.k, col.d
    planar_limit = 2 * d  # codes < 2d are planar; 2d / 2d+1 are down / up
    codes = col.source_choice(x, start_level)
    planar = sorted(c for c in codes if c < planar_limit)
    h = vertex_seed(col.aux_seed, x)
    counter = 0

    if len(planar) >= k:
        # Step 1: uniform k-subset of the open planar edges.  There are at
        # most k+1 of them, so at most one needs to be dropped.
        if len(planar) > k:
            drop, counter = bounded_int(h, counter, len(planar))
            planar.pop(drop)
        dirs = tuple(Direction.from_code(c) for c in planar)
        return DerivedChoice(dirs, (start_level,) * k, 0)

    # Step 2: with k+1 choices and at most two vertical directions, fewer
    # than k planar edges forces exactly k-1 planar plus both verticals.
    if len(planar) != k - 1:
        raise AssertionError(f"impossible planar count {len(planar)} for k={k}")
    if not {planar_limit, planar_limit + 1} <= set(codes):
        raise AssertionError("Step 2 entered without both vertical edges open")
    pick, counter = bounded_int(h, counter, 2)
    step = 1 if pick else -1
    base = set(planar)
    level = start_level
    depth = 0
    while True:
        level += step
        depth += 1
        if depth > col.level_budget:
            raise BudgetExceededError(
                f"column walk at {x} exceeded level budget {col.level_budget}"
            )
        codes_here = col.source_choice(x, level)
        fresh = sorted(c for c in codes_here if c < planar_limit and c not in base)
        if fresh:
            r, counter = bounded_int(h, counter, len(fresh))
            found = fresh[r]
            break
        # Nothing new: all planar choices here repeat the base set, so both
        # verticals are open and the walk can continue along the open arrow.
        if not {planar_limit, planar_limit + 1} <= set(codes_here):
            raise AssertionError("column walk lost its vertical arrows")
    dirs = tuple(Direction.from_code(c) for c in planar) + (Direction.from_code(found),)
    levels = (start_level,) * (k - 1) + (level,)
    return DerivedChoice(dirs, levels, depth)


# ---------------------------------------------------------------------------
# Coupled exploration with containment certificates.
# ---------------------------------------------------------------------------


@dataclass
class CoupledTrial:
    """One coupled trial: derived d-dimensional cluster vs source cluster."""

    derived: ClusterResult
    source: ClusterResult
    certificate: Optional[List[Vertex]]  # source path origin -> boundary
    certificate_valid: Optional[bool]


def _certificate_path(
    col: ColumnField,
    hops: List[Tuple[Vertex, int, Direction, int]],
) -> List[Vertex]:
    """Lift a derived path into an explicit directed open path in the source.

    hops lists (vertex, its discovery level, outgoing direction, level where
    that direction was found); the lift walks each column vertically to the
    discovery level and then takes the planar edge there.
    """
    path: List[Vertex] = []
    if not hops:
        return path
    first_vertex, first_level = hops[0][0], hops[0][1]
    path.append(first_vertex + (first_level,))
    for x, at_level, direction, found_level in hops:
        level = at_level
        step = 1 if found_level >= at_level else -1
        while level != found_level:
            level += step
            path.append(x + (level,))
        target = neighbor(x, direction.code)
        path.append(target + (found_level,))
    return path


def validate_certificate(col: ColumnField, path: List[Vertex], n: int) -> bool:
    """Check the lifted path starts at the origin, uses only open source edges,
    and leaves (or touches) the boundary of the source box."""
    if not path or any(c != 0 for c in path[0]):
        return False
    for u, v in zip(path, path[1:]):
        diffs = [(i, b - a) for i, (a, b) in enumerate(zip(u, v)) if a != b]
        if len(diffs) != 1 or abs(diffs[0][1]) != 1:
            return False
        axis, delta = diffs[0]
        code = 2 * axis + (1 if delta > 0 else 0)
        if code not in col.field.choice_codes(u):
            return False
    return max(abs(c) for c in path[-1]) >= n


def explore_coupled(
    k: int,
    d: int,
    box_n: int,
    trial_seed: int,
    level_budget: int = 100_000,
) -> CoupledTrial:
    """Explore the derived k-DnG cluster of the origin in [-n, n]^d and the
    source (k+1)-DnG cluster in the (d+1)-dimensional box, on the same
    configuration; certify containment whenever the derived cluster reaches
    the boundary."""
    box = BoxRegion(box_n)
    field_seed = derive_seed(trial_seed, 0)
    aux_seed = derive_seed(trial_seed, 1)
    col = ColumnField(k, d, field_seed, aux_seed, level_budget)

    origin: Vertex = (0,) * d
    derived_cache: Dict[Vertex, DerivedChoice] = {}
    discovery_level: Dict[Vertex, int] = {origin: 0}
    parent: Dict[Vertex, Tuple[Vertex, Direction, int]] = {}
    visited = {origin}
    queue: List[Vertex] = [origin]
    head = 0
    reached_at: Optional[Vertex] = None
    while head < len(queue) and reached_at is None:
        u = queue[head]
        head += 1
        choice = derived_cache.get(u)
        if choice is None:
            choice = derive_choice(col, u, discovery_level[u])
            derived_cache[u] = choice
        for direction, lvl in sorted(zip(choice.directions, choice.levels),
                                     key=lambda t: t[0].code):
            v = neighbor(u, direction.code)
            if v in visited or linf(v) > box_n:
                continue
            visited.add(v)
            discovery_level[v] = lvl
            parent[v] = (u, direction, lvl)
            queue.append(v)
            if linf(v) == box_n:
                reached_at = v
                break
    derived = ClusterResult(
        visited_count=len(visited),
        reached_boundary=reached_at is not None,
        frontier_exhausted=reached_at is None,
    )

    source_spec = ModelSpec(d + 1, k + 1, Variant.DNG)
    source = explore(source_spec, field_seed, box, mode="out")

    certificate = None
    certificate_valid = None
    if reached_at is not None:
        hops: List[Tuple[Vertex, int, Direction, int]] = []
        v = reached_at
        while v != origin:
            u, direction, lvl = parent[v]
            hops.append((u, discovery_level[u], direction, lvl))
            v = u
        hops.reverse()
        certificate = _certificate_path(col, hops)
        certificate_valid = validate_certificate(col, certificate, box_n)
    return CoupledTrial(derived, source, certificate, certificate_valid)


def derived_choice_sample(k: int, d: int, sample_seed: int) -> DerivedChoice:
    """One independent draw of the kernel at the origin (fresh column field)."""
    col = ColumnField(k, d, derive_seed(sample_seed, 0), derive_seed(sample_seed, 1))
    return derive_choice(col, (0,) * d, 0)


def step2_stall_probability(k: int, d: int):
    """Exact P(Step 2 entered AND the first visited level adds nothing new).

    Brute force over the joint choice sets of two stacked source vertices;
    this is the probability that the repeat loop walks at least two levels.
    """
    from fractions import Fraction
    from itertools import combinations
    from math import comb

    two_d1 = 2 * (d + 1)
    total = comb(two_d1, k + 1)
    planar_limit = 2 * d
    subsets = list(combinations(range(two_d1), k + 1))
    stall_weight = 0
    for start in subsets:
        planar = frozenset(c for c in start if c < planar_limit)
        if len(planar) != k - 1:
            continue
        for above in subsets:
            planar_above = frozenset(c for c in above if c < planar_limit)
            if planar_above <= planar:
                stall_weight += 1
    return Fraction(stall_weight, total * total)
