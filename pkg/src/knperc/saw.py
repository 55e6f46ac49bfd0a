"""Self-avoiding walks, dual circuits around the origin, and Peierls sums.

c_n(d) counts self-avoiding n-step paths from the origin on Z^d; its growth
rate is the connective constant c(d).  The Peierls argument bounds the
probability that a circuit of closed dual edges surrounds the origin by
sum_n (number of circuits of length n) * closed_prob^n, with the circuit
count bounded by n * c_{n-1}(2).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .budget import guard
from .errors import ValidationError

Point = Tuple[int, ...]


@dataclass(frozen=True)
class SawCounts:
    """Exact self-avoiding walk counts c_n(d) for n = 1..n_max."""

    d: int
    counts: Tuple[int, ...]

    def c(self, n: int) -> int:
        if n == 0:
            return 1
        if not 1 <= n <= len(self.counts):
            raise ValidationError(f"c_{n} not enumerated (have n <= {len(self.counts)})")
        return self.counts[n - 1]


def _unit_moves(d: int) -> List[Point]:
    moves = []
    for axis in range(d):
        for delta in (1, -1):
            moves.append(tuple(delta if a == axis else 0 for a in range(d)))
    return moves


def _dfs_count(start: Point, visited: set, start_length: int, n_max: int,
               moves: Sequence[Point], totals: List[int]) -> None:
    """Count every self-avoiding extension of the current walk per length."""
    totals[start_length - 1] += 1
    if start_length == n_max:
        return
    for mv in moves:
        nxt = tuple(p + m for p, m in zip(start, mv))
        if nxt not in visited:
            visited.add(nxt)
            _dfs_count(nxt, visited, start_length + 1, n_max, moves, totals)
            visited.remove(nxt)


def count_saw(d: int, n_max: int) -> SawCounts:
    """Exact c_n(d) via depth-first enumeration with visited-set pruning.

    Symmetry reduction: the first step is fixed to +e0 (factor 2d).  A walk
    starting +e0 either stays on the e0-axis forever (only the straight line
    does) or takes a first off-axis step after `straight` forced +e0 steps;
    that step is one of 2(d-1) equivalent lateral directions (factor 2(d-1),
    representative +e1).
    """
    if d < 1:
        raise ValidationError("d must be >= 1")
    if n_max < 1:
        raise ValidationError("n_max must be >= 1")
    guard((2 * d - 1) ** n_max if d > 1 else n_max, f"saw enumeration d={d} n_max={n_max}")
    if d == 1:
        return SawCounts(1, tuple(2 for _ in range(n_max)))

    moves = _unit_moves(d)
    reduced = [1] * n_max  # the straight walk, one per length
    for straight in range(1, n_max):
        axis_prefix = {tuple(i if a == 0 else 0 for a in range(d)) for i in range(straight + 1)}
        start = tuple((straight if a == 0 else 0) + (1 if a == 1 else 0) for a in range(d))
        visited = set(axis_prefix)
        visited.add(start)
        branch = [0] * n_max
        _dfs_count(start, visited, straight + 1, n_max, moves, branch)
        for n in range(straight + 1, n_max + 1):
            reduced[n - 1] += 2 * (d - 1) * branch[n - 1]
    return SawCounts(d, tuple(2 * d * c for c in reduced))


def count_saw_naive(d: int, n_max: int) -> SawCounts:
    """Oracle: plain DFS over all first steps, no symmetry reduction."""
    if d < 1 or n_max < 1:
        raise ValidationError("need d >= 1 and n_max >= 1")
    guard(2 * d * (2 * d - 1) ** max(n_max - 1, 0), f"naive saw d={d} n_max={n_max}")
    moves = _unit_moves(d)
    totals = [0] * (n_max + 1)
    origin = (0,) * d
    _dfs_count(origin, {origin}, 1, n_max + 1, moves, totals)
    # _dfs_count counted the zero-length walk at slot 0; drop it.
    return SawCounts(d, tuple(totals[1:]))


# ---------------------------------------------------------------------------
# Dual circuits around the origin (2D).
# ---------------------------------------------------------------------------

_DUAL_MOVES = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _surrounds_origin(cycle: Sequence[Tuple[int, int]]) -> bool:
    """Ray casting from the primal origin along +x.

    A dual vertex stored as (i, j) sits at (i + 1/2, j + 1/2), so the ray
    {(t, 0): t > 0} crosses exactly the vertical cycle edges with i >= 0
    joining stored heights j = -1 and j = 0.
    """
    crossings = 0
    m = len(cycle)
    for idx in range(m):
        (x1, y1), (x2, y2) = cycle[idx], cycle[(idx + 1) % m]
        if x1 == x2 and x1 >= 0 and min(y1, y2) == -1 and max(y1, y2) == 0:
            crossings += 1
    return crossings % 2 == 1


def count_circuits(n: int) -> int:
    """Exact number of self-avoiding dual circuits of length n around the origin.

    Circuits are counted geometrically: each cycle is rooted at its
    lowest-leftmost dual vertex (minimal in (y, x) order) and traversed with
    the east edge first, so no loop is counted twice or in both orientations.
    """
    if n < 4:
        raise ValidationError("circuits have length >= 4")
    if n % 2 != 0:
        raise ValidationError("no odd circuits exist on the square lattice")
    guard(4 * n * (3 ** n), f"circuit enumeration length {n}")

    total = 0
    half = n // 2
    # The circuit's lowest row sits strictly below the origin cell (stored
    # y <= -1) and the diameter is at most n/2, which bounds the root window.
    for y0 in range(-half, 0):
        for x0 in range(-half, half + 1):
            total += _count_cycles_from((x0, y0), n)
    return total


def _count_cycles_from(root: Tuple[int, int], n: int) -> int:
    # From the root, minimality forces the two cycle edges to go east and
    # north; walk east first and close through the north neighbor.
    first = (root[0] + 1, root[1])
    target = (root[0], root[1] + 1)
    found = 0
    path: List[Tuple[int, int]] = [first]
    visited = {root, first}

    def dfs(pos: Tuple[int, int], length: int) -> None:
        nonlocal found
        if length == n - 1:
            if pos == target and _surrounds_origin([root] + path):
                found += 1
            return
        remaining = n - 1 - length
        dist = abs(pos[0] - target[0]) + abs(pos[1] - target[1])
        if dist > remaining or (remaining - dist) % 2 != 0:
            return
        for dx, dy in _DUAL_MOVES:
            nxt = (pos[0] + dx, pos[1] + dy)
            if nxt in visited:
                continue
            if (nxt[1], nxt[0]) <= (root[1], root[0]):
                continue  # root must stay lowest-leftmost
            visited.add(nxt)
            path.append(nxt)
            dfs(nxt, length + 1)
            path.pop()
            visited.remove(nxt)

    dfs(first, 1)
    return found


def circuit_count_bound(n: int, saw: SawCounts) -> int:
    """The counting bound n * c_{n-1}(2) used by the Peierls sum."""
    if saw.d != 2:
        raise ValidationError("circuit bounds use two-dimensional walk counts")
    return n * saw.c(n - 1)


# ---------------------------------------------------------------------------
# Peierls sums.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PeierlsReport:
    """Upper bound on P(some closed dual circuit surrounds the origin).

    partial_sum runs over n_start <= n <= n_exact with the exact walk-count
    bound n * c_{n-1}(2); tail_bound is the closed-form geometric remainder
    with the supplied growth constant.  wet_block_threshold is the smallest m
    for which the all-geometric bound starting at length 4m drops below 1.
    """

    closed_prob: Fraction
    growth_upper: Fraction
    n_start: int
    n_exact: int
    terms: Dict[int, Fraction]
    partial_sum: Fraction
    tail_bound: Fraction
    total_bound: Fraction
    wet_block_threshold: int
    wet_block_bound: Fraction


def _geometric_tail(n_from: int, growth: Fraction, q: Fraction) -> Fraction:
    """sum_{n >= n_from} n * growth^(n-1) * q^n in closed form."""
    x = growth * q
    if x >= 1:
        raise ValidationError(
            f"divergent Peierls tail: growth * closed_prob = {float(x):.4f} >= 1"
        )
    # sum_{n >= N} n x^n = x^N (N - (N-1) x) / (1-x)^2
    return x ** n_from * (n_from - (n_from - 1) * x) / (1 - x) ** 2 / growth


def peierls_bound(
    closed_prob: Fraction,
    saw: SawCounts,
    n_start: int = 4,
    n_exact: int = 12,
    growth_upper: Fraction = Fraction(3),
) -> PeierlsReport:
    """Evaluate the Peierls sum with an exact head and a geometric tail."""
    closed_prob = Fraction(closed_prob)
    growth_upper = Fraction(growth_upper)
    if not 0 < closed_prob < 1:
        raise ValidationError("closed_prob must lie in (0, 1)")
    if n_start < 4:
        raise ValidationError("circuits around the origin have length >= 4")
    if n_exact < n_start:
        raise ValidationError("n_exact must be >= n_start")
    if growth_upper * closed_prob >= 1:
        raise ValidationError("growth_upper * closed_prob >= 1: the Peierls sum diverges")
    terms: Dict[int, Fraction] = {}
    partial = Fraction(0)
    for n in range(n_start, n_exact + 1):
        if n % 2 == 1:
            terms[n] = Fraction(0)  # no odd circuits
            continue
        t = Fraction(circuit_count_bound(n, saw)) * closed_prob ** n
        terms[n] = t
        partial += t
    tail = _geometric_tail(n_exact + 1, growth_upper, closed_prob)

    # Smallest m with the all-geometric bound from length 4m below one (the
    # wet-block argument needs such an m to exist).
    m = 1
    while True:
        wet = _geometric_tail(4 * m, growth_upper, closed_prob)
        if wet < 1:
            break
        m += 1
        if m > 10_000:
            raise ValidationError("wet-block threshold did not converge")
    return PeierlsReport(
        closed_prob=closed_prob,
        growth_upper=growth_upper,
        n_start=n_start,
        n_exact=n_exact,
        terms=terms,
        partial_sum=partial,
        tail_bound=tail,
        total_bound=partial + tail,
        wet_block_threshold=m,
        wet_block_bound=wet,
    )
