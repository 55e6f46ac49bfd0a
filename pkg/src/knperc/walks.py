"""Exact enumeration for monotone-walk coincidence times and open-path moments.

Two independent walks start at the origin and each step adds one of the d
positive unit vectors, uniformly at random.  The coincidence time tau_d is the
first m at which the walks sit on the same site AND take the same next step;
rho(d) = P(tau_d < infinity) is the quantity the directed-percolation
second-moment criterion compares against k/(2d).

The production enumerator walks the *difference* of the two walks (steps
e_a - e_b) with rational weights, quotienting states by coordinate
permutations and global negation; the naive trajectory-pair enumerator is kept
as an oracle for small d.

The open-path counters live here too: E[N_n] for the number of open monotone
paths from the origin to level n, its exact second moment via the joint
edge/vertex table over path pairs, and a seeded Monte Carlo cross-check.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import comb
from typing import Dict, Tuple

from .budget import guard
from .errors import ValidationError
from .lattice import ChoiceField, ModelSpec, Variant
from .rng import derive_seed

State = Tuple[int, ...]


@dataclass(frozen=True)
class TauPmf:
    """Exact P(tau_d = l) for 0 <= l <= cutoff."""

    d: int
    cutoff: int
    values: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        assert len(self.values) == self.cutoff + 1
        assert all(0 <= v <= 1 for v in self.values)
        assert sum(self.values) <= 1

    def partial_sum(self) -> Fraction:
        return sum(self.values, Fraction(0))


def _canonical(state: State) -> State:
    up = tuple(sorted(state))
    down = tuple(sorted(-c for c in state))
    return min(up, down)


def enumerate_tau(d: int, cutoff: int, use_symmetry: bool = True) -> TauPmf:
    """Exact coincidence-time distribution up to *cutoff*.

    Dynamic program over the difference walk D_m = S_m - S'_m: each joint step
    adds e_a - e_b with weight 1/d^2; tau = m requires D_m = 0 followed by a
    diagonal step (a = b, weight 1/d), and no earlier such stall at 0.  With
    use_symmetry the states are quotiented by coordinate permutations and
    global negation (both commute with the kernel), which is what makes d = 6
    affordable; the unreduced walk is kept for oracle comparisons.
    """
    if d < 2:
        raise ValidationError("tau enumeration needs d >= 2")
    if cutoff < 0:
        raise ValidationError("cutoff must be nonnegative")
    guard(d ** (2 * (cutoff + 1)), f"tau enumeration d={d} cutoff={cutoff}")

    zero: State = (0,) * d
    canon = _canonical if use_symmetry else (lambda s: s)
    dist: Dict[State, Fraction] = {zero: Fraction(1)}
    w_pair = Fraction(1, d * d)
    values = []
    for level in range(cutoff + 1):
        at_zero = dist.get(zero, Fraction(0))
        values.append(at_zero / d)
        if level == cutoff:
            break
        nxt: Dict[State, Fraction] = defaultdict(Fraction)
        for state, w in dist.items():
            stalled = state == zero
            contribution = w * w_pair
            for a in range(d):
                for b in range(d):
                    if stalled and a == b:
                        continue  # would realize tau at this level
                    if a == b:
                        nxt[state] += contribution
                        continue
                    moved = list(state)
                    moved[a] += 1
                    moved[b] -= 1
                    nxt[canon(tuple(moved))] += contribution
        dist = dict(nxt)
    return TauPmf(d, cutoff, tuple(values))


def enumerate_tau_naive(d: int, cutoff: int) -> TauPmf:
    """Oracle: enumerate all trajectory pairs of length cutoff+1 directly."""
    if d < 2:
        raise ValidationError("tau enumeration needs d >= 2")
    steps = cutoff + 1
    guard(d ** (2 * steps) * steps, f"naive tau enumeration d={d} cutoff={cutoff}")
    counts = [0] * (cutoff + 1)
    for s in product(range(d), repeat=steps):
        for t in product(range(d), repeat=steps):
            pos_s = [0] * d
            pos_t = [0] * d
            equal_before = True  # positions agree at m = 0
            for m in range(steps):
                if equal_before and s[m] == t[m]:
                    counts[m] += 1
                    break
                pos_s[s[m]] += 1
                pos_t[t[m]] += 1
                equal_before = pos_s == pos_t
    total = Fraction(1, d ** (2 * steps))
    return TauPmf(d, cutoff, tuple(c * total for c in counts))


def firstfew(d: int) -> Tuple[Fraction, Fraction, Fraction]:
    """Closed forms P(tau_d = 0), P(tau_d = 1), P(tau_d = 2)."""
    return (
        Fraction(1, d),
        Fraction(0),
        Fraction(1, d ** 3) - Fraction(1, d ** 4),
    )


def hypergeometric_mean(k: int, d: int) -> Fraction:
    """Sum over l of l*C(d,l)*C(d,k-l)/C(2d,k): mean number of norm-increasing choices."""
    total = comb(2 * d, k)
    acc = sum(l * comb(d, l) * comb(d, k - l) for l in range(0, k + 1))
    return Fraction(acc, total)


def expected_open_paths(spec: ModelSpec, n: int) -> Fraction:
    """E[N_n] computed two ways and asserted equal: (k/2)^n and d^n * (k/2d)^n."""
    if spec.k > spec.d:
        raise ValidationError("open-path moments are stated for the monotone regime k <= d")
    closed_form = Fraction(spec.k, 2) ** n
    by_counting = Fraction(spec.d) ** n * Fraction(spec.k, 2 * spec.d) ** n
    assert closed_form == by_counting
    return closed_form


@dataclass(frozen=True)
class PathPairStats:
    """Joint (K, L) table over ordered pairs of monotone paths to level n.

    K counts shared edges, L counts shared vertices where the two paths leave
    by different edges.  The table sums to d^(2n).
    """

    d: int
    n: int
    table: Dict[Tuple[int, int], int]

    def total(self) -> int:
        return sum(self.table.values())


def path_pair_stats(d: int, n: int) -> PathPairStats:
    guard((d ** (2 * n)) * max(n, 1), f"path-pair table d={d} n={n}")
    paths = list(product(range(d), repeat=n))
    table: Dict[Tuple[int, int], int] = defaultdict(int)
    # Positions are multisets of steps taken so far; two monotone paths sit on
    # the same vertex at time i iff their step counts agree.
    prefix_counts = []
    for s in paths:
        counts = []
        acc = [0] * d
        for step in s:
            acc[step] += 1
            counts.append(tuple(acc))
        prefix_counts.append(counts)
    for i_s, s in enumerate(paths):
        cs = prefix_counts[i_s]
        for i_t, t in enumerate(paths):
            ct = prefix_counts[i_t]
            shared_edges = 0
            split_vertices = 0
            together = True  # at the origin
            for i in range(n):
                if together:
                    if s[i] == t[i]:
                        shared_edges += 1
                    else:
                        split_vertices += 1
                together = cs[i] == ct[i]
            table[(shared_edges, split_vertices)] += 1
    return PathPairStats(d, n, dict(table))


def second_moment_exact(spec: ModelSpec, n: int) -> Fraction:
    """Exact E[N_n^2] = sum over path pairs of p^K q^L p^(2(n-K-L)).

    p = k/(2d) is the single-edge law and q = k(k-1)/(2d(2d-1)) the joint law
    of two distinct edges out of one vertex.
    """
    if spec.k > spec.d:
        raise ValidationError("open-path moments are stated for the monotone regime k <= d")
    stats = path_pair_stats(spec.d, n)
    p = Fraction(spec.k, 2 * spec.d)
    q = Fraction(spec.k * (spec.k - 1), 2 * spec.d * (2 * spec.d - 1))
    acc = Fraction(0)
    for (kk, ll), count in stats.table.items():
        acc += count * p ** kk * q ** ll * p ** (2 * (n - kk - ll))
    return acc


@dataclass(frozen=True)
class PathCountSample:
    """Sample moments of the open monotone path count N_n."""

    mean: float
    mean_sq: float
    stderr_mean: float
    stderr_mean_sq: float
    trials: int


def mc_path_count(spec: ModelSpec, n: int, trials: int, seed: int) -> PathCountSample:
    """Monte Carlo oracle: sample the DnG on the first quadrant, count N_n exactly."""
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    sum_n = 0
    sum_n2 = 0
    sum_n4 = 0
    positive_codes = tuple(2 * a + 1 for a in range(spec.d))
    for t in range(trials):
        field = ChoiceField(ModelSpec(spec.d, spec.k, Variant.DNG, derive_seed(seed, t)))
        level: Dict[Tuple[int, ...], int] = {(0,) * spec.d: 1}
        for _ in range(n):
            nxt: Dict[Tuple[int, ...], int] = defaultdict(int)
            for v, cnt in level.items():
                chosen = field.choice_codes(v)
                for code in positive_codes:
                    if code in chosen:
                        axis = code // 2
                        w = v[:axis] + (v[axis] + 1,) + v[axis + 1:]
                        nxt[w] += cnt
            level = dict(nxt)
        count = sum(level.values())
        sum_n += count
        sq = count * count
        sum_n2 += sq
        sum_n4 += sq * sq
    mean = sum_n / trials
    mean_sq = sum_n2 / trials
    var_n = max(mean_sq - mean * mean, 0.0)
    mean_4 = sum_n4 / trials
    var_n2 = max(mean_4 - mean_sq * mean_sq, 0.0)
    return PathCountSample(
        mean=mean,
        mean_sq=mean_sq,
        stderr_mean=(var_n / trials) ** 0.5,
        stderr_mean_sq=(var_n2 / trials) ** 0.5,
        trials=trials,
    )
