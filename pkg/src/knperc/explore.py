"""Lazy cluster exploration and seeded Monte Carlo estimators.

The canonical explorer is a breadth-first search on the infinite lattice,
confined to a centered box, expanding neighbors in (axis, sign) order so the
traversal is a pure function of (spec, trial_seed).  The estimators run many
independent trials (trial t uses seed derive_seed(master, t)) and aggregate
integer per-trial outcomes, so results are bit-identical regardless of worker
count or scheduling.

Box estimators go through a vectorized twin of the scalar sampler (same hash
stream, property-tested equal) that generates the whole box's direction
shuffles at once and propagates BFS frontiers with numpy; only the
reached-boundary flag and the full component size feed the estimates, and
those coincide exactly with the scalar explorer's.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from collections import deque
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ValidationError
from .lattice import (
    ChoiceField,
    ModelSpec,
    Variant,
    Vertex,
    edge_open,
    ell1,
    linf,
    neighbor,
)
from .rng import derive_seed, direction_shuffles_array


@dataclass(frozen=True)
class BoxRegion:
    """Centered box [-n, n]^d; the boundary is the l-infinity sphere of radius n."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValidationError("box half-side n must be >= 1")

    def volume(self, d: int) -> int:
        return (2 * self.n + 1) ** d


@dataclass
class ClusterResult:
    """Explored component of the origin inside a box.

    Exploration stops for exactly one reason: boundary contact or an empty
    frontier; reached_boundary XOR frontier_exhausted always holds.
    """

    visited_count: int
    reached_boundary: bool
    frontier_exhausted: bool
    visited_sample: Optional[List[Vertex]] = None


@dataclass(frozen=True)
class EstimateWithCI:
    """Bernoulli or mean estimate with its standard error."""

    point: float
    stderr: float
    trials: int
    master_seed: int


@dataclass(frozen=True)
class GenerationTrace:
    """Per-generation maxima of the l1-norm and generation sizes, index 0 = {origin}."""

    maxima: Tuple[int, ...]
    sizes: Tuple[int, ...]

    @property
    def strictly_increasing(self) -> bool:
        return all(a < b for a, b in zip(self.maxima, self.maxima[1:]))


def default_mode(variant: Variant) -> str:
    return "out" if variant is Variant.DNG else "undirected"


def _check_mode(spec: ModelSpec, mode: str) -> None:
    if mode not in ("out", "in", "undirected"):
        raise ValidationError(f"unknown exploration mode {mode!r}")
    if spec.variant is Variant.DNG and mode == "undirected":
        raise ValidationError("DnG exploration is directed; use mode='out'")
    if spec.variant is not Variant.DNG and mode in ("out", "in"):
        raise ValidationError(f"mode={mode!r} is only defined for the DnG")


def explore(
    spec: ModelSpec,
    trial_seed: int,
    box: BoxRegion,
    mode: Optional[str] = None,
    stop_at_boundary: bool = True,
    collect_sample: bool = False,
) -> ClusterResult:
    """BFS from the origin along open edges, confined to the box.

    Deterministic given (spec, trial_seed): neighbors are expanded in
    (axis, sign) order generation by generation.  With stop_at_boundary the
    walk halts at the first boundary vertex discovered (the boundary-reach
    estimand); otherwise the component inside the box is exhausted (the
    proportion estimand).
    """
    mode = default_mode(spec.variant) if mode is None else mode
    _check_mode(spec, mode)
    if mode == "in":
        raise ValidationError(
            "in-exploration scans unbounded in-neighborhoods on the infinite "
            "lattice; it is only offered on the torus (mass_transport_check)"
        )
    field = ChoiceField(replace(spec, master_seed=trial_seed))
    n, d = box.n, spec.d
    origin: Vertex = (0,) * d
    visited = {origin}
    order: List[Vertex] = [origin]
    queue = deque([origin])
    reached = False
    directed = spec.variant is Variant.DNG
    while queue and not (reached and stop_at_boundary):
        u = queue.popleft()
        codes = sorted(field.choice_codes(u)) if directed else range(2 * d)
        for code in codes:
            v = neighbor(u, code)
            if v in visited or linf(v) > n:
                continue
            if not directed and not edge_open(field, u, code):
                continue
            visited.add(v)
            order.append(v)
            queue.append(v)
            if linf(v) == n:
                reached = True
                if stop_at_boundary:
                    break
    return ClusterResult(
        visited_count=len(visited),
        reached_boundary=reached,
        frontier_exhausted=not reached,
        visited_sample=order if collect_sample else None,
    )


# ---------------------------------------------------------------------------
# Vectorized box sampler.
# ---------------------------------------------------------------------------


@lru_cache(maxsize=16)
def _box_tables(d: int, n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coordinates, neighbor index table and boundary mask for [-n, n]^d.

    Vertices are indexed in C order of the coordinate grid; nbr[c] maps each
    vertex to its neighbor along direction code c, or -1 off the box.
    """
    side = 2 * n + 1
    grids = np.meshgrid(*([np.arange(-n, n + 1)] * d), indexing="ij")
    coords = np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
    size = side ** d
    idx = np.arange(size)
    nbr = np.full((2 * d, size), -1, dtype=np.int64)
    strides = [side ** (d - 1 - a) for a in range(d)]
    for axis in range(d):
        for up in (0, 1):
            code = 2 * axis + up
            delta = 1 if up else -1
            ok = coords[:, axis] + delta <= n if up else coords[:, axis] - 1 >= -n
            nbr[code, ok] = idx[ok] + delta * strides[axis]
    boundary = (np.abs(coords).max(axis=1) == n)
    return coords, nbr, boundary


def _open_arcs(spec: ModelSpec, trial_seed: int, n: int, k: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-direction openness matrix open[c, v] plus the box tables."""
    coords, nbr, boundary = _box_tables(spec.d, n)
    perms = direction_shuffles_array(trial_seed, coords, spec.two_d)
    size = perms.shape[0]
    rank = np.empty_like(perms)
    rank[np.arange(size)[:, None], perms] = np.arange(spec.two_d, dtype=np.int8)[None, :]
    chosen = rank < k  # chosen[v, c]: v picks direction c
    open_arc = np.zeros((spec.two_d, size), dtype=bool)
    for code in range(spec.two_d):
        exists = nbr[code] >= 0
        fwd = chosen[:, code]
        if spec.variant is Variant.DNG:
            open_arc[code] = fwd & exists
            continue
        back = np.zeros(size, dtype=bool)
        back[exists] = chosen[nbr[code, exists], code ^ 1]
        if spec.variant is Variant.UNG:
            open_arc[code] = (fwd | back) & exists
        elif spec.variant is Variant.BNG:
            open_arc[code] = (fwd & back) & exists
        else:
            open_arc[code] = (fwd ^ back) & exists
    return open_arc, nbr, boundary


def _component_scan(
    open_arc: np.ndarray,
    nbr: np.ndarray,
    boundary: np.ndarray,
    stop_at_boundary: bool,
) -> Tuple[bool, int]:
    """Component of the center vertex via sparse BFS; returns (reached, size).

    stop_at_boundary only matters for how far the scalar explorer walks; the
    reached flag and the full component size are what the estimators consume,
    and both are unaffected by the stopping rule, so one full BFS serves.
    """
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import breadth_first_order

    two_d, size = open_arc.shape
    origin = size // 2  # center of the odd-sided box in C order
    rows = []
    cols = []
    for code in range(two_d):
        src = np.nonzero(open_arc[code])[0]
        rows.append(src)
        cols.append(nbr[code, src])
    row = np.concatenate(rows)
    col = np.concatenate(cols)
    if row.size == 0:
        return bool(boundary[origin]), 1
    graph = csr_matrix(
        (np.ones(row.size, dtype=np.int8), (row, col)), shape=(size, size)
    )
    visited = breadth_first_order(graph, origin, directed=True, return_predecessors=False)
    return bool(boundary[visited].any()), int(visited.size)


def trial_outcome(
    spec: ModelSpec,
    trial_seed: int,
    n: int,
    stop_at_boundary: bool = True,
    k: Optional[int] = None,
) -> Tuple[bool, int]:
    """(reached_boundary, visited_count) of one trial via the vectorized sampler."""
    open_arc, nbr, boundary = _open_arcs(spec, trial_seed, n, spec.k if k is None else k)
    return _component_scan(open_arc, nbr, boundary, stop_at_boundary)


def estimate_boundary_reach(
    spec: ModelSpec,
    n: int,
    trials: int,
    master_seed: int,
    workers: int = 1,
) -> EstimateWithCI:
    """Mean of the reached-boundary indicator over independent seeded trials."""
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    BoxRegion(n)
    hits = _sum_over_trials(spec, n, trials, master_seed, workers, want_counts=False)
    p = hits / trials
    return EstimateWithCI(p, (p * (1 - p) / trials) ** 0.5, trials, master_seed)


def estimate_proportion(
    spec: ModelSpec,
    n: int,
    trials: int,
    master_seed: int,
    workers: int = 1,
) -> EstimateWithCI:
    """Mean of visited_count / (2n+1)^d over independent seeded trials."""
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    total, total_sq = _sum_over_trials(spec, n, trials, master_seed, workers, want_counts=True)
    volume = BoxRegion(n).volume(spec.d)
    mean = total / trials / volume
    mean_sq = total_sq / trials / volume ** 2
    var = max(mean_sq - mean * mean, 0.0)
    return EstimateWithCI(mean, (var / trials) ** 0.5, trials, master_seed)


def _trial_range_sums(args) -> Tuple[int, int]:
    spec, n, master_seed, lo, hi, want_counts = args
    acc = 0
    acc_sq = 0
    for t in range(lo, hi):
        reached, count = trial_outcome(
            spec, derive_seed(master_seed, t), n, stop_at_boundary=not want_counts
        )
        if want_counts:
            acc += count
            acc_sq += count * count
        else:
            acc += int(reached)
    return acc, acc_sq


def _sum_over_trials(spec, n, trials, master_seed, workers, want_counts):
    if workers <= 1:
        acc, acc_sq = _trial_range_sums((spec, n, master_seed, 0, trials, want_counts))
    else:
        from concurrent.futures import ProcessPoolExecutor

        chunk = (trials + workers - 1) // workers
        jobs = [
            (spec, n, master_seed, lo, min(lo + chunk, trials), want_counts)
            for lo in range(0, trials, chunk)
        ]
        acc = 0
        acc_sq = 0
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for a, a2 in pool.map(_trial_range_sums, jobs):
                acc += a
                acc_sq += a2
    return (acc, acc_sq) if want_counts else acc


def coupled_reach_flags(
    spec: ModelSpec,
    ks: Sequence[int],
    n: int,
    trials: int,
    master_seed: int,
) -> Dict[int, np.ndarray]:
    """Reached-boundary flags for several k on the SAME coupled trials.

    The per-vertex direction shuffle does not depend on k, so the k-subset is
    a prefix of the (k+1)-subset and reach(k) implies reach(k+1) pathwise.
    """
    flags = {k: np.zeros(trials, dtype=bool) for k in ks}
    for t in range(trials):
        seed = derive_seed(master_seed, t)
        for k in ks:
            open_arc, nbr, boundary = _open_arcs(spec, seed, n, k)
            reached, _ = _component_scan(open_arc, nbr, boundary, stop_at_boundary=True)
            flags[k][t] = reached
    return flags


# ---------------------------------------------------------------------------
# Growth-argument trace.
# ---------------------------------------------------------------------------


def growth_trace(spec: ModelSpec, generations: int, trial_seed: int) -> GenerationTrace:
    """Simulate the generation process G_0 = {origin}, G_{n+1} = fresh successors.

    Only defined for the DnG with k >= d+1, where the maximal l1-distance is
    strictly increasing between generations.
    """
    if spec.variant is not Variant.DNG:
        raise ValidationError("the growth trace is defined for the DnG")
    if spec.k <= spec.d:
        raise ValidationError("the growth property needs k >= d+1")
    if generations < 1:
        raise ValidationError("generations must be >= 1")
    field = ChoiceField(replace(spec, master_seed=trial_seed))
    origin: Vertex = (0,) * spec.d
    seen = {origin}
    frontier: List[Vertex] = [origin]
    maxima = [0]
    sizes = [1]
    for _ in range(generations):
        nxt = set()
        for v in frontier:
            for code in field.choice_codes(v):
                w = neighbor(v, code)
                if w not in seen:
                    nxt.add(w)
        if not nxt:
            raise AssertionError("generation died out despite k >= d+1")
        seen |= nxt
        frontier = sorted(nxt)
        maxima.append(max(ell1(w) for w in nxt))
        sizes.append(len(nxt))
    return GenerationTrace(tuple(maxima), tuple(sizes))


# ---------------------------------------------------------------------------
# Torus exploration and the mass-transport balance check.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MassTransportReport:
    """Sampled expected out- and in-component sizes of the origin on the torus."""

    mean_out: float
    stderr_out: float
    mean_in: float
    stderr_in: float
    trials: int
    torus_side: int
    master_seed: int

    @property
    def balanced_within(self) -> float:
        """|mean_out - mean_in| measured in combined standard errors."""
        gap = abs(self.mean_out - self.mean_in)
        denom = self.stderr_out + self.stderr_in
        return gap / denom if denom else float("inf")


def torus_component_size(spec: ModelSpec, trial_seed: int, L: int, mode: str) -> int:
    """Size of the origin's out- or in-component on the L-torus (DnG only)."""
    if spec.variant is not Variant.DNG:
        raise ValidationError("torus component sizes are defined for the DnG")
    if mode not in ("out", "in"):
        raise ValidationError("torus mode must be 'out' or 'in'")
    if L < 3:
        raise ValidationError("torus side must be >= 3 (wraparound degenerates below)")
    field = ChoiceField(replace(spec, master_seed=trial_seed))
    d = spec.d
    origin: Vertex = (0,) * d

    def wrap(v: Vertex) -> Vertex:
        return tuple(c % L for c in v)

    visited = {origin}
    queue = deque([origin])
    while queue:
        u = queue.popleft()
        if mode == "out":
            for code in sorted(field.choice_codes(u)):
                v = wrap(neighbor(u, code))
                if v not in visited:
                    visited.add(v)
                    queue.append(v)
        else:
            for code in range(2 * d):
                v = wrap(neighbor(u, code))
                # v -> u is the edge along the opposite direction from v.
                if v not in visited and (code ^ 1) in field.choice_codes(v):
                    visited.add(v)
                    queue.append(v)
    return len(visited)


def mass_transport_check(
    spec: ModelSpec, L: int, trials: int, master_seed: int
) -> MassTransportReport:
    """Estimate E|out-component| and E|in-component| from independent streams.

    On the torus the two expectations are equal exactly (translation
    invariance), which is what the paired estimate is meant to exhibit.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    sums = {"out": 0.0, "in": 0.0}
    sqs = {"out": 0.0, "in": 0.0}
    for t in range(trials):
        for stream, mode in enumerate(("out", "in")):
            size = torus_component_size(spec, derive_seed(master_seed, t, stream), L, mode)
            sums[mode] += size
            sqs[mode] += size * size
    stats = {}
    for mode in ("out", "in"):
        mean = sums[mode] / trials
        var = max(sqs[mode] / trials - mean * mean, 0.0)
        stats[mode] = (mean, (var / trials) ** 0.5)
    return MassTransportReport(
        mean_out=stats["out"][0],
        stderr_out=stats["out"][1],
        mean_in=stats["in"][0],
        stderr_in=stats["in"][1],
        trials=trials,
        torus_side=L,
        master_seed=master_seed,
    )
