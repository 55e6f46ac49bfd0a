"""Lattice core: edge rules, closed-form laws vs exhaustive local enumeration."""

from fractions import Fraction
from itertools import combinations, product
from math import comb

import numpy as np
import pytest
from scipy.stats import chi2

from knperc.errors import ValidationError
from knperc.lattice import (
    ChoiceField,
    Direction,
    ModelSpec,
    PairRelation,
    Variant,
    all_directions,
    degree_mean,
    degree_pmf,
    edge_open,
    edge_open_probability,
    ell1,
    pair_probability,
    sample_choice,
)
from knperc.rng import direction_shuffles_array

ALL_VARIANTS = tuple(Variant)


# ---------------------------------------------------------------------------
# Exhaustive local enumeration oracles (independent of the closed forms).
# ---------------------------------------------------------------------------


def _subsets(two_d, k):
    return [frozenset(c) for c in combinations(range(two_d), k)]


def _is_open(variant, fwd, back):
    if variant is Variant.DNG:
        return fwd
    if variant is Variant.UNG:
        return fwd or back
    if variant is Variant.BNG:
        return fwd and back
    return fwd ^ back


def oracle_edge_probability(spec):
    """Enumerate (choice(u), choice(v)) for the edge u -> u + e0."""
    subs = _subsets(spec.two_d, spec.k)
    hits = 0
    for cu in subs:
        for cv in subs:
            hits += _is_open(spec.variant, 1 in cu, 0 in cv)
    return Fraction(hits, len(subs) ** 2)


def oracle_adjacent_joint(spec):
    """Enumerate 3 vertices x, x+e0, x+e1 for edges {x,x+e0}, {x,x+e1}."""
    subs = _subsets(spec.two_d, spec.k)
    hits = 0
    for cx in subs:
        for cu in subs:
            e1 = _is_open(spec.variant, 1 in cx, 0 in cu)
            if not e1 and spec.variant is not Variant.XNG:
                # still need the full joint for XNG symmetry checks below
                pass
            for cv in subs:
                e2 = _is_open(spec.variant, 3 in cx, 2 in cv)
                hits += e1 and e2
    return Fraction(hits, len(subs) ** 3)


def oracle_same_source_conditional(spec):
    """P(second directed edge open | first open), directed edges from x."""
    subs = _subsets(spec.two_d, spec.k)
    both = sum(1 for cx in subs if 1 in cx and 3 in cx)
    first = sum(1 for cx in subs if 1 in cx)
    return Fraction(both, first)


def oracle_path_joint_law(spec):
    """Joint law of (e1 open, e2 open) on the path x0 - x1 - x2 along +e0."""
    subs = _subsets(spec.two_d, spec.k)
    counts = {(a, b): 0 for a in (0, 1) for b in (0, 1)}
    for c0 in subs:
        for c1 in subs:
            e1 = _is_open(spec.variant, 1 in c0, 0 in c1)
            for c2 in subs:
                e2 = _is_open(spec.variant, 1 in c1, 0 in c2)
                counts[(int(e1), int(e2))] += 1
    total = len(subs) ** 3
    return {key: Fraction(v, total) for key, v in counts.items()}


# ---------------------------------------------------------------------------
# Types and the choice field.
# ---------------------------------------------------------------------------


def test_model_spec_validation():
    with pytest.raises(ValidationError):
        ModelSpec(2, 5, "dng")
    with pytest.raises(ValidationError):
        ModelSpec(0, 1, "dng")
    with pytest.raises(ValidationError):
        ModelSpec(2, 2, "nope")
    spec = ModelSpec(2, 2, "UNG")
    assert spec.variant is Variant.UNG


def test_direction_negation_involution_and_count():
    for d in (1, 2, 3, 4):
        dirs = all_directions(d)
        assert len(set(dirs)) == 2 * d
        for dr in dirs:
            assert -(-dr) == dr
            assert Direction.from_code(dr.code) == dr
            assert (-dr).code == dr.code ^ 1


def test_ell1():
    assert ell1((0, 0)) == 0
    assert ell1((-2, 3)) == 5


def test_choice_field_deterministic_and_uniform_size():
    spec = ModelSpec(3, 4, "dng", master_seed=99)
    field = ChoiceField(spec)
    v = (5, -2, 7)
    first = sample_choice(field, v)
    assert len(first) == 4
    assert first == sample_choice(field, v)
    fresh = ChoiceField(ModelSpec(3, 4, "dng", master_seed=99))
    assert first == sample_choice(fresh, v)


def test_k_equals_2d_forces_all_directions():
    spec = ModelSpec(1, 2, "ung", master_seed=5)
    field = ChoiceField(spec)
    for x in range(-10, 10):
        assert sample_choice(field, (x,)) == frozenset(all_directions(1))


def test_edge_open_trivial_chain():
    field = ChoiceField(ModelSpec(1, 2, "ung", master_seed=8))
    for x in range(-5, 5):
        for code in (0, 1):
            assert edge_open(field, (x,), code)


# ---------------------------------------------------------------------------
# Closed forms vs oracles (the acceptance-grade equivalence is in
# test_acceptance; here the named examples).
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "d,k,variant,expected",
    [
        (2, 2, "ung", Fraction(3, 4)),
        (3, 3, "ung", Fraction(3, 4)),
        (5, 3, "dng", Fraction(3, 10)),
        (2, 2, "xng", Fraction(1, 2)),
        (2, 2, "bng", Fraction(1, 4)),
    ],
)
def test_edge_probability_named_values(d, k, variant, expected):
    assert edge_open_probability(ModelSpec(d, k, variant)) == expected


def test_edge_probability_xng_derived_by_enumeration():
    # 6x6 joint cases at (d=2, k=2) give exactly 1/2.
    spec = ModelSpec(2, 2, "xng")
    assert oracle_edge_probability(spec) == Fraction(1, 2)
    assert edge_open_probability(spec) == Fraction(1, 2)


def test_pair_directed_same_source():
    assert pair_probability(ModelSpec(2, 2, "dng"), "directed-same-source") == Fraction(1, 3)
    for d, k in [(2, 1), (3, 2), (4, 5)]:
        spec = ModelSpec(d, k, "dng")
        assert pair_probability(spec, "directed-same-source") == oracle_same_source_conditional(spec)


def test_pair_bng_adjacent_below_square():
    for d in (1, 2, 3):
        for k in range(1, 2 * d + 1):
            spec = ModelSpec(d, k, "bng")
            joint = pair_probability(spec, "bng-adjacent-undirected")
            assert joint <= edge_open_probability(spec) ** 2
            assert joint == oracle_adjacent_joint(spec)


def test_pair_xng_adjacent_equality_iff_k_equals_d():
    for d in (2, 3, 4):
        for k in range(2, 2 * d):
            spec = ModelSpec(d, k, "xng")
            joint = pair_probability(spec, "xng-adjacent-undirected")
            marginal_sq = edge_open_probability(spec) ** 2
            assert joint <= marginal_sq
            assert (joint == marginal_sq) == (k == d)


def test_pair_xng_32_brute_force():
    # 3375 = C(6,2)^3 joint cases.
    spec = ModelSpec(3, 2, "xng")
    expected = oracle_adjacent_joint(spec)
    assert expected == Fraction(26, 135)
    assert pair_probability(spec, "xng-adjacent-undirected") == expected


def test_pair_ung_adjacent_matches_enumeration():
    for d in (1, 2, 3):
        for k in range(1, 2 * d + 1):
            spec = ModelSpec(d, k, "ung")
            assert pair_probability(spec, "ung-adjacent-undirected") == oracle_adjacent_joint(spec)
            assert pair_probability(spec, "ung-adjacent-undirected") <= edge_open_probability(spec) ** 2


def test_pair_disjoint_is_product():
    for variant in ALL_VARIANTS:
        spec = ModelSpec(3, 2, variant)
        assert pair_probability(spec, PairRelation.DISJOINT) == edge_open_probability(spec) ** 2


def test_pair_relation_variant_mismatch_rejected():
    with pytest.raises(ValidationError):
        pair_probability(ModelSpec(2, 2, "ung"), "directed-same-source")
    with pytest.raises(ValidationError):
        pair_probability(ModelSpec(2, 2, "dng"), "bng-adjacent-undirected")
    with pytest.raises(ValidationError):
        pair_probability(ModelSpec(2, 1, "xng"), "xng-adjacent-undirected")


# ---------------------------------------------------------------------------
# Degree distributions.
# ---------------------------------------------------------------------------


def test_degree_pmf_sums_to_one_exactly():
    for variant in ALL_VARIANTS:
        for d in (1, 2, 3):
            for k in range(1, 2 * d + 1):
                pmf = degree_pmf(ModelSpec(d, k, variant))
                assert sum(pmf, Fraction(0)) == 1


@pytest.mark.parametrize(
    "variant,d,k,mean",
    [
        ("bng", 2, 2, Fraction(1)),
        ("ung", 2, 2, Fraction(3)),
        ("dng", 3, 4, Fraction(4)),
        ("xng", 2, 2, Fraction(2)),
    ],
)
def test_degree_means(variant, d, k, mean):
    assert degree_mean(ModelSpec(d, k, variant)) == mean


def test_dng_degree_is_point_mass():
    pmf = degree_pmf(ModelSpec(3, 2, "dng"))
    assert pmf[2] == 1 and sum(pmf, Fraction(0)) == 1


def _sample_degrees(spec, samples, seed):
    """Vectorized degree sampling: each sample uses far-apart vertices."""
    base = np.arange(samples, dtype=np.int64) * 10
    zeros = np.zeros(samples, dtype=np.int64)
    columns = [base] + [zeros] * (spec.d - 1)
    center = np.stack(columns, axis=1)
    perms_c = direction_shuffles_array(seed, center, spec.two_d)
    rank = np.empty_like(perms_c)
    rank[np.arange(samples)[:, None], perms_c] = np.arange(spec.two_d, dtype=np.int8)
    chosen_c = rank < spec.k
    degree = np.zeros(samples, dtype=np.int64)
    for code in range(spec.two_d):
        axis, up = code // 2, code & 1
        nb = center.copy()
        nb[:, axis] += 1 if up else -1
        perms_n = direction_shuffles_array(seed, nb, spec.two_d)
        rank_n = np.empty_like(perms_n)
        rank_n[np.arange(samples)[:, None], perms_n] = np.arange(spec.two_d, dtype=np.int8)
        back = rank_n[:, code ^ 1] < spec.k
        fwd = chosen_c[:, code]
        if spec.variant is Variant.DNG:
            open_edge = fwd
        elif spec.variant is Variant.UNG:
            open_edge = fwd | back
        elif spec.variant is Variant.BNG:
            open_edge = fwd & back
        else:
            open_edge = fwd ^ back
        degree += open_edge
    return degree


@pytest.mark.parametrize("d,k", [(2, 2), (3, 3), (2, 3)])
@pytest.mark.parametrize("variant", ["ung", "bng", "xng"])
def test_degree_histogram_chi_square(d, k, variant):
    spec = ModelSpec(d, k, variant)
    pmf = degree_pmf(spec)
    samples = 20_000
    degrees = _sample_degrees(spec, samples, seed=777)
    support = [i for i, p in enumerate(pmf) if p > 0]
    observed = np.array([(degrees == i).sum() for i in support], dtype=float)
    expected = np.array([float(pmf[i]) * samples for i in support])
    stat = ((observed - expected) ** 2 / expected).sum()
    critical = chi2.ppf(1 - 1e-3, df=len(support) - 1)
    assert stat < critical, (variant, d, k, stat, critical)


# ---------------------------------------------------------------------------
# Empirical edge frequencies (module invariant, d <= 4).
# ---------------------------------------------------------------------------


def _empirical_edge_frequency(spec, samples, seed):
    base = np.arange(samples, dtype=np.int64) * 10
    zeros = np.zeros(samples, dtype=np.int64)
    u = np.stack([base] + [zeros] * (spec.d - 1), axis=1)
    v = u.copy()
    v[:, 0] += 1
    out = []
    for arr in (u, v):
        perms = direction_shuffles_array(seed, arr, spec.two_d)
        rank = np.empty_like(perms)
        rank[np.arange(samples)[:, None], perms] = np.arange(spec.two_d, dtype=np.int8)
        out.append(rank < spec.k)
    fwd = out[0][:, 1]  # +e0 from u
    back = out[1][:, 0]  # -e0 from v
    if spec.variant is Variant.DNG:
        open_edge = fwd
    elif spec.variant is Variant.UNG:
        open_edge = fwd | back
    elif spec.variant is Variant.BNG:
        open_edge = fwd & back
    else:
        open_edge = fwd ^ back
    return open_edge.mean()


def test_empirical_edge_frequencies_all_models_d_up_to_4():
    samples = 120_000
    for variant in ALL_VARIANTS:
        for d in (1, 2, 3, 4):
            for k in range(1, 2 * d + 1):
                spec = ModelSpec(d, k, variant)
                p = float(edge_open_probability(spec))
                freq = _empirical_edge_frequency(spec, samples, seed=31 * d + k)
                sigma = max((p * (1 - p) / samples) ** 0.5, 1e-12)
                assert abs(freq - p) <= 4 * sigma + 1e-12, (variant, d, k, freq, p)


# ---------------------------------------------------------------------------
# XnG complement symmetry.
# ---------------------------------------------------------------------------


def test_xng_edge_probability_complement_invariant():
    for d in (1, 2, 3, 4):
        for k in range(1, 2 * d):
            a = edge_open_probability(ModelSpec(d, k, "xng"))
            b = edge_open_probability(ModelSpec(d, 2 * d - k, "xng"))
            assert a == b


def test_xng_three_vertex_path_law_complement_invariant():
    for d, k in [(1, 1), (2, 1), (2, 2), (3, 2)]:
        law_k = oracle_path_joint_law(ModelSpec(d, k, "xng"))
        law_c = oracle_path_joint_law(ModelSpec(d, 2 * d - k, "xng"))
        assert law_k == law_c, (d, k)
