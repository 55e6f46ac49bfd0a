"""Closed-form percolation criteria: the rho(d) upper bound and its refinements,
the R(k, d) margin with its large-d induction, and the BnG sub/supercriticality
and 1-dependent thresholds.

The upper bound on rho(d) = P(tau_d < infinity) is assembled from an exact
head (the coincidence-time pmf up to a cutoff), the factorial terms d^-l * l!
for the remaining l <= d, and a zeta-function tail: the block of levels
l in (jd, (j+1)d] contributes at most sqrt(2 pi d) (e^(-1/13)/sqrt(2 pi))^d
j^(-(d-1)/2), so summing blocks gives the zeta((d-1)/2) factor.  The method
needs (d-1)/2 > 1, i.e. at least four dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

from .errors import ValidationError
from .walks import TauPmf, firstfew

#: Default absolute tolerance when evaluating zeta inside the bounds: the
#: reported values carry six significant figures, so 1e-8 leaves headroom.
ZETA_TOL = 1e-8


@lru_cache(maxsize=None)
def zeta(s: float, tol: float = 1e-9) -> float:
    """Riemann zeta for real s > 1 with guaranteed absolute error <= tol.

    Truncates at J and replaces the tail by the midpoint of its integral
    bracket [ (J+1)^(1-s)/(s-1), J^(1-s)/(s-1) ]; the half-width of the
    bracket is at most J^-s / 2, so J = ceil((1/(2 tol))^(1/s)) suffices.
    """
    if s <= 1:
        raise ValidationError("zeta(s) diverges for s <= 1 (needs at least four dimensions)")
    if tol <= 0:
        raise ValidationError("tol must be positive")
    j_cut = max(2, math.ceil((1.0 / (2.0 * tol)) ** (1.0 / s)))
    head = math.fsum(j ** -s for j in range(1, j_cut + 1))
    lo = (j_cut + 1) ** (1.0 - s) / (s - 1.0)
    hi = j_cut ** (1.0 - s) / (s - 1.0)
    return head + 0.5 * (lo + hi)


def _tail_coefficient(d: int) -> float:
    return math.sqrt(2 * math.pi * d) * (math.exp(-1.0 / 13.0) / math.sqrt(2 * math.pi)) ** d


def _rho_upper(d: int, head: Fraction, cutoff: int) -> Tuple[float, Dict[str, float]]:
    """Shared assembly: exact head up to cutoff + factorial terms + zeta tail."""
    if d < 4:
        raise ValidationError("the rho(d) upper bound needs d >= 4")
    factorial_sum = Fraction(0)
    for l in range(max(3, cutoff + 1), d + 1):
        factorial_sum += Fraction(math.factorial(l), d ** l)
    s = (d - 1) / 2.0
    coeff = _tail_coefficient(d)
    zeta_full = zeta(s, ZETA_TOL)
    # Blocks j with jd < l <= (j+1)d partially covered by the exact head lose
    # the covered fraction of their weight.
    adjustment = 0.0
    j = 1
    while j * d < cutoff:
        covered = min(cutoff - j * d, d)
        adjustment += (covered / d) * j ** -s
        j += 1
    tail = coeff * (zeta_full - adjustment)
    terms = {
        "exact_head": float(head),
        "factorial_terms": float(factorial_sum),
        "zeta_tail": tail,
    }
    return float(head) + float(factorial_sum) + tail, terms


@lru_cache(maxsize=None)
def cdub(d: int) -> float:
    """The closed-form upper bound U(d) on rho(d).

    U(d) = 1/d + 1/d^3 - 1/d^4 + sum_{l=3}^{d} d^-l l!
           + sqrt(2 pi d) (e^(-1/13)/sqrt(2 pi))^d zeta((d-1)/2).
    """
    head = sum(firstfew(d), Fraction(0))
    value, _ = _rho_upper(d, head, cutoff=2)
    return value


def cdub_terms(d: int) -> Dict[str, float]:
    head = sum(firstfew(d), Fraction(0))
    _, terms = _rho_upper(d, head, cutoff=2)
    return terms


def refined_rho_bound(d: int, tau: TauPmf, cutoff: Optional[int] = None) -> float:
    """Upper bound on rho(d) combining the exact coincidence head with the tail.

    The exact pmf replaces both the early closed forms and any factorial or
    zeta-block terms it covers; for d=4 with cutoff 5 this reproduces the
    split where only 3/4 of the first zeta block survives.
    """
    if cutoff is None:
        cutoff = tau.cutoff
    if cutoff < 2:
        raise ValidationError("refined bound needs the exact head at least up to l = 2")
    if cutoff > tau.cutoff:
        raise ValidationError(f"tau pmf only reaches cutoff {tau.cutoff}")
    if tau.d != d:
        raise ValidationError("tau pmf dimension mismatch")
    head = sum(tau.values[: cutoff + 1], Fraction(0))
    value, _ = _rho_upper(d, head, cutoff)
    return value


def margin(k: int, d: int) -> float:
    """R(k, d) = U(d) - k/(2d); percolation is certified when this is negative."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    return cdub(d) - k / (2 * d)


def smallest_percolating_k(d: int) -> int:
    """Smallest k with U(d) < k/(2d), found by scanning k."""
    u = cdub(d)
    for k in range(1, 2 * d + 1):
        if u < k / (2 * d):
            return k
    raise ValidationError(f"no k <= 2d satisfies the criterion at d={d}")


@dataclass(frozen=True)
class BoundReport:
    """Evaluated percolation criterion for one (d, k) with itemized terms."""

    d: int
    k: int
    cdub_value: float
    refined_value: Optional[float]
    threshold: float  # k / (2d)
    verdict: str  # "percolates-by-this-criterion" | "criterion-inconclusive"
    terms: Dict[str, float]

    def __post_init__(self) -> None:
        effective = self.refined_value if self.refined_value is not None else self.cdub_value
        expected = (
            "percolates-by-this-criterion"
            if effective < self.threshold
            else "criterion-inconclusive"
        )
        assert self.verdict == expected


def bound_report(d: int, k: int, tau: Optional[TauPmf] = None) -> BoundReport:
    head = sum(firstfew(d), Fraction(0))
    cdub_value, terms = _rho_upper(d, head, cutoff=2)
    refined = None
    if tau is not None:
        refined = refined_rho_bound(d, tau)
        terms = dict(terms)
        terms["refined"] = refined
    threshold = k / (2 * d)
    effective = refined if refined is not None else cdub_value
    verdict = (
        "percolates-by-this-criterion" if effective < threshold else "criterion-inconclusive"
    )
    return BoundReport(d, k, cdub_value, refined, threshold, verdict, terms)


# ---------------------------------------------------------------------------
# Large-d induction for the margin R(3, d) < 0.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InductionStep:
    d: int
    new_term_ok: bool  # (d+1)^-(d+1) (d+1)! <= telescoped correction (exact rationals)
    contraction_ok: bool  # R(3, d+1) <= d/(d+1) * R(3, d) (numeric)
    printed_lower_constant_ok: bool  # (2d^3-2d-1)/d^3 > 1.99 (exact; see note)
    margin_next: float


@dataclass(frozen=True)
class InductionTrace:
    """Numeric verification of the induction certifying R(3, d) < 0 for d >= 7.

    printed_constant_1115 / sqrt_ratio_constant check the two displayed
    constants 12!/12^8 < 1.115 and sqrt(12/11) e^(-1/13)/sqrt(2 pi) ~ 0.385831
    < 11/12.  The per-step printed lower constant 1.99 is recorded as data:
    the exact value 2 - 2/d^2 - 1/d^3 dips below 1.99 for d <= 14 even though
    the exact inequality (new_term_ok) holds there; both are reported.
    """

    d_max: int
    base_margins: Dict[int, float]  # direct R(3, d) for 7 <= d <= 11
    steps: List[InductionStep]
    printed_constant_1115_ok: bool
    sqrt_ratio_constant: float
    sqrt_ratio_ok: bool  # < 11/12
    chain_negative_ok: bool  # R(3, d) < 0 for all 7 <= d <= d_max

    @property
    def all_steps_ok(self) -> bool:
        return all(s.new_term_ok and s.contraction_ok for s in self.steps)


def _new_term_inequality(d: int) -> bool:
    lhs = Fraction(math.factorial(d + 1), (d + 1) ** (d + 1))
    rhs = Fraction(d, d + 1) * (Fraction(1, d ** 3) - Fraction(1, d ** 4)) - (
        Fraction(1, (d + 1) ** 3) - Fraction(1, (d + 1) ** 4)
    )
    return lhs <= rhs


def largedmon_check(d_max: int) -> InductionTrace:
    """Verify the induction inequalities for 11 <= d < d_max and the base cases."""
    if d_max < 12:
        raise ValidationError("the induction trace needs d_max >= 12")
    base = {d: margin(3, d) for d in range(7, 12)}
    steps = []
    margins = {11: base[11]}
    for d in range(11, d_max):
        m_next = margin(3, d + 1)
        margins[d + 1] = m_next
        steps.append(
            InductionStep(
                d=d,
                new_term_ok=_new_term_inequality(d),
                contraction_ok=m_next <= (d / (d + 1)) * margins[d],
                printed_lower_constant_ok=(
                    Fraction(2 * d ** 3 - 2 * d - 1, d ** 3) > Fraction(199, 100)
                ),
                margin_next=m_next,
            )
        )
    sqrt_ratio = math.sqrt(12 / 11) * math.exp(-1 / 13) / math.sqrt(2 * math.pi)
    chain = all(v < 0 for v in base.values()) and all(s.margin_next < 0 for s in steps)
    return InductionTrace(
        d_max=d_max,
        base_margins=base,
        steps=steps,
        printed_constant_1115_ok=Fraction(math.factorial(12), 12 ** 8) < Fraction(1115, 1000),
        sqrt_ratio_constant=sqrt_ratio,
        sqrt_ratio_ok=sqrt_ratio < 11 / 12,
        chain_negative_ok=chain,
    )


# ---------------------------------------------------------------------------
# BnG criteria and the 1-dependent threshold.
# ---------------------------------------------------------------------------

#: Upper bound on the connective constant of Z^2 used by the supercritical
#: criterion (published rigorous enumeration bound).
C2_UPPER = 2.679192495

#: Supercritical slope sqrt(4 (1 - 1/c(2))) evaluated at C2_UPPER.
SUPERCRITICAL_SLOPE = math.sqrt(4.0 * (1.0 - 1.0 / C2_UPPER))


@dataclass(frozen=True)
class ConnectiveConstantBound:
    """A two-sided bound on the connective constant c(d) with a provenance tag."""

    d: int
    lower: float
    upper: float
    source: str

    def __post_init__(self) -> None:
        if not self.d <= self.lower <= self.upper <= 2 * self.d - 1:
            raise ValidationError(
                f"need d <= lower <= upper <= 2d-1, got {self.lower}..{self.upper} at d={self.d}"
            )


def default_connective_bound(d: int) -> ConnectiveConstantBound:
    """Shipped defaults: the published c(2) bound, else the trivial 2d-1."""
    if d == 1:
        return ConnectiveConstantBound(1, 1.0, 1.0, "exact (half-line walks)")
    if d == 2:
        return ConnectiveConstantBound(2, 2.0, C2_UPPER, "published enumeration bound")
    return ConnectiveConstantBound(d, float(d), float(2 * d - 1), "trivial degree bound")


def bng_subcritical(k: int, d: int, c_upper: Optional[ConnectiveConstantBound] = None) -> str:
    """No-percolation criterion for the BnG: k(k-1) c(d) < 2d(2d-1).

    Uses an upper bound on c(d): the first-moment argument needs
    c(d) * k(k-1)/(2d(2d-1)) < 1, so any upper bound is sufficient.
    """
    if c_upper is None:
        c_upper = default_connective_bound(d)
    if c_upper.d != d:
        raise ValidationError("connective bound dimension mismatch")
    if k * (k - 1) * c_upper.upper < 2 * d * (2 * d - 1):
        return "no-percolation-by-this-criterion"
    return "criterion-inconclusive"


def bng_supercritical(k: int, d: int) -> str:
    """Percolation criterion for the BnG: k > d * sqrt(4 (1 - 1/c(2)))."""
    if k > d * SUPERCRITICAL_SLOPE:
        return "percolates-by-this-criterion"
    return "criterion-inconclusive"


#: 1-dependent thresholds: the asymptotic edge-probability bound and the
#: weaker two-dimensional constant reported alongside it.
ONE_DEP_LIMIT = 0.5847
ONE_DEP_PLANAR = 0.8457


@dataclass(frozen=True)
class OneDependentVerdict:
    alpha: float
    verdict: str
    threshold: float  # 2 sqrt(0.5847)
    planar_threshold: float  # 2 sqrt(0.8457)


def one_dependent_criterion(alpha: float) -> OneDependentVerdict:
    """Asymptotic BnG percolation for k = floor(alpha d): needs alpha^2/4 > 0.5847."""
    if alpha <= 0:
        raise ValidationError("alpha must be positive")
    verdict = (
        "percolates-asymptotically"
        if alpha * alpha / 4.0 > ONE_DEP_LIMIT
        else "criterion-inconclusive"
    )
    return OneDependentVerdict(
        alpha=alpha,
        verdict=verdict,
        threshold=2.0 * math.sqrt(ONE_DEP_LIMIT),
        planar_threshold=2.0 * math.sqrt(ONE_DEP_PLANAR),
    )
