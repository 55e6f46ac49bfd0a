"""Resource budget for exact enumerations.

Enumeration-heavy operations (walk coincidence tables, self-avoiding walk
counts, path-pair tables) estimate their work up front in "elementary cases"
and refuse to start when the estimate exceeds the budget.  The default covers
everything at desk scale; set the KNPERC_BUDGET environment variable to raise
or lower it.
"""

import os

from .errors import BudgetExceededError

DEFAULT_BUDGET = 10_000_000_000


def enumeration_budget() -> int:
    raw = os.environ.get("KNPERC_BUDGET")
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError as exc:
        raise BudgetExceededError(f"KNPERC_BUDGET must be an integer, got {raw!r}") from exc
    if value <= 0:
        raise BudgetExceededError("KNPERC_BUDGET must be positive")
    return value


def guard(work: int, what: str) -> None:
    """Raise BudgetExceededError when *work* elementary cases exceed the budget."""
    budget = enumeration_budget()
    if work > budget:
        raise BudgetExceededError(
            f"{what} needs ~{work:.3g} elementary cases, budget is {budget:.3g} "
            "(set KNPERC_BUDGET to override)"
        )
