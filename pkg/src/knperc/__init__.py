"""Percolation laboratory for lattice k-neighbor graphs on Z^d.

Each vertex uniformly picks k of its 2d nearest neighbors; the directed,
undirected, bidirectional and XOR edge rules give four percolation models.
The package computes every closed-form quantity exactly (rational arithmetic)
and estimates the rest with seeded, reproducible Monte Carlo.
"""

__version__ = "0.1.0"

from .errors import BudgetExceededError, KnpercError, ValidationError
from .lattice import (
    ChoiceField,
    Direction,
    ModelSpec,
    PairRelation,
    Variant,
    degree_pmf,
    edge_open,
    edge_open_probability,
    pair_probability,
    sample_choice,
)

__all__ = [
    "BudgetExceededError",
    "ChoiceField",
    "Direction",
    "KnpercError",
    "ModelSpec",
    "PairRelation",
    "ValidationError",
    "Variant",
    "degree_pmf",
    "edge_open",
    "edge_open_probability",
    "pair_probability",
    "sample_choice",
    "__version__",
]
