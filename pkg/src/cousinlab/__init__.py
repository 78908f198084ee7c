"""Exact-arithmetic tools for complex abelian quotients without enough torus.

The package decides whether a period lattice gives a toroidal (Cousin-type)
quotient, measures how far the lattice data stays away from integer points
(with exponential-decay certificates when possible), solves the del-bar
equation on truncated character spaces through an explicit homotopy, and
computes Hodge and Betti numbers for the solvmanifolds built from number
fields.  Everything user-visible is certified: interval arithmetic drives the
searches, and exact algebra signs off on every claim of equality or of a
strict inequality.
"""

from .errors import (
    CousinlabError,
    PreconditionError,
    PrecisionExhausted,
    ResourceLimit,
    SchemaError,
)

__version__ = "0.1.0"

__all__ = [
    "CousinlabError",
    "SchemaError",
    "PreconditionError",
    "PrecisionExhausted",
    "ResourceLimit",
    "__version__",
]
