"""Exact-arithmetic toolkit for surface singularities.

Dual graphs of exceptional curves, Hirzebruch-Jung resolutions and minimal
log discrepancies, Zariski decompositions over declared curve universes,
explicit nef coefficient schemes, a two-parameter counterexample family,
and local rank-3 toric fan computations. All arithmetic is exact; every
numeric claim the package makes is checked with integer or rational
identities, never with tolerances.
"""

from .errors import PluricalcError

__version__ = "0.1.0"

__all__ = ["PluricalcError", "__version__"]
