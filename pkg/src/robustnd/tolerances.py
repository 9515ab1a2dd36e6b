"""Central numeric tolerance settings shared by the LP, MIP and model layers."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Single configuration record for every numeric tolerance in the solver stack.

    Attributes:
        feas: absolute feasibility tolerance on scaled constraint rows.
        gap_rel: relative tolerance between primal and dual objectives of an
            optimal LP solution, and between a MIP bound and its incumbent.
        integrality: maximum distance from an integer value for a variable to
            count as integral.
        pivot: smallest pivot magnitude accepted by the simplex basis update.
        ceil_guard: slack subtracted before a ceiling so float dust cannot
            buy a spurious extra capacity module.
        div_guard: denominator floor for relative-gap computations.
    """

    feas: float = 1e-7
    gap_rel: float = 1e-6
    integrality: float = 1e-6
    pivot: float = 1e-9
    ceil_guard: float = 1e-9
    div_guard: float = 1e-9


DEFAULT = Tolerances()

# Pheromone trails are clamped to this floor so every move keeps a nonzero
# sampling probability.
TRAIL_FLOOR = 1e-4
