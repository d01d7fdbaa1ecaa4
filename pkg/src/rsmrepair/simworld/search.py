"""Exhaustive parameter-grid search against labeled trace elements."""
from __future__ import annotations

import itertools
import warnings

from ..lang import TransitionFn, eval_transition
from ..trace import TraceElement
from .core import SimError

MAX_GRID_POINTS = 100_000


def exhaustive_search(
    fn: TransitionFn,
    param_grid: dict[str, list[float]],
    labeled: list[tuple[TraceElement, str, bool]],
    initial: dict[str, float],
) -> tuple[dict[str, float], int]:
    """Best grid point by agreement with labeled transitions.

    ``labeled`` holds (element, state, should_transition) triples; a point
    agrees when the transition output equals the state exactly when
    flagged. Ties break toward the smallest L1 distance from the initial
    parameters. Returns the winning parameter map and its agreement count.
    """
    names = list(param_grid)
    if not names:
        raise SimError("empty parameter grid")
    sizes = 1
    for vals in param_grid.values():
        if not vals:
            raise SimError("empty parameter grid axis")
        sizes *= len(vals)
    if sizes > MAX_GRID_POINTS:
        raise SimError(f"parameter grid has {sizes} points "
                       f"(desk-scale limit {MAX_GRID_POINTS})")

    best: tuple[int, float, dict] | None = None
    for values in itertools.product(*(param_grid[n] for n in names)):
        candidate = dict(initial)
        candidate.update(zip(names, values))
        agreement = 0
        for tau, state, should in labeled:
            out = eval_transition(fn, tau.state, tau.inputs, tau.vars, candidate)
            agreement += int((out == state) == should)
        distance = sum(abs(candidate[n] - initial[n]) for n in names)
        key = (-agreement, distance)
        if best is None or key < (-best[0], best[1]):
            best = (agreement, distance, candidate)

    agreement, _, winner = best
    if agreement == 0:
        warnings.warn("no grid point agrees with any labeled position")
    return winner, agreement
