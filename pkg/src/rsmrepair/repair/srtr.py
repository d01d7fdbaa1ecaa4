"""The iterative repair loop with solution exploration.

Each round solves the current MaxSMT problem, then adds two constraints
before re-solving: some previously satisfied correction must take its
penalty, and some previously penalized correction must be satisfied (each
direction only when its index set is non-empty). Successive solutions
therefore differ in their satisfied sets; the loop stops early when the
constrained problem becomes unsatisfiable.
"""
from __future__ import annotations

from dataclasses import replace

from ..corrections import Correction
from ..lang import TransitionFn
from ..trace import Trace
from .backend import get_backend
from .formula import Exploration, RepairFormula, correct_all
from .solution import RepairSolution


def srtr(fn: TransitionFn, params: dict[str, float], designated: set[str] | None,
         k: int, trace: Trace, corrections: list[Correction],
         mode: str = "weighted-sum", h: float = 1.0, eps: float = 1e-3,
         backend="builtin", normalize: bool = False,
         nominal_weight: float = 1.0) -> list[RepairSolution]:
    """Solve for up to k alternative repairs, best first."""
    if k < 1:
        raise ValueError("k must be at least 1")
    bk = get_backend(backend)
    formula = correct_all(fn, params, designated, trace, corrections,
                          h=h, eps=eps, mode=mode, nominal_weight=nominal_weight,
                          normalize=normalize,
                          backend_nonlinear=bk.supports_nonlinear)
    return explore(formula, bk, k, mode)


def explore(formula: RepairFormula, backend, k: int,
            mode: str | None = None) -> list[RepairSolution]:
    all_indices = frozenset(cl.index for cl in formula.clauses)
    solutions: list[RepairSolution] = []
    current = formula
    for _ in range(k):
        solution = backend.solve(current, mode)
        if solution is None:
            break
        solutions.append(solution)
        newly = []
        if solution.satisfied:
            newly.append(Exploration("some_penalized", solution.satisfied))
        unsatisfied = all_indices - solution.satisfied
        if unsatisfied:
            newly.append(Exploration("some_satisfied", unsatisfied))
        if not newly:
            break
        current = replace(current,
                          exploration=current.exploration + tuple(newly))
    return solutions
