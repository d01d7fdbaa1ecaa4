"""Repair solutions: penalty assignment, adjustments, and validation."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..corrections import Correction
from ..lang import TransitionFn, eval_transition
from ..trace import Trace


@dataclass(frozen=True)
class RepairSolution:
    adjustments: dict[str, float]
    penalties: dict[int, float]
    satisfied: frozenset[int]
    objective: float
    backend_id: str
    wall_time: float = 0.0
    diagnostics: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "adjustments": dict(sorted(self.adjustments.items())),
            "penalties": {str(k): v for k, v in sorted(self.penalties.items())},
            "satisfied": sorted(self.satisfied),
            "objective": self.objective,
            "backend": self.backend_id,
            "wall_time": self.wall_time,
        }


def apply_solution(params: dict[str, float], solution: RepairSolution) -> dict[str, float]:
    """New parameter map with the solution's adjustments added in."""
    out = dict(params)
    for name, delta in solution.adjustments.items():
        out[name] = out[name] + delta
    return out


def verify_solution(fn: TransitionFn, params: dict[str, float], trace: Trace,
                    corrections: list[Correction],
                    solution: RepairSolution) -> list[str]:
    """Re-interpret the original transition function at every satisfied
    correction under the adjusted parameters; returns mismatch messages."""
    adjusted = apply_solution(params, solution)
    problems = []
    for i in sorted(solution.satisfied):
        c = corrections[i]
        tau = trace[c.t]
        out = eval_transition(fn, tau.state, tau.inputs, tau.vars, adjusted)
        if c.kind == "negative":
            if out == c.target_state:
                problems.append(f"correction {i}: still outputs {out!r} at t={c.t}")
        else:
            if out != c.target_state:
                problems.append(
                    f"correction {i}: outputs {out!r} instead of "
                    f"{c.target_state!r} at t={c.t}")
    return problems
