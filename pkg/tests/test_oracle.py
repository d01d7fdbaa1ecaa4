import math
import random

import pytest

from rsmrepair.corrections import Correction, immediate
from rsmrepair.lang import parse_transition
from rsmrepair.repair.formula import (
    Affine,
    Clause,
    FAtom,
    RepairFormula,
    condition_to_formula,
    correct_all,
    fand,
)
from rsmrepair.repair.oracle import OracleScaleError, _min_l1, solve_oracle
from rsmrepair.repair.solution import apply_solution, verify_solution
from rsmrepair.repair.srtr import srtr
from rsmrepair.trace import Trace, record_step

from gen import random_bindings, random_transition
from test_formula import _GATE, _contradictory_fixture


def _golden_setup(attacker, golden_params, tau5):
    inputs, vars_, state = tau5
    trace = Trace.for_fn(attacker)
    for _ in range(6):
        record_step(trace, inputs, vars_, state)
    corrections = [immediate(trace, 5, "KICK")]
    return trace, corrections


def test_oracle_golden(attacker, golden_params, tau5):
    trace, corrections = _golden_setup(attacker, golden_params, tau5)
    solutions = srtr(attacker, golden_params, None, 1, trace, corrections,
                     h=1.0, backend="oracle")
    assert len(solutions) == 1
    sol = solutions[0]
    assert sol.satisfied == frozenset({0})
    assert sol.adjustments["aimMargin"] == 0.0
    assert sol.adjustments["kickTimeout"] == 0.0
    assert 0.0 < sol.adjustments["maxDist"] <= 1.0
    assert verify_solution(attacker, golden_params, trace, corrections, sol) == []
    from rsmrepair.lang import eval_transition
    adjusted = apply_solution(golden_params, sol)
    inputs, vars_, state = tau5
    assert eval_transition(attacker, state, inputs, vars_, adjusted) == "KICK"


def test_oracle_nominal_on_correct_config(attacker, golden_params, tau5):
    inputs, vars_, state = tau5
    trace = Trace.for_fn(attacker)
    record_step(trace, inputs, vars_, state)
    record_step(trace, inputs, vars_, "GOTO")
    from rsmrepair.corrections import nominal_from_trace
    corrections = nominal_from_trace(trace, [0])
    formula = correct_all(attacker, golden_params, None, trace, corrections)
    sol = solve_oracle(formula)
    assert sol.objective == 0.0
    assert all(v == 0.0 for v in sol.adjustments.values())
    assert sol.satisfied == frozenset({0})


def test_oracle_contradictory_pair():
    _, corrections, formula = _contradictory_fixture(h=2.0)
    sol = solve_oracle(formula)
    assert len(sol.satisfied) == 1
    assert sol.objective == pytest.approx(3.0, abs=2 * formula.eps)


def test_oracle_exploration_swap():
    trace, corrections, _ = _contradictory_fixture(h=2.0)
    solutions = srtr(_GATE, {"a": 0.0}, None, 2, trace, corrections, h=2.0,
                     backend="oracle")
    assert len(solutions) == 2
    assert solutions[0].satisfied != solutions[1].satisfied
    assert solutions[0].satisfied | solutions[1].satisfied == {0, 1}


def test_oracle_desk_scale_bounds():
    clause = Clause(index=0, phi=FAtom(Affine.make({"p0": 1.0}, 0.0), "le"),
                    weight=1.0)
    big = RepairFormula(deltas=("p0",),
                        clauses=tuple(
                            Clause(index=i, phi=clause.phi, weight=1.0)
                            for i in range(13)),
                        h=1.0, eps=1e-3, mode="weighted-sum")
    with pytest.raises(OracleScaleError, match="corrections"):
        solve_oracle(big)


def test_oracle_coupled_vertex_minimum():
    # delta0 + delta1 >= 4 with minimum |.|_1 cost 4 on the boundary
    phi = FAtom(Affine.make({"p0": -1.0, "p1": -1.0}, 4.0), "le")
    formula = RepairFormula(deltas=("p0", "p1"),
                            clauses=(Clause(index=0, phi=phi, weight=10.0),),
                            h=10.0, eps=1e-3, mode="weighted-sum")
    sol = solve_oracle(formula)
    assert sol.satisfied == frozenset({0})
    assert sol.objective == pytest.approx(4.0, abs=1e-9)


def test_oracle_pinned_equality():
    phi = fand([FAtom(Affine.make({"p0": 1.0}, -2.0), "eq"),
                FAtom(Affine.make({"p1": 1.0, "p0": 0.5}, 0.0), "le")])
    formula = RepairFormula(deltas=("p0", "p1"),
                            clauses=(Clause(index=0, phi=phi, weight=10.0),),
                            h=10.0, eps=1e-3, mode="weighted-sum")
    sol = solve_oracle(formula)
    # p0 pinned to 2, p1 <= -1 from the coupled atom
    assert sol.adjustments["p0"] == pytest.approx(2.0)
    assert sol.adjustments["p1"] == pytest.approx(-1.0)
    assert sol.objective == pytest.approx(3.0, abs=1e-9)


def test_residual_paths_oracle_partition():
    """Path conditions are pairwise unsatisfiable and jointly exhaustive."""
    from rsmrepair.repair.formula import negate
    from rsmrepair.repair.oracle import satisfiable
    from rsmrepair.residual import make_residual
    from rsmrepair.trace import TraceElement
    rng = random.Random(31337)
    checked = 0
    while checked < 40:
        fn = random_transition(rng)
        state, inputs, vars_, params = random_bindings(rng, fn)
        residual = make_residual(fn, TraceElement(0, inputs, vars_, state), params)
        if not residual.params or len(residual.paths) < 2:
            continue
        base = {p: params[p] for p in residual.params}
        formulas = [condition_to_formula(cond, base) for cond, _ in residual.paths]
        decisive = True
        for i in range(len(formulas)):
            for j in range(i + 1, len(formulas)):
                verdict = satisfiable(fand([formulas[i], formulas[j]]))
                assert verdict is not True
                decisive = decisive and verdict is False
        none_hold = satisfiable(fand([negate(f) for f in formulas]))
        assert none_hold is not True
        if decisive and none_hold is False:
            checked += 1
