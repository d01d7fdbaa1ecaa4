import random

import pytest

from gen_instances import random_instance
from rsmrepair.corrections import immediate
from rsmrepair.repair.backend import (
    BackendError,
    OracleBackend,
    PipeBackend,
    _parse_response,
    get_backend,
)
from rsmrepair.repair.encode import EncodeError, encode, smt_real
from rsmrepair.repair.formula import correct_all
from rsmrepair.repair.oracle import solve_oracle
from rsmrepair.repair.srtr import explore, srtr
from rsmrepair.trace import Trace, record_step

from test_formula import _GATE, _contradictory_fixture


@pytest.fixture(scope="module")
def builtin():
    backend = get_backend("builtin")
    yield backend
    backend.close()


def _golden_formula(attacker, golden_params, tau5):
    inputs, vars_, state = tau5
    trace = Trace.for_fn(attacker)
    for _ in range(6):
        record_step(trace, inputs, vars_, state)
    corrections = [immediate(trace, 5, "KICK")]
    return correct_all(attacker, golden_params, None, trace, corrections, h=1.0)


# -- encoding ----------------------------------------------------------------

def test_smt_real_literals():
    assert smt_real(0.5) == "0.5"
    assert smt_real(-0.5) == "(- 0.5)"
    # exact decimal expansion of the nearest float, never scientific notation
    assert smt_real(1e-06).startswith("0.00000099999999999999995")
    assert "e" not in smt_real(1e-30).lower()
    assert float(smt_real(0.1)) == 0.1


def test_encode_script_structure(attacker, golden_params, tau5):
    formula = _golden_formula(attacker, golden_params, tau5)
    script = encode(formula)
    assert "(set-logic QF_LRA)" in script
    assert "(declare-const d_maxDist Real)" in script
    assert "(declare-const w_0 Real)" in script
    assert "(assert (or (= w_0 0.0) (= w_0 1.0)))" in script
    assert "(minimize" in script
    assert script.endswith("(get-model)\n")
    # deterministic emission
    assert encode(formula) == script


def test_encode_rejects_leaked_delta():
    from dataclasses import replace
    _, _, formula = _contradictory_fixture(h=1.0)
    broken = replace(formula, deltas=())
    with pytest.raises(EncodeError, match="undeclared"):
        encode(broken)


def test_encode_lexicographic_modes(attacker, golden_params, tau5):
    formula = _golden_formula(attacker, golden_params, tau5)
    lex = encode(formula, mode="lexicographic")
    assert lex.count("(minimize") == 2
    par = encode(formula, mode="pareto")
    assert "(set-option :opt.priority pareto)" in par


# -- response parsing ---------------------------------------------------------

def test_parse_response_z3_style():
    raw = '''sat
(objectives
 ((+ w_0 t_d) (/ 1.0 2.0))
)
(model
  (define-fun w_0 () Real 0.0)
  (define-fun d_maxDist () Real (- (/ 1.0 2.0)))
)
'''
    status, objectives, model = _parse_response(raw)
    assert status == "sat"
    assert objectives == [0.5]
    assert model == {"w_0": 0.0, "d_maxDist": -0.5}


def test_parse_response_unsat():
    status, _, _ = _parse_response("unsat\n(error \"model is not available\")\n")
    assert status == "unsat"


def test_parse_response_garbage():
    with pytest.raises(BackendError, match="no status"):
        _parse_response("\n")


# -- pipe backend ------------------------------------------------------------

def test_pipe_backend_golden(attacker, golden_params, tau5, builtin):
    formula = _golden_formula(attacker, golden_params, tau5)
    sol = builtin.solve(formula)
    assert sol.satisfied == frozenset({0})
    assert sol.adjustments["aimMargin"] == pytest.approx(0.0, abs=1e-9)
    assert sol.adjustments["kickTimeout"] == pytest.approx(0.0, abs=1e-9)
    assert 0.0 < sol.adjustments["maxDist"] <= 1.0
    assert sol.backend_id == "builtin"
    assert sol.wall_time > 0


def test_pipe_backend_reuse_and_unsat(builtin):
    from rsmrepair.repair.formula import Exploration, RepairFormula, Clause, TRUE
    from dataclasses import replace
    base = RepairFormula(deltas=(), clauses=(Clause(index=0, phi=TRUE, weight=1.0),),
                         h=1.0, eps=1e-3, mode="weighted-sum")
    sol = builtin.solve(base)
    assert sol.satisfied == frozenset({0})
    impossible = replace(base, exploration=(
        Exploration("some_penalized", frozenset({0})),
        Exploration("some_satisfied", frozenset({0})),
    ))
    assert builtin.solve(impossible) is None
    # the process stays usable after an unsat exchange
    again = builtin.solve(base)
    assert again.satisfied == frozenset({0})


def test_backend_failure_has_diagnostics():
    backend = PipeBackend(["/nonexistent-solver"], id="broken")
    _, _, formula = _contradictory_fixture(h=1.0)
    with pytest.raises(BackendError, match="cannot start"):
        backend.solve(formula)


def test_exploration_distinct_sets(builtin):
    trace, corrections, formula = _contradictory_fixture(h=2.0)
    solutions = explore(formula, builtin, k=3)
    assert 2 <= len(solutions) <= 3
    seen = [s.satisfied for s in solutions]
    assert len(set(seen)) == len(seen)


def test_backend_oracle_agreement_smoke(builtin):
    rng = random.Random(20240809)
    for _ in range(40):
        formula = random_instance(rng, max_corrections=5, max_deltas=3)
        oracle_sol = solve_oracle(formula)
        pipe_sol = builtin.solve(formula)
        assert oracle_sol is not None and pipe_sol is not None
        tol = 1e-6 + formula.eps
        assert abs(oracle_sol.objective - pipe_sol.objective) <= tol, formula
        assert oracle_sol.satisfied == pipe_sol.satisfied, formula
