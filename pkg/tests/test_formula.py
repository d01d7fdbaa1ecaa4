import math
import random

import pytest

from rsmrepair.corrections import Correction, immediate, negative
from rsmrepair.lang import parse_transition
from rsmrepair.repair.formula import (
    FAnd,
    FAtom,
    FALSE,
    TRUE,
    FormulaError,
    correct_all,
    correct_one,
    eval_formula,
    lower_strict,
)
from rsmrepair.trace import Trace, TraceElement, record_step


def _tau5_element(tau5):
    inputs, vars_, state = tau5
    return TraceElement(5, inputs, vars_, state)


def _atom_by_delta(atoms, name):
    for a in atoms:
        if dict(a.affine.coeffs).get(name) is not None:
            return a
    raise AssertionError(f"no atom over {name}")


def test_correct_one_golden(attacker, golden_params, tau5):
    c = Correction("immediate", 5, "KICK")
    phi, residual, diag = correct_one(attacker, _tau5_element(tau5), golden_params,
                                      None, c)
    assert diag is None
    assert isinstance(phi, FAnd) and len(phi.items) == 4
    atoms = list(phi.items)
    assert all(isinstance(a, FAtom) and a.op == "lt" for a in atoms)

    # pi/60 < pi/50 + d_aim  ==>  -d_aim + (pi/60 - pi/50) < 0
    a1 = atoms[0]
    assert dict(a1.affine.coeffs) == {"aimMargin": -1.0}
    assert a1.affine.const == pytest.approx(math.pi / 60 - math.pi / 50)
    # 50 < 80 + d_max
    a2 = atoms[1]
    assert dict(a2.affine.coeffs) == {"maxDist": -1.0}
    assert a2.affine.const == pytest.approx(-30.0)
    # 40 < (80 + d_max) * sin(pi/6)
    a3 = atoms[2]
    assert dict(a3.affine.coeffs)["maxDist"] == pytest.approx(-0.5)
    assert a3.affine.const == pytest.approx(0.0, abs=1e-12)
    # 5 > 2 + (2 + d_kick)
    a4 = atoms[3]
    assert dict(a4.affine.coeffs) == {"kickTimeout": 1.0}
    assert a4.affine.const == pytest.approx(-1.0)

    # delta = 0 leaves the guard unsatisfied (the recorded refusal)
    assert not eval_formula(phi, {})
    # the witness adjustment satisfies it
    assert eval_formula(phi, {"maxDist": 0.5})


def test_correct_one_unconditional_target():
    fn = parse_transition('states { "A", "B" } fn transition { return "B"; }')
    tau = TraceElement(0, {}, {}, "A")
    phi, _, diag = correct_one(fn, tau, {}, None, Correction("immediate", 0, "B"))
    assert phi is TRUE and diag is None


def test_correct_one_unreachable_target():
    fn = parse_transition('states { "A", "B" } fn transition { return "A"; }')
    tau = TraceElement(0, {}, {}, "A")
    phi, _, diag = correct_one(fn, tau, {}, None, Correction("immediate", 0, "B"))
    assert phi is FALSE
    assert "unreachable" in diag


_GATE = parse_transition('''states { "S", "A", "B" }
inputs { x: real }
params { a }
fn transition {
  if (in.x < param.a) { return "A"; } else { return "B"; }
}''')


def test_correct_one_negative_matches_residual_sampling():
    rng = random.Random(11)
    params = {"a": 0.5}
    tau = TraceElement(0, {"x": 1.25}, {}, "S")
    from rsmrepair.residual import make_residual
    residual = make_residual(_GATE, tau, params)
    phi, _, _ = correct_one(_GATE, tau, params, None, Correction("negative", 0, "A"))
    for _ in range(100):
        delta = {"a": rng.uniform(-4, 4)}
        expected = residual.eval({"a": params["a"] + delta["a"]}) != "A"
        assert eval_formula(phi, delta) == expected


def _contradictory_fixture(h):
    trace = Trace.for_fn(_GATE)
    record_step(trace, {"x": 1.0}, {}, "S")
    record_step(trace, {"x": -1.0}, {}, "S")
    corrections = [immediate(trace, 0, "A"), immediate(trace, 1, "B")]
    formula = correct_all(_GATE, {"a": 0.0}, None, trace, corrections, h=h)
    return trace, corrections, formula


def test_correct_all_structure(attacker, golden_params, tau5):
    inputs, vars_, state = tau5
    trace = Trace.for_fn(attacker)
    for _ in range(6):
        record_step(trace, inputs, vars_, state)
    corrections = [immediate(trace, 5, "KICK")]
    formula = correct_all(attacker, golden_params, None, trace, corrections, h=1.0)
    assert formula.deltas == ("aimMargin", "maxDist", "kickTimeout")
    assert len(formula.clauses) == 1
    assert formula.clauses[0].weight == 1.0


def test_correct_all_empty():
    trace = Trace.for_fn(_GATE)
    record_step(trace, {"x": 1.0}, {}, "S")
    formula = correct_all(_GATE, {"a": 0.0}, None, trace, [])
    assert formula.clauses == ()
    assert formula.deltas == ()


def test_correct_all_rejects_bad_h():
    trace = Trace.for_fn(_GATE)
    record_step(trace, {"x": 1.0}, {}, "S")
    with pytest.raises(FormulaError, match="positive"):
        correct_all(_GATE, {"a": 0.0}, None, trace, [], h=0.0)


def test_contradictory_pair_semantics():
    # c0 needs delta > 1, c1 needs delta <= -1: jointly unsatisfiable
    _, _, formula = _contradictory_fixture(h=2.0)
    phi0 = formula.clauses[0].phi
    phi1 = formula.clauses[1].phi
    assert eval_formula(phi0, {"a": 1.5}) and not eval_formula(phi0, {"a": 0.0})
    assert eval_formula(phi1, {"a": -1.0}) and not eval_formula(phi1, {"a": 0.0})
    for x in (-2.0, -1.0, 0.0, 1.5, 2.0):
        assert not (eval_formula(phi0, {"a": x}) and eval_formula(phi1, {"a": x}))


def test_lower_strict():
    _, _, formula = _contradictory_fixture(h=2.0)
    lowered = lower_strict(formula.clauses[0].phi, 0.1)
    # (1 - delta) + 0.1 <= 0  ==>  delta >= 1.1
    assert not eval_formula(lowered, {"a": 1.05})
    assert eval_formula(lowered, {"a": 1.1})


def test_nominal_weight_multiplier():
    trace = Trace.for_fn(_GATE)
    record_step(trace, {"x": 1.0}, {}, "S")
    record_step(trace, {"x": 1.0}, {}, "A")
    nominal = Correction("nominal", 0, "A", weight_tag="nominal")
    plain = Correction("immediate", 0, "A")
    formula = correct_all(_GATE, {"a": 0.0}, None, trace, [plain, nominal],
                          h=2.0, nominal_weight=0.5)
    assert formula.clauses[0].weight == 2.0
    assert formula.clauses[1].weight == 1.0


def test_per_correction_designated_sets():
    fn = parse_transition('''states { "S", "A", "B" }
inputs { x: real }
params { a, b }
fn transition {
  if (in.x < param.a + param.b) { return "A"; } else { return "B"; }
}''')
    trace = Trace.for_fn(fn)
    record_step(trace, {"x": 1.0}, {}, "S")
    c = Correction("immediate", 0, "A", designated=frozenset({"b"}))
    formula = correct_all(fn, {"a": 0.0, "b": 0.0}, None, trace, [c])
    assert formula.deltas == ("b",)
    assert eval_formula(formula.clauses[0].phi, {"b": 1.5})
