import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gen import random_bindings, random_transition
from rsmrepair import load_corpus
from rsmrepair.lang import (
    Block,
    CheckError,
    MissingBindingError,
    ParseError,
    Return,
    Vec2,
    angle_mod,
    eval_transition,
    parse_transition,
)


def test_parse_attacker(attacker):
    assert attacker.states == ("START", "GOTO", "KICK", "END")
    assert attacker.params == ("aimMargin", "maxDist", "viewAng", "kickTimeout")
    assert attacker.start == "START"
    assert attacker.end == "END"
    assert set(attacker.inputs) == {"ballLoc", "robotLoc", "robotAng", "targetAng", "time"}
    assert set(attacker.vars) == {"lastKick", "timeInKick"}


@pytest.mark.parametrize("name", ["docker", "deflector", "passing"])
def test_parse_corpus(name):
    fn = load_corpus(name)
    assert fn.states[0] == "START"
    assert fn.states[-1] == "END"


def test_parse_minimal():
    fn = parse_transition('states { "END" } fn transition { return "END"; }')
    assert fn.body == Block((Return("END"),))
    assert fn.params == ()


def test_undeclared_state_is_error():
    with pytest.raises(CheckError, match="KICK"):
        parse_transition('states { "END" } fn transition { return "KICK"; }')


def test_parse_error_position():
    with pytest.raises(ParseError) as exc:
        parse_transition('states { "A" }\nfn transition { return ; }')
    assert exc.value.line == 2


def test_var_assignment_rejected():
    src = '''states { "A" }
vars { x: real }
fn transition { var.x := 1.0; return "A"; }'''
    with pytest.raises(ParseError, match="read-only"):
        parse_transition(src)


def test_path_without_return():
    src = '''states { "A", "B" }
inputs { x: real }
fn transition { if (in.x > 0.0) { return "A"; } }'''
    with pytest.raises(CheckError, match="returns"):
        parse_transition(src)


def test_shape_mismatch():
    src = '''states { "A" }
inputs { t: real }
fn transition { if (norm(in.t) > 1.0) { return "A"; } else { return "A"; } }'''
    with pytest.raises(CheckError, match="norm"):
        parse_transition(src)


def test_undeclared_identifier():
    src = 'states { "A" } fn transition { if (in.x > 0.0) { return "A"; } else { return "A"; } }'
    with pytest.raises(CheckError, match="undeclared input"):
        parse_transition(src)


# -- interpreter -----------------------------------------------------------

def test_eval_tau5_refuses_kick(attacker, golden_params, tau5):
    inputs, vars_, state = tau5
    assert eval_transition(attacker, state, inputs, vars_, golden_params) == "GOTO"


def test_eval_tau5_after_adjustment(attacker, golden_params, tau5):
    inputs, vars_, state = tau5
    params = dict(golden_params, maxDist=80.5)
    assert eval_transition(attacker, state, inputs, vars_, params) == "KICK"


def test_eval_start_unconditional(attacker, golden_params):
    rng = random.Random(7)
    for _ in range(5):
        inputs = {
            "ballLoc": Vec2(rng.uniform(-90, 90), rng.uniform(-60, 60)),
            "robotLoc": Vec2(rng.uniform(-90, 90), rng.uniform(-60, 60)),
            "robotAng": rng.uniform(-3, 3),
            "targetAng": rng.uniform(-3, 3),
            "time": rng.uniform(0, 100),
        }
        vars_ = {"lastKick": rng.uniform(0, 10), "timeInKick": rng.uniform(0, 10)}
        assert eval_transition(attacker, "START", inputs, vars_, golden_params) == "GOTO"


def test_eval_missing_binding(attacker, golden_params, tau5):
    inputs, vars_, state = tau5
    partial = {k: v for k, v in inputs.items() if k != "time"}
    with pytest.raises(MissingBindingError, match="time"):
        eval_transition(attacker, state, partial, vars_, golden_params)


def test_eval_deterministic(attacker, golden_params, tau5):
    inputs, vars_, state = tau5
    results = {eval_transition(attacker, state, inputs, vars_, golden_params)
               for _ in range(20)}
    assert len(results) == 1


def test_totality_fuzz():
    rng = random.Random(2024)
    for _ in range(300):
        fn = random_transition(rng)
        for _ in range(3):
            state, inputs, vars_, params = random_bindings(rng, fn)
            label = eval_transition(fn, state, inputs, vars_, params)
            assert label in fn.states


# -- angle_mod -------------------------------------------------------------

def test_angle_mod_examples():
    assert angle_mod(math.pi / 60) == math.pi / 60
    assert angle_mod(2 * math.pi) == 0.0
    assert angle_mod(-3 * math.pi / 2) == pytest.approx(math.pi / 2, abs=1e-12)


@given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
@settings(max_examples=500)
def test_angle_mod_properties(a):
    r = angle_mod(a)
    assert -math.pi < r <= math.pi
    k = (a - r) / math.tau
    assert abs(k - round(k)) < 1e-6
    assert angle_mod(r) == r
