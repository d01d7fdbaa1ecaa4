"""Seeded generator of random checked transition functions and bindings.

Used by the fuzz and property tests: every generated AST passes the shape
checker, always returns on every path, and evaluates without runtime
errors on bindings drawn from `random_bindings` (divisors are nonzero
constants and sqrt arguments are wrapped in abs).
"""
from __future__ import annotations

import random
import string

from rsmrepair.lang import (
    Binary,
    Block,
    Const,
    Expr,
    If,
    InputRef,
    Let,
    LocalRef,
    ParamRef,
    Return,
    Shape,
    StateRef,
    Stmt,
    TransitionFn,
    Unary,
    VarRef,
    Vec2,
    Vec2Ctor,
    check_transition,
)


def _real_leaf(rng: random.Random, fn_decls, locals_real: list[str]) -> Expr:
    inputs, vars_, params = fn_decls
    choices = [lambda: Const(round(rng.uniform(-8, 8), 3))]
    real_inputs = [n for n, s in inputs.items() if s is Shape.REAL]
    if real_inputs:
        choices.append(lambda: InputRef(rng.choice(real_inputs)))
    if vars_:
        choices.append(lambda: VarRef(rng.choice(list(vars_))))
    if params:
        choices.append(lambda: ParamRef(rng.choice(params)))
    if locals_real:
        choices.append(lambda: LocalRef(rng.choice(locals_real)))
    return rng.choice(choices)()


def _vec_expr(rng: random.Random, fn_decls, locals_real, depth: int) -> Expr:
    inputs, _, _ = fn_decls
    vec_inputs = [n for n, s in inputs.items() if s is Shape.VEC2]
    if vec_inputs and rng.random() < 0.6:
        e: Expr = InputRef(rng.choice(vec_inputs))
    else:
        e = Vec2Ctor(_real_expr(rng, fn_decls, locals_real, depth - 1),
                     _real_expr(rng, fn_decls, locals_real, depth - 1))
    if depth > 0 and vec_inputs and rng.random() < 0.3:
        e = Binary(rng.choice(["+", "-"]), e, InputRef(rng.choice(vec_inputs)))
    return e


def _real_expr(rng: random.Random, fn_decls, locals_real, depth: int) -> Expr:
    if depth <= 0:
        return _real_leaf(rng, fn_decls, locals_real)
    kind = rng.random()
    if kind < 0.35:
        op = rng.choice(["+", "-", "*"])
        return Binary(op, _real_expr(rng, fn_decls, locals_real, depth - 1),
                      _real_expr(rng, fn_decls, locals_real, depth - 1))
    if kind < 0.45:
        divisor = Const(rng.choice([2.0, 4.0, -3.0, 0.5, 8.0]))
        return Binary("/", _real_expr(rng, fn_decls, locals_real, depth - 1), divisor)
    if kind < 0.6:
        op = rng.choice(["sin", "cos", "abs", "angle_mod"])
        return Unary(op, _real_expr(rng, fn_decls, locals_real, depth - 1))
    if kind < 0.65:
        return Unary("sqrt", Unary("abs", _real_expr(rng, fn_decls, locals_real, depth - 1)))
    if kind < 0.75:
        return Unary("norm", _vec_expr(rng, fn_decls, locals_real, depth - 1))
    if kind < 0.85:
        return Binary("dot", _vec_expr(rng, fn_decls, locals_real, depth - 1),
                      _vec_expr(rng, fn_decls, locals_real, depth - 1))
    return _real_leaf(rng, fn_decls, locals_real)


def _bool_expr(rng: random.Random, fn_decls, locals_real, states, depth: int) -> Expr:
    kind = rng.random()
    if depth > 0 and kind < 0.25:
        op = rng.choice(["&&", "||"])
        return Binary(op, _bool_expr(rng, fn_decls, locals_real, states, depth - 1),
                      _bool_expr(rng, fn_decls, locals_real, states, depth - 1))
    if depth > 0 and kind < 0.32:
        return Unary("!", _bool_expr(rng, fn_decls, locals_real, states, depth - 1))
    if kind < 0.4:
        return Binary("==", StateRef(), Const(rng.choice(states)))
    op = rng.choice(["<", "<=", ">", ">="])
    return Binary(op, _real_expr(rng, fn_decls, locals_real, 2),
                  _real_expr(rng, fn_decls, locals_real, 2))


def _stmt(rng: random.Random, fn_decls, locals_real, states, depth: int) -> Stmt:
    if depth <= 0 or rng.random() < 0.3:
        return Return(rng.choice(states))
    stmts: list[Stmt] = []
    scope = list(locals_real)
    for _ in range(rng.randint(0, 2)):
        name = "loc_" + "".join(rng.choices(string.ascii_lowercase, k=4))
        stmts.append(Let(name, _real_expr(rng, fn_decls, scope, 2)))
        scope.append(name)
    cond = _bool_expr(rng, fn_decls, scope, states, 1)
    stmts.append(If(cond,
                    _stmt(rng, fn_decls, scope, states, depth - 1),
                    _stmt(rng, fn_decls, scope, states, depth - 1)))
    return Block(tuple(stmts))


def random_transition(rng: random.Random) -> TransitionFn:
    n_states = rng.randint(2, 4)
    states = tuple(f"S{i}" for i in range(n_states))
    inputs = {}
    for i in range(rng.randint(0, 3)):
        inputs[f"i{i}"] = rng.choice([Shape.REAL, Shape.REAL, Shape.VEC2])
    vars_ = {f"v{i}": Shape.REAL for i in range(rng.randint(0, 2))}
    params = tuple(f"p{i}" for i in range(rng.randint(1, 4)))
    decls = (inputs, vars_, params)
    body = _stmt(rng, decls, [], states, rng.randint(1, 3))
    fn = TransitionFn(states=states, inputs=inputs, vars=vars_, params=params, body=body)
    return check_transition(fn)


def random_bindings(rng: random.Random, fn: TransitionFn):
    def value(shape: Shape):
        if shape is Shape.VEC2:
            return Vec2(rng.uniform(-10, 10), rng.uniform(-10, 10))
        return rng.uniform(-10, 10)

    inputs = {n: value(s) for n, s in fn.inputs.items()}
    vars_ = {n: value(s) for n, s in fn.vars.items()}
    params = {n: rng.uniform(-6, 6) for n in fn.params}
    state = rng.choice(fn.states)
    return state, inputs, vars_, params
