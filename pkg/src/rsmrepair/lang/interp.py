"""Pure interpreter for checked transition functions.

The same primitive operations back the partial evaluator, so folded
constants are bit-identical to interpreted results.
"""
from __future__ import annotations

import math

from .ast import (
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
    StateRef,
    Stmt,
    TransitionFn,
    Unary,
    Value,
    VarRef,
    Vec2,
    Vec2Ctor,
)


class EvalError(Exception):
    pass


class MissingBindingError(EvalError):
    def __init__(self, kind: str, name: str):
        super().__init__(f"missing {kind} binding {name!r}")
        self.name = name


def angle_mod(a: float) -> float:
    """Normalize an angle to the half-open interval (-pi, pi]."""
    if not math.isfinite(a):
        raise EvalError(f"angle_mod of non-finite value {a!r}")
    r = math.remainder(a, math.tau)
    if r <= -math.pi:
        r += math.tau
    return r


def apply_unary(op: str, v: Value) -> Value:
    if op == "-":
        return -v
    if op == "!":
        return not v
    if op == "sin":
        return math.sin(v)
    if op == "cos":
        return math.cos(v)
    if op == "abs":
        return abs(v)
    if op == "sqrt":
        if v < 0:
            raise EvalError(f"sqrt of negative value {v!r}")
        return math.sqrt(v)
    if op == "norm":
        return v.norm()
    if op == "angle_mod":
        return angle_mod(v)
    raise EvalError(f"unknown unary op {op!r}")


def apply_binary(op: str, a: Value, b: Value) -> Value:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        if isinstance(a, Vec2):
            return a.scaled(b)
        if isinstance(b, Vec2):
            return b.scaled(a)
        return a * b
    if op == "/":
        if b == 0:
            raise EvalError("division by zero")
        return a / b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "&&":
        return a and b
    if op == "||":
        return a or b
    if op == "dot":
        return a.dot(b)
    raise EvalError(f"unknown binary op {op!r}")


class _Env:
    __slots__ = ("state", "inputs", "vars", "params", "locals")

    def __init__(self, state: str, inputs: dict, vars_: dict, params: dict):
        self.state = state
        self.inputs = inputs
        self.vars = vars_
        self.params = params
        self.locals: dict[str, Value] = {}


def eval_expr(e: Expr, env: _Env) -> Value:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, StateRef):
        return env.state
    if isinstance(e, InputRef):
        try:
            return env.inputs[e.name]
        except KeyError:
            raise MissingBindingError("input", e.name) from None
    if isinstance(e, VarRef):
        try:
            return env.vars[e.name]
        except KeyError:
            raise MissingBindingError("variable", e.name) from None
    if isinstance(e, ParamRef):
        try:
            return env.params[e.name]
        except KeyError:
            raise MissingBindingError("parameter", e.name) from None
    if isinstance(e, LocalRef):
        try:
            return env.locals[e.name]
        except KeyError:
            raise MissingBindingError("local", e.name) from None
    if isinstance(e, Unary):
        return apply_unary(e.op, eval_expr(e.operand, env))
    if isinstance(e, Binary):
        return apply_binary(e.op, eval_expr(e.lhs, env), eval_expr(e.rhs, env))
    if isinstance(e, Vec2Ctor):
        return Vec2(eval_expr(e.x, env), eval_expr(e.y, env))
    raise EvalError(f"cannot evaluate {e!r}")


def _exec(stmt: Stmt, env: _Env) -> str | None:
    if isinstance(stmt, Return):
        return stmt.label
    if isinstance(stmt, Let):
        env.locals[stmt.name] = eval_expr(stmt.value, env)
        return None
    if isinstance(stmt, If):
        if eval_expr(stmt.cond, env):
            return _exec(stmt.then, env)
        if stmt.orelse is not None:
            return _exec(stmt.orelse, env)
        return None
    if isinstance(stmt, Block):
        saved = dict(env.locals)
        try:
            for s in stmt.stmts:
                label = _exec(s, env)
                if label is not None:
                    return label
            return None
        finally:
            env.locals = saved
    raise EvalError(f"cannot execute {stmt!r}")


def eval_transition(fn: TransitionFn, state: str, inputs: dict[str, Value],
                    vars: dict[str, Value], params: dict[str, float]) -> str:
    """Run a transition function for one step and return the next state."""
    for name in fn.inputs:
        if name not in inputs:
            raise MissingBindingError("input", name)
    for name in fn.vars:
        if name not in vars:
            raise MissingBindingError("variable", name)
    for name in fn.params:
        if name not in params:
            raise MissingBindingError("parameter", name)
    label = _exec(fn.body, _Env(state, inputs, vars, params))
    if label is None:
        raise EvalError("transition function fell through without returning")
    return label
