"""Typed AST for the transition-function language.

A transition function maps (current state, inputs, variables, parameters)
to the next state label. Values are reals, booleans, 2-vectors, or state
labels; persistent variables are read-only inside transition functions.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from enum import Enum


class Shape(str, Enum):
    REAL = "real"
    BOOL = "bool"
    VEC2 = "vec2"
    STATE = "state"


@dataclass(frozen=True)
class Vec2:
    x: float
    y: float

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def scaled(self, k: float) -> "Vec2":
        return Vec2(k * self.x, k * self.y)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


# Runtime values: float, bool, Vec2, or a state label (str).
Value = float | bool | Vec2 | str


def shape_of_value(v: Value) -> Shape:
    if isinstance(v, bool):
        return Shape.BOOL
    if isinstance(v, Vec2):
        return Shape.VEC2
    if isinstance(v, str):
        return Shape.STATE
    return Shape.REAL


# --------------------------------------------------------------------------
# Expressions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Const(Expr):
    value: Value


@dataclass(frozen=True)
class StateRef(Expr):
    """The current-state keyword."""


@dataclass(frozen=True)
class InputRef(Expr):
    name: str


@dataclass(frozen=True)
class VarRef(Expr):
    name: str


@dataclass(frozen=True)
class ParamRef(Expr):
    name: str


@dataclass(frozen=True)
class LocalRef(Expr):
    name: str


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # - ! sin cos abs sqrt norm angle_mod
    operand: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str  # + - * / < <= > >= == != && || dot
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Vec2Ctor(Expr):
    x: Expr
    y: Expr


UNARY_OPS = ("-", "!", "sin", "cos", "abs", "sqrt", "norm", "angle_mod")
COMPARISONS = ("<", "<=", ">", ">=", "==", "!=")
ARITH_OPS = ("+", "-", "*", "/")
BOOL_OPS = ("&&", "||")


# --------------------------------------------------------------------------
# Statements
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Stmt:
    pass


@dataclass(frozen=True)
class Return(Stmt):
    label: str


@dataclass(frozen=True)
class Let(Stmt):
    name: str
    value: Expr


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: Stmt
    orelse: Stmt | None


@dataclass(frozen=True)
class Block(Stmt):
    stmts: tuple[Stmt, ...]


@dataclass(frozen=True)
class TransitionFn:
    """A checked transition function.

    ``states`` is ordered: the first label is the start state and the last
    is the end state. All mappings are treated as immutable after
    construction.
    """
    states: tuple[str, ...]
    inputs: dict[str, Shape] = field(default_factory=dict)
    vars: dict[str, Shape] = field(default_factory=dict)
    params: tuple[str, ...] = ()
    body: Stmt = Block(())
    name: str = "transition"

    @property
    def start(self) -> str:
        return self.states[0]

    @property
    def end(self) -> str:
        return self.states[-1]

    def declaration_hash(self) -> str:
        decl = {
            "states": list(self.states),
            "inputs": {k: v.value for k, v in self.inputs.items()},
            "vars": {k: v.value for k, v in self.vars.items()},
            "params": list(self.params),
        }
        blob = json.dumps(decl, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]
