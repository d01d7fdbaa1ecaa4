"""Transition-function language: AST, parser, checker, interpreter."""
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
    Shape,
    StateRef,
    Stmt,
    TransitionFn,
    Unary,
    Value,
    VarRef,
    Vec2,
    Vec2Ctor,
    shape_of_value,
)
from .interp import EvalError, MissingBindingError, angle_mod, eval_transition
from .parser import CheckError, LangError, ParseError, check_transition, parse_transition

__all__ = [
    "Binary", "Block", "Const", "Expr", "If", "InputRef", "Let", "LocalRef",
    "ParamRef", "Return", "Shape", "StateRef", "Stmt", "TransitionFn", "Unary",
    "Value", "VarRef", "Vec2", "Vec2Ctor", "shape_of_value",
    "EvalError", "MissingBindingError", "angle_mod", "eval_transition",
    "CheckError", "LangError", "ParseError", "check_transition", "parse_transition",
]
