"""Recursive-descent parser and shape checker for the transition language.

Grammar:

    program   := decls "fn" "transition" block
    decls     := ("states" "{" label ("," label)* "}")
                 ("inputs" "{" typed ("," typed)* "}")?
                 ("vars" "{" typed ("," typed)* "}")?
                 ("params" "{" ident ("," ident)* "}")?
    typed     := ident ":" ("real" | "bool" | "vec2")
    block     := "{" stmt* "}"
    stmt      := "return" label ";" | "let" ident ":=" expr ";"
               | "if" "(" expr ")" stmt ("else" stmt)? | block

State labels are quoted strings; the first declared state is the start
state and the last is the end state. References are qualified (`in.x`,
`var.x`, `param.x`), bare names are per-step locals, and `state` is the
current state. Vector literals are written `<e, e>` with arithmetic-level
components. Precedence: unary > `* /` > `+ -` > comparisons > `&&` > `||`.
Line comments start with `//`.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (
    ARITH_OPS,
    Binary,
    Block,
    BOOL_OPS,
    COMPARISONS,
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
    Vec2Ctor,
)


class LangError(Exception):
    """Error with a source position."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.message = message
        self.line = line
        self.col = col


class ParseError(LangError):
    pass


class CheckError(LangError):
    pass


BUILTIN_UNARY = ("sin", "cos", "abs", "sqrt", "norm", "angle_mod")
KEYWORDS = {
    "states", "inputs", "vars", "params", "fn", "transition",
    "return", "let", "if", "else", "state", "real", "bool", "vec2",
    "true", "false", "in", "var", "param",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<num>\d+(\.\d+)?([eE][+-]?\d+)?)
  | (?P<str>"[^"\n]*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>:=|&&|\|\||==|!=|<=|>=|[-+*/<>!(){},;:.])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # num | str | ident | op | eof
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, col)
        text = m.group(0)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.advance()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}",
                             tok.line, tok.col)
        return tok

    def expect_ident(self) -> Token:
        tok = self.advance()
        if tok.kind != "ident" or tok.text in KEYWORDS:
            raise ParseError(f"expected identifier, found {tok.text or 'end of input'!r}",
                             tok.line, tok.col)
        return tok

    def expect_label(self) -> str:
        tok = self.advance()
        if tok.kind != "str":
            raise ParseError(f"expected quoted state label, found {tok.text!r}",
                             tok.line, tok.col)
        return tok.text[1:-1]

    # -- declarations ------------------------------------------------------

    def parse_program(self) -> tuple[tuple[str, ...], dict, dict, tuple[str, ...], Stmt]:
        self.expect("states")
        self.expect("{")
        states = [self.expect_label()]
        while self.peek().text == ",":
            self.advance()
            states.append(self.expect_label())
        self.expect("}")

        inputs = self._parse_typed_section("inputs")
        vars_ = self._parse_typed_section("vars")

        params: list[str] = []
        if self.peek().text == "params":
            self.advance()
            self.expect("{")
            params.append(self.expect_ident().text)
            while self.peek().text == ",":
                self.advance()
                params.append(self.expect_ident().text)
            self.expect("}")

        self.expect("fn")
        self.expect("transition")
        body = self.parse_block()
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"unexpected trailing input {tok.text!r}", tok.line, tok.col)
        return tuple(states), inputs, vars_, tuple(params), body

    def _parse_typed_section(self, keyword: str) -> dict[str, Shape]:
        decls: dict[str, Shape] = {}
        if self.peek().text != keyword:
            return decls
        self.advance()
        self.expect("{")
        while True:
            name = self.expect_ident()
            self.expect(":")
            shape_tok = self.advance()
            if shape_tok.text not in ("real", "bool", "vec2"):
                raise ParseError(f"expected a shape, found {shape_tok.text!r}",
                                 shape_tok.line, shape_tok.col)
            if name.text in decls:
                raise ParseError(f"duplicate declaration of {name.text!r}",
                                 name.line, name.col)
            decls[name.text] = Shape(shape_tok.text)
            if self.peek().text == ",":
                self.advance()
                continue
            break
        self.expect("}")
        return decls

    # -- statements --------------------------------------------------------

    def parse_block(self) -> Block:
        self.expect("{")
        stmts: list[Stmt] = []
        while self.peek().text != "}":
            stmts.append(self.parse_stmt())
        self.expect("}")
        return Block(tuple(stmts))

    def parse_stmt(self) -> Stmt:
        tok = self.peek()
        if tok.text == "return":
            self.advance()
            label = self.expect_label()
            self.expect(";")
            return Return(label)
        if tok.text == "let":
            self.advance()
            name = self.expect_ident()
            self.expect(":=")
            value = self.parse_expr()
            self.expect(";")
            return Let(name.text, value)
        if tok.text == "if":
            self.advance()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self.parse_stmt()
            orelse = None
            if self.peek().text == "else":
                self.advance()
                orelse = self.parse_stmt()
            return If(cond, then, orelse)
        if tok.text == "{":
            return self.parse_block()
        # Assignments to persistent variables are emission-side only.
        if (tok.text == "var" and self.peek(1).text == ".") or (
            tok.kind == "ident" and self.peek(1).text == ":="
        ):
            raise ParseError(
                "assignment is not allowed here: persistent variables are "
                "read-only inside a transition function", tok.line, tok.col)
        raise ParseError(f"expected a statement, found {tok.text or 'end of input'!r}",
                         tok.line, tok.col)

    # -- expressions -------------------------------------------------------

    def parse_expr(self) -> Expr:
        return self._parse_or()

    def _parse_or(self) -> Expr:
        e = self._parse_and()
        while self.peek().text == "||":
            self.advance()
            e = Binary("||", e, self._parse_and())
        return e

    def _parse_and(self) -> Expr:
        e = self._parse_cmp()
        while self.peek().text == "&&":
            self.advance()
            e = Binary("&&", e, self._parse_cmp())
        return e

    def _parse_cmp(self) -> Expr:
        e = self._parse_additive()
        while self.peek().text in COMPARISONS:
            op = self.advance().text
            e = Binary(op, e, self._parse_additive())
        return e

    def _parse_additive(self) -> Expr:
        e = self._parse_multiplicative()
        while self.peek().text in ("+", "-"):
            op = self.advance().text
            e = Binary(op, e, self._parse_multiplicative())
        return e

    def _parse_multiplicative(self) -> Expr:
        e = self._parse_unary()
        while self.peek().text in ("*", "/"):
            op = self.advance().text
            e = Binary(op, e, self._parse_unary())
        return e

    def _parse_unary(self) -> Expr:
        tok = self.peek()
        if tok.text == "-":
            self.advance()
            return Unary("-", self._parse_unary())
        if tok.text == "!":
            self.advance()
            return Unary("!", self._parse_unary())
        return self._parse_primary()

    def _parse_primary(self) -> Expr:
        tok = self.advance()
        self._positions_hint = (tok.line, tok.col)
        if tok.kind == "num":
            return Const(float(tok.text))
        if tok.kind == "str":
            return Const(tok.text[1:-1])
        if tok.text == "true":
            return Const(True)
        if tok.text == "false":
            return Const(False)
        if tok.text == "state":
            return StateRef()
        if tok.text == "(":
            e = self.parse_expr()
            self.expect(")")
            return e
        if tok.text == "<":
            # vector literal: components are arithmetic-level expressions
            x = self._parse_additive()
            self.expect(",")
            y = self._parse_additive()
            self.expect(">")
            return Vec2Ctor(x, y)
        if tok.text in ("in", "var", "param"):
            self.expect(".")
            name = self.expect_ident().text
            return {"in": InputRef, "var": VarRef, "param": ParamRef}[tok.text](name)
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            if self.peek().text == "(":
                return self._parse_call(tok)
            return LocalRef(tok.text)
        raise ParseError(f"expected an expression, found {tok.text or 'end of input'!r}",
                         tok.line, tok.col)

    def _parse_call(self, name: Token) -> Expr:
        self.expect("(")
        args = [self.parse_expr()]
        while self.peek().text == ",":
            self.advance()
            args.append(self.parse_expr())
        self.expect(")")
        if name.text == "dot":
            if len(args) != 2:
                raise ParseError("dot takes exactly two arguments", name.line, name.col)
            return Binary("dot", args[0], args[1])
        if name.text in BUILTIN_UNARY:
            if len(args) != 1:
                raise ParseError(f"{name.text} takes exactly one argument",
                                 name.line, name.col)
            return Unary(name.text, args[0])
        raise ParseError(f"unknown function {name.text!r}", name.line, name.col)


# --------------------------------------------------------------------------
# Shape checker
# --------------------------------------------------------------------------

class _Checker:
    def __init__(self, fn: TransitionFn):
        self.fn = fn

    def check(self) -> None:
        fn = self.fn
        seen: set[str] = set()
        for name in list(fn.inputs) + list(fn.vars) + list(fn.params):
            if name in seen:
                raise CheckError(f"duplicate declaration of {name!r}")
            seen.add(name)
        if len(set(fn.states)) != len(fn.states):
            raise CheckError("duplicate state label")
        if not self._returns_always(fn.body):
            raise CheckError("not every path through the transition function returns")
        self._check_stmt(fn.body, {})

    def _returns_always(self, stmt: Stmt) -> bool:
        if isinstance(stmt, Return):
            return True
        if isinstance(stmt, If):
            return (stmt.orelse is not None
                    and self._returns_always(stmt.then)
                    and self._returns_always(stmt.orelse))
        if isinstance(stmt, Block):
            return any(self._returns_always(s) for s in stmt.stmts)
        return False

    def _check_stmt(self, stmt: Stmt, locals_: dict[str, Shape]) -> None:
        if isinstance(stmt, Return):
            if stmt.label not in self.fn.states:
                raise CheckError(f"return of undeclared state {stmt.label!r}")
        elif isinstance(stmt, Let):
            locals_[stmt.name] = self.shape(stmt.value, locals_)
        elif isinstance(stmt, If):
            if self.shape(stmt.cond, locals_) is not Shape.BOOL:
                raise CheckError("if condition must be boolean")
            self._check_stmt(stmt.then, dict(locals_))
            if stmt.orelse is not None:
                self._check_stmt(stmt.orelse, dict(locals_))
        elif isinstance(stmt, Block):
            scope = dict(locals_)
            for s in stmt.stmts:
                self._check_stmt(s, scope)

    def shape(self, e: Expr, locals_: dict[str, Shape]) -> Shape:
        if isinstance(e, Const):
            from .ast import shape_of_value
            return shape_of_value(e.value)
        if isinstance(e, StateRef):
            return Shape.STATE
        if isinstance(e, InputRef):
            if e.name not in self.fn.inputs:
                raise CheckError(f"undeclared input {e.name!r}")
            return self.fn.inputs[e.name]
        if isinstance(e, VarRef):
            if e.name not in self.fn.vars:
                raise CheckError(f"undeclared variable {e.name!r}")
            return self.fn.vars[e.name]
        if isinstance(e, ParamRef):
            if e.name not in self.fn.params:
                raise CheckError(f"undeclared parameter {e.name!r}")
            return Shape.REAL
        if isinstance(e, LocalRef):
            if e.name not in locals_:
                raise CheckError(f"undeclared identifier {e.name!r}")
            return locals_[e.name]
        if isinstance(e, Vec2Ctor):
            if (self.shape(e.x, locals_) is not Shape.REAL
                    or self.shape(e.y, locals_) is not Shape.REAL):
                raise CheckError("vector components must be reals")
            return Shape.VEC2
        if isinstance(e, Unary):
            s = self.shape(e.operand, locals_)
            if e.op == "-":
                if s in (Shape.REAL, Shape.VEC2):
                    return s
                raise CheckError("unary - needs a real or 2-vector")
            if e.op == "!":
                if s is Shape.BOOL:
                    return Shape.BOOL
                raise CheckError("! needs a boolean")
            if e.op == "norm":
                if s is Shape.VEC2:
                    return Shape.REAL
                raise CheckError("norm needs a 2-vector")
            if s is not Shape.REAL:
                raise CheckError(f"{e.op} needs a real operand")
            return Shape.REAL
        if isinstance(e, Binary):
            ls = self.shape(e.lhs, locals_)
            rs = self.shape(e.rhs, locals_)
            if e.op == "dot":
                if ls is Shape.VEC2 and rs is Shape.VEC2:
                    return Shape.REAL
                raise CheckError("dot needs two 2-vectors")
            if e.op in ("+", "-"):
                if ls is Shape.REAL and rs is Shape.REAL:
                    return Shape.REAL
                if ls is Shape.VEC2 and rs is Shape.VEC2:
                    return Shape.VEC2
                raise CheckError(f"{e.op} needs two reals or two 2-vectors")
            if e.op == "*":
                if ls is Shape.REAL and rs is Shape.REAL:
                    return Shape.REAL
                if {ls, rs} == {Shape.REAL, Shape.VEC2}:
                    return Shape.VEC2
                raise CheckError("* needs reals, or a real and a 2-vector")
            if e.op == "/":
                if ls is Shape.REAL and rs is Shape.REAL:
                    return Shape.REAL
                raise CheckError("/ needs real operands")
            if e.op in ("<", "<=", ">", ">="):
                if ls is Shape.REAL and rs is Shape.REAL:
                    return Shape.BOOL
                raise CheckError(f"{e.op} needs real operands")
            if e.op in ("==", "!="):
                if ls is rs:
                    return Shape.BOOL
                raise CheckError(f"{e.op} needs operands of the same shape")
            if e.op in BOOL_OPS:
                if ls is Shape.BOOL and rs is Shape.BOOL:
                    return Shape.BOOL
                raise CheckError(f"{e.op} needs boolean operands")
        raise CheckError(f"unsupported expression {e!r}")


def check_transition(fn: TransitionFn) -> TransitionFn:
    """Shape-check a transition function, returning it unchanged."""
    _Checker(fn).check()
    return fn


def parse_transition(source: str, name: str = "transition") -> TransitionFn:
    """Parse and shape-check a transition function from source text."""
    states, inputs, vars_, params, body = _Parser(tokenize(source)).parse_program()
    fn = TransitionFn(states=states, inputs=inputs, vars=vars_, params=params,
                      body=body, name=name)
    return check_transition(fn)
