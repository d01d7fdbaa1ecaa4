"""Partial evaluation of transition functions against trace elements.

``peval`` specializes a transition function for a set of bindings, folding
constants with the interpreter's own primitives so results stay bit-exact.
``classify_params`` splits parameters into repairable and unrepairable
sets for a linear-arithmetic backend. ``make_residual`` combines the two:
it substitutes one trace element plus every non-designated parameter and
flattens the surviving branch into guarded return paths whose conditions
mention designated parameters only.
"""
from __future__ import annotations

from dataclasses import dataclass

from .lang import (
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
from .lang.interp import apply_binary, apply_unary
from .trace import TraceElement


class ResidualError(Exception):
    pass


# --------------------------------------------------------------------------
# Partial evaluation
# --------------------------------------------------------------------------

def _simp(e: Expr, binds: dict[str, Value], env: dict[str, Expr]) -> Expr:
    if isinstance(e, Const):
        return e
    if isinstance(e, StateRef):
        return Const(binds["state"]) if "state" in binds else e
    if isinstance(e, (InputRef, VarRef, ParamRef)):
        return Const(binds[e.name]) if e.name in binds else e
    if isinstance(e, LocalRef):
        return env.get(e.name, e)
    if isinstance(e, Unary):
        operand = _simp(e.operand, binds, env)
        if isinstance(operand, Const):
            return Const(apply_unary(e.op, operand.value))
        return Unary(e.op, operand)
    if isinstance(e, Binary):
        lhs = _simp(e.lhs, binds, env)
        rhs = _simp(e.rhs, binds, env)
        if isinstance(lhs, Const) and isinstance(rhs, Const):
            return Const(apply_binary(e.op, lhs.value, rhs.value))
        # boolean constant folding enables guard pruning
        if e.op == "&&":
            if lhs == Const(False) or rhs == Const(False):
                return Const(False)
            if lhs == Const(True):
                return rhs
            if rhs == Const(True):
                return lhs
        if e.op == "||":
            if lhs == Const(True) or rhs == Const(True):
                return Const(True)
            if lhs == Const(False):
                return rhs
            if rhs == Const(False):
                return lhs
        return Binary(e.op, lhs, rhs)
    if isinstance(e, Vec2Ctor):
        x = _simp(e.x, binds, env)
        y = _simp(e.y, binds, env)
        if isinstance(x, Const) and isinstance(y, Const):
            return Const(Vec2(x.value, y.value))
        return Vec2Ctor(x, y)
    raise ResidualError(f"cannot simplify {e!r}")


def _peval_stmt(stmt: Stmt, binds: dict[str, Value], env: dict[str, Expr]) -> Stmt | None:
    if isinstance(stmt, Return):
        return stmt
    if isinstance(stmt, Let):
        env[stmt.name] = _simp(stmt.value, binds, env)
        return None
    if isinstance(stmt, If):
        cond = _simp(stmt.cond, binds, env)
        if cond == Const(True):
            return _peval_stmt(stmt.then, binds, dict(env))
        if cond == Const(False):
            if stmt.orelse is None:
                return None
            return _peval_stmt(stmt.orelse, binds, dict(env))
        then = _peval_stmt(stmt.then, binds, dict(env)) or Block(())
        orelse = _peval_stmt(stmt.orelse, binds, dict(env)) if stmt.orelse else None
        return If(cond, then, orelse)
    if isinstance(stmt, Block):
        scope = dict(env)
        out: list[Stmt] = []
        for s in stmt.stmts:
            r = _peval_stmt(s, binds, scope)
            if r is not None:
                out.append(r)
                if _always_returns(r):
                    break
        if len(out) == 1:
            return out[0]
        return Block(tuple(out)) if out else None
    raise ResidualError(f"cannot partially evaluate {stmt!r}")


def _always_returns(stmt: Stmt) -> bool:
    if isinstance(stmt, Return):
        return True
    if isinstance(stmt, If):
        return (stmt.orelse is not None and _always_returns(stmt.then)
                and _always_returns(stmt.orelse))
    if isinstance(stmt, Block):
        return any(_always_returns(s) for s in stmt.stmts)
    return False


def peval(fn: TransitionFn, bindings: dict[str, Value]) -> TransitionFn:
    """Specialize a transition function for (possibly partial) bindings.

    Bindings are keyed by declared name; the reserved key ``state`` binds
    the current state. Per-step locals are inlined, bound references are
    substituted, constant subexpressions are folded, and conditionals with
    concrete guards collapse to the taken branch.
    """
    declared = set(fn.inputs) | set(fn.vars) | set(fn.params) | {"state"}
    unknown = set(bindings) - declared
    if unknown:
        raise ResidualError(f"bindings for undeclared names: {sorted(unknown)}")
    body = _peval_stmt(fn.body, bindings, {}) or Block(())
    return TransitionFn(
        states=fn.states,
        inputs={k: v for k, v in fn.inputs.items() if k not in bindings},
        vars={k: v for k, v in fn.vars.items() if k not in bindings},
        params=tuple(p for p in fn.params if p not in bindings),
        body=body,
        name=fn.name,
    )


# --------------------------------------------------------------------------
# Repairable / unrepairable parameter classification
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamClass:
    repairable: tuple[str, ...]
    unrepairable: tuple[str, ...]


_TRANSCENDENTAL = ("sin", "cos", "sqrt", "norm", "angle_mod")

# affinity kinds for real/vec2 expressions, relative to still-live parameters
_CONST = 0     # no live parameters
_AFFINE = 1    # affine in live parameters
_PWA = 2       # piecewise affine (abs of an affine expression)


def _params_under_transcendentals(e: Expr, env: dict[str, Expr], out: set[str]) -> None:
    if isinstance(e, Unary):
        if e.op in _TRANSCENDENTAL:
            _collect_params(e.operand, env, out)
        _params_under_transcendentals(e.operand, env, out)
    elif isinstance(e, Binary):
        _params_under_transcendentals(e.lhs, env, out)
        _params_under_transcendentals(e.rhs, env, out)
    elif isinstance(e, Vec2Ctor):
        _params_under_transcendentals(e.x, env, out)
        _params_under_transcendentals(e.y, env, out)
    elif isinstance(e, LocalRef) and e.name in env:
        _params_under_transcendentals(env[e.name], env, out)


def _collect_params(e: Expr, env: dict[str, Expr], out: set[str]) -> None:
    if isinstance(e, ParamRef):
        out.add(e.name)
    elif isinstance(e, Unary):
        _collect_params(e.operand, env, out)
    elif isinstance(e, Binary):
        _collect_params(e.lhs, env, out)
        _collect_params(e.rhs, env, out)
    elif isinstance(e, Vec2Ctor):
        _collect_params(e.x, env, out)
        _collect_params(e.y, env, out)
    elif isinstance(e, LocalRef) and e.name in env:
        _collect_params(env[e.name], env, out)


class _AffinityWalker:
    """One marking pass: records parameters forced into non-affine positions."""

    def __init__(self, unrep: set[str]):
        self.unrep = unrep
        self.marked: set[str] = set()

    def _mark(self, params: frozenset[str]) -> None:
        self.marked |= params

    def expr(self, e: Expr, env: dict) -> tuple[int, frozenset[str]]:
        none = (_CONST, frozenset())
        if isinstance(e, (Const, StateRef, InputRef, VarRef)):
            return none
        if isinstance(e, ParamRef):
            if e.name in self.unrep or e.name in self.marked:
                return none
            return (_AFFINE, frozenset([e.name]))
        if isinstance(e, LocalRef):
            return env.get(e.name, none)
        if isinstance(e, Vec2Ctor):
            kx, px = self.expr(e.x, env)
            ky, py = self.expr(e.y, env)
            return (max(kx, ky), px | py)
        if isinstance(e, Unary):
            kind, params = self.expr(e.operand, env)
            if e.op == "-":
                return (kind, params)
            if e.op == "!":
                return none
            if e.op == "abs":
                if not params:
                    return none
                return (_PWA, params)
            if e.op in _TRANSCENDENTAL:
                if params:
                    self._mark(params)
                return none
            raise ResidualError(f"unknown unary op {e.op!r}")
        if isinstance(e, Binary):
            if e.op in ("&&", "||", "==", "!=", "<", "<=", ">", ">="):
                self.expr(e.lhs, env)
                self.expr(e.rhs, env)
                return none
            kl, pl = self.expr(e.lhs, env)
            kr, pr = self.expr(e.rhs, env)
            if e.op in ("+", "-"):
                return (max(kl, kr), pl | pr)
            if e.op in ("*", "dot"):
                if pl and pr:
                    self._mark(pl | pr)
                    return none
                if e.op == "dot" and not (pl or pr):
                    return none
                return (max(kl, kr), pl | pr)
            if e.op == "/":
                if pr:
                    self._mark(pr)
                return (kl, pl)
            raise ResidualError(f"unknown binary op {e.op!r}")
        raise ResidualError(f"cannot classify {e!r}")

    def stmt(self, s: Stmt, env: dict) -> None:
        if isinstance(s, Return):
            return
        if isinstance(s, Let):
            env[s.name] = self.expr(s.value, env)
            return
        if isinstance(s, If):
            self.expr(s.cond, env)
            self.stmt(s.then, dict(env))
            if s.orelse is not None:
                self.stmt(s.orelse, dict(env))
            return
        if isinstance(s, Block):
            scope = dict(env)
            for sub in s.stmts:
                self.stmt(sub, scope)


def classify_params(fn: TransitionFn, backend_nonlinear: bool = False) -> ParamClass:
    """Partition declared parameters by whether a linear backend can keep
    them symbolic.

    A parameter is unrepairable when some occurrence sits in a non-affine
    position once everything else is substituted: under a transcendental
    (sin/cos/sqrt/norm/angle_mod), multiplied by another parameter-dependent
    factor, or in a parameter-dependent divisor. A single such occurrence
    poisons the parameter everywhere. Nonlinear-capable backends have no
    unrepairable parameters.
    """
    if backend_nonlinear:
        return ParamClass(repairable=fn.params, unrepairable=())

    # collect the local definitions once so transcendental scanning can
    # look through per-step locals
    lets: dict[str, Expr] = {}

    def collect_lets(s: Stmt) -> None:
        if isinstance(s, Let):
            lets[s.name] = s.value
        elif isinstance(s, If):
            collect_lets(s.then)
            if s.orelse is not None:
                collect_lets(s.orelse)
        elif isinstance(s, Block):
            for sub in s.stmts:
                collect_lets(sub)

    collect_lets(fn.body)

    unrep: set[str] = set()

    def scan_transcendental(s: Stmt) -> None:
        if isinstance(s, Let):
            _params_under_transcendentals(s.value, lets, unrep)
        elif isinstance(s, If):
            _params_under_transcendentals(s.cond, lets, unrep)
            scan_transcendental(s.then)
            if s.orelse is not None:
                scan_transcendental(s.orelse)
        elif isinstance(s, Block):
            for sub in s.stmts:
                scan_transcendental(sub)

    scan_transcendental(fn.body)

    while True:
        walker = _AffinityWalker(unrep)
        walker.stmt(fn.body, {})
        if walker.marked <= unrep:
            break
        unrep |= walker.marked

    return ParamClass(
        repairable=tuple(p for p in fn.params if p not in unrep),
        unrepairable=tuple(p for p in fn.params if p in unrep),
    )


# --------------------------------------------------------------------------
# Residuals
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Residual:
    """A transition function specialized to one trace element.

    ``paths`` are mutually exclusive, exhaustive guarded returns whose
    conditions mention only the kept (symbolic) parameters. ``body`` keeps
    the specialized statement tree for rendering.
    """
    paths: tuple[tuple[Expr, str], ...]
    body: Stmt
    origin_t: int
    origin_state: str
    params: tuple[str, ...]

    def eval(self, params: dict[str, float]) -> str:
        from .lang.interp import _Env, eval_expr
        env = _Env("", {}, {}, params)
        for cond, label in self.paths:
            if eval_expr(cond, env):
                return label
        raise ResidualError("no residual path matched")


def _flatten(stmt: Stmt | None) -> list[Stmt]:
    if stmt is None:
        return []
    if isinstance(stmt, Block):
        out: list[Stmt] = []
        for s in stmt.stmts:
            out.extend(_flatten(s))
        return out
    return [stmt]


def _negate(e: Expr) -> Expr:
    if isinstance(e, Const):
        return Const(not e.value)
    return Unary("!", e)


def _conjoin(guards: list[Expr]) -> Expr:
    live = [g for g in guards if g != Const(True)]
    if not live:
        return Const(True)
    cond = live[0]
    for g in live[1:]:
        cond = Binary("&&", cond, g)
    return cond


def _extract_paths(stmts: list[Stmt], guards: list[Expr],
                   out: list[tuple[Expr, str]]) -> None:
    for idx, s in enumerate(stmts):
        if isinstance(s, Return):
            out.append((_conjoin(guards), s.label))
            return
        if isinstance(s, If):
            rest = stmts[idx + 1:]
            _extract_paths(_flatten(s.then) + rest, guards + [s.cond], out)
            _extract_paths(_flatten(s.orelse) + rest, guards + [_negate(s.cond)], out)
            return
        raise ResidualError(f"unexpected residual statement {s!r}")


def _check_path_refs(e: Expr, allowed: set[str]) -> None:
    if isinstance(e, ParamRef):
        if e.name not in allowed:
            raise ResidualError(f"undesignated parameter {e.name!r} left in residual")
    elif isinstance(e, (InputRef, VarRef, LocalRef, StateRef)):
        raise ResidualError(f"unbound reference {e!r} left in residual")
    elif isinstance(e, Unary):
        _check_path_refs(e.operand, allowed)
    elif isinstance(e, Binary):
        _check_path_refs(e.lhs, allowed)
        _check_path_refs(e.rhs, allowed)
    elif isinstance(e, Vec2Ctor):
        _check_path_refs(e.x, allowed)
        _check_path_refs(e.y, allowed)


def make_residual(fn: TransitionFn, tau: TraceElement, params: dict[str, float],
                  designated: set[str] | None = None,
                  backend_nonlinear: bool = False) -> Residual:
    """Partially evaluate ``fn`` against one trace element.

    Inputs, variables, the recorded state, unrepairable parameters, and
    repairable parameters outside the designated set are all substituted;
    only designated parameters stay symbolic. ``designated=None`` keeps
    every repairable parameter.
    """
    classes = classify_params(fn, backend_nonlinear)
    if designated is not None:
        unknown = set(designated) - set(fn.params)
        if unknown:
            raise ResidualError(f"unknown designated parameters: {sorted(unknown)}")
        bad = set(designated) & set(classes.unrepairable)
        if bad:
            raise ResidualError(f"designated parameters are unrepairable: {sorted(bad)}")
        keep = tuple(p for p in fn.params if p in designated)
    else:
        keep = classes.repairable

    bindings: dict[str, Value] = dict(tau.inputs)
    bindings.update(tau.vars)
    bindings["state"] = tau.state
    for p in fn.params:
        if p not in keep:
            bindings[p] = params[p]

    specialized = peval(fn, bindings)
    paths: list[tuple[Expr, str]] = []
    _extract_paths(_flatten(specialized.body), [], paths)
    allowed = set(keep)
    for cond, _ in paths:
        _check_path_refs(cond, allowed)
    return Residual(paths=tuple(paths), body=specialized.body,
                    origin_t=tau.t, origin_state=tau.state, params=keep)


# --------------------------------------------------------------------------
# Rendering
# --------------------------------------------------------------------------

_PRECEDENCE = {"||": 1, "&&": 2, "<": 3, "<=": 3, ">": 3, ">=": 3, "==": 3,
               "!=": 3, "+": 4, "-": 4, "*": 5, "/": 5}


def render_expr(e: Expr, parent_prec: int = 0) -> str:
    if isinstance(e, Const):
        v = e.value
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, str):
            return f'"{v}"'
        if isinstance(v, Vec2):
            return f"<{v.x!r}, {v.y!r}>"
        return repr(v)
    if isinstance(e, StateRef):
        return "state"
    if isinstance(e, InputRef):
        return f"in.{e.name}"
    if isinstance(e, VarRef):
        return f"var.{e.name}"
    if isinstance(e, ParamRef):
        return f"param.{e.name}"
    if isinstance(e, LocalRef):
        return e.name
    if isinstance(e, Vec2Ctor):
        return f"<{render_expr(e.x)}, {render_expr(e.y)}>"
    if isinstance(e, Unary):
        if e.op in ("-", "!"):
            return f"{e.op}{render_expr(e.operand, 6)}"
        return f"{e.op}({render_expr(e.operand)})"
    if isinstance(e, Binary):
        if e.op == "dot":
            return f"dot({render_expr(e.lhs)}, {render_expr(e.rhs)})"
        prec = _PRECEDENCE[e.op]
        text = f"{render_expr(e.lhs, prec)} {e.op} {render_expr(e.rhs, prec + 1)}"
        return f"({text})" if prec < parent_prec else text
    raise ResidualError(f"cannot render {e!r}")


def _render_stmt(stmt: Stmt, indent: str) -> list[str]:
    if isinstance(stmt, Return):
        return [f'{indent}return "{stmt.label}";']
    if isinstance(stmt, Let):
        return [f"{indent}let {stmt.name} := {render_expr(stmt.value)};"]
    if isinstance(stmt, If):
        lines = [f"{indent}if ({render_expr(stmt.cond)}) {{"]
        lines += _render_stmt(stmt.then, indent + "  ")
        if stmt.orelse is not None:
            lines.append(f"{indent}}} else {{")
            lines += _render_stmt(stmt.orelse, indent + "  ")
        lines.append(f"{indent}}}")
        return lines
    if isinstance(stmt, Block):
        out: list[str] = []
        for s in stmt.stmts:
            out.extend(_render_stmt(s, indent))
        return out
    raise ResidualError(f"cannot render {stmt!r}")


def render_residual(residual: Residual) -> str:
    """Readable source-style dump of a residual (used by --dump-residual)."""
    header = (f"// residual at t={residual.origin_t} "
              f'(recorded state "{residual.origin_state}")')
    lines = [header, "fn transition {"]
    lines += _render_stmt(residual.body, "  ")
    lines.append("}")
    return "\n".join(lines) + "\n"
