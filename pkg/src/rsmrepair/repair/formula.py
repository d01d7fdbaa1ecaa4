"""Constraint formulas over parameter adjustments.

``correct_one`` turns a single correction into a formula over adjustment
variables (one delta per designated parameter, each parameter occurrence
replaced by base value + delta). ``correct_all`` conjoins the
per-correction formulas into soft clauses: penalty w_i is either the
clause weight (correction dropped) or zero with the formula satisfied.

Atoms are affine comparisons normalized to ``A <= 0``, ``A < 0``, or
``A = 0``; abs() over affine expressions is lowered into sign case
splits, so everything downstream sees linear arithmetic only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from ..lang import (
    Binary,
    Const,
    Expr,
    ParamRef,
    TransitionFn,
    Unary,
    Vec2,
    Vec2Ctor,
)
from ..corrections import Correction
from ..residual import Residual, ResidualError, make_residual
from ..trace import Trace


class FormulaError(Exception):
    pass


# --------------------------------------------------------------------------
# Affine terms and formula nodes
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Affine:
    """sum(coeff * delta) + const, coeffs sorted by delta name."""
    coeffs: tuple[tuple[str, float], ...]
    const: float

    @staticmethod
    def make(coeffs: dict[str, float], const: float) -> "Affine":
        kept = tuple(sorted((n, c) for n, c in coeffs.items() if c != 0.0))
        return Affine(kept, const)

    @staticmethod
    def constant(value: float) -> "Affine":
        return Affine((), value)

    def plus(self, other: "Affine") -> "Affine":
        coeffs = dict(self.coeffs)
        for n, c in other.coeffs:
            coeffs[n] = coeffs.get(n, 0.0) + c
        return Affine.make(coeffs, self.const + other.const)

    def scaled(self, k: float) -> "Affine":
        return Affine.make({n: k * c for n, c in self.coeffs}, k * self.const)

    def negated(self) -> "Affine":
        return self.scaled(-1.0)

    def value(self, assignment: dict[str, float]) -> float:
        return self.const + sum(c * assignment.get(n, 0.0) for n, c in self.coeffs)

    def names(self) -> frozenset[str]:
        return frozenset(n for n, _ in self.coeffs)

    @property
    def is_constant(self) -> bool:
        return not self.coeffs


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class FTrue(Formula):
    pass


@dataclass(frozen=True)
class FFalse(Formula):
    pass


@dataclass(frozen=True)
class FAtom(Formula):
    """affine `op` 0 with op in {le, lt, eq}."""
    affine: Affine
    op: str


@dataclass(frozen=True)
class FAnd(Formula):
    items: tuple[Formula, ...]


@dataclass(frozen=True)
class FOr(Formula):
    items: tuple[Formula, ...]


TRUE = FTrue()
FALSE = FFalse()


def fand(items) -> Formula:
    flat: list[Formula] = []
    for f in items:
        if isinstance(f, FFalse):
            return FALSE
        if isinstance(f, FTrue):
            continue
        if isinstance(f, FAnd):
            flat.extend(f.items)
        else:
            flat.append(f)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return FAnd(tuple(flat))


def for_(items) -> Formula:
    flat: list[Formula] = []
    for f in items:
        if isinstance(f, FTrue):
            return TRUE
        if isinstance(f, FFalse):
            continue
        if isinstance(f, FOr):
            flat.extend(f.items)
        else:
            flat.append(f)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return FOr(tuple(flat))


def _atom(affine: Affine, op: str) -> Formula:
    if affine.is_constant:
        v = affine.const
        if op == "le":
            return TRUE if v <= 0 else FALSE
        if op == "lt":
            return TRUE if v < 0 else FALSE
        return TRUE if v == 0 else FALSE
    return FAtom(affine, op)


def _negate_atom(a: FAtom) -> Formula:
    if a.op == "le":
        return _atom(a.affine.negated(), "lt")
    if a.op == "lt":
        return _atom(a.affine.negated(), "le")
    return for_([_atom(a.affine, "lt"), _atom(a.affine.negated(), "lt")])


def negate(f: Formula) -> Formula:
    if isinstance(f, FTrue):
        return FALSE
    if isinstance(f, FFalse):
        return TRUE
    if isinstance(f, FAtom):
        return _negate_atom(f)
    if isinstance(f, FAnd):
        return for_([negate(x) for x in f.items])
    if isinstance(f, FOr):
        return fand([negate(x) for x in f.items])
    raise FormulaError(f"cannot negate {f!r}")


def lower_strict(f: Formula, eps: float) -> Formula:
    """Replace strict atoms A < 0 by A + eps <= 0 so optima are attained."""
    if isinstance(f, FAtom):
        if f.op == "lt":
            return FAtom(replace(f.affine, const=f.affine.const + eps), "le")
        return f
    if isinstance(f, FAnd):
        return fand([lower_strict(x, eps) for x in f.items])
    if isinstance(f, FOr):
        return for_([lower_strict(x, eps) for x in f.items])
    return f


def eval_formula(f: Formula, assignment: dict[str, float], atol: float = 1e-9) -> bool:
    if isinstance(f, FTrue):
        return True
    if isinstance(f, FFalse):
        return False
    if isinstance(f, FAtom):
        v = f.affine.value(assignment)
        if f.op == "le":
            return v <= 0.0
        if f.op == "lt":
            return v < 0.0
        return abs(v) <= atol
    if isinstance(f, FAnd):
        return all(eval_formula(x, assignment, atol) for x in f.items)
    if isinstance(f, FOr):
        return any(eval_formula(x, assignment, atol) for x in f.items)
    raise FormulaError(f"cannot evaluate {f!r}")


def formula_deltas(f: Formula) -> frozenset[str]:
    if isinstance(f, FAtom):
        return f.affine.names()
    if isinstance(f, (FAnd, FOr)):
        out: frozenset[str] = frozenset()
        for x in f.items:
            out |= formula_deltas(x)
        return out
    return frozenset()


# --------------------------------------------------------------------------
# Residual conditions -> formulas
# --------------------------------------------------------------------------

# real-valued expressions become branch lists: (sign guards, affine value);
# each abs() contributes one two-way sign split
_Branch = tuple[tuple[FAtom, ...], Affine]


def _const_scalar(branches: list[_Branch]) -> float | None:
    if len(branches) == 1 and not branches[0][0] and branches[0][1].is_constant:
        return branches[0][1].const
    return None


def _real_branches(e: Expr, base: dict[str, float]) -> list[_Branch]:
    if isinstance(e, Const):
        return [((), Affine.constant(float(e.value)))]
    if isinstance(e, ParamRef):
        return [((), Affine.make({e.name: 1.0}, base[e.name]))]
    if isinstance(e, Unary):
        if e.op == "-":
            return [(c, a.negated()) for c, a in _real_branches(e.operand, base)]
        if e.op == "abs":
            out: list[_Branch] = []
            for conds, a in _real_branches(e.operand, base):
                nonneg = FAtom(a.negated(), "le")   # a >= 0
                nonpos = FAtom(a, "le")             # a <= 0
                out.append((conds + (nonneg,), a))
                out.append((conds + (nonpos,), a.negated()))
            return out
        raise FormulaError(f"non-affine operation {e.op!r} left in residual")
    if isinstance(e, Binary):
        if e.op in ("+", "-"):
            out = []
            for cl, al in _real_branches(e.lhs, base):
                for cr, ar in _real_branches(e.rhs, base):
                    rhs = ar.negated() if e.op == "-" else ar
                    out.append((cl + cr, al.plus(rhs)))
            return out
        if e.op == "*":
            lhs = _real_branches(e.lhs, base)
            rhs = _real_branches(e.rhs, base)
            k = _const_scalar(lhs)
            if k is not None:
                return [(c, a.scaled(k)) for c, a in rhs]
            k = _const_scalar(rhs)
            if k is not None:
                return [(c, a.scaled(k)) for c, a in lhs]
            raise FormulaError("product of two adjustable terms left in residual")
        if e.op == "/":
            rhs = _real_branches(e.rhs, base)
            k = _const_scalar(rhs)
            if k is None:
                raise FormulaError("adjustable divisor left in residual")
            if k == 0.0:
                raise FormulaError("division by zero in residual")
            return [(c, a.scaled(1.0 / k)) for c, a in _real_branches(e.lhs, base)]
        if e.op == "dot":
            lx, ly = _vec_branches(e.lhs, base)
            rx, ry = _vec_branches(e.rhs, base)
            out = []
            for clx, alx in lx:
                for cly, aly in ly:
                    for crx, arx in rx:
                        for cry, ary in ry:
                            kl = _mul_affine(alx, arx)
                            kr = _mul_affine(aly, ary)
                            out.append((clx + cly + crx + cry, kl.plus(kr)))
            return out
    raise FormulaError(f"cannot linearize residual expression {e!r}")


def _mul_affine(a: Affine, b: Affine) -> Affine:
    if a.is_constant:
        return b.scaled(a.const)
    if b.is_constant:
        return a.scaled(b.const)
    raise FormulaError("product of two adjustable terms left in residual")


def _vec_branches(e: Expr, base: dict[str, float]):
    if isinstance(e, Const) and isinstance(e.value, Vec2):
        return ([((), Affine.constant(e.value.x))], [((), Affine.constant(e.value.y))])
    if isinstance(e, Vec2Ctor):
        return (_real_branches(e.x, base), _real_branches(e.y, base))
    if isinstance(e, Unary) and e.op == "-":
        x, y = _vec_branches(e.operand, base)
        return ([(c, a.negated()) for c, a in x], [(c, a.negated()) for c, a in y])
    if isinstance(e, Binary) and e.op in ("+", "-"):
        lx, ly = _vec_branches(e.lhs, base)
        rx, ry = _vec_branches(e.rhs, base)
        sign = -1.0 if e.op == "-" else 1.0
        combine = lambda l, r: [(cl + cr, al.plus(ar.scaled(sign)))
                                for cl, al in l for cr, ar in r]
        return (combine(lx, rx), combine(ly, ry))
    if isinstance(e, Binary) and e.op == "*":
        # one side is a real scalar
        try:
            k = _const_scalar(_real_branches(e.lhs, base))
            vec = e.rhs
        except FormulaError:
            k = None
            vec = None
        if k is None:
            k = _const_scalar(_real_branches(e.rhs, base))
            vec = e.lhs
        if k is None:
            raise FormulaError("adjustable vector scaling left in residual")
        x, y = _vec_branches(vec, base)
        return ([(c, a.scaled(k)) for c, a in x], [(c, a.scaled(k)) for c, a in y])
    raise FormulaError(f"cannot linearize residual vector {e!r}")


_FLIP = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}


def _cmp_atom(al: Affine, ar: Affine, op: str) -> Formula:
    diff = al.plus(ar.negated())
    if op == "<":
        return _atom(diff, "lt")
    if op == "<=":
        return _atom(diff, "le")
    if op == ">":
        return _atom(diff.negated(), "lt")
    if op == ">=":
        return _atom(diff.negated(), "le")
    if op == "==":
        return _atom(diff, "eq")
    if op == "!=":
        return for_([_atom(diff, "lt"), _atom(diff.negated(), "lt")])
    raise FormulaError(f"unknown comparison {op!r}")


def condition_to_formula(e: Expr, base: dict[str, float], positive: bool = True) -> Formula:
    """Convert a residual path condition into a formula over deltas.

    Parameter references become base value + delta. ``positive=False``
    builds the negation with strictness senses flipped at the atoms.
    """
    if isinstance(e, Const):
        truth = bool(e.value) == positive
        return TRUE if truth else FALSE
    if isinstance(e, Unary) and e.op == "!":
        return condition_to_formula(e.operand, base, not positive)
    if isinstance(e, Binary) and e.op == "&&":
        parts = [condition_to_formula(e.lhs, base, positive),
                 condition_to_formula(e.rhs, base, positive)]
        return fand(parts) if positive else for_(parts)
    if isinstance(e, Binary) and e.op == "||":
        parts = [condition_to_formula(e.lhs, base, positive),
                 condition_to_formula(e.rhs, base, positive)]
        return for_(parts) if positive else fand(parts)
    if isinstance(e, Binary) and e.op in ("<", "<=", ">", ">=", "==", "!="):
        op = e.op if positive else _FLIP[e.op]
        lhs = _real_branches(e.lhs, base)
        rhs = _real_branches(e.rhs, base)
        pieces: list[Formula] = []
        for cl, al in lhs:
            for cr, ar in rhs:
                conds = cl + cr
                atom = _cmp_atom(al, ar, op)
                if positive:
                    pieces.append(fand(list(conds) + [atom]))
                else:
                    pieces.append(for_([_negate_atom(c) for c in conds] + [atom]))
        return for_(pieces) if positive else fand(pieces)
    raise FormulaError(f"cannot convert residual condition {e!r}")


# --------------------------------------------------------------------------
# Corrections -> clauses
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Clause:
    index: int
    phi: Formula
    weight: float
    correction: Correction | None = None
    residual: Residual | None = None
    diagnostic: str | None = None


@dataclass(frozen=True)
class Exploration:
    """One direction of a solution-exploration constraint over penalties."""
    kind: str  # some_penalized | some_satisfied
    indices: frozenset[int]


@dataclass(frozen=True)
class RepairFormula:
    deltas: tuple[str, ...]
    clauses: tuple[Clause, ...]
    h: float
    eps: float
    mode: str
    scales: dict[str, float] = field(default_factory=dict)
    exploration: tuple[Exploration, ...] = ()

    def scale(self, name: str) -> float:
        return self.scales.get(name, 1.0)

    def adjustment_cost(self, adjustments: dict[str, float]) -> float:
        return sum(abs(adjustments.get(n, 0.0)) / self.scale(n) for n in self.deltas)


def correct_one(fn: TransitionFn, tau, params: dict[str, float],
                designated: set[str] | None, correction: Correction,
                backend_nonlinear: bool = False) -> tuple[Formula, Residual, str | None]:
    """Build the satisfaction formula for a single correction.

    Immediate and nominal corrections require some residual path returning
    the target state to hold; negative corrections require every path to
    the target to be off.
    """
    effective = correction.designated if correction.designated is not None else designated
    residual = make_residual(fn, tau, params,
                             designated=set(effective) if effective is not None else None,
                             backend_nonlinear=backend_nonlinear)
    base = {p: params[p] for p in residual.params}
    target_paths = [cond for cond, label in residual.paths
                    if label == correction.target_state]
    if correction.kind == "negative":
        phi = fand([condition_to_formula(c, base, positive=False)
                    for c in target_paths])
        return phi, residual, None
    if not target_paths:
        diag = (f"state {correction.target_state!r} is unreachable from "
                f"{tau.state!r} at t={tau.t}")
        return FALSE, residual, diag
    phi = for_([condition_to_formula(c, base) for c in target_paths])
    return phi, residual, None


def correct_all(fn: TransitionFn, params: dict[str, float],
                designated: set[str] | None, trace: Trace,
                corrections: list[Correction], h: float = 1.0,
                eps: float = 1e-3, mode: str = "weighted-sum",
                nominal_weight: float = 1.0, normalize: bool = False,
                backend_nonlinear: bool = False) -> RepairFormula:
    """Conjoin per-correction clauses sharing one delta per parameter."""
    if h <= 0:
        raise FormulaError("penalty H must be positive")
    if eps <= 0:
        raise FormulaError("strictness margin eps must be positive")
    clauses: list[Clause] = []
    delta_names: set[str] = set()
    for i, c in enumerate(corrections):
        if not (0 <= c.t < len(trace)):
            raise FormulaError(f"correction {i} references t={c.t} outside the trace")
        phi, residual, diag = correct_one(fn, trace[c.t], params, designated, c,
                                          backend_nonlinear=backend_nonlinear)
        weight = h * (nominal_weight if c.kind == "nominal" else 1.0)
        clauses.append(Clause(i, phi, weight, c, residual, diag))
        delta_names |= set(residual.params)
    deltas = tuple(p for p in fn.params if p in delta_names)
    scales = {}
    if normalize:
        scales = {p: abs(params[p]) if params[p] != 0.0 else 1.0 for p in deltas}
    return RepairFormula(deltas=deltas, clauses=tuple(clauses), h=h, eps=eps,
                         mode=mode, scales=scales)
