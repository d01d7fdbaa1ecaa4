"""SMT-LIB2 script emission for repair formulas.

Deltas are real constants, penalties are reals constrained to {0, weight},
|delta| comes from auxiliary variables t >= +-delta (scaled when parameter
normalization is on), and strict atoms are lowered to non-strict ones with
the configured margin before emission. Each soft clause is the exclusive
choice "penalty taken" / "penalty zero and formula holds", which under a
positive weight is emitted as a plain disjunction against the two-valued
penalty domain.
"""
from __future__ import annotations

from decimal import Decimal

from .formula import (
    Affine,
    FAnd,
    FAtom,
    FFalse,
    FOr,
    FTrue,
    Formula,
    RepairFormula,
    formula_deltas,
    lower_strict,
)


class EncodeError(Exception):
    pass


def smt_real(v: float) -> str:
    """Exact decimal literal for a float; negatives use (- x)."""
    if v < 0:
        return f"(- {smt_real(-v)})"
    d = Decimal(v)
    text = format(d, "f")
    if "." not in text:
        text += ".0"
    return text


def delta_var(name: str) -> str:
    return f"d_{name}"


def abs_var(name: str) -> str:
    return f"t_{name}"


def penalty_var(index: int) -> str:
    return f"w_{index}"


def _term(affine: Affine) -> str:
    parts = [f"(* {smt_real(c)} {delta_var(n)})" for n, c in affine.coeffs]
    if affine.const != 0.0 or not parts:
        parts.append(smt_real(affine.const))
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


def _formula(f: Formula) -> str:
    if isinstance(f, FTrue):
        return "true"
    if isinstance(f, FFalse):
        return "false"
    if isinstance(f, FAtom):
        if f.op == "le":
            return f"(<= {_term(f.affine)} 0.0)"
        if f.op == "eq":
            return f"(= {_term(f.affine)} 0.0)"
        raise EncodeError(f"strict atom left unlowered: {f!r}")
    if isinstance(f, FAnd):
        return "(and " + " ".join(_formula(x) for x in f.items) + ")"
    if isinstance(f, FOr):
        return "(or " + " ".join(_formula(x) for x in f.items) + ")"
    raise EncodeError(f"cannot encode {f!r}")


def encode(formula: RepairFormula, mode: str | None = None) -> str:
    """Emit a complete SMT-LIB2 optimization script for the repair formula."""
    mode = mode or formula.mode
    if mode not in ("weighted-sum", "lexicographic", "pareto"):
        raise EncodeError(f"unknown objective mode {mode!r}")
    declared = set(formula.deltas)
    for cl in formula.clauses:
        leaked = formula_deltas(cl.phi) - declared
        if leaked:
            raise EncodeError(
                f"clause {cl.index} references undeclared deltas {sorted(leaked)}")

    lines: list[str] = ["(set-option :produce-models true)"]
    if mode == "pareto":
        lines.append("(set-option :opt.priority pareto)")
    lines.append("(set-logic QF_LRA)")

    for name in formula.deltas:
        lines.append(f"(declare-const {delta_var(name)} Real)")
        lines.append(f"(declare-const {abs_var(name)} Real)")
    for cl in formula.clauses:
        lines.append(f"(declare-const {penalty_var(cl.index)} Real)")

    for name in formula.deltas:
        d, t = delta_var(name), abs_var(name)
        scale = formula.scale(name)
        scaled = d if scale == 1.0 else f"(/ {d} {smt_real(scale)})"
        lines.append(f"(assert (>= {t} {scaled}))")
        lines.append(f"(assert (>= {t} (- {scaled})))")

    for cl in formula.clauses:
        w = penalty_var(cl.index)
        weight = smt_real(cl.weight)
        lines.append(f"(assert (or (= {w} 0.0) (= {w} {weight})))")
        phi = _formula(lower_strict(cl.phi, formula.eps))
        lines.append(f"(assert (or (= {w} {weight}) (and (= {w} 0.0) {phi})))")

    for ex in formula.exploration:
        parts = []
        for i in sorted(ex.indices):
            w = penalty_var(i)
            if ex.kind == "some_penalized":
                parts.append(f"(= {w} {smt_real(formula.clauses[i].weight)})")
            else:
                parts.append(f"(= {w} 0.0)")
        if parts:
            body = parts[0] if len(parts) == 1 else "(or " + " ".join(parts) + ")"
            lines.append(f"(assert {body})")

    penalty_sum = [penalty_var(cl.index) for cl in formula.clauses]
    abs_sum = [abs_var(n) for n in formula.deltas]

    def total(terms: list[str]) -> str:
        if not terms:
            return "0.0"
        if len(terms) == 1:
            return terms[0]
        return "(+ " + " ".join(terms) + ")"

    if mode == "weighted-sum":
        lines.append(f"(minimize {total(penalty_sum + abs_sum)})")
    else:
        lines.append(f"(minimize {total(penalty_sum)})")
        lines.append(f"(minimize {total(abs_sum)})")

    lines += ["(check-sat)", "(get-objectives)", "(get-model)"]
    return "\n".join(lines) + "\n"
