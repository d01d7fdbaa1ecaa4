"""A small SMT-LIB2 optimization solver speaking stdin/stdout.

Run as ``python -m rsmrepair.smtlib_solver``. Covers the quantifier-free
linear real arithmetic fragment the encoder emits: real constants,
assertions built from and/or over non-strict affine atoms, and one or
more ``(minimize ...)`` objectives solved lexicographically (which also
serves as the first pareto point). Solving is branch-and-bound over the
disjunctions with an LP relaxation bound at every node.

Independent of the enumeration oracle on purpose: agreement between the
two is a meaningful end-to-end check of the encoder, this solver, and the
model parser.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field

from .repair.encode import smt_real
from .repair.sexpr import SexprError, parse_all


class SolverInputError(Exception):
    pass


# -- linear terms and formulas ----------------------------------------------

def _is_number(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def parse_linear(node, declared: set[str]) -> tuple[dict[str, float], float]:
    if isinstance(node, str):
        if _is_number(node):
            return {}, float(node)
        if node in declared:
            return {node: 1.0}, 0.0
        raise SolverInputError(f"unknown symbol {node!r}")
    if not node:
        raise SolverInputError("empty term")
    head = node[0]
    args = node[1:]
    if head == "+":
        coeffs: dict[str, float] = {}
        const = 0.0
        for a in args:
            c, k = parse_linear(a, declared)
            const += k
            for n, v in c.items():
                coeffs[n] = coeffs.get(n, 0.0) + v
        return coeffs, const
    if head == "-":
        first_c, first_k = parse_linear(args[0], declared)
        if len(args) == 1:
            return {n: -v for n, v in first_c.items()}, -first_k
        for a in args[1:]:
            c, k = parse_linear(a, declared)
            first_k -= k
            for n, v in c.items():
                first_c[n] = first_c.get(n, 0.0) - v
        return first_c, first_k
    if head == "*":
        scale = 1.0
        linear: tuple[dict[str, float], float] | None = None
        for a in args:
            c, k = parse_linear(a, declared)
            if c:
                if linear is not None:
                    raise SolverInputError("nonlinear product")
                linear = (c, k)
            else:
                scale *= k
        if linear is None:
            return {}, scale
        c, k = linear
        return {n: scale * v for n, v in c.items()}, scale * k
    if head == "/":
        if len(args) != 2:
            raise SolverInputError("/ takes two arguments")
        num_c, num_k = parse_linear(args[0], declared)
        den_c, den_k = parse_linear(args[1], declared)
        if den_c or den_k == 0.0:
            raise SolverInputError("division by a non-constant")
        return {n: v / den_k for n, v in num_c.items()}, num_k / den_k
    raise SolverInputError(f"unsupported term head {head!r}")


# formulas: ("atom", coeffs, const, op) with op in {le, eq} meaning
# coeffs.x + const (<=|=) 0, or ("and"|"or", [children]), or bool
Atom = tuple


def parse_formula(node, declared: set[str], positive: bool = True):
    if isinstance(node, str):
        if node == "true":
            return positive
        if node == "false":
            return not positive
        raise SolverInputError(f"expected formula, got {node!r}")
    head = node[0]
    if head in ("and", "or"):
        flip = {"and": "or", "or": "and"}
        op = head if positive else flip[head]
        return (op, [parse_formula(a, declared, positive) for a in node[1:]])
    if head == "not":
        return parse_formula(node[1], declared, not positive)
    if head == "=>":
        return parse_formula(["or", ["not", node[1]], node[2]], declared, positive)
    if head == "xor":
        a, b = node[1], node[2]
        expanded = ["or", ["and", a, ["not", b]], ["and", ["not", a], b]]
        return parse_formula(expanded, declared, positive)
    if head in ("<=", ">=", "=", "<", ">"):
        lc, lk = parse_linear(node[1], declared)
        rc, rk = parse_linear(node[2], declared)
        coeffs = dict(lc)
        for n, v in rc.items():
            coeffs[n] = coeffs.get(n, 0.0) - v
        const = lk - rk
        if head in ("<", ">"):
            raise SolverInputError(
                "strict comparisons are unsupported; lower them with a margin")
        if head == "=":
            if not positive:
                raise SolverInputError("negated equality is unsupported")
            return ("atom", coeffs, const, "eq")
        if head == ">=":
            coeffs = {n: -v for n, v in coeffs.items()}
            const = -const
        if not positive:
            raise SolverInputError(
                "negated non-strict comparisons are unsupported; "
                "lower strictness with a margin")
        return ("atom", coeffs, const, "le")
    raise SolverInputError(f"unsupported formula head {head!r}")


# -- branch and bound --------------------------------------------------------

@dataclass
class _Problem:
    variables: list[str]
    atoms: list[Atom] = field(default_factory=list)
    pending: list[list] = field(default_factory=list)


def _push(problem: _Problem, f) -> bool:
    """Merge a formula into the node; False means trivially unsat."""
    if f is True:
        return True
    if f is False:
        return False
    if f[0] == "atom":
        problem.atoms.append(f)
        return True
    if f[0] == "and":
        return all(_push(problem, c) for c in f[1])
    problem.pending.append(f[1])
    return True


class _BranchAndBound:
    def __init__(self, variables: list[str], objective):
        from scipy.optimize import linprog  # deferred: heavy import
        self._linprog = linprog
        self.variables = variables
        self.index = {n: i for i, n in enumerate(variables)}
        self.objective = objective  # (coeffs, const)
        self.best: tuple[float, list[float]] | None = None

    def _lp(self, atoms: list[Atom]):
        import numpy as np
        nvar = len(self.variables)
        c = np.zeros(nvar)
        for n, v in self.objective[0].items():
            c[self.index[n]] = v
        a_ub, b_ub, a_eq, b_eq = [], [], [], []
        for _, coeffs, const, op in atoms:
            row = np.zeros(nvar)
            for n, v in coeffs.items():
                row[self.index[n]] = v
            if op == "le":
                a_ub.append(row)
                b_ub.append(-const)
            else:
                a_eq.append(row)
                b_eq.append(-const)
        res = self._linprog(
            c,
            A_ub=np.stack(a_ub) if a_ub else None,
            b_ub=np.array(b_ub) if b_ub else None,
            A_eq=np.stack(a_eq) if a_eq else None,
            b_eq=np.array(b_eq) if b_eq else None,
            bounds=[(None, None)] * nvar,
            method="highs",
        )
        return res

    def search(self, problem: _Problem) -> None:
        res = self._lp(problem.atoms)
        if res.status == 2:  # infeasible
            return
        if res.status == 3:  # relaxation unbounded: branching may bound it
            if not problem.pending:
                raise SolverInputError("objective is unbounded")
            bound = -float("inf")
        elif res.status != 0:
            raise SolverInputError(f"LP solver failure: {res.message}")
        else:
            bound = float(res.fun)
        if self.best is not None and bound >= self.best[0] - 1e-9:
            return
        if not problem.pending:
            self.best = (bound, [float(x) for x in res.x])
            return
        disjuncts = problem.pending[0]
        rest = problem.pending[1:]
        for d in disjuncts:
            child = _Problem(self.variables, list(problem.atoms), list(rest))
            if _push(child, d):
                self.search(child)


def optimize(variables: list[str], constraints: list, objectives: list):
    """Lexicographic minimization; returns (status, values, model|None)."""
    root = _Problem(variables)
    for f in constraints:
        if not _push(root, f):
            return "unsat", [], None
    stages = objectives if objectives else [({}, 0.0)]
    atoms = list(root.atoms)
    model = None
    values = []
    for coeffs, const in stages:
        bnb = _BranchAndBound(variables, (coeffs, const))
        bnb.search(_Problem(variables, list(atoms), list(root.pending)))
        if bnb.best is None:
            return "unsat", [], None
        value, model = bnb.best
        values.append(value + const)
        # pin this stage before optimizing the next
        atoms.append(("atom", dict(coeffs), -value - 1e-7, "le"))
    if not objectives:
        values = []
    return "sat", values, model


# -- REPL ---------------------------------------------------------------------

class Session:
    def __init__(self, out):
        self.out = out
        self.reset()

    def reset(self) -> None:
        self.declared: list[str] = []
        self.constraints: list = []
        self.objectives: list = []
        self.result: tuple[str, list, list | None] | None = None

    def _print(self, text: str) -> None:
        self.out.write(text + "\n")
        self.out.flush()

    def execute(self, form) -> None:
        if isinstance(form, str):
            raise SolverInputError(f"unexpected atom {form!r}")
        head = form[0] if form else ""
        if head in ("set-option", "set-logic", "set-info"):
            return
        if head == "echo":
            self._print(form[1].strip('"'))
            return
        if head in ("declare-const", "declare-fun"):
            name = form[1]
            sort = form[-1]
            if sort != "Real":
                raise SolverInputError(f"only Real constants are supported, not {sort}")
            self.declared.append(name)
            return
        if head == "assert":
            self.constraints.append(parse_formula(form[1], set(self.declared)))
            return
        if head == "minimize":
            self.objectives.append(parse_linear(form[1], set(self.declared)))
            return
        if head == "check-sat":
            status, values, model = optimize(self.declared, self.constraints,
                                             self.objectives)
            self.result = (status, values, model)
            self._print(status)
            return
        if head == "get-objectives":
            if self.result is None or self.result[0] != "sat":
                self._print('(error "objectives are not available")')
                return
            lines = ["(objectives"]
            for i, v in enumerate(self.result[1]):
                lines.append(f" (obj_{i} {smt_real(v)})")
            lines.append(")")
            self._print("\n".join(lines))
            return
        if head == "get-model":
            if self.result is None or self.result[0] != "sat":
                self._print('(error "model is not available")')
                return
            model = self.result[2] or [0.0] * len(self.declared)
            lines = ["("]
            for name, v in zip(self.declared, model):
                lines.append(f"  (define-fun {name} () Real {smt_real(v)})")
            lines.append(")")
            self._print("\n".join(lines))
            return
        if head == "reset":
            self.reset()
            return
        if head == "exit":
            raise SystemExit(0)
        raise SolverInputError(f"unsupported command {head!r}")


def main() -> int:
    session = Session(sys.stdout)
    buffer = ""
    for line in sys.stdin:
        buffer += line
        try:
            forms = parse_all(buffer)
        except SexprError as exc:
            if "unbalanced '('" in str(exc):
                continue  # form spans lines; keep buffering
            session._print(f'(error "{exc}")')
            buffer = ""
            continue
        buffer = ""
        for form in forms:
            try:
                session.execute(form)
            except SolverInputError as exc:
                session._print(f'(error "{exc}")')
            except SystemExit:
                return 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
