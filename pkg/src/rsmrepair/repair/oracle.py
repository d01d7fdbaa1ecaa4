"""Reference solver: exhaustive enumeration over penalty assignments.

For every assignment of the penalty variables (satisfy / drop per
correction) the induced constraint is a conjunction of per-correction
formulas; its disjunctive paths are conjunctions of affine atoms, over
which the scaled L1-minimal adjustment is computed exactly: by interval
intersection when every atom touches at most one delta, otherwise by
enumerating candidate vertices of the constraint arrangement augmented
with the coordinate planes (where piecewise-linear L1 minima live).

Deliberately independent of the SMT-LIB backend path: no LP solver, no
script round-trip.
"""
from __future__ import annotations

import itertools
import math
import time

import numpy as np

from .formula import (
    Affine,
    FAnd,
    FAtom,
    FFalse,
    FOr,
    FTrue,
    Formula,
    RepairFormula,
    lower_strict,
)
from .solution import RepairSolution

MAX_CORRECTIONS = 12
MAX_DELTAS = 4
_MAX_PATHS = 50_000
_FEAS_TOL = 1e-9


class OracleScaleError(Exception):
    pass


def _dnf(f: Formula) -> list[list[FAtom]]:
    if isinstance(f, FTrue):
        return [[]]
    if isinstance(f, FFalse):
        return []
    if isinstance(f, FAtom):
        return [[f]]
    if isinstance(f, FOr):
        out: list[list[FAtom]] = []
        for item in f.items:
            out.extend(_dnf(item))
            if len(out) > _MAX_PATHS:
                raise OracleScaleError("constraint has too many disjunctive paths")
        return out
    if isinstance(f, FAnd):
        paths: list[list[FAtom]] = [[]]
        for item in f.items:
            sub = _dnf(item)
            paths = [p + q for p in paths for q in sub]
            if len(paths) > _MAX_PATHS:
                raise OracleScaleError("constraint has too many disjunctive paths")
        return paths
    raise OracleScaleError(f"cannot expand {f!r}")


def _interval_min(atoms: list[FAtom], scales: dict[str, float]) -> tuple[float, dict] | None:
    """Exact minimum when every atom constrains at most one delta."""
    bounds: dict[str, tuple[float, float]] = {}
    pinned: dict[str, float] = {}
    for a in atoms:
        coeffs = a.affine.coeffs
        if not coeffs:
            if a.affine.const > 0 or (a.op == "eq" and a.affine.const != 0):
                return None
            continue
        (name, c), = coeffs
        k = a.affine.const
        lo, hi = bounds.get(name, (-math.inf, math.inf))
        if a.op == "eq":
            x = -k / c
            if name in pinned and abs(pinned[name] - x) > _FEAS_TOL:
                return None
            pinned[name] = x
            continue
        # c*x + k <= 0
        if c > 0:
            hi = min(hi, -k / c)
        else:
            lo = max(lo, -k / c)
        bounds[name] = (lo, hi)
    assignment: dict[str, float] = {}
    total = 0.0
    for name in set(bounds) | set(pinned):
        lo, hi = bounds.get(name, (-math.inf, math.inf))
        if name in pinned:
            x = pinned[name]
            if not (lo - _FEAS_TOL <= x <= hi + _FEAS_TOL):
                return None
        else:
            if lo > hi:
                return None
            x = min(max(0.0, lo), hi)
        assignment[name] = x
        total += abs(x) / scales.get(name, 1.0)
    return total, assignment


def _vertex_min(atoms: list[FAtom], names: list[str],
                scales: dict[str, float]) -> tuple[float, dict] | None:
    """L1 minimum over a conjunction of coupled affine atoms.

    Candidate minimizers satisfy d independent equalities drawn from the
    atom hyperplanes and the coordinate planes delta_j = 0.
    """
    d = len(names)
    index = {n: i for i, n in enumerate(names)}
    rows: list[tuple[np.ndarray, float]] = []   # hyperplanes a.x + k = 0
    eqs: list[int] = []
    for j, a in enumerate(atoms):
        vec = np.zeros(d)
        for n, c in a.affine.coeffs:
            vec[index[n]] = c
        rows.append((vec, a.affine.const))
        if a.op == "eq":
            eqs.append(j)
    for i in range(d):
        vec = np.zeros(d)
        vec[i] = 1.0
        rows.append((vec, 0.0))

    def feasible(x: np.ndarray) -> bool:
        for a in atoms:
            v = a.affine.const
            for n, c in a.affine.coeffs:
                v += c * x[index[n]]
            lim = _FEAS_TOL * max(1.0, sum(abs(c) for _, c in a.affine.coeffs),
                                  abs(a.affine.const))
            if a.op == "eq":
                if abs(v) > lim:
                    return False
            elif v > lim:
                return False
        return True

    del eqs  # equality atoms are enforced by the feasibility check below
    best: tuple[float, np.ndarray] | None = None
    for combo in itertools.combinations(range(len(rows)), d):
        mat = np.stack([rows[i][0] for i in combo])
        rhs = np.array([-rows[i][1] for i in combo])
        try:
            x = np.linalg.solve(mat, rhs)
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(x)):
            continue
        if not feasible(x):
            continue
        cost = sum(abs(x[index[n]]) / scales.get(n, 1.0) for n in names)
        if best is None or cost < best[0] - 1e-15:
            best = (cost, x)
    if best is None:
        return None
    cost, x = best
    return cost, {n: float(x[index[n]]) for n in names}


def satisfiable(f: Formula) -> bool | None:
    """Exact satisfiability with strict atoms honored.

    Decides decoupled paths (every atom over at most one delta) by open or
    closed interval intersection; returns None when only coupled paths
    remain undecided.
    """
    unknown = False
    for path in _dnf(f):
        if not all(len(a.affine.coeffs) <= 1 for a in path):
            unknown = True
            continue
        feasible = True
        intervals: dict[str, list] = {}
        for a in path:
            if not a.affine.coeffs:
                v = a.affine.const
                ok = v < 0 if a.op == "lt" else (v == 0 if a.op == "eq" else v <= 0)
                if not ok:
                    feasible = False
                    break
                continue
            (name, c), = a.affine.coeffs
            bound = -a.affine.const / c
            lo, lo_open, hi, hi_open = intervals.setdefault(
                name, [-math.inf, False, math.inf, False])
            if a.op == "eq":
                if bound < lo or bound > hi or (bound == lo and lo_open) \
                        or (bound == hi and hi_open):
                    feasible = False
                    break
                intervals[name] = [bound, False, bound, False]
                continue
            strict = a.op == "lt"
            if c > 0:
                if bound < hi or (bound == hi and strict):
                    intervals[name][2], intervals[name][3] = bound, strict
            else:
                if bound > lo or (bound == lo and strict):
                    intervals[name][0], intervals[name][1] = bound, strict
            lo, lo_open, hi, hi_open = intervals[name]
            if lo > hi or (lo == hi and (lo_open or hi_open)):
                feasible = False
                break
        if feasible:
            return True
    return None if unknown else False


def _min_l1(f: Formula, scales: dict[str, float]) -> tuple[float, dict] | None:
    """Scaled-L1-minimal assignment satisfying ``f``, or None if UNSAT."""
    best: tuple[float, dict] | None = None
    for path in _dnf(f):
        names = sorted({n for a in path for n, _ in a.affine.coeffs})
        if len(names) > MAX_DELTAS:
            raise OracleScaleError(f"{len(names)} coupled deltas exceed desk scale")
        decoupled = all(len(a.affine.coeffs) <= 1 for a in path)
        if decoupled:
            res = _interval_min(path, scales)
        else:
            consts_ok = all(a.affine.coeffs or a.affine.const <= 0 for a in path
                            if a.op != "eq")
            if not consts_ok or any(
                    a.op == "eq" and not a.affine.coeffs and a.affine.const != 0
                    for a in path):
                continue
            res = _vertex_min([a for a in path if a.affine.coeffs], names, scales)
        if res is not None and (best is None or res[0] < best[0]):
            best = res
    return best


def solve_oracle(formula: RepairFormula,
                 mode: str | None = None) -> RepairSolution | None:
    """Globally minimal solution by penalty-assignment enumeration.

    ``weighted-sum`` minimizes penalties plus scaled adjustments;
    ``lexicographic`` (and ``pareto``, whose first point it serves as)
    minimizes total penalty first. Returns None when the exploration
    constraints rule out every penalty assignment. Ties break toward more
    satisfied corrections, then the lexicographically first assignment.
    """
    mode = mode or formula.mode
    n = len(formula.clauses)
    if n > MAX_CORRECTIONS:
        raise OracleScaleError(f"{n} corrections exceed desk scale ({MAX_CORRECTIONS})")
    if len(formula.deltas) > MAX_DELTAS + 4:
        raise OracleScaleError(f"{len(formula.deltas)} deltas exceed desk scale")
    start = time.perf_counter()
    lowered = [lower_strict(cl.phi, formula.eps) for cl in formula.clauses]
    best: tuple[tuple, float, tuple[int, ...], dict] | None = None

    for bits in itertools.product((0, 1), repeat=n):
        ok = True
        for ex in formula.exploration:
            if ex.kind == "some_penalized":
                ok = ok and any(bits[i] == 1 for i in ex.indices)
            else:
                ok = ok and any(bits[i] == 0 for i in ex.indices)
        if not ok:
            continue
        induced = [lowered[i] for i in range(n) if bits[i] == 0]
        combined: Formula = FAnd(tuple(induced)) if induced else FTrue()
        res = _min_l1(combined, formula.scales)
        if res is None:
            continue
        delta_cost, assignment = res
        penalty_cost = sum(formula.clauses[i].weight for i in range(n) if bits[i] == 1)
        total = penalty_cost + delta_cost
        if mode == "weighted-sum":
            key = (total, sum(bits), bits)
        else:  # lexicographic / pareto first point
            key = (penalty_cost, delta_cost, bits)
        if best is None or key < best[0]:
            best = (key, total, bits, assignment)

    if best is None:
        return None
    _, total, bits, assignment = best
    adjustments = {name: assignment.get(name, 0.0) for name in formula.deltas}
    penalties = {i: (formula.clauses[i].weight if bits[i] else 0.0) for i in range(n)}
    satisfied = frozenset(i for i in range(n) if bits[i] == 0)
    return RepairSolution(
        adjustments=adjustments,
        penalties=penalties,
        satisfied=satisfied,
        objective=total,
        backend_id="oracle",
        wall_time=time.perf_counter() - start,
        diagnostics=tuple(cl.diagnostic for cl in formula.clauses if cl.diagnostic),
    )
