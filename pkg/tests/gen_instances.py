"""Random desk-scale repair-formula instances for solver agreement tests.

Instances are built directly as formula IR (no DSL round trip) with
continuous random coefficients, so exact objective ties between different
penalty assignments have probability zero and satisfied sets are uniquely
determined.
"""
from __future__ import annotations

import random

from rsmrepair.corrections import Correction
from rsmrepair.repair.formula import (
    Affine,
    Clause,
    FAtom,
    RepairFormula,
    fand,
    for_,
)


def _atom(rng: random.Random, deltas: list[str], coupled: bool) -> FAtom:
    k = 2 if coupled and len(deltas) > 1 and rng.random() < 0.4 else 1
    names = rng.sample(deltas, k)
    coeffs = {n: rng.choice([-1, 1]) * rng.uniform(0.3, 3.0) for n in names}
    const = rng.uniform(-4.0, 4.0)
    op = "lt" if rng.random() < 0.6 else "le"
    return FAtom(Affine.make(coeffs, const), op)


def _conj(rng: random.Random, deltas: list[str], coupled: bool):
    return fand([_atom(rng, deltas, coupled) for _ in range(rng.randint(1, 3))])


def random_instance(rng: random.Random, max_corrections: int = 8,
                    max_deltas: int = 4, coupled: bool = True) -> RepairFormula:
    deltas = [f"p{i}" for i in range(rng.randint(1, max_deltas))]
    n = rng.randint(1, max_corrections)
    h = rng.choice([0.7, 1.0, 1.9, 3.3])
    clauses = []
    for i in range(n):
        if rng.random() < 0.5:
            phi = _conj(rng, deltas, coupled)
        else:
            phi = for_([_conj(rng, deltas, coupled), _conj(rng, deltas, coupled)])
        clauses.append(Clause(index=i, phi=phi, weight=h,
                              correction=Correction("immediate", i, "X")))
    return RepairFormula(deltas=tuple(deltas), clauses=tuple(clauses),
                         h=h, eps=1e-3, mode="weighted-sum")
