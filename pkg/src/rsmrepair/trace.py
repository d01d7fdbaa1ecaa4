"""Execution traces: timestep snapshots of inputs, variables, and state.

On disk a trace is JSON-lines: a header object carrying the transition
function's name and declaration hash (for mismatch detection), then one
object per element with keys ``t``, ``inputs``, ``vars``, ``state``.
Reals keep full precision; 2-vectors are two-element arrays.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .lang import Shape, TransitionFn, Value, Vec2, shape_of_value


class TraceError(Exception):
    pass


@dataclass(frozen=True)
class TraceElement:
    t: int
    inputs: dict[str, Value]
    vars: dict[str, Value]
    state: str


class Trace:
    """Ordered trace elements with consecutive timesteps from 0.

    A trace has a single writer while being recorded; completed traces are
    treated as immutable.
    """

    def __init__(self, fn_name: str = "transition", decl_hash: str = "",
                 declarations: TransitionFn | None = None):
        if declarations is not None:
            fn_name = declarations.name
            decl_hash = declarations.declaration_hash()
        self.fn_name = fn_name
        self.decl_hash = decl_hash
        self._declarations = declarations
        self._elements: list[TraceElement] = []

    @classmethod
    def for_fn(cls, fn: TransitionFn) -> "Trace":
        return cls(declarations=fn)

    def __len__(self) -> int:
        return len(self._elements)

    def __iter__(self):
        return iter(self._elements)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            sliced = Trace(self.fn_name, self.decl_hash, self._declarations)
            sliced._elements = self._elements[idx]
            return sliced
        return self._elements[idx]

    def elements(self) -> tuple[TraceElement, ...]:
        return tuple(self._elements)

    def append(self, element: TraceElement) -> None:
        if element.t != len(self._elements):
            raise TraceError(f"expected timestep {len(self._elements)}, got {element.t}")
        self._elements.append(element)


def record_step(trace: Trace, inputs: dict[str, Value], vars: dict[str, Value],
                state: str) -> Trace:
    """Append one element (with t = len(trace)) after validating bindings."""
    fn = trace._declarations
    if fn is not None:
        for name in fn.inputs:
            if name not in inputs:
                raise TraceError(f"missing input binding {name!r}")
        for name in fn.vars:
            if name not in vars:
                raise TraceError(f"missing variable binding {name!r}")
        if state not in fn.states:
            raise TraceError(f"undeclared state {state!r}")
    trace.append(TraceElement(len(trace), dict(inputs), dict(vars), state))
    return trace


def _value_to_json(v: Value):
    if isinstance(v, Vec2):
        return [v.x, v.y]
    return v


def _value_from_json(v) -> Value:
    if isinstance(v, list):
        if len(v) != 2:
            raise TraceError(f"2-vector needs two components, got {v!r}")
        return Vec2(float(v[0]), float(v[1]))
    if isinstance(v, bool):
        return v
    if isinstance(v, str):
        return v
    return float(v)


def element_to_json(e: TraceElement) -> dict:
    return {
        "t": e.t,
        "inputs": {k: _value_to_json(v) for k, v in e.inputs.items()},
        "vars": {k: _value_to_json(v) for k, v in e.vars.items()},
        "state": e.state,
    }


def element_from_json(obj: dict) -> TraceElement:
    return TraceElement(
        t=int(obj["t"]),
        inputs={k: _value_from_json(v) for k, v in obj["inputs"].items()},
        vars={k: _value_from_json(v) for k, v in obj["vars"].items()},
        state=obj["state"],
    )


def save(trace: Trace, path: str | Path) -> None:
    path = Path(path)
    with path.open("w") as f:
        header = {"fn": trace.fn_name, "decl_hash": trace.decl_hash}
        f.write(json.dumps(header) + "\n")
        for e in trace:
            f.write(json.dumps(element_to_json(e)) + "\n")


def load(path: str | Path, expect: TransitionFn | None = None) -> Trace:
    path = Path(path)
    with path.open() as f:
        lines = f.read().splitlines()
    if not lines:
        raise TraceError(f"{path}: empty trace file (missing header)")
    try:
        header = json.loads(lines[0])
        fn_name, decl_hash = header["fn"], header["decl_hash"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise TraceError(f"{path}:1: malformed header: {exc}") from None
    if expect is not None:
        if decl_hash != expect.declaration_hash():
            raise TraceError(
                f"{path}: declaration hash mismatch: trace was recorded for "
                f"{fn_name!r} ({decl_hash}), not {expect.name!r} "
                f"({expect.declaration_hash()})")
        trace = Trace.for_fn(expect)
    else:
        trace = Trace(fn_name, decl_hash)
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            trace.append(element_from_json(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise TraceError(f"{path}:{lineno}: malformed trace record: {exc}") from None
    return trace
