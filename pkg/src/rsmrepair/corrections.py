"""User corrections: immediate, negative, nominal, and continue-forks.

An immediate correction asserts the transition at timestep t should output
a given state; a negative correction forbids a state at t; nominal
corrections pin recorded behavior so repairs do not regress it. A
continue-fork replays the world from one trace element with transitions
into a forbidden state suppressed, generating one negative correction per
suppressed step plus a single positive correction where the user (or a
scripted stop rule) finally allows the transition.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .lang import TransitionFn, eval_transition
from .trace import Trace, TraceElement, record_step


class CorrectionError(Exception):
    pass


@dataclass(frozen=True)
class Correction:
    kind: str  # immediate | negative | nominal
    t: int
    target_state: str
    designated: frozenset[str] | None = None
    weight_tag: str = "default"  # default | nominal


def _check_target(trace: Trace, t: int, state: str) -> None:
    if not (0 <= t < len(trace)):
        raise CorrectionError(f"timestep {t} outside trace of length {len(trace)}")
    fn = trace._declarations
    if fn is not None and state not in fn.states:
        raise CorrectionError(f"undeclared state {state!r}")


def immediate(trace: Trace, t: int, desired: str,
              designated: set[str] | None = None) -> Correction:
    """Assert that the transition at timestep t should output ``desired``."""
    _check_target(trace, t, desired)
    return Correction("immediate", t, desired,
                      frozenset(designated) if designated else None)


def negative(trace: Trace, t: int, forbidden: str,
             designated: set[str] | None = None) -> Correction:
    """Assert that the transition at timestep t must not output ``forbidden``."""
    _check_target(trace, t, forbidden)
    return Correction("negative", t, forbidden,
                      frozenset(designated) if designated else None)


def nominal_from_trace(trace: Trace, indices: list[int],
                       designated: set[str] | None = None) -> list[Correction]:
    """One nominal correction per index, pinning the recorded next state."""
    out = []
    for i in indices:
        if not (0 <= i < len(trace) - 1):
            raise CorrectionError(f"index {i} has no recorded next state")
        out.append(Correction("nominal", i, trace[i + 1].state,
                              frozenset(designated) if designated else None,
                              weight_tag="nominal"))
    return out


# --------------------------------------------------------------------------
# Continue-forks
# --------------------------------------------------------------------------

class ContinueSession:
    """Forked forward simulation with a transition mask.

    The simulator is restored from the base element; at each step the
    transition function runs, and an output equal to the forbidden state is
    suppressed by holding the previous state for that tick. One negative
    correction is generated per step. Finalizing at a visited timestep
    returns those negatives plus a single positive correction asserting the
    transition should fire there.
    """

    def __init__(self, sim, fn: TransitionFn, params: dict[str, float],
                 base_trace: Trace, t: int, forbidden: str,
                 designated: set[str] | None = None):
        if not (0 <= t < len(base_trace)):
            raise CorrectionError(f"timestep {t} outside trace of length {len(base_trace)}")
        if forbidden not in fn.states:
            raise CorrectionError(f"undeclared state {forbidden!r}")
        tau = base_trace[t]
        if tau.state == fn.end:
            raise CorrectionError(
                f"cannot fork at the end state {fn.end!r}: no outgoing "
                "transitions to suppress")
        if tau.state == forbidden:
            raise CorrectionError(
                f"recorded state at t={t} is already {forbidden!r}")
        self.sim = sim
        self.fn = fn
        self.params = dict(params)
        self.forbidden = forbidden
        self.designated = frozenset(designated) if designated else None
        self.base_t = t
        self.status = "open"
        sim.inject(tau)  # raises if an input channel cannot be reconstructed
        self.state = tau.state
        self.trace = Trace.for_fn(fn)
        for el in base_trace[:t].elements():
            self.trace.append(el)
        record_step(self.trace, sim.observe(), sim.variables(), self.state)
        self.current = t
        self.negatives: list[Correction] = []

    def step(self) -> tuple[TraceElement, Correction]:
        """Advance one masked tick; returns the new element and the negative
        correction generated for the step that was just taken."""
        if self.status != "open":
            raise CorrectionError(f"continue session is {self.status}")
        neg = Correction("negative", self.current, self.forbidden, self.designated)
        self.negatives.append(neg)
        tau = self.trace[self.current]
        raw = eval_transition(self.fn, self.state, tau.inputs, tau.vars, self.params)
        masked = self.state if raw == self.forbidden else raw
        assert masked != self.forbidden
        self.sim.tick(masked)
        self.state = masked
        record_step(self.trace, self.sim.observe(), self.sim.variables(), self.state)
        self.current += 1
        element = self.trace[self.current]
        if self.sim.episode_over() is not None:
            self.status = "closed"
        return element, neg

    def finalize(self, stop_t: int | None = None) -> list[Correction]:
        """Close the session: negatives up to stop_t plus the positive."""
        if self.status == "finalized":
            raise CorrectionError("continue session already finalized")
        if self.status == "closed":
            raise CorrectionError(
                "episode ended before a stop point was chosen; only negative "
                "corrections are available")
        if not self.negatives:
            raise CorrectionError("cannot finalize before stepping")
        last = self.negatives[-1].t
        if stop_t is None:
            stop_t = last
        if not (self.base_t <= stop_t <= last):
            raise CorrectionError(f"stop timestep {stop_t} was not visited "
                                  f"(visited {self.base_t}..{last})")
        self.status = "finalized"
        kept = [n for n in self.negatives if n.t <= stop_t]
        positive = Correction("immediate", stop_t, self.forbidden, self.designated)
        return kept + [positive]


def fork_continue(sim, fn: TransitionFn, params: dict[str, float], trace: Trace,
                  t: int, forbidden: str,
                  designated: set[str] | None = None) -> ContinueSession:
    return ContinueSession(sim, fn, params, trace, t, forbidden, designated)


def run_continue(sim, fn: TransitionFn, params: dict[str, float], trace: Trace,
                 t: int, forbidden: str, stop_rule,
                 designated: set[str] | None = None,
                 max_steps: int = 100_000) -> tuple[list[Correction], ContinueSession]:
    """Headless continue-fork: step until the stop rule fires, then finalize.

    ``stop_rule(element)`` stands in for the user watching the forked
    simulation. If the episode ends first, the session's negatives are
    returned without a positive correction.
    """
    session = fork_continue(sim, fn, params, trace, t, forbidden, designated)
    for _ in range(max_steps):
        element, _ = session.step()
        if session.status == "closed":
            return list(session.negatives), session
        if stop_rule(element):
            return session.finalize(), session
    raise CorrectionError(f"stop rule did not fire within {max_steps} steps")


# --------------------------------------------------------------------------
# File format
# --------------------------------------------------------------------------

def correction_to_json(c: Correction) -> dict:
    obj: dict = {"kind": c.kind, "t": c.t, "state": c.target_state}
    if c.designated is not None:
        obj["params"] = sorted(c.designated)
    return obj


def correction_from_json(obj: dict) -> Correction:
    kind = obj["kind"]
    if kind not in ("immediate", "negative", "nominal"):
        raise CorrectionError(f"unknown correction kind {kind!r}")
    designated = frozenset(obj["params"]) if "params" in obj else None
    return Correction(kind, int(obj["t"]), obj["state"], designated,
                      weight_tag="nominal" if kind == "nominal" else "default")


def corrections_to_text(corrections: list[Correction]) -> str:
    return json.dumps([correction_to_json(c) for c in corrections], indent=2) + "\n"


def save_corrections(corrections: list[Correction], path: str | Path) -> None:
    Path(path).write_text(corrections_to_text(corrections))


def load_corrections(path: str | Path) -> list[Correction]:
    data = json.loads(Path(path).read_text())
    if not isinstance(data, list):
        raise CorrectionError("corrections file must hold a JSON array")
    return [correction_from_json(obj) for obj in data]
