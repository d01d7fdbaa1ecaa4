"""Scaled-down repair experiments on the bundled simulators.

Each function is a self-contained study returning a plain dict of
measurements; the demo scripts print them and the acceptance suite
asserts on them. Everything is deterministic.
"""
from __future__ import annotations

import math
import time
from dataclasses import replace

from .corrections import immediate, negative, nominal_from_trace, run_continue
from .fixtures import (
    ATTACKER_BASELINE,
    ATTACKER_NOMINAL,
    ATTACKER_PREMATURE,
    DOCKER_BASELINE,
    DOCKER_NOMINAL,
    attacker_scenario,
    desk_grid,
    first_divergence,
    merge_traces,
)
from .lang import TransitionFn, Vec2, eval_transition
from .repair.solution import apply_solution
from .repair.srtr import srtr
from .simworld import evaluate_grid, exhaustive_search, run_episode
from .trace import Trace, TraceElement, record_step


def _failing_scenarios(fn, params, grid, nominal=None, limit=None):
    """Grid scenarios where ``params`` fails (and ``nominal`` succeeds)."""
    out = []
    for x, y in grid.cells():
        for angle in grid.angle_samples():
            scenario = grid.scenario_for(x, y, angle)
            _, ok = run_episode(fn, params, scenario)
            if ok:
                continue
            if nominal is not None:
                _, nominal_ok = run_episode(fn, nominal, scenario)
                if not nominal_ok:
                    continue
            out.append(scenario)
            if limit is not None and len(out) >= limit:
                return out
            break  # one scenario per cell keeps corrections diverse
    return out


def divergence_correction(fn, bad_params, good_params, scenario):
    """Correction at the step where the bad trace first leaves the good one."""
    bad_trace, _ = run_episode(fn, bad_params, scenario)
    good_trace, _ = run_episode(fn, good_params, scenario)
    i = first_divergence(good_trace, bad_trace)
    if i is None or i == 0:
        return None
    return bad_trace, i - 1, good_trace[i].state


def exp_immediate_attacker(backend="builtin", max_corrections=5) -> dict:
    """Repair the kick-refusing attacker from divergence corrections."""
    fn = _attacker()
    grid = desk_grid("attacker")
    baseline = evaluate_grid(fn, ATTACKER_BASELINE, grid)
    traces, specs = [], []
    for scenario in _failing_scenarios(fn, ATTACKER_BASELINE, grid,
                                       nominal=ATTACKER_NOMINAL,
                                       limit=max_corrections):
        hit = divergence_correction(fn, ATTACKER_BASELINE, ATTACKER_NOMINAL, scenario)
        if hit is None:
            continue
        trace, t, desired = hit
        traces.append(trace)
        specs.append((len(traces) - 1, t, desired))
    merged, offsets = merge_traces(fn, traces)
    corrections = [immediate(merged, offsets[i] + t, desired)
                   for i, t, desired in specs]
    solutions = srtr(fn, ATTACKER_BASELINE, None, 1, merged, corrections,
                     backend=backend)
    repaired_params = apply_solution(ATTACKER_BASELINE, solutions[0])
    repaired = evaluate_grid(fn, repaired_params, grid)
    return {
        "baseline_rate": baseline.aggregate,
        "repaired_rate": repaired.aggregate,
        "corrections": len(corrections),
        "solution": solutions[0],
        "repaired_params": repaired_params,
    }


def exp_immediate_docker(backend="builtin") -> dict:
    """Repair the docker stuck short of its staging tolerance."""
    fn = _docker()
    grid = desk_grid("docker")
    baseline = evaluate_grid(fn, DOCKER_BASELINE, grid)
    scenarios = _failing_scenarios(fn, DOCKER_BASELINE, grid, limit=3)
    traces, specs = [], []
    for scenario in scenarios:
        trace, _ = run_episode(fn, DOCKER_BASELINE, scenario)
        traces.append(trace)
        specs.append((len(traces) - 1, len(trace) - 2))
    merged, offsets = merge_traces(fn, traces)
    corrections = [immediate(merged, offsets[i] + t, "TURN") for i, t in specs]
    solutions = srtr(fn, DOCKER_BASELINE, None, 1, merged, corrections,
                     backend=backend)
    repaired_params = apply_solution(DOCKER_BASELINE, solutions[0])
    repaired = evaluate_grid(fn, repaired_params, grid)
    return {
        "baseline_rate": baseline.aggregate,
        "repaired_rate": repaired.aggregate,
        "corrections": len(corrections),
        "solution": solutions[0],
        "repaired_params": repaired_params,
    }


def labeled_positions(fn) -> tuple[Trace, list[tuple[int, str, bool]]]:
    """13 hand-labeled world snapshots: should the attacker kick here?

    Returns a snapshot trace plus (index, state, should_transition) labels.
    """
    goal = Vec2(4.5, 0.0)
    snapshots = []

    def pose(ball, standoff, aim_offset=0.0, t=3.0):
        direction = goal - Vec2(*ball)
        ang = math.atan2(direction.y, direction.x)
        robot = Vec2(*ball) - Vec2(math.cos(ang), math.sin(ang)).scaled(standoff)
        return {
            "ballLoc": Vec2(*ball),
            "robotLoc": robot,
            "robotAng": ang + aim_offset,
            "targetAng": ang,
            "time": t,
        }

    # lined up at kicking range: should transition
    for ball in [(-2.5, 1.5), (-1.0, -2.0), (0.0, 0.0), (1.0, 2.0),
                 (2.0, -1.0), (3.0, 0.5), (-2.0, -0.5)]:
        snapshots.append((pose(ball, 0.42), True))
    # too far out: should not
    for ball, standoff in [((-1.5, 1.0), 1.6), ((1.5, -1.5), 2.2), ((0.5, 1.0), 1.3)]:
        snapshots.append((pose(ball, standoff), False))
    # close but badly aimed: should not
    for ball, off in [((-0.5, -1.0), 0.5), ((2.5, 1.5), -0.6)]:
        snapshots.append((pose(ball, 0.42, aim_offset=off), False))
    # lined up but inside the kick cooldown: should not
    snapshots.append((pose((0.0, -1.5), 0.42, t=0.2), False))

    trace = Trace.for_fn(fn)
    labels = []
    for i, (inputs, should) in enumerate(snapshots):
        record_step(trace, inputs, {"lastKick": 0.0, "timeInKick": 0.0}, "GOTO")
        labels.append((i, "KICK", should))
    return trace, labels


def exp_exhaustive_parity(backend="builtin") -> dict:
    """Repair from 13 labeled positions vs an exhaustive parameter grid."""
    fn = _attacker()
    trace, labels = labeled_positions(fn)
    corrections = [immediate(trace, i, state) if should else
                   negative(trace, i, state)
                   for i, state, should in labels]

    t0 = time.perf_counter()
    solutions = srtr(fn, ATTACKER_BASELINE, None, 1, trace, corrections,
                     backend=backend)
    srtr_time = time.perf_counter() - t0
    srtr_params = apply_solution(ATTACKER_BASELINE, solutions[0])

    def linspace(a, b, n):
        return [a + (b - a) * i / (n - 1) for i in range(n)]

    param_grid = {
        "aimMargin": linspace(0.02, 1.0, 18),
        "maxDist": linspace(0.1, 3.0, 24),
        "kickTimeout": linspace(0.05, 2.0, 12),
    }
    labeled = [(trace[i], state, should) for i, state, should in labels]
    t0 = time.perf_counter()
    grid_params, agreement = exhaustive_search(fn, param_grid, labeled,
                                               ATTACKER_BASELINE)
    grid_time = time.perf_counter() - t0

    held_out = desk_grid("attacker", held_out=True)
    srtr_rate = evaluate_grid(fn, srtr_params, held_out).aggregate
    grid_rate = evaluate_grid(fn, grid_params, held_out).aggregate
    return {
        "srtr_rate": srtr_rate,
        "grid_rate": grid_rate,
        "srtr_time": srtr_time,
        "grid_time": grid_time,
        "grid_agreement": agreement,
        "srtr_params": srtr_params,
        "grid_params": grid_params,
    }


def _first_kick_step(trace) -> int | None:
    for t in range(len(trace) - 1):
        if trace[t].state == "GOTO" and trace[t + 1].state == "KICK":
            return t
    return None


def exp_continue(backend="builtin") -> dict:
    """Premature kicks: one negative correction vs a continue-fork plus
    20 nominal corrections."""
    from .simworld import AttackerSim

    fn = _attacker()
    grid = desk_grid("attacker")
    baseline = evaluate_grid(fn, ATTACKER_PREMATURE, grid)

    target = None
    for scenario in _failing_scenarios(fn, ATTACKER_PREMATURE, grid):
        trace, _ = run_episode(fn, ATTACKER_PREMATURE, scenario)
        t = _first_kick_step(trace)
        if t is not None and t > 0:
            target = (scenario, trace, t)
            break
    scenario, trace, t = target

    # one immediate "do not kick" correction
    single = [negative(trace, t, "KICK")]
    sol_single = srtr(fn, ATTACKER_PREMATURE, None, 1, trace, single,
                      backend=backend)[0]
    single_rate = evaluate_grid(
        fn, apply_solution(ATTACKER_PREMATURE, sol_single), grid).aggregate

    # continue-fork: suppress KICK until parked and aimed
    def parked_and_aimed(element) -> bool:
        dist = (element.inputs["ballLoc"] - element.inputs["robotLoc"]).norm()
        aim = abs(element.inputs["targetAng"] - element.inputs["robotAng"])
        return dist < 0.4 and aim < 0.1

    continue_corrections, session = run_continue(
        AttackerSim(), fn, ATTACKER_PREMATURE, trace, t, "KICK",
        parked_and_aimed)

    # 20 nominal corrections from successful kick transitions
    nominal_traces, nominal_steps = [], []
    for x, y in grid.cells():
        for angle in grid.angle_samples():
            sc = grid.scenario_for(x, y, angle)
            tr, ok = run_episode(fn, ATTACKER_PREMATURE, sc)
            step = _first_kick_step(tr)
            if ok and step is not None:
                nominal_traces.append(tr)
                nominal_steps.append(step)
            if len(nominal_traces) >= 20:
                break
        if len(nominal_traces) >= 20:
            break

    merged, offsets = merge_traces(fn, [session.trace] + nominal_traces)
    combined = [replace(c, t=offsets[0] + c.t) for c in continue_corrections]
    for k, (tr, step) in enumerate(zip(nominal_traces, nominal_steps)):
        combined.extend(nominal_from_trace(merged, [offsets[k + 1] + step]))

    sol_continue = srtr(fn, ATTACKER_PREMATURE, None, 1, merged, combined,
                        backend=backend)[0]
    continue_rate = evaluate_grid(
        fn, apply_solution(ATTACKER_PREMATURE, sol_continue), grid).aggregate

    return {
        "baseline_rate": baseline.aggregate,
        "single_negative_rate": single_rate,
        "continue_rate": continue_rate,
        "negatives": sum(c.kind == "negative" for c in continue_corrections),
        "positives": sum(c.kind == "immediate" for c in continue_corrections),
        "nominals": sum(c.kind == "nominal" for c in combined),
    }


def exploration_fixture(fn) -> tuple[Trace, list]:
    """Ten conflicting corrections over hand-built kick poses."""
    goal = Vec2(4.5, 0.0)
    trace = Trace.for_fn(fn)

    def add(ball, standoff, aim_offset=0.0):
        direction = goal - Vec2(*ball)
        ang = math.atan2(direction.y, direction.x)
        robot = Vec2(*ball) - Vec2(math.cos(ang), math.sin(ang)).scaled(standoff)
        inputs = {
            "ballLoc": Vec2(*ball),
            "robotLoc": robot,
            "robotAng": ang + aim_offset,
            "targetAng": ang,
            "time": 3.0,
        }
        record_step(trace, inputs, {"lastKick": 0.0, "timeInKick": 0.0}, "GOTO")
        return len(trace) - 1

    corrections = []
    # kick from progressively farther poses
    for ball, standoff in [((-2.0, 1.0), 0.42), ((0.5, -1.5), 0.5),
                           ((1.5, 0.5), 0.62), ((-1.0, -0.5), 0.9),
                           ((2.5, 1.0), 1.3)]:
        corrections.append(immediate(trace, add(ball, standoff), "KICK"))
    # but also: never kick from mid range (conflicts with the last two)
    for ball, standoff in [((-0.5, 1.5), 0.8), ((1.0, 1.5), 1.0),
                           ((2.0, -0.5), 1.15)]:
        corrections.append(negative(trace, add(ball, standoff), "KICK"))
    # kick despite a loose aim (pulls aimMargin up)
    for ball, off in [((0.0, 2.0), 0.2), ((-1.5, -1.5), -0.25)]:
        corrections.append(immediate(trace, add((0.0, 2.0), 0.42, off), "KICK"))
    return trace, corrections


def exp_exploration(backend="builtin", k=3) -> dict:
    """Enumerate alternative repairs for a conflicting correction set."""
    fn = _attacker()
    grid = desk_grid("attacker")
    baseline = evaluate_grid(fn, ATTACKER_BASELINE, grid)
    trace, corrections = exploration_fixture(fn)
    solutions = srtr(fn, ATTACKER_BASELINE, None, k, trace, corrections,
                     backend=backend)
    rates = [evaluate_grid(fn, apply_solution(ATTACKER_BASELINE, s), grid).aggregate
             for s in solutions]
    return {
        "baseline_rate": baseline.aggregate,
        "solutions": solutions,
        "rates": rates,
        "satisfied_sets": [sorted(s.satisfied) for s in solutions],
    }


def _attacker() -> TransitionFn:
    from . import load_corpus
    return load_corpus("attacker")


def _docker() -> TransitionFn:
    from . import load_corpus
    return load_corpus("docker")
