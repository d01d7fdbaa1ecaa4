"""Frozen fixtures: parameter sets, desk grids, and the worked example.

The attacker parameter sets were tuned once against the bundled simulator
and then frozen; tests treat them as givens. ``golden_trace`` reproduces
the kick-refusal element used throughout the documentation: ball 50 units
out, aim error pi/60, lateral offset 40 against a 40-unit window, so the
recorded transition stays GOTO while the user wants KICK.
"""
from __future__ import annotations

import math

from .corrections import Correction, immediate
from .lang import TransitionFn, Vec2
from .simworld import GridSpec, Scenario
from .trace import Trace, TraceElement, record_step

GOLDEN_PARAMS = {
    "aimMargin": math.pi / 50,
    "maxDist": 80.0,
    "viewAng": math.pi / 6,
    "kickTimeout": 2.0,
}

ATTACKER_NOMINAL = {"aimMargin": 0.12, "maxDist": 0.60, "viewAng": math.pi / 6,
                    "kickTimeout": 0.5}
# maxDist below the 0.35 m lineup standoff: the kick gate never opens on a
# parked approach, only against a conveniently rolling ball
ATTACKER_BASELINE = {"aimMargin": 0.12, "maxDist": 0.30, "viewAng": math.pi / 6,
                     "kickTimeout": 0.5}
# gates wide open: kicks commit from far out while badly aimed
ATTACKER_PREMATURE = {"aimMargin": 0.35, "maxDist": 1.2, "viewAng": math.pi / 4,
                      "kickTimeout": 0.5}
ATTACKER_DEGRADED = {"aimMargin": 0.9, "maxDist": 3.5, "viewAng": math.pi / 2.5,
                     "kickTimeout": 0.5}

DOCKER_NOMINAL = {"lineupTol": 0.06, "faceTol": 0.05, "dockTol": 0.04}
# below the 2 cm actuation deadband: the robot parks short of the staging
# tolerance and never leaves LINEUP
DOCKER_BASELINE = {"lineupTol": 0.005, "faceTol": 0.05, "dockTol": 0.04}


def attacker_scenario(ball=(1.0, 0.0), ball_speed=0.3, ball_angle=0.0,
                      time_limit=8.0) -> Scenario:
    return Scenario(kind="attacker", robot=(0.0, 0.0, 0.0), ball=ball,
                    ball_speed=ball_speed, ball_angle=ball_angle,
                    time_limit=time_limit)


def docker_scenario(robot=(-2.0, 1.0, 0.0), time_limit=12.0) -> Scenario:
    return Scenario(kind="docker", robot=robot, dock=(4.0, 0.0, 0.0),
                    time_limit=time_limit)


def desk_grid(kind: str, held_out: bool = False, angles: int = 6) -> GridSpec:
    """Standard evaluation grids; the held-out variant shifts every cell."""
    if kind == "attacker":
        base = attacker_scenario()
        if held_out:
            return GridSpec(x0=-2.7, x1=3.3, nx=5, y0=-2.0, y1=2.0, ny=4,
                            angles=angles, base=base, seed=17)
        return GridSpec(x0=-3.0, x1=3.5, nx=5, y0=-2.2, y1=2.2, ny=4,
                        angles=angles, base=base, seed=0)
    if kind == "docker":
        base = docker_scenario()
        if held_out:
            return GridSpec(x0=-3.2, x1=1.2, nx=4, y0=-1.8, y1=1.8, ny=3,
                            angles=max(1, angles - 2), base=base, seed=17)
        return GridSpec(x0=-3.5, x1=1.5, nx=4, y0=-2.0, y1=2.0, ny=3,
                        angles=max(1, angles - 2), base=base, seed=0)
    raise ValueError(f"unknown fixture kind {kind!r}")


def golden_trace(fn: TransitionFn) -> tuple[Trace, Correction]:
    """Six-element kick-refusal trace whose element 5 is the worked example."""
    trace = Trace.for_fn(fn)
    for t in range(6):
        inputs = {
            "ballLoc": Vec2(30.0, 40.0),
            "robotLoc": Vec2(0.0, 0.0),
            "robotAng": 0.0,
            "targetAng": math.pi / 60,
            "time": float(t),
        }
        vars_ = {"lastKick": 2.0, "timeInKick": 0.0}
        record_step(trace, inputs, vars_, "START" if t == 0 else "GOTO")
    return trace, immediate(trace, 5, "KICK")


def merge_traces(fn: TransitionFn, traces: list[Trace]) -> tuple[Trace, list[int]]:
    """Concatenate episode traces, re-stamping timesteps; returns offsets."""
    merged = Trace.for_fn(fn)
    offsets = []
    for tr in traces:
        offsets.append(len(merged))
        for el in tr:
            merged.append(TraceElement(len(merged), el.inputs, el.vars, el.state))
    return merged, offsets


def first_divergence(reference: Trace, observed: Trace) -> int | None:
    """Index of the first element whose recorded state differs."""
    for i in range(min(len(reference), len(observed))):
        if reference[i].state != observed[i].state:
            return i
    return None
