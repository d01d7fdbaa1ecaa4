"""Attacker and docker simulators with built-in per-state controllers.

Controllers are simple proportional laws (assumed convergent); the
transition function under test only chooses which controller runs each
tick. Episodes are fully deterministic.
"""
from __future__ import annotations

import math

from ..lang import TransitionFn, Vec2, angle_mod, eval_transition
from ..trace import Trace, TraceElement, record_step
from .core import (
    BALL_DECEL,
    DOCK_ANG_TOL,
    DOCK_POS_TOL,
    FIELD_HALF_X,
    FIELD_HALF_Y,
    GOAL_HALF_WIDTH,
    KICK_RANGE,
    KICK_SPEED,
    ROBOT_MAX_ANG,
    ROBOT_MAX_SPEED,
    Scenario,
    SimError,
    TICK,
    WorldState,
    ball_physics_step,
    clamp_speed,
)

_GOAL_CENTER = Vec2(FIELD_HALF_X, 0.0)


class AttackerSim:
    """Stationary-ball attacker: go to the ball, aim at the goal, kick."""

    kind = "attacker"

    def __init__(self, scenario: Scenario | None = None):
        self.world = WorldState()
        self.vars = {"lastKick": 0.0, "timeInKick": 0.0}
        self.outcome: str | None = None
        self._scored = False
        self._time_limit = 8.0
        if scenario is not None:
            self.reset(scenario)

    def reset(self, scenario: Scenario) -> None:
        if scenario.kind != self.kind:
            raise SimError(f"scenario is for {scenario.kind!r}, not attacker")
        rx, ry, rang = scenario.robot
        self.world = WorldState(
            ball=Vec2(*scenario.ball),
            ball_vel=Vec2(scenario.ball_speed * math.cos(scenario.ball_angle),
                          scenario.ball_speed * math.sin(scenario.ball_angle)),
            robot=Vec2(rx, ry),
            robot_ang=rang,
        )
        self.vars = {"lastKick": 0.0, "timeInKick": 0.0}
        self.outcome = None
        self._scored = False
        self._time_limit = scenario.time_limit

    def inject(self, tau: TraceElement) -> None:
        """Reconstruct the world from a trace element (velocities restart
        at zero: traces do not record them)."""
        required = ("ballLoc", "robotLoc", "robotAng", "time")
        missing = [k for k in required if k not in tau.inputs]
        if missing:
            raise SimError(f"cannot reconstruct world: missing input {missing[0]!r}")
        self.world = WorldState(
            ball=tau.inputs["ballLoc"],
            ball_vel=Vec2(0.0, 0.0),
            robot=tau.inputs["robotLoc"],
            robot_ang=tau.inputs["robotAng"],
            time=tau.inputs["time"],
        )
        self.vars = dict(tau.vars)
        self.outcome = None
        self._scored = False

    def observe(self) -> dict:
        w = self.world
        target = _GOAL_CENTER - w.ball
        return {
            "ballLoc": w.ball,
            "robotLoc": w.robot,
            "robotAng": w.robot_ang,
            "targetAng": math.atan2(target.y, target.x),
            "time": w.time,
        }

    def variables(self) -> dict:
        return dict(self.vars)

    def tick(self, state: str) -> None:
        w = self.world
        target = _GOAL_CENTER - w.ball
        target_ang = math.atan2(target.y, target.x)
        cmd_vel = Vec2(0.0, 0.0)
        cmd_ang = 0.0
        if state == "GOTO":
            # park on a lineup point behind the ball; KICK closes the gap
            behind = w.ball - Vec2(math.cos(target_ang), math.sin(target_ang)).scaled(0.35)
            err = behind - w.robot
            cmd_vel = clamp_speed(err.scaled(3.0), ROBOT_MAX_SPEED)
            cmd_ang = max(-ROBOT_MAX_ANG,
                          min(ROBOT_MAX_ANG, 6.0 * angle_mod(target_ang - w.robot_ang)))
        elif state == "KICK":
            # commit to the current heading: aiming happens in GOTO
            err = w.ball - w.robot
            cmd_vel = clamp_speed(err.scaled(3.0), ROBOT_MAX_SPEED)
            if err.norm() <= KICK_RANGE:
                w.ball_vel = Vec2(KICK_SPEED * math.cos(w.robot_ang),
                                  KICK_SPEED * math.sin(w.robot_ang))
                self.vars["lastKick"] = w.time
        self.vars["timeInKick"] = (self.vars["timeInKick"] + TICK
                                   if state == "KICK" else 0.0)

        prev_ball = w.ball
        w.ball, w.ball_vel = ball_physics_step(w.ball, w.ball_vel)
        w.robot_vel = cmd_vel
        w.robot = w.robot + cmd_vel.scaled(TICK)
        w.robot_ang = angle_mod(w.robot_ang + cmd_ang * TICK)
        w.time += TICK

        if self._crossed_goal(prev_ball, w.ball):
            self._scored = True
            self.outcome = "goal"
        elif abs(w.ball.x) > FIELD_HALF_X or abs(w.ball.y) > FIELD_HALF_Y:
            self.outcome = "ball_out"
        elif w.time >= self._time_limit:
            self.outcome = "time_limit"
        elif state == "END" and w.ball_vel.norm() == 0.0:
            self.outcome = "done"

    @staticmethod
    def _crossed_goal(before: Vec2, after: Vec2) -> bool:
        if before.x < FIELD_HALF_X <= after.x:
            frac = (FIELD_HALF_X - before.x) / (after.x - before.x)
            y = before.y + frac * (after.y - before.y)
            return abs(y) <= GOAL_HALF_WIDTH
        return False

    def episode_over(self) -> str | None:
        return self.outcome

    def succeeded(self) -> bool:
        return self._scored


class DockerSim:
    """Differential-drive docking against a fixed charging station."""

    kind = "docker"

    def __init__(self, scenario: Scenario | None = None):
        self.world = WorldState()
        self.dock = Vec2(4.0, 0.0)
        self.dock_ang = 0.0
        self.outcome: str | None = None
        self._time_limit = 8.0
        if scenario is not None:
            self.reset(scenario)

    @property
    def staging(self) -> Vec2:
        off = Vec2(math.cos(self.dock_ang), math.sin(self.dock_ang)).scaled(0.8)
        return self.dock - off

    def reset(self, scenario: Scenario) -> None:
        if scenario.kind != self.kind:
            raise SimError(f"scenario is for {scenario.kind!r}, not docker")
        rx, ry, rang = scenario.robot
        self.world = WorldState(robot=Vec2(rx, ry), robot_ang=rang)
        dx, dy, dang = scenario.dock
        self.dock = Vec2(dx, dy)
        self.dock_ang = dang
        self.outcome = None
        self._time_limit = scenario.time_limit

    def inject(self, tau: TraceElement) -> None:
        required = ("robotLoc", "robotAng", "dockLoc", "dockAng", "time")
        missing = [k for k in required if k not in tau.inputs]
        if missing:
            raise SimError(f"cannot reconstruct world: missing input {missing[0]!r}")
        self.world = WorldState(robot=tau.inputs["robotLoc"],
                                robot_ang=tau.inputs["robotAng"],
                                time=tau.inputs["time"])
        self.dock = tau.inputs["dockLoc"]
        self.dock_ang = tau.inputs["dockAng"]
        self.outcome = None

    def observe(self) -> dict:
        w = self.world
        return {
            "robotLoc": w.robot,
            "robotAng": w.robot_ang,
            "dockLoc": self.dock,
            "dockAng": self.dock_ang,
            "stagingLoc": self.staging,
            "time": w.time,
        }

    def variables(self) -> dict:
        return {}

    # actuation deadbands (stiction): the controllers cannot settle closer
    # than these, so thresholds below them never trigger
    LINEUP_DEADBAND = 0.02
    TURN_DEADBAND = 0.01

    def tick(self, state: str) -> None:
        w = self.world
        forward = 0.0
        cmd_ang = 0.0
        if state == "LINEUP":
            err = self.staging - w.robot
            bearing = math.atan2(err.y, err.x)
            ang_err = angle_mod(bearing - w.robot_ang)
            if err.norm() >= self.LINEUP_DEADBAND:
                cmd_ang = max(-ROBOT_MAX_ANG, min(ROBOT_MAX_ANG, 5.0 * ang_err))
                if abs(ang_err) < 1.0:
                    forward = min(ROBOT_MAX_SPEED, 2.5 * err.norm())
        elif state == "TURN":
            ang_err = angle_mod(self.dock_ang - w.robot_ang)
            if abs(ang_err) >= self.TURN_DEADBAND:
                cmd_ang = max(-ROBOT_MAX_ANG, min(ROBOT_MAX_ANG, 5.0 * ang_err))
        elif state == "APPROACH":
            ang_err = angle_mod(self.dock_ang - w.robot_ang)
            cmd_ang = max(-1.0, min(1.0, 1.5 * ang_err))
            forward = 0.4

        heading = Vec2(math.cos(w.robot_ang), math.sin(w.robot_ang))
        w.robot_vel = heading.scaled(forward)
        w.robot = w.robot + w.robot_vel.scaled(TICK)
        w.robot_ang = angle_mod(w.robot_ang + cmd_ang * TICK)
        w.time += TICK

        if state == "END":
            self.outcome = "done"
        elif abs(w.robot.x) > FIELD_HALF_X + 0.5 or abs(w.robot.y) > FIELD_HALF_Y + 0.5:
            self.outcome = "robot_out"
        elif w.time >= self._time_limit:
            self.outcome = "time_limit"

    def episode_over(self) -> str | None:
        return self.outcome

    def succeeded(self) -> bool:
        """Docked means the episode left the robot at the station pose."""
        pos_err = (self.dock - self.world.robot).norm()
        ang_err = abs(angle_mod(self.dock_ang - self.world.robot_ang))
        return pos_err <= DOCK_POS_TOL and ang_err <= DOCK_ANG_TOL


def make_sim(kind: str, scenario: Scenario | None = None):
    if kind == "attacker":
        return AttackerSim(scenario)
    if kind == "docker":
        return DockerSim(scenario)
    raise SimError(f"no simulator for {kind!r}")


def run_episode(fn: TransitionFn, params: dict[str, float],
                scenario: Scenario) -> tuple[Trace, bool]:
    """Run one fixed-step episode: transition, then controller, per tick."""
    sim = make_sim(scenario.kind, scenario)
    missing = [name for name in fn.inputs if name not in sim.observe()]
    if missing:
        raise SimError(f"simulator provides no input channel {missing[0]!r}")
    trace = Trace.for_fn(fn)
    state = fn.start
    max_ticks = int(scenario.time_limit / TICK) + 10
    for _ in range(max_ticks):
        inputs = sim.observe()
        variables = sim.variables()
        record_step(trace, inputs, variables, state)
        state = eval_transition(fn, state, inputs, variables, params)
        sim.tick(state)
        if sim.episode_over() is not None:
            break
    return trace, sim.succeeded()
