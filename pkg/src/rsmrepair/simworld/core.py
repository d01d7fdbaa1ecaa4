"""World state, scenarios, and grid specifications for the desk simulators.

Fixed fixtures: 9 m x 6 m field centered on the origin with the goal
segment on the +x edge, 1/60 s ticks, constant ball deceleration, and a
velocity-clamped point robot.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..lang import Vec2

TICK = 1.0 / 60.0
FIELD_HALF_X = 4.5
FIELD_HALF_Y = 3.0
GOAL_HALF_WIDTH = 0.5
BALL_DECEL = 0.3
ROBOT_MAX_SPEED = 2.0
ROBOT_MAX_ANG = 4.0
KICK_SPEED = 3.5
KICK_RANGE = 0.15
DOCK_POS_TOL = 0.05
DOCK_ANG_TOL = math.radians(5.0)


class SimError(Exception):
    pass


@dataclass
class WorldState:
    ball: Vec2 = Vec2(0.0, 0.0)
    ball_vel: Vec2 = Vec2(0.0, 0.0)
    robot: Vec2 = Vec2(0.0, 0.0)
    robot_ang: float = 0.0
    robot_vel: Vec2 = Vec2(0.0, 0.0)
    time: float = 0.0


@dataclass(frozen=True)
class Scenario:
    kind: str  # attacker | docker
    robot: tuple[float, float, float] = (0.0, 0.0, 0.0)  # x, y, heading
    ball: tuple[float, float] = (1.0, 0.0)
    ball_speed: float = 0.0
    ball_angle: float = 0.0
    dock: tuple[float, float, float] = (4.0, 0.0, 0.0)  # x, y, facing
    time_limit: float = 8.0

    def to_json(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_json(obj: dict) -> "Scenario":
        kind = obj.get("kind")
        if kind not in ("attacker", "docker"):
            raise SimError(f"unknown scenario kind {kind!r}")
        fields = {k: tuple(v) if isinstance(v, list) else v for k, v in obj.items()}
        return Scenario(**fields)


def load_scenario(path: str | Path) -> Scenario:
    return Scenario.from_json(json.loads(Path(path).read_text()))


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario.to_json(), indent=2) + "\n")


@dataclass(frozen=True)
class GridSpec:
    """Rectangular sweep of initial positions with per-cell angle samples.

    For the attacker the cell positions the ball and the angles set its
    initial velocity direction; for the docker they position the robot and
    set its initial heading.
    """
    x0: float
    x1: float
    nx: int
    y0: float
    y1: float
    ny: int
    angles: int
    base: Scenario
    seed: int = 0

    def cells(self) -> list[tuple[float, float]]:
        if self.nx < 1 or self.ny < 1 or self.angles < 1:
            raise SimError("grid must have at least one cell and one angle")
        xs = [self.x0 + (self.x1 - self.x0) * (i + 0.5) / self.nx
              for i in range(self.nx)]
        ys = [self.y0 + (self.y1 - self.y0) * (j + 0.5) / self.ny
              for j in range(self.ny)]
        return [(x, y) for x in xs for y in ys]

    def angle_samples(self) -> list[float]:
        phase = (self.seed % 360) * math.pi / 180.0
        return [phase + 2.0 * math.pi * k / self.angles for k in range(self.angles)]

    def scenario_for(self, x: float, y: float, angle: float) -> Scenario:
        from dataclasses import replace
        if self.base.kind == "attacker":
            return replace(self.base, ball=(x, y), ball_angle=angle)
        return replace(self.base, robot=(x, y, angle))

    def to_json(self) -> dict:
        obj = asdict(self)
        obj["base"] = self.base.to_json()
        return obj

    @staticmethod
    def from_json(obj: dict) -> "GridSpec":
        base = Scenario.from_json(obj["base"])
        rest = {k: v for k, v in obj.items() if k != "base"}
        return GridSpec(base=base, **rest)


def load_grid_spec(path: str | Path) -> GridSpec:
    return GridSpec.from_json(json.loads(Path(path).read_text()))


def clamp_speed(v: Vec2, limit: float) -> Vec2:
    speed = v.norm()
    if speed <= limit or speed == 0.0:
        return v
    return v.scaled(limit / speed)


def ball_physics_step(pos: Vec2, vel: Vec2, dt: float = TICK) -> tuple[Vec2, Vec2]:
    """Roll the ball one tick: constant deceleration, direction preserved."""
    new_pos = pos + vel.scaled(dt)
    speed = vel.norm()
    if speed == 0.0:
        return new_pos, vel
    new_speed = max(0.0, speed - BALL_DECEL * dt)
    if new_speed == 0.0:
        return new_pos, Vec2(0.0, 0.0)
    return new_pos, vel.scaled(new_speed / speed)
