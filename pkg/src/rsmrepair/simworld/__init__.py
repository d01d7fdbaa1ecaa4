"""Desk-scale kinematic simulators, scenario grids, and success metrics."""
from .core import (
    BALL_DECEL,
    DOCK_ANG_TOL,
    DOCK_POS_TOL,
    FIELD_HALF_X,
    FIELD_HALF_Y,
    GOAL_HALF_WIDTH,
    GridSpec,
    KICK_RANGE,
    KICK_SPEED,
    ROBOT_MAX_ANG,
    ROBOT_MAX_SPEED,
    Scenario,
    SimError,
    TICK,
    WorldState,
    load_grid_spec,
    load_scenario,
    save_scenario,
)
from .grid import (
    HeatmapGrid,
    evaluate_grid,
    heatmap_diff,
    heatmap_from_csv,
    heatmap_to_csv,
    load_heatmap,
    save_heatmap,
)
from .search import exhaustive_search
from .sims import AttackerSim, DockerSim, make_sim, run_episode

__all__ = [
    "BALL_DECEL", "DOCK_ANG_TOL", "DOCK_POS_TOL", "FIELD_HALF_X", "FIELD_HALF_Y",
    "GOAL_HALF_WIDTH", "GridSpec", "KICK_RANGE", "KICK_SPEED", "ROBOT_MAX_ANG",
    "ROBOT_MAX_SPEED", "Scenario", "SimError", "TICK", "WorldState",
    "load_grid_spec", "load_scenario", "save_scenario",
    "HeatmapGrid", "evaluate_grid", "heatmap_diff", "heatmap_from_csv",
    "heatmap_to_csv", "load_heatmap", "save_heatmap",
    "exhaustive_search", "AttackerSim", "DockerSim", "make_sim", "run_episode",
]
