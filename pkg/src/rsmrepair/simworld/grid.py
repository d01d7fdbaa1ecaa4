"""Success-rate heatmaps over scenario grids."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from ..lang import TransitionFn
from .core import GridSpec, SimError
from .sims import run_episode


@dataclass(frozen=True)
class HeatmapGrid:
    cells: tuple[tuple[float, float], ...]
    rates: tuple[float, ...]
    samples: int

    def __post_init__(self):
        if any(not (0.0 <= r <= 1.0) for r in self.rates):
            raise SimError("success rates must lie in [0, 1]")

    @property
    def aggregate(self) -> float:
        return sum(self.rates) / len(self.rates) if self.rates else 0.0

    def rate_at(self, x: float, y: float) -> float:
        return self.rates[self.cells.index((x, y))]


def evaluate_grid(fn: TransitionFn, params: dict[str, float],
                  grid: GridSpec) -> HeatmapGrid:
    """Per-cell success rate over the grid's angle samples."""
    cells = grid.cells()
    angles = grid.angle_samples()
    rates = []
    for x, y in cells:
        wins = 0
        for angle in angles:
            _, success = run_episode(fn, params, grid.scenario_for(x, y, angle))
            wins += int(success)
        rates.append(wins / len(angles))
    return HeatmapGrid(cells=tuple(cells), rates=tuple(rates), samples=len(angles))


def heatmap_to_csv(grid: HeatmapGrid) -> str:
    lines = ["x,y,success_rate,samples"]
    for (x, y), rate in zip(grid.cells, grid.rates):
        lines.append(f"{x!r},{y!r},{rate!r},{grid.samples}")
    return "\n".join(lines) + "\n"


def heatmap_from_csv(text: str) -> HeatmapGrid:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "x,y,success_rate,samples":
        raise SimError("not a heatmap CSV (missing header)")
    cells, rates, samples = [], [], 0
    for ln in lines[1:]:
        x, y, rate, n = ln.split(",")
        cells.append((float(x), float(y)))
        rates.append(float(rate))
        samples = int(n)
    return HeatmapGrid(cells=tuple(cells), rates=tuple(rates), samples=samples)


def save_heatmap(grid: HeatmapGrid, path: str | Path) -> None:
    Path(path).write_text(heatmap_to_csv(grid))


def load_heatmap(path: str | Path) -> HeatmapGrid:
    return heatmap_from_csv(Path(path).read_text())


def heatmap_diff(before: HeatmapGrid, after: HeatmapGrid) -> tuple[str, float]:
    """Per-cell rate deltas as CSV plus the aggregate change."""
    if before.cells != after.cells:
        raise SimError("heatmaps cover different grids")
    lines = ["x,y,delta"]
    for (x, y), b, a in zip(before.cells, before.rates, after.rates):
        lines.append(f"{x!r},{y!r},{a - b!r}")
    return "\n".join(lines) + "\n", after.aggregate - before.aggregate
