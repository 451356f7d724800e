"""Gradient-following waypoint planner and displacement errors between plans.

The planner walks from high to low combined potential: at each step it
moves to the unvisited 8-neighbor with the strictly lowest energy, so the
energy along a path is strictly decreasing and no cell repeats. It stops
on reaching the target neighborhood, on running out of strictly lower
neighbors (a local minimum), or on exhausting the step budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .fields import PotentialField, target_cell
from .scene import EgoState, TargetPoint

GOAL_RADIUS_CELLS = 2.0
MAX_STEPS = 400

# Neighbor scan order breaks ties among equal-potential candidates:
# N, NE, E, SE, S, SW, W, NW, with north = increasing row = forward.
NEIGHBOR_ORDER = (
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
)


class Terminal(Enum):
    REACHED_TARGET = "reached_target"
    LOCAL_MINIMUM = "local_minimum"
    STEP_BUDGET_EXHAUSTED = "step_budget_exhausted"


@dataclass(frozen=True)
class Path:
    waypoints: tuple[tuple[int, int], ...]
    terminal: Terminal

    def __len__(self) -> int:
        return len(self.waypoints)

    @property
    def end(self) -> tuple[int, int]:
        return self.waypoints[-1]


def plan(
    field: PotentialField,
    ego: EgoState,
    target: TargetPoint,
    *,
    r_goal: float = GOAL_RADIUS_CELLS,
    max_steps: int = MAX_STEPS,
) -> Path:
    """Greedy steepest descent over the combined field, starting at the ego
    cell. Deterministic: equal-potential neighbors resolve by scan order."""
    spec = field.spec
    rows, cols = spec.rows, spec.cols
    r, c = ego.cell
    if not spec.in_bounds(r, c):
        raise ValueError(f"ego cell ({r}, {c}) out of bounds for {rows}x{cols} grid")

    combined = field.combined
    tr, tc = target_cell(spec, target)
    waypoints = [(r, c)]
    visited = {(r, c)}

    while True:
        if math.hypot(r - tr, c - tc) <= r_goal:
            return Path(tuple(waypoints), Terminal.REACHED_TARGET)
        if len(waypoints) - 1 >= max_steps:
            return Path(tuple(waypoints), Terminal.STEP_BUDGET_EXHAUSTED)
        best = None
        best_p = combined[r, c]
        for dr, dc in NEIGHBOR_ORDER:
            nr, nc = r + dr, c + dc
            if not (0 <= nr < rows and 0 <= nc < cols) or (nr, nc) in visited:
                continue
            p = combined[nr, nc]
            if p < best_p:
                best = (nr, nc)
                best_p = p
        if best is None:
            return Path(tuple(waypoints), Terminal.LOCAL_MINIMUM)
        r, c = best
        visited.add(best)
        waypoints.append(best)


def ade(a: Path, b: Path) -> float:
    """Average displacement error: mean cell distance between waypoint
    pairs over the first min(|a|, |b|) indices. Truncates rather than pads,
    so a path that is a prefix of another scores 0."""
    if not a.waypoints or not b.waypoints:
        raise ValueError("ade requires non-empty paths")
    m = min(len(a.waypoints), len(b.waypoints))
    total = 0.0
    for (ar, ac), (br, bc) in zip(a.waypoints[:m], b.waypoints[:m]):
        total += math.hypot(ar - br, ac - bc)
    return total / m


def fde(a: Path, b: Path) -> float:
    """Final displacement error: cell distance between the two endpoints."""
    if not a.waypoints or not b.waypoints:
        raise ValueError("fde requires non-empty paths")
    (ar, ac), (br, bc) = a.end, b.end
    return math.hypot(ar - br, ac - bc)
