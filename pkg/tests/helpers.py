"""Shared builders and independent oracles for the test suite.

The oracles here deliberately avoid the library's own code paths: the
repulsive oracle is a direct O(cells x sources) evaluation of the energy
maximum, and the reference planner re-implements the descent rule with a
plain argmin loop.
"""

from __future__ import annotations

import math

import numpy as np

from bevrisk.fields import FieldConstants, PotentialField, target_cell
from bevrisk.planner import NEIGHBOR_ORDER, Path, Terminal
from bevrisk.scene import (
    NO_INSTANCE,
    EgoState,
    Frame,
    GridSpec,
    Scenario,
    SemanticGrid,
    SemanticLabel,
    TargetPoint,
    tracklets_from_frames,
)

ENERGY_BY_LABEL = {
    SemanticLabel.ROAD_LINE: "k_roadline",
    SemanticLabel.VEHICLE: "k_dynamic",
    SemanticLabel.PEDESTRIAN: "k_dynamic",
    SemanticLabel.OTHER_STATIC: "k_other",
}


def brute_force_repulsive(grid: SemanticGrid, constants: FieldConstants) -> np.ndarray:
    """Direct max over every source cell of K / max(d^2, d_min^2)."""
    rows, cols = grid.spec.shape
    src_r, src_c, src_k = [], [], []
    for label, attr in ENERGY_BY_LABEL.items():
        k = getattr(constants, attr)
        if k <= 0:
            continue
        rr, cc = np.nonzero(grid.labels == int(label))
        src_r.extend(rr.tolist())
        src_c.extend(cc.tolist())
        src_k.extend([k] * len(rr))
    out = np.zeros((rows, cols), dtype=np.float64)
    if not src_r:
        return out
    qr = np.asarray(src_r, dtype=np.float64)
    qc = np.asarray(src_c, dtype=np.float64)
    qk = np.asarray(src_k, dtype=np.float64)
    d_min_sq = constants.d_min * constants.d_min
    for r in range(rows):
        dsq = (r - qr) ** 2 + (np.arange(cols, dtype=np.float64)[:, None] - qc) ** 2
        out[r] = np.max(qk / np.maximum(dsq, d_min_sq), axis=1)
    return out


def reference_plan(
    field: PotentialField,
    ego: EgoState,
    target: TargetPoint,
    r_goal: float = 2.0,
    max_steps: int = 400,
) -> Path:
    """Re-implementation of the descent rule used to cross-check plan()."""
    tr, tc = target_cell(field.spec, target)
    cur = ego.cell
    waypoints = [cur]
    visited = {cur}
    while True:
        if math.hypot(cur[0] - tr, cur[1] - tc) <= r_goal:
            return Path(tuple(waypoints), Terminal.REACHED_TARGET)
        if len(waypoints) - 1 >= max_steps:
            return Path(tuple(waypoints), Terminal.STEP_BUDGET_EXHAUSTED)
        candidates = []
        for i, (dr, dc) in enumerate(NEIGHBOR_ORDER):
            nxt = (cur[0] + dr, cur[1] + dc)
            if not field.spec.in_bounds(*nxt) or nxt in visited:
                continue
            candidates.append((float(field.combined[nxt]), i, nxt))
        candidates = [c for c in candidates if c[0] < float(field.combined[cur])]
        if not candidates:
            return Path(tuple(waypoints), Terminal.LOCAL_MINIMUM)
        _, _, cur = min(candidates)
        visited.add(cur)
        waypoints.append(cur)


def random_grid(
    rng: np.random.Generator,
    rows: int,
    cols: int,
    p_road: float = 0.04,
    p_other: float = 0.02,
    max_instances: int = 5,
) -> SemanticGrid:
    """Random scene: scattered road-line and static cells plus a few
    rectangular dynamic instances."""
    spec = GridSpec.with_shape(rows, cols)
    labels = np.zeros((rows, cols), dtype=np.int8)
    labels[rng.random((rows, cols)) < p_road] = int(SemanticLabel.ROAD_LINE)
    labels[rng.random((rows, cols)) < p_other] = int(SemanticLabel.OTHER_STATIC)
    instances = np.full((rows, cols), NO_INSTANCE, dtype=np.int32)
    for inst in range(1, int(rng.integers(0, max_instances + 1)) + 1):
        label = rng.choice([int(SemanticLabel.VEHICLE), int(SemanticLabel.PEDESTRIAN)])
        h = int(rng.integers(1, min(4, rows) + 1))
        w = int(rng.integers(1, min(4, cols) + 1))
        r0 = int(rng.integers(0, rows - h + 1))
        c0 = int(rng.integers(0, cols - w + 1))
        labels[r0 : r0 + h, c0 : c0 + w] = label
        instances[r0 : r0 + h, c0 : c0 + w] = inst
    # rectangles may have overwritten each other; drop ids that vanished
    return SemanticGrid(spec=spec, labels=labels, instances=instances)


def grid_from_cells(
    spec: GridSpec, cells: dict[tuple[int, int], tuple[SemanticLabel, int | None]]
) -> SemanticGrid:
    labels = np.zeros(spec.shape, dtype=np.int8)
    instances = np.full(spec.shape, NO_INSTANCE, dtype=np.int32)
    for (r, c), (label, inst) in cells.items():
        labels[r, c] = int(label)
        instances[r, c] = NO_INSTANCE if inst is None else inst
    return SemanticGrid(spec=spec, labels=labels, instances=instances)


def cluttered_scenario(n_instances: int, frame_count: int = 8) -> Scenario:
    """Standard-size scenario with many benign vehicles, for load tests."""
    spec = GridSpec()
    labels = np.zeros(spec.shape, dtype=np.int8)
    for col in (85, 95, 105):
        labels[:, col] = int(SemanticLabel.ROAD_LINE)
    instances = np.full(spec.shape, NO_INSTANCE, dtype=np.int32)
    col_slots = (78, 88, 108, 116, 70, 124)
    for i in range(n_instances):
        c0 = col_slots[i % len(col_slots)]
        r0 = 12 + 8 * (i // len(col_slots)) + (i % 3)
        labels[r0 : r0 + 4, c0 : c0 + 2] = int(SemanticLabel.VEHICLE)
        instances[r0 : r0 + 4, c0 : c0 + 2] = i + 1
    grid = SemanticGrid(spec=spec, labels=labels, instances=instances)
    frame = Frame(
        grid=grid,
        ego=EgoState(cell=(0, 100), speed=8.0),
        target=TargetPoint(cell=(48.0, 100.0)),
    )
    frames = tuple(frame for _ in range(frame_count))
    return Scenario(
        spec=spec,
        frames=frames,
        tracklets=tracklets_from_frames(frames),
        gt_risk={},
        critical_frame=None,
        fps=20.0,
    )


def single_frame_scenario(grid: SemanticGrid, ego: EgoState, target: TargetPoint, n_frames: int = 1) -> Scenario:
    frames = tuple(Frame(grid=grid, ego=ego, target=target) for _ in range(n_frames))
    return Scenario(
        spec=grid.spec,
        frames=frames,
        tracklets=tracklets_from_frames(frames),
        gt_risk={},
        critical_frame=None,
        fps=20.0,
    )
