"""Seedable synthetic scenario generator.

Every scenario uses a straight two-lane road on the default 100x200 grid:
the ego lane is centered on the ego column, the opposite lane sits across a
divider line, and full-height RoadLine columns mark the divider and both
road edges. Agents are scripted in the ego frame and move in straight
lines at constant cells-per-frame rates (the world slides toward the ego
row as the ego advances), with optional uniform jitter on top.

Ground-truth risk is a per-kind convention, not a dataset reproduction:

* blocking kinds label the blocking agent at frames where it occupies the
  ego lane (vehicles additionally only once inside the ego's look-ahead),
* crossing pedestrians are risks while within a few cells of the ego lane,
* opposite-lane traffic, parked decoys, and interaction-free scenes carry
  no risk labels at all.

The critical frame is the ground-truth-labelled frame where the ego is
closest (center of mass) to a labelled risk instance; risk-free kinds have
none.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .scene import (
    NO_INSTANCE,
    EgoState,
    Frame,
    GridSpec,
    Scenario,
    SemanticGrid,
    SemanticLabel,
    TargetPoint,
    tracklets_from_frames,
    validate_scenario,
)

PREDICTOR_WINDOW = 5
LANE_RISK_MARGIN = 3.0  # cells around the ego lane that count as "approaching"


class ScenarioKind(str, Enum):
    BLOCKING_PEDESTRIAN = "blocking-pedestrian"
    BLOCKING_VEHICLE = "blocking-vehicle"
    OPPOSITE_LANE = "opposite-lane"
    INTERACTION_FREE = "interaction-free"
    JAYWALKER = "jaywalker"
    BOXED_IN = "boxed-in"


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int
    kind: ScenarioKind
    frame_count: int = 40
    lane_width: int = 9
    jitter: float = 0.0

    def __post_init__(self) -> None:
        if self.frame_count < PREDICTOR_WINDOW:
            raise ValueError(
                f"frame_count must be >= predictor window {PREDICTOR_WINDOW}"
            )
        if self.lane_width < 3:
            raise ValueError("lane_width must be at least 3 cells")
        if self.jitter < 0:
            raise ValueError("jitter must be >= 0")


@dataclass(frozen=True)
class _RoadLayout:
    center: int
    lane_left: int
    lane_right: int
    divider: int
    right_edge: int
    left_edge: int


def _road_layout(spec: GridSpec, lane_width: int) -> _RoadLayout:
    center = spec.cols // 2
    half = lane_width // 2
    layout = _RoadLayout(
        center=center,
        lane_left=center - half,
        lane_right=center + half,
        divider=center - half - 1,
        right_edge=center + half + 1,
        left_edge=center - half - 1 - lane_width - 1,
    )
    if layout.left_edge < 0 or layout.right_edge >= spec.cols:
        raise ValueError(
            f"lane geometry does not fit the grid: road spans columns "
            f"{layout.left_edge}..{layout.right_edge} on {spec.cols} columns"
        )
    return layout


@dataclass
class _Agent:
    instance_id: int
    label: SemanticLabel
    size: tuple[int, int]  # rows, cols
    start: tuple[float, float]  # top-left at appear_frame
    velocity: tuple[float, float]  # cells per frame
    appear_frame: int = 0
    risky: bool = False

    def position(self, frame: int) -> Optional[tuple[float, float]]:
        if frame < self.appear_frame:
            return None
        dt = frame - self.appear_frame
        return (
            self.start[0] + self.velocity[0] * dt,
            self.start[1] + self.velocity[1] * dt,
        )


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _footprint(
    spec: GridSpec, pos: tuple[float, float], size: tuple[int, int]
) -> list[tuple[int, int]]:
    r0, c0 = _round_half_up(pos[0]), _round_half_up(pos[1])
    cells = []
    for r in range(max(r0, 0), min(r0 + size[0], spec.rows)):
        for c in range(max(c0, 0), min(c0 + size[1], spec.cols)):
            cells.append((r, c))
    return cells


def _cells_per_frame(speed_mps: float, spec: GridSpec, fps: float) -> float:
    return speed_mps / (spec.cell_size * fps)


def _script_agents(
    cfg: GeneratorConfig,
    rng: np.random.Generator,
    spec: GridSpec,
    layout: _RoadLayout,
    fps: float,
) -> tuple[float, list[_Agent]]:
    """Pick the ego speed and the scripted agents for the scenario kind."""
    kind = cfg.kind
    off_right = layout.right_edge + 5
    off_left = layout.left_edge - 7

    if kind is ScenarioKind.INTERACTION_FREE:
        v_ego = 8.0 + rng.uniform(-0.5, 0.5)
        approach = _cells_per_frame(v_ego, spec, fps)
        parked = _Agent(
            instance_id=1,
            label=SemanticLabel.VEHICLE,
            size=(6, 3),
            start=(rng.uniform(55.0, 70.0), float(off_right)),
            velocity=(-approach, 0.0),
        )
        return v_ego, [parked]

    if kind is ScenarioKind.OPPOSITE_LANE:
        v_ego = 8.0 + rng.uniform(-0.5, 0.5)
        v_other = 7.0 + rng.uniform(-0.5, 0.5)
        closing = _cells_per_frame(v_ego + v_other, spec, fps)
        oncoming = _Agent(
            instance_id=1,
            label=SemanticLabel.VEHICLE,
            size=(6, 3),
            start=(rng.uniform(68.0, 80.0), float(layout.divider - 6)),
            velocity=(-closing, 0.0),
        )
        return v_ego, [oncoming]

    if kind is ScenarioKind.BLOCKING_VEHICLE:
        v_ego = 8.0 + rng.uniform(-0.5, 0.5)
        v_lead = 3.0 + rng.uniform(-0.3, 0.3)
        closing = _cells_per_frame(v_ego - v_lead, spec, fps)
        lead = _Agent(
            instance_id=1,
            label=SemanticLabel.VEHICLE,
            size=(6, 3),
            start=(rng.uniform(52.0, 58.0), float(layout.center - 1)),
            velocity=(-closing, 0.0),
            risky=True,
        )
        return v_ego, [lead]

    if kind is ScenarioKind.BLOCKING_PEDESTRIAN:
        v_ego = 2.5 + rng.uniform(-0.2, 0.2)
        approach = _cells_per_frame(v_ego, spec, fps)
        ped = _Agent(
            instance_id=1,
            label=SemanticLabel.PEDESTRIAN,
            size=(1, 1),
            start=(rng.uniform(18.0, 21.0), rng.uniform(103.0, 105.0)),
            velocity=(-(approach + rng.uniform(0.05, 0.15)), -(0.25 + rng.uniform(0.0, 0.05))),
            risky=True,
        )
        parked = _Agent(
            instance_id=2,
            label=SemanticLabel.VEHICLE,
            size=(6, 3),
            start=(rng.uniform(28.0, 40.0), float(off_right)),
            velocity=(-approach, 0.0),
        )
        return v_ego, [ped, parked]

    if kind is ScenarioKind.JAYWALKER:
        v_ego = 4.0 + rng.uniform(-0.3, 0.3)
        approach = _cells_per_frame(v_ego, spec, fps)
        appear = int(rng.integers(8, 15))
        ped = _Agent(
            instance_id=1,
            label=SemanticLabel.PEDESTRIAN,
            size=(1, 1),
            start=(rng.uniform(26.0, 32.0), rng.uniform(110.0, 114.0)),
            velocity=(-(approach + rng.uniform(0.05, 0.15)), -(1.0 + rng.uniform(-0.1, 0.1))),
            appear_frame=appear,
            risky=True,
        )
        parked = _Agent(
            instance_id=2,
            label=SemanticLabel.VEHICLE,
            size=(6, 3),
            start=(rng.uniform(45.0, 55.0), float(off_left)),
            velocity=(-approach, 0.0),
        )
        return v_ego, [ped, parked]

    if kind is ScenarioKind.BOXED_IN:
        v_ego = 8.0 + rng.uniform(-0.5, 0.5)
        v_wall = 6.0 + rng.uniform(-0.3, 0.3)
        approach = _cells_per_frame(v_ego, spec, fps)
        closing = _cells_per_frame(v_ego - v_wall, spec, fps)
        wall = _Agent(
            instance_id=1,
            label=SemanticLabel.VEHICLE,
            size=(4, layout.lane_right - layout.lane_left + 1),
            start=(rng.uniform(26.0, 32.0), float(layout.lane_left)),
            velocity=(-closing, 0.0),
            risky=True,
        )
        parked_l = _Agent(
            instance_id=2,
            label=SemanticLabel.VEHICLE,
            size=(6, 3),
            start=(rng.uniform(60.0, 75.0), float(off_left)),
            velocity=(-approach, 0.0),
        )
        parked_r = _Agent(
            instance_id=3,
            label=SemanticLabel.VEHICLE,
            size=(6, 3),
            start=(rng.uniform(40.0, 55.0), float(off_right)),
            velocity=(-approach, 0.0),
        )
        return v_ego, [wall, parked_l, parked_r]

    raise ValueError(f"unknown scenario kind {kind!r}")


def _is_risk_at(
    agent: _Agent,
    cells: list[tuple[int, int]],
    layout: _RoadLayout,
    lookahead_rows: float,
) -> bool:
    """Per-kind ground-truth rule: dynamic agents flagged risky count at
    frames where they occupy or approach the ego lane."""
    if not agent.risky or not cells:
        return False
    lo = layout.lane_left - LANE_RISK_MARGIN
    hi = layout.lane_right + LANE_RISK_MARGIN
    in_lane_band = any(lo <= c <= hi for _, c in cells)
    if not in_lane_band:
        return False
    if agent.label is SemanticLabel.VEHICLE:
        # A lead vehicle only influences the ego once inside its look-ahead.
        return min(r for r, _ in cells) <= lookahead_rows
    return True


def generate(cfg: GeneratorConfig) -> Scenario:
    """Build one deterministic scenario; (kind, seed) fixes every byte."""
    rng = np.random.default_rng(cfg.seed)
    spec = GridSpec()
    fps = 20.0
    layout = _road_layout(spec, cfg.lane_width)
    v_ego, agents = _script_agents(cfg, rng, spec, layout, fps)

    ego = EgoState(cell=(0, layout.center), speed=v_ego)
    target_row = min(v_ego * 3.0 / spec.cell_size, spec.rows - 1.0)
    target = TargetPoint(cell=(target_row, float(layout.center)))
    lookahead_rows = target_row + 8.0

    base_labels = np.zeros(spec.shape, dtype=np.int8)
    for col in (layout.left_edge, layout.divider, layout.right_edge):
        base_labels[:, col] = int(SemanticLabel.ROAD_LINE)

    frames: list[Frame] = []
    gt_risk: dict[int, frozenset[int]] = {}
    risk_distance: dict[int, float] = {}
    for f in range(cfg.frame_count):
        labels = base_labels.copy()
        instances = np.full(spec.shape, NO_INSTANCE, dtype=np.int32)
        risky_here: set[int] = set()
        for agent in agents:
            pos = agent.position(f)
            if pos is None:
                continue
            if cfg.jitter > 0:
                pos = (
                    pos[0] + rng.uniform(-cfg.jitter, cfg.jitter),
                    pos[1] + rng.uniform(-cfg.jitter, cfg.jitter),
                )
            cells = _footprint(spec, pos, agent.size)
            for r, c in cells:
                if instances[r, c] != NO_INSTANCE:
                    raise ValueError(
                        f"infeasible geometry: agents {instances[r, c]} and "
                        f"{agent.instance_id} overlap at frame {f}, cell ({r}, {c})"
                    )
                labels[r, c] = int(agent.label)
                instances[r, c] = agent.instance_id
            if _is_risk_at(agent, cells, layout, lookahead_rows):
                risky_here.add(agent.instance_id)
                com_r = sum(r for r, _ in cells) / len(cells)
                com_c = sum(c for _, c in cells) / len(cells)
                d = math.hypot(com_r - ego.cell[0], com_c - ego.cell[1])
                prev = risk_distance.get(f)
                risk_distance[f] = d if prev is None else min(prev, d)
        if risky_here:
            gt_risk[f] = frozenset(risky_here)
        frames.append(
            Frame(
                grid=SemanticGrid(spec=spec, labels=labels, instances=instances),
                ego=ego,
                target=target,
            )
        )

    critical_frame: Optional[int] = None
    if risk_distance:
        best = min(risk_distance.values())
        critical_frame = min(f for f, d in risk_distance.items() if d == best)

    scenario = Scenario(
        spec=spec,
        frames=tuple(frames),
        tracklets=tracklets_from_frames(frames),
        gt_risk=gt_risk,
        critical_frame=critical_frame,
        fps=fps,
    )
    violations = validate_scenario(scenario)
    if violations:
        raise RuntimeError(
            f"generator produced an invalid scenario: {violations[:3]}"
        )
    return scenario


def scenario_name(kind: ScenarioKind, seed: int) -> str:
    return f"{kind.value}-{seed:04d}"
