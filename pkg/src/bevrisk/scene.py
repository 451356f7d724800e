"""Domain types for bird's-eye-view semantic scenes and scenario sequences.

Conventions: cells are (row, col) indices; row 0 is the ego row and rows
grow forward (longitudinally ahead), columns grow to the right. All
distances inside the math modules are in cell units; metric conversion
happens only at I/O boundaries via GridSpec.cell_size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Mapping, Optional, Sequence

import numpy as np

NO_INSTANCE = -1


class SemanticLabel(IntEnum):
    """Per-cell semantic class. Values double as the wire-format codes."""

    FREE = 0
    ROAD_LINE = 1
    VEHICLE = 2
    PEDESTRIAN = 3
    OTHER_STATIC = 4


DYNAMIC_LABELS = frozenset({SemanticLabel.VEHICLE, SemanticLabel.PEDESTRIAN})


def _lock(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GridSpec:
    """Fixed BEV lattice: 100x200 cells of 0.5 m covering [0,50m]x[-50,50m]."""

    rows: int = 100
    cols: int = 200
    cell_size: float = 0.5
    row_extent_m: tuple[float, float] = (0.0, 50.0)
    col_extent_m: tuple[float, float] = (-50.0, 50.0)

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.rows}x{self.cols}")
        if self.cell_size <= 0:
            raise ValueError(f"cell_size must be positive, got {self.cell_size}")
        row_span = self.row_extent_m[1] - self.row_extent_m[0]
        col_span = self.col_extent_m[1] - self.col_extent_m[0]
        if not math.isclose(self.rows * self.cell_size, row_span, rel_tol=1e-9):
            raise ValueError(
                f"rows*cell_size = {self.rows * self.cell_size} does not match "
                f"declared row extent span {row_span}"
            )
        if not math.isclose(self.cols * self.cell_size, col_span, rel_tol=1e-9):
            raise ValueError(
                f"cols*cell_size = {self.cols * self.cell_size} does not match "
                f"declared col extent span {col_span}"
            )

    @classmethod
    def with_shape(cls, rows: int, cols: int, cell_size: float = 0.5) -> "GridSpec":
        """Spec for an arbitrary lattice; extents derived from the shape."""
        half = cols * cell_size / 2.0
        return cls(
            rows=rows,
            cols=cols,
            cell_size=cell_size,
            row_extent_m=(0.0, rows * cell_size),
            col_extent_m=(-half, half),
        )

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def in_bounds(self, row: int, col: int) -> bool:
        return 0 <= row < self.rows and 0 <= col < self.cols

    def ego_cell(self) -> tuple[int, int]:
        """Ego reference cell: row 0, center column."""
        return (0, self.cols // 2)


@dataclass(frozen=True, eq=False)
class SemanticGrid:
    """One BEV frame: a semantic label per cell plus instance IDs on the
    dynamic (Vehicle/Pedestrian) cells. NO_INSTANCE marks cells without one."""

    spec: GridSpec
    labels: np.ndarray
    instances: np.ndarray

    def __post_init__(self) -> None:
        labels = np.ascontiguousarray(self.labels, dtype=np.int8)
        instances = np.ascontiguousarray(self.instances, dtype=np.int32)
        if labels.shape != self.spec.shape or instances.shape != self.spec.shape:
            raise ValueError(
                f"array shapes {labels.shape}/{instances.shape} do not match "
                f"grid spec {self.spec.shape}"
            )
        object.__setattr__(self, "labels", _lock(labels))
        object.__setattr__(self, "instances", _lock(instances))

    @classmethod
    def empty(cls, spec: GridSpec) -> "SemanticGrid":
        return cls(
            spec=spec,
            labels=np.zeros(spec.shape, dtype=np.int8),
            instances=np.full(spec.shape, NO_INSTANCE, dtype=np.int32),
        )

    def instance_ids(self) -> list[int]:
        ids = np.unique(self.instances)
        return [int(i) for i in ids if i != NO_INSTANCE]

    def cells_of(self, instance_id: int) -> set[tuple[int, int]]:
        rows, cols = np.nonzero(self.instances == instance_id)
        return {(int(r), int(c)) for r, c in zip(rows, cols)}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SemanticGrid):
            return NotImplemented
        return (
            self.spec == other.spec
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.instances, other.instances)
        )


@dataclass(frozen=True)
class EgoState:
    """Ego anchor on the grid (row 0, center column by convention) and speed."""

    cell: tuple[int, int]
    speed: float = 0.0


@dataclass(frozen=True)
class TargetPoint:
    """Desired goal location; continuous coordinates are permitted."""

    cell: tuple[float, float]


@dataclass(frozen=True, eq=False)
class Tracklet:
    """One object instance's cell footprint across the frames it appears in."""

    instance_id: int
    label: SemanticLabel
    cells_by_frame: Mapping[int, frozenset[tuple[int, int]]]

    def frames(self) -> list[int]:
        return sorted(self.cells_by_frame)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tracklet):
            return NotImplemented
        return (
            self.instance_id == other.instance_id
            and self.label == other.label
            and dict(self.cells_by_frame) == dict(other.cells_by_frame)
        )


@dataclass(frozen=True)
class Frame:
    grid: SemanticGrid
    ego: EgoState
    target: TargetPoint


@dataclass(frozen=True, eq=False)
class Scenario:
    """Ordered frames plus tracklets, ground-truth risk labels, and the
    critical frame (closest approach while influenced), when one exists."""

    spec: GridSpec
    frames: tuple[Frame, ...]
    tracklets: tuple[Tracklet, ...]
    gt_risk: Mapping[int, frozenset[int]] = field(default_factory=dict)
    critical_frame: Optional[int] = None
    fps: float = 20.0

    def tracklet(self, instance_id: int) -> Optional[Tracklet]:
        for t in self.tracklets:
            if t.instance_id == instance_id:
                return t
        return None

    def gt_at(self, frame: int) -> frozenset[int]:
        return frozenset(self.gt_risk.get(frame, frozenset()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.frames == other.frames
            and sorted(self.tracklets, key=lambda t: t.instance_id)
            == sorted(other.tracklets, key=lambda t: t.instance_id)
            and {f: frozenset(v) for f, v in self.gt_risk.items() if v}
            == {f: frozenset(v) for f, v in other.gt_risk.items() if v}
            and self.critical_frame == other.critical_frame
            and self.fps == other.fps
        )


def tracklets_from_frames(frames: Sequence[Frame]) -> tuple[Tracklet, ...]:
    """Derive tracklets from the per-frame instance arrays.

    The tracklet label is taken from the instance's cells; mixed labels for
    one ID are a data error that validate_scenario reports, here the first
    encountered label wins so derivation never fails.
    """
    cells: dict[int, dict[int, frozenset[tuple[int, int]]]] = {}
    labels: dict[int, SemanticLabel] = {}
    for idx, frame in enumerate(frames):
        grid = frame.grid
        for inst in grid.instance_ids():
            mask = grid.instances == inst
            cells.setdefault(inst, {})[idx] = frozenset(
                (int(r), int(c)) for r, c in zip(*np.nonzero(mask))
            )
            if inst not in labels:
                code = int(grid.labels[mask][0])
                labels[inst] = SemanticLabel(code)
    return tuple(
        Tracklet(instance_id=i, label=labels[i], cells_by_frame=cells[i])
        for i in sorted(cells)
    )


def validate_scenario(scenario: Scenario) -> list[str]:
    """Check every scenario invariant; returns one message per violation.

    Violations are data, not errors: the list is empty for a valid scenario
    and deterministically ordered (scenario-level first, then frame-major,
    cell-major within a frame).
    """
    v: list[str] = []
    if not scenario.frames:
        v.append("scenario has no frames")
        return v
    if scenario.fps <= 0:
        v.append(f"fps must be positive, got {scenario.fps}")
    n = len(scenario.frames)
    if scenario.critical_frame is not None and not 0 <= scenario.critical_frame < n:
        v.append(
            f"critical_frame {scenario.critical_frame} outside frame range 0..{n - 1}"
        )

    by_id = {t.instance_id: t for t in scenario.tracklets}
    if len(by_id) != len(scenario.tracklets):
        v.append("duplicate tracklet instance IDs")
    for t in sorted(by_id.values(), key=lambda t: t.instance_id):
        if t.label not in DYNAMIC_LABELS:
            v.append(
                f"tracklet {t.instance_id} has non-dynamic class {t.label.name}"
            )
        if t.instance_id < 0:
            v.append(f"tracklet instance ID {t.instance_id} is negative")

    for f in sorted(scenario.gt_risk):
        if not 0 <= f < n:
            v.append(f"gt_risk frame {f} outside frame range 0..{n - 1}")
            continue
        for inst in sorted(scenario.gt_risk[f]):
            t = by_id.get(inst)
            if t is None:
                v.append(f"gt_risk at frame {f} names unknown instance {inst}")
            elif f not in t.cells_by_frame:
                v.append(
                    f"gt_risk at frame {f} names instance {inst} absent from that frame"
                )

    for idx, frame in enumerate(scenario.frames):
        grid = frame.grid
        if grid.spec != scenario.spec:
            v.append(f"frame {idx}: grid spec differs from scenario spec")
            continue
        er, ec = frame.ego.cell
        if not scenario.spec.in_bounds(er, ec):
            v.append(f"frame {idx}: ego cell ({er}, {ec}) out of bounds")

        dynamic = np.isin(grid.labels, [int(l) for l in DYNAMIC_LABELS])
        has_inst = grid.instances != NO_INSTANCE
        for r, c in zip(*np.nonzero(dynamic != has_inst)):
            if dynamic[r, c]:
                v.append(
                    f"frame {idx}: cell ({r}, {c}) is "
                    f"{SemanticLabel(int(grid.labels[r, c])).name} but has no instance ID"
                )
            else:
                v.append(
                    f"frame {idx}: cell ({r}, {c}) has instance "
                    f"{int(grid.instances[r, c])} on non-dynamic label "
                    f"{SemanticLabel(int(grid.labels[r, c])).name}"
                )

        frame_ids = grid.instance_ids()
        for inst in frame_ids:
            mask = grid.instances == inst
            codes = np.unique(grid.labels[mask])
            if codes.size > 1:
                names = "/".join(SemanticLabel(int(c)).name for c in codes)
                v.append(f"frame {idx}: instance {inst} spans labels {names}")
            t = by_id.get(inst)
            if t is None:
                v.append(f"frame {idx}: instance {inst} has no tracklet")
                continue
            grid_cells = grid.cells_of(inst)
            track_cells = t.cells_by_frame.get(idx)
            if track_cells is None:
                v.append(
                    f"frame {idx}: instance {inst} present in grid but tracklet "
                    f"lists no cells for this frame"
                )
            elif set(track_cells) != grid_cells:
                v.append(
                    f"frame {idx}: tracklet {inst} cells disagree with grid instances"
                )
            if (
                t is not None
                and codes.size == 1
                and int(codes[0]) != int(t.label)
            ):
                v.append(
                    f"frame {idx}: instance {inst} labelled "
                    f"{SemanticLabel(int(codes[0])).name} but tracklet class is "
                    f"{t.label.name}"
                )
        present = set(frame_ids)
        for t in sorted(by_id.values(), key=lambda t: t.instance_id):
            if idx in t.cells_by_frame and t.instance_id not in present:
                v.append(
                    f"frame {idx}: tracklet {t.instance_id} lists cells but the "
                    f"grid has none"
                )
    return v


