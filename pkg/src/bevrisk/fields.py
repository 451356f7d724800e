"""Potential-field rendering over semantic BEV grids.

The repulsive energy at a cell is the maximum over all source cells q of
K(q) / max(ED(p, q), d_min)^2, where K depends only on the semantic class
of q. Because K is constant per class, the maximum factors into one exact
Euclidean distance transform per class followed by a maximum across
classes; that equivalence is what makes counterfactual re-rendering cheap
and is checked against a brute-force oracle in the tests.

The attractive energy grows linearly away from the target cell,
K_a * ED(target, p), and the combined field is their sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .edt import squared_distance_transform
from .scene import (
    NO_INSTANCE,
    GridSpec,
    SemanticGrid,
    SemanticLabel,
    TargetPoint,
    _lock,
)

# Distance entries carry (group name, energy constant, squared distances).
# Squared distances stay exact integers in float64, so K / max(d, d_min)^2,
# computed as K / max(d_sq, d_min^2), is free of sqrt round-off.
DistanceEntry = tuple[str, float, np.ndarray]


@dataclass(frozen=True)
class FieldConstants:
    """Energy constants: 400 for road lines, 1000 for dynamic objects
    (vehicles and pedestrians), 0 for other static cells, 0.75 per cell of
    target distance. Distances are in cell units; d_min clamps the inverse
    square singularity at and inside obstacles."""

    k_roadline: float = 400.0
    k_dynamic: float = 1000.0
    k_other: float = 0.0
    k_attractive: float = 0.75
    d_min: float = 1.0

    def __post_init__(self) -> None:
        for name in ("k_roadline", "k_dynamic", "k_other", "k_attractive"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.d_min <= 0:
            raise ValueError("d_min must be positive")


# Fixed rendering order of the source-class groups; Vehicle and Pedestrian
# share one energy constant so they share one distance transform.
def class_groups(
    constants: FieldConstants,
) -> tuple[tuple[str, float, tuple[SemanticLabel, ...]], ...]:
    return (
        ("roadline", constants.k_roadline, (SemanticLabel.ROAD_LINE,)),
        ("dynamic", constants.k_dynamic, (SemanticLabel.VEHICLE, SemanticLabel.PEDESTRIAN)),
        ("other", constants.k_other, (SemanticLabel.OTHER_STATIC,)),
    )


@dataclass(frozen=True, eq=False)
class PotentialField:
    """Scalar energy per cell; combined = repulsive + attractive."""

    spec: GridSpec
    repulsive: np.ndarray
    attractive: np.ndarray
    combined: np.ndarray

    def __post_init__(self) -> None:
        for name in ("repulsive", "attractive", "combined"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if arr.shape != self.spec.shape:
                raise ValueError(
                    f"{name} shape {arr.shape} does not match spec {self.spec.shape}"
                )
            object.__setattr__(self, name, _lock(arr))

    @classmethod
    def from_components(
        cls, spec: GridSpec, repulsive: np.ndarray, attractive: np.ndarray
    ) -> "PotentialField":
        return cls(
            spec=spec,
            repulsive=repulsive,
            attractive=attractive,
            combined=repulsive + attractive,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PotentialField):
            return NotImplemented
        return (
            self.spec == other.spec
            and np.array_equal(self.repulsive, other.repulsive)
            and np.array_equal(self.attractive, other.attractive)
            and np.array_equal(self.combined, other.combined)
        )


def target_cell(spec: GridSpec, target: TargetPoint) -> tuple[int, int]:
    """Nearest in-bounds cell to a (possibly continuous, possibly
    out-of-grid) target point. Halfway coordinates round up."""
    r = int(np.floor(min(max(target.cell[0], 0.0), spec.rows - 1.0) + 0.5))
    c = int(np.floor(min(max(target.cell[1], 0.0), spec.cols - 1.0) + 0.5))
    return (min(r, spec.rows - 1), min(c, spec.cols - 1))


def source_distances(
    grid: SemanticGrid,
    constants: FieldConstants,
    *,
    exclude_instance: Optional[int] = None,
    reuse: Optional[Sequence[DistanceEntry]] = None,
    include_dynamic: bool = True,
) -> tuple[DistanceEntry, ...]:
    """Exact squared distance transforms for every source group with
    energy > 0.

    Groups whose mask is empty are dropped (they contribute nothing).
    `exclude_instance` carves one instance's cells out of the dynamic mask,
    producing the distances of the counterfactual grid without rebuilding
    it. `reuse` supplies entries from a previous call on the same grid;
    static groups are taken from it verbatim, only the dynamic transform is
    recomputed. `include_dynamic=False` yields just the static groups,
    which is all a counterfactual re-render needs as its reuse base.
    """
    reused: Mapping[str, DistanceEntry] = (
        {name: (name, k, d) for name, k, d in reuse} if reuse is not None else {}
    )
    entries: list[DistanceEntry] = []
    for name, k, labels in class_groups(constants):
        if k <= 0.0:
            continue
        if name == "dynamic" and not include_dynamic:
            continue
        if name != "dynamic" and name in reused:
            entries.append(reused[name])
            continue
        mask = np.isin(grid.labels, [int(l) for l in labels])
        if name == "dynamic" and exclude_instance is not None:
            mask &= grid.instances != exclude_instance
        if not mask.any():
            continue
        entries.append((name, k, squared_distance_transform(mask)))
    return tuple(entries)


def render_repulsive(
    grid: SemanticGrid,
    constants: FieldConstants,
    *,
    distances: Optional[Sequence[DistanceEntry]] = None,
) -> np.ndarray:
    """Repulsive energy: max over source classes of K / max(d, d_min)^2.

    When `distances` is given the grid only provides the lattice shape;
    this is how counterfactual fields are rendered without copying grids.
    """
    if distances is None:
        distances = source_distances(grid, constants)
    rep = np.zeros(grid.spec.shape, dtype=np.float64)
    d_min_sq = constants.d_min * constants.d_min
    for _, k, dist_sq in distances:
        np.maximum(rep, k / np.maximum(dist_sq, d_min_sq), out=rep)
    return rep


def render_attractive(
    spec: GridSpec, target: TargetPoint, constants: FieldConstants
) -> np.ndarray:
    """Attractive energy: K_a times the distance to the clamped target cell."""
    tr, tc = target_cell(spec, target)
    dr = np.arange(spec.rows, dtype=np.float64)[:, None] - tr
    dc = np.arange(spec.cols, dtype=np.float64)[None, :] - tc
    return constants.k_attractive * np.hypot(dr, dc)


def render_field(
    grid: SemanticGrid,
    target: TargetPoint,
    constants: FieldConstants,
    *,
    distances: Optional[Sequence[DistanceEntry]] = None,
    attractive: Optional[np.ndarray] = None,
) -> PotentialField:
    """Full field: repulsive and attractive components plus their sum."""
    rep = render_repulsive(grid, constants, distances=distances)
    if attractive is None:
        attractive = render_attractive(grid.spec, target, constants)
    return PotentialField.from_components(grid.spec, rep, attractive)


def remove_instance(grid: SemanticGrid, instance_id: int) -> SemanticGrid:
    """Counterfactual grid with one tracklet's cells freed.

    The input grid is untouched; asking for an absent instance is an error
    because the counterfactual would silently equal the original.
    """
    mask = grid.instances == instance_id
    if not mask.any():
        raise ValueError(f"instance {instance_id} not present in grid")
    labels = grid.labels.copy()
    instances = grid.instances.copy()
    labels[mask] = int(SemanticLabel.FREE)
    instances[mask] = NO_INSTANCE
    return SemanticGrid(spec=grid.spec, labels=labels, instances=instances)
