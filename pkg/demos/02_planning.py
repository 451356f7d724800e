"""Gradient-following planning: descent, local minima, and plan errors.

The planner walks strictly downhill over the combined field. This script
shows the three ways a plan can end and how two plans are compared with
average / final displacement errors.
"""

import numpy as np

from bevrisk import (
    EgoState,
    FieldConstants,
    GridSpec,
    SemanticGrid,
    SemanticLabel,
    TargetPoint,
    ade,
    fde,
    plan,
    render_field,
)
from bevrisk.scene import NO_INSTANCE

spec = GridSpec()
constants = FieldConstants()
ego = EgoState(cell=spec.ego_cell(), speed=8.0)
target = TargetPoint(cell=(48.0, 100.0))

# 1. empty world: pure attraction, dead-straight descent
empty = SemanticGrid.empty(spec)
straight = plan(render_field(empty, target, constants), ego, target)
print(f"open field: {straight.terminal.value}, {len(straight)} waypoints")
print("  first five:", straight.waypoints[:5])

# 2. a pedestrian on the line forces a curve around it
labels = np.zeros(spec.shape, dtype=np.int8)
instances = np.full(spec.shape, NO_INSTANCE, dtype=np.int32)
labels[20, 100] = int(SemanticLabel.PEDESTRIAN)
instances[20, 100] = 1
dodged = plan(
    render_field(SemanticGrid(spec=spec, labels=labels, instances=instances), target, constants),
    ego,
    target,
)
print(f"\npedestrian at (20, 100): {dodged.terminal.value}, {len(dodged)} waypoints")
widest = max(abs(c - 100) for _, c in dodged.waypoints)
print(f"  path swings {widest} columns around the obstacle")
print(f"  ade vs straight plan: {ade(straight, dodged):.3f} cells")
print(f"  fde vs straight plan: {fde(straight, dodged):.3f} cells")

# 3. a wall across the lane leaves no downhill way out: local minimum
labels = np.zeros(spec.shape, dtype=np.int8)
instances = np.full(spec.shape, NO_INSTANCE, dtype=np.int32)
labels[26:30, 92:109] = int(SemanticLabel.VEHICLE)
instances[26:30, 92:109] = 1
blocked_field = render_field(
    SemanticGrid(spec=spec, labels=labels, instances=instances), target, constants
)
blocked = plan(blocked_field, ego, target)
print(f"\nwall ahead: {blocked.terminal.value} after {len(blocked)} waypoints")
print(f"  stalls at {blocked.end}, {26 - blocked.end[0]} rows short of the wall")
energies = [blocked_field.combined[w] for w in blocked.waypoints]
print(f"  energy falls monotonically: {energies[0]:.1f} -> {energies[-1]:.1f}")

# 4. the step budget caps runaway descents
ramp = np.arange(500, 0, -1, dtype=np.float64).reshape(1, 500)
from bevrisk.fields import PotentialField

ramp_field = PotentialField(
    spec=GridSpec.with_shape(1, 500),
    repulsive=np.zeros_like(ramp),
    attractive=ramp,
    combined=ramp,
)
capped = plan(ramp_field, EgoState(cell=(0, 0)), TargetPoint(cell=(0.0, 499.0)))
print(f"\n500-cell ramp: {capped.terminal.value} at {len(capped)} waypoints (budget 400 steps)")
