import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bevrisk.fields import FieldConstants, PotentialField, render_field
from bevrisk.planner import Path, Terminal, ade, fde, plan
from bevrisk.scene import EgoState, GridSpec, SemanticGrid, SemanticLabel, TargetPoint

from helpers import grid_from_cells, random_grid, reference_plan

DEFAULTS = FieldConstants()


def attractive_only_field(spec: GridSpec, target: TargetPoint) -> PotentialField:
    return render_field(SemanticGrid.empty(spec), target, DEFAULTS)


def synthetic_field(combined: np.ndarray) -> PotentialField:
    spec = GridSpec.with_shape(*combined.shape)
    return PotentialField(
        spec=spec,
        repulsive=np.zeros_like(combined),
        attractive=combined.copy(),
        combined=combined,
    )


class TestPlan:
    def test_straight_descent_on_pure_attractive_field(self):
        spec = GridSpec()
        target = TargetPoint(cell=(40.0, 100.0))
        field = attractive_only_field(spec, target)
        path = plan(field, EgoState(cell=(0, 100)), target)
        assert path.terminal is Terminal.REACHED_TARGET
        assert path.waypoints == tuple((r, 100) for r in range(39))

    def test_ego_already_at_goal(self):
        spec = GridSpec.with_shape(10, 10)
        target = TargetPoint(cell=(4.0, 5.0))
        field = attractive_only_field(spec, target)
        path = plan(field, EgoState(cell=(4, 4)), target)
        assert path.terminal is Terminal.REACHED_TARGET
        assert path.waypoints == ((4, 4),)

    def test_sealed_ring_hits_local_minimum(self):
        spec = GridSpec.with_shape(20, 20)
        cells = {}
        for r in range(6, 13):
            for c in range(6, 13):
                if r in (6, 12) or c in (6, 12):
                    cells[(r, c)] = (SemanticLabel.VEHICLE, 1)
        grid = grid_from_cells(spec, cells)
        target = TargetPoint(cell=(18.0, 18.0))
        field = render_field(grid, target, DEFAULTS)
        path = plan(field, EgoState(cell=(9, 9)), target)
        assert path.terminal is Terminal.LOCAL_MINIMUM
        assert len(path) < 400
        for r, c in path.waypoints:
            assert 6 < r < 12 and 6 < c < 12  # never crosses the ring

    def test_step_budget_exhausted_on_long_ramp(self):
        ramp = np.arange(500, 0, -1, dtype=np.float64).reshape(1, 500)
        field = synthetic_field(ramp)
        path = plan(field, EgoState(cell=(0, 0)), TargetPoint(cell=(0.0, 499.0)))
        assert path.terminal is Terminal.STEP_BUDGET_EXHAUSTED
        assert len(path) == 401

    def test_tie_break_prefers_forward_neighbor(self):
        combined = np.full((5, 5), 9.0)
        combined[3, 2] = 1.0  # N of (2, 2)
        combined[2, 3] = 1.0  # E of (2, 2), same potential
        field = synthetic_field(combined)
        path = plan(
            field, EgoState(cell=(2, 2)), TargetPoint(cell=(0.0, 0.0)), max_steps=1
        )
        assert path.waypoints[1] == (3, 2)

    def test_no_strictly_lower_neighbor_is_local_minimum(self):
        field = synthetic_field(np.zeros((5, 5)))
        path = plan(field, EgoState(cell=(2, 2)), TargetPoint(cell=(0.0, 0.0)))
        assert path.terminal is Terminal.LOCAL_MINIMUM
        assert path.waypoints == ((2, 2),)

    def test_out_of_bounds_ego_rejected(self):
        field = synthetic_field(np.zeros((5, 5)))
        with pytest.raises(ValueError):
            plan(field, EgoState(cell=(9, 0)), TargetPoint(cell=(0.0, 0.0)))

    def test_matches_reference_simulation_on_random_fields(self):
        rng = np.random.default_rng(17)
        for _ in range(30):
            grid = random_grid(rng, int(rng.integers(8, 40)), int(rng.integers(8, 40)))
            target = TargetPoint(
                cell=(
                    rng.uniform(0, grid.spec.rows - 1),
                    rng.uniform(0, grid.spec.cols - 1),
                )
            )
            field = render_field(grid, target, DEFAULTS)
            ego = EgoState(
                cell=(
                    int(rng.integers(0, grid.spec.rows)),
                    int(rng.integers(0, grid.spec.cols)),
                )
            )
            got = plan(field, ego, target)
            want = reference_plan(field, ego, target)
            assert got.terminal is want.terminal
            assert got.waypoints == want.waypoints

    def test_descent_invariants_on_random_fields(self):
        rng = np.random.default_rng(19)
        for _ in range(30):
            grid = random_grid(rng, 24, 36)
            target = TargetPoint(cell=(rng.uniform(0, 23), rng.uniform(0, 35)))
            field = render_field(grid, target, DEFAULTS)
            ego = EgoState(cell=(int(rng.integers(0, 24)), int(rng.integers(0, 36))))
            path = plan(field, ego, target)
            assert len(path) <= 401
            assert len(set(path.waypoints)) == len(path.waypoints)
            energies = [field.combined[w] for w in path.waypoints]
            assert all(b < a for a, b in zip(energies, energies[1:]))
            for (r0, c0), (r1, c1) in zip(path.waypoints, path.waypoints[1:]):
                assert max(abs(r1 - r0), abs(c1 - c0)) == 1
            for r, c in path.waypoints:
                assert field.spec.in_bounds(r, c)

    def test_determinism(self):
        rng = np.random.default_rng(21)
        grid = random_grid(rng, 30, 30)
        target = TargetPoint(cell=(25.0, 25.0))
        field = render_field(grid, target, DEFAULTS)
        a = plan(field, EgoState(cell=(0, 0)), target)
        b = plan(field, EgoState(cell=(0, 0)), target)
        assert a == b


def straight_path(col: int, length: int) -> Path:
    return Path(tuple((r, col) for r in range(length)), Terminal.REACHED_TARGET)


class TestDisplacementErrors:
    def test_identical_paths_are_zero(self):
        p = straight_path(4, 10)
        assert ade(p, p) == 0.0
        assert fde(p, p) == 0.0

    def test_parallel_columns_offset_three(self):
        assert ade(straight_path(4, 10), straight_path(7, 10)) == 3.0

    def test_prefix_truncation(self):
        assert ade(straight_path(4, 5), straight_path(4, 12)) == 0.0

    def test_fde_uses_final_waypoints(self):
        a = Path(((0, 100), (40, 100)), Terminal.REACHED_TARGET)
        b = Path(((0, 100), (40, 104)), Terminal.REACHED_TARGET)
        assert fde(a, b) == 4.0

    def test_single_cell_paths(self):
        a = Path(((3, 3),), Terminal.REACHED_TARGET)
        assert ade(a, a) == 0.0 and fde(a, a) == 0.0

    @given(
        st.lists(
            st.tuples(st.integers(0, 50), st.integers(0, 50)), min_size=1, max_size=30
        ),
        st.lists(
            st.tuples(st.integers(0, 50), st.integers(0, 50)), min_size=1, max_size=30
        ),
    )
    def test_symmetry(self, wa, wb):
        a = Path(tuple(wa), Terminal.LOCAL_MINIMUM)
        b = Path(tuple(wb), Terminal.LOCAL_MINIMUM)
        assert math.isclose(ade(a, b), ade(b, a), rel_tol=0, abs_tol=0)
        assert fde(a, b) == fde(b, a)
