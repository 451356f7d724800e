import numpy as np
import pytest

from bevrisk.scene import (
    NO_INSTANCE,
    EgoState,
    Frame,
    GridSpec,
    Scenario,
    SemanticGrid,
    SemanticLabel,
    TargetPoint,
    Tracklet,
    tracklets_from_frames,
    validate_scenario,
)

from helpers import grid_from_cells


def small_spec():
    return GridSpec.with_shape(6, 8)


def two_frame_scenario():
    spec = small_spec()
    g0 = grid_from_cells(
        spec,
        {
            (1, 1): (SemanticLabel.ROAD_LINE, None),
            (2, 3): (SemanticLabel.VEHICLE, 1),
            (2, 4): (SemanticLabel.VEHICLE, 1),
            (4, 6): (SemanticLabel.PEDESTRIAN, 2),
        },
    )
    g1 = grid_from_cells(
        spec,
        {
            (1, 1): (SemanticLabel.ROAD_LINE, None),
            (3, 3): (SemanticLabel.VEHICLE, 1),
            (3, 4): (SemanticLabel.VEHICLE, 1),
            (4, 5): (SemanticLabel.PEDESTRIAN, 2),
        },
    )
    frames = (
        Frame(g0, EgoState(cell=(0, 4), speed=5.0), TargetPoint(cell=(5.0, 4.0))),
        Frame(g1, EgoState(cell=(0, 4), speed=5.0), TargetPoint(cell=(5.0, 4.0))),
    )
    return Scenario(
        spec=spec,
        frames=frames,
        tracklets=tracklets_from_frames(frames),
        gt_risk={1: frozenset({2})},
        critical_frame=1,
        fps=20.0,
    )


class TestGridSpec:
    def test_defaults_cover_the_standard_region(self):
        spec = GridSpec()
        assert spec.shape == (100, 200)
        assert spec.rows * spec.cell_size == 50.0
        assert spec.cols * spec.cell_size == 100.0
        assert spec.ego_cell() == (0, 100)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"rows": 0},
            {"cols": 0},
            {"cell_size": 0.0},
            {"cell_size": -1.0},
            {"rows": 99},  # extent no longer matches
            {"col_extent_m": (-50.0, 40.0)},
        ],
    )
    def test_invalid_specs_raise(self, kwargs):
        with pytest.raises(ValueError):
            GridSpec(**kwargs)

    def test_in_bounds(self):
        spec = small_spec()
        assert spec.in_bounds(0, 0) and spec.in_bounds(5, 7)
        assert not spec.in_bounds(6, 0) and not spec.in_bounds(0, 8)
        assert not spec.in_bounds(-1, 0)


class TestSemanticGrid:
    def test_shape_mismatch_raises(self):
        spec = small_spec()
        with pytest.raises(ValueError):
            SemanticGrid(
                spec=spec,
                labels=np.zeros((3, 3), np.int8),
                instances=np.full((3, 3), NO_INSTANCE, np.int32),
            )

    def test_arrays_are_immutable(self):
        grid = SemanticGrid.empty(small_spec())
        with pytest.raises(ValueError):
            grid.labels[0, 0] = 1

    def test_instance_ids_and_cells(self):
        s = two_frame_scenario()
        grid = s.frames[0].grid
        assert grid.instance_ids() == [1, 2]
        assert grid.cells_of(1) == {(2, 3), (2, 4)}


class TestTrackletsFromFrames:
    def test_derivation(self):
        s = two_frame_scenario()
        t1 = s.tracklet(1)
        assert t1 is not None
        assert t1.label is SemanticLabel.VEHICLE
        assert t1.cells_by_frame[0] == frozenset({(2, 3), (2, 4)})
        assert t1.cells_by_frame[1] == frozenset({(3, 3), (3, 4)})
        t2 = s.tracklet(2)
        assert t2.label is SemanticLabel.PEDESTRIAN
        assert t2.frames() == [0, 1]


class TestValidateScenario:
    def test_well_formed_scenario_is_clean(self):
        assert validate_scenario(two_frame_scenario()) == []

    def test_gt_risk_with_unknown_instance(self):
        s = two_frame_scenario()
        bad = Scenario(
            spec=s.spec,
            frames=s.frames,
            tracklets=s.tracklets,
            gt_risk={1: frozenset({7})},
            critical_frame=s.critical_frame,
            fps=s.fps,
        )
        violations = validate_scenario(bad)
        assert len(violations) == 1
        assert "frame 1" in violations[0] and "7" in violations[0]

    def test_pedestrian_cell_without_instance(self):
        s = two_frame_scenario()
        labels = s.frames[0].grid.labels.copy()
        instances = s.frames[0].grid.instances.copy()
        labels[5, 0] = int(SemanticLabel.PEDESTRIAN)  # no instance id set
        bad_grid = SemanticGrid(spec=s.spec, labels=labels, instances=instances)
        frames = (Frame(bad_grid, s.frames[0].ego, s.frames[0].target), s.frames[1])
        bad = Scenario(
            spec=s.spec,
            frames=frames,
            tracklets=s.tracklets,
            gt_risk=s.gt_risk,
            critical_frame=s.critical_frame,
            fps=s.fps,
        )
        violations = validate_scenario(bad)
        assert any("(5, 0)" in v and "no instance" in v for v in violations)

    def test_critical_frame_out_of_range(self):
        s = two_frame_scenario()
        bad = Scenario(
            spec=s.spec,
            frames=s.frames,
            tracklets=s.tracklets,
            gt_risk=s.gt_risk,
            critical_frame=9,
            fps=s.fps,
        )
        assert any("critical_frame" in v for v in validate_scenario(bad))

    def test_ego_out_of_bounds(self):
        s = two_frame_scenario()
        frames = (
            Frame(s.frames[0].grid, EgoState(cell=(17, 0)), s.frames[0].target),
            s.frames[1],
        )
        bad = Scenario(
            spec=s.spec,
            frames=frames,
            tracklets=s.tracklets,
            gt_risk=s.gt_risk,
            critical_frame=s.critical_frame,
            fps=s.fps,
        )
        assert any("ego" in v for v in validate_scenario(bad))

    def test_nondynamic_tracklet_class(self):
        s = two_frame_scenario()
        tracklets = tuple(
            Tracklet(t.instance_id, SemanticLabel.ROAD_LINE, t.cells_by_frame)
            if t.instance_id == 1
            else t
            for t in s.tracklets
        )
        bad = Scenario(
            spec=s.spec,
            frames=s.frames,
            tracklets=tracklets,
            gt_risk=s.gt_risk,
            critical_frame=s.critical_frame,
            fps=s.fps,
        )
        violations = validate_scenario(bad)
        assert any("non-dynamic" in v for v in violations)

    def test_violations_are_frame_major_ordered(self):
        s = two_frame_scenario()
        frames = (
            Frame(s.frames[0].grid, EgoState(cell=(17, 0)), s.frames[0].target),
            Frame(s.frames[1].grid, EgoState(cell=(18, 0)), s.frames[1].target),
        )
        bad = Scenario(
            spec=s.spec,
            frames=frames,
            tracklets=s.tracklets,
            gt_risk=s.gt_risk,
            critical_frame=s.critical_frame,
            fps=s.fps,
        )
        violations = [v for v in validate_scenario(bad) if "ego" in v]
        assert "frame 0" in violations[0] and "frame 1" in violations[1]

    def test_empty_scenario(self):
        s = two_frame_scenario()
        empty = Scenario(spec=s.spec, frames=(), tracklets=(), gt_risk={}, fps=20.0)
        assert validate_scenario(empty) == ["scenario has no frames"]
