import numpy as np
import pytest

from bevrisk.fields import FieldConstants, render_field
from bevrisk.images import (
    PATH_COLOR,
    PEDESTRIAN_COLOR,
    TARGET_COLOR,
    VEHICLE_COLOR,
    field_to_pgm16,
    overlay_image,
    read_pgm16,
    read_ppm8,
    write_pgm16,
    write_ppm8,
)
from bevrisk.scene import GridSpec, SemanticLabel, TargetPoint

from helpers import grid_from_cells


def test_pgm_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    img = rng.integers(0, 65536, size=(13, 17)).astype(np.uint16)
    path = tmp_path / "x.pgm"
    write_pgm16(img, path)
    assert np.array_equal(read_pgm16(path), img)


def test_ppm_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    img = rng.integers(0, 256, size=(9, 11, 3)).astype(np.uint8)
    path = tmp_path / "x.ppm"
    write_ppm8(img, path)
    assert np.array_equal(read_ppm8(path), img)


def test_pgm_rejects_wrong_dtype(tmp_path):
    with pytest.raises(ValueError):
        write_pgm16(np.zeros((4, 4), np.uint8), tmp_path / "bad.pgm")


def test_field_scaling_saturates_at_dynamic_energy():
    grid = grid_from_cells(
        GridSpec.with_shape(9, 9), {(4, 4): (SemanticLabel.VEHICLE, 1)}
    )
    constants = FieldConstants()
    field = render_field(grid, TargetPoint(cell=(0.0, 0.0)), constants)
    img = field_to_pgm16(field, constants.k_dynamic)
    assert img[4, 4] == 65535  # obstacle interior saturates
    assert img[0, 0] < 65535


def test_overlay_paints_classes_path_and_target():
    spec = GridSpec.with_shape(20, 20)
    grid = grid_from_cells(
        spec,
        {
            (4, 4): (SemanticLabel.VEHICLE, 1),
            (8, 9): (SemanticLabel.PEDESTRIAN, 2),
        },
    )
    constants = FieldConstants()
    target = TargetPoint(cell=(15.0, 15.0))
    field = render_field(grid, target, constants)
    img = overlay_image(field, grid, [(0, 0), (1, 1)], target, constants.k_dynamic)
    assert tuple(img[4, 4]) == VEHICLE_COLOR
    assert tuple(img[8, 9]) == PEDESTRIAN_COLOR
    assert tuple(img[0, 0]) == PATH_COLOR and tuple(img[1, 1]) == PATH_COLOR
    assert tuple(img[15, 15]) == TARGET_COLOR
