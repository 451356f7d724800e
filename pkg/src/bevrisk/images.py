"""Binary PGM/PPM encoding of fields and scene overlays.

Netpbm formats are dependency-free and byte-stable, so rendered artifacts
can be diffed in tests. Field images are 16-bit linear grayscale saturated
at the dynamic-object energy; overlays are 8-bit RGB with instance cells
colored per class, the planned path, and a target marker.
"""

from __future__ import annotations

from pathlib import Path as FsPath
from typing import Optional, Sequence

import numpy as np

from .fields import PotentialField, target_cell
from .scene import SemanticGrid, SemanticLabel, TargetPoint

VEHICLE_COLOR = (60, 120, 255)
PEDESTRIAN_COLOR = (255, 80, 0)
PATH_COLOR = (0, 255, 70)
TARGET_COLOR = (255, 0, 255)


def write_pgm16(image: np.ndarray, path: str | FsPath) -> None:
    image = np.asarray(image)
    if image.ndim != 2 or image.dtype != np.uint16:
        raise ValueError("expected a 2-D uint16 image")
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode())
        fh.write(image.astype(">u2").tobytes())


def write_ppm8(image: np.ndarray, path: str | FsPath) -> None:
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise ValueError("expected an HxWx3 uint8 image")
    h, w, _ = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(image.tobytes())


def read_pgm16(path: str | FsPath) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"P5":
            raise ValueError(f"{path}: not a binary PGM")
        w, h = (int(x) for x in fh.readline().split())
        maxval = int(fh.readline())
        if maxval != 65535:
            raise ValueError(f"{path}: expected 16-bit PGM, maxval {maxval}")
        data = fh.read(w * h * 2)
    return np.frombuffer(data, dtype=">u2").reshape(h, w).astype(np.uint16)


def read_ppm8(path: str | FsPath) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"P6":
            raise ValueError(f"{path}: not a binary PPM")
        w, h = (int(x) for x in fh.readline().split())
        maxval = int(fh.readline())
        if maxval != 255:
            raise ValueError(f"{path}: expected 8-bit PPM, maxval {maxval}")
        data = fh.read(w * h * 3)
    return np.frombuffer(data, dtype=np.uint8).reshape(h, w, 3).copy()


def field_to_pgm16(field: PotentialField, saturate: float) -> np.ndarray:
    """Combined energy on a linear 16-bit scale, clipped at `saturate`."""
    if saturate <= 0:
        raise ValueError("saturate must be positive")
    scaled = np.clip(field.combined / saturate, 0.0, 1.0)
    return np.round(scaled * 65535.0).astype(np.uint16)


def overlay_image(
    field: PotentialField,
    grid: SemanticGrid,
    path_cells: Sequence[tuple[int, int]],
    target: Optional[TargetPoint],
    saturate: float,
) -> np.ndarray:
    """Grayscale field background with classes, plan, and target painted in."""
    gray = (np.clip(field.combined / saturate, 0.0, 1.0) * 255.0).astype(np.uint8)
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    rgb[grid.labels == int(SemanticLabel.VEHICLE)] = VEHICLE_COLOR
    rgb[grid.labels == int(SemanticLabel.PEDESTRIAN)] = PEDESTRIAN_COLOR
    for r, c in path_cells:
        rgb[r, c] = PATH_COLOR
    if target is not None:
        tr, tc = target_cell(field.spec, target)
        for dr, dc in ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (2, 0), (-2, 0), (0, 2), (0, -2)):
            r, c = tr + dr, tc + dc
            if field.spec.in_bounds(r, c):
                rgb[r, c] = TARGET_COLOR
    return rgb
