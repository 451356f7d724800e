"""Exact Euclidean distance transform on binary source masks.

Two-pass algorithm: per-column 1-D scan for the nearest source in each
column, then a per-row lower-envelope-of-parabolas pass over the squared
column distances. The result is exact (no chamfer approximation), which
the field renderer relies on for oracle equivalence against brute-force
distance maximisation.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# Finite stand-in for "no source anywhere"; large enough to dominate any
# real squared distance, small enough that float arithmetic stays sane.
_FAR = 1e18


@njit(cache=True)
def _edt_squared(mask):  # pragma: no cover - compiled
    rows, cols = mask.shape
    g = np.empty((rows, cols), np.float64)
    for c in range(cols):
        d = _FAR
        for r in range(rows):
            if mask[r, c]:
                d = 0.0
            elif d < _FAR:
                d += 1.0
            g[r, c] = d
        d = _FAR
        for r in range(rows - 1, -1, -1):
            if mask[r, c]:
                d = 0.0
            elif d < _FAR:
                d += 1.0
            if d < g[r, c]:
                g[r, c] = d

    out = np.empty((rows, cols), np.float64)
    v = np.empty(cols, np.int64)
    z = np.empty(cols + 1, np.float64)
    f = np.empty(cols, np.float64)
    for r in range(rows):
        for c in range(cols):
            gv = g[r, c]
            f[c] = gv * gv if gv < _FAR else _FAR
        k = 0
        v[0] = 0
        z[0] = -_FAR
        z[1] = _FAR
        for q in range(1, cols):
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2 * q - 2 * v[k])
            while s <= z[k]:
                k -= 1
                s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2 * q - 2 * v[k])
            k += 1
            v[k] = q
            z[k] = s
            z[k + 1] = _FAR
        k = 0
        for c in range(cols):
            while z[k + 1] < c:
                k += 1
            fv = f[v[k]]
            dc = c - v[k]
            out[r, c] = dc * dc + fv if fv < _FAR else _FAR
    return out


def squared_distance_transform(mask: np.ndarray) -> np.ndarray:
    """Per-cell squared Euclidean distance (in cells) to the nearest True
    cell. Squared distances are exact integers held in float64, so
    downstream energy terms avoid any sqrt round-off.

    Cells of the mask itself get 0. A mask with no True cell returns +inf
    everywhere; callers treating such classes as absent should skip the
    transform instead.
    """
    mask = np.ascontiguousarray(mask, dtype=np.bool_)
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {mask.shape}")
    sq = _edt_squared(mask)
    sq[sq >= _FAR] = np.inf
    return sq


def distance_transform(mask: np.ndarray) -> np.ndarray:
    """Per-cell Euclidean distance (in cells) to the nearest True cell."""
    return np.sqrt(squared_distance_transform(mask))
