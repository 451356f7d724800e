"""Scenario file format: JSON with run-length-encoded label grids.

Top level: `spec`, `fps`, `frames` (each frame holds `labels` as row-major
[code, run] pairs, `instances` as a sparse [row, col, id] list, `ego`,
`target`), `gt_risk` keyed by frame index, and `critical_frame`. Label
codes: 0=Free, 1=RoadLine, 2=Vehicle, 3=Pedestrian, 4=OtherStatic.
Writing is deterministic: identical scenarios produce identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path as FsPath
from typing import Any

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
)

_LABEL_CODES = {int(l) for l in SemanticLabel}


class ScenarioFormatError(ValueError):
    """Malformed scenario document; the message carries the field path."""


def _rle_encode(flat: np.ndarray) -> list[list[int]]:
    if flat.size == 0:
        return []
    boundaries = np.flatnonzero(np.diff(flat)) + 1
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries, [flat.size]))
    return [[int(flat[s]), int(e - s)] for s, e in zip(starts, ends)]


def _rle_decode(pairs: Any, size: int, where: str) -> np.ndarray:
    out = np.empty(size, dtype=np.int8)
    pos = 0
    if not isinstance(pairs, list):
        raise ScenarioFormatError(f"{where}: labels must be a list of [code, run] pairs")
    for i, pair in enumerate(pairs):
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ScenarioFormatError(f"{where}.labels[{i}]: expected [code, run]")
        code, run = pair
        if not isinstance(code, int) or code not in _LABEL_CODES:
            raise ScenarioFormatError(f"{where}.labels[{i}]: unknown label code {code!r}")
        if not isinstance(run, int) or run <= 0:
            raise ScenarioFormatError(f"{where}.labels[{i}]: run must be a positive int")
        if pos + run > size:
            raise ScenarioFormatError(f"{where}.labels: runs exceed grid size {size}")
        out[pos : pos + run] = code
        pos += run
    if pos != size:
        raise ScenarioFormatError(
            f"{where}.labels: runs cover {pos} cells, grid has {size}"
        )
    return out


def scenario_to_dict(scenario: Scenario) -> dict:
    spec = scenario.spec
    doc: dict[str, Any] = {
        "spec": {
            "rows": spec.rows,
            "cols": spec.cols,
            "cell_size": spec.cell_size,
            "origin": {
                "row_m": list(spec.row_extent_m),
                "col_m": list(spec.col_extent_m),
            },
        },
        "fps": scenario.fps,
        "frames": [],
        "gt_risk": {
            str(f): sorted(ids)
            for f, ids in sorted(scenario.gt_risk.items())
            if ids
        },
        "critical_frame": scenario.critical_frame,
    }
    for frame in scenario.frames:
        grid = frame.grid
        rows, cols = np.nonzero(grid.instances != NO_INSTANCE)
        doc["frames"].append(
            {
                "labels": _rle_encode(grid.labels.ravel()),
                "instances": [
                    [int(r), int(c), int(grid.instances[r, c])]
                    for r, c in zip(rows, cols)
                ],
                "ego": {
                    "cell": [int(frame.ego.cell[0]), int(frame.ego.cell[1])],
                    "speed": frame.ego.speed,
                },
                "target": {
                    "cell": [float(frame.target.cell[0]), float(frame.target.cell[1])]
                },
            }
        )
    return doc


def write_scenario(scenario: Scenario, path: str | FsPath) -> None:
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(scenario), fh, separators=(",", ":"))
        fh.write("\n")


def _expect(doc: Any, key: str, kind, where: str):
    if not isinstance(doc, dict) or key not in doc:
        raise ScenarioFormatError(f"{where}: missing field '{key}'")
    value = doc[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ScenarioFormatError(f"{where}.{key}: expected a number")
        return float(value)
    if not isinstance(value, kind):
        raise ScenarioFormatError(f"{where}.{key}: expected {kind.__name__}")
    return value


def scenario_from_dict(doc: Any) -> Scenario:
    spec_doc = _expect(doc, "spec", dict, "$")
    origin = _expect(spec_doc, "origin", dict, "$.spec")
    try:
        spec = GridSpec(
            rows=_expect(spec_doc, "rows", int, "$.spec"),
            cols=_expect(spec_doc, "cols", int, "$.spec"),
            cell_size=_expect(spec_doc, "cell_size", float, "$.spec"),
            row_extent_m=tuple(_expect(origin, "row_m", list, "$.spec.origin")),
            col_extent_m=tuple(_expect(origin, "col_m", list, "$.spec.origin")),
        )
    except (TypeError, ValueError) as e:
        raise ScenarioFormatError(f"$.spec: {e}") from e

    fps = _expect(doc, "fps", float, "$")
    frames_doc = _expect(doc, "frames", list, "$")
    frames: list[Frame] = []
    size = spec.rows * spec.cols
    for i, fd in enumerate(frames_doc):
        where = f"$.frames[{i}]"
        labels = _rle_decode(_expect(fd, "labels", list, where), size, where)
        instances = np.full(size, NO_INSTANCE, dtype=np.int32).reshape(spec.shape)
        labels = labels.reshape(spec.shape)
        for j, entry in enumerate(_expect(fd, "instances", list, where)):
            if not (isinstance(entry, list) and len(entry) == 3):
                raise ScenarioFormatError(f"{where}.instances[{j}]: expected [row, col, id]")
            r, c, inst = entry
            if not all(isinstance(x, int) for x in entry):
                raise ScenarioFormatError(f"{where}.instances[{j}]: entries must be ints")
            if not spec.in_bounds(r, c):
                raise ScenarioFormatError(
                    f"{where}.instances[{j}]: cell ({r}, {c}) out of bounds"
                )
            if inst < 0:
                raise ScenarioFormatError(f"{where}.instances[{j}]: negative instance id")
            instances[r, c] = inst
        ego_doc = _expect(fd, "ego", dict, where)
        ego_cell = _expect(ego_doc, "cell", list, f"{where}.ego")
        if len(ego_cell) != 2 or not all(isinstance(x, int) for x in ego_cell):
            raise ScenarioFormatError(f"{where}.ego.cell: expected [row, col] ints")
        target_doc = _expect(fd, "target", dict, where)
        target_cell = _expect(target_doc, "cell", list, f"{where}.target")
        if len(target_cell) != 2 or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in target_cell
        ):
            raise ScenarioFormatError(f"{where}.target.cell: expected [row, col] numbers")
        frames.append(
            Frame(
                grid=SemanticGrid(spec=spec, labels=labels, instances=instances),
                ego=EgoState(
                    cell=(ego_cell[0], ego_cell[1]),
                    speed=_expect(ego_doc, "speed", float, f"{where}.ego"),
                ),
                target=TargetPoint(cell=(float(target_cell[0]), float(target_cell[1]))),
            )
        )

    gt_doc = _expect(doc, "gt_risk", dict, "$")
    gt_risk: dict[int, frozenset[int]] = {}
    for key, ids in gt_doc.items():
        try:
            f = int(key)
        except ValueError:
            raise ScenarioFormatError(f"$.gt_risk: non-integer frame key {key!r}") from None
        if not isinstance(ids, list) or not all(isinstance(x, int) for x in ids):
            raise ScenarioFormatError(f"$.gt_risk[{key}]: expected a list of instance ids")
        gt_risk[f] = frozenset(ids)

    critical = doc.get("critical_frame")
    if critical is not None and not isinstance(critical, int):
        raise ScenarioFormatError("$.critical_frame: expected an int or null")

    return Scenario(
        spec=spec,
        frames=tuple(frames),
        tracklets=tracklets_from_frames(frames),
        gt_risk=gt_risk,
        critical_frame=critical,
        fps=fps,
    )


def read_scenario(path: str | FsPath) -> Scenario:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ScenarioFormatError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
    try:
        return scenario_from_dict(doc)
    except ScenarioFormatError as e:
        raise ScenarioFormatError(f"{path}: {e}") from e


def write_manifest(entries: list[dict], path: str | FsPath) -> None:
    """Batch manifest: one {kind, seed, path} record per generated file."""
    with open(path, "w") as fh:
        json.dump({"scenarios": entries}, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path: str | FsPath) -> list[dict]:
    with open(path) as fh:
        doc = json.load(fh)
    entries = doc.get("scenarios")
    if not isinstance(entries, list):
        raise ScenarioFormatError(f"{path}: manifest missing 'scenarios' list")
    return entries
