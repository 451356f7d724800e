"""Counterfactual risk scoring over potential fields.

Three scorers share one mechanic: re-render the recent field window with a
single tracklet removed and measure how the response changes.

* BCP-style delta: stop-score of a behavior predictor on the original
  window minus its stop-score on the counterfactual window.
* OADE / OFDE: average / final displacement error between the plan on the
  original field and the plan on the counterfactual field.

Candidates are scored independently, which makes the per-frame stage
embarrassingly parallel; a fork-based worker pool keeps results
bit-identical to the serial path.
"""

from __future__ import annotations

import abc
import csv
import multiprocessing
import time
from dataclasses import dataclass, field as dataclass_field
from enum import Enum
from pathlib import Path as FsPath
from typing import Optional, Sequence

import numpy as np

from .fields import (
    DistanceEntry,
    FieldConstants,
    PotentialField,
    render_attractive,
    render_field,
    source_distances,
)
from .planner import Terminal, ade, fde, plan
from .scene import EgoState, Frame, Scenario, TargetPoint


class RiskMethod(str, Enum):
    BCP = "bcp"
    OADE = "oade"
    OFDE = "ofde"


DEFAULT_WINDOW = 5


class BehaviorPredictor(abc.ABC):
    """Maps the last N potential fields plus ego state and target point to a
    stop-score in [0, 1]; higher means the scene influences the ego's
    behavior. Implementations must be deterministic, and picklable if they
    are to run under a multi-worker pool."""

    window: int = DEFAULT_WINDOW

    @abc.abstractmethod
    def predict(
        self,
        fields: Sequence[PotentialField],
        ego: EgoState,
        target: TargetPoint,
    ) -> float:
        ...


def rule_predict(
    fields: Sequence[PotentialField],
    ego: EgoState,
    target: TargetPoint,
    *,
    saturation: float = 1000.0,
    lookahead: int = 40,
) -> float:
    """Deterministic stand-in for a learned behavior-change network.

    Plans over the latest field. A plan that fails to reach the target is a
    hard stop (1.0); otherwise the score is the peak repulsive energy along
    the first `lookahead` waypoints, scaled by `saturation` and clamped to
    [0, 1]. With defaults, a dynamic obstacle touching the path saturates
    the score.
    """
    if not fields:
        raise ValueError("need at least one field")
    spec = fields[-1].spec
    for f in fields:
        if f.spec != spec:
            raise ValueError("window fields have mismatched grid specs")
    if saturation <= 0:
        raise ValueError("saturation must be positive")
    path = plan(fields[-1], ego, target)
    if path.terminal is not Terminal.REACHED_TARGET:
        return 1.0
    rep = fields[-1].repulsive
    peak = max(float(rep[r, c]) for r, c in path.waypoints[:lookahead])
    return min(1.0, max(0.0, peak / saturation))


@dataclass(frozen=True)
class RuleBasedPredictor(BehaviorPredictor):
    """Reference BehaviorPredictor built on rule_predict."""

    saturation: float = 1000.0
    lookahead: int = 40
    window: int = DEFAULT_WINDOW

    def predict(
        self,
        fields: Sequence[PotentialField],
        ego: EgoState,
        target: TargetPoint,
    ) -> float:
        return rule_predict(
            fields, ego, target, saturation=self.saturation, lookahead=self.lookahead
        )


@dataclass
class FrameScores:
    """Scores for one frame: instance id -> raw risk score, the original
    stop-score, and the wall-clock cost of producing them. Frames without
    enough history keep s_orig = None and an empty map."""

    frame: int
    s_orig: Optional[float] = None
    scores: dict[int, float] = dataclass_field(default_factory=dict)
    latency_ms: Optional[float] = None

    @property
    def scored(self) -> bool:
        return self.s_orig is not None


@dataclass
class RiskReport:
    scenario_id: str
    method: RiskMethod
    frames: list[FrameScores] = dataclass_field(default_factory=list)

    def scored_frames(self) -> list[FrameScores]:
        return [f for f in self.frames if f.scored]


@dataclass
class FrameRender:
    """Original render of one frame plus the reusable pieces for
    counterfactuals (static distance transforms, attractive component).
    Workers scoring candidates only need the reusable pieces, so `field`
    may be None there."""

    field: Optional[PotentialField]
    distances: tuple[DistanceEntry, ...]
    attractive: np.ndarray


def render_frame(frame: Frame, constants: FieldConstants) -> FrameRender:
    """Full original render; the cache unit of the scoring pipeline."""
    dists = source_distances(frame.grid, constants)
    attr = render_attractive(frame.grid.spec, frame.target, constants)
    f = render_field(frame.grid, frame.target, constants, distances=dists, attractive=attr)
    return FrameRender(field=f, distances=dists, attractive=attr)


def _support_render(frame: Frame, constants: FieldConstants) -> FrameRender:
    """Static groups and attractive only; enough to build counterfactuals."""
    dists = source_distances(frame.grid, constants, include_dynamic=False)
    attr = render_attractive(frame.grid.spec, frame.target, constants)
    return FrameRender(field=None, distances=dists, attractive=attr)


def _counterfactual_fields(
    frames: Sequence[Frame],
    constants: FieldConstants,
    instance_id: int,
    renders: Sequence[FrameRender],
) -> list[PotentialField]:
    out = []
    for frame, render in zip(frames, renders):
        cf_dists = source_distances(
            frame.grid,
            constants,
            exclude_instance=instance_id,
            reuse=render.distances,
        )
        out.append(
            render_field(
                frame.grid,
                frame.target,
                constants,
                distances=cf_dists,
                attractive=render.attractive,
            )
        )
    return out


# Per-process memo of the support renders for the window currently being
# scored. Workers receive one task per candidate for load balancing; the
# token keys the (static distances, attractive) bundle shared by all
# candidates of one window so it is derived once per worker, not per task.
_SUPPORT_CACHE: dict[int, list[FrameRender]] = {}


def _window_support(token, frames, constants) -> list[FrameRender]:
    if token is None:
        return [_support_render(f, constants) for f in frames]
    cached = _SUPPORT_CACHE.get(token)
    if cached is None:
        cached = [_support_render(f, constants) for f in frames]
        _SUPPORT_CACHE.clear()
        _SUPPORT_CACHE[token] = cached
    return cached


def _candidates_chunk(task) -> list[tuple[int, float]]:
    """Score a chunk of candidates against one frame window.

    Runs in either the parent process (serial) or a pool worker; the
    per-candidate arithmetic is identical in both, so reports are
    bit-identical for any worker count.
    """
    (token, frames, constants, method, predictor, candidates, orig_path, renders) = task
    if renders is None:
        renders = _window_support(token, frames, constants)
    latest = frames[-1]
    results: list[tuple[int, float]] = []
    for cid in candidates:
        cf = _counterfactual_fields(frames, constants, cid, renders)
        if method is RiskMethod.BCP:
            value = predictor.predict(cf, latest.ego, latest.target)
        else:
            p_cf = plan(cf[-1], latest.ego, latest.target)
            value = (ade if method is RiskMethod.OADE else fde)(orig_path, p_cf)
        results.append((cid, value))
    return results


class CandidatePool:
    """Process pool for candidate-parallel scoring.

    Forked workers score disjoint candidate chunks; `workers <= 1` runs
    everything in-process. Use as a context manager so worker processes are
    reclaimed deterministically.
    """

    def __init__(self, workers: int = 1):
        self.workers = max(1, int(workers))
        self._pool = None
        self._token = 0
        if self.workers > 1:
            methods = multiprocessing.get_all_start_methods()
            ctx = multiprocessing.get_context(
                "fork" if "fork" in methods else "spawn"
            )
            self._pool = ctx.Pool(processes=self.workers)

    def next_token(self) -> int:
        """Identifier for one scoring call's shared window, unique within
        this pool's lifetime."""
        self._token += 1
        return self._token

    def map(self, fn, tasks):
        if self._pool is None:
            return [fn(t) for t in tasks]
        return self._pool.map(fn, tasks, chunksize=1)

    def close(self) -> None:
        if self._pool is not None:
            self._pool.close()
            self._pool.join()
            self._pool = None

    def __enter__(self) -> "CandidatePool":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def _window_frames(scenario: Scenario, frame: int, window: int) -> tuple[Frame, ...]:
    if not 0 <= frame < len(scenario.frames):
        raise ValueError(f"frame {frame} outside scenario range")
    lo = max(0, frame - window + 1)
    return tuple(scenario.frames[lo : frame + 1])


def _score_frame(
    scenario: Scenario,
    frame: int,
    method: RiskMethod,
    predictor: BehaviorPredictor,
    constants: FieldConstants,
    pool: Optional[CandidatePool],
    renders: Optional[Sequence[FrameRender]],
) -> FrameScores:
    frames = _window_frames(scenario, frame, predictor.window)
    if renders is None:
        renders = [render_frame(f, constants) for f in frames]
    latest = frames[-1]
    fields = [r.field for r in renders]
    s_orig = predictor.predict(fields, latest.ego, latest.target)

    orig_path = None
    if method is not RiskMethod.BCP:
        orig_path = plan(fields[-1], latest.ego, latest.target)

    candidates = latest.grid.instance_ids()
    if not candidates:
        return FrameScores(frame=frame, s_orig=s_orig, scores={})

    if pool is not None and pool.workers > 1 and len(candidates) > 1:
        # One task per candidate keeps the queue balanced against scheduler
        # unfairness; the token lets each worker derive the window's static
        # renders once. Shipping grids is cheaper than shipping distance
        # arrays and the recomputation is bit-stable.
        token = pool.next_token()
        tasks = [
            (token, frames, constants, method, predictor, (cid,), orig_path, None)
            for cid in candidates
        ]
        chunk_results = pool.map(_candidates_chunk, tasks)
        pairs = [p for chunk in chunk_results for p in chunk]
    else:
        pairs = _candidates_chunk(
            (None, frames, constants, method, predictor, tuple(candidates), orig_path, renders)
        )

    scores: dict[int, float] = {}
    for cid, value in pairs:
        scores[cid] = (s_orig - value) if method is RiskMethod.BCP else value
    return FrameScores(frame=frame, s_orig=s_orig, scores=scores)


def score_bcp(
    scenario: Scenario,
    frame: int,
    predictor: BehaviorPredictor,
    constants: FieldConstants = FieldConstants(),
    *,
    pool: Optional[CandidatePool] = None,
    window_renders: Optional[Sequence[FrameRender]] = None,
) -> FrameScores:
    """Response-delta risk: s_orig - s_counterfactual per candidate, with
    the candidate's tracklet removed from every frame of the window.

    `window_renders` lets callers reuse original-frame renders across
    overlapping windows; passing it changes nothing numerically.
    """
    return _score_frame(
        scenario, frame, RiskMethod.BCP, predictor, constants, pool, window_renders
    )


def score_oade(
    scenario: Scenario,
    frame: int,
    constants: FieldConstants = FieldConstants(),
    *,
    predictor: Optional[BehaviorPredictor] = None,
    pool: Optional[CandidatePool] = None,
    window_renders: Optional[Sequence[FrameRender]] = None,
) -> FrameScores:
    """Average displacement error between original and counterfactual plans."""
    predictor = predictor or RuleBasedPredictor()
    return _score_frame(
        scenario, frame, RiskMethod.OADE, predictor, constants, pool, window_renders
    )


def score_ofde(
    scenario: Scenario,
    frame: int,
    constants: FieldConstants = FieldConstants(),
    *,
    predictor: Optional[BehaviorPredictor] = None,
    pool: Optional[CandidatePool] = None,
    window_renders: Optional[Sequence[FrameRender]] = None,
) -> FrameScores:
    """Final displacement error between original and counterfactual plans."""
    predictor = predictor or RuleBasedPredictor()
    return _score_frame(
        scenario, frame, RiskMethod.OFDE, predictor, constants, pool, window_renders
    )


def run_pipeline(
    scenario: Scenario,
    method: RiskMethod | str,
    predictor: BehaviorPredictor,
    constants: FieldConstants = FieldConstants(),
    *,
    scenario_id: str = "scenario",
    workers: int = 1,
) -> RiskReport:
    """Score every frame that has a full predictor window available.

    Frames before the window fills are reported with empty score maps.
    Original-frame renders are cached across the sliding windows; each
    scored frame records its wall-clock latency.
    """
    method = RiskMethod(method)
    report = RiskReport(scenario_id=scenario_id, method=method)
    n = predictor.window
    render_cache: dict[int, FrameRender] = {}

    with CandidatePool(workers) as pool:
        for f in range(len(scenario.frames)):
            if f < n - 1:
                report.frames.append(FrameScores(frame=f))
                continue
            t0 = time.perf_counter()
            window = range(max(0, f - n + 1), f + 1)
            for k in window:
                if k not in render_cache:
                    render_cache[k] = render_frame(scenario.frames[k], constants)
            renders = [render_cache[k] for k in window]
            entry = _score_frame(
                scenario, f, method, predictor, constants, pool, renders
            )
            entry.latency_ms = (time.perf_counter() - t0) * 1000.0
            report.frames.append(entry)
            render_cache.pop(f - n + 1, None)
    return report


REPORT_COLUMNS = (
    "scenario_id",
    "frame",
    "instance_id",
    "method",
    "raw_score",
    "s_orig",
    "latency_ms",
)


def write_report_csv(
    reports: Sequence[RiskReport],
    path: str | FsPath,
    *,
    include_latency: bool = True,
) -> None:
    """Serialize reports, one row per scored (frame, instance).

    Scored frames without candidates emit one row with empty instance_id
    and raw_score so their s_orig survives the round trip. Latency can be
    left out to keep artifacts byte-reproducible across runs.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_COLUMNS)
        for report in reports:
            for fs in report.frames:
                if not fs.scored:
                    continue
                lat = (
                    repr(fs.latency_ms)
                    if include_latency and fs.latency_ms is not None
                    else ""
                )
                sid, meth, s_orig = report.scenario_id, report.method.value, repr(fs.s_orig)
                if not fs.scores:
                    w.writerow((sid, fs.frame, "", meth, "", s_orig, lat))
                for cid, value in fs.scores.items():
                    w.writerow((sid, fs.frame, cid, meth, repr(value), s_orig, lat))


def read_report_csv(path: str | FsPath) -> list[RiskReport]:
    """Parse a report CSV back into RiskReports (scored frames only)."""
    reports: dict[tuple[str, str], RiskReport] = {}
    frames: dict[tuple[str, str, int], FrameScores] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != REPORT_COLUMNS:
            raise ValueError(f"{path}: unexpected report columns {reader.fieldnames}")
        for row in reader:
            key = (row["scenario_id"], row["method"])
            report = reports.get(key)
            if report is None:
                report = RiskReport(
                    scenario_id=row["scenario_id"], method=RiskMethod(row["method"])
                )
                reports[key] = report
            fkey = (*key, int(row["frame"]))
            fs = frames.get(fkey)
            if fs is None:
                fs = FrameScores(
                    frame=int(row["frame"]),
                    s_orig=float(row["s_orig"]),
                    latency_ms=float(row["latency_ms"]) if row["latency_ms"] else None,
                )
                frames[fkey] = fs
                report.frames.append(fs)
            if row["instance_id"]:
                fs.scores[int(row["instance_id"])] = float(row["raw_score"])
    return list(reports.values())
