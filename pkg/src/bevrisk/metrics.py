"""Evaluation metrics for risk reports: optimal-threshold F1 (globally and
in windows before the critical frame), progressive increasing cost, and a
class-weighted multi-object tracking accuracy.

All metrics pool (instance, frame) samples over the frames a report
actually scored; frames before the predictor window filled carry no
decisions and are excluded throughout.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path as FsPath
from typing import AbstractSet, Mapping, Optional, Sequence

import numpy as np

from .risk import RiskReport
from .scene import Scenario


@dataclass(frozen=True)
class MetricConfig:
    pic_t: int = 60
    pic_eps: float = 0.01
    wmota_weights: Optional[tuple[float, float]] = None
    fps: float = 20.0
    ot_f1_horizons: tuple[float, ...] = (1.0, 2.0, 3.0)

    def __post_init__(self) -> None:
        if self.pic_t < 1:
            raise ValueError("pic_t must be >= 1")
        if not 0.0 < self.pic_eps < 1.0:
            raise ValueError("pic_eps must lie in (0, 1)")
        if self.wmota_weights is not None and any(w <= 0 for w in self.wmota_weights):
            raise ValueError("wmota weights must be positive")


@dataclass(frozen=True)
class Sample:
    scenario_id: str
    frame: int
    instance: int
    score: float
    positive: bool


@dataclass(frozen=True)
class SweepResult:
    threshold: float
    precision: float
    recall: float
    f1: float
    degenerate: bool = False


def collect_samples(
    reports: Sequence[RiskReport], scenarios: Mapping[str, Scenario]
) -> list[Sample]:
    """Flatten reports into (instance, frame) samples with ground truth."""
    samples: list[Sample] = []
    for report in reports:
        scenario = scenarios.get(report.scenario_id)
        if scenario is None:
            raise ValueError(f"no scenario provided for report '{report.scenario_id}'")
        for fs in report.scored_frames():
            gt = scenario.gt_at(fs.frame)
            for cid, score in fs.scores.items():
                samples.append(
                    Sample(report.scenario_id, fs.frame, cid, score, cid in gt)
                )
    return samples


def sweep_optimal_f1(samples: Sequence[Sample]) -> SweepResult:
    """Threshold sweep maximizing pooled F1 with `score >= threshold` as the
    decision rule.

    Candidate thresholds are the distinct raw scores plus a +inf sentinel
    that predicts nothing. The smallest threshold attaining the maximum F1
    wins; with no positive ground truth anywhere every threshold ties at
    F1 = 0, so the sentinel is returned and flagged degenerate.
    """
    if not samples:
        raise ValueError("sweep needs at least one scored sample")
    scores = np.asarray([s.score for s in samples], dtype=np.float64)
    positives = np.asarray([s.positive for s in samples], dtype=bool)
    total_pos = int(positives.sum())
    if total_pos == 0:
        return SweepResult(math.inf, 0.0, 0.0, 0.0, degenerate=True)

    order = np.argsort(scores, kind="mergesort")
    s_sorted = scores[order]
    p_sorted = positives[order]
    # positives strictly below each distinct threshold, by suffix count
    cum_pos = np.concatenate(([0], np.cumsum(p_sorted)))
    thresholds, first_idx = np.unique(s_sorted, return_index=True)
    tp = total_pos - cum_pos[first_idx]
    predicted = len(samples) - first_idx
    f1 = 2.0 * tp / (predicted + total_pos)

    best = float(f1.max())
    j = int(np.flatnonzero(f1 == best)[0])  # thresholds ascend: smallest wins
    tp_j = float(tp[j])
    return SweepResult(
        threshold=float(thresholds[j]),
        precision=tp_j / float(predicted[j]),
        recall=tp_j / total_pos,
        f1=float(f1[j]),
    )


def ot_f1_t(
    reports: Sequence[RiskReport],
    scenarios: Mapping[str, Scenario],
    horizon_s: float,
    cfg: MetricConfig = MetricConfig(),
) -> SweepResult:
    """OT-F1 restricted to the horizon_s seconds preceding each scenario's
    critical frame (inclusive). Scenarios without a critical frame are
    excluded; an empty restriction is an error."""
    restricted: list[Sample] = []
    for report in reports:
        scenario = scenarios.get(report.scenario_id)
        if scenario is None:
            raise ValueError(f"no scenario provided for report '{report.scenario_id}'")
        cf = scenario.critical_frame
        if cf is None:
            continue
        lo = cf - int(round(horizon_s * scenario.fps))
        for fs in report.scored_frames():
            if lo <= fs.frame <= cf:
                gt = scenario.gt_at(fs.frame)
                for cid, score in fs.scores.items():
                    restricted.append(
                        Sample(report.scenario_id, fs.frame, cid, score, cid in gt)
                    )
    if not restricted:
        raise ValueError(
            f"no samples within {horizon_s}s of any critical frame"
        )
    return sweep_optimal_f1(restricted)


def frame_f1(tp: int, fp: int, fn: int) -> float:
    """Per-frame F1 with the vacuous case pinned: a frame with nothing to
    find and nothing predicted is perfect, any other 0/0 resolves to 0."""
    if tp == 0 and fp == 0 and fn == 0:
        return 1.0
    denom = 2 * tp + fp + fn
    return 2.0 * tp / denom if denom else 0.0


def _pic_weights(length: int, cfg: MetricConfig) -> np.ndarray:
    # Align so the last entry (nearest the scenario end) carries weight 1.
    k = np.arange(length - 1, -1, -1, dtype=np.float64)
    return np.exp(-k / cfg.pic_t)


def pic(f1_per_frame: Sequence[float], cfg: MetricConfig = MetricConfig()) -> float:
    """Progressive increasing cost over a scenario's trailing frames:
    -sum_t e^(-(T-t)/T) * ln(F1_t) with F1 clamped to [pic_eps, 1]."""
    if len(f1_per_frame) == 0:
        return 0.0
    if len(f1_per_frame) > cfg.pic_t:
        raise ValueError(
            f"expected at most pic_t={cfg.pic_t} frames, got {len(f1_per_frame)}"
        )
    f1 = np.clip(np.asarray(f1_per_frame, dtype=np.float64), cfg.pic_eps, 1.0)
    return float(-np.sum(_pic_weights(len(f1), cfg) * np.log(f1)))


def pic_worst_case(length: int, cfg: MetricConfig = MetricConfig()) -> float:
    """PIC of a scenario stuck at the eps floor for `length` frames."""
    if length == 0:
        return 0.0
    return float(-math.log(cfg.pic_eps) * _pic_weights(length, cfg).sum())


def pic_normalized(
    raw_values: Sequence[float],
    cfg: MetricConfig = MetricConfig(),
    lengths: Optional[Sequence[int]] = None,
) -> float:
    """Total PIC scaled into [0, 1] by the worst case: every scenario at
    the eps floor for all of its evaluated frames."""
    if len(raw_values) == 0:
        raise ValueError("need at least one scenario PIC value")
    if lengths is None:
        lengths = [cfg.pic_t] * len(raw_values)
    if len(lengths) != len(raw_values):
        raise ValueError("lengths must align with raw_values")
    worst = sum(pic_worst_case(n, cfg) for n in lengths)
    if worst == 0.0:
        return 0.0
    return float(sum(raw_values) / worst)


@dataclass
class _MotCounts:
    fn: int = 0
    fp: int = 0
    idsw_p: int = 0
    idsw_n: int = 0
    gt_p: int = 0
    gt_n: int = 0

    def add(self, other: "_MotCounts") -> None:
        for name in ("fn", "fp", "idsw_p", "idsw_n", "gt_p", "gt_n"):
            setattr(self, name, getattr(self, name) + getattr(other, name))


def _mot_counts(
    decisions: Mapping[tuple[int, int], bool],
    gt: Mapping[int, AbstractSet[int]],
) -> _MotCounts:
    c = _MotCounts()
    for (frame, inst), dec in decisions.items():
        pos = inst in gt.get(frame, frozenset())
        if pos:
            c.gt_p += 1
            if not dec:
                c.fn += 1
        else:
            c.gt_n += 1
            if dec:
                c.fp += 1
        prev = decisions.get((frame - 1, inst))
        if prev is not None and prev != dec:
            if pos:
                c.idsw_p += 1
            else:
                c.idsw_n += 1
    return c


def _wmota_value(c: _MotCounts, cfg: MetricConfig) -> float:
    if cfg.wmota_weights is not None:
        w_p, w_n = cfg.wmota_weights
    else:
        total = c.gt_p + c.gt_n
        if total == 0:
            raise ValueError("wMOTA undefined without ground-truth samples")
        w_p = c.gt_n / total
        w_n = 1.0 - w_p
    denom = w_p * c.gt_p + w_n * c.gt_n
    if denom == 0.0:
        raise ValueError("wMOTA denominator is zero (single-class ground truth)")
    pm = w_p * (c.fn + c.idsw_p)
    nm = w_n * (c.fp + c.idsw_n)
    return 1.0 - (pm + nm) / denom


def wmota(
    decisions: Mapping[tuple[int, int], bool],
    gt: Mapping[int, AbstractSet[int]],
    cfg: MetricConfig = MetricConfig(),
) -> float:
    """Weighted MOTA over binary per-(frame, instance) decisions.

    Positive misses are false negatives plus prediction flips on
    ground-truth-positive instances present at consecutive frames; negative
    misses mirror that for false positives. Default weights balance the two
    class totals. 1.0 means no misses and no flips.
    """
    if not decisions:
        raise ValueError("wMOTA needs at least one decision")
    return _wmota_value(_mot_counts(decisions, gt), cfg)


@dataclass
class MetricSummary:
    optimal_threshold: float
    ot_precision: float
    ot_recall: float
    ot_f1: float
    degenerate_sweep: bool
    ot_f1_t: dict[float, float] = dataclass_field(default_factory=dict)
    pic_raw: float = 0.0
    pic_normalized: float = 0.0
    wmota: float = 0.0
    mean_latency_ms: Optional[float] = None
    n_scenarios: int = 0
    n_samples: int = 0


def evaluate(
    reports: Sequence[RiskReport],
    scenarios: Mapping[str, Scenario],
    cfg: MetricConfig = MetricConfig(),
) -> MetricSummary:
    """Pool every report and compute the full metric suite.

    The globally optimal threshold drives the decisions used by both wMOTA
    and PIC's per-frame F1, so the temporal metrics describe the same
    operating point the spatial ones report.
    """
    if not reports:
        raise ValueError("no reports to evaluate")
    samples = collect_samples(reports, scenarios)
    sweep = sweep_optimal_f1(samples)
    theta = sweep.threshold

    horizons: dict[float, float] = {}
    for h in cfg.ot_f1_horizons:
        horizons[h] = ot_f1_t(reports, scenarios, h, cfg).f1

    pic_raws: list[float] = []
    pic_lengths: list[int] = []
    mot = _MotCounts()
    latencies: list[float] = []
    for report in reports:
        scenario = scenarios[report.scenario_id]
        scored = report.scored_frames()
        f1s: list[float] = []
        decisions: dict[tuple[int, int], bool] = {}
        for fs in scored:
            gt = scenario.gt_at(fs.frame)
            tp = fp = fn = 0
            for cid, score in fs.scores.items():
                decided = score >= theta
                decisions[(fs.frame, cid)] = decided
                if decided and cid in gt:
                    tp += 1
                elif decided:
                    fp += 1
                elif cid in gt:
                    fn += 1
            f1s.append(frame_f1(tp, fp, fn))
            if fs.latency_ms is not None:
                latencies.append(fs.latency_ms)
        tail = f1s[-cfg.pic_t :]
        pic_raws.append(pic(tail, cfg))
        pic_lengths.append(len(tail))
        if decisions:
            mot.add(_mot_counts(decisions, scenario.gt_risk))

    return MetricSummary(
        optimal_threshold=sweep.threshold,
        ot_precision=sweep.precision,
        ot_recall=sweep.recall,
        ot_f1=sweep.f1,
        degenerate_sweep=sweep.degenerate,
        ot_f1_t=horizons,
        pic_raw=float(np.mean(pic_raws)) if pic_raws else 0.0,
        pic_normalized=pic_normalized(pic_raws, cfg, pic_lengths),
        wmota=_wmota_value(mot, cfg),
        mean_latency_ms=float(np.mean(latencies)) if latencies else None,
        n_scenarios=len(reports),
        n_samples=len(samples),
    )


def format_summary(summary: MetricSummary) -> str:
    """Fixed-width table in the usual reporting order, metrics as
    percentages except PIC (raw) and latency."""
    lat = (
        f"{summary.mean_latency_ms / 1000.0:.3f}s"
        if summary.mean_latency_ms is not None
        else "n/a"
    )
    headers = ["OT-P", "OT-R", "OT-F1", "PIC", "wMOTA", "Avg latency"]
    values = [
        f"{summary.ot_precision * 100:.1f}",
        f"{summary.ot_recall * 100:.1f}",
        f"{summary.ot_f1 * 100:.1f}",
        f"{summary.pic_raw:.2f}",
        f"{summary.wmota * 100:.1f}",
        lat,
    ]
    width = max(len(h) for h in headers) + 2
    lines = [
        "".join(h.rjust(width) for h in headers),
        "".join(v.rjust(width) for v in values),
    ]
    if summary.ot_f1_t:
        parts = [
            f"{h:g}s={f1 * 100:.1f}" for h, f1 in sorted(summary.ot_f1_t.items())
        ]
        lines.append("OT-F1-T: " + "  ".join(parts))
    lines.append(
        f"threshold={summary.optimal_threshold:.6g}"
        f"  PIC_norm={summary.pic_normalized:.4f}"
        f"  scenarios={summary.n_scenarios}  samples={summary.n_samples}"
        + ("  [degenerate sweep: no GT positives]" if summary.degenerate_sweep else "")
    )
    return "\n".join(lines)


def write_summary_csv(
    summary: MetricSummary, path: str | FsPath, cfg: MetricConfig = MetricConfig()
) -> None:
    header = [
        "ot_precision",
        "ot_recall",
        "ot_f1",
        "optimal_threshold",
        "degenerate_sweep",
    ]
    row: list[str] = [
        repr(summary.ot_precision),
        repr(summary.ot_recall),
        repr(summary.ot_f1),
        repr(summary.optimal_threshold),
        str(int(summary.degenerate_sweep)),
    ]
    for h in cfg.ot_f1_horizons:
        header.append(f"ot_f1_{h:g}s")
        row.append(repr(summary.ot_f1_t.get(h, float("nan"))))
    header += ["pic_raw", "pic_normalized", "wmota", "mean_latency_ms", "n_scenarios", "n_samples"]
    row += [
        repr(summary.pic_raw),
        repr(summary.pic_normalized),
        repr(summary.wmota),
        repr(summary.mean_latency_ms) if summary.mean_latency_ms is not None else "",
        str(summary.n_scenarios),
        str(summary.n_samples),
    ]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerow(row)
