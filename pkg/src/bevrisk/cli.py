"""Command-line front door: gen | render | score | eval.

Exit codes: 0 success, 2 usage error (argparse), 1 runtime error. Every
artifact is byte-reproducible from identical inputs and seed; wall-clock
latency is therefore kept out of the CSVs unless --timing is passed, and
always summarized on stdout instead.

Constants can come from a JSON config file (--config) with optional
sections "fields", "predictor", "metrics", "generator"; explicit flags win
over the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from .fields import FieldConstants, render_field
from .generator import GeneratorConfig, ScenarioKind, generate, scenario_name
from .images import field_to_pgm16, overlay_image, write_pgm16, write_ppm8
from .metrics import MetricConfig, evaluate, format_summary, write_summary_csv
from .planner import plan
from .risk import (
    RiskMethod,
    RuleBasedPredictor,
    read_report_csv,
    run_pipeline,
    write_report_csv,
)
from .scenario_io import read_scenario, write_manifest, write_scenario


@dataclass(frozen=True)
class RunManifest:
    """Record of one scoring run, written next to its outputs."""

    inputs: tuple[str, ...]
    method: str
    constants: dict
    predictor: dict
    workers: int
    out_dir: str
    seed: int | None

    def write(self, path: Path) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    return doc


def _merge(section: dict, flag_values: dict) -> dict:
    out = dict(section)
    out.update({k: v for k, v in flag_values.items() if v is not None})
    return out


def _field_constants(args, cfg: dict) -> FieldConstants:
    merged = _merge(
        cfg.get("fields", {}),
        {
            "k_roadline": args.k_roadline,
            "k_dynamic": args.k_dynamic,
            "k_other": args.k_other,
            "k_attractive": args.k_attractive,
            "d_min": args.d_min,
        },
    )
    return FieldConstants(**merged)


def _predictor(args, cfg: dict) -> RuleBasedPredictor:
    merged = _merge(
        cfg.get("predictor", {}),
        {
            "saturation": getattr(args, "saturation", None),
            "lookahead": getattr(args, "lookahead", None),
            "window": getattr(args, "window", None),
        },
    )
    return RuleBasedPredictor(**merged)


def _metric_config(args, cfg: dict) -> MetricConfig:
    weights = None
    if getattr(args, "w_pos", None) is not None or getattr(args, "w_neg", None) is not None:
        if args.w_pos is None or args.w_neg is None:
            raise ValueError("--w-pos and --w-neg must be given together")
        weights = (args.w_pos, args.w_neg)
    merged = _merge(
        cfg.get("metrics", {}),
        {
            "pic_t": getattr(args, "pic_t", None),
            "pic_eps": getattr(args, "pic_eps", None),
            "wmota_weights": weights,
            "ot_f1_horizons": (
                tuple(args.horizons) if getattr(args, "horizons", None) else None
            ),
        },
    )
    if "wmota_weights" in merged and merged["wmota_weights"] is not None:
        merged["wmota_weights"] = tuple(merged["wmota_weights"])
    if "ot_f1_horizons" in merged:
        merged["ot_f1_horizons"] = tuple(merged["ot_f1_horizons"])
    return MetricConfig(**merged)


def _add_field_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k-roadline", type=float, dest="k_roadline")
    p.add_argument("--k-dynamic", type=float, dest="k_dynamic")
    p.add_argument("--k-other", type=float, dest="k_other")
    p.add_argument("--k-attractive", type=float, dest="k_attractive")
    p.add_argument("--d-min", type=float, dest="d_min")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--seed", type=int, help="base seed (gen only)")
    p.add_argument("--workers", type=int, default=1, help="candidate-parallel workers")
    p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bevrisk",
        description="Potential-field risk-object identification on BEV grids",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate synthetic scenarios")
    _add_common(p_gen)
    p_gen.add_argument(
        "--kind",
        required=True,
        choices=[k.value for k in ScenarioKind] + ["all"],
        help="scenario kind, or 'all' for one of each",
    )
    p_gen.add_argument("--count", type=int, default=1, help="scenarios per kind")
    p_gen.add_argument("--frames", type=int, help="frames per scenario")
    p_gen.add_argument("--lane-width", type=int, dest="lane_width")
    p_gen.add_argument("--jitter", type=float)

    p_render = sub.add_parser("render", help="render field images for frames")
    _add_common(p_render)
    p_render.add_argument("--scenario", required=True)
    p_render.add_argument("--frame", type=int, nargs="+", required=True)
    _add_field_flags(p_render)

    p_score = sub.add_parser("score", help="run counterfactual risk scoring")
    _add_common(p_score)
    p_score.add_argument("--scenario", nargs="+", required=True)
    p_score.add_argument(
        "--method", required=True, choices=[m.value for m in RiskMethod]
    )
    p_score.add_argument("--saturation", type=float)
    p_score.add_argument("--lookahead", type=int)
    p_score.add_argument("--window", type=int)
    p_score.add_argument(
        "--timing",
        action="store_true",
        help="embed per-frame latency in the CSV (breaks byte reproducibility)",
    )
    _add_field_flags(p_score)

    p_eval = sub.add_parser("eval", help="evaluate reports against scenarios")
    _add_common(p_eval)
    p_eval.add_argument("--reports", nargs="+", required=True)
    p_eval.add_argument("--scenarios", nargs="+", required=True)
    p_eval.add_argument("--pic-t", type=int, dest="pic_t")
    p_eval.add_argument("--pic-eps", type=float, dest="pic_eps")
    p_eval.add_argument("--w-pos", type=float, dest="w_pos")
    p_eval.add_argument("--w-neg", type=float, dest="w_neg")
    p_eval.add_argument("--horizons", type=float, nargs="+")
    return parser


def cmd_gen(args) -> int:
    cfg = _load_config(args.config)
    gen_cfg = cfg.get("generator", {})
    kinds = (
        list(ScenarioKind) if args.kind == "all" else [ScenarioKind(args.kind)]
    )
    base_seed = args.seed if args.seed is not None else 0
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for kind in kinds:
        for i in range(args.count):
            seed = base_seed + i
            config = GeneratorConfig(
                seed=seed,
                kind=kind,
                frame_count=args.frames or gen_cfg.get("frame_count", 40),
                lane_width=args.lane_width or gen_cfg.get("lane_width", 9),
                jitter=args.jitter if args.jitter is not None else gen_cfg.get("jitter", 0.0),
            )
            scenario = generate(config)
            name = scenario_name(kind, seed)
            path = out / f"{name}.json"
            write_scenario(scenario, path)
            entries.append({"kind": kind.value, "seed": seed, "path": path.name})
            print(
                f"{path}  frames={len(scenario.frames)}  "
                f"tracklets={len(scenario.tracklets)}  "
                f"critical={scenario.critical_frame}"
            )
    write_manifest(entries, out / "manifest.json")
    print(f"{len(entries)} scenario(s) -> {out / 'manifest.json'}")
    return 0


def cmd_render(args) -> int:
    cfg = _load_config(args.config)
    constants = _field_constants(args, cfg)
    scenario = read_scenario(args.scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.scenario).stem
    for f in args.frame:
        if not 0 <= f < len(scenario.frames):
            raise ValueError(
                f"frame {f} out of range (scenario has {len(scenario.frames)} frames)"
            )
        frame = scenario.frames[f]
        field = render_field(frame.grid, frame.target, constants)
        path = plan(field, frame.ego, frame.target)
        pgm_path = out / f"{stem}-f{f:03d}.pgm"
        ppm_path = out / f"{stem}-f{f:03d}.ppm"
        write_pgm16(field_to_pgm16(field, constants.k_dynamic), pgm_path)
        write_ppm8(
            overlay_image(field, frame.grid, path.waypoints, frame.target, constants.k_dynamic),
            ppm_path,
        )
        print(f"{pgm_path}  {ppm_path}  plan={path.terminal.value}({len(path)} wps)")
    return 0


def cmd_score(args) -> int:
    cfg = _load_config(args.config)
    constants = _field_constants(args, cfg)
    predictor = _predictor(args, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for spath in args.scenario:
        scenario = read_scenario(spath)
        sid = Path(spath).stem
        report = run_pipeline(
            scenario,
            args.method,
            predictor,
            constants,
            scenario_id=sid,
            workers=args.workers,
        )
        csv_path = out / f"{sid}.{args.method}.csv"
        write_report_csv([report], csv_path, include_latency=args.timing)
        lats = [f.latency_ms for f in report.scored_frames() if f.latency_ms is not None]
        mean_ms = sum(lats) / len(lats) if lats else 0.0
        print(
            f"{csv_path}  frames_scored={len(report.scored_frames())}  "
            f"mean_latency={mean_ms:.1f}ms"
        )
    RunManifest(
        inputs=tuple(str(p) for p in args.scenario),
        method=args.method,
        constants=asdict(constants),
        predictor=asdict(predictor),
        workers=args.workers,
        out_dir=str(out),
        seed=args.seed,
    ).write(out / "run_manifest.json")
    return 0


def cmd_eval(args) -> int:
    cfg = _load_config(args.config)
    metric_cfg = _metric_config(args, cfg)
    reports = []
    for rpath in args.reports:
        reports.extend(read_report_csv(rpath))
    if not reports:
        raise ValueError("no reports found in the given CSV files")
    scenarios = {Path(p).stem: read_scenario(p) for p in args.scenarios}
    for report in reports:
        if report.scenario_id not in scenarios:
            raise ValueError(
                f"report references scenario '{report.scenario_id}' but no such "
                f"scenario file was given"
            )
    summary = evaluate(reports, scenarios, metric_cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_summary_csv(summary, out / "metrics.csv", metric_cfg)
    print(format_summary(summary))
    print(f"-> {out / 'metrics.csv'}")
    return 0


_COMMANDS = {"gen": cmd_gen, "render": cmd_render, "score": cmd_score, "eval": cmd_eval}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
