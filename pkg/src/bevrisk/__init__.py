"""Potential-field scene affordance and counterfactual risk scoring on
bird's-eye-view semantic grids."""

from .edt import distance_transform, squared_distance_transform
from .fields import (
    FieldConstants,
    PotentialField,
    remove_instance,
    render_attractive,
    render_field,
    render_repulsive,
    source_distances,
    target_cell,
)
from .generator import GeneratorConfig, ScenarioKind, generate, scenario_name
from .metrics import (
    MetricConfig,
    MetricSummary,
    Sample,
    SweepResult,
    collect_samples,
    evaluate,
    format_summary,
    ot_f1_t,
    pic,
    pic_normalized,
    pic_worst_case,
    sweep_optimal_f1,
    wmota,
    write_summary_csv,
)
from .planner import Path, Terminal, ade, fde, plan
from .risk import (
    BehaviorPredictor,
    CandidatePool,
    FrameRender,
    FrameScores,
    RiskMethod,
    RiskReport,
    RuleBasedPredictor,
    read_report_csv,
    render_frame,
    rule_predict,
    run_pipeline,
    score_bcp,
    score_oade,
    score_ofde,
    write_report_csv,
)
from .scenario_io import (
    ScenarioFormatError,
    read_manifest,
    read_scenario,
    write_manifest,
    write_scenario,
)
from .scene import (
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

__version__ = "0.1.0"
