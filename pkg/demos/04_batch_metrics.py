"""Batch evaluation: score a mixed scenario set and compute the metrics.

Generates a few scenarios of each kind, scores them with the BCP-style
counterfactual pipeline, and evaluates optimal-threshold F1, the windowed
OT-F1-T variants, progressive increasing cost, and weighted MOTA.
"""

from bevrisk import (
    GeneratorConfig,
    MetricConfig,
    RuleBasedPredictor,
    ScenarioKind,
    evaluate,
    format_summary,
    generate,
    run_pipeline,
    scenario_name,
)

kinds = [
    ScenarioKind.BLOCKING_PEDESTRIAN,
    ScenarioKind.BLOCKING_VEHICLE,
    ScenarioKind.OPPOSITE_LANE,
    ScenarioKind.BOXED_IN,
    ScenarioKind.JAYWALKER,
]
seeds = range(3)

predictor = RuleBasedPredictor()
scenarios = {}
reports = []
for kind in kinds:
    for seed in seeds:
        sid = scenario_name(kind, seed)
        scenario = generate(GeneratorConfig(seed=seed, kind=kind))
        scenarios[sid] = scenario
        reports.append(run_pipeline(scenario, "bcp", predictor, scenario_id=sid))
        positives = sum(len(v) for v in scenario.gt_risk.values())
        print(f"scored {sid}: {positives} GT-positive samples")

summary = evaluate(reports, scenarios, MetricConfig())
print()
print(format_summary(summary))
print()
print("reading the table: the opposite-lane vehicles all score exactly 0, so")
print("the optimal threshold separates them from blocking agents cleanly;")
print("residual misses come from early frames where a blocker is still far")
print("and its counterfactual barely moves the field along the plan.")
