"""Counterfactual risk scoring on a generated crossing-pedestrian scene.

One scenario, three scorers. Each removes one tracklet at a time from the
recent field window and measures how the response changes: the stop-score
delta (BCP-style), and the average / final displacement between plans
(OADE / OFDE).
"""

from bevrisk import (
    GeneratorConfig,
    RuleBasedPredictor,
    ScenarioKind,
    generate,
    run_pipeline,
)

scenario = generate(GeneratorConfig(seed=7, kind=ScenarioKind.BLOCKING_PEDESTRIAN))
print(
    f"blocking-pedestrian seed 7: {len(scenario.frames)} frames, "
    f"{len(scenario.tracklets)} tracklets "
    f"(1 = crossing pedestrian, 2 = parked car off-road), "
    f"critical frame {scenario.critical_frame}"
)

predictor = RuleBasedPredictor()
reports = {
    method: run_pipeline(scenario, method, predictor, scenario_id="bp-7")
    for method in ("bcp", "oade", "ofde")
}

print("\nframe  gt_risk   s_orig   bcp(ped, car)      oade(ped)  ofde(ped)")
for fs_bcp, fs_oade, fs_ofde in zip(
    reports["bcp"].scored_frames(),
    reports["oade"].scored_frames(),
    reports["ofde"].scored_frames(),
):
    f = fs_bcp.frame
    gt = ",".join(str(i) for i in sorted(scenario.gt_at(f))) or "-"
    if f % 4 == 0 or f == scenario.critical_frame:
        mark = " <- critical" if f == scenario.critical_frame else ""
        print(
            f"{f:5d}  {gt:>7s}  {fs_bcp.s_orig:7.3f}  "
            f"({fs_bcp.scores[1]:6.3f}, {fs_bcp.scores[2]:6.3f})    "
            f"{fs_oade.scores[1]:9.3f}  {fs_ofde.scores[1]:9.3f}{mark}"
        )

lat = [fs.latency_ms for fs in reports["bcp"].scored_frames()]
print(f"\nper-frame BCP latency: median {sorted(lat)[len(lat) // 2]:.1f} ms")
print("the parked car's BCP delta is exactly 0.0 at every frame: removing it")
print("never changes the field anywhere the planner looks.")
print("with this seed the pedestrian pins the plan in a local minimum, so the")
print("stalled path is a prefix of the counterfactual one: truncated OADE")
print("reads 0 while OFDE carries the endpoint gap (and BCP the stop delta).")
