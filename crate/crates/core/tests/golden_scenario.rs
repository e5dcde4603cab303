use phy_agents::agents::{Session, SessionConfig, StepStatus, Verdict};
use phy_agents::binding::{BindMethod, Binding};
use phy_agents::embedding::{build_index, HashingEmbedder};
use phy_agents::llm::ScriptedBackend;
use phy_agents::registry::Registry;
use phy_agents::scenario::Scenario;
use phy_agents::sim::shannon_mbps;

const SCENARIO: &str = include_str!("../scenarios/deeprx_golden.json");
const RULES: &str = include_str!("../scenarios/deeprx_golden.rules.json");

fn run() -> (String, String, Vec<phy_agents::agents::ExecutionReport>, Vec<phy_agents::agents::PlanTrace>) {
    let registry = Registry::shipped();
    let embedder = HashingEmbedder::default();
    let store = build_index(&registry, &embedder).unwrap();
    let backend = ScriptedBackend::from_json_str(RULES).unwrap();
    let scenario = Scenario::from_json_str(SCENARIO).unwrap();
    let mut session =
        Session::for_scenario(&registry, &store, &embedder, &backend, &scenario, SessionConfig::default()).unwrap();
    let reports = session.run(&scenario.events).unwrap();
    let json = serde_json::to_string_pretty(&reports).unwrap();
    (json, session.simulator().timeline_csv(), reports, session.traces().to_vec())
}

#[test]
fn golden_run_succeeds() {
    let (_, _, reports, traces) = run();
    assert_eq!(reports.len(), 1);
    let r = &reports[0];
    assert_eq!(r.verdict, Verdict::Success, "{r:#?}");
    let apis: Vec<_> = r.step_outcomes.iter().map(|o| o.api_id.clone().unwrap()).collect();
    assert_eq!(apis, ["estimate_csi", "assess_pa_nonlinearity", "enable_deeprx", "measure_throughput"]);
    assert!(r.step_outcomes.iter().all(|o| o.status == StepStatus::Ok));
    assert!((r.metrics_before.distortion_penalty_db - 10.0).abs() < 1e-9);
    assert!((r.metrics_after.distortion_penalty_db - 1.5).abs() < 1e-9);
    let baseline = shannon_mbps(100.0, r.metrics_after.effective_snr_db + 1.5);
    assert!(r.metrics_after.throughput_mbps >= 0.95 * baseline);
    assert!(r.summary.is_some());

    let deeprx = &traces[0].resolutions[2];
    let a = deeprx.get("estimated_channel").unwrap();
    assert_eq!(a.binding, Binding::Variable("CSI_matrix".into()));
    assert_eq!(a.method, BindMethod::Semantic);
}

#[test]
fn golden_run_is_byte_identical() {
    let (a, ta, _, _) = run();
    let (b, tb, _, _) = run();
    assert_eq!(a, b);
    assert_eq!(ta, tb);
}

