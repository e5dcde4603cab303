use std::cmp::Ordering;

use proptest::prelude::*;

use phy_agents::agents::grammar::{parse_requirements, render_requirements};
use phy_agents::agents::{should_replan, EnvironmentState, Modality, ReplanThresholds, TransmissionRequirements};
use phy_agents::binding::{resolve_parameters, Binding, ExecutionContext, REQUIREMENT_ALIASES};
use phy_agents::corpus::{generate_with, Paraphraser, TemplateSet};
use phy_agents::embedding::{gcs, EmbeddingVector, HashingEmbedder, StoreEntry, VectorStore};
use phy_agents::llm::{ScriptedBackend, ScriptedRule};
use phy_agents::registry::{parse_library, ApiDescriptor, Category, ParameterSpec, Registry};
use phy_agents::sim::{distortion_penalty, throughput_with, Mobility, SimEnvironment, ToyModel};
use phy_agents::value::{TypedValue, ValueKind};

fn vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, dim).prop_filter("non-zero", |v| v.iter().any(|x| x.abs() > 1e-3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gcs_bounded_symmetric_scale_invariant(a in vector(32), b in vector(32), k in 0.01f64..100.0) {
        let (va, vb) = (EmbeddingVector::new(a).unwrap(), EmbeddingVector::new(b).unwrap());
        let s = gcs(&va, &vb).unwrap();
        prop_assert!(s.abs() <= 1.0 + 1e-9);
        prop_assert_eq!(s.to_bits(), gcs(&vb, &va).unwrap().to_bits());
        prop_assert!((gcs(&va.scaled(k).unwrap(), &vb).unwrap() - s).abs() <= 1e-9);
        prop_assert!((gcs(&va, &va).unwrap() - 1.0).abs() <= 1e-9);
    }
}

// Small integer components make exact ties common.
fn tie_store() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, usize)> {
    (1usize..25).prop_flat_map(|n| {
        let comp = prop::collection::vec((-2i32..3).prop_map(f64::from), 4)
            .prop_filter("non-zero", |v| v.iter().any(|x| *x != 0.0));
        (prop::collection::vec(comp.clone(), n), comp, 1usize..30)
    })
}

proptest! {
    #[test]
    fn nearest_matches_brute_force((rows, query, k) in tie_store()) {
        let entries: Vec<StoreEntry> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| StoreEntry { api_id: format!("api_{i:03}"), vector: EmbeddingVector::new(r.clone()).unwrap() })
            .collect();
        let store = VectorStore::from_entries(4, "test", entries).unwrap();
        let q = EmbeddingVector::new(query).unwrap();
        let got: Vec<(String, u64)> =
            store.nearest(&q, k).unwrap().into_iter().map(|s| (s.api_id, s.score.to_bits())).collect();

        let mut all: Vec<(String, f64)> = store
            .entries()
            .iter()
            .map(|e| (e.api_id.clone(), gcs(&e.vector, &q).unwrap()))
            .collect();
        all.sort_by(|a, b| match b.1.partial_cmp(&a.1).unwrap() {
            Ordering::Equal => a.0.cmp(&b.0),
            o => o,
        });
        all.truncate(k);
        let want: Vec<(String, u64)> = all.into_iter().map(|(id, s)| (id, s.to_bits())).collect();
        prop_assert_eq!(got, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn registry_round_trips(picks in prop::collection::btree_set(0usize..200, 1..40)) {
        let shipped = Registry::shipped();
        let all: Vec<&ApiDescriptor> = shipped.iter().collect();
        let chosen: Vec<ApiDescriptor> = picks.iter().map(|i| all[*i].clone()).collect();
        let sub = Registry::from_descriptors("t-1", chosen).unwrap();
        let back = parse_library(&sub.to_json()).unwrap();
        prop_assert_eq!(&back, &sub);
        prop_assert_eq!(back.to_json(), sub.to_json());
    }
}

fn kind() -> impl Strategy<Value = ValueKind> {
    prop::sample::select(ValueKind::ALL.to_vec())
}

fn value_of(kind: ValueKind) -> TypedValue {
    match kind {
        ValueKind::Scalar => TypedValue::scalar(1.0),
        ValueKind::Matrix => TypedValue::matrix(1, 1, vec![1.0]).unwrap(),
        ValueKind::Text => TypedValue::text("x"),
        ValueKind::Boolean => TypedValue::boolean(true),
        ValueKind::Enum => TypedValue::enumeration("a"),
    }
}

const WORDS: [&str; 8] = ["channel", "power", "matrix", "estimate", "beam", "rate", "target", "noise"];

fn words() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS.to_vec()), 1..4).prop_map(|w| w.join(" "))
}

fn ident() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS.to_vec()), 1..3).prop_map(|w| w.join("_"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn binding_never_fabricates(
        vars in prop::collection::btree_map(ident(), (kind(), words()), 0..6),
        params in prop::collection::btree_map(ident(), (kind(), words(), any::<bool>()), 1..5),
        answer in prop_oneof![ident(), Just("ghost".to_owned()), Just("NONE".to_owned())],
        use_backend in any::<bool>(),
    ) {
        let mut ctx = ExecutionContext::new();
        for (name, (k, d)) in &vars {
            ctx.insert_task_variable(name.clone(), d.clone(), value_of(*k));
        }
        let descriptor = ApiDescriptor {
            id: "probe".into(),
            name: "Probe".into(),
            category: Category::Perception,
            instruction: "Probe the context.".into(),
            parameters: params
                .iter()
                .map(|(n, (k, d, req))| ParameterSpec {
                    name: n.clone(),
                    description: d.clone(),
                    value_kind: *k,
                    required: *req,
                    default: None,
                    units: None,
                })
                .collect(),
            outputs: vec![],
        };
        let req = TransmissionRequirements {
            throughput_target: 10.0,
            latency_budget: 5.0,
            reliability_target: 0.99,
            modality: Modality::Data,
            notes: String::new(),
        };
        let backend = ScriptedBackend::new(vec![ScriptedRule::contains("PARAMETER:", answer)]);
        let embedder = HashingEmbedder::default();
        let b: Option<&dyn phy_agents::llm::LlmBackend> = if use_backend { Some(&backend) } else { None };
        if let Ok(res) = resolve_parameters(b, &descriptor, &ctx, Some(&req), 0.5, &embedder) {
            for a in &res.assignments {
                let spec = descriptor.parameter(&a.param_name).unwrap();
                prop_assert!((0.0..=1.0).contains(&a.confidence));
                match &a.binding {
                    Binding::Variable(n) => {
                        let v = ctx.get(n);
                        prop_assert!(v.is_some(), "fabricated variable {}", n);
                        prop_assert_eq!(v.unwrap().value.kind(), spec.value_kind);
                    }
                    Binding::Requirement(k) => {
                        prop_assert!(REQUIREMENT_ALIASES.iter().any(|(key, _)| key == k));
                    }
                    Binding::Default(v) => prop_assert_eq!(v.kind(), spec.value_kind),
                }
            }
            for p in descriptor.parameters.iter().filter(|p| p.required) {
                prop_assert!(res.get(&p.name).is_some());
            }
        }
    }
}

fn state(snr: f64, temp: f64, mobility: Mobility) -> EnvironmentState {
    EnvironmentState { snr_db: snr, pa_temperature_c: temp, ue_count: 1, mobility, timestamp: 0.0 }
}

proptest! {
    #[test]
    fn replan_is_monotone(
        snr in -10.0f64..40.0, temp in 0.0f64..100.0,
        ds in -20.0f64..20.0, dt in -40.0f64..40.0, grow in 1.0f64..3.0,
    ) {
        let t = ReplanThresholds::default();
        let prev = state(snr, temp, Mobility::Static);
        let near = state(snr + ds, temp + dt, Mobility::Static);
        let far = state(snr + ds * grow, temp + dt * grow, Mobility::Static);
        if should_replan(&prev, &near, &t) {
            prop_assert!(should_replan(&prev, &far, &t));
        }
        if ds.abs() < t.snr_db && dt.abs() < t.temperature_c {
            prop_assert!(!should_replan(&prev, &near, &t));
        }
        prop_assert!(should_replan(&prev, &state(snr, temp, Mobility::Vehicular), &t));
    }

    #[test]
    fn heat_harms_and_compensation_helps(snr in -5.0f64..40.0, t1 in -40.0f64..150.0, t2 in -40.0f64..150.0) {
        let m = ToyModel::default();
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let env = |t: f64, comp: bool| {
            let mut e = SimEnvironment::new(snr, t, 1);
            e.compensation_active = comp;
            e
        };
        for comp in [false, true] {
            let (a, b) = (env(lo, comp), env(hi, comp));
            prop_assert!(distortion_penalty(&a, m.alpha_db_per_c, m.beta) <= distortion_penalty(&b, m.alpha_db_per_c, m.beta));
            let ta = throughput_with(&a, m.bandwidth_mhz, m.alpha_db_per_c, m.beta).throughput_mbps;
            let tb = throughput_with(&b, m.bandwidth_mhz, m.alpha_db_per_c, m.beta).throughput_mbps;
            prop_assert!(ta >= tb);
        }
        let (off, on) = (env(hi, false), env(hi, true));
        prop_assert!(distortion_penalty(&on, m.alpha_db_per_c, m.beta) <= distortion_penalty(&off, m.alpha_db_per_c, m.beta));
        prop_assert!(
            throughput_with(&on, m.bandwidth_mhz, m.alpha_db_per_c, m.beta).throughput_mbps
                >= throughput_with(&off, m.bandwidth_mhz, m.alpha_db_per_c, m.beta).throughput_mbps
        );
    }

    #[test]
    fn requirements_round_trip(
        tp in 0.1f64..1e4, lat in 0.1f64..1e3, rel in 0.01f64..1.0,
        modality in prop::sample::select(vec![Modality::Data, Modality::Sensing, Modality::Joint]),
        notes in "[a-z][a-z ]{0,20}[a-z]",
    ) {
        let r = TransmissionRequirements { throughput_target: tp, latency_budget: lat, reliability_target: rel, modality, notes };
        prop_assert_eq!(parse_requirements(&render_requirements(&r)).unwrap(), r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn corpus_parallel_equals_sequential(seed in any::<u64>(), n in 1usize..300) {
        let reg = Registry::shipped();
        let (t, p) = (TemplateSet::shipped(), Paraphraser::shipped());
        let seq = generate_with(&reg, &t, &p, n, seed, false).unwrap();
        let par = generate_with(&reg, &t, &p, n, seed, true).unwrap();
        prop_assert_eq!(seq, par);
    }
}
