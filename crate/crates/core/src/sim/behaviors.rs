//! Executable behaviors for the tool library.
//!
//! A handful of APIs touch the toy model (channel estimation, distortion and
//! temperature monitoring, neural transceiver toggles, throughput
//! measurement). Every other API gets a generic behavior that leaves the
//! environment alone and synthesizes outputs of the declared kinds from a
//! hash of the API id, so each registry entry is executable.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Outputs, SimEnvironment, SimError, ToyModel};
use crate::registry::{OutputSpec, Registry};
use crate::util::fnv1a64;
use crate::value::{TypedValue, ValueKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Effect {
    Generic,
    EstimateCsi,
    AssessDistortion,
    /// Turns PA compensation on or off.
    Compensation(bool),
    MeasureThroughput,
    MeasureSinr,
    MonitorTemperature,
    CompensationGain,
    ClassifyMobility,
    SetTxPower,
}

impl Effect {
    fn for_id(api_id: &str) -> Effect {
        match api_id {
            "estimate_csi" => Effect::EstimateCsi,
            "assess_pa_nonlinearity" => Effect::AssessDistortion,
            "enable_deeprx" | "enable_deeptx" | "enable_dpd" | "run_neural_dpd" => Effect::Compensation(true),
            "disable_deeprx" | "disable_deeptx" | "disable_dpd" => Effect::Compensation(false),
            "measure_throughput" => Effect::MeasureThroughput,
            "measure_sinr" => Effect::MeasureSinr,
            "monitor_pa_temperature" => Effect::MonitorTemperature,
            "report_compensation_gain" => Effect::CompensationGain,
            "classify_mobility" => Effect::ClassifyMobility,
            "set_tx_power" => Effect::SetTxPower,
            _ => Effect::Generic,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Behavior {
    api_id: String,
    outputs: Vec<OutputSpec>,
    effect: Effect,
}

impl Behavior {
    pub fn api_id(&self) -> &str {
        &self.api_id
    }

    pub fn effect(&self) -> Effect {
        self.effect
    }

    /// Pure effect: `(params, env) -> (outputs, next env)`.
    pub fn run(
        &self,
        params: &BTreeMap<String, TypedValue>,
        env: &SimEnvironment,
        model: &ToyModel,
    ) -> Result<(Outputs, SimEnvironment), SimError> {
        for (name, value) in params {
            if !value.is_well_formed() {
                return Err(self.reject(format!("parameter `{name}` is malformed")));
            }
        }
        let mut next = env.clone();
        let mut special: Option<TypedValue> = None;
        match self.effect {
            Effect::Generic => {}
            Effect::EstimateCsi => {
                let mut rng = self.rng(env);
                // Gain per entry scales with the linear SNR amplitude.
                let amp = 10f64.powf(env.snr_db / 20.0).min(1e3) / 10.0;
                let data = (0..16).map(|_| amp * rng.random_range(-1.0..1.0)).collect();
                special = TypedValue::matrix(4, 4, data);
            }
            Effect::AssessDistortion => special = Some(TypedValue::scalar(model.distortion_penalty(env))),
            Effect::Compensation(on) => {
                next.compensation_active = on;
                special = Some(TypedValue::enumeration(if on { "enabled" } else { "disabled" }));
            }
            Effect::MeasureThroughput => special = Some(TypedValue::scalar(model.metrics(env).throughput_mbps)),
            Effect::MeasureSinr => special = Some(TypedValue::scalar(model.metrics(env).effective_snr_db)),
            Effect::MonitorTemperature => special = Some(TypedValue::scalar(env.pa_temperature_c)),
            Effect::CompensationGain => {
                let raw = ToyModel { beta: 0.0, ..*model }.distortion_penalty(env);
                special = Some(TypedValue::scalar(raw - model.distortion_penalty(env)));
            }
            Effect::ClassifyMobility => special = Some(TypedValue::enumeration(env.mobility.as_str())),
            Effect::SetTxPower => {
                let power = params.get("power_dbm").and_then(TypedValue::as_scalar);
                match power {
                    Some(p) if (-30.0..=46.0).contains(&p) => {}
                    Some(p) => return Err(self.reject(format!("power_dbm {p} outside [-30, 46]"))),
                    None => return Err(self.reject("power_dbm missing".into())),
                }
            }
        }

        let mut outputs = Outputs::new();
        for (i, spec) in self.outputs.iter().enumerate() {
            let value = match (&special, i) {
                (Some(v), 0) if v.kind() == spec.value_kind => v.clone(),
                _ => self.synthesize(spec),
            };
            outputs.insert(spec.name.clone(), value);
        }
        Ok((outputs, next))
    }

    fn reject(&self, message: String) -> SimError {
        SimError::BehaviorError { api_id: self.api_id.clone(), message }
    }

    fn rng(&self, env: &SimEnvironment) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(env.seed ^ fnv1a64(self.api_id.as_bytes()));
        rng.set_stream(env.tick);
        rng
    }

    /// Placeholder value of the declared kind, a pure function of the API id
    /// and output name.
    fn synthesize(&self, spec: &OutputSpec) -> TypedValue {
        let h = fnv1a64(format!("{}/{}", self.api_id, spec.name).as_bytes());
        let unit = (h >> 11) as f64 / (1u64 << 53) as f64;
        match spec.value_kind {
            ValueKind::Scalar => TypedValue::scalar((unit * 100_000.0).round() / 1000.0),
            ValueKind::Matrix => TypedValue::matrix(2, 2, vec![unit, 1.0 - unit, 1.0 - unit, unit])
                .expect("2x2 shape"),
            ValueKind::Text => TypedValue::text(format!("{}:{}", self.api_id, spec.name)),
            ValueKind::Boolean => TypedValue::boolean(h & 1 == 0),
            ValueKind::Enum => TypedValue::enumeration("ok"),
        }
    }
}

/// Exactly one behavior per registry API id.
#[derive(Clone, Debug, Default)]
pub struct BehaviorTable {
    by_id: BTreeMap<String, Behavior>,
}

impl BehaviorTable {
    pub fn for_registry(registry: &Registry) -> Self {
        let by_id = registry
            .iter()
            .map(|d| {
                let b = Behavior { api_id: d.id.clone(), outputs: d.outputs.clone(), effect: Effect::for_id(&d.id) };
                (d.id.clone(), b)
            })
            .collect();
        BehaviorTable { by_id }
    }

    pub fn get(&self, api_id: &str) -> Option<&Behavior> {
        self.by_id.get(api_id)
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.by_id.keys().map(String::as_str)
    }
}
