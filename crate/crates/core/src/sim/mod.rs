//! Deterministic mock of a RAN physical layer.
//!
//! The environment carries SNR, power-amplifier temperature and a
//! compensation flag (neural transceiver active or not). Temperature follows
//! scenario ramp profiles, SNR follows a seeded bounded random walk, and a
//! toy model turns the state into throughput:
//!
//! ```text
//! penalty_db    = alpha * max(0, T - T_nominal) * (1 - beta if compensated else 1)
//! effective_snr = snr_db - penalty_db
//! throughput    = B * log2(1 + 10^(effective_snr / 10))      [Mbps, B in MHz]
//! ```
//!
//! Every registry API has exactly one behavior, see [`behaviors`].

pub mod behaviors;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::registry::Registry;
use crate::util::fmt_sig;
use crate::value::TypedValue;

pub use behaviors::{Behavior, BehaviorTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mobility {
    Static,
    Pedestrian,
    Vehicular,
}

impl Mobility {
    pub fn as_str(self) -> &'static str {
        match self {
            Mobility::Static => "static",
            Mobility::Pedestrian => "pedestrian",
            Mobility::Vehicular => "vehicular",
        }
    }
}

/// Full simulator state. All transitions are pure functions of this state,
/// the seed and the inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimEnvironment {
    pub snr_db: f64,
    pub pa_temperature_c: f64,
    pub temp_nominal_c: f64,
    pub ue_count: u32,
    pub mobility: Mobility,
    pub compensation_active: bool,
    pub seed: u64,
    /// Simulation time in seconds.
    pub clock: f64,
    /// Ticks elapsed; selects the random stream of the next tick.
    pub tick: u64,
}

impl SimEnvironment {
    pub fn new(snr_db: f64, pa_temperature_c: f64, seed: u64) -> Self {
        SimEnvironment {
            snr_db,
            pa_temperature_c,
            temp_nominal_c: 45.0,
            ue_count: 1,
            mobility: Mobility::Static,
            compensation_active: false,
            seed,
            clock: 0.0,
            tick: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(-40.0..=150.0).contains(&self.pa_temperature_c) {
            return Err(SimError::InvalidEnvironment(format!(
                "PA temperature {} outside [-40, 150]",
                self.pa_temperature_c
            )));
        }
        if !self.snr_db.is_finite() || !self.temp_nominal_c.is_finite() || !self.clock.is_finite() {
            return Err(SimError::InvalidEnvironment("non-finite field".into()));
        }
        Ok(())
    }
}

/// Constants of the toy throughput and distortion model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToyModel {
    /// Distortion growth per degree above nominal, dB/°C.
    pub alpha_db_per_c: f64,
    /// Fraction of the distortion removed while compensation is active.
    pub beta: f64,
    pub bandwidth_mhz: f64,
}

impl Default for ToyModel {
    fn default() -> Self {
        ToyModel { alpha_db_per_c: 0.2, beta: 0.85, bandwidth_mhz: 100.0 }
    }
}

impl ToyModel {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.alpha_db_per_c >= 0.0) || !(0.0..=1.0).contains(&self.beta) || !(self.bandwidth_mhz > 0.0) {
            return Err(SimError::InvalidEnvironment(format!("invalid model constants {self:?}")));
        }
        Ok(())
    }

    pub fn distortion_penalty(&self, env: &SimEnvironment) -> f64 {
        distortion_penalty(env, self.alpha_db_per_c, self.beta)
    }

    pub fn metrics(&self, env: &SimEnvironment) -> Metrics {
        throughput_with(env, self.bandwidth_mhz, self.alpha_db_per_c, self.beta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub throughput_mbps: f64,
    pub effective_snr_db: f64,
    pub distortion_penalty_db: f64,
}

/// Power-amplifier distortion penalty in dB.
pub fn distortion_penalty(env: &SimEnvironment, alpha: f64, beta: f64) -> f64 {
    let raw = alpha * (env.pa_temperature_c - env.temp_nominal_c).max(0.0);
    if env.compensation_active {
        raw * (1.0 - beta)
    } else {
        raw
    }
}

/// Shannon-style throughput with the default distortion constants.
pub fn throughput(env: &SimEnvironment, bandwidth_mhz: f64) -> Metrics {
    let m = ToyModel::default();
    throughput_with(env, bandwidth_mhz, m.alpha_db_per_c, m.beta)
}

pub fn throughput_with(env: &SimEnvironment, bandwidth_mhz: f64, alpha: f64, beta: f64) -> Metrics {
    let penalty = distortion_penalty(env, alpha, beta);
    let effective = env.snr_db - penalty;
    Metrics {
        throughput_mbps: shannon_mbps(bandwidth_mhz, effective),
        effective_snr_db: effective,
        distortion_penalty_db: penalty,
    }
}

/// `B log2(1 + 10^(snr/10))`.
pub fn shannon_mbps(bandwidth_mhz: f64, snr_db: f64) -> f64 {
    bandwidth_mhz * (10f64.powf(snr_db / 10.0)).ln_1p() / std::f64::consts::LN_2
}

/// Linear temperature change of `rate` °C/s over `[start_s, end_s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampProfile {
    pub start_s: f64,
    pub end_s: f64,
    pub rate_c_per_s: f64,
}

/// Bounded random walk on SNR: each tick moves by a uniform amount in
/// `[-step_db, step_db]`, clamped to `[min_db, max_db]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrWalk {
    pub step_db: f64,
    pub min_db: f64,
    pub max_db: f64,
}

impl Default for SnrWalk {
    fn default() -> Self {
        SnrWalk { step_db: 0.0, min_db: -50.0, max_db: 60.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Dynamics {
    pub tick_s: f64,
    pub ramps: Vec<RampProfile>,
    pub snr_walk: SnrWalk,
}

impl Default for Dynamics {
    fn default() -> Self {
        Dynamics { tick_s: 1.0, ramps: Vec::new(), snr_walk: SnrWalk::default() }
    }
}

impl Dynamics {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.tick_s > 0.0) {
            return Err(SimError::InvalidEnvironment("tick_s must be positive".into()));
        }
        let w = &self.snr_walk;
        if !(0.0..=1.0).contains(&w.step_db) || !(w.min_db <= w.max_db) {
            return Err(SimError::InvalidEnvironment(
                "snr walk step must be in [0, 1] dB and min_db <= max_db".into(),
            ));
        }
        if self.ramps.iter().any(|r| !(r.start_s <= r.end_s) || !r.rate_c_per_s.is_finite()) {
            return Err(SimError::InvalidEnvironment("ramp with end before start".into()));
        }
        Ok(())
    }

    /// Temperature change accumulated over `[t0, t1]`.
    pub fn temperature_delta(&self, t0: f64, t1: f64) -> f64 {
        self.ramps
            .iter()
            .map(|r| {
                let overlap = t1.min(r.end_s) - t0.max(r.start_s);
                if overlap > 0.0 {
                    r.rate_c_per_s * overlap
                } else {
                    0.0
                }
            })
            .sum()
    }
}

/// One observation produced per simulator tick.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvSample {
    pub timestamp: f64,
    pub snr_db: f64,
    pub pa_temperature_c: f64,
    pub ue_count: u32,
    pub mobility: Mobility,
}

/// Row of the metrics time series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsSample {
    pub timestamp: f64,
    pub snr_db: f64,
    pub pa_temperature_c: f64,
    pub penalty_db: f64,
    pub throughput_mbps: f64,
    pub compensation_active: bool,
}

/// A recorded environment change caused by an API call.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Transition {
    pub timestamp: f64,
    pub api_id: String,
    pub before: SimEnvironment,
    pub after: SimEnvironment,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("no behavior registered for API `{0}`")]
    UnknownBehavior(String),
    #[error("API `{api_id}` rejected its parameters: {message}")]
    BehaviorError { api_id: String, message: String },
    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),
    #[error("duration must be positive, got {0}")]
    InvalidDuration(f64),
}

/// Outputs of one API execution, keyed by output name.
pub type Outputs = BTreeMap<String, TypedValue>;

/// A simulator instance: environment, dynamics, toy model and behaviors.
#[derive(Clone, Debug)]
pub struct Simulator {
    env: SimEnvironment,
    model: ToyModel,
    dynamics: Dynamics,
    behaviors: BehaviorTable,
    timeline: Vec<MetricsSample>,
    transitions: Vec<Transition>,
}

impl Simulator {
    pub fn new(
        registry: &Registry,
        env: SimEnvironment,
        model: ToyModel,
        dynamics: Dynamics,
    ) -> Result<Self, SimError> {
        env.validate()?;
        model.validate()?;
        dynamics.validate()?;
        let mut sim = Simulator {
            env,
            model,
            dynamics,
            behaviors: BehaviorTable::for_registry(registry),
            timeline: Vec::new(),
            transitions: Vec::new(),
        };
        sim.record_sample();
        Ok(sim)
    }

    pub fn env(&self) -> &SimEnvironment {
        &self.env
    }

    pub fn model(&self) -> &ToyModel {
        &self.model
    }

    pub fn behaviors(&self) -> &BehaviorTable {
        &self.behaviors
    }

    pub fn metrics(&self) -> Metrics {
        self.model.metrics(&self.env)
    }

    pub fn timeline(&self) -> &[MetricsSample] {
        &self.timeline
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Overrides handset count and mobility (scenario events).
    pub fn set_population(&mut self, ue_count: Option<u32>, mobility: Option<Mobility>) {
        if let Some(n) = ue_count {
            self.env.ue_count = n;
        }
        if let Some(m) = mobility {
            self.env.mobility = m;
        }
    }

    fn record_sample(&mut self) {
        let m = self.metrics();
        self.timeline.push(MetricsSample {
            timestamp: self.env.clock,
            snr_db: self.env.snr_db,
            pa_temperature_c: self.env.pa_temperature_c,
            penalty_db: m.distortion_penalty_db,
            throughput_mbps: m.throughput_mbps,
            compensation_active: self.env.compensation_active,
        });
    }

    /// Advances the clock by `duration` seconds in ticks of `tick_s` (the last
    /// one possibly shorter) and returns one sample per tick.
    pub fn step_environment(&mut self, duration: f64) -> Result<Vec<EnvSample>, SimError> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(SimError::InvalidDuration(duration));
        }
        let end = self.env.clock + duration;
        let mut samples = Vec::new();
        while self.env.clock < end {
            let t0 = self.env.clock;
            let t1 = (t0 + self.dynamics.tick_s).min(end);
            self.env.pa_temperature_c =
                (self.env.pa_temperature_c + self.dynamics.temperature_delta(t0, t1)).clamp(-40.0, 150.0);
            let walk = self.dynamics.snr_walk;
            if walk.step_db > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(self.env.seed);
                rng.set_stream(self.env.tick);
                let step = rng.random_range(-walk.step_db..=walk.step_db);
                self.env.snr_db = (self.env.snr_db + step).clamp(walk.min_db, walk.max_db);
            }
            self.env.clock = t1;
            self.env.tick += 1;
            samples.push(EnvSample {
                timestamp: t1,
                snr_db: self.env.snr_db,
                pa_temperature_c: self.env.pa_temperature_c,
                ue_count: self.env.ue_count,
                mobility: self.env.mobility,
            });
            self.record_sample();
        }
        Ok(samples)
    }

    /// The current state as a single sample.
    pub fn sample_now(&self) -> EnvSample {
        EnvSample {
            timestamp: self.env.clock,
            snr_db: self.env.snr_db,
            pa_temperature_c: self.env.pa_temperature_c,
            ue_count: self.env.ue_count,
            mobility: self.env.mobility,
        }
    }

    /// Runs the behavior of `api_id` with already-resolved parameter values.
    pub fn execute_api(&mut self, api_id: &str, params: &BTreeMap<String, TypedValue>) -> Result<Outputs, SimError> {
        let behavior = self
            .behaviors
            .get(api_id)
            .ok_or_else(|| SimError::UnknownBehavior(api_id.to_owned()))?
            .clone();
        let (outputs, next) = behavior.run(params, &self.env, &self.model)?;
        if next != self.env {
            self.transitions.push(Transition {
                timestamp: self.env.clock,
                api_id: api_id.to_owned(),
                before: self.env.clone(),
                after: next.clone(),
            });
            self.env = next;
            self.record_sample();
        }
        Ok(outputs)
    }

    /// Metrics time series as CSV: `timestamp,snr_db,pa_temperature_c,penalty_db,throughput_mbps`.
    pub fn timeline_csv(&self) -> String {
        let mut out = String::from("timestamp,snr_db,pa_temperature_c,penalty_db,throughput_mbps,compensation_active\n");
        for s in &self.timeline {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_sig(s.timestamp, 9),
                fmt_sig(s.snr_db, 9),
                fmt_sig(s.pa_temperature_c, 9),
                fmt_sig(s.penalty_db, 9),
                fmt_sig(s.throughput_mbps, 9),
                s.compensation_active
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(temp: f64, compensation: bool) -> SimEnvironment {
        SimEnvironment { compensation_active: compensation, ..SimEnvironment::new(20.0, temp, 1) }
    }

    #[test]
    fn penalty_reference_values() {
        assert_eq!(distortion_penalty(&env(45.0, false), 0.2, 0.85), 0.0);
        assert_eq!(distortion_penalty(&env(45.0, true), 0.2, 0.85), 0.0);
        assert_eq!(distortion_penalty(&env(30.0, false), 0.2, 0.85), 0.0);
        assert!((distortion_penalty(&env(95.0, false), 0.2, 0.85) - 10.0).abs() < 1e-12);
        assert!((distortion_penalty(&env(95.0, true), 0.2, 0.85) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn throughput_reference_values() {
        let m = throughput(&env(45.0, false), 100.0);
        assert!((m.throughput_mbps - 100.0 * 101f64.log2()).abs() < 1e-9);
        assert!((m.throughput_mbps - 665.821_148_275).abs() < 1e-6);
        let low = throughput(&SimEnvironment::new(-100.0, 45.0, 1), 100.0);
        assert!(low.throughput_mbps < 0.01);
        assert_eq!(throughput(&env(70.0, false), 100.0), throughput(&env(70.0, false), 100.0));
    }

    fn sim(ramp_rate: f64, walk: f64) -> Simulator {
        let dynamics = Dynamics {
            tick_s: 1.0,
            ramps: vec![RampProfile { start_s: 0.0, end_s: 50.0, rate_c_per_s: ramp_rate }],
            snr_walk: SnrWalk { step_db: walk, min_db: 0.0, max_db: 40.0 },
        };
        Simulator::new(&Registry::shipped(), SimEnvironment::new(20.0, 45.0, 9), ToyModel::default(), dynamics)
            .unwrap()
    }

    #[test]
    fn ramp_and_zero_rate() {
        let mut s = sim(1.0, 0.0);
        let samples = s.step_environment(50.0).unwrap();
        assert_eq!(samples.len(), 50);
        assert_eq!(s.env().pa_temperature_c, 95.0);
        assert_eq!(s.env().clock, 50.0);

        let mut flat = sim(0.0, 0.0);
        flat.step_environment(30.0).unwrap();
        assert_eq!(flat.env().pa_temperature_c, 45.0);
    }

    #[test]
    fn walk_is_bounded_and_seeded() {
        let mut a = sim(0.5, 1.0);
        let mut b = sim(0.5, 1.0);
        let ta = a.step_environment(40.0).unwrap();
        let tb = b.step_environment(40.0).unwrap();
        assert_eq!(ta, tb);
        let mut prev = 20.0;
        for s in &ta {
            assert!((s.snr_db - prev).abs() <= 1.0 + 1e-12);
            prev = s.snr_db;
        }
        assert_eq!(a.timeline_csv(), b.timeline_csv());
    }

    #[test]
    fn partial_ticks() {
        let mut s = sim(1.0, 0.0);
        let samples = s.step_environment(2.5).unwrap();
        assert_eq!(samples.len(), 3);
        assert_eq!(s.env().pa_temperature_c, 47.5);
        assert!(s.step_environment(0.0).is_err());
    }

    #[test]
    fn unknown_behavior() {
        let mut s = sim(0.0, 0.0);
        assert_eq!(
            s.execute_api("no_such_api", &BTreeMap::new()),
            Err(SimError::UnknownBehavior("no_such_api".into()))
        );
    }
}
