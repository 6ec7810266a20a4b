//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three operations: a throughput curve over one parameter, a full analysis
//! of one scenario, and a short slot-level simulation.

use mmwave_relay::sim::{self, LosMode, SimOptions};
use mmwave_relay::{aggregate_throughput, Regime, ScenarioConfig, ThroughputReport};
use wasm_bindgen::prelude::*;

/// Upper bound on simulated slots per call, to keep the page responsive.
pub const MAX_DEMO_SLOTS: u32 = 2_000_000;

#[wasm_bindgen]
#[derive(Debug, Clone, Default)]
pub struct Scenario {
    cfg: ScenarioConfig,
}

#[wasm_bindgen]
impl Scenario {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Scenario {
        Scenario::default()
    }

    /// Sets a parameter by name, e.g. `q_u` or `theta_rd_deg`.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), String> {
        let mut cfg = self.cfg.clone();
        cfg.set(name, value).map_err(|e| e.to_string())?;
        self.cfg = cfg;
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<f64, String> {
        self.cfg.get(name).map_err(|e| e.to_string())
    }

    /// Aggregate throughput at each value of `name`; NaN where the scenario
    /// is invalid.
    pub fn curve(&self, name: &str, values: Vec<f64>) -> Result<Vec<f64>, String> {
        self.cfg.get(name).map_err(|e| e.to_string())?;
        Ok(values
            .iter()
            .map(|&v| {
                let mut cfg = self.cfg.clone();
                cfg.set(name, v)
                    .and_then(|_| aggregate_throughput(&cfg))
                    .map_or(f64::NAN, |r| r.t_aggregate)
            })
            .collect())
    }

    /// 1 where the relay queue is stable at each value of `name`, else 0.
    pub fn curve_stable(&self, name: &str, values: Vec<f64>) -> Result<Vec<u8>, String> {
        self.cfg.get(name).map_err(|e| e.to_string())?;
        Ok(values
            .iter()
            .map(|&v| {
                let mut cfg = self.cfg.clone();
                let stable = cfg
                    .set(name, v)
                    .and_then(|_| aggregate_throughput(&cfg))
                    .is_ok_and(|r| r.regime == Regime::Stable);
                u8::from(stable)
            })
            .collect())
    }

    pub fn analyze(&self) -> Result<Analysis, String> {
        aggregate_throughput(&self.cfg)
            .map(Analysis::from)
            .map_err(|e| e.to_string())
    }

    pub fn simulate(&self, slots: u32, seed: u32, physical: bool) -> Result<Simulation, String> {
        let mode = if physical {
            LosMode::Physical
        } else {
            LosMode::Decoupled
        };
        let opts = SimOptions::new(u64::from(slots.clamp(1, MAX_DEMO_SLOTS)), u64::from(seed), mode);
        let stats = sim::run(&self.cfg, &opts).map_err(|e| e.to_string())?;
        Ok(Simulation {
            t: stats.t_sim.mean,
            t_se: stats.t_sim.se,
            lambda: stats.lambda_sim.mean,
            mu_r: stats.mu_sim.mean,
            p_empty: stats.p_empty_sim.mean,
            mean_queue: stats.mean_queue,
            final_queue: stats.final_queue as f64,
            queue_trace: stats.queue_batch_means,
        })
    }
}

#[wasm_bindgen]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Analysis {
    pub t: f64,
    pub t_direct: f64,
    pub t_relay: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub mu_r: f64,
    pub q_r_min: f64,
    pub p_empty: f64,
    pub stable: bool,
}

impl From<ThroughputReport> for Analysis {
    fn from(r: ThroughputReport) -> Self {
        Self {
            t: r.t_aggregate,
            t_direct: r.t_direct,
            t_relay: r.t_relay,
            lambda0: r.queue.lambda0,
            lambda1: r.queue.lambda1,
            mu_r: r.queue.mu_r,
            q_r_min: r.queue.q_r_min,
            p_empty: r.queue.p_empty,
            stable: r.regime == Regime::Stable,
        }
    }
}

#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub t: f64,
    pub t_se: f64,
    pub lambda: f64,
    pub mu_r: f64,
    pub p_empty: f64,
    pub mean_queue: f64,
    pub final_queue: f64,
    queue_trace: Vec<f64>,
}

#[wasm_bindgen]
impl Simulation {
    /// Mean queue length per batch of the measured window.
    #[wasm_bindgen(getter)]
    pub fn queue_trace(&self) -> Vec<f64> {
        self.queue_trace.clone()
    }
}
