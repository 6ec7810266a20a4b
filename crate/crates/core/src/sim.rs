//! Slot-level Monte Carlo simulation of the UEs, the relay queue and the mmAP.
//!
//! Every slot: UEs pick an action, the relay forwards its head-of-queue packet
//! with probability `q_r` when it has one, LOS states are drawn, and each
//! intended reception succeeds iff its SINR clears the threshold.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{Channel, LinkKind, LinkState, Scheme};
use crate::config::ScenarioConfig;
use crate::error::{ModelError, Result};
use crate::throughput::{Regime, ThroughputReport};

/// How LOS states are shared between the receptions of one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LosMode {
    /// Every reception draws its own desired and interferer states, which is
    /// the independence the analysis assumes.
    #[default]
    Decoupled,
    /// One draw per directed link per slot, shared by every reception.
    Physical,
}

impl LosMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LosMode::Decoupled => "decoupled",
            LosMode::Physical => "physical",
        }
    }
}

impl fmt::Display for LosMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LosMode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "decoupled" => Ok(LosMode::Decoupled),
            "physical" => Ok(LosMode::Physical),
            other => Err(ModelError::UnknownMode(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub n_slots: u64,
    pub seed: u64,
    pub mode: LosMode,
    /// Number of batches for batch-means standard errors.
    pub batches: u32,
}

impl SimOptions {
    pub fn new(n_slots: u64, seed: u64, mode: LosMode) -> Self {
        Self {
            n_slots,
            seed,
            mode,
            batches: 50,
        }
    }

    /// Slots excluded from statistics: 10% of the run, at most 10⁵.
    pub fn warmup(&self) -> u64 {
        (self.n_slots / 10).min(100_000)
    }
}

/// A point estimate with its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    /// Ratio estimator `Σy / Σn` with a delta-method batch-means error.
    /// The mean is NaN when `Σn = 0`.
    pub fn ratio(ys: &[f64], ns: &[f64]) -> Self {
        let (sy, sn): (f64, f64) = (ys.iter().sum(), ns.iter().sum());
        if sn == 0.0 {
            return Self {
                mean: f64::NAN,
                se: f64::NAN,
            };
        }
        let mean = sy / sn;
        let b = ys.len() as f64;
        if ys.len() < 2 {
            return Self { mean, se: f64::NAN };
        }
        let ss: f64 = ys.iter().zip(ns).map(|(y, n)| (y - mean * n).powi(2)).sum();
        Self {
            mean,
            se: (ss * b / (b - 1.0)).sqrt() / sn,
        }
    }
}

/// What a UE does in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Idle,
    FdToAp,
    FdToRelay,
    Broadcast,
}

/// Events of one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SlotOutcome {
    pub queue_before: usize,
    pub relay_tx: bool,
    pub delivered_direct: u32,
    pub enqueued: u32,
    pub dequeued: bool,
}

const STREAM_TX: u64 = 1;
const STREAM_LOS: u64 = 2;
const STREAM_RECEPTION: u64 = 3;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn draw_state(rng: &mut ChaCha8Rng, p_los: f64) -> LinkState {
    if rng.random::<f64>() < p_los {
        LinkState::Los
    } else {
        LinkState::Nlos
    }
}

/// Incremental simulator; `step` advances one slot.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: ScenarioConfig,
    channel: Channel,
    mode: LosMode,
    tx_rng: ChaCha8Rng,
    los_rng: ChaCha8Rng,
    reception_rng: ChaCha8Rng,
    queue: VecDeque<u64>,
    actions: Vec<Action>,
    ap_state: Vec<LinkState>,
    relay_state: Vec<LinkState>,
    rd_state: LinkState,
    slot: u64,
    total_enqueued: u64,
    total_dequeued: u64,
}

impl Simulator {
    pub fn new(cfg: &ScenarioConfig, seed: u64, mode: LosMode) -> Result<Self> {
        let channel = Channel::new(cfg)?;
        let n = cfg.n_ues as usize;
        Ok(Self {
            cfg: cfg.clone(),
            channel,
            mode,
            tx_rng: stream(seed, STREAM_TX),
            los_rng: stream(seed, STREAM_LOS),
            reception_rng: stream(seed, STREAM_RECEPTION),
            queue: VecDeque::new(),
            actions: vec![Action::Idle; n],
            ap_state: vec![LinkState::Los; n],
            relay_state: vec![LinkState::Los; n],
            rd_state: LinkState::Los,
            slot: 0,
            total_enqueued: 0,
            total_dequeued: 0,
        })
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn total_enqueued(&self) -> u64 {
        self.total_enqueued
    }

    pub fn total_dequeued(&self) -> u64 {
        self.total_dequeued
    }

    pub fn step(&mut self) -> SlotOutcome {
        let cfg = &self.cfg;
        for a in self.actions.iter_mut() {
            *a = if self.tx_rng.random::<f64>() >= cfg.q_u {
                Action::Idle
            } else if self.tx_rng.random::<f64>() < cfg.q_uf {
                if self.tx_rng.random::<f64>() < cfg.q_ur {
                    Action::FdToRelay
                } else {
                    Action::FdToAp
                }
            } else {
                Action::Broadcast
            };
        }
        let queue_before = self.queue.len();
        let relay_tx = queue_before > 0 && self.tx_rng.random::<f64>() < cfg.q_r;

        if self.mode == LosMode::Physical {
            let p_ap = self.channel.p_los(LinkKind::UeToAp);
            let p_relay = self.channel.p_los(LinkKind::UeToRelay);
            for u in 0..self.actions.len() {
                self.ap_state[u] = draw_state(&mut self.los_rng, p_ap);
                self.relay_state[u] = draw_state(&mut self.los_rng, p_relay);
            }
            self.rd_state = draw_state(&mut self.los_rng, self.channel.p_los(LinkKind::RelayToAp));
        }

        let mut out = SlotOutcome {
            queue_before,
            relay_tx,
            ..Default::default()
        };
        for u in 0..self.actions.len() {
            match self.actions[u] {
                Action::Idle => {}
                Action::FdToAp => {
                    if self.receives(u, Target::Ap, Scheme::Fd, relay_tx) {
                        out.delivered_direct += 1;
                    }
                }
                Action::FdToRelay => {
                    if self.receives(u, Target::Relay, Scheme::Fd, relay_tx) {
                        out.enqueued += 1;
                    }
                }
                Action::Broadcast => {
                    let at_ap = self.receives(u, Target::Ap, Scheme::Br, relay_tx);
                    let at_relay = self.receives(u, Target::Relay, Scheme::Br, relay_tx);
                    if at_ap {
                        out.delivered_direct += 1;
                    } else if at_relay {
                        out.enqueued += 1;
                    }
                }
            }
        }
        if relay_tx {
            out.dequeued = self.relay_delivers();
        }

        if out.dequeued {
            self.queue.pop_front();
            self.total_dequeued += 1;
        }
        for _ in 0..out.enqueued {
            self.queue.push_back(self.total_enqueued);
            self.total_enqueued += 1;
        }
        self.slot += 1;
        out
    }

    fn state(&mut self, u: usize, target: Target, p_los: f64) -> LinkState {
        match self.mode {
            LosMode::Decoupled => draw_state(&mut self.reception_rng, p_los),
            LosMode::Physical => match target {
                Target::Ap => self.ap_state[u],
                Target::Relay => self.relay_state[u],
            },
        }
    }

    /// Whether UE `u`'s transmission with `scheme` is decoded at `target`.
    fn receives(&mut self, u: usize, target: Target, scheme: Scheme, relay_tx: bool) -> bool {
        let link = target.link();
        let p_los = self.channel.p_los(link);
        let desired = self.state(u, target, p_los);
        let signal = self.channel.power(link, scheme, desired);
        let mut interference = 0.0;
        for v in 0..self.actions.len() {
            if v == u {
                continue;
            }
            let scheme_v = match (self.actions[v], target) {
                (Action::Broadcast, _) => Scheme::Br,
                (Action::FdToAp, Target::Ap) | (Action::FdToRelay, Target::Relay) => Scheme::Fd,
                _ => continue,
            };
            let s = self.state(v, target, p_los);
            interference += self.channel.power(link, scheme_v, s);
        }
        if relay_tx && target == Target::Ap {
            let p_rd = self.channel.p_los(LinkKind::RelayToAp);
            let s = match self.mode {
                LosMode::Decoupled => draw_state(&mut self.reception_rng, p_rd),
                LosMode::Physical => self.rd_state,
            };
            interference += self.channel.power(LinkKind::RelayToAp, Scheme::Fd, s);
        }
        self.decoded(signal, interference)
    }

    fn relay_delivers(&mut self) -> bool {
        let desired = match self.mode {
            LosMode::Decoupled => {
                draw_state(&mut self.reception_rng, self.channel.p_los(LinkKind::RelayToAp))
            }
            LosMode::Physical => self.rd_state,
        };
        let signal = self.channel.power(LinkKind::RelayToAp, Scheme::Fd, desired);
        let mut interference = 0.0;
        for v in 0..self.actions.len() {
            let scheme_v = match self.actions[v] {
                Action::Broadcast => Scheme::Br,
                Action::FdToAp => Scheme::Fd,
                _ => continue,
            };
            let s = self.state(v, Target::Ap, self.channel.p_los(LinkKind::UeToAp));
            interference += self.channel.power(LinkKind::UeToAp, scheme_v, s);
        }
        self.decoded(signal, interference)
    }

    fn decoded(&self, signal: f64, interference: f64) -> bool {
        signal / (self.channel.noise_w + self.channel.alpha * interference)
            >= self.channel.gamma_linear
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    Ap,
    Relay,
}

impl Target {
    fn link(self) -> LinkKind {
        match self {
            Target::Ap => LinkKind::UeToAp,
            Target::Relay => LinkKind::UeToRelay,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    pub n_ues: u32,
    pub slots: u64,
    pub warmup: u64,
    pub measured: u64,
    /// Counts over the measured window.
    pub delivered_direct: u64,
    pub delivered_relay: u64,
    pub enqueued: u64,
    /// Aggregate delivered packets per slot.
    pub t_sim: Estimate,
    /// Packets accepted into the relay queue per slot.
    pub lambda_sim: Estimate,
    /// Relay departures per nonempty slot.
    pub mu_sim: Estimate,
    pub p_empty_sim: Estimate,
    pub mean_queue: f64,
    pub max_queue: u64,
    /// Queue growth per measured slot.
    pub drift_sim: f64,
    pub final_queue: u64,
    pub queue_batch_means: Vec<f64>,
    pub seed: u64,
    pub mode: LosMode,
}

#[derive(Debug, Clone, Copy, Default)]
struct Batch {
    slots: f64,
    delivered: f64,
    enqueued: f64,
    departures: f64,
    nonempty: f64,
    empty: f64,
    queue_sum: f64,
}

/// Runs `opts.n_slots` slots of `cfg` and summarizes the measured window.
pub fn run(cfg: &ScenarioConfig, opts: &SimOptions) -> Result<SimStats> {
    if opts.n_slots == 0 {
        return Err(crate::error::domain("n_slots", 0.0, "must be at least 1"));
    }
    let mut sim = Simulator::new(cfg, opts.seed, opts.mode)?;
    let warmup = opts.warmup();
    let measured = opts.n_slots - warmup;
    let n_batches = u64::from(opts.batches.max(1)).min(measured);
    let mut batches = vec![Batch::default(); n_batches as usize];

    for _ in 0..warmup {
        sim.step();
    }
    let queue_at_start = sim.queue_len();
    let (mut direct, mut relay, mut enqueued, mut max_queue) = (0u64, 0u64, 0u64, 0u64);
    let mut queue_total = 0.0;
    for t in 0..measured {
        let b = &mut batches[(t * n_batches / measured) as usize];
        let o = sim.step();
        let q = o.queue_before as f64;
        b.slots += 1.0;
        b.delivered += f64::from(o.delivered_direct) + f64::from(u8::from(o.dequeued));
        b.enqueued += f64::from(o.enqueued);
        b.departures += f64::from(u8::from(o.dequeued));
        if o.queue_before == 0 {
            b.empty += 1.0;
        } else {
            b.nonempty += 1.0;
        }
        b.queue_sum += q;
        queue_total += q;
        max_queue = max_queue.max(o.queue_before as u64);
        direct += u64::from(o.delivered_direct);
        relay += u64::from(o.dequeued);
        enqueued += u64::from(o.enqueued);
    }
    let final_queue = sim.queue_len() as u64;
    max_queue = max_queue.max(final_queue);

    let col = |f: fn(&Batch) -> f64| batches.iter().map(f).collect::<Vec<_>>();
    let slots = col(|b| b.slots);
    Ok(SimStats {
        n_ues: cfg.n_ues,
        slots: opts.n_slots,
        warmup,
        measured,
        delivered_direct: direct,
        delivered_relay: relay,
        enqueued,
        t_sim: Estimate::ratio(&col(|b| b.delivered), &slots),
        lambda_sim: Estimate::ratio(&col(|b| b.enqueued), &slots),
        mu_sim: Estimate::ratio(&col(|b| b.departures), &col(|b| b.nonempty)),
        p_empty_sim: Estimate::ratio(&col(|b| b.empty), &slots),
        mean_queue: queue_total / measured as f64,
        max_queue,
        drift_sim: (final_queue as f64 - queue_at_start as f64) / measured as f64,
        final_queue,
        queue_batch_means: batches.iter().map(|b| b.queue_sum / b.slots).collect(),
        seed: opts.seed,
        mode: opts.mode,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// The simulation never visited the states the metric conditions on.
    Unobservable,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Unobservable => "n/a",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricComparison {
    pub metric: &'static str,
    pub analytic: f64,
    pub empirical: f64,
    pub se: f64,
    pub z: f64,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<MetricComparison>,
    /// Set when the analysis predicts an unstable queue but the simulated
    /// queue did not grow.
    pub regime_mismatch: bool,
}

impl Comparison {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.status != Status::Fail)
    }

    /// Counts of (passing, observable) rows.
    pub fn tally(&self) -> (usize, usize) {
        let observable = self.rows.iter().filter(|r| r.status != Status::Unobservable);
        let (mut pass, mut total) = (0, 0);
        for r in observable {
            total += 1;
            pass += usize::from(r.status == Status::Pass);
        }
        (pass, total)
    }
}

/// z-score threshold for a metric to pass.
pub const Z_LIMIT: f64 = 3.0;

fn z_score(analytic: f64, empirical: f64, se: f64) -> f64 {
    let diff = empirical - analytic;
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= 1e-12 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

fn metric(name: &'static str, analytic: f64, est: Estimate) -> MetricComparison {
    if est.mean.is_nan() || est.se.is_nan() {
        return MetricComparison {
            metric: name,
            analytic,
            empirical: est.mean,
            se: est.se,
            z: f64::NAN,
            status: Status::Unobservable,
        };
    }
    let z = z_score(analytic, est.mean, est.se);
    MetricComparison {
        metric: name,
        analytic,
        empirical: est.mean,
        se: est.se,
        z,
        status: if z.abs() <= Z_LIMIT {
            Status::Pass
        } else {
            Status::Fail
        },
    }
}

/// Analytic-vs-empirical z-scores for T, λ, μ_r and P(Q=0).
pub fn compare(report: &ThroughputReport, stats: &SimStats) -> Comparison {
    let q = &report.queue;
    let rows = vec![
        metric("T", report.t_aggregate, stats.t_sim),
        metric("lambda", q.lambda(), stats.lambda_sim),
        metric("mu_r", q.mu_r, stats.mu_sim),
        metric("p_empty", q.p_empty, stats.p_empty_sim),
    ];
    Comparison {
        rows,
        regime_mismatch: report.regime == Regime::Unstable && stats.drift_sim <= 0.0,
    }
}

/// Per-metric difference between a physical-mode and a decoupled-mode run,
/// in units of their combined standard error.
pub fn mode_sensitivity(decoupled: &SimStats, physical: &SimStats) -> Vec<(&'static str, f64, f64)> {
    let pairs = [
        ("T", decoupled.t_sim, physical.t_sim),
        ("lambda", decoupled.lambda_sim, physical.lambda_sim),
        ("mu_r", decoupled.mu_sim, physical.mu_sim),
        ("p_empty", decoupled.p_empty_sim, physical.p_empty_sim),
    ];
    pairs
        .into_iter()
        .map(|(name, d, p)| {
            let diff = p.mean - d.mean;
            let se = d.se.hypot(p.se);
            (name, diff, z_score(0.0, diff, se))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_estimate_equal_batches() {
        let e = Estimate::ratio(&[1.0, 3.0], &[2.0, 2.0]);
        assert_eq!(e.mean, 1.0);
        // batch means 0.5 and 1.5: sd of mean = 0.5
        assert!((e.se - 0.5).abs() < 1e-15);
        assert!(Estimate::ratio(&[0.0], &[0.0]).mean.is_nan());
    }

    #[test]
    fn mode_round_trip() {
        for m in [LosMode::Decoupled, LosMode::Physical] {
            assert_eq!(m.as_str().parse::<LosMode>().unwrap(), m);
        }
        assert!("other".parse::<LosMode>().is_err());
    }

    #[test]
    fn z_scores() {
        assert_eq!(z_score(1.0, 1.0, 0.0), 0.0);
        assert_eq!(z_score(1.0, 2.0, 0.0), f64::INFINITY);
        assert_eq!(z_score(1.0, 1.5, 0.25), 2.0);
    }

    #[test]
    fn warmup_cap() {
        assert_eq!(SimOptions::new(1_000, 0, LosMode::Decoupled).warmup(), 100);
        assert_eq!(SimOptions::new(10_000_000, 0, LosMode::Decoupled).warmup(), 100_000);
        assert_eq!(SimOptions::new(1, 0, LosMode::Decoupled).warmup(), 0);
    }
}
