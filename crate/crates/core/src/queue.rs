//! Relay queue: arrival and service statistics, the net-change DTMC,
//! stability threshold and empty-queue probability for any number of UEs.
//!
//! Everything is an exact mixture over slot configurations, i.e. how many
//! UEs transmit FD to the relay, FD to the mmAP, broadcast, or stay silent.
//! Within one configuration the individual reception events are treated as
//! independent, each with its LOS-averaged success probability.

use crate::config::ScenarioConfig;
use crate::error::{ModelError, Result};
use crate::numeric::{binomial_coefficient, binomial_distribution, convolve, csum, CompensatedSum};
use crate::success::{Reception, SuccessTable};

/// What every UE does in one slot, up to relabeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SlotConfiguration {
    /// UEs sending FD to the relay.
    pub n_fr: u32,
    /// UEs sending FD to the mmAP.
    pub n_fd: u32,
    /// UEs broadcasting.
    pub n_br: u32,
    pub n_idle: u32,
    pub relay_tx: bool,
}

/// All configurations with positive multinomial weight. Weights sum to one.
pub fn enumerate_configurations(
    cfg: &ScenarioConfig,
    relay_tx: bool,
) -> Vec<(SlotConfiguration, f64)> {
    let n = cfg.n_ues;
    let p_fr = cfg.q_u * cfg.q_uf * cfg.q_ur;
    let p_fd = cfg.q_u * cfg.q_uf * cfg.q_ud();
    let p_br = cfg.q_u * cfg.q_ub();
    let p_idle = 1.0 - cfg.q_u;
    let mut out = Vec::new();
    for n_fr in 0..=n {
        for n_fd in 0..=(n - n_fr) {
            for n_br in 0..=(n - n_fr - n_fd) {
                let n_idle = n - n_fr - n_fd - n_br;
                let weight = binomial_coefficient(n, n_fr)
                    * binomial_coefficient(n - n_fr, n_fd)
                    * binomial_coefficient(n - n_fr - n_fd, n_br)
                    * p_fr.powi(n_fr as i32)
                    * p_fd.powi(n_fd as i32)
                    * p_br.powi(n_br as i32)
                    * p_idle.powi(n_idle as i32);
                if weight > 0.0 {
                    out.push((
                        SlotConfiguration {
                            n_fr,
                            n_fd,
                            n_br,
                            n_idle,
                            relay_tx,
                        },
                        weight,
                    ));
                }
            }
        }
    }
    out
}

/// Per-UE relay acceptance probabilities and relay departure probability
/// within one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigurationRates {
    /// P(an FD→relay packet is decoded by the relay).
    pub fd_accept: f64,
    /// P(a broadcast packet is decoded by the relay and missed by the mmAP).
    pub br_accept: f64,
    /// P(the relay's own packet reaches the mmAP); meaningful when `relay_tx`.
    pub departure: f64,
}

pub fn configuration_rates(table: &SuccessTable, c: &SlotConfiguration) -> ConfigurationRates {
    let fd_accept = if c.n_fr > 0 {
        table.p(Reception::FdAtRelay, c.n_fr - 1, c.n_br, false)
    } else {
        0.0
    };
    let br_accept = if c.n_br > 0 {
        let at_relay = table.p(Reception::BrAtRelay, c.n_fr, c.n_br - 1, false);
        let at_ap = table.p(Reception::BrAtAp, c.n_fd, c.n_br - 1, c.relay_tx);
        at_relay * (1.0 - at_ap)
    } else {
        0.0
    };
    ConfigurationRates {
        fd_accept,
        br_accept,
        departure: table.p(Reception::RelayAtAp, c.n_fd, c.n_br, false),
    }
}

fn arrivals_given(c: &SlotConfiguration, rates: &ConfigurationRates) -> Vec<f64> {
    convolve(
        &binomial_distribution(c.n_fr, rates.fd_accept),
        &binomial_distribution(c.n_br, rates.br_accept),
    )
}

/// Distribution of the per-slot net change of the relay queue.
#[derive(Debug, Clone, PartialEq)]
pub struct NetChangeDistribution {
    /// `empty[k]` = P(+k | queue empty), `k ∈ 0..=N`.
    pub empty: Vec<f64>,
    /// `nonempty[k + 1]` = P(+k | queue nonempty), `k ∈ -1..=N`.
    pub nonempty: Vec<f64>,
}

impl NetChangeDistribution {
    /// `p_k⁰`.
    pub fn p_empty(&self, k: i32) -> f64 {
        usize::try_from(k)
            .ok()
            .and_then(|i| self.empty.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    /// `p_k¹`.
    pub fn p_nonempty(&self, k: i32) -> f64 {
        usize::try_from(k + 1)
            .ok()
            .and_then(|i| self.nonempty.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn mean_empty(&self) -> f64 {
        csum(self.empty.iter().enumerate().map(|(k, p)| k as f64 * p))
    }

    pub fn mean_nonempty(&self) -> f64 {
        csum(
            self.nonempty
                .iter()
                .enumerate()
                .map(|(i, p)| (i as f64 - 1.0) * p),
        )
    }
}

/// Where the Loynes criterion puts the stability boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityThreshold {
    /// `λ₀ / (λ₀ + B_r − A_r)`, `+∞` when the denominator is not positive.
    pub raw: f64,
    /// The relay never receives anything from an empty queue state.
    pub no_arrivals: bool,
}

impl StabilityThreshold {
    pub fn new(lambda0: f64, a_r: f64, b_r: f64) -> Self {
        if lambda0 <= 0.0 {
            return Self {
                raw: 0.0,
                no_arrivals: true,
            };
        }
        let denom = lambda0 + b_r - a_r;
        Self {
            raw: if denom > 0.0 { lambda0 / denom } else { f64::INFINITY },
            no_arrivals: false,
        }
    }

    /// Reported `q_r_min`, clamped to 1 when no `q_r` stabilizes the queue.
    pub fn q_r_min(&self) -> f64 {
        self.raw.min(1.0)
    }

    /// Strict inequality: `q_r = q_r_min` is unstable.
    pub fn is_stable(&self, q_r: f64) -> bool {
        self.no_arrivals || q_r > self.raw
    }

    pub fn ever_stable(&self) -> bool {
        self.no_arrivals || self.raw < 1.0
    }
}

/// Stationary summary of the relay queue.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueSolution {
    pub lambda0: f64,
    pub lambda1: f64,
    pub a_r: f64,
    pub b_r: f64,
    pub mu_r: f64,
    pub q_r_min: f64,
    /// P(Q = 0); zero in the unstable regime.
    pub p_empty: f64,
    pub stable: bool,
    pub threshold: StabilityThreshold,
    pub net_change: NetChangeDistribution,
}

impl QueueSolution {
    /// Mean arrival rate, `P(Q=0) λ₀ + P(Q≠0) λ₁`.
    pub fn lambda(&self) -> f64 {
        self.p_empty * self.lambda0 + (1.0 - self.p_empty) * self.lambda1
    }

    /// `(μ_r − λ₁) / (μ_r − λ₁ + λ₀)`, the drift form of P(Q = 0).
    pub fn p_empty_drift_form(&self) -> f64 {
        empty_probability_from_drift(self.lambda0, self.lambda1, self.mu_r)
    }
}

fn empty_probability_from_drift(lambda0: f64, lambda1: f64, mu_r: f64) -> f64 {
    let margin = mu_r - lambda1;
    if lambda0 == 0.0 {
        return 1.0;
    }
    margin / (margin + lambda0)
}

/// Queue analysis for one scenario over a shared success table.
#[derive(Debug, Clone, Copy)]
pub struct QueueModel<'a> {
    cfg: &'a ScenarioConfig,
    table: &'a SuccessTable,
}

impl<'a> QueueModel<'a> {
    pub fn new(cfg: &'a ScenarioConfig, table: &'a SuccessTable) -> Self {
        Self { cfg, table }
    }

    pub fn config(&self) -> &ScenarioConfig {
        self.cfg
    }

    pub fn table(&self) -> &SuccessTable {
        self.table
    }

    /// Distribution of relay arrivals per slot, index = count.
    pub fn arrival_distribution(&self, relay_tx: bool) -> Vec<f64> {
        let n = self.cfg.n_ues as usize;
        let mut acc = vec![CompensatedSum::new(); n + 1];
        for (c, w) in enumerate_configurations(self.cfg, relay_tx) {
            let rates = configuration_rates(self.table, &c);
            for (k, p) in arrivals_given(&c, &rates).into_iter().enumerate() {
                acc[k].add(w * p);
            }
        }
        acc.iter().map(CompensatedSum::value).collect()
    }

    /// `λ₀` (relay silent) or `A_r` (relay transmitting).
    pub fn arrival_rate(&self, relay_tx: bool) -> f64 {
        csum(
            self.arrival_distribution(relay_tx)
                .iter()
                .enumerate()
                .map(|(k, p)| k as f64 * p),
        )
    }

    /// `B_r`: P(relay packet decoded at the mmAP | relay transmits).
    pub fn service_success_probability(&self) -> f64 {
        csum(
            enumerate_configurations(self.cfg, true)
                .into_iter()
                .map(|(c, w)| w * configuration_rates(self.table, &c).departure),
        )
    }

    /// Net change per slot. With a nonempty queue the relay transmits with
    /// probability `q_r`; arrivals and the departure are mixed jointly per
    /// configuration.
    pub fn net_change_distribution(&self) -> NetChangeDistribution {
        let n = self.cfg.n_ues as usize;
        let q_r = self.cfg.q_r;
        let empty = self.arrival_distribution(false);

        let mut transmitting = vec![CompensatedSum::new(); n + 2];
        for (c, w) in enumerate_configurations(self.cfg, true) {
            let rates = configuration_rates(self.table, &c);
            for (k, p) in arrivals_given(&c, &rates).into_iter().enumerate() {
                // index = net change + 1
                transmitting[k].add(w * p * rates.departure);
                transmitting[k + 1].add(w * p * (1.0 - rates.departure));
            }
        }
        let nonempty = (0..n + 2)
            .map(|i| {
                let silent = if i >= 1 { empty[i - 1] } else { 0.0 };
                let mut s = CompensatedSum::new();
                s.add((1.0 - q_r) * silent);
                s.add(q_r * transmitting[i].value());
                s.value()
            })
            .collect();
        NetChangeDistribution { empty, nonempty }
    }

    pub fn stability_threshold(&self) -> StabilityThreshold {
        StabilityThreshold::new(
            self.arrival_rate(false),
            self.arrival_rate(true),
            self.service_success_probability(),
        )
    }

    /// P(Q = 0) from the net-change distribution:
    /// `(p₋₁¹ − Σ k p_k¹) / (p₋₁¹ − Σ k p_k¹ + λ₀)`.
    pub fn empty_probability(&self) -> Result<f64> {
        let threshold = self.stability_threshold();
        if !threshold.is_stable(self.cfg.q_r) {
            return Err(ModelError::UnstableQueue {
                q_r: self.cfg.q_r,
                q_r_min: threshold.q_r_min(),
            });
        }
        let dist = self.net_change_distribution();
        Ok(empty_probability_from_net_change(&dist))
    }

    pub fn solve(&self) -> QueueSolution {
        let lambda0 = self.arrival_rate(false);
        let a_r = self.arrival_rate(true);
        let b_r = self.service_success_probability();
        let q_r = self.cfg.q_r;
        let threshold = StabilityThreshold::new(lambda0, a_r, b_r);
        let stable = threshold.is_stable(q_r);
        let net_change = self.net_change_distribution();
        let p_empty = if stable {
            empty_probability_from_net_change(&net_change)
        } else {
            0.0
        };
        QueueSolution {
            lambda0,
            lambda1: (1.0 - q_r) * lambda0 + q_r * a_r,
            a_r,
            b_r,
            mu_r: q_r * b_r,
            q_r_min: threshold.q_r_min(),
            p_empty,
            stable,
            threshold,
            net_change,
        }
    }
}

fn empty_probability_from_net_change(dist: &NetChangeDistribution) -> f64 {
    let lambda0 = dist.mean_empty();
    if lambda0 == 0.0 {
        return 1.0;
    }
    let mut margin = CompensatedSum::new();
    margin.add(dist.p_nonempty(-1));
    for (i, p) in dist.nonempty.iter().enumerate().skip(2) {
        margin.add(-((i - 1) as f64) * p);
    }
    let margin = margin.value();
    margin / (margin + lambda0)
}

/// Solves the relay queue for `cfg` from scratch.
pub fn solve(cfg: &ScenarioConfig) -> Result<QueueSolution> {
    let table = SuccessTable::new(cfg)?;
    Ok(QueueModel::new(cfg, &table).solve())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(n: u32, q_u: f64, q_uf: f64, q_ur: f64) -> ScenarioConfig {
        ScenarioConfig {
            n_ues: n,
            q_u,
            q_uf,
            q_ur,
            ..Default::default()
        }
    }

    #[test]
    fn single_configuration() {
        let configs = enumerate_configurations(&cfg(1, 1.0, 1.0, 1.0), false);
        assert_eq!(configs.len(), 1);
        assert_eq!(configs[0].0.n_fr, 1);
        assert_eq!(configs[0].1, 1.0);
    }

    #[test]
    fn two_ue_multinomial_expansion() {
        // FD only, half to the relay: (idle, fr, fd) weights 1/4, 1/4, 1/4.
        let configs = enumerate_configurations(&cfg(2, 0.5, 1.0, 0.5), false);
        assert_eq!(configs.len(), 6);
        let weight = |fr, fd, idle| {
            configs
                .iter()
                .find(|(c, _)| c.n_fr == fr && c.n_fd == fd && c.n_idle == idle)
                .map(|(_, w)| *w)
                .unwrap()
        };
        assert_eq!(weight(0, 0, 2), 0.25);
        assert_eq!(weight(1, 0, 1), 0.25);
        assert_eq!(weight(0, 1, 1), 0.25);
        assert_eq!(weight(2, 0, 0), 0.0625);
        assert_eq!(weight(0, 2, 0), 0.0625);
        assert_eq!(weight(1, 1, 0), 0.125);
    }

    #[test]
    fn silent_ues_give_no_arrivals() {
        let c = cfg(4, 0.0, 0.5, 0.5);
        let table = SuccessTable::new(&c).unwrap();
        let model = QueueModel::new(&c, &table);
        let arrivals = model.arrival_distribution(false);
        assert_eq!(arrivals[0], 1.0);
        assert!(arrivals[1..].iter().all(|&p| p == 0.0));
        let threshold = model.stability_threshold();
        assert_eq!(threshold.q_r_min(), 0.0);
        assert_eq!(model.empty_probability().unwrap(), 1.0);
        let p_rd = table.p(Reception::RelayAtAp, 0, 0, false);
        assert_eq!(model.service_success_probability(), p_rd);
    }

    #[test]
    fn silent_ues_relay_always_on() {
        let c = ScenarioConfig {
            q_r: 1.0,
            ..cfg(3, 0.0, 0.5, 0.5)
        };
        let table = SuccessTable::new(&c).unwrap();
        let dist = QueueModel::new(&c, &table).net_change_distribution();
        let p_rd = table.p(Reception::RelayAtAp, 0, 0, false);
        assert_eq!(dist.p_nonempty(-1), p_rd);
        assert_eq!(dist.p_nonempty(0), 1.0 - p_rd);
    }

    #[test]
    fn zero_alpha_service_independent_of_load() {
        let base = ScenarioConfig {
            alpha: 0.0,
            ..cfg(5, 0.0, 0.5, 0.5)
        };
        let reference = solve(&base).unwrap().b_r;
        for q_u in [0.1, 0.5, 0.9, 1.0] {
            let b_r = solve(&ScenarioConfig { q_u, ..base.clone() }).unwrap().b_r;
            assert!((b_r - reference).abs() < 1e-14);
        }
    }

    #[test]
    fn threshold_grows_with_load_without_leakage() {
        let mut previous = 0.0;
        for step in 0..=20 {
            let q_u = f64::from(step) / 20.0;
            let c = ScenarioConfig {
                alpha: 0.0,
                ..cfg(6, q_u, 0.5, 0.5)
            };
            let sol = solve(&c).unwrap();
            assert!(sol.threshold.raw >= previous, "q_u={q_u}");
            previous = sol.threshold.raw;
        }
    }

    #[test]
    fn tie_at_threshold_is_unstable() {
        let t = StabilityThreshold::new(0.2, 0.1, 0.5);
        let q = t.raw;
        assert!(!t.is_stable(q));
        assert!(t.is_stable(q + 1e-12));
        let never = StabilityThreshold::new(0.2, 0.6, 0.3);
        assert_eq!(never.q_r_min(), 1.0);
        assert!(!never.is_stable(1.0));
        assert!(!never.ever_stable());
    }

    #[test]
    fn unstable_queue_has_no_empty_probability() {
        let c = ScenarioConfig {
            q_r: 0.01,
            ..cfg(4, 0.9, 0.0, 0.5)
        };
        let table = SuccessTable::new(&c).unwrap();
        let model = QueueModel::new(&c, &table);
        if !model.stability_threshold().is_stable(c.q_r) {
            assert!(matches!(
                model.empty_probability(),
                Err(ModelError::UnstableQueue { .. })
            ));
        }
    }

    #[test]
    fn light_load_full_service_empty_probability_near_one() {
        let c = ScenarioConfig {
            q_r: 1.0,
            ..cfg(2, 1e-6, 0.5, 0.5)
        };
        let sol = solve(&c).unwrap();
        assert!(sol.stable);
        assert!(sol.p_empty > 0.9999);
    }

    fn arb_cfg() -> impl Strategy<Value = ScenarioConfig> {
        (
            1u32..7,
            0.0f64..=1.0,
            0.0f64..=1.0,
            0.0f64..=1.0,
            0.0f64..=1.0,
            20.0f64..90.0,
            0.0f64..0.5,
        )
            .prop_map(|(n, q_u, q_uf, q_ur, q_r, theta, alpha)| ScenarioConfig {
                n_ues: n,
                q_u,
                q_uf,
                q_ur,
                q_r,
                theta_rd_deg: theta,
                alpha,
                ..Default::default()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn configuration_weights_normalized(c in arb_cfg()) {
            let total = csum(enumerate_configurations(&c, false).into_iter().map(|(_, w)| w));
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn distributions_normalized_and_consistent(c in arb_cfg()) {
            let table = SuccessTable::new(&c).unwrap();
            let model = QueueModel::new(&c, &table);
            let sol = model.solve();
            let d = &sol.net_change;
            prop_assert!((csum(d.empty.iter().copied()) - 1.0).abs() < 1e-12);
            prop_assert!((csum(d.nonempty.iter().copied()) - 1.0).abs() < 1e-12);
            prop_assert!(d.empty.iter().chain(&d.nonempty).all(|p| (-1e-15..=1.0 + 1e-15).contains(p)));
            prop_assert!((d.mean_empty() - sol.lambda0).abs() < 1e-12);
            // exact identity λ₁ = (1 − q_r) λ₀ + q_r A_r, and mean net change = λ₁ − μ_r
            prop_assert!((d.mean_nonempty() - (sol.lambda1 - sol.mu_r)).abs() < 1e-12);
            if sol.stable {
                prop_assert!((0.0..=1.0).contains(&sol.p_empty));
                prop_assert!((sol.p_empty - sol.p_empty_drift_form()).abs() < 1e-12);
            }
        }
    }
}
