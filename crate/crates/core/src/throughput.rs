//! Per-user and aggregate throughput for `N` symmetric UEs.
//!
//! Quantities are computed from a tagged UE's point of view: the other
//! `N − 1` UEs split into `m` active ones, `i` of which use FD, `j` of those
//! aimed at the relay.

use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::numeric::{binomial_pmf, CompensatedSum};
use crate::queue::{QueueModel, QueueSolution};
use crate::success::{Reception, SuccessTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Stable,
    Unstable,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Stable => "stable",
            Regime::Unstable => "unstable",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-user contributions of a tagged UE, before mixing over relay activity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerUserTerms {
    /// Delivered at the mmAP, relay silent.
    pub t_ud0: f64,
    /// Delivered at the mmAP, relay interfering.
    pub t_ud1: f64,
    /// FD packets accepted by the relay (the relay does not affect these).
    pub t_ur_fd: f64,
    /// BR packets accepted by the relay, relay silent.
    pub t_ur0: f64,
    /// BR packets accepted by the relay, relay interfering at the mmAP.
    pub t_ur1: f64,
}

/// Sums every per-user term over the tagged UE's interferer configurations.
pub fn per_user_terms(cfg: &ScenarioConfig, table: &SuccessTable) -> PerUserTerms {
    let others = cfg.n_ues - 1;
    let (q_u, q_uf, q_ub, q_ur, q_ud) = (cfg.q_u, cfg.q_uf, cfg.q_ub(), cfg.q_ur, cfg.q_ud());

    let mut fd_ap = [CompensatedSum::new(); 2];
    let mut br_ap = [CompensatedSum::new(); 2];
    let mut fd_relay = CompensatedSum::new();
    let mut br_relay = [CompensatedSum::new(); 2];

    for m in 0..=others {
        let wm = binomial_pmf(others, m, q_u);
        if wm == 0.0 {
            continue;
        }
        for i in 0..=m {
            let wi = wm * binomial_pmf(m, i, q_uf);
            if wi == 0.0 {
                continue;
            }
            let n_br = m - i;
            for j in 0..=i {
                let w = wi * binomial_pmf(i, j, q_ur);
                if w == 0.0 {
                    continue;
                }
                let (n_fr, n_fd) = (j, i - j);
                fd_relay.add(w * table.p(Reception::FdAtRelay, n_fr, n_br, false));
                let br_at_relay = table.p(Reception::BrAtRelay, n_fr, n_br, false);
                for (slot, relay) in [(0, false), (1, true)] {
                    fd_ap[slot].add(w * table.p(Reception::FdAtAp, n_fd, n_br, relay));
                    let br_at_ap = table.p(Reception::BrAtAp, n_fd, n_br, relay);
                    br_ap[slot].add(w * br_at_ap);
                    br_relay[slot].add(w * br_at_relay * (1.0 - br_at_ap));
                }
            }
        }
    }

    let direct = |slot: usize| {
        q_u * q_uf * q_ud * fd_ap[slot].value() + q_u * q_ub * br_ap[slot].value()
    };
    PerUserTerms {
        t_ud0: direct(0),
        t_ud1: direct(1),
        t_ur_fd: q_u * q_uf * q_ur * fd_relay.value(),
        t_ur0: q_u * q_ub * br_relay[0].value(),
        t_ur1: q_u * q_ub * br_relay[1].value(),
    }
}

/// `T_ud⁰` (relay silent) or `T_ud¹` (relay interfering).
pub fn per_user_direct(cfg: &ScenarioConfig, table: &SuccessTable, relay_interfering: bool) -> f64 {
    let terms = per_user_terms(cfg, table);
    if relay_interfering {
        terms.t_ud1
    } else {
        terms.t_ud0
    }
}

/// `T_ur` given the probability `rho` that the relay is interfering.
pub fn per_user_relayed(terms: &PerUserTerms, rho: f64) -> f64 {
    terms.t_ur_fd + (1.0 - rho) * terms.t_ur0 + rho * terms.t_ur1
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputReport {
    pub n_ues: u32,
    pub t_ud0: f64,
    pub t_ud1: f64,
    pub t_ur_fd: f64,
    pub t_ur0: f64,
    pub t_ur1: f64,
    /// Per-user direct throughput after mixing over relay activity.
    pub t_ud: f64,
    /// Per-user relay acceptance after mixing over relay activity.
    pub t_ur: f64,
    /// Packets per slot delivered straight to the mmAP by all UEs.
    pub t_direct: f64,
    /// Packets per slot delivered through the relay.
    pub t_relay: f64,
    pub t_aggregate: f64,
    /// Probability the relay transmits in a slot, `q_r P(Q ≠ 0)`.
    pub relay_activity: f64,
    pub regime: Regime,
    pub queue: QueueSolution,
}

/// Full analysis of one scenario over an existing success table.
pub fn analyze_with(cfg: &ScenarioConfig, table: &SuccessTable) -> ThroughputReport {
    let queue = QueueModel::new(cfg, table).solve();
    let terms = per_user_terms(cfg, table);
    let n = f64::from(cfg.n_ues);
    let (regime, relay_activity) = if queue.stable {
        (Regime::Stable, cfg.q_r * (1.0 - queue.p_empty))
    } else {
        // the queue is almost surely nonempty
        (Regime::Unstable, cfg.q_r)
    };
    let t_ud = (1.0 - relay_activity) * terms.t_ud0 + relay_activity * terms.t_ud1;
    let t_ur = per_user_relayed(&terms, relay_activity);
    let t_direct = n * t_ud;
    let t_relay = match regime {
        Regime::Stable => n * t_ur,
        Regime::Unstable => queue.mu_r,
    };
    ThroughputReport {
        n_ues: cfg.n_ues,
        t_ud0: terms.t_ud0,
        t_ud1: terms.t_ud1,
        t_ur_fd: terms.t_ur_fd,
        t_ur0: terms.t_ur0,
        t_ur1: terms.t_ur1,
        t_ud,
        t_ur,
        t_direct,
        t_relay,
        t_aggregate: t_direct + t_relay,
        relay_activity,
        regime,
        queue,
    }
}

/// Aggregate throughput of `cfg`, stable or unstable regime as appropriate.
pub fn aggregate_throughput(cfg: &ScenarioConfig) -> Result<ThroughputReport> {
    let table = SuccessTable::new(cfg)?;
    Ok(analyze_with(cfg, &table))
}
