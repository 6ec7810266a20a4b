//! Hand-expanded two-UE expressions for the relay queue.
//!
//! These are written out term by term, independently of the configuration
//! engine in [`crate::queue`], and exist to cross-check it. The published
//! expressions contain several typographical slips; [`Reading::Literal`]
//! evaluates them as printed (with the symmetric-UE substitutions
//! `q₁ = q_u`, `q₁f = q₂f = q_uf`) and [`Reading::Reconciled`] applies the
//! corrections listed in [`RECONCILIATIONS`].

use crate::config::ScenarioConfig;
use crate::error::{ModelError, Result};
use crate::success::{Reception, SuccessTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reading {
    Literal,
    Reconciled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoUeTerms {
    pub lambda0: f64,
    pub a_r: f64,
    pub b_r: f64,
    pub p1_empty: f64,
    pub p2_empty: f64,
    pub pm1_nonempty: f64,
    pub p1_nonempty: f64,
    pub p2_nonempty: f64,
}

impl TwoUeTerms {
    pub const NAMES: [&'static str; 8] = [
        "lambda0", "A_r", "B_r", "p1^0", "p2^0", "p-1^1", "p1^1", "p2^1",
    ];

    pub fn values(&self) -> [f64; 8] {
        [
            self.lambda0,
            self.a_r,
            self.b_r,
            self.p1_empty,
            self.p2_empty,
            self.pm1_nonempty,
            self.p1_nonempty,
            self.p2_nonempty,
        ]
    }

    /// P(Q = 0) for two UEs: `(p₋₁¹ − p₁¹ − 2p₂¹) / (p₋₁¹ − p₁¹ − 2p₂¹ + λ₀)`.
    pub fn empty_probability(&self) -> f64 {
        let margin = self.pm1_nonempty - self.p1_nonempty - 2.0 * self.p2_nonempty;
        margin / (margin + self.lambda0)
    }
}

/// A printed term that disagrees with the configuration engine, and how it
/// is read instead.
#[derive(Debug, Clone, Copy)]
pub struct Reconciliation {
    pub term: &'static str,
    pub printed: &'static str,
    pub reconciled: &'static str,
}

pub const RECONCILIATIONS: &[Reconciliation] = &[
    Reconciliation {
        term: "lambda0, A_r",
        printed: "q_u^2 q_uf^2 q_ur^2 q_ur^2 [..]",
        reconciled: "q_u^2 q_uf^2 q_ur^2 [..] (duplicated q_ur^2 factor dropped)",
    },
    Reconciliation {
        term: "lambda0, A_r",
        printed: "FD->R + BR pair: ... + 2 (P^b_ur/{1}f Pbar^b_ud)^2",
        reconciled: "2 P^f_ur/{1}b P^b_ur/{1}f Pbar^b_ud (both packets stored, as in p2^0)",
    },
    Reconciliation {
        term: "lambda0",
        printed: "BR pair: 2 P^b_ur/{1}b Pbar^b_ud/{2}b (1 - ..)",
        reconciled: "2 P^b_ur/{1}b Pbar^b_ud/{1}b (1 - ..) (only one other UE exists)",
    },
    Reconciliation {
        term: "A_r",
        printed: "single BR UE: 2 q_u qbar_u q_ub P^b_ur Pbar^b_ud",
        reconciled: "2 q_u qbar_u q_ub P^b_ur Pbar^b_ud/{r}f (relay is transmitting)",
    },
    Reconciliation {
        term: "B_r",
        printed: "P^f_rd (.. + q_u^2 q_uf^2 q_2f q_ur^2)",
        reconciled: "P^f_rd (.. + q_u^2 q_uf^2 q_ur^2) (spurious q_2f factor dropped)",
    },
    Reconciliation {
        term: "B_r",
        printed: "P^f_rd/{1}f,{1}b 2 q_u q_uf q_ub q_ud",
        reconciled: "P^f_rd/{1}f,{1}b 2 q_u^2 q_uf q_ub q_ud",
    },
    Reconciliation {
        term: "p-1^1",
        printed: "q_r [..] + P^f_rd/{2}f q_u^2 q_uf^2 q_ud^2",
        reconciled: "q_r [.. + P^f_rd/{2}f q_u^2 q_uf^2 q_ud^2] (departure needs the relay to transmit)",
    },
    Reconciliation {
        term: "p2^0 (and p2^1 through its silent-relay part)",
        printed: "(q_u q_ub P^b_ur/{1}b Pbar^b_ud/{r}f,{1}b)^2",
        reconciled: "(q_u q_ub P^b_ur/{1}b Pbar^b_ud/{1}b)^2 (relay is silent on an empty queue)",
    },
    Reconciliation {
        term: "p1^1",
        printed: "q_u^2 q_uf^2 q_ur^2 (P Pbar Pbar^f_rd + P^2 P^f_rd)",
        reconciled: "q_u^2 q_uf^2 q_ur^2 (2 P Pbar Pbar^f_rd + P^2 P^f_rd)",
    },
    Reconciliation {
        term: "p1^1",
        printed: "FD->R + BR pair, both stored and relay delivers: P^b_ur/{2}f",
        reconciled: "P^b_ur/{1}f (one FD interferer at the relay)",
    },
    Reconciliation {
        term: "p2^1",
        printed: "FD->R + BR pair with relay transmitting: Pbar^b_ud",
        reconciled: "Pbar^b_ud/{r}f (relay is transmitting)",
    },
];

/// Evaluates the two-UE expressions for `cfg` (which must have `n_ues = 2`).
pub fn two_ue_closed_forms(
    cfg: &ScenarioConfig,
    table: &SuccessTable,
    reading: Reading,
) -> Result<TwoUeTerms> {
    if cfg.n_ues != 2 {
        return Err(ModelError::NotTwoUes(cfg.n_ues));
    }
    let lit = reading == Reading::Literal;

    let q = cfg.q_u;
    let qb = 1.0 - q;
    let f = cfg.q_uf;
    let b = cfg.q_ub();
    let r = cfg.q_ur;
    let d = cfg.q_ud();
    let qr = cfg.q_r;
    let qrb = 1.0 - qr;

    // P^f_ur/{j}f,{h}b
    let pfr = |j, h| table.p(Reception::FdAtRelay, j, h, false);
    // P^b_ur/{j}f,{h}b
    let pbr = |j, h| table.p(Reception::BrAtRelay, j, h, false);
    // P^b_ud/{i(,r)}f,{h}b
    let pbd = |i, h, relay| table.p(Reception::BrAtAp, i, h, relay);
    // P^f_rd/{i}f,{h}b
    let prd = |i, h| table.p(Reception::RelayAtAp, i, h, false);
    let bar = |p: f64| 1.0 - p;

    let pfr0 = pfr(0, 0);
    let pfr_f1 = pfr(1, 0);
    let pfr_b1 = pfr(0, 1);
    let pbr0 = pbr(0, 0);
    let pbr_f1 = pbr(1, 0);
    let pbr_b1 = pbr(0, 1);

    // A BR packet stored at the relay: decoded there, missed by the mmAP.
    let x = pbr_f1 * bar(pbd(0, 0, false));
    let x_r = pbr_f1 * bar(pbd(0, 0, true));
    let y = pbr_b1 * bar(pbd(0, 1, false));
    let y_r = pbr_b1 * bar(pbd(0, 1, true));

    let qurur = if lit { r * r * r * r } else { r * r };

    let arrival_rate = |relay: bool| {
        let (xx, yy) = if relay { (x_r, y_r) } else { (x, y) };
        let single_br = if relay && !lit {
            pbr0 * bar(pbd(0, 0, true))
        } else {
            pbr0 * bar(pbd(0, 0, false))
        };
        let fr_br_both = if lit { 2.0 * xx * xx } else { 2.0 * pfr_b1 * xx };
        let br_pair_first = if lit && !relay {
            2.0 * pbr_b1 * bar(pbd(0, 2, false)) * (1.0 - yy)
        } else {
            2.0 * yy * (1.0 - yy)
        };
        2.0 * q * qb * f * r * pfr0
            + 2.0 * q * qb * b * single_br
            + q * q * f * f * qurur * (2.0 * pfr_f1 * bar(pfr_f1) + 2.0 * pfr_f1 * pfr_f1)
            + 2.0 * q * q * f * f * r * d * pfr0
            + 2.0 * q * q * f * b * r
                * (pfr_b1 * (1.0 - xx) + bar(pfr_b1) * xx + fr_br_both)
            + 2.0 * q * q * b * f * d * pbr0 * bar(pbd(1, 0, relay))
            + q * q * b * b * (br_pair_first + 2.0 * yy * yy)
    };
    let lambda0 = arrival_rate(false);
    let a_r = arrival_rate(true);

    let b_r = prd(0, 0) * (qb * qb + 2.0 * q * qb * f * r + q * q * f * f * if lit { f } else { 1.0 } * r * r)
        + prd(1, 0) * (2.0 * q * qb * f * d + 2.0 * q * q * f * f * d * r)
        + prd(0, 1) * (2.0 * q * qb * b + 2.0 * q * q * b * f * r)
        + prd(2, 0) * q * q * f * f * d * d
        + prd(1, 1) * 2.0 * if lit { q } else { q * q } * f * b * d
        + prd(0, 2) * q * q * b * b;

    let pm1_bracket = prd(0, 0)
        * (qb * qb + 2.0 * q * qb * f * r * bar(pfr0) + (q * f * r * bar(pfr_f1)).powi(2))
        + prd(1, 0) * (2.0 * q * qb * f * d + 2.0 * q * q * f * f * d * r * bar(pfr0))
        + prd(0, 1)
            * (2.0 * q * qb * b * (1.0 - pbr0 * bar(pbd(0, 0, true)))
                + 2.0 * q * q * b * f * r * (1.0 - x_r) * bar(pfr_b1))
        + prd(1, 1) * 2.0 * q * q * f * b * d * (1.0 - pbr0 * bar(pbd(1, 0, true)))
        + prd(0, 2) * (q * b * (1.0 - y_r)).powi(2);
    let fd_pair_departs = prd(2, 0) * q * q * f * f * d * d;
    let pm1_nonempty = if lit {
        qr * pm1_bracket + fd_pair_departs
    } else {
        qr * (pm1_bracket + fd_pair_departs)
    };

    let p1_empty = 2.0 * q * qb * f * r * pfr0
        + 2.0 * q * qb * b * pbr0 * bar(pbd(0, 0, false))
        + 2.0 * q * q * f * f * r * r * pfr_f1 * bar(pfr_f1)
        + 2.0 * q * q * f * f * r * d * pfr0
        + 2.0 * q * q * f * b * r * (pfr_b1 * (1.0 - x) + bar(pfr_b1) * x)
        + 2.0 * q * q * b * f * d * pbr0 * bar(pbd(1, 0, false))
        + q * q * b * b * (2.0 * y * (1.0 - y));

    let br_pair_stored = if lit { y_r } else { y };
    let p2_empty = (q * f * r * pfr_f1).powi(2)
        + (q * b * br_pair_stored).powi(2)
        + 2.0 * q * q * b * f * r * x * pfr_b1;

    let fd_pair_one = if lit { 1.0 } else { 2.0 };
    let fr_br_both_stored = if lit { pbr(2, 0) * bar(pbd(0, 0, true)) } else { x_r };
    let p1_nonempty = qrb * p1_empty
        + qr * (2.0 * q * qb * f * r * pfr0 * bar(prd(0, 0))
            + 2.0 * q * qb * b * pbr0 * bar(pbd(0, 0, true)) * bar(prd(0, 1))
            + 2.0 * q * q * f * f * d * r * pfr0 * bar(prd(1, 0))
            + 2.0 * q * q * f * b * d * pbr0 * bar(pbd(1, 0, true)) * bar(prd(1, 1))
            + q * q * f * f * r * r
                * (fd_pair_one * pfr_f1 * bar(pfr_f1) * bar(prd(0, 0))
                    + pfr_f1 * pfr_f1 * prd(0, 0))
            + q * q * b * b
                * (2.0 * y_r * bar(prd(0, 2)) * (1.0 - y_r) + y_r * y_r * prd(0, 2))
            // the printed P̄^f_ur/{r}f,{1}b equals P̄^f_ur/{1}b: the relay
            // never interferes with its own reception
            + 2.0 * q * q * b * f * r
                * (x_r * bar(pfr_b1) * bar(prd(0, 1))
                    + (1.0 - x_r) * pfr_b1 * bar(prd(0, 1))
                    + fr_br_both_stored * pfr_b1 * prd(0, 1)));

    let fr_br_relay = if lit { x } else { x_r };
    let p2_nonempty = qrb * p2_empty
        + qr * ((q * f * r * pfr_f1).powi(2) * bar(prd(0, 0))
            + (q * b * y_r).powi(2) * bar(prd(0, 2))
            + 2.0 * q * q * b * f * r * fr_br_relay * pfr_b1 * bar(prd(0, 1)));

    Ok(TwoUeTerms {
        lambda0,
        a_r,
        b_r,
        p1_empty,
        p2_empty,
        pm1_nonempty,
        p1_nonempty,
        p2_nonempty,
    })
}
