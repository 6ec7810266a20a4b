//! Relay-queue arrival and net-change distributions, and direct throughput,
//! against enumeration of all `4^N` joint UE actions.

use mmwave_relay::throughput::per_user_terms;
use mmwave_relay::{QueueModel, Reception, ScenarioConfig, SuccessTable};

#[derive(Clone, Copy, PartialEq)]
enum Act {
    Idle,
    FdAp,
    FdRelay,
    Br,
}

fn prob(cfg: &ScenarioConfig, a: Act) -> f64 {
    match a {
        Act::Idle => 1.0 - cfg.q_u,
        Act::FdAp => cfg.q_u * cfg.q_uf * (1.0 - cfg.q_ur),
        Act::FdRelay => cfg.q_u * cfg.q_uf * cfg.q_ur,
        Act::Br => cfg.q_u * (1.0 - cfg.q_uf),
    }
}

/// Calls `f(weight, actions)` for every joint action vector.
fn for_each_profile(cfg: &ScenarioConfig, mut f: impl FnMut(f64, &[Act])) {
    let n = cfg.n_ues as usize;
    let all = [Act::Idle, Act::FdAp, Act::FdRelay, Act::Br];
    for code in 0..4usize.pow(n as u32) {
        let acts: Vec<Act> = (0..n).map(|u| all[code / 4usize.pow(u as u32) % 4]).collect();
        let w: f64 = acts.iter().map(|&a| prob(cfg, a)).product();
        f(w, &acts);
    }
}

struct Brute {
    arrivals: [Vec<f64>; 2],
    nonempty: Vec<f64>,
    direct: [f64; 2],
}

fn brute(cfg: &ScenarioConfig, table: &SuccessTable) -> Brute {
    let n = cfg.n_ues as usize;
    let mut arrivals = [vec![0.0; n + 1], vec![0.0; n + 1]];
    let mut nonempty = vec![0.0; n + 2];
    let mut direct = [0.0; 2];
    for_each_profile(cfg, |w, acts| {
        let count = |x: Act| acts.iter().filter(|&&a| a == x).count() as u32;
        let (n_fa, n_fr, n_b) = (count(Act::FdAp), count(Act::FdRelay), count(Act::Br));
        for relay in [false, true] {
            // Poisson-binomial over the UEs that may reach the queue
            let mut pmf = vec![1.0];
            for &a in acts {
                let p = match a {
                    Act::FdRelay => table.p(Reception::FdAtRelay, n_fr - 1, n_b, false),
                    Act::Br => {
                        table.p(Reception::BrAtRelay, n_fr, n_b - 1, false)
                            * (1.0 - table.p(Reception::BrAtAp, n_fa, n_b - 1, relay))
                    }
                    _ => continue,
                };
                let mut next = vec![0.0; pmf.len() + 1];
                for (k, v) in pmf.iter().enumerate() {
                    next[k] += v * (1.0 - p);
                    next[k + 1] += v * p;
                }
                pmf = next;
            }
            for (k, v) in pmf.iter().enumerate() {
                arrivals[usize::from(relay)][k] += w * v;
            }
            let d = table.p(Reception::RelayAtAp, n_fa, n_b, false);
            for (k, v) in pmf.iter().enumerate() {
                if relay {
                    nonempty[k] += cfg.q_r * w * v * d;
                    nonempty[k + 1] += cfg.q_r * w * v * (1.0 - d);
                } else {
                    nonempty[k + 1] += (1.0 - cfg.q_r) * w * v;
                }
            }
            let delivered: f64 = acts
                .iter()
                .map(|&a| match a {
                    Act::FdAp => table.p(Reception::FdAtAp, n_fa - 1, n_b, relay),
                    Act::Br => table.p(Reception::BrAtAp, n_fa, n_b - 1, relay),
                    _ => 0.0,
                })
                .sum();
            direct[usize::from(relay)] += w * delivered;
        }
    });
    Brute {
        arrivals,
        nonempty,
        direct,
    }
}

fn assert_close(a: &[f64], b: &[f64], what: &str) {
    assert_eq!(a.len(), b.len(), "{what}");
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= 1e-12, "{what}: {a:?} vs {b:?}");
    }
}

#[test]
fn matches_enumeration() {
    let grid = [
        (1, 0.5, 0.5, 0.5, 1.0, 30.0),
        (2, 0.3, 0.6, 0.4, 0.7, 30.0),
        (2, 1.0, 0.0, 0.5, 0.5, 45.0),
        (3, 0.7, 0.5, 0.5, 0.9, 20.0),
        (3, 0.4, 1.0, 0.8, 0.3, 60.0),
        (4, 0.5, 0.5, 0.5, 0.5, 30.0),
        (4, 0.9, 0.3, 0.2, 1.0, 90.0),
    ];
    for (n, q_u, q_uf, q_ur, q_r, theta) in grid {
        let cfg = ScenarioConfig {
            n_ues: n,
            q_u,
            q_uf,
            q_ur,
            q_r,
            theta_rd_deg: theta,
            ..Default::default()
        };
        let table = SuccessTable::new(&cfg).unwrap();
        let model = QueueModel::new(&cfg, &table);
        let b = brute(&cfg, &table);
        let tag = format!("{cfg:?}");
        assert_close(&model.arrival_distribution(false), &b.arrivals[0], &tag);
        assert_close(&model.arrival_distribution(true), &b.arrivals[1], &tag);
        assert_close(&model.net_change_distribution().nonempty, &b.nonempty, &tag);

        let terms = per_user_terms(&cfg, &table);
        let nf = f64::from(n);
        assert!((nf * terms.t_ud0 - b.direct[0]).abs() <= 1e-12, "{tag}");
        assert!((nf * terms.t_ud1 - b.direct[1]).abs() <= 1e-12, "{tag}");
    }
}
