//! Conditional SINR and LOS-averaged reception success probabilities.
//!
//! Given which links are in LOS, the SINR of a reception is deterministic.
//! The success probability for a set of interferers therefore reduces to a
//! weighted count of the LOS partitions whose SINR clears the threshold: the
//! desired link's own state, `k` of the FD interferers and `h` of the BR
//! interferers in LOS, each drawn independently.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::channel::{Channel, LinkKind, LinkState, Node, Scheme};
use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::numeric::{binomial_pmf, CompensatedSum};

/// One kind of intended reception in a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reception {
    /// UE → mmAP on a narrow beam.
    FdAtAp,
    /// UE broadcast, copy received at the mmAP.
    BrAtAp,
    /// UE → relay on a narrow beam.
    FdAtRelay,
    /// UE broadcast, copy received at the relay.
    BrAtRelay,
    /// Relay forwarding a queued packet to the mmAP.
    RelayAtAp,
}

impl Reception {
    pub const ALL: [Reception; 5] = [
        Reception::FdAtAp,
        Reception::BrAtAp,
        Reception::FdAtRelay,
        Reception::BrAtRelay,
        Reception::RelayAtAp,
    ];

    pub fn link(self) -> LinkKind {
        match self {
            Reception::FdAtAp | Reception::BrAtAp => LinkKind::UeToAp,
            Reception::FdAtRelay | Reception::BrAtRelay => LinkKind::UeToRelay,
            Reception::RelayAtAp => LinkKind::RelayToAp,
        }
    }

    pub fn scheme(self) -> Scheme {
        match self {
            Reception::BrAtAp | Reception::BrAtRelay => Scheme::Br,
            _ => Scheme::Fd,
        }
    }

    pub fn receiver(self) -> Node {
        self.link().endpoints().1
    }

    /// Link class carrying UE interference to this reception's receiver.
    pub fn interferer_link(self) -> LinkKind {
        match self.receiver() {
            Node::Relay => LinkKind::UeToRelay,
            _ => LinkKind::UeToAp,
        }
    }
}

/// Interferers seen by a reception: `n_fd` FD transmissions aimed at the same
/// receiver, `n_br` broadcasting UEs, and whether the relay is transmitting.
///
/// The relay flag only matters at the mmAP; the relay cancels its own
/// transmission perfectly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct InterfererProfile {
    pub n_fd: u32,
    pub n_br: u32,
    pub relay_active: bool,
}

impl InterfererProfile {
    pub fn new(n_fd: u32, n_br: u32, relay_active: bool) -> Self {
        Self {
            n_fd,
            n_br,
            relay_active,
        }
    }

    /// Drops the relay flag where it has no effect.
    pub fn normalized_for(self, reception: Reception) -> Self {
        Self {
            relay_active: self.relay_active && reception.receiver() == Node::AccessPoint,
            ..self
        }
    }
}

/// A concrete LOS assignment of the interferers of one reception.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LosPartition {
    pub fd_los: u32,
    pub fd_nlos: u32,
    pub br_los: u32,
    pub br_nlos: u32,
    /// State of the relay→mmAP link when the relay interferes at the mmAP.
    pub relay: Option<LinkState>,
}

/// `p_signal / (p_N + α · Σ p_interferer)` for one LOS partition.
///
/// Interferer powers combine each interferer's transmit gain with the
/// receiver's per-stream gain; `α` scales the leaked sum.
pub fn sinr_linear(
    channel: &Channel,
    reception: Reception,
    desired_state: LinkState,
    partition: &LosPartition,
) -> f64 {
    let signal = channel.power(reception.link(), reception.scheme(), desired_state);
    let ilink = reception.interferer_link();
    let mut interference = f64::from(partition.fd_los)
        * channel.power(ilink, Scheme::Fd, LinkState::Los)
        + f64::from(partition.fd_nlos) * channel.power(ilink, Scheme::Fd, LinkState::Nlos)
        + f64::from(partition.br_los) * channel.power(ilink, Scheme::Br, LinkState::Los)
        + f64::from(partition.br_nlos) * channel.power(ilink, Scheme::Br, LinkState::Nlos);
    if let (Some(state), Node::AccessPoint) = (partition.relay, reception.receiver()) {
        interference += channel.power(LinkKind::RelayToAp, Scheme::Fd, state);
    }
    signal / (channel.noise_w + channel.alpha * interference)
}

/// LOS-averaged success probability of `reception` against `profile`.
pub fn success_probability(
    channel: &Channel,
    reception: Reception,
    profile: InterfererProfile,
) -> f64 {
    let profile = profile.normalized_for(reception);
    let p_desired = channel.p_los(reception.link());
    let p_interferer = channel.p_los(reception.interferer_link());
    let relay = profile.relay_active.then_some(LinkState::Los);

    let mut total = CompensatedSum::new();
    for (state, weight) in [
        (LinkState::Los, p_desired),
        (LinkState::Nlos, 1.0 - p_desired),
    ] {
        if weight == 0.0 {
            continue;
        }
        let mut inner = CompensatedSum::new();
        for k in 0..=profile.n_fd {
            let wk = binomial_pmf(profile.n_fd, k, p_interferer);
            if wk == 0.0 {
                continue;
            }
            for h in 0..=profile.n_br {
                let wh = binomial_pmf(profile.n_br, h, p_interferer);
                if wh == 0.0 {
                    continue;
                }
                let partition = LosPartition {
                    fd_los: k,
                    fd_nlos: profile.n_fd - k,
                    br_los: h,
                    br_nlos: profile.n_br - h,
                    relay,
                };
                if sinr_linear(channel, reception, state, &partition) >= channel.gamma_linear {
                    inner.add(wk * wh);
                }
            }
        }
        total.add(weight * inner.value());
    }
    total.value().clamp(0.0, 1.0)
}

type SuccessKey = (Reception, InterfererProfile);

/// Memoized success probabilities for one scenario.
///
/// Safe to share between threads: every key maps to a pure function of the
/// channel, so concurrent first evaluations store identical values.
#[derive(Debug)]
pub struct SuccessTable {
    channel: Channel,
    cache: RwLock<HashMap<SuccessKey, f64>>,
}

impl SuccessTable {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        Ok(Self::from_channel(Channel::new(cfg)?))
    }

    pub fn from_channel(channel: Channel) -> Self {
        Self {
            channel,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn probability(&self, reception: Reception, profile: InterfererProfile) -> f64 {
        let key = (reception, profile.normalized_for(reception));
        if let Some(&p) = self.cache.read().expect("success cache poisoned").get(&key) {
            return p;
        }
        let p = success_probability(&self.channel, key.0, key.1);
        *self
            .cache
            .write()
            .expect("success cache poisoned")
            .entry(key)
            .or_insert(p)
    }

    /// Shorthand with the profile spelled out.
    pub fn p(&self, reception: Reception, n_fd: u32, n_br: u32, relay_active: bool) -> f64 {
        self.probability(reception, InterfererProfile::new(n_fd, n_br, relay_active))
    }

    pub fn len(&self) -> usize {
        self.cache.read().expect("success cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
