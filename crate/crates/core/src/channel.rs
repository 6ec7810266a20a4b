//! Node geometry, 3GPP UMi street-canyon propagation and sectored antennas.
//!
//! Propagation follows TR 38.901 UMi street canyon without shadow fading:
//! given its LOS/NLOS state, every link has a deterministic path loss. The
//! relay sits at mmAP height and always has LOS to the mmAP.

use std::f64::consts::PI;

use crate::config::ScenarioConfig;
use crate::error::{domain, ModelError, Result};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Effective environment height for the UMi breakpoint distance.
const UMI_ENV_HEIGHT_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkState {
    Los,
    Nlos,
}

impl LinkState {
    pub const BOTH: [LinkState; 2] = [LinkState::Los, LinkState::Nlos];

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Ue,
    Relay,
    AccessPoint,
}

/// The three directed link classes of the network. Every UE sees the same
/// geometry, so a class stands for all UEs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkKind {
    UeToAp,
    UeToRelay,
    RelayToAp,
}

impl LinkKind {
    pub const ALL: [LinkKind; 3] = [LinkKind::UeToAp, LinkKind::UeToRelay, LinkKind::RelayToAp];

    pub fn endpoints(self) -> (Node, Node) {
        match self {
            LinkKind::UeToAp => (Node::Ue, Node::AccessPoint),
            LinkKind::UeToRelay => (Node::Ue, Node::Relay),
            LinkKind::RelayToAp => (Node::Relay, Node::AccessPoint),
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Transmitter/receiver antenna heights entering the UMi formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaHeights {
    pub bs_m: f64,
    pub ut_m: f64,
}

impl AntennaHeights {
    pub fn difference(&self) -> f64 {
        (self.bs_m - self.ut_m).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub kind: LinkKind,
    pub distance_2d_m: f64,
    pub distance_3d_m: f64,
    pub p_los: f64,
    pub heights: AntennaHeights,
}

/// Horizontal relay-to-mmAP distance from the UE-centred triangle.
pub fn relay_mmap_distance(d_ur_m: f64, d_ud_m: f64, theta_rd_deg: f64) -> Result<f64> {
    if !(d_ur_m > 0.0) {
        return Err(domain("d_ur_m", d_ur_m, "must be strictly positive"));
    }
    if !(d_ud_m > 0.0) {
        return Err(domain("d_ud_m", d_ud_m, "must be strictly positive"));
    }
    if !(0.0..=180.0).contains(&theta_rd_deg) {
        return Err(domain("theta_rd_deg", theta_rd_deg, "must lie in [0, 180] degrees"));
    }
    let squared = d_ur_m * d_ur_m + d_ud_m * d_ud_m
        - 2.0 * d_ur_m * d_ud_m * theta_rd_deg.to_radians().cos();
    Ok(squared.max(0.0).sqrt())
}

/// UMi street-canyon LOS probability.
pub fn los_probability(d_2d_m: f64) -> Result<f64> {
    if !(d_2d_m >= 0.0) {
        return Err(domain("d_2d_m", d_2d_m, "must be non-negative"));
    }
    if d_2d_m <= 18.0 {
        return Ok(1.0);
    }
    let near = 18.0 / d_2d_m;
    Ok(near + (-d_2d_m / 36.0).exp() * (1.0 - near))
}

/// UMi street-canyon path loss in dB. NLOS loss is floored at the LOS loss.
pub fn path_loss_db(
    d_3d_m: f64,
    f_c_ghz: f64,
    state: LinkState,
    heights: AntennaHeights,
) -> Result<f64> {
    if !(d_3d_m >= 1.0) {
        return Err(ModelError::BelowModelFloor(d_3d_m));
    }
    if !(f_c_ghz > 0.0) {
        return Err(domain("f_c_ghz", f_c_ghz, "must be strictly positive"));
    }
    let los = umi_los_db(d_3d_m, f_c_ghz, heights);
    Ok(match state {
        LinkState::Los => los,
        LinkState::Nlos => {
            let nlos = 35.3 * d_3d_m.log10() + 22.4 + 21.3 * f_c_ghz.log10()
                - 0.3 * (heights.ut_m - 1.5);
            nlos.max(los)
        }
    })
}

fn umi_los_db(d_3d_m: f64, f_c_ghz: f64, heights: AntennaHeights) -> f64 {
    let dh = heights.difference();
    let d_2d = (d_3d_m * d_3d_m - dh * dh).max(0.0).sqrt();
    let h_bs = (heights.bs_m - UMI_ENV_HEIGHT_M).max(0.0);
    let h_ut = (heights.ut_m - UMI_ENV_HEIGHT_M).max(0.0);
    let breakpoint = 4.0 * h_bs * h_ut * f_c_ghz * 1e9 / SPEED_OF_LIGHT;
    if d_2d <= breakpoint {
        32.4 + 21.0 * d_3d_m.log10() + 20.0 * f_c_ghz.log10()
    } else {
        32.4 + 40.0 * d_3d_m.log10() + 20.0 * f_c_ghz.log10()
            - 9.5 * (breakpoint * breakpoint + dh * dh).log10()
    }
}

/// Main-lobe gain of an ideal sectored antenna, `2π / θ`.
pub fn beam_gain(theta_bw_deg: f64) -> Result<f64> {
    if !(theta_bw_deg > 0.0 && theta_bw_deg <= 360.0) {
        return Err(domain("theta_bw_deg", theta_bw_deg, "must lie in (0, 360] degrees"));
    }
    Ok(2.0 * PI / theta_bw_deg.to_radians())
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `p_t · g_tx · g_rx · 10^(-PL/10)`.
pub fn received_power_w(
    link: &Link,
    f_c_ghz: f64,
    state: LinkState,
    tx_gain: f64,
    rx_gain: f64,
    p_t_w: f64,
) -> Result<f64> {
    if !(tx_gain >= 0.0) {
        return Err(domain("tx_gain", tx_gain, "must be non-negative"));
    }
    if !(rx_gain >= 0.0) {
        return Err(domain("rx_gain", rx_gain, "must be non-negative"));
    }
    let loss = path_loss_db(link.distance_3d_m, f_c_ghz, state, link.heights)?;
    Ok(p_t_w * tx_gain * rx_gain / db_to_linear(loss))
}

/// UE transmission scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Fully directional: one narrow beam at either the relay or the mmAP.
    Fd,
    /// Broadcast: one wide beam covering relay and mmAP.
    Br,
}

impl Scheme {
    fn index(self) -> usize {
        self as usize
    }
}

/// Resolved radio environment of a scenario: the three links, antenna gains
/// and every received power a receiver can see.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    links: [Link; 3],
    pub fd_gain: f64,
    pub br_gain: f64,
    /// Per-stream receive gain at the relay and the mmAP.
    pub rx_gain: f64,
    pub p_t_w: f64,
    pub noise_w: f64,
    pub alpha: f64,
    pub gamma_linear: f64,
    /// Indexed `[link][scheme][state]`; relay links only use `Fd`.
    power: [[[f64; 2]; 2]; 3],
}

impl Channel {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let ue_heights = AntennaHeights {
            bs_m: cfg.h_ap_m,
            ut_m: cfg.h_ue_m,
        };
        let relay_heights = AntennaHeights {
            bs_m: cfg.h_ap_m,
            ut_m: cfg.h_ap_m,
        };
        let ue_link = |kind, d_2d: f64| -> Result<Link> {
            let dh = ue_heights.difference();
            Ok(Link {
                kind,
                distance_2d_m: d_2d,
                distance_3d_m: (d_2d * d_2d + dh * dh).sqrt(),
                p_los: los_probability(d_2d)?,
                heights: ue_heights,
            })
        };
        let d_rd = relay_mmap_distance(cfg.d_ur_m, cfg.d_ud_m, cfg.theta_rd_deg)?;
        let links = [
            ue_link(LinkKind::UeToAp, cfg.d_ud_m)?,
            ue_link(LinkKind::UeToRelay, cfg.d_ur_m)?,
            Link {
                kind: LinkKind::RelayToAp,
                distance_2d_m: d_rd,
                distance_3d_m: d_rd,
                p_los: 1.0,
                heights: relay_heights,
            },
        ];
        let fd_gain = beam_gain(cfg.theta_bw_fd_deg)?;
        let br_gain = beam_gain(cfg.br_beamwidth_deg())?;
        let rx_gain = fd_gain;
        let p_t_w = dbm_to_watts(cfg.p_t_dbm);

        let mut power = [[[0.0; 2]; 2]; 3];
        for link in &links {
            for (scheme, tx_gain) in [(Scheme::Fd, fd_gain), (Scheme::Br, br_gain)] {
                if link.kind == LinkKind::RelayToAp && scheme == Scheme::Br {
                    continue;
                }
                for state in LinkState::BOTH {
                    power[link.kind.index()][scheme.index()][state.index()] =
                        received_power_w(link, cfg.f_c_ghz, state, tx_gain, rx_gain, p_t_w)?;
                }
            }
        }

        Ok(Self {
            links,
            fd_gain,
            br_gain,
            rx_gain,
            p_t_w,
            noise_w: dbm_to_watts(cfg.p_n_dbm),
            alpha: cfg.alpha,
            gamma_linear: cfg.gamma_linear(),
            power,
        })
    }

    pub fn link(&self, kind: LinkKind) -> &Link {
        &self.links[kind.index()]
    }

    pub fn p_los(&self, kind: LinkKind) -> f64 {
        self.links[kind.index()].p_los
    }

    /// Received power at the link's receiver for a transmitter using `scheme`.
    /// The relay always transmits directionally, so `RelayToAp` ignores `scheme`.
    pub fn power(&self, kind: LinkKind, scheme: Scheme, state: LinkState) -> f64 {
        let scheme = if kind == LinkKind::RelayToAp {
            Scheme::Fd
        } else {
            scheme
        };
        self.power[kind.index()][scheme.index()][state.index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn relay_distance_examples() {
        assert!((relay_mmap_distance(30.0, 50.0, 0.0).unwrap() - 20.0).abs() < 1e-9);
        assert!((relay_mmap_distance(30.0, 50.0, 180.0).unwrap() - 80.0).abs() < 1e-9);
        // sqrt(30² + 50² - 2·30·50·cos 30°), evaluated by hand: 28.3182...
        let d = relay_mmap_distance(30.0, 50.0, 30.0).unwrap();
        assert!((d - 28.318).abs() < 1e-3, "{d}");
        assert!(relay_mmap_distance(0.0, 50.0, 30.0).is_err());
        assert!(relay_mmap_distance(30.0, -1.0, 30.0).is_err());
    }

    #[test]
    fn los_probability_examples() {
        assert_eq!(los_probability(0.0).unwrap(), 1.0);
        assert_eq!(los_probability(10.0).unwrap(), 1.0);
        assert_eq!(los_probability(18.0).unwrap(), 1.0);
        // 18/100 + exp(-100/36)·(1 - 18/100)
        let expected = 0.18 + (-100.0f64 / 36.0).exp() * 0.82;
        assert!((los_probability(100.0).unwrap() - expected).abs() < 1e-15);
        assert!((los_probability(100.0).unwrap() - 0.230_984_7).abs() < 1e-6);
        assert!(los_probability(-1.0).is_err());
    }

    #[test]
    fn path_loss_reference_values() {
        let h = AntennaHeights {
            bs_m: 10.0,
            ut_m: 1.5,
        };
        // Hand-evaluated UMi formulas at d3D = 50 m, 30 GHz (breakpoint 1.8 km):
        // LOS  32.4 + 21·log10(50) + 20·log10(30)
        // NLOS 35.3·log10(50) + 22.4 + 21.3·log10(30)
        let los = path_loss_db(50.0, 30.0, LinkState::Los, h).unwrap();
        let nlos = path_loss_db(50.0, 30.0, LinkState::Nlos, h).unwrap();
        assert!((los - 97.620_795).abs() < 1e-5, "{los}");
        assert!((nlos - 113.836_324).abs() < 1e-5, "{nlos}");
        assert!(path_loss_db(0.5, 30.0, LinkState::Los, h).is_err());
    }

    #[test]
    fn path_loss_beyond_breakpoint_is_continuous() {
        let h = AntennaHeights {
            bs_m: 10.0,
            ut_m: 1.5,
        };
        let bp = 4.0 * 9.0 * 0.5 * 30e9 / SPEED_OF_LIGHT;
        let d3 = |d2: f64| (d2 * d2 + 8.5 * 8.5).sqrt();
        let below = path_loss_db(d3(bp - 1e-6), 30.0, LinkState::Los, h).unwrap();
        let above = path_loss_db(d3(bp + 1e-6), 30.0, LinkState::Los, h).unwrap();
        assert!((below - above).abs() < 0.05, "{below} vs {above}");
    }

    #[test]
    fn beam_gain_examples() {
        assert!((beam_gain(360.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((beam_gain(5.0).unwrap() - 72.0).abs() < 1e-12);
        assert!((beam_gain(30.0).unwrap() - 12.0).abs() < 1e-12);
        assert!(beam_gain(0.0).is_err());
        assert!(beam_gain(-3.0).is_err());
    }

    #[test]
    fn received_power_examples() {
        let cfg = ScenarioConfig::default();
        let ch = Channel::new(&cfg).unwrap();
        let link = ch.link(LinkKind::UeToAp);
        assert_eq!(
            received_power_w(link, 30.0, LinkState::Los, 0.0, 72.0, 0.25).unwrap(),
            0.0
        );
        let one = received_power_w(link, 30.0, LinkState::Los, 72.0, 72.0, 0.25).unwrap();
        let four = received_power_w(link, 30.0, LinkState::Los, 144.0, 144.0, 0.25).unwrap();
        assert!((four / one - 4.0).abs() < 1e-12);

        let p_t = dbm_to_watts(24.0);
        let pl = path_loss_db(link.distance_3d_m, 30.0, LinkState::Los, link.heights).unwrap();
        let expected = p_t * 72.0 * 72.0 * 10f64.powf(-pl / 10.0);
        let got = received_power_w(link, 30.0, LinkState::Los, 72.0, 72.0, p_t).unwrap();
        assert!((got / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn channel_links() {
        let ch = Channel::new(&ScenarioConfig::default()).unwrap();
        assert_eq!(ch.p_los(LinkKind::RelayToAp), 1.0);
        let ue_ap = ch.link(LinkKind::UeToAp);
        assert!((ue_ap.distance_3d_m - (50.0f64.powi(2) + 8.5f64.powi(2)).sqrt()).abs() < 1e-12);
        assert_eq!(ch.link(LinkKind::RelayToAp).distance_3d_m, ch.link(LinkKind::RelayToAp).distance_2d_m);
        for kind in LinkKind::ALL {
            assert!(ch.link(kind).distance_3d_m > 0.0);
            for scheme in [Scheme::Fd, Scheme::Br] {
                assert!(ch.power(kind, scheme, LinkState::Los) >= ch.power(kind, scheme, LinkState::Nlos));
            }
        }
    }

    #[test]
    fn beam_gain_times_width_is_two_pi() {
        for deg in [5.0, 10.0, 15.0, 20.0, 30.0, 45.0, 60.0, 75.0, 90.0, 120.0, 180.0, 360.0] {
            assert_eq!(beam_gain(deg).unwrap() * deg.to_radians(), 2.0 * PI, "{deg}");
        }
    }

    proptest! {
        // Bit-exact equality is not attainable for every float width (e.g.
        // 17°: no f64 gain multiplies back to 2π), so arbitrary widths are
        // held to one ulp.
        #[test]
        fn beam_gain_round_trip_within_one_ulp(deg in 1e-3f64..=360.0) {
            let product = beam_gain(deg).unwrap() * deg.to_radians();
            let two_pi = 2.0 * PI;
            prop_assert!(product == two_pi || product == two_pi.next_up() || product == two_pi.next_down());
        }

        #[test]
        fn relay_distance_symmetric_and_increasing(
            a in 1.0f64..500.0, b in 1.0f64..500.0, t in 0.5f64..179.0, dt in 0.01f64..1.0,
        ) {
            let d1 = relay_mmap_distance(a, b, t).unwrap();
            let d2 = relay_mmap_distance(b, a, t).unwrap();
            prop_assert!((d1 - d2).abs() <= 1e-9 * d1.max(1.0));
            let d3 = relay_mmap_distance(a, b, t + dt).unwrap();
            prop_assert!(d3 > d1);
        }

        #[test]
        fn los_probability_bounded_non_increasing(d in 0.0f64..2000.0, step in 0.0f64..50.0) {
            let p = los_probability(d).unwrap();
            let q = los_probability(d + step).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!(q <= p);
        }

        #[test]
        fn path_loss_monotone_and_nlos_dominates(
            d in 1.0f64..3000.0, step in 0.0f64..100.0, f in 6.0f64..100.0,
        ) {
            let h = AntennaHeights { bs_m: 10.0, ut_m: 1.5 };
            let los = path_loss_db(d, f, LinkState::Los, h).unwrap();
            let nlos = path_loss_db(d, f, LinkState::Nlos, h).unwrap();
            prop_assert!(los.is_finite() && los > 0.0);
            prop_assert!(nlos >= los);
            prop_assert!(path_loss_db(d + step, f, LinkState::Los, h).unwrap() >= los - 1e-9);
            prop_assert!(path_loss_db(d + step, f, LinkState::Nlos, h).unwrap() >= nlos - 1e-9);
        }
    }
}
