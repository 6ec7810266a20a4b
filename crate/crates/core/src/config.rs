//! Scenario parameters.

use crate::error::{domain, ModelError, Result};

/// Every free parameter of one network scenario.
///
/// UEs are symmetric: they share transmit probabilities and the three
/// geometry scalars (`d_ur_m`, `d_ud_m`, `theta_rd_deg`).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_ues: u32,
    /// Per-slot UE transmit probability.
    pub q_u: f64,
    /// P(FD scheme | UE transmits). `q_ub = 1 - q_uf`.
    pub q_uf: f64,
    /// P(aimed at relay | FD transmission). `q_ud = 1 - q_ur`.
    pub q_ur: f64,
    /// Relay transmit probability when its queue is nonempty.
    pub q_r: f64,
    pub gamma_db: f64,
    /// Inter-beam interference coefficient.
    pub alpha: f64,
    pub p_t_dbm: f64,
    pub p_n_dbm: f64,
    pub f_c_ghz: f64,
    pub h_ap_m: f64,
    pub h_ue_m: f64,
    pub d_ur_m: f64,
    pub d_ud_m: f64,
    pub theta_rd_deg: f64,
    pub theta_bw_fd_deg: f64,
    /// BR beamwidth; `None` tracks `theta_rd_deg`.
    pub theta_bw_br_deg: Option<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_ues: 10,
            q_u: 0.1,
            q_uf: 0.5,
            q_ur: 0.5,
            q_r: 1.0,
            gamma_db: 10.0,
            alpha: 0.1,
            p_t_dbm: 24.0,
            p_n_dbm: -80.0,
            f_c_ghz: 30.0,
            h_ap_m: 10.0,
            h_ue_m: 1.5,
            d_ur_m: 30.0,
            d_ud_m: 50.0,
            theta_rd_deg: 30.0,
            theta_bw_fd_deg: 5.0,
            theta_bw_br_deg: None,
        }
    }
}

/// Names accepted by [`ScenarioConfig::set`] and [`ScenarioConfig::get`].
pub const PARAMETER_NAMES: &[&str] = &[
    "n_ues",
    "q_u",
    "q_uf",
    "q_ur",
    "q_r",
    "gamma_db",
    "alpha",
    "p_t_dbm",
    "p_n_dbm",
    "f_c_ghz",
    "h_ap_m",
    "h_ue_m",
    "d_ur_m",
    "d_ud_m",
    "theta_rd_deg",
    "theta_bw_fd_deg",
    "theta_bw_br_deg",
];

impl ScenarioConfig {
    pub fn q_ub(&self) -> f64 {
        1.0 - self.q_uf
    }

    pub fn q_ud(&self) -> f64 {
        1.0 - self.q_ur
    }

    pub fn gamma_linear(&self) -> f64 {
        10f64.powf(self.gamma_db / 10.0)
    }

    pub fn br_beamwidth_deg(&self) -> f64 {
        self.theta_bw_br_deg.unwrap_or(self.theta_rd_deg)
    }

    /// Checks every field against its domain.
    pub fn validate(&self) -> Result<()> {
        if self.n_ues == 0 {
            return Err(domain("n_ues", 0.0, "must be a positive integer"));
        }
        for (field, value) in [
            ("q_u", self.q_u),
            ("q_uf", self.q_uf),
            ("q_ur", self.q_ur),
            ("q_r", self.q_r),
            ("alpha", self.alpha),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(domain(field, value, "must lie in [0, 1]"));
            }
        }
        for (field, value) in [
            ("gamma_db", self.gamma_db),
            ("p_t_dbm", self.p_t_dbm),
            ("p_n_dbm", self.p_n_dbm),
        ] {
            if !value.is_finite() {
                return Err(domain(field, value, "must be finite"));
            }
        }
        for (field, value) in [
            ("f_c_ghz", self.f_c_ghz),
            ("h_ap_m", self.h_ap_m),
            ("h_ue_m", self.h_ue_m),
            ("d_ur_m", self.d_ur_m),
            ("d_ud_m", self.d_ud_m),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(domain(field, value, "must be strictly positive"));
            }
        }
        if !(self.theta_rd_deg > 0.0 && self.theta_rd_deg < 180.0) {
            return Err(domain(
                "theta_rd_deg",
                self.theta_rd_deg,
                "must lie in (0, 180) degrees",
            ));
        }
        if !(self.theta_bw_fd_deg > 0.0 && self.theta_bw_fd_deg <= 360.0) {
            return Err(domain(
                "theta_bw_fd_deg",
                self.theta_bw_fd_deg,
                "must lie in (0, 360] degrees",
            ));
        }
        let br = self.br_beamwidth_deg();
        if !(br > 0.0 && br <= 360.0) {
            return Err(domain(
                "theta_bw_br_deg",
                br,
                "must lie in (0, 360] degrees",
            ));
        }
        if self.q_uf < 1.0 && br < self.theta_rd_deg {
            return Err(domain(
                "theta_bw_br_deg",
                br,
                "a BR beam must be at least theta_rd_deg wide to cover relay and mmAP",
            ));
        }
        Ok(())
    }

    /// Sets a parameter by name. Integer fields reject fractional values.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "n_ues" => {
                if value.fract() != 0.0 || !(1.0..=u32::MAX as f64).contains(&value) {
                    return Err(domain("n_ues", value, "must be a positive integer"));
                }
                self.n_ues = value as u32;
            }
            "q_u" => self.q_u = value,
            "q_uf" => self.q_uf = value,
            "q_ur" => self.q_ur = value,
            "q_r" => self.q_r = value,
            "gamma_db" => self.gamma_db = value,
            "alpha" => self.alpha = value,
            "p_t_dbm" => self.p_t_dbm = value,
            "p_n_dbm" => self.p_n_dbm = value,
            "f_c_ghz" => self.f_c_ghz = value,
            "h_ap_m" => self.h_ap_m = value,
            "h_ue_m" => self.h_ue_m = value,
            "d_ur_m" => self.d_ur_m = value,
            "d_ud_m" => self.d_ud_m = value,
            "theta_rd_deg" => self.theta_rd_deg = value,
            "theta_bw_fd_deg" => self.theta_bw_fd_deg = value,
            "theta_bw_br_deg" => self.theta_bw_br_deg = Some(value),
            other => return Err(ModelError::UnknownParameter(other.to_string())),
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        Ok(match name {
            "n_ues" => f64::from(self.n_ues),
            "q_u" => self.q_u,
            "q_uf" => self.q_uf,
            "q_ur" => self.q_ur,
            "q_r" => self.q_r,
            "gamma_db" => self.gamma_db,
            "alpha" => self.alpha,
            "p_t_dbm" => self.p_t_dbm,
            "p_n_dbm" => self.p_n_dbm,
            "f_c_ghz" => self.f_c_ghz,
            "h_ap_m" => self.h_ap_m,
            "h_ue_m" => self.h_ue_m,
            "d_ur_m" => self.d_ur_m,
            "d_ud_m" => self.d_ud_m,
            "theta_rd_deg" => self.theta_rd_deg,
            "theta_bw_fd_deg" => self.theta_bw_fd_deg,
            "theta_bw_br_deg" => self.br_beamwidth_deg(),
            other => return Err(ModelError::UnknownParameter(other.to_string())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = ScenarioConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.br_beamwidth_deg(), 30.0);
        assert!((cfg.gamma_linear() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_out_of_domain_probability() {
        let cfg = ScenarioConfig {
            q_u: 1.5,
            ..Default::default()
        };
        match cfg.validate() {
            Err(ModelError::Domain { field, .. }) => assert_eq!(field, "q_u"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn narrow_br_beam_rejected_only_when_br_is_used() {
        let mut cfg = ScenarioConfig {
            theta_bw_br_deg: Some(10.0),
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        cfg.q_uf = 1.0;
        cfg.validate().unwrap();
    }

    #[test]
    fn set_get_every_name() {
        let mut cfg = ScenarioConfig::default();
        for name in PARAMETER_NAMES {
            let v = cfg.get(name).unwrap();
            cfg.set(name, v).unwrap();
            assert_eq!(cfg.get(name).unwrap(), v, "{name}");
        }
        assert!(cfg.set("n_ues", 2.5).is_err());
        assert!(matches!(
            cfg.set("q_x", 0.1),
            Err(ModelError::UnknownParameter(_))
        ));
    }
}
