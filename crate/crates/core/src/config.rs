//! Run configuration: TOML-compatible `[section] key = value` files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{QbeError, Result};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_p: usize,
    pub n_omega: usize,
    pub n_x: usize,
    pub p_max: f64,
    pub omega_min_ev: f64,
    pub omega_max_ev: f64,
    pub length_nm: f64,
    pub dt_fs: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    pub t0_kelvin: f64,
    pub b_kelvin_per_nm: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum GreenMode {
    /// G^r = 1/(ω − ε_p − Σ^r + iη_min)
    #[default]
    Dyson,
    /// G^r = 1/(ω − ε_p + iη), Σ^r ignored
    Free,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub m_eff: f64,
    pub mu_ev: f64,
    pub eta_ev: f64,
    pub gamma_ev: f64,
    #[serde(default)]
    pub g_r_mode: GreenMode,
}

fn default_charge() -> f64 {
    -1.0
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    pub e_field_v_per_m: f64,
    /// Carrier charge in units of the elementary charge (electrons: −1).
    #[serde(default = "default_charge")]
    pub charge_e: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    #[default]
    Steady,
    Transient,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum CollisionMode {
    #[default]
    Plain,
    Corrected,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum GaugeReduction {
    #[default]
    Weighted,
    Unweighted,
}

/// Relaxation regularizer: an explicit rate (eV) or `"auto"`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum EpsReg {
    Value(f64),
    #[default]
    Auto,
}

impl Serialize for EpsReg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EpsReg::Value(v) => s.serialize_f64(*v),
            EpsReg::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for EpsReg {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(EpsReg::Value(v)),
            Raw::Text(t) if t == "auto" => Ok(EpsReg::Auto),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"auto\", got \"{t}\""
            ))),
        }
    }
}

fn default_max_steps() -> usize {
    200_000
}
fn default_cfl_max() -> f64 {
    0.8
}
fn default_psi_time_fs() -> f64 {
    100.0
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub order: usize,
    #[serde(default)]
    pub eps_reg: EpsReg,
    pub tol: f64,
    #[serde(default)]
    pub mode: SolverMode,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_cfl_max")]
    pub cfl_max: f64,
    #[serde(default)]
    pub collision_mode: CollisionMode,
    #[serde(default)]
    pub gauge_reduction: GaugeReduction,
    /// Time at which ψ is reported for steady runs.
    #[serde(default = "default_psi_time_fs")]
    pub psi_time_fs: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum PhononModel {
    Acoustic,
    Einstein,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum CouplingLaw {
    #[default]
    Constant,
    Linear,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum QGrid {
    Symmetric,
    #[default]
    Asymmetric,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PhononConfig {
    pub model: PhononModel,
    #[serde(default)]
    pub sound_speed_nm_fs: Option<f64>,
    #[serde(default)]
    pub omega0_ev: Option<f64>,
    pub coupling_ev: f64,
    #[serde(default)]
    pub coupling_law: CouplingLaw,
    pub n_q: usize,
    pub q_max: f64,
    #[serde(default)]
    pub q_grid: QGrid,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub grid: GridConfig,
    pub thermal: ThermalConfig,
    pub material: MaterialConfig,
    pub drive: DriveConfig,
    pub solver: SolverConfig,
    pub phonon: PhononConfig,
    pub output: OutputConfig,
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(QbeError::config(field, format!("must be positive, got {v}")))
    }
}

impl SimConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| QbeError::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| QbeError::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Parameters used for the temperature-family runs: b = 2 K/nm and
    /// E = −1.0×10⁴ V/m over a 100 nm conductor.
    pub fn reference() -> Self {
        SimConfig {
            grid: GridConfig {
                n_p: 48,
                n_omega: 48,
                n_x: 32,
                p_max: 1.5,
                omega_min_ev: -0.15,
                omega_max_ev: 0.35,
                length_nm: 100.0,
                dt_fs: 2.0,
            },
            thermal: ThermalConfig {
                t0_kelvin: 200.0,
                b_kelvin_per_nm: 2.0,
            },
            material: MaterialConfig {
                m_eff: 0.2,
                mu_ev: 0.1,
                eta_ev: 0.02,
                gamma_ev: 0.03,
                g_r_mode: GreenMode::Free,
            },
            drive: DriveConfig {
                e_field_v_per_m: -1.0e4,
                charge_e: -1.0,
            },
            solver: SolverConfig {
                order: 2,
                eps_reg: EpsReg::Value(0.005),
                tol: 1e-8,
                mode: SolverMode::Steady,
                max_steps: default_max_steps(),
                cfl_max: default_cfl_max(),
                collision_mode: CollisionMode::Plain,
                gauge_reduction: GaugeReduction::Weighted,
                psi_time_fs: default_psi_time_fs(),
            },
            phonon: PhononConfig {
                model: PhononModel::Acoustic,
                sound_speed_nm_fs: Some(0.005),
                omega0_ev: None,
                coupling_ev: 3e-6,
                coupling_law: CouplingLaw::Constant,
                n_q: 16,
                q_max: 0.5,
                q_grid: QGrid::Asymmetric,
            },
            output: OutputConfig {
                dir: PathBuf::from("out"),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        for (name, n) in [("grid.n_p", g.n_p), ("grid.n_omega", g.n_omega), ("grid.n_x", g.n_x)] {
            if n < 2 {
                return Err(QbeError::config(name, format!("count must be >= 2, got {n}")));
            }
        }
        positive("grid.p_max", g.p_max)?;
        positive("grid.length_nm", g.length_nm)?;
        positive("grid.dt_fs", g.dt_fs)?;
        if !(g.omega_max_ev > g.omega_min_ev) {
            return Err(QbeError::config(
                "grid.omega_max_ev",
                format!("must exceed omega_min_ev ({} <= {})", g.omega_max_ev, g.omega_min_ev),
            ));
        }
        let m = &self.material;
        positive("material.m_eff", m.m_eff)?;
        positive("material.eta_ev", m.eta_ev)?;
        positive("material.gamma_ev", m.gamma_ev)?;
        let s = &self.solver;
        if !(s.order == 1 || s.order == 2) {
            return Err(QbeError::config("solver.order", format!("must be 1 or 2, got {}", s.order)));
        }
        positive("solver.tol", s.tol)?;
        positive("solver.cfl_max", s.cfl_max)?;
        if let EpsReg::Value(v) = s.eps_reg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(QbeError::config("solver.eps_reg", format!("must be >= 0, got {v}")));
            }
        }
        let ph = &self.phonon;
        if ph.n_q < 1 {
            return Err(QbeError::config("phonon.n_q", "must be >= 1"));
        }
        positive("phonon.q_max", ph.q_max)?;
        if !(ph.coupling_ev.is_finite() && ph.coupling_ev >= 0.0) {
            return Err(QbeError::config("phonon.coupling_ev", "must be >= 0"));
        }
        match ph.model {
            PhononModel::Acoustic => match ph.sound_speed_nm_fs {
                Some(c) => positive("phonon.sound_speed_nm_fs", c)?,
                None => return Err(QbeError::config("phonon.sound_speed_nm_fs", "required for acoustic model")),
            },
            PhononModel::Einstein => match ph.omega0_ev {
                Some(w) => positive("phonon.omega0_ev", w)?,
                None => return Err(QbeError::config("phonon.omega0_ev", "required for einstein model")),
            },
        }
        let t = &self.thermal;
        let dx = g.length_nm / g.n_x as f64;
        let x_last = g.length_nm - dx;
        let t_min = t.t0_kelvin.min(t.t0_kelvin + t.b_kelvin_per_nm * x_last);
        if !(t_min > 0.0) {
            return Err(QbeError::config(
                "thermal",
                format!("temperature T0 + b*x reaches {t_min} K on the grid; shrink length_nm or b"),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_round_trips_through_toml() {
        let cfg = SimConfig::reference();
        let text = cfg.to_toml_string();
        let back = SimConfig::from_toml_str(&text, Path::new("mem")).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn eps_reg_auto_parses() {
        let mut text = SimConfig::reference().to_toml_string();
        text = text.replace("eps_reg = 0.005", "eps_reg = \"auto\"");
        let cfg = SimConfig::from_toml_str(&text, Path::new("mem")).unwrap();
        assert_eq!(cfg.solver.eps_reg, EpsReg::Auto);
    }

    #[test]
    fn zero_count_names_field() {
        let mut cfg = SimConfig::reference();
        cfg.grid.n_x = 0;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("grid.n_x"), "{err}");
        assert!(err.is_configuration());
    }

    #[test]
    fn negative_temperature_rejected() {
        let mut cfg = SimConfig::reference();
        cfg.thermal.t0_kelvin = 1.0;
        cfg.thermal.b_kelvin_per_nm = -2.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn order_three_rejected() {
        let mut cfg = SimConfig::reference();
        cfg.solver.order = 3;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_key_rejected() {
        let text = SimConfig::reference().to_toml_string().replace("[drive]", "[drive]\nbogus = 1");
        assert!(SimConfig::from_toml_str(&text, Path::new("mem")).is_err());
    }
}
