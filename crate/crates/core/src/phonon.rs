//! Phonon reservoir: dispersion, coupling, occupation and the moment sums
//! that weight every term of the expanded collision operator.

use serde::Serialize;

use crate::config::{CouplingLaw, PhononConfig, PhononModel, QGrid};
use crate::error::{QbeError, Result};
use crate::phase_space::{PhaseGrid, TemperatureProfile};
use crate::units;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Dispersion {
    /// ω_q = ħ c_s |q|, sound speed in nm/fs.
    Acoustic { sound_speed_nm_fs: f64 },
    /// ω_q = ω0 (eV).
    Einstein { omega0: f64 },
}

/// One retained phonon mode of the q sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhononMode {
    pub q: f64,
    pub omega: f64,
    /// M_q²
    pub coupling2: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhononBath {
    pub dispersion: Dispersion,
    /// Retained modes in ascending q.
    pub modes: Vec<PhononMode>,
    /// q points dropped because ω_q = 0 (acoustic q = 0).
    pub excluded: usize,
}

/// Phonon energy for a dispersion law.
pub fn phonon_dispersion(dispersion: Dispersion, q: f64) -> f64 {
    match dispersion {
        Dispersion::Acoustic { sound_speed_nm_fs } => units::acoustic_energy(sound_speed_nm_fs, q),
        Dispersion::Einstein { omega0 } => omega0,
    }
}

/// Bose occupation `1/(exp(ω/kT) − 1)`; ω must be positive.
pub fn bose_occupation(omega: f64, t_kelvin: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(QbeError::Domain(format!(
            "Bose occupation diverges at phonon energy {omega} eV"
        )));
    }
    if !(t_kelvin > 0.0) {
        return Err(QbeError::Domain(format!("temperature {t_kelvin} K is not positive")));
    }
    Ok(1.0 / (omega / units::thermal_energy(t_kelvin)).exp_m1())
}

impl PhononBath {
    /// Bath from explicit q points with the given coupling law.
    /// Points with ω_q = 0 are dropped and counted.
    pub fn from_points(
        dispersion: Dispersion,
        qs: &[f64],
        coupling_ev: f64,
        law: CouplingLaw,
        q_max: f64,
    ) -> Result<Self> {
        if qs.is_empty() {
            return Err(QbeError::config("phonon.n_q", "empty q grid"));
        }
        let mut qs = qs.to_vec();
        qs.sort_by(|a, b| a.total_cmp(b));
        let g2 = coupling_ev * coupling_ev;
        let mut modes = Vec::with_capacity(qs.len());
        let mut excluded = 0;
        for q in qs {
            let omega = phonon_dispersion(dispersion, q);
            if omega <= 0.0 {
                excluded += 1;
                continue;
            }
            let coupling2 = match law {
                CouplingLaw::Constant => g2,
                CouplingLaw::Linear => g2 * q.abs() / q_max,
            };
            modes.push(PhononMode { q, omega, coupling2 });
        }
        Ok(PhononBath {
            dispersion,
            modes,
            excluded,
        })
    }

    pub fn from_config(cfg: &PhononConfig) -> Result<Self> {
        let dispersion = match cfg.model {
            PhononModel::Acoustic => Dispersion::Acoustic {
                sound_speed_nm_fs: cfg
                    .sound_speed_nm_fs
                    .ok_or_else(|| QbeError::config("phonon.sound_speed_nm_fs", "required"))?,
            },
            PhononModel::Einstein => Dispersion::Einstein {
                omega0: cfg
                    .omega0_ev
                    .ok_or_else(|| QbeError::config("phonon.omega0_ev", "required"))?,
            },
        };
        if cfg.n_q == 0 {
            return Err(QbeError::config("phonon.n_q", "empty q grid"));
        }
        let qs = q_grid(cfg.q_grid, cfg.n_q, cfg.q_max);
        Self::from_points(dispersion, &qs, cfg.coupling_ev, cfg.coupling_law, cfg.q_max)
    }

    /// Same modes with M_q² multiplied by `factor`.
    pub fn scaled_coupling(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.modes.iter_mut().for_each(|m| m.coupling2 *= factor);
        out
    }

    pub fn max_q(&self) -> f64 {
        self.modes.iter().fold(0.0_f64, |m, md| m.max(md.q.abs()))
    }

    pub fn max_omega(&self) -> f64 {
        self.modes.iter().fold(0.0_f64, |m, md| m.max(md.omega))
    }

    /// N_q for every retained mode at temperature T.
    pub fn occupations(&self, t_kelvin: f64) -> Result<Vec<f64>> {
        self.modes.iter().map(|m| bose_occupation(m.omega, t_kelvin)).collect()
    }
}

/// q points for a grid layout: symmetric `[−q_max, q_max]` including both
/// ends, or asymmetric `(0, q_max]`.
pub fn q_grid(layout: QGrid, n_q: usize, q_max: f64) -> Vec<f64> {
    match layout {
        QGrid::Symmetric if n_q == 1 => vec![0.0],
        QGrid::Symmetric => {
            let h = 2.0 * q_max / (n_q - 1) as f64;
            (0..n_q)
                .map(|i| {
                    let j = n_q - 1 - i;
                    if i < j {
                        -q_max + i as f64 * h
                    } else {
                        q_max - j as f64 * h
                    }
                })
                .collect()
        }
        QGrid::Asymmetric => (1..=n_q).map(|i| i as f64 * q_max / n_q as f64).collect(),
    }
}

/// The eight moment sums at one temperature.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MomentSet {
    /// Σ M²(2N+1)
    pub m1: f64,
    /// Σ M² ω
    pub m_omega: f64,
    /// Σ M²(2N+1) q
    pub m_q: f64,
    /// Σ M²(2N+1) ω²
    pub m_omega2: f64,
    /// Σ M² q ω
    pub m_q_omega: f64,
    /// Σ M²(2N+1) q²
    pub m_q2: f64,
    /// Σ M² q² ω
    pub m_q2_omega: f64,
    /// Σ M²(N+1)
    pub m_n1: f64,
}

impl MomentSet {
    pub fn at_temperature(bath: &PhononBath, t_kelvin: f64) -> Result<Self> {
        let mut s = MomentSet::default();
        for m in &bath.modes {
            let n = bose_occupation(m.omega, t_kelvin)?;
            let w = m.coupling2;
            let thermal = w * (2.0 * n + 1.0);
            s.m1 += thermal;
            s.m_omega += w * m.omega;
            s.m_q += thermal * m.q;
            s.m_omega2 += thermal * m.omega * m.omega;
            s.m_q_omega += w * m.q * m.omega;
            s.m_q2 += thermal * m.q * m.q;
            s.m_q2_omega += w * m.q * m.q * m.omega;
            s.m_n1 += w * (n + 1.0);
        }
        Ok(s)
    }

    pub fn as_array(&self) -> [f64; 8] {
        [
            self.m1,
            self.m_omega,
            self.m_q,
            self.m_omega2,
            self.m_q_omega,
            self.m_q2,
            self.m_q2_omega,
            self.m_n1,
        ]
    }
}

/// Moment sums at every x node, evaluated at the local temperature.
#[derive(Clone, Debug, PartialEq)]
pub struct PhononMoments {
    pub per_x: Vec<MomentSet>,
}

impl PhononMoments {
    pub fn at(&self, ix: usize) -> &MomentSet {
        &self.per_x[ix]
    }

    pub fn from_temperatures(bath: &PhononBath, temps: &[f64]) -> Result<Self> {
        Ok(PhononMoments {
            per_x: temps
                .iter()
                .map(|&t| MomentSet::at_temperature(bath, t))
                .collect::<Result<_>>()?,
        })
    }
}

pub fn compute_moments(
    bath: &PhononBath,
    profile: &TemperatureProfile,
    grid: &PhaseGrid,
) -> Result<PhononMoments> {
    if bath.modes.is_empty() {
        return Err(QbeError::config("phonon.n_q", "no phonon modes retained"));
    }
    PhononMoments::from_temperatures(bath, &profile.on_grid(grid)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn acoustic() -> Dispersion {
        Dispersion::Acoustic {
            sound_speed_nm_fs: 0.005,
        }
    }

    #[test]
    fn dispersion_examples() {
        assert_eq!(phonon_dispersion(acoustic(), 0.0), 0.0);
        assert_eq!(phonon_dispersion(Dispersion::Einstein { omega0: 0.03 }, 0.7), 0.03);
        assert_eq!(phonon_dispersion(acoustic(), 0.3), phonon_dispersion(acoustic(), -0.3));
    }

    #[test]
    fn bose_examples() {
        let t = 200.0;
        let kt = units::thermal_energy(t);
        assert!((bose_occupation(kt * 2f64.ln(), t).unwrap() - 1.0).abs() < 1e-12);
        let expected = 1.0 / (std::f64::consts::E - 1.0);
        assert!((bose_occupation(kt, t).unwrap() - expected).abs() < 1e-12);
        assert!((bose_occupation(kt, t).unwrap() - 0.581_976_706_869_326_4).abs() < 1e-12);
        assert!(bose_occupation(0.01, 1e-3).unwrap() < 1e-300);
        assert!(bose_occupation(0.0, t).is_err());
    }

    #[test]
    fn acoustic_zero_mode_excluded_and_counted() {
        let qs = q_grid(QGrid::Symmetric, 5, 0.5);
        let bath = PhononBath::from_points(acoustic(), &qs, 0.01, CouplingLaw::Constant, 0.5).unwrap();
        assert_eq!(bath.excluded, 1);
        assert_eq!(bath.modes.len(), 4);
    }

    #[test]
    fn zero_coupling_zero_moments() {
        let qs = q_grid(QGrid::Asymmetric, 8, 0.5);
        let bath = PhononBath::from_points(acoustic(), &qs, 0.0, CouplingLaw::Constant, 0.5).unwrap();
        let m = MomentSet::at_temperature(&bath, 300.0).unwrap();
        assert!(m.as_array().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn symmetric_grid_kills_odd_moments() {
        let qs = q_grid(QGrid::Symmetric, 9, 0.5);
        let bath = PhononBath::from_points(acoustic(), &qs, 0.01, CouplingLaw::Constant, 0.5).unwrap();
        let m = MomentSet::at_temperature(&bath, 300.0).unwrap();
        assert!(m.m_q.abs() < 1e-18);
        assert!(m.m_q_omega.abs() < 1e-18);
    }

    #[test]
    fn three_point_einstein_hand_sum() {
        let (g, w0, t) = (0.02, 0.03, 250.0);
        let qs = [0.1, 0.25, 0.4];
        let bath = PhononBath::from_points(Dispersion::Einstein { omega0: w0 }, &qs, g, CouplingLaw::Constant, 0.4)
            .unwrap();
        let m = MomentSet::at_temperature(&bath, t).unwrap();
        let n = 1.0 / ((w0 / (units::K_B_EV * t)).exp() - 1.0);
        let g2 = g * g;
        let sq: f64 = 0.1 + 0.25 + 0.4;
        let sq2: f64 = 0.01 + 0.0625 + 0.16;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-14 * b.abs().max(1e-30);
        assert!(close(m.m_omega, 3.0 * g2 * w0));
        assert!(close(m.m1, 3.0 * g2 * (2.0 * n + 1.0)));
        assert!(close(m.m_q, g2 * (2.0 * n + 1.0) * sq));
        assert!(close(m.m_omega2, 3.0 * g2 * (2.0 * n + 1.0) * w0 * w0));
        assert!(close(m.m_q_omega, g2 * sq * w0));
        assert!(close(m.m_q2, g2 * (2.0 * n + 1.0) * sq2));
        assert!(close(m.m_q2_omega, g2 * sq2 * w0));
        assert!(close(m.m_n1, 3.0 * g2 * (n + 1.0)));
    }

    #[test]
    fn linear_coupling_law() {
        let bath = PhononBath::from_points(acoustic(), &[0.25, 0.5], 0.1, CouplingLaw::Linear, 0.5).unwrap();
        assert!((bath.modes[0].coupling2 - 0.005).abs() < 1e-15);
        assert!((bath.modes[1].coupling2 - 0.01).abs() < 1e-15);
    }

    #[test]
    fn moments_depend_on_x_only_through_temperature() {
        let grid = PhaseGrid::new(3, 3, 6, 1.0, 0.0, 1.0, 60.0, 1.0, 1.0).unwrap();
        let qs = q_grid(QGrid::Asymmetric, 6, 0.5);
        let bath = PhononBath::from_points(acoustic(), &qs, 0.01, CouplingLaw::Constant, 0.5).unwrap();
        let m = compute_moments(&bath, &TemperatureProfile::uniform(210.0), &grid).unwrap();
        assert!(m.per_x.iter().all(|s| s == &m.per_x[0]));
    }

    #[test]
    fn empty_grid_is_config_error() {
        assert!(PhononBath::from_points(acoustic(), &[], 0.01, CouplingLaw::Constant, 0.5).is_err());
        let only_zero = PhononBath::from_points(acoustic(), &[0.0], 0.01, CouplingLaw::Constant, 0.5).unwrap();
        let grid = PhaseGrid::new(3, 3, 3, 1.0, 0.0, 1.0, 60.0, 1.0, 1.0).unwrap();
        assert!(compute_moments(&only_zero, &TemperatureProfile::uniform(100.0), &grid).is_err());
    }

    proptest! {
        #[test]
        fn doubling_coupling_quadruples_moments(g in 1e-4..0.1f64, t in 20.0..600.0f64) {
            let qs = q_grid(QGrid::Asymmetric, 7, 0.5);
            let a = PhononBath::from_points(acoustic(), &qs, g, CouplingLaw::Constant, 0.5).unwrap();
            let b = PhononBath::from_points(acoustic(), &qs, 2.0 * g, CouplingLaw::Constant, 0.5).unwrap();
            let ma = MomentSet::at_temperature(&a, t).unwrap().as_array();
            let mb = MomentSet::at_temperature(&b, t).unwrap().as_array();
            for (x, y) in ma.iter().zip(mb.iter()) {
                prop_assert!((4.0 * x - y).abs() <= 1e-12 * y.abs().max(1e-300));
            }
        }

        #[test]
        fn even_moments_nondecreasing_in_temperature(t in 10.0..600.0f64, dt in 0.1..50.0f64) {
            let qs = q_grid(QGrid::Asymmetric, 7, 0.5);
            let bath = PhononBath::from_points(acoustic(), &qs, 0.01, CouplingLaw::Constant, 0.5).unwrap();
            let lo = MomentSet::at_temperature(&bath, t).unwrap();
            let hi = MomentSet::at_temperature(&bath, t + dt).unwrap();
            prop_assert!(hi.m1 >= lo.m1);
            prop_assert!(hi.m_omega2 >= lo.m_omega2);
            prop_assert!(hi.m_q2 >= lo.m_q2);
            prop_assert!(lo.m1 >= 0.0 && lo.m_omega2 >= 0.0 && lo.m_q2 >= 0.0);
        }
    }
}
