//! Damping forces, the anomalous velocity, and their reduction over (p, ω).

use crate::config::{CollisionMode, GaugeReduction};
use crate::phase_space::{PhaseField, PhaseGrid};
use crate::phonon::PhononMoments;
use crate::self_energy::SigmaDerivatives;

/// The four-dimensional damping force. In corrected mode `f1` and `f2` hold
/// the primed forces and `v_anor` is present.
#[derive(Clone, Debug)]
pub struct DampingForce {
    pub f1: PhaseField,
    pub f2: PhaseField,
    pub v_anor: Option<PhaseField>,
    pub mode: CollisionMode,
}

/// Plain damping force. `e_force` is eE in eV/nm; `f` is the distribution
/// the force acts on (f′ = 1 − f).
pub fn damping_force(
    e_force: f64,
    sd: &SigmaDerivatives,
    moments: &PhononMoments,
    f: &PhaseField,
) -> DampingForce {
    let n_x = f.n_x;
    let mut f1 = f.clone();
    let mut f2 = f.clone();
    for i in 0..f.data.len() {
        let m = moments.at(i % n_x);
        let hole = 1.0 - f.data[i];
        f1.data[i] = -e_force * sd.re_sigma_dw.data[i] + m.m_q * hole - m.m1 * sd.re_g_dw.data[i];
        f2.data[i] = e_force * sd.re_sigma_dp.data[i] + m.m_omega * hole;
    }
    DampingForce {
        f1,
        f2,
        v_anor: None,
        mode: CollisionMode::Plain,
    }
}

/// Quantum-corrected damping force with the anomalous velocity.
pub fn damping_force_corrected(
    e_force: f64,
    sd: &SigmaDerivatives,
    moments: &PhononMoments,
    f: &PhaseField,
) -> DampingForce {
    let plain = damping_force(e_force, sd, moments, f);
    let n_x = f.n_x;
    let mut f1 = plain.f1;
    let mut f2 = plain.f2;
    let mut v = f.clone();
    for i in 0..f.data.len() {
        let m = moments.at(i % n_x);
        f1.data[i] += m.m1 * sd.re_g_dx.data[i];
        f2.data[i] -= m.m_n1 * e_force * sd.re_g_dp.data[i];
        v.data[i] = -sd.re_sigma_dp.data[i] + m.m1 * sd.re_g_dp.data[i];
    }
    DampingForce {
        f1,
        f2,
        v_anor: Some(v),
        mode: CollisionMode::Corrected,
    }
}

/// Force for the requested mode.
pub fn damping_for_mode(
    mode: CollisionMode,
    e_force: f64,
    sd: &SigmaDerivatives,
    moments: &PhononMoments,
    f: &PhaseField,
) -> DampingForce {
    match mode {
        CollisionMode::Plain => damping_force(e_force, sd, moments, f),
        CollisionMode::Corrected => damping_force_corrected(e_force, sd, moments, f),
    }
}

/// Reduce a (p, ω, x) field to x: weighted by `f` (`∫∫F f / ∫∫f`) or a plain
/// (p, ω) average.
pub fn reduce_over_pw(
    grid: &PhaseGrid,
    field: &PhaseField,
    f: &PhaseField,
    how: GaugeReduction,
) -> Vec<f64> {
    match how {
        GaugeReduction::Weighted => {
            let num = grid.integrate_pw(&field.mul(f));
            let den = grid.integrate_pw(f);
            num.iter()
                .zip(&den)
                .map(|(n, d)| if *d != 0.0 { n / d } else { 0.0 })
                .collect()
        }
        GaugeReduction::Unweighted => {
            let area = (2.0 * grid.p_max()) * (grid.omega_max() - grid.omega_min());
            grid.integrate_pw(field).iter().map(|v| v / area).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{CouplingLaw, GreenMode};
    use crate::phase_space::TemperatureProfile;
    use crate::phonon::{compute_moments, Dispersion, MomentSet, PhononBath};
    use crate::self_energy::SelfEnergyField;
    use crate::stencil::DerivativeStencil;

    fn setup(g_ev: f64, b: f64) -> (PhaseGrid, PhononBath, TemperatureProfile) {
        let grid = PhaseGrid::new(7, 9, 4, 0.8, -0.2, 0.3, 40.0, 1.0, 0.2).unwrap();
        let bath = PhononBath::from_points(
            Dispersion::Einstein { omega0: 0.02 },
            &[0.1],
            g_ev,
            CouplingLaw::Constant,
            0.5,
        )
        .unwrap();
        (grid, bath, TemperatureProfile::new(200.0, b))
    }

    fn pieces(
        grid: &PhaseGrid,
        bath: &PhononBath,
        profile: &TemperatureProfile,
        mode: GreenMode,
    ) -> (SigmaDerivatives, PhononMoments) {
        let se = SelfEnergyField::build(bath, grid, profile, 0.1, 0.005, mode).unwrap();
        let st = DerivativeStencil::new(grid);
        (se.derivatives(&st), compute_moments(bath, profile, grid).unwrap())
    }

    #[test]
    fn zero_coupling_zero_force() {
        let (grid, bath, profile) = setup(0.0, 0.0);
        let (sd, m) = pieces(&grid, &bath, &profile, GreenMode::Dyson);
        let f = PhaseField::constant(&grid, 0.4);
        for e in [0.0, 1e-5] {
            let d = damping_force(e, &sd, &m, &f);
            assert_eq!(d.f1.max_abs(), 0.0);
            assert_eq!(d.f2.max_abs(), 0.0);
        }
    }

    #[test]
    fn hand_evaluated_single_mode() {
        let (grid, bath, profile) = setup(0.03, 0.0);
        let (sd, m) = pieces(&grid, &bath, &profile, GreenMode::Dyson);
        let f = grid.zeros();
        let e = 2e-3;
        let d = damping_force(e, &sd, &m, &f);
        let n = crate::phonon::bose_occupation(0.02, 200.0).unwrap();
        let mq = 0.03f64.powi(2) * (2.0 * n + 1.0) * 0.1;
        let mw = 0.03f64.powi(2) * 0.02;
        let m1 = 0.03f64.powi(2) * (2.0 * n + 1.0);
        for i in 0..f.data.len() {
            let f1 = -e * sd.re_sigma_dw.data[i] + mq - m1 * sd.re_g_dw.data[i];
            let f2 = e * sd.re_sigma_dp.data[i] + mw;
            assert!((d.f1.data[i] - f1).abs() <= 1e-14 * f1.abs().max(1e-12));
            assert!((d.f2.data[i] - f2).abs() <= 1e-14 * f2.abs().max(1e-12));
        }
    }

    #[test]
    fn corrected_matches_plain_without_gradient_or_field() {
        let (grid, bath, profile) = setup(0.03, 0.0);
        let (sd, m) = pieces(&grid, &bath, &profile, GreenMode::Dyson);
        let f = PhaseField::sample(&grid, |p, w, _| 0.3 + 0.1 * p * w);
        let plain = damping_force(0.0, &sd, &m, &f);
        let corr = damping_force_corrected(0.0, &sd, &m, &f);
        assert_eq!(plain.f1.data, corr.f1.data);
        assert_eq!(plain.f2.data, corr.f2.data);
        assert_eq!(corr.mode, CollisionMode::Corrected);
    }

    #[test]
    fn anomalous_velocity_free_green() {
        let grid = PhaseGrid::new(401, 5, 2, 0.5, -0.1, 0.2, 10.0, 1.0, 0.2).unwrap();
        let bath = PhononBath::from_points(
            Dispersion::Einstein { omega0: 0.02 },
            &[0.1, 0.2],
            0.02,
            CouplingLaw::Constant,
            0.5,
        )
        .unwrap();
        let profile = TemperatureProfile::uniform(150.0);
        let eta = 0.02;
        // Σ ≡ 0 is forced by zero coupling in Σ; the moments carry the bath.
        let zero_bath = bath.scaled_coupling(0.0);
        let se = SelfEnergyField::build(&zero_bath, &grid, &profile, 0.1, eta, GreenMode::Free).unwrap();
        let st = DerivativeStencil::new(&grid);
        let sd = se.derivatives(&st);
        let m = compute_moments(&bath, &profile, &grid).unwrap();
        let d = damping_force_corrected(1e-5, &sd, &m, &grid.zeros());
        let m1 = MomentSet::at_temperature(&bath, 150.0).unwrap().m1;
        let v = d.v_anor.unwrap();
        for ip in 2..grid.n_p - 2 {
            for iw in 0..grid.n_omega {
                let p = grid.p[ip];
                let a = grid.omega[iw] - grid.energy(p);
                let exact = m1 * (eta * eta - a * a) / (a * a + eta * eta).powi(2) * (-p / grid.mass);
                let scale = m1 / (eta * eta) * grid.p_max() / grid.mass;
                assert!((v.get(ip, iw, 0) - exact).abs() < 1e-6 * scale, "{ip} {iw}");
            }
        }
    }

    #[test]
    fn weighted_reduction_of_constant_force() {
        let (grid, _, _) = setup(0.0, 0.0);
        let force = PhaseField::constant(&grid, 2.5);
        let f = PhaseField::sample(&grid, |p, w, _| 1.0 + p * p + w);
        for how in [GaugeReduction::Weighted, GaugeReduction::Unweighted] {
            let r = reduce_over_pw(&grid, &force, &f, how);
            assert!(r.iter().all(|v| (v - 2.5).abs() < 1e-12), "{how:?} {r:?}");
        }
    }
}
