//! Charge density, charge current and thermal current profiles, plus the
//! continuity diagnostic.

use std::f64::consts::PI;

use serde::Serialize;

use crate::phase_space::{PhaseField, PhaseGrid};
use crate::solver::PerturbationCascade;
use crate::spectral::spectral_dx;

const NORM: f64 = 1.0 / (4.0 * PI * PI);

/// ρ(x) = e ∫∫ f dp dω / (2π)².
pub fn charge_density(grid: &PhaseGrid, f: &PhaseField, charge: f64) -> Vec<f64> {
    grid.integrate_pw(f).iter().map(|v| charge * v * NORM).collect()
}

fn velocity_weighted(grid: &PhaseGrid, f: &PhaseField, weight: impl Fn(f64) -> f64 + Sync) -> PhaseField {
    PhaseField::from_fn(grid, |ip, iw, ix| {
        grid.velocity(grid.p[ip]) * weight(grid.omega[iw]) * f.get(ip, iw, ix)
    })
}

/// J(x) = e ∫∫ v f dp dω / (2π)².
pub fn charge_current(grid: &PhaseGrid, f: &PhaseField, charge: f64) -> Vec<f64> {
    let vf = velocity_weighted(grid, f, |_| 1.0);
    grid.integrate_pw(&vf).iter().map(|v| charge * v * NORM).collect()
}

/// J_Q(x) = ∫∫ v (ω − μ) f dp dω / (2π)².
pub fn thermal_current(grid: &PhaseGrid, f: &PhaseField, mu: f64) -> Vec<f64> {
    let vf = velocity_weighted(grid, f, |w| w - mu);
    grid.integrate_pw(&vf).iter().map(|v| v * NORM).collect()
}

/// Observables over x.
#[derive(Clone, Debug, Serialize)]
pub struct ObservableProfile {
    pub x_nm: Vec<f64>,
    pub temperature: Vec<f64>,
    pub rho: Vec<f64>,
    pub j: Vec<f64>,
    pub j_q: Vec<f64>,
}

impl ObservableProfile {
    pub fn from_distribution(grid: &PhaseGrid, temps: &[f64], f: &PhaseField, charge: f64, mu: f64) -> Self {
        ObservableProfile {
            x_nm: grid.x.clone(),
            temperature: temps.to_vec(),
            rho: charge_density(grid, f, charge),
            j: charge_current(grid, f, charge),
            j_q: thermal_current(grid, f, mu),
        }
    }
}

/// `max_x |dJ/dx + S(x)|`, where `S = −e ∫∫ Σ_n (RHS_n − ε f_n) / (2π)²` is
/// the source the collision and force terms inject at each order.
///
/// dJ/dx uses the exact x-gradient of f0 and the spectral derivative of the
/// corrections, matching the operator the solver inverts.
pub fn continuity_residual(cascade: &PerturbationCascade, charge: f64) -> f64 {
    let bg = &cascade.background;
    let g = &bg.grid;
    let dfx = bg
        .f0_dx
        .add(&spectral_dx(g, &bg.axis, &cascade.f1))
        .add(&spectral_dx(g, &bg.axis, &cascade.f2));
    let djdx = charge_current(g, &dfx, charge);
    let eps = cascade.eps_reg;
    let src_field = cascade
        .rhs1
        .sub(&cascade.f1.scale(eps))
        .add(&cascade.rhs2.sub(&cascade.f2.scale(eps)));
    let src = charge_density(g, &src_field, charge);
    djdx.iter().zip(&src).map(|(d, s)| (d - s).abs()).fold(0.0, f64::max)
}
