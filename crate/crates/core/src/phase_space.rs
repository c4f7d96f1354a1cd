//! Discretized (p, ω, x) domain, temperature profile and equilibrium builders.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::SimConfig;
use crate::error::{QbeError, Result};
use crate::units;

/// Tensor-product grid over momentum, energy and position.
///
/// The p axis includes both endpoints ±p_max, so `p_i = −p_{n_p−1−i}`. The ω
/// axis includes both endpoints as well. The x axis is periodic and covers
/// `[0, L)` with `x_k = k·L/n_x`.
#[derive(Clone, Debug)]
pub struct PhaseGrid {
    pub n_p: usize,
    pub n_omega: usize,
    pub n_x: usize,
    pub p: Vec<f64>,
    pub omega: Vec<f64>,
    pub x: Vec<f64>,
    pub dp: f64,
    pub domega: f64,
    pub dx: f64,
    pub length: f64,
    /// Time step in internal units.
    pub dt: f64,
    /// Internal band mass, `ε_p = p²/(2·mass)`.
    pub mass: f64,
}

impl PhaseGrid {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_p: usize,
        n_omega: usize,
        n_x: usize,
        p_max: f64,
        omega_min: f64,
        omega_max: f64,
        length_nm: f64,
        dt_fs: f64,
        m_eff: f64,
    ) -> Result<Self> {
        for (name, n) in [("n_p", n_p), ("n_omega", n_omega), ("n_x", n_x)] {
            if n < 2 {
                return Err(QbeError::config(name, format!("count must be >= 2, got {n}")));
            }
        }
        for (name, v) in [("p_max", p_max), ("length_nm", length_nm), ("dt_fs", dt_fs), ("m_eff", m_eff)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(QbeError::config(name, format!("must be positive, got {v}")));
            }
        }
        if !(omega_max > omega_min) {
            return Err(QbeError::config("omega_max", "must exceed omega_min"));
        }
        let dp = 2.0 * p_max / (n_p - 1) as f64;
        let p: Vec<f64> = (0..n_p)
            .map(|i| {
                // mirror the upper half so the axis is exactly antisymmetric
                let j = n_p - 1 - i;
                if i < j {
                    -p_max + i as f64 * dp
                } else {
                    p_max - j as f64 * dp
                }
            })
            .collect();
        let domega = (omega_max - omega_min) / (n_omega - 1) as f64;
        let omega = (0..n_omega).map(|j| omega_min + j as f64 * domega).collect();
        let dx = length_nm / n_x as f64;
        let x = (0..n_x).map(|k| k as f64 * dx).collect();
        Ok(PhaseGrid {
            n_p,
            n_omega,
            n_x,
            p,
            omega,
            x,
            dp,
            domega,
            dx,
            length: length_nm,
            dt: units::fs_to_internal(dt_fs),
            mass: units::band_mass(m_eff),
        })
    }

    pub fn from_config(cfg: &SimConfig) -> Result<Self> {
        let g = &cfg.grid;
        Self::new(
            g.n_p,
            g.n_omega,
            g.n_x,
            g.p_max,
            g.omega_min_ev,
            g.omega_max_ev,
            g.length_nm,
            g.dt_fs,
            cfg.material.m_eff,
        )
    }

    pub fn len(&self) -> usize {
        self.n_p * self.n_omega * self.n_x
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn p_max(&self) -> f64 {
        self.p[self.n_p - 1]
    }

    pub fn omega_min(&self) -> f64 {
        self.omega[0]
    }

    pub fn omega_max(&self) -> f64 {
        self.omega[self.n_omega - 1]
    }

    /// Band energy ε_p.
    pub fn energy(&self, p: f64) -> f64 {
        p * p / (2.0 * self.mass)
    }

    /// Group velocity v = p/m.
    pub fn velocity(&self, p: f64) -> f64 {
        p / self.mass
    }

    pub fn max_speed(&self) -> f64 {
        self.velocity(self.p_max()).abs()
    }

    pub fn index(&self, ip: usize, iw: usize, ix: usize) -> usize {
        (ip * self.n_omega + iw) * self.n_x + ix
    }

    pub fn zeros(&self) -> PhaseField {
        PhaseField::zeros(self.n_p, self.n_omega, self.n_x)
    }

    pub fn same_shape(&self, f: &PhaseField) -> bool {
        f.n_p == self.n_p && f.n_omega == self.n_omega && f.n_x == self.n_x
    }

    /// Trapezoid weights over (p, ω), indexed `[ip * n_omega + iw]`, so that
    /// `Σ w g ≈ ∫∫ g dp dω`.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let edge = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let mut w = Vec::with_capacity(self.n_p * self.n_omega);
        for ip in 0..self.n_p {
            for iw in 0..self.n_omega {
                w.push(edge(ip, self.n_p) * edge(iw, self.n_omega) * self.dp * self.domega);
            }
        }
        w
    }

    /// `∫∫ g dp dω` at every x node (trapezoid rule, fixed summation order).
    pub fn integrate_pw(&self, g: &PhaseField) -> Vec<f64> {
        let w = self.quadrature_weights();
        let mut out = vec![0.0; self.n_x];
        for (k, wk) in w.iter().enumerate() {
            let line = &g.data[k * self.n_x..(k + 1) * self.n_x];
            for (o, v) in out.iter_mut().zip(line) {
                *o += wk * v;
            }
        }
        out
    }
}

/// Linear temperature profile `T(x) = T0 + b·x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TemperatureProfile {
    pub t0: f64,
    pub b: f64,
}

impl TemperatureProfile {
    pub fn new(t0: f64, b: f64) -> Self {
        TemperatureProfile { t0, b }
    }

    pub fn uniform(t: f64) -> Self {
        TemperatureProfile { t0: t, b: 0.0 }
    }

    pub fn temperature_at(&self, x: f64) -> Result<f64> {
        let t = self.t0 + self.b * x;
        if t > 0.0 && t.is_finite() {
            Ok(t)
        } else {
            Err(QbeError::Domain(format!(
                "temperature {t} K at x = {x} nm is not positive; shrink the length or the gradient b"
            )))
        }
    }

    /// Temperatures at every x node of the grid.
    pub fn on_grid(&self, grid: &PhaseGrid) -> Result<Vec<f64>> {
        grid.x.iter().map(|&x| self.temperature_at(x)).collect()
    }
}

/// Fermi–Dirac occupancy `1/(exp((ω−μ)/kT) + 1)`.
pub fn fermi_dirac(omega: f64, mu: f64, t_kelvin: f64) -> f64 {
    debug_assert!(t_kelvin > 0.0);
    let arg = (omega - mu) / units::thermal_energy(t_kelvin);
    if arg > 0.0 {
        let e = (-arg).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + arg.exp())
    }
}

/// ∂n_F/∂T at fixed ω and μ.
pub fn fermi_dirac_dt(omega: f64, mu: f64, t_kelvin: f64) -> f64 {
    let n = fermi_dirac(omega, mu, t_kelvin);
    let arg = (omega - mu) / units::thermal_energy(t_kelvin);
    n * (1.0 - n) * arg / t_kelvin
}

/// Real field sampled on every (p, ω, x) node, x index fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseField {
    pub n_p: usize,
    pub n_omega: usize,
    pub n_x: usize,
    pub data: Vec<f64>,
}

impl PhaseField {
    pub fn zeros(n_p: usize, n_omega: usize, n_x: usize) -> Self {
        PhaseField {
            n_p,
            n_omega,
            n_x,
            data: vec![0.0; n_p * n_omega * n_x],
        }
    }

    pub fn constant(grid: &PhaseGrid, c: f64) -> Self {
        let mut f = grid.zeros();
        f.data.fill(c);
        f
    }

    /// Build from a closure of node indices, evaluated in parallel.
    pub fn from_fn<F>(grid: &PhaseGrid, f: F) -> Self
    where
        F: Fn(usize, usize, usize) -> f64 + Sync,
    {
        let (n_w, n_x) = (grid.n_omega, grid.n_x);
        let data = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let ix = i % n_x;
                let iw = (i / n_x) % n_w;
                let ip = i / (n_x * n_w);
                f(ip, iw, ix)
            })
            .collect();
        PhaseField {
            n_p: grid.n_p,
            n_omega: grid.n_omega,
            n_x: grid.n_x,
            data,
        }
    }

    /// Sample a function of physical coordinates (p, ω, x).
    pub fn sample<F>(grid: &PhaseGrid, f: F) -> Self
    where
        F: Fn(f64, f64, f64) -> f64 + Sync,
    {
        Self::from_fn(grid, |ip, iw, ix| f(grid.p[ip], grid.omega[iw], grid.x[ix]))
    }

    #[inline]
    pub fn idx(&self, ip: usize, iw: usize, ix: usize) -> usize {
        (ip * self.n_omega + iw) * self.n_x + ix
    }

    #[inline]
    pub fn get(&self, ip: usize, iw: usize, ix: usize) -> f64 {
        self.data[self.idx(ip, iw, ix)]
    }

    #[inline]
    pub fn set(&mut self, ip: usize, iw: usize, ix: usize, v: f64) {
        let i = self.idx(ip, iw, ix);
        self.data[i] = v;
    }

    /// Contiguous x line for fixed (p, ω).
    pub fn line(&self, ip: usize, iw: usize) -> &[f64] {
        let start = self.idx(ip, iw, 0);
        &self.data[start..start + self.n_x]
    }

    pub fn same_shape(&self, other: &PhaseField) -> bool {
        self.n_p == other.n_p && self.n_omega == other.n_omega && self.n_x == other.n_x
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Self {
        PhaseField {
            data: self.data.par_iter().map(|&v| f(v)).collect(),
            ..*self.shape_only()
        }
    }

    pub fn zip_map(&self, other: &PhaseField, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        assert!(self.same_shape(other), "field shape mismatch");
        PhaseField {
            data: self
                .data
                .par_iter()
                .zip(other.data.par_iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
            ..*self.shape_only()
        }
    }

    fn shape_only(&self) -> &Self {
        self
    }

    pub fn add(&self, other: &PhaseField) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &PhaseField) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &PhaseField) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Plain Euclidean norm of the node values (fixed summation order).
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Per-run count of nodes where a distribution left [0, 1].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BoundsReport {
    pub below_zero: usize,
    pub above_one: usize,
    pub min: f64,
    pub max: f64,
}

impl BoundsReport {
    pub fn is_clean(&self) -> bool {
        self.below_zero == 0 && self.above_one == 0
    }
}

/// Wigner distribution f(p, ω, x). The hole field is always `1 − f`.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerField {
    pub values: PhaseField,
}

impl WignerField {
    pub fn new(values: PhaseField) -> Self {
        WignerField { values }
    }

    pub fn hole(&self) -> PhaseField {
        self.values.map(|v| 1.0 - v)
    }

    /// Reports nodes outside [0, 1]; values are never modified.
    pub fn bounds_report(&self) -> BoundsReport {
        let mut r = BoundsReport {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            ..Default::default()
        };
        for &v in &self.values.data {
            if v < 0.0 {
                r.below_zero += 1;
            }
            if v > 1.0 {
                r.above_one += 1;
            }
            r.min = r.min.min(v);
            r.max = r.max.max(v);
        }
        r
    }
}

/// Normalized Lorentzian spectral weight A(p, ω) on the grid, indexed
/// `[ip * n_omega + iw]`, with `∫ A dω / 2π = 1` for every p under the
/// trapezoid rule used by the observables.
pub fn spectral_weight(grid: &PhaseGrid, gamma: f64) -> Vec<f64> {
    let mut a = vec![0.0; grid.n_p * grid.n_omega];
    for ip in 0..grid.n_p {
        let eps = grid.energy(grid.p[ip]);
        let row = &mut a[ip * grid.n_omega..(ip + 1) * grid.n_omega];
        for (iw, v) in row.iter_mut().enumerate() {
            let d = grid.omega[iw] - eps;
            *v = 2.0 * gamma / (d * d + gamma * gamma);
        }
        let n = row.len();
        let sum: f64 = row
            .iter()
            .enumerate()
            .map(|(i, v)| if i == 0 || i == n - 1 { 0.5 * v } else { *v })
            .sum::<f64>()
            * grid.domega
            / (2.0 * std::f64::consts::PI);
        row.iter_mut().for_each(|v| *v /= sum);
    }
    a
}

/// Local-equilibrium seed `f0 = n_F(ω; μ, T(x)) · A(p, ω)`.
pub fn local_equilibrium(
    grid: &PhaseGrid,
    profile: &TemperatureProfile,
    mu: f64,
    gamma: f64,
) -> Result<WignerField> {
    if !(gamma > 0.0) {
        return Err(QbeError::config("gamma_ev", "spectral width must be positive"));
    }
    if gamma < 2.0 * grid.domega {
        log::warn!(
            "spectral width {gamma} eV is below 2Δω = {} eV; the peak is under-resolved",
            2.0 * grid.domega
        );
    }
    let temps = profile.on_grid(grid)?;
    let a = spectral_weight(grid, gamma);
    Ok(WignerField::new(PhaseField::from_fn(grid, |ip, iw, ix| {
        fermi_dirac(grid.omega[iw], mu, temps[ix]) * a[ip * grid.n_omega + iw]
    })))
}

/// Exact x-gradient of the local-equilibrium seed, `b · ∂f0/∂T`.
pub fn local_equilibrium_gradient(
    grid: &PhaseGrid,
    profile: &TemperatureProfile,
    mu: f64,
    gamma: f64,
) -> Result<PhaseField> {
    let temps = profile.on_grid(grid)?;
    let a = spectral_weight(grid, gamma);
    let b = profile.b;
    Ok(PhaseField::from_fn(grid, |ip, iw, ix| {
        b * fermi_dirac_dt(grid.omega[iw], mu, temps[ix]) * a[ip * grid.n_omega + iw]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> PhaseGrid {
        PhaseGrid::new(9, 41, 8, 1.0, -0.2, 0.4, 100.0, 1.0, 0.2).unwrap()
    }

    #[test]
    fn dx_from_length() {
        let g = PhaseGrid::new(4, 4, 64, 1.0, 0.0, 1.0, 100.0, 1.0, 1.0).unwrap();
        assert_eq!(g.dx, 1.5625);
    }

    #[test]
    fn two_point_momentum_axis() {
        let g = PhaseGrid::new(2, 4, 4, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(g.p, vec![-1.0, 1.0]);
    }

    #[test]
    fn momentum_axis_antisymmetric() {
        for n in [2, 3, 7, 48, 101] {
            let g = PhaseGrid::new(n, 2, 2, 1.3, 0.0, 1.0, 1.0, 1.0, 1.0).unwrap();
            for i in 0..n {
                assert_eq!(g.p[i], -g.p[n - 1 - i]);
            }
        }
    }

    #[test]
    fn zero_count_rejected() {
        let err = PhaseGrid::new(4, 4, 0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("n_x"));
    }

    #[test]
    fn temperature_examples() {
        let p = TemperatureProfile::new(100.0, 2.0);
        assert_eq!(p.temperature_at(10.0).unwrap(), 120.0);
        let u = TemperatureProfile::uniform(200.0);
        assert_eq!(u.temperature_at(37.0).unwrap(), 200.0);
        let bad = TemperatureProfile::new(1.0, -2.0);
        assert!(matches!(bad.temperature_at(10.0), Err(QbeError::Domain(_))));
    }

    #[test]
    fn fermi_dirac_examples() {
        assert_eq!(fermi_dirac(0.1, 0.1, 300.0), 0.5);
        let kt = units::thermal_energy(300.0);
        let v = fermi_dirac(0.1 + kt, 0.1, 300.0);
        assert!((v - 1.0 / (1.0 + std::f64::consts::E)).abs() < 1e-14);
        assert!((fermi_dirac(0.0, 0.1, 1e-6) - 1.0).abs() < 1e-15);
        assert!(fermi_dirac(1.0, 0.1, 1e-6) < 1e-300);
    }

    #[test]
    fn fermi_temperature_derivative_matches_difference() {
        let (w, mu, t) = (0.13, 0.1, 250.0);
        let h = 1e-3;
        let fd = (fermi_dirac(w, mu, t + h) - fermi_dirac(w, mu, t - h)) / (2.0 * h);
        assert!((fd - fermi_dirac_dt(w, mu, t)).abs() < 1e-9);
    }

    #[test]
    fn spectral_weight_normalized_per_momentum() {
        let g = grid();
        let a = spectral_weight(&g, 0.05);
        for ip in 0..g.n_p {
            let row = &a[ip * g.n_omega..(ip + 1) * g.n_omega];
            let s: f64 = (row.iter().sum::<f64>() - 0.5 * (row[0] + row[g.n_omega - 1])) * g.domega
                / (2.0 * std::f64::consts::PI);
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn equilibrium_even_in_momentum() {
        let g = grid();
        let f = local_equilibrium(&g, &TemperatureProfile::new(100.0, 2.0), 0.1, 0.05).unwrap();
        for ip in 0..g.n_p {
            for iw in 0..g.n_omega {
                for ix in 0..g.n_x {
                    let a = f.values.get(ip, iw, ix);
                    let b = f.values.get(g.n_p - 1 - ip, iw, ix);
                    assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn uniform_temperature_gives_x_independent_seed() {
        let g = grid();
        let f = local_equilibrium(&g, &TemperatureProfile::uniform(150.0), 0.1, 0.05).unwrap();
        for ip in 0..g.n_p {
            for iw in 0..g.n_omega {
                let line = f.values.line(ip, iw);
                assert!(line.iter().all(|&v| v == line[0]));
            }
        }
    }

    #[test]
    fn broad_spectral_weight_nearly_momentum_independent() {
        let g = grid();
        let f = local_equilibrium(&g, &TemperatureProfile::uniform(150.0), 0.1, 1e4).unwrap();
        for iw in 0..g.n_omega {
            let a = f.values.get(0, iw, 0);
            let b = f.values.get(g.n_p / 2, iw, 0);
            assert!((a - b).abs() < 1e-6 * a.abs());
        }
    }

    #[test]
    fn hole_field_is_complement() {
        let g = grid();
        let f = local_equilibrium(&g, &TemperatureProfile::uniform(150.0), 0.1, 0.05).unwrap();
        let h = f.hole();
        for (a, b) in f.values.data.iter().zip(&h.data) {
            assert_eq!(b, &(1.0 - a));
        }
    }

    #[test]
    fn bounds_report_counts_without_clamping() {
        let g = PhaseGrid::new(2, 2, 2, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let mut v = g.zeros();
        v.data = vec![-0.1, 0.5, 1.2, 0.3, 0.0, 1.0, 2.0, 0.9];
        let w = WignerField::new(v.clone());
        let r = w.bounds_report();
        assert_eq!((r.below_zero, r.above_one), (1, 2));
        assert_eq!(w.values, v);
    }

    proptest! {
        #[test]
        fn temperature_is_affine(t0 in 50.0..500.0f64, b in -1.0..3.0f64, x1 in 0.0..50.0f64, x2 in 0.0..50.0f64) {
            let p = TemperatureProfile::new(t0, b);
            let lhs = p.temperature_at(x1).unwrap() + p.temperature_at(x2).unwrap();
            let rhs = 2.0 * p.temperature_at(0.5 * (x1 + x2)).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs());
        }

        #[test]
        fn fermi_dirac_monotone(w in -0.5..0.5f64, dw in 1e-6..0.1f64, t in 10.0..600.0f64) {
            prop_assert!(fermi_dirac(w + dw, 0.05, t) <= fermi_dirac(w, 0.05, t));
        }
    }
}
