//! Thermal gauge potentials on a periodic 1D or 2D spatial grid.
//!
//! A force field F(x) is split into its uniform part, a gradient −∇φ, a
//! transverse part −∂A/∂t, and (on even grids) a Nyquist remainder that the
//! real spectral derivative cannot represent. The scalar potential ψ is the
//! running time integral of the fourth force component.

use rustfft::num_complex::Complex64;

use crate::error::{QbeError, Result};
use crate::spectral::SpectralAxis;

/// Periodic spatial grid; `ny == 1` is the 1D case. Index `iy * nx + ix`.
#[derive(Clone, Debug)]
pub struct SpatialGrid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    ax: SpectralAxis,
    ay: SpectralAxis,
}

/// Two-component vector field over the spatial grid (`y` is zero in 1D).
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl VectorField {
    pub fn zeros(n: usize) -> Self {
        VectorField {
            x: vec![0.0; n],
            y: vec![0.0; n],
        }
    }

    pub fn from_x(x: Vec<f64>) -> Self {
        let n = x.len();
        VectorField { x, y: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn add(&self, o: &VectorField) -> VectorField {
        VectorField {
            x: self.x.iter().zip(&o.x).map(|(a, b)| a + b).collect(),
            y: self.y.iter().zip(&o.y).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &VectorField) -> VectorField {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> VectorField {
        VectorField {
            x: self.x.iter().map(|v| v * c).collect(),
            y: self.y.iter().map(|v| v * c).collect(),
        }
    }

    pub fn dot(&self, o: &VectorField) -> f64 {
        self.x.iter().zip(&o.x).map(|(a, b)| a * b).sum::<f64>()
            + self.y.iter().zip(&o.y).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

/// Potentials at one time instant.
#[derive(Clone, Debug)]
pub struct GaugePotentials {
    pub phi: Vec<f64>,
    pub a: VectorField,
    /// ∂A/∂t, kept exactly so reconstruction does not difference in time.
    pub a_dot: VectorField,
    pub mean_force: [f64; 2],
    /// Nyquist content with no discrete gradient or curl representation.
    pub remainder: VectorField,
}

impl SpatialGrid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(QbeError::config("gauge grid", "point counts must be positive"));
        }
        if !(lx > 0.0 && ly > 0.0) {
            return Err(QbeError::config("gauge grid", "lengths must be positive"));
        }
        Ok(SpatialGrid {
            nx,
            ny,
            lx,
            ly,
            ax: SpectralAxis::new(nx, lx),
            ay: SpectralAxis::new(ny, ly),
        })
    }

    pub fn line(nx: usize, lx: f64) -> Result<Self> {
        Self::new(nx, 1, lx, 1.0)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_1d(&self) -> bool {
        self.ny == 1
    }

    pub fn coords(&self, i: usize) -> (f64, f64) {
        let (ix, iy) = (i % self.nx, i / self.nx);
        (ix as f64 * self.lx / self.nx as f64, iy as f64 * self.ly / self.ny as f64)
    }

    fn wavevector(&self, i: usize) -> (f64, f64) {
        (self.ax.k[i % self.nx], self.ay.k[i / self.nx])
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(QbeError::Usage(format!(
                "field of length {n} on a {}x{} grid",
                self.nx, self.ny
            )));
        }
        Ok(())
    }

    pub fn fft(&self, data: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for row in buf.chunks_mut(self.nx) {
            self.ax.forward_complex(row);
        }
        if self.ny > 1 {
            let mut col = vec![Complex64::new(0.0, 0.0); self.ny];
            for ix in 0..self.nx {
                for iy in 0..self.ny {
                    col[iy] = buf[iy * self.nx + ix];
                }
                self.ay.forward_complex(&mut col);
                for iy in 0..self.ny {
                    buf[iy * self.nx + ix] = col[iy];
                }
            }
        }
        buf
    }

    pub fn ifft(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        if self.ny > 1 {
            let mut col = vec![Complex64::new(0.0, 0.0); self.ny];
            for ix in 0..self.nx {
                for iy in 0..self.ny {
                    col[iy] = buf[iy * self.nx + ix];
                }
                self.ay.inverse_complex(&mut col);
                for iy in 0..self.ny {
                    buf[iy * self.nx + ix] = col[iy];
                }
            }
        }
        for row in buf.chunks_mut(self.nx) {
            self.ax.inverse_complex(row);
        }
        buf.iter().map(|c| c.re).collect()
    }

    /// Spectral gradient of a scalar field.
    pub fn gradient(&self, s: &[f64]) -> VectorField {
        let hat = self.fft(s);
        let (mut gx, mut gy) = (hat.clone(), hat);
        for i in 0..self.len() {
            let (kx, ky) = self.wavevector(i);
            gx[i] *= Complex64::new(0.0, kx);
            gy[i] *= Complex64::new(0.0, ky);
        }
        VectorField {
            x: self.ifft(gx),
            y: self.ifft(gy),
        }
    }

    /// Spectral curl `∂F_y/∂x − ∂F_x/∂y`.
    pub fn curl(&self, f: &VectorField) -> Vec<f64> {
        let (fx, fy) = (self.fft(&f.x), self.fft(&f.y));
        let out = (0..self.len())
            .map(|i| {
                let (kx, ky) = self.wavevector(i);
                Complex64::new(0.0, kx) * fy[i] - Complex64::new(0.0, ky) * fx[i]
            })
            .collect();
        self.ifft(out)
    }

    /// Spectral divergence.
    pub fn divergence(&self, f: &VectorField) -> Vec<f64> {
        let (fx, fy) = (self.fft(&f.x), self.fft(&f.y));
        let out = (0..self.len())
            .map(|i| {
                let (kx, ky) = self.wavevector(i);
                Complex64::new(0.0, kx) * fx[i] + Complex64::new(0.0, ky) * fy[i]
            })
            .collect();
        self.ifft(out)
    }

    /// Helmholtz split of F into (φ, transverse part, mean, remainder) with
    /// `F = −∇φ + F_T + mean + remainder`.
    pub fn decompose(&self, f: &VectorField) -> Result<(Vec<f64>, VectorField, [f64; 2], VectorField)> {
        self.check(f.len())?;
        let n = self.len();
        let (fx, fy) = (self.fft(&f.x), self.fft(&f.y));
        let zero = Complex64::new(0.0, 0.0);
        let mut phi = vec![zero; n];
        let (mut tx, mut ty) = (vec![zero; n], vec![zero; n]);
        let (mut rx, mut ry) = (vec![zero; n], vec![zero; n]);
        for i in 1..n {
            let (kx, ky) = self.wavevector(i);
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 {
                rx[i] = fx[i];
                ry[i] = fy[i];
                continue;
            }
            let kdotf = fx[i] * kx + fy[i] * ky;
            phi[i] = Complex64::new(0.0, 1.0) * kdotf / k2;
            if !self.is_1d() {
                tx[i] = fx[i] - kdotf * (kx / k2);
                ty[i] = fy[i] - kdotf * (ky / k2);
            } else {
                // the y component of a 1D field is not differentiable along y
                ty[i] = fy[i];
            }
        }
        let mean = [fx[0].re / n as f64, fy[0].re / n as f64];
        Ok((
            self.ifft(phi),
            VectorField {
                x: self.ifft(tx),
                y: self.ifft(ty),
            },
            mean,
            VectorField {
                x: self.ifft(rx),
                y: self.ifft(ry),
            },
        ))
    }
}

/// Zero-mean scalar potential with `−∇φ` equal to the longitudinal part of F.
pub fn solve_scalar_potential(grid: &SpatialGrid, f: &VectorField) -> Result<(Vec<f64>, [f64; 2])> {
    let (phi, _, mean, _) = grid.decompose(f)?;
    Ok((phi, mean))
}

/// Potentials for every sample of a force history with time step `dt`:
/// `A(t) = −∫₀ᵗ F_T dt′` (trapezoid), `A(0) = 0`.
pub fn solve_potentials(grid: &SpatialGrid, history: &[VectorField], dt: f64) -> Result<Vec<GaugePotentials>> {
    let mut out: Vec<GaugePotentials> = Vec::with_capacity(history.len());
    if grid.is_1d() && history.iter().any(|f| f.y.iter().any(|v| *v != 0.0)) {
        log::info!("1D grid: the y force component is kept outside the gauge potentials");
    }
    for f in history {
        let (phi, ft, mean, remainder) = grid.decompose(f)?;
        let a_dot = ft.scale(-1.0);
        let a = match out.last() {
            None => VectorField::zeros(grid.len()),
            Some(prev) => prev.a.add(&prev.a_dot.add(&a_dot).scale(0.5 * dt)),
        };
        out.push(GaugePotentials {
            phi,
            a,
            a_dot,
            mean_force: mean,
            remainder,
        });
    }
    Ok(out)
}

/// `−∂A/∂t − ∇φ + mean + remainder`.
pub fn reconstruct_force(grid: &SpatialGrid, pot: &GaugePotentials) -> Result<VectorField> {
    grid.check(pot.phi.len())?;
    grid.check(pot.a_dot.len())?;
    grid.check(pot.remainder.len())?;
    let grad = grid.gradient(&pot.phi);
    let mut out = pot.a_dot.add(&grad).scale(-1.0).add(&pot.remainder);
    out.x.iter_mut().for_each(|v| *v += pot.mean_force[0]);
    out.y.iter_mut().for_each(|v| *v += pot.mean_force[1]);
    Ok(out)
}

/// `φ → φ − χ̇`, `A → A + ∇χ`, `∂A/∂t → ∂A/∂t + ∇χ̇`.
pub fn gauge_transform(
    grid: &SpatialGrid,
    pot: &GaugePotentials,
    chi: &[f64],
    chi_dot: &[f64],
) -> Result<GaugePotentials> {
    grid.check(chi.len())?;
    grid.check(chi_dot.len())?;
    Ok(GaugePotentials {
        phi: pot.phi.iter().zip(chi_dot).map(|(p, c)| p - c).collect(),
        a: pot.a.add(&grid.gradient(chi)),
        a_dot: pot.a_dot.add(&grid.gradient(chi_dot)),
        mean_force: pot.mean_force,
        remainder: pot.remainder.clone(),
    })
}

/// Cumulative trapezoid integral of a sampled history, ψ(0) = 0.
pub fn psi_potential(history: &[Vec<f64>], dt: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(history.len());
    for (t, sample) in history.iter().enumerate() {
        let next = if t == 0 {
            vec![0.0; sample.len()]
        } else {
            let prev = &out[t - 1];
            let before = &history[t - 1];
            (0..sample.len())
                .map(|i| prev[i] + 0.5 * dt * (before[i] + sample[i]))
                .collect()
        };
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect()
    }

    #[test]
    fn manufactured_gradient_recovered() {
        let g = SpatialGrid::line(64, 100.0).unwrap();
        let k = 2.0 * PI / 100.0;
        let f = VectorField::from_x((0..64).map(|i| -k * (k * g.coords(i).0).cos()).collect());
        let (phi, mean) = solve_scalar_potential(&g, &f).unwrap();
        for i in 0..64 {
            assert!((phi[i] - (k * g.coords(i).0).sin()).abs() < 1e-12);
        }
        assert!(mean[0].abs() < 1e-15);
    }

    #[test]
    fn uniform_force_goes_to_mean() {
        let g = SpatialGrid::line(16, 10.0).unwrap();
        let (phi, mean) = solve_scalar_potential(&g, &VectorField::from_x(vec![2.5; 16])).unwrap();
        assert!(phi.iter().all(|v| v.abs() < 1e-14));
        assert!((mean[0] - 2.5).abs() < 1e-14);
    }

    #[test]
    fn random_1d_round_trip() {
        let g = SpatialGrid::line(32, 100.0).unwrap();
        let f = VectorField::from_x(noise(32, 7));
        let pots = solve_potentials(&g, std::slice::from_ref(&f), 1.0).unwrap();
        assert!(pots[0].a.norm() == 0.0 && pots[0].a_dot.norm() == 0.0);
        let back = reconstruct_force(&g, &pots[0]).unwrap();
        assert!(back.sub(&f).norm() <= 1e-10 * f.norm());
        // zero-mean part is a pure gradient apart from the Nyquist remainder
        let grad = g.gradient(&pots[0].phi).scale(-1.0);
        let resid: Vec<f64> = (0..32).map(|i| f.x[i] - pots[0].mean_force[0] - grad.x[i]).collect();
        let nyq: f64 = (0..32).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } * resid[i]).sum::<f64>() / 32.0;
        assert!(resid.iter().enumerate().all(|(i, r)| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            (r - s * nyq).abs() < 1e-12
        }));
    }

    fn manufactured_2d(g: &SpatialGrid) -> (VectorField, VectorField) {
        let (lx, ly) = (g.lx, g.ly);
        let mut long = VectorField::zeros(g.len());
        let mut trans = VectorField::zeros(g.len());
        for i in 0..g.len() {
            let (x, y) = g.coords(i);
            let (a, b) = (2.0 * PI * x / lx, 2.0 * PI * y / ly);
            // −∇ of sin(a)cos(2b)
            long.x[i] = -(2.0 * PI / lx) * a.cos() * (2.0 * b).cos();
            long.y[i] = (4.0 * PI / ly) * a.sin() * (2.0 * b).sin();
            // (∂h/∂y, −∂h/∂x) of h = cos(a + b)
            trans.x[i] = -(2.0 * PI / ly) * (a + b).sin();
            trans.y[i] = (2.0 * PI / lx) * (a + b).sin();
        }
        (long, trans)
    }

    #[test]
    fn two_dimensional_split() {
        let g = SpatialGrid::new(24, 16, 60.0, 40.0).unwrap();
        let (long, trans) = manufactured_2d(&g);
        let f = long.add(&trans);
        let (_, ft, mean, rem) = g.decompose(&f).unwrap();
        assert!(ft.sub(&trans).norm() <= 1e-10 * f.norm());
        let fl = f.sub(&ft);
        assert!(fl.dot(&ft).abs() <= 1e-10 * f.dot(&f));
        assert!(mean[0].abs() < 1e-12 && rem.norm() < 1e-12);
    }

    #[test]
    fn vector_potential_from_constant_history() {
        let g = SpatialGrid::new(16, 16, 30.0, 30.0).unwrap();
        let (long, trans) = manufactured_2d(&g);
        let f = long.add(&trans);
        let dt = 0.25;
        let pots = solve_potentials(&g, &vec![f.clone(); 5], dt).unwrap();
        let last = &pots[4];
        assert!(last.a.add(&trans.scale(4.0 * dt)).norm() <= 1e-10 * trans.norm());
        let curl_a_dot = g.curl(&last.a_dot.scale(-1.0));
        let curl_f = g.curl(&f);
        let diff: f64 = curl_a_dot.iter().zip(&curl_f).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let size: f64 = curl_f.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(diff <= 1e-10 * size);
        let back = reconstruct_force(&g, last).unwrap();
        assert!(back.sub(&f).norm() <= 1e-10 * f.norm());
    }

    #[test]
    fn curl_free_force_has_no_vector_potential() {
        let g = SpatialGrid::new(16, 8, 30.0, 20.0).unwrap();
        let (long, _) = manufactured_2d(&g);
        let pots = solve_potentials(&g, &[long.clone(), long], 1.0).unwrap();
        assert!(pots[1].a.norm() < 1e-12);
    }

    #[test]
    fn gauge_invariance_random_chi() {
        let g = SpatialGrid::new(16, 12, 30.0, 20.0).unwrap();
        let (long, trans) = manufactured_2d(&g);
        let f = long.add(&trans);
        let pot = &solve_potentials(&g, &[f], 1.0).unwrap()[0];
        let base = reconstruct_force(&g, pot).unwrap();
        let chi = noise(g.len(), 3);
        let chi_dot = noise(g.len(), 4);
        let moved = gauge_transform(&g, pot, &chi, &chi_dot).unwrap();
        let again = reconstruct_force(&g, &moved).unwrap();
        assert!(again.sub(&base).norm() <= 1e-12 * base.norm());
    }

    #[test]
    fn uniform_chi_shifts_phi_only() {
        let g = SpatialGrid::line(8, 10.0).unwrap();
        let f = VectorField::from_x(noise(8, 9));
        let pot = &solve_potentials(&g, &[f], 1.0).unwrap()[0];
        let beta = 0.3;
        let moved = gauge_transform(&g, pot, &vec![beta * 2.0; 8], &vec![beta; 8]).unwrap();
        for i in 0..8 {
            assert!((moved.phi[i] - (pot.phi[i] - beta)).abs() < 1e-15);
        }
        assert!(moved.a.norm() < 1e-14);
        let zero = gauge_transform(&g, pot, &[0.0; 8], &[0.0; 8]).unwrap();
        assert_eq!(zero.phi, pot.phi);
    }

    #[test]
    fn length_mismatch_is_usage_error() {
        let g = SpatialGrid::line(8, 10.0).unwrap();
        let pot = &solve_potentials(&g, &[VectorField::zeros(8)], 1.0).unwrap()[0];
        let g2 = SpatialGrid::line(6, 10.0).unwrap();
        assert!(matches!(reconstruct_force(&g2, pot), Err(QbeError::Usage(_))));
    }

    #[test]
    fn psi_trapezoid() {
        let dt = 0.5;
        let hist: Vec<Vec<f64>> = (0..5).map(|_| vec![2.0, -1.0]).collect();
        let psi = psi_potential(&hist, dt);
        assert_eq!(psi[0], vec![0.0, 0.0]);
        assert!((psi[4][0] - 2.0 * 2.0).abs() < 1e-15 && (psi[4][1] + 2.0).abs() < 1e-15);
        let lin: Vec<Vec<f64>> = (0..5).map(|t| vec![3.0 * t as f64 * dt]).collect();
        let psi = psi_potential(&lin, dt);
        assert!((psi[4][0] - 1.5 * (4.0 * dt).powi(2)).abs() < 1e-14);
        assert_eq!(psi_potential(&hist[..1], dt), vec![vec![0.0, 0.0]]);
    }
}
