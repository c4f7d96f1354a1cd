//! Periodic Fourier machinery along x: spectral derivatives, the regularized
//! advection solve `v ∂f/∂x + ε f = rhs`, and RK4 time marching of the same
//! operator mode by mode.
//!
//! Transform convention: forward `F_k = Σ_j f_j e^{−2πi jk/N}` (unnormalized),
//! inverse divides by N. The Nyquist wavenumber is treated as zero so that the
//! spectral derivative of a real field stays real.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{QbeError, Result};
use crate::phase_space::{PhaseField, PhaseGrid};

/// Forward and inverse transforms for one periodic axis.
#[derive(Clone)]
pub struct SpectralAxis {
    pub n: usize,
    pub length: f64,
    /// Effective wavenumbers, Nyquist set to zero.
    pub k: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralAxis")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl SpectralAxis {
    pub fn new(n: usize, length: f64) -> Self {
        let mut planner = FftPlanner::new();
        let k = (0..n)
            .map(|j| {
                if n.is_multiple_of(2) && j == n / 2 {
                    0.0
                } else {
                    let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                    2.0 * PI * m / length
                }
            })
            .collect();
        SpectralAxis {
            n,
            length,
            k,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn for_grid(grid: &PhaseGrid) -> Self {
        Self::new(grid.n_x, grid.length)
    }

    pub fn forward(&self, line: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = line.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    pub fn forward_complex(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Inverse transform including the 1/N factor; returns the real part.
    pub fn inverse(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.inverse.process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * s).collect()
    }

    /// Inverse transform including the 1/N factor, in place.
    pub fn inverse_complex(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|c| *c *= s);
    }

    /// Spectral first derivative of a real periodic line.
    pub fn derivative(&self, line: &[f64]) -> Vec<f64> {
        let mut hat = self.forward(line);
        for (c, k) in hat.iter_mut().zip(&self.k) {
            *c *= Complex64::new(0.0, *k);
        }
        self.inverse(hat)
    }
}

/// Apply `fn(ip, iw, line) -> line` to every x line of a field in parallel.
fn map_lines<F>(grid: &PhaseGrid, f: &PhaseField, op: F) -> Result<PhaseField>
where
    F: Fn(usize, usize, &[f64]) -> Result<Vec<f64>> + Sync,
{
    let n_x = grid.n_x;
    let lines: Vec<Vec<f64>> = (0..grid.n_p * grid.n_omega)
        .into_par_iter()
        .map(|k| op(k / grid.n_omega, k % grid.n_omega, &f.data[k * n_x..(k + 1) * n_x]))
        .collect::<Result<_>>()?;
    let mut out = grid.zeros();
    for (k, line) in lines.into_iter().enumerate() {
        out.data[k * n_x..(k + 1) * n_x].copy_from_slice(&line);
    }
    Ok(out)
}

/// Spectral x-derivative of a whole field.
pub fn spectral_dx(grid: &PhaseGrid, axis: &SpectralAxis, f: &PhaseField) -> PhaseField {
    map_lines(grid, f, |_, _, line| Ok(axis.derivative(line))).expect("derivative cannot fail")
}

/// `v(p) ∂f/∂x + ε f` with the spectral derivative.
pub fn advection_operator(grid: &PhaseGrid, axis: &SpectralAxis, f: &PhaseField, eps: f64) -> PhaseField {
    let dfx = spectral_dx(grid, axis, f);
    PhaseField::from_fn(grid, |ip, iw, ix| {
        let i = grid.index(ip, iw, ix);
        grid.velocity(grid.p[ip]) * dfx.data[i] + eps * f.data[i]
    })
}

/// Solve `v(p) ∂f/∂x + ε f = rhs` on every (p, ω) line:
/// `f̂(k) = r̂hs(k) / (i k v + ε)`.
pub fn solve_advection_fourier(
    grid: &PhaseGrid,
    axis: &SpectralAxis,
    rhs: &PhaseField,
    eps: f64,
) -> Result<PhaseField> {
    map_lines(grid, rhs, |ip, iw, line| {
        let v = grid.velocity(grid.p[ip]);
        let scale = line.iter().map(|x| x.abs()).sum::<f64>();
        let mut hat = axis.forward(line);
        for (c, k) in hat.iter_mut().zip(&axis.k) {
            let den = Complex64::new(eps, k * v);
            if den.norm() == 0.0 {
                if c.norm() > 1e-13 * scale {
                    return Err(QbeError::Singularity {
                        p_index: ip,
                        omega_index: iw,
                    });
                }
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c /= den;
            }
        }
        Ok(axis.inverse(hat))
    })
}

/// Outcome of a time march.
#[derive(Clone, Debug)]
pub struct MarchResult {
    pub field: PhaseField,
    pub steps: usize,
    /// Final estimate of the distance to the fixed point, relative to ‖f‖∞.
    pub last_change: f64,
}

/// Largest `|v| dt / Δx` on the grid.
pub fn cfl_number(grid: &PhaseGrid, dt: f64) -> f64 {
    grid.max_speed() * dt / grid.dx
}

/// Check the explicit-step limit, suggesting a compliant dt (fs) on failure.
pub fn check_cfl(grid: &PhaseGrid, dt: f64, cfl_max: f64) -> Result<()> {
    let cfl = cfl_number(grid, dt);
    if cfl > cfl_max {
        let suggested = cfl_max * grid.dx / grid.max_speed();
        return Err(QbeError::Cfl {
            cfl,
            cfl_max,
            suggested_dt_fs: crate::units::internal_to_fs(suggested) * 0.99,
        });
    }
    Ok(())
}

/// Stop rule and limits for [`march_advection`].
#[derive(Clone, Copy, Debug)]
pub struct MarchControl {
    pub dt: f64,
    pub cfl_max: f64,
    pub max_steps: usize,
    /// Stop once the estimated distance to the fixed point falls below this
    /// fraction of ‖f‖∞; `None` runs exactly `max_steps` steps.
    pub target: Option<f64>,
}

/// RK4 integration of `∂f/∂t = −v ∂f/∂x − ε f + rhs` from `init`.
///
/// Each Fourier mode evolves independently, `ĝ' = −(i k v + ε) ĝ + r̂hs`.
pub fn march_advection(
    grid: &PhaseGrid,
    axis: &SpectralAxis,
    rhs: &PhaseField,
    init: &PhaseField,
    eps: f64,
    ctl: MarchControl,
) -> Result<MarchResult> {
    check_cfl(grid, ctl.dt, ctl.cfl_max)?;
    let n_x = grid.n_x;
    let n_lines = grid.n_p * grid.n_omega;
    let lam: Vec<Vec<Complex64>> = (0..grid.n_p)
        .map(|ip| {
            let v = grid.velocity(grid.p[ip]);
            axis.k.iter().map(|k| Complex64::new(-eps, -k * v)).collect()
        })
        .collect();
    let src: Vec<Vec<Complex64>> = (0..n_lines)
        .into_par_iter()
        .map(|k| axis.forward(&rhs.data[k * n_x..(k + 1) * n_x]))
        .collect();
    let mut state: Vec<Vec<Complex64>> = (0..n_lines)
        .into_par_iter()
        .map(|k| axis.forward(&init.data[k * n_x..(k + 1) * n_x]))
        .collect();
    let dt = ctl.dt;
    let slowest = if eps > 0.0 { eps * dt } else { f64::INFINITY };
    let mut history = Vec::new();
    let mut steps = 0;
    let mut last = f64::INFINITY;
    while steps < ctl.max_steps {
        let (delta, size) = state
            .par_iter_mut()
            .enumerate()
            .map(|(line, g)| {
                let l = &lam[line / grid.n_omega];
                let s = &src[line];
                let mut dmax: f64 = 0.0;
                let mut gmax: f64 = 0.0;
                for j in 0..g.len() {
                    let rate = |y: Complex64| l[j] * y + s[j];
                    let y = g[j];
                    let k1 = rate(y);
                    let k2 = rate(y + k1 * (dt / 2.0));
                    let k3 = rate(y + k2 * (dt / 2.0));
                    let k4 = rate(y + k3 * dt);
                    let step = (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
                    g[j] = y + step;
                    dmax = dmax.max(step.norm());
                    gmax = gmax.max(g[j].norm());
                }
                (dmax, gmax)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
        steps += 1;
        last = if size > 0.0 { delta / size / slowest.min(1.0) } else { 0.0 };
        if steps % 100 == 0 {
            history.push(last);
        }
        if let Some(target) = ctl.target {
            if last <= target {
                break;
            }
        }
    }
    if let Some(target) = ctl.target {
        if last > target {
            return Err(QbeError::IterationLimit {
                steps,
                last,
                history,
            });
        }
    }
    let lines: Vec<Vec<f64>> = state.into_par_iter().map(|g| axis.inverse(g)).collect();
    let mut field = grid.zeros();
    for (k, line) in lines.into_iter().enumerate() {
        field.data[k * n_x..(k + 1) * n_x].copy_from_slice(&line);
    }
    Ok(MarchResult {
        field,
        steps,
        last_change: last,
    })
}
