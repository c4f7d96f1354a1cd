//! Retarded, lesser and greater self-energies of the electron–phonon channel
//! and the retarded Green function built from them.

use crate::config::GreenMode;
use crate::error::Result;
use crate::phase_space::{fermi_dirac, PhaseField, PhaseGrid, TemperatureProfile};
use crate::phonon::PhononBath;
use crate::stencil::DerivativeStencil;

/// Guard broadening added to the Dyson denominator.
pub const ETA_MIN: f64 = 1e-6;

/// Relative temperature step used for the exact-in-T x-gradient of ReG^r.
const T_STEP_REL: f64 = 1e-4;

/// Something that can be evaluated at off-grid (p, ω) for a given x node.
pub trait Distribution: Sync {
    fn eval(&self, p: f64, omega: f64, ix: usize) -> f64;
}

/// Bilinear interpolation of a grid field in (p, ω), clamped at the edges.
pub struct GridSampler<'a> {
    pub field: &'a PhaseField,
    pub grid: &'a PhaseGrid,
}

fn bracket(value: f64, origin: f64, step: f64, n: usize) -> (usize, f64) {
    let s = ((value - origin) / step).clamp(0.0, (n - 1) as f64);
    let i = (s.floor() as usize).min(n - 2);
    (i, s - i as f64)
}

impl Distribution for GridSampler<'_> {
    fn eval(&self, p: f64, omega: f64, ix: usize) -> f64 {
        let g = self.grid;
        let (ip, tp) = bracket(p, g.p[0], g.dp, g.n_p);
        let (iw, tw) = bracket(omega, g.omega[0], g.domega, g.n_omega);
        let f = self.field;
        let v00 = f.get(ip, iw, ix);
        let v01 = f.get(ip, iw + 1, ix);
        let v10 = f.get(ip + 1, iw, ix);
        let v11 = f.get(ip + 1, iw + 1, ix);
        (1.0 - tp) * ((1.0 - tw) * v00 + tw * v01) + tp * ((1.0 - tw) * v10 + tw * v11)
    }
}

/// A closed-form distribution of (p, ω, x), evaluated exactly.
pub struct Analytic<'a, F> {
    pub func: F,
    pub grid: &'a PhaseGrid,
}

impl<F: Fn(f64, f64, f64) -> f64 + Sync> Distribution for Analytic<'_, F> {
    fn eval(&self, p: f64, omega: f64, ix: usize) -> f64 {
        (self.func)(p, omega, self.grid.x[ix])
    }
}

/// Phonon occupations per x node and mode, `occ[ix][mode]`.
pub fn occupation_table(bath: &PhononBath, temps: &[f64]) -> Result<Vec<Vec<f64>>> {
    temps.iter().map(|&t| bath.occupations(t)).collect()
}

/// Σ^r at one node; returns (Re, Im).
#[allow(clippy::too_many_arguments)]
fn sigma_r_node(
    bath: &PhononBath,
    occ: &[f64],
    grid: &PhaseGrid,
    p: f64,
    omega: f64,
    t: f64,
    mu: f64,
    eta: f64,
) -> (f64, f64) {
    let p_max = grid.p_max();
    let (mut re, mut im) = (0.0, 0.0);
    for (m, &n_q) in bath.modes.iter().zip(occ) {
        let pq = (p + m.q).clamp(-p_max, p_max);
        let eps = grid.energy(pq);
        let n_e = fermi_dirac(eps, mu, t);
        let a1 = omega - eps + m.omega;
        let a2 = omega + eps - m.omega;
        let w1 = m.coupling2 * (n_q + 1.0 - n_e);
        let w2 = m.coupling2 * (n_q + n_e);
        let d1 = a1 * a1 + eta * eta;
        let d2 = a2 * a2 + eta * eta;
        re += w1 * a1 / d1 + w2 * a2 / d2;
        im -= w1 * eta / d1 + w2 * eta / d2;
    }
    (re, im)
}

/// Retarded self-energy on the grid, (Re Σ^r, Im Σ^r).
pub fn retarded_self_energy(
    bath: &PhononBath,
    grid: &PhaseGrid,
    temps: &[f64],
    mu: f64,
    eta: f64,
) -> Result<(PhaseField, PhaseField)> {
    let occ = occupation_table(bath, temps)?;
    let both = PhaseField::from_fn(grid, |ip, iw, ix| {
        let (re, _) = sigma_r_node(bath, &occ[ix], grid, grid.p[ip], grid.omega[iw], temps[ix], mu, eta);
        re
    });
    let im = PhaseField::from_fn(grid, |ip, iw, ix| {
        let (_, im) = sigma_r_node(bath, &occ[ix], grid, grid.p[ip], grid.omega[iw], temps[ix], mu, eta);
        im
    });
    Ok((both, im))
}

/// G^r from Σ^r; returns (Re G^r, Im G^r).
pub fn retarded_green(
    grid: &PhaseGrid,
    re_sigma: &PhaseField,
    im_sigma: &PhaseField,
    mode: GreenMode,
    eta: f64,
) -> (PhaseField, PhaseField) {
    let node = |ip: usize, iw: usize, ix: usize| -> (f64, f64) {
        let base = grid.omega[iw] - grid.energy(grid.p[ip]);
        let (dr, di) = match mode {
            GreenMode::Dyson => (base - re_sigma.get(ip, iw, ix), ETA_MIN - im_sigma.get(ip, iw, ix)),
            GreenMode::Free => (base, eta),
        };
        let den = dr * dr + di * di;
        (dr / den, -di / den)
    };
    (
        PhaseField::from_fn(grid, |ip, iw, ix| node(ip, iw, ix).0),
        PhaseField::from_fn(grid, |ip, iw, ix| node(ip, iw, ix).1),
    )
}

/// Σ^r, G^r and the x-gradient of Re G^r on the grid.
#[derive(Clone, Debug)]
pub struct SelfEnergyField {
    pub re_sigma_r: PhaseField,
    pub im_sigma_r: PhaseField,
    pub re_g_r: PhaseField,
    pub im_g_r: PhaseField,
    /// ∂ReG^r/∂x through the local temperature, `b · ∂ReG^r/∂T`.
    pub re_g_r_dx: PhaseField,
    pub eta: f64,
    pub mode: GreenMode,
}

impl SelfEnergyField {
    pub fn build(
        bath: &PhononBath,
        grid: &PhaseGrid,
        profile: &TemperatureProfile,
        mu: f64,
        eta: f64,
        mode: GreenMode,
    ) -> Result<Self> {
        let temps = profile.on_grid(grid)?;
        let (re_sigma_r, im_sigma_r) = retarded_self_energy(bath, grid, &temps, mu, eta)?;
        let (re_g_r, im_g_r) = retarded_green(grid, &re_sigma_r, &im_sigma_r, mode, eta);
        let re_g_r_dx = if profile.b == 0.0 || mode == GreenMode::Free {
            grid.zeros()
        } else {
            let shifted = |sign: f64| -> Result<PhaseField> {
                let ts: Vec<f64> = temps.iter().map(|t| t * (1.0 + sign * T_STEP_REL)).collect();
                let (rs, is) = retarded_self_energy(bath, grid, &ts, mu, eta)?;
                Ok(retarded_green(grid, &rs, &is, mode, eta).0)
            };
            let up = shifted(1.0)?;
            let down = shifted(-1.0)?;
            let b = profile.b;
            PhaseField::from_fn(grid, |ip, iw, ix| {
                let h = temps[ix] * T_STEP_REL;
                b * (up.get(ip, iw, ix) - down.get(ip, iw, ix)) / (2.0 * h)
            })
        };
        Ok(SelfEnergyField {
            re_sigma_r,
            im_sigma_r,
            re_g_r,
            im_g_r,
            re_g_r_dx,
            eta,
            mode,
        })
    }
}

/// First derivatives of ReΣ^r and ReG^r used by the force and correction terms.
#[derive(Clone, Debug)]
pub struct SigmaDerivatives {
    pub re_sigma_dp: PhaseField,
    pub re_sigma_dw: PhaseField,
    pub re_g_dp: PhaseField,
    pub re_g_dw: PhaseField,
    pub re_g_dx: PhaseField,
}

impl SelfEnergyField {
    pub fn derivatives(&self, st: &DerivativeStencil) -> SigmaDerivatives {
        SigmaDerivatives {
            re_sigma_dp: st.d_p(&self.re_sigma_r),
            re_sigma_dw: st.d_omega(&self.re_sigma_r),
            re_g_dp: st.d_p(&self.re_g_r),
            re_g_dw: st.d_omega(&self.re_g_r),
            re_g_dx: self.re_g_r_dx.clone(),
        }
    }
}

/// Σ^</i = Σ_q M²[(N+1) f(p+q, ω+ω_q) + N f(p+q, ω−ω_q)].
pub fn lesser_self_energy(
    bath: &PhononBath,
    occ: &[Vec<f64>],
    grid: &PhaseGrid,
    f: &dyn Distribution,
) -> PhaseField {
    PhaseField::from_fn(grid, |ip, iw, ix| {
        let (p, w) = (grid.p[ip], grid.omega[iw]);
        bath.modes
            .iter()
            .zip(&occ[ix])
            .map(|(m, &n)| {
                m.coupling2 * ((n + 1.0) * f.eval(p + m.q, w + m.omega, ix) + n * f.eval(p + m.q, w - m.omega, ix))
            })
            .sum()
    })
}

/// Σ^>/i = Σ_q M²[N f′(p+q, ω+ω_q) + (N+1) f′(p+q, ω−ω_q)], f′ = 1 − f.
pub fn greater_self_energy(
    bath: &PhononBath,
    occ: &[Vec<f64>],
    grid: &PhaseGrid,
    f: &dyn Distribution,
) -> PhaseField {
    PhaseField::from_fn(grid, |ip, iw, ix| {
        let (p, w) = (grid.p[ip], grid.omega[iw]);
        bath.modes
            .iter()
            .zip(&occ[ix])
            .map(|(m, &n)| {
                m.coupling2
                    * (n * (1.0 - f.eval(p + m.q, w + m.omega, ix))
                        + (n + 1.0) * (1.0 - f.eval(p + m.q, w - m.omega, ix)))
            })
            .sum()
    })
}
