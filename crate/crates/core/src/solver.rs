//! Perturbative cascade f = f0 + f1 + f2 for the transport equation.
//!
//! Each order solves `v ∂f_n/∂x + ε f_n = RHS_n` by the Fourier method
//! (steady) or by RK4 time marching to the same fixed point (transient).
//! Σ^r, G^r and the phonon moments are built once from the local-equilibrium
//! background and held fixed.
//!
//! The transport right-hand side of a distribution g is
//!
//! `S(g) = −v ∂g/∂x − (eE + F1) ∂g/∂p − (eE v + F2) ∂g/∂ω + f_term(g)`.
//!
//! The seed f0 is a local equilibrium: without drive (E = 0, no gradients)
//! it is taken as stationary, so `S_eq(f0)`, the same operator with the
//! drive switched off, is subtracted from every order. What remains of
//! `S_eq(f0)` is the truncation residue of the moment expansion.

use crate::collision::f_term_rhs;
use crate::config::{CollisionMode, EpsReg, SimConfig, SolverMode};
use crate::damping::{damping_for_mode, DampingForce};
use crate::error::{QbeError, Result};
use crate::phase_space::{
    local_equilibrium, local_equilibrium_gradient, PhaseField, PhaseGrid, TemperatureProfile,
};
use crate::phonon::{compute_moments, PhononBath, PhononMoments};
use crate::self_energy::{SelfEnergyField, SigmaDerivatives};
use crate::spectral::{
    advection_operator, march_advection, solve_advection_fourier, MarchControl, SpectralAxis,
};
use crate::stencil::{DerivativeSet, DerivativeStencil};
use crate::units::field_force;

/// Frozen coefficients shared by every order.
#[derive(Clone, Debug)]
pub struct Background {
    pub grid: PhaseGrid,
    pub profile: TemperatureProfile,
    pub temps: Vec<f64>,
    pub bath: PhononBath,
    pub moments: PhononMoments,
    pub sigma: SelfEnergyField,
    pub sd: SigmaDerivatives,
    pub stencil: DerivativeStencil,
    pub axis: SpectralAxis,
    /// eE in eV/nm.
    pub e_force: f64,
    pub mode: CollisionMode,
    pub f0: PhaseField,
    /// Exact x-gradient of f0, `b ∂f0/∂T`.
    pub f0_dx: PhaseField,
}

impl Background {
    pub fn build(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = PhaseGrid::from_config(cfg)?;
        let profile = TemperatureProfile::new(cfg.thermal.t0_kelvin, cfg.thermal.b_kelvin_per_nm);
        let temps = profile.on_grid(&grid)?;
        let bath = PhononBath::from_config(&cfg.phonon)?;
        let moments = compute_moments(&bath, &profile, &grid)?;
        let m = &cfg.material;
        let sigma = SelfEnergyField::build(&bath, &grid, &profile, m.mu_ev, m.eta_ev, m.g_r_mode)?;
        let stencil = DerivativeStencil::new(&grid);
        let sd = sigma.derivatives(&stencil);
        let axis = SpectralAxis::for_grid(&grid);
        let f0 = local_equilibrium(&grid, &profile, m.mu_ev, m.gamma_ev)?.values;
        let f0_dx = local_equilibrium_gradient(&grid, &profile, m.mu_ev, m.gamma_ev)?;
        Ok(Background {
            e_force: field_force(cfg.drive.charge_e, cfg.drive.e_field_v_per_m),
            mode: cfg.solver.collision_mode,
            grid,
            profile,
            temps,
            bath,
            moments,
            sigma,
            sd,
            stencil,
            axis,
            f0,
            f0_dx,
        })
    }

    /// Damping force for distribution `f` at drive `e_force`.
    pub fn forces(&self, f: &PhaseField, e_force: f64) -> DampingForce {
        damping_for_mode(self.mode, e_force, &self.sd, &self.moments, f)
    }

    /// Default regularizer: 10⁻³ of the largest |k v| on the grid.
    pub fn auto_eps(&self) -> f64 {
        let kmax = self.axis.k.iter().fold(0.0_f64, |a, k| a.max(k.abs()));
        1e-3 * kmax * self.grid.max_speed()
    }

    pub fn eps_reg(&self, cfg: &SimConfig) -> f64 {
        match cfg.solver.eps_reg {
            EpsReg::Value(v) => v,
            EpsReg::Auto => self.auto_eps(),
        }
    }

    /// Derivatives of f0 + `extra`, with the exact x-gradient of f0.
    fn derivatives(&self, extra: Option<&PhaseField>) -> DerivativeSet {
        match extra {
            None => DerivativeSet::new(&self.f0, &self.stencil, Some(self.f0_dx.clone())),
            Some(d) => {
                let g = self.f0.add(d);
                let gx = self.f0_dx.add(&self.stencil.d_x(d));
                DerivativeSet::new(&g, &self.stencil, Some(gx))
            }
        }
    }

    /// `S(g)` for the given derivative set; the −v ∂g/∂x term is optional.
    fn transport(
        &self,
        d: &DerivativeSet,
        sd: &SigmaDerivatives,
        e_force: f64,
        forces: &DampingForce,
        advection: bool,
    ) -> Result<PhaseField> {
        let ft = f_term_rhs(&self.moments, sd, d, forces, self.mode)?;
        let g = &self.grid;
        let n_x = g.n_x;
        let mut out = ft;
        for (i, r) in out.data.iter_mut().enumerate() {
            let ip = i / (g.n_omega * n_x);
            let v = g.velocity(g.p[ip]);
            *r += -(e_force + forces.f1.data[i]) * d.fp.data[i]
                - (e_force * v + forces.f2.data[i]) * d.fw.data[i];
            if advection {
                *r -= v * d.fx.data[i];
            }
        }
        Ok(out)
    }

    /// `S_eq(f0)`: the operator with E = 0 and every x-gradient removed.
    pub fn equilibrium_rhs(&self) -> Result<PhaseField> {
        let d = DerivativeSet::new(&self.f0, &self.stencil, Some(self.grid.zeros()));
        let mut sd = self.sd.clone();
        sd.re_g_dx = self.grid.zeros();
        let forces = damping_for_mode(self.mode, 0.0, &sd, &self.moments, &self.f0);
        self.transport(&d, &sd, 0.0, &forces, true)
    }

    /// Right-hand side of the order equation for f = f0 + f1 as written,
    /// `S(f0 + f1) − S_eq(f0)`, with forces evaluated at f0 + f1.
    pub fn cascade_rhs(&self, f1: &PhaseField) -> Result<PhaseField> {
        let d = self.derivatives(Some(f1));
        let forces = self.forces(&d.f, self.e_force);
        let s = self.transport(&d, &self.sd, self.e_force, &forces, true)?;
        Ok(s.sub(&self.equilibrium_rhs()?))
    }

    /// RHS₁ = S(f0) − S_eq(f0).
    pub fn rhs_order_1(&self) -> Result<PhaseField> {
        let d = self.derivatives(None);
        let forces = self.forces(&self.f0, self.e_force);
        let s = self.transport(&d, &self.sd, self.e_force, &forces, true)?;
        Ok(s.sub(&self.equilibrium_rhs()?))
    }

    /// RHS₂ = S(f0 + f1) − S(f0) + v ∂f1/∂x: the part of the full equation
    /// not already balanced at first order.
    pub fn rhs_order_2(&self, f1: &PhaseField) -> Result<PhaseField> {
        let d1 = self.derivatives(Some(f1));
        let forces1 = self.forces(&d1.f, self.e_force);
        let s1 = self.transport(&d1, &self.sd, self.e_force, &forces1, false)?;
        let d0 = self.derivatives(None);
        let forces0 = self.forces(&self.f0, self.e_force);
        let s0 = self.transport(&d0, &self.sd, self.e_force, &forces0, false)?;
        Ok(s1.sub(&s0))
    }

    /// Relative residual `‖v ∂f/∂x + ε f − rhs‖ / ‖rhs‖` under the spectral
    /// operator the solver inverts.
    pub fn residual(&self, f: &PhaseField, rhs: &PhaseField, eps: f64) -> f64 {
        let lhs = advection_operator(&self.grid, &self.axis, f, eps);
        let n = rhs.norm();
        if n == 0.0 {
            lhs.norm()
        } else {
            lhs.sub(rhs).norm() / n
        }
    }
}

/// Result of a cascade solve.
#[derive(Clone, Debug)]
pub struct PerturbationCascade {
    pub background: Background,
    pub f1: PhaseField,
    pub f2: PhaseField,
    pub rhs1: PhaseField,
    pub rhs2: PhaseField,
    /// Relative residuals per order.
    pub residuals: Vec<f64>,
    pub eps_reg: f64,
    pub mode: SolverMode,
    pub order: usize,
    /// Time steps taken per order in transient mode.
    pub steps: Vec<usize>,
}

impl PerturbationCascade {
    pub fn f0(&self) -> &PhaseField {
        &self.background.f0
    }

    pub fn total(&self) -> PhaseField {
        self.background.f0.add(&self.f1).add(&self.f2)
    }

    /// Damping force acting on the full distribution.
    pub fn final_forces(&self) -> DampingForce {
        self.background.forces(&self.total(), self.background.e_force)
    }

    pub fn norm_ratio(&self) -> f64 {
        let n1 = self.f1.norm();
        if n1 == 0.0 {
            0.0
        } else {
            self.f2.norm() / n1
        }
    }
}

fn solve_order(
    bg: &Background,
    cfg: &SimConfig,
    rhs: &PhaseField,
    eps: f64,
    mode: SolverMode,
) -> Result<(PhaseField, usize)> {
    match mode {
        SolverMode::Steady => Ok((solve_advection_fourier(&bg.grid, &bg.axis, rhs, eps)?, 0)),
        SolverMode::Transient => {
            if eps <= 0.0 {
                return Err(QbeError::config(
                    "solver.eps_reg",
                    "transient mode needs a positive regularizer to reach a steady state",
                ));
            }
            let ctl = MarchControl {
                dt: bg.grid.dt,
                cfl_max: cfg.solver.cfl_max,
                max_steps: cfg.solver.max_steps,
                target: Some(cfg.solver.tol * 1e-2),
            };
            let m = march_advection(&bg.grid, &bg.axis, rhs, &bg.grid.zeros(), eps, ctl)?;
            Ok((m.field, m.steps))
        }
    }
}

/// Solve the cascade up to the configured order.
pub fn solve_cascade(cfg: &SimConfig) -> Result<PerturbationCascade> {
    let bg = Background::build(cfg)?;
    solve_with_background(bg, cfg, cfg.solver.mode)
}

/// Solve the cascade on a prepared background in the requested mode.
pub fn solve_with_background(bg: Background, cfg: &SimConfig, mode: SolverMode) -> Result<PerturbationCascade> {
    let eps = bg.eps_reg(cfg);
    let order = cfg.solver.order;
    let rhs1 = bg.rhs_order_1()?;
    let (f1, s1) = solve_order(&bg, cfg, &rhs1, eps, mode)?;
    let mut residuals = vec![bg.residual(&f1, &rhs1, eps)];
    let mut steps = vec![s1];
    let (rhs2, f2) = if order >= 2 {
        let rhs2 = bg.rhs_order_2(&f1)?;
        let (f2, s2) = solve_order(&bg, cfg, &rhs2, eps, mode)?;
        residuals.push(bg.residual(&f2, &rhs2, eps));
        steps.push(s2);
        (rhs2, f2)
    } else {
        (bg.grid.zeros(), bg.grid.zeros())
    };
    let cascade = PerturbationCascade {
        background: bg,
        f1,
        f2,
        rhs1,
        rhs2,
        residuals,
        eps_reg: eps,
        mode,
        order,
        steps,
    };
    if order >= 2 && cascade.norm_ratio() > 1.0 {
        log::warn!(
            "weak-drive ordering violated: ||f2||/||f1|| = {:.3e}",
            cascade.norm_ratio()
        );
    }
    for (n, r) in cascade.residuals.iter().enumerate() {
        if *r > cfg.solver.tol {
            log::warn!("order {} residual {r:.3e} exceeds tol {:.1e}", n + 1, cfg.solver.tol);
        }
    }
    Ok(cascade)
}

/// Transient march of the cascade.
pub fn transient_march(cfg: &SimConfig) -> Result<PerturbationCascade> {
    let bg = Background::build(cfg)?;
    solve_with_background(bg, cfg, SolverMode::Transient)
}
