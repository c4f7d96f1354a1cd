//! Built-in validation suites shared by `qbe validate` and the acceptance
//! tests.

use std::f64::consts::PI;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::collision::{collision_exact, collision_expanded, f_term_rhs, quantum_correction};
use crate::config::{CollisionMode, SimConfig, SolverMode};
use crate::damping::damping_for_mode;
use crate::error::Result;
use crate::gauge::{gauge_transform, reconstruct_force, solve_potentials, SpatialGrid, VectorField};
use crate::observables::{charge_current, thermal_current};
use crate::phase_space::{fermi_dirac, PhaseField, PhaseGrid};
use crate::phonon::{PhononBath, PhononMoments};
use crate::run::simulate;
use crate::self_energy::{occupation_table, Analytic};
use crate::solver::{solve_with_background, Background};
use crate::stencil::{DerivativeSet, DerivativeStencil};

/// One checked property.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Least-squares slope of log(err) against log(s).
pub fn fit_order(scales: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = scales.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Smooth test distribution for the oracle comparison.
pub fn oracle_distribution(p: f64, w: f64, x: f64, length: f64) -> f64 {
    0.5 + 0.3 * (3.0 * p + 0.4).sin() * (8.0 * w + 0.3).cos() * (1.0 + 0.1 * (2.0 * PI * x / length).cos())
}

#[derive(Clone, Debug)]
pub struct OracleReport {
    pub scales: Vec<f64>,
    pub errors: Vec<f64>,
    pub order: f64,
    pub seconds: f64,
}

/// Expanded vs brute-force collision integral with the phonon window scaled
/// by s. The temperature is scaled with it so the Bose factors of the
/// acoustic branch stay fixed and only the Taylor truncation changes.
pub fn oracle_convergence(cfg: &SimConfig, scales: &[f64]) -> Result<OracleReport> {
    let start = Instant::now();
    let grid = PhaseGrid::from_config(cfg)?;
    let st = DerivativeStencil::new(&grid);
    let length = grid.length;
    let f = PhaseField::sample(&grid, |p, w, x| oracle_distribution(p, w, x, length));
    let d = DerivativeSet::new(&f, &st, None);
    let analytic = Analytic {
        func: |p: f64, w: f64, x: f64| oracle_distribution(p, w, x, length),
        grid: &grid,
    };
    let mut errors = Vec::new();
    for &s in scales {
        let mut pc = cfg.phonon.clone();
        pc.q_max *= s;
        let bath = PhononBath::from_config(&pc)?;
        let temps = vec![cfg.thermal.t0_kelvin * s; grid.n_x];
        let occ = occupation_table(&bath, &temps)?;
        let moments = PhononMoments::from_temperatures(&bath, &temps)?;
        let exact = collision_exact(&bath, &occ, &grid, &analytic);
        let expanded = collision_expanded(&moments, &d);
        let mut err: f64 = 0.0;
        for ip in 2..grid.n_p - 2 {
            for iw in 2..grid.n_omega - 2 {
                for ix in 0..grid.n_x {
                    err = err.max((exact.get(ip, iw, ix) - expanded.get(ip, iw, ix)).abs());
                }
            }
        }
        errors.push(err);
    }
    Ok(OracleReport {
        order: fit_order(scales, &errors),
        scales: scales.to_vec(),
        errors,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// max |C_exact| at global equilibrium divided by g².
pub fn detailed_balance(cfg: &SimConfig) -> Result<f64> {
    let grid = PhaseGrid::from_config(cfg)?;
    let bath = PhononBath::from_config(&cfg.phonon)?;
    let t = cfg.thermal.t0_kelvin;
    let mu = cfg.material.mu_ev;
    let occ = occupation_table(&bath, &vec![t; grid.n_x])?;
    let f = Analytic {
        func: |_p: f64, w: f64, _x: f64| fermi_dirac(w, mu, t),
        grid: &grid,
    };
    let rate = collision_exact(&bath, &occ, &grid, &f);
    let g2 = cfg.phonon.coupling_ev.powi(2);
    Ok(rate.max_abs() / g2)
}

/// Largest per-point defect of `f_term + force terms − expanded (+ QC)`,
/// relative to the largest term at that point.
pub fn rearrangement_defect(cfg: &SimConfig, mode: CollisionMode) -> Result<f64> {
    let mut c = cfg.clone();
    c.solver.collision_mode = mode;
    let bg = Background::build(&c)?;
    let f = bg
        .f0
        .add(&PhaseField::sample(&bg.grid, |p, w, x| 0.05 * (2.0 * p - 9.0 * w).sin() * (0.06 * x).cos()));
    let d = DerivativeSet::new(&f, &bg.stencil, None);
    let forces = damping_for_mode(mode, bg.e_force, &bg.sd, &bg.moments, &f);
    let ft = f_term_rhs(&bg.moments, &bg.sd, &d, &forces, mode)?;
    let mut target = collision_expanded(&bg.moments, &d);
    if mode == CollisionMode::Corrected {
        target = target.add(&quantum_correction(&bg.moments, &bg.sd, &d));
    }
    let mut worst: f64 = 0.0;
    for i in 0..ft.data.len() {
        let mut terms = vec![forces.f1.data[i] * d.fp.data[i], forces.f2.data[i] * d.fw.data[i]];
        if let Some(v) = &forces.v_anor {
            terms.push(v.data[i] * d.fx.data[i]);
        }
        let back = ft.data[i] + terms.iter().sum::<f64>();
        let scale = terms.iter().fold(target.data[i].abs(), |a, t| a.max(t.abs()));
        if scale > 0.0 {
            worst = worst.max((back - target.data[i]).abs() / scale);
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug)]
pub struct GaugeReport {
    pub round_trip_1d: f64,
    pub round_trip_2d: f64,
    pub invariance: f64,
}

fn random_smooth(grid: &SpatialGrid, rng: &mut StdRng, modes: i32) -> Vec<f64> {
    let mut coeffs = Vec::new();
    for mx in -modes..=modes {
        for my in -modes..=modes {
            coeffs.push((mx as f64, my as f64, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI)));
        }
    }
    (0..grid.len())
        .map(|i| {
            let (x, y) = grid.coords(i);
            coeffs
                .iter()
                .map(|(mx, my, a, ph)| a * (2.0 * PI * (mx * x / grid.lx + my * y / grid.ly) + ph).cos())
                .sum()
        })
        .collect()
}

/// Helmholtz round trips in 1D (the reference run's reduced force plus a
/// random field) and 2D, and reconstruction invariance under 20 random gauges.
pub fn gauge_suite(cfg: &SimConfig) -> Result<GaugeReport> {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let run = simulate(cfg)?;
    let line = SpatialGrid::line(cfg.grid.n_x, cfg.grid.length_nm)?;
    let mut round_trip_1d: f64 = 0.0;
    let random: Vec<f64> = (0..line.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for f in [run.f1_reduced.clone(), random] {
        let f = VectorField::from_x(f);
        let pot = solve_potentials(&line, std::slice::from_ref(&f), 1.0)?.remove(0);
        let back = reconstruct_force(&line, &pot)?;
        round_trip_1d = round_trip_1d.max(back.sub(&f).norm() / f.norm());
    }
    let plane = SpatialGrid::new(24, 20, 60.0, 50.0)?;
    let history: Vec<VectorField> = (0..4)
        .map(|_| VectorField {
            x: random_smooth(&plane, &mut rng, 3),
            y: random_smooth(&plane, &mut rng, 3),
        })
        .collect();
    let pots = solve_potentials(&plane, &history, 0.5)?;
    let mut round_trip_2d: f64 = 0.0;
    for (f, pot) in history.iter().zip(&pots) {
        let back = reconstruct_force(&plane, pot)?;
        round_trip_2d = round_trip_2d.max(back.sub(f).norm() / f.norm());
    }
    let mut invariance: f64 = 0.0;
    let base_pot = &pots[pots.len() - 1];
    let base = reconstruct_force(&plane, base_pot)?;
    for _ in 0..20 {
        let chi = random_smooth(&plane, &mut rng, 2);
        let chi_dot = random_smooth(&plane, &mut rng, 2);
        let moved = gauge_transform(&plane, base_pot, &chi, &chi_dot)?;
        let again = reconstruct_force(&plane, &moved)?;
        invariance = invariance.max(again.sub(&base).norm() / base.norm());
    }
    Ok(GaugeReport {
        round_trip_1d,
        round_trip_2d,
        invariance,
    })
}

#[derive(Clone, Debug)]
pub struct SolverReport {
    pub residual_order1: f64,
    pub steady_transient: f64,
    pub norm_ratio: f64,
    pub transient_steps: Vec<usize>,
}

/// Order-1 residual, steady/transient agreement and weak-drive ordering.
pub fn solver_suite(cfg: &SimConfig) -> Result<SolverReport> {
    let bg = Background::build(cfg)?;
    let steady = solve_with_background(bg.clone(), cfg, SolverMode::Steady)?;
    let transient = solve_with_background(bg, cfg, SolverMode::Transient)?;
    let corr_s = steady.f1.add(&steady.f2);
    let corr_t = transient.f1.add(&transient.f2);
    Ok(SolverReport {
        residual_order1: steady.residuals[0],
        steady_transient: corr_t.sub(&corr_s).max_abs() / corr_s.max_abs(),
        norm_ratio: steady.norm_ratio(),
        transient_steps: transient.steps,
    })
}

#[derive(Clone, Debug)]
pub struct NullityReport {
    /// Each quantity at zero drive divided by its reference-run magnitude:
    /// ‖f1‖, ‖f2‖, max|J|, max|J_Q|.
    pub ratios: [f64; 4],
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Zero drive with uniform temperature against the reference drive.
pub fn equilibrium_nullity(cfg: &SimConfig) -> Result<NullityReport> {
    let magnitudes = |c: &SimConfig| -> Result<[f64; 4]> {
        let run = simulate(c)?;
        let cas = &run.cascade;
        let g = &cas.background.grid;
        // currents of the corrections alone; f0 carries none by symmetry
        let corr = cas.f1.add(&cas.f2);
        Ok([
            cas.f1.norm(),
            cas.f2.norm(),
            max_abs(&charge_current(g, &corr, c.drive.charge_e)).max(max_abs(&run.profile.j)),
            max_abs(&thermal_current(g, &corr, c.material.mu_ev)).max(max_abs(&run.profile.j_q)),
        ])
    };
    let reference = magnitudes(cfg)?;
    let mut quiet = cfg.clone();
    quiet.drive.e_field_v_per_m = 0.0;
    quiet.thermal.b_kelvin_per_nm = 0.0;
    let zero = magnitudes(&quiet)?;
    let mut ratios = [0.0; 4];
    for k in 0..4 {
        ratios[k] = zero[k] / reference[k];
    }
    Ok(NullityReport { ratios })
}

#[derive(Clone, Debug)]
pub struct MonotonicityReport {
    pub t0: Vec<f64>,
    pub max_force: Vec<f64>,
    pub max_heat_current: Vec<f64>,
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

impl MonotonicityReport {
    pub fn force_increasing(&self) -> bool {
        strictly_increasing(&self.max_force)
    }

    pub fn heat_increasing(&self) -> bool {
        strictly_increasing(&self.max_heat_current)
    }
}

pub fn temperature_monotonicity(cfg: &SimConfig, t0s: &[f64]) -> Result<MonotonicityReport> {
    let mut max_force = Vec::new();
    let mut max_heat_current = Vec::new();
    for &t0 in t0s {
        let mut c = cfg.clone();
        c.thermal.t0_kelvin = t0;
        let run = simulate(&c)?;
        max_force.push(max_abs(&run.f1_reduced));
        max_heat_current.push(max_abs(&run.profile.j_q));
    }
    Ok(MonotonicityReport {
        t0: t0s.to_vec(),
        max_force,
        max_heat_current,
    })
}

/// Suites selectable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Oracle,
    Balance,
    Gauge,
    Solver,
    All,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "oracle" => Ok(Suite::Oracle),
            "balance" => Ok(Suite::Balance),
            "gauge" => Ok(Suite::Gauge),
            "solver" => Ok(Suite::Solver),
            "all" => Ok(Suite::All),
            other => Err(format!("unknown suite `{other}` (oracle|balance|gauge|solver|all)")),
        }
    }
}

pub const ORACLE_SCALES: [f64; 3] = [1.0, 0.5, 0.25];

/// Run a suite and collect its checks.
pub fn run_suite(suite: Suite, cfg: &SimConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let want = |s: Suite| suite == Suite::All || suite == s;
    if want(Suite::Oracle) {
        let r = oracle_convergence(cfg, &ORACLE_SCALES)?;
        out.push(Check::new(
            "oracle convergence order >= 2.5",
            r.order >= 2.5 && r.seconds < 60.0,
            format!("order {:.3}, errors {:?}, {:.2} s", r.order, r.errors, r.seconds),
        ));
    }
    if want(Suite::Balance) {
        let v = detailed_balance(cfg)?;
        out.push(Check::new(
            "detailed balance max|rate| <= 1e-10 g^2",
            v <= 1e-10,
            format!("max|rate|/g^2 = {v:.3e}"),
        ));
        for mode in [CollisionMode::Plain, CollisionMode::Corrected] {
            let v = rearrangement_defect(cfg, mode)?;
            out.push(Check::new(
                &format!("rearrangement identity ({mode:?})"),
                v <= 1e-13,
                format!("relative defect {v:.3e}"),
            ));
        }
    }
    if want(Suite::Gauge) {
        let r = gauge_suite(cfg)?;
        out.push(Check::new(
            "Helmholtz round trip 1D/2D <= 1e-10",
            r.round_trip_1d <= 1e-10 && r.round_trip_2d <= 1e-10,
            format!("1D {:.3e}, 2D {:.3e}", r.round_trip_1d, r.round_trip_2d),
        ));
        out.push(Check::new(
            "gauge invariance <= 1e-12",
            r.invariance <= 1e-12,
            format!("{:.3e}", r.invariance),
        ));
    }
    if want(Suite::Solver) {
        let r = solver_suite(cfg)?;
        out.push(Check::new(
            "order-1 residual <= 1e-8",
            r.residual_order1 <= 1e-8,
            format!("{:.3e}", r.residual_order1),
        ));
        out.push(Check::new(
            "steady vs transient <= 1e-6",
            r.steady_transient <= 1e-6,
            format!("{:.3e} after {:?} steps", r.steady_transient, r.transient_steps),
        ));
        out.push(Check::new(
            "||f2|| < ||f1||",
            r.norm_ratio < 1.0,
            format!("ratio {:.3e}", r.norm_ratio),
        ));
        let n = equilibrium_nullity(cfg)?;
        out.push(Check::new(
            "equilibrium nullity <= 1e-10",
            n.ratios.iter().all(|r| *r <= 1e-10),
            format!("{:?}", n.ratios),
        ));
    }
    Ok(out)
}
