//! End-to-end runs: solve, reduce, build potentials, write artifacts.

use std::path::{Path, PathBuf};

use serde_json::json;

use crate::config::SimConfig;
use crate::damping::reduce_over_pw;
use crate::error::Result;
use crate::gauge::{psi_potential, solve_potentials, GaugePotentials, SpatialGrid, VectorField};
use crate::observables::{continuity_residual, ObservableProfile};
use crate::output::{ensure_dir, write_csv, write_text};
use crate::phase_space::{BoundsReport, WignerField};
use crate::solver::{solve_cascade, PerturbationCascade};
use crate::units::fs_to_internal;

/// Everything a `simulate` call produces.
#[derive(Clone, Debug)]
pub struct Run {
    pub config: SimConfig,
    pub cascade: PerturbationCascade,
    /// (p, ω)-reduced F_damp1 (x component) per x node.
    pub f1_reduced: Vec<f64>,
    /// (p, ω)-reduced F_damp2 per x node.
    pub f2_reduced: Vec<f64>,
    pub profile: ObservableProfile,
    pub potentials: GaugePotentials,
    pub psi_reduced: Vec<f64>,
    pub continuity: f64,
    pub bounds: BoundsReport,
}

pub fn simulate(cfg: &SimConfig) -> Result<Run> {
    let cascade = solve_cascade(cfg)?;
    let bg = &cascade.background;
    let grid = &bg.grid;
    let total = cascade.total();
    let forces = cascade.final_forces();
    let how = cfg.solver.gauge_reduction;
    let f1_reduced = reduce_over_pw(grid, &forces.f1, &total, how);
    let f2_reduced = reduce_over_pw(grid, &forces.f2, &total, how);
    let profile = ObservableProfile::from_distribution(
        grid,
        &bg.temps,
        &total,
        cfg.drive.charge_e,
        cfg.material.mu_ev,
    );
    let space = SpatialGrid::line(grid.n_x, grid.length)?;
    let force = VectorField::from_x(f1_reduced.clone());
    let potentials = solve_potentials(&space, &[force], grid.dt)?.remove(0);
    // forces are stationary, so two samples bracket the interval exactly
    let psi_t = fs_to_internal(cfg.solver.psi_time_fs);
    let psi_reduced = psi_potential(&[f2_reduced.clone(), f2_reduced.clone()], psi_t).remove(1);
    let continuity = continuity_residual(&cascade, cfg.drive.charge_e);
    let bounds = WignerField::new(total).bounds_report();
    Ok(Run {
        config: cfg.clone(),
        cascade,
        f1_reduced,
        f2_reduced,
        profile,
        potentials,
        psi_reduced,
        continuity,
        bounds,
    })
}

impl Run {
    pub fn meta(&self) -> serde_json::Value {
        let c = &self.cascade;
        json!({
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.config,
            "solver": {
                "mode": c.mode,
                "order": c.order,
                "eps_reg_used": c.eps_reg,
                "residuals": c.residuals,
                "transient_steps": c.steps,
                "norm_f1": c.f1.norm(),
                "norm_f2": c.f2.norm(),
                "norm_ratio_f2_f1": c.norm_ratio(),
            },
            "diagnostics": {
                "continuity_residual": self.continuity,
                "bounds": self.bounds,
                "phonon_modes_used": c.background.bath.modes.len(),
                "phonon_modes_excluded": c.background.bath.excluded,
                "eta_min": crate::self_energy::ETA_MIN,
            },
        })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        ensure_dir(dir)?;
        let p = &self.profile;
        write_csv(
            &dir.join("forces.csv"),
            &["x_nm", "T_K", "f1_x_reduced", "f2_reduced"],
            &[&p.x_nm, &p.temperature, &self.f1_reduced, &self.f2_reduced],
        )?;
        write_csv(
            &dir.join("currents.csv"),
            &["x_nm", "rho", "j", "j_q"],
            &[&p.x_nm, &p.rho, &p.j, &p.j_q],
        )?;
        let a_x = &self.potentials.a.x;
        let mean = vec![self.potentials.mean_force[0]; p.x_nm.len()];
        write_csv(
            &dir.join("potentials.csv"),
            &["x_nm", "phi", "a_x", "psi_reduced", "mean_force"],
            &[&p.x_nm, &self.potentials.phi, a_x, &self.psi_reduced, &mean],
        )?;
        let mut meta = serde_json::to_string_pretty(&self.meta()).expect("meta serializes");
        meta.push('\n');
        write_text(&dir.join("meta.json"), &meta)
    }
}

/// Subdirectory tag for a sweep member, e.g. `T0_200K`.
pub fn t0_tag(t0: f64) -> String {
    if t0.fract() == 0.0 {
        format!("T0_{}K", t0 as i64)
    } else {
        format!("T0_{t0}K")
    }
}

/// Run the configuration at each T0 and write tagged output sets.
pub fn sweep(cfg: &SimConfig, t0s: &[f64], out: &Path) -> Result<Vec<(PathBuf, Run)>> {
    let mut runs = Vec::new();
    for &t0 in t0s {
        let mut c = cfg.clone();
        c.thermal.t0_kelvin = t0;
        let run = simulate(&c)?;
        let dir = out.join(t0_tag(t0));
        run.write(&dir)?;
        runs.push((dir, run));
    }
    Ok(runs)
}

/// Temperatures of the figure family.
pub const FIGURE_T0: [f64; 3] = [100.0, 200.0, 300.0];

/// Emit the four figure-ready CSVs.
pub fn figures(cfg: &SimConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    let runs: Vec<Run> = FIGURE_T0
        .iter()
        .map(|&t0| {
            let mut c = cfg.clone();
            c.thermal.t0_kelvin = t0;
            simulate(&c)
        })
        .collect::<Result<_>>()?;
    let x = &runs[0].profile.x_nm;
    let heads = |stem: &str| -> Vec<String> {
        std::iter::once("x_nm".to_string())
            .chain(FIGURE_T0.iter().map(|t| format!("{stem}_T{}K", *t as i64)))
            .collect()
    };
    let family = |name: &str, stem: &str, pick: &dyn Fn(&Run) -> &Vec<f64>| -> Result<()> {
        let h = heads(stem);
        let hr: Vec<&str> = h.iter().map(String::as_str).collect();
        let mut cols: Vec<&[f64]> = vec![x];
        cols.extend(runs.iter().map(|r| pick(r).as_slice()));
        write_csv(&out.join(name), &hr, &cols)
    };
    family("fig1_damping_force.csv", "f1_x_reduced", &|r| &r.f1_reduced)?;
    family("fig2_fourth_component.csv", "f2_reduced", &|r| &r.f2_reduced)?;
    let mid = &runs[1];
    write_csv(&out.join("fig3_charge_current.csv"), &["x_nm", "j_T200K"], &[x, &mid.profile.j])?;
    family("fig4_thermal_current.csv", "j_q", &|r| &r.profile.j_q)?;
    Ok(())
}
