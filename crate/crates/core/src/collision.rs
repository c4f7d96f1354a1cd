//! Electron–phonon collision integral: the brute-force q sum, its
//! second-order Taylor expansion in the phonon moments, the first-order
//! quantum correction, and the f_term remainder left after the force-like
//! terms are moved to the transport side.
//!
//! Rates are returned as plain [`PhaseField`]s.

use crate::config::CollisionMode;
use crate::damping::DampingForce;
use crate::error::{QbeError, Result};
use crate::phase_space::{PhaseField, PhaseGrid};
use crate::phonon::PhononBath;
use crate::phonon::PhononMoments;
use crate::self_energy::{Distribution, SigmaDerivatives};
use crate::stencil::DerivativeSet;

/// Σ^>G^< − Σ^<G^> by direct summation over the phonon modes.
///
/// `occ[ix][mode]` holds the Bose occupations at each x node.
pub fn collision_exact(
    bath: &PhononBath,
    occ: &[Vec<f64>],
    grid: &PhaseGrid,
    f: &dyn Distribution,
) -> PhaseField {
    PhaseField::from_fn(grid, |ip, iw, ix| {
        let (p, w) = (grid.p[ip], grid.omega[iw]);
        let here = f.eval(p, w, ix);
        let mut out = 0.0;
        let mut inn = 0.0;
        for (m, &n) in bath.modes.iter().zip(&occ[ix]) {
            let up = f.eval(p + m.q, w + m.omega, ix);
            let down = f.eval(p + m.q, w - m.omega, ix);
            out += m.coupling2 * (n * (1.0 - up) + (n + 1.0) * (1.0 - down));
            inn += m.coupling2 * ((n + 1.0) * up + n * down);
        }
        -out * here + inn * (1.0 - here)
    })
}

/// Second-order moment expansion of [`collision_exact`].
pub fn collision_expanded(moments: &PhononMoments, d: &DerivativeSet) -> PhaseField {
    let n_x = d.f.n_x;
    let mut rate = d.f.clone();
    for (i, r) in rate.data.iter_mut().enumerate() {
        let m = moments.at(i % n_x);
        let f = d.f.data[i];
        let hole = 1.0 - f;
        let (fp, fw) = (d.fp.data[i], d.fw.data[i]);
        let (fpp, fpw, fww, fppw) = (d.fpp.data[i], d.fpw.data[i], d.fww.data[i], d.fppw.data[i]);
        // derivatives of f′ = 1 − f
        let (hp, hw, hpp, hpw, hww, hppw) = (-fp, -fw, -fpp, -fpw, -fww, -fppw);
        let loss = m.m_omega * hw - m.m_q * hp - 0.5 * m.m_omega2 * hww + m.m_q_omega * hpw
            - 0.5 * m.m_q2 * hpp
            + 0.5 * m.m_q2_omega * hppw;
        let gain = m.m_omega * fw
            + m.m_q * fp
            + 0.5 * m.m_omega2 * fww
            + m.m_q_omega * fpw
            + 0.5 * m.m_q2 * fpp
            + 0.5 * m.m_q2_omega * fppw;
        *r = loss * f + gain * hole;
    }
    rate
}

/// First-order quantum correction: the ∂ReG^r/∂p and ∂ReG^r/∂x groups.
pub fn quantum_correction(
    moments: &PhononMoments,
    sd: &SigmaDerivatives,
    d: &DerivativeSet,
) -> PhaseField {
    let n_x = d.f.n_x;
    let mut out = d.f.clone();
    for (i, r) in out.data.iter_mut().enumerate() {
        let m = moments.at(i % n_x);
        let x_group = m.m1 * d.fx.data[i]
            + m.m_omega * d.fxw.data[i]
            + m.m_q * d.fxp.data[i]
            + 0.5 * m.m_omega2 * d.fwwx.data[i]
            + m.m_q_omega * d.fxpw.data[i]
            + 0.5 * m.m_q2 * d.fppx.data[i]
            + 0.5 * m.m_q2_omega * d.fppwx.data[i];
        let p_group = m.m1 * d.fp.data[i]
            + m.m_omega * d.fpw.data[i]
            + m.m_q * d.fpp.data[i]
            + 0.5 * m.m_omega2 * d.fwwp.data[i]
            + m.m_q_omega * d.fppw.data[i]
            + 0.5 * m.m_q2 * d.fppp.data[i]
            + 0.5 * m.m_q2_omega * d.fpppw.data[i];
        *r = -sd.re_g_dp.data[i] * x_group + sd.re_g_dx.data[i] * p_group;
    }
    out
}

/// The collision remainder after the damping-force terms are moved to the
/// transport side:
///
/// * plain: `C − F1 ∂f/∂p − F2 ∂f/∂ω`
/// * corrected: `C + QC − F1′ ∂f/∂p − F2′ ∂f/∂ω − v_anor ∂f/∂x`
pub fn f_term_rhs(
    moments: &PhononMoments,
    sd: &SigmaDerivatives,
    d: &DerivativeSet,
    damping: &DampingForce,
    mode: CollisionMode,
) -> Result<PhaseField> {
    if damping.mode != mode {
        return Err(QbeError::Usage(format!(
            "f_term requested in {mode:?} mode with {:?} damping forces",
            damping.mode
        )));
    }
    let c = collision_expanded(moments, d);
    let mut out = match mode {
        CollisionMode::Plain => c,
        CollisionMode::Corrected => c.add(&quantum_correction(moments, sd, d)),
    };
    for (i, r) in out.data.iter_mut().enumerate() {
        *r -= damping.f1.data[i] * d.fp.data[i] + damping.f2.data[i] * d.fw.data[i];
    }
    if let Some(v) = &damping.v_anor {
        for (i, r) in out.data.iter_mut().enumerate() {
            *r -= v.data[i] * d.fx.data[i];
        }
    }
    Ok(out)
}

/// Particle-number defect of a collision rate, `Σ_{p,ω} rate Δp Δω` per x.
pub fn particle_number_defect(grid: &PhaseGrid, rate: &PhaseField) -> Vec<f64> {
    let mut out = vec![0.0; grid.n_x];
    let cell = grid.dp * grid.domega;
    for k in 0..grid.n_p * grid.n_omega {
        for (o, v) in out.iter_mut().zip(&rate.data[k * grid.n_x..(k + 1) * grid.n_x]) {
            *o += v * cell;
        }
    }
    out
}
