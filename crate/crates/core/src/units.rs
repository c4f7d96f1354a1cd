//! Unit conventions.
//!
//! Kernels work with ħ = k_B = 1: energies in eV, lengths in nm, momenta in
//! nm⁻¹ and times in ħ/eV (≈ 0.658 fs). Conversions happen only when a config
//! is ingested and when results are written out.

/// Boltzmann constant in eV/K.
pub const K_B_EV: f64 = 8.617_333_262e-5;

/// Reduced Planck constant in eV·fs.
pub const HBAR_EV_FS: f64 = 0.658_211_956_9;

/// ħ²/(2 m_e) in eV·nm².
pub const HBAR2_OVER_2ME: f64 = 0.038_099_821_2;

/// Convert a physical time in fs to internal time units (ħ/eV).
pub fn fs_to_internal(t_fs: f64) -> f64 {
    t_fs / HBAR_EV_FS
}

/// Convert an internal time back to fs.
pub fn internal_to_fs(t: f64) -> f64 {
    t * HBAR_EV_FS
}

/// Internal band mass for a relative effective mass, chosen so that
/// `ε = p²/(2·mass)` holds in eV with p in nm⁻¹ and `v = p/mass` is in
/// nm per internal time unit.
pub fn band_mass(m_eff: f64) -> f64 {
    m_eff / (2.0 * HBAR2_OVER_2ME)
}

/// Phonon energy (eV) of an acoustic branch with sound speed in nm/fs.
pub fn acoustic_energy(sound_speed_nm_fs: f64, q: f64) -> f64 {
    HBAR_EV_FS * sound_speed_nm_fs * q.abs()
}

/// Force on a charge (in units of e) in a field given in V/m, in eV/nm.
pub fn field_force(charge_e: f64, e_field_v_per_m: f64) -> f64 {
    charge_e * e_field_v_per_m * 1e-9
}

/// Thermal energy k_B·T in eV.
pub fn thermal_energy(t_kelvin: f64) -> f64 {
    K_B_EV * t_kelvin
}
