//! Physical constants in the crate's reduced unit system (eV, nm, e·nm).
//!
//! Values are CODATA 2018 derived constants at full double precision so that
//! reduced-unit results agree with SI evaluations to ~1e-12.

/// ħc in eV·nm.
pub const HBAR_C: f64 = 197.326_980_459_302_47;

/// Coulomb constant e²/(4πε₀) in eV·nm.
pub const COULOMB: f64 = 1.439_964_547_842_567;

/// One Debye in e·nm.
pub const DEBYE: f64 = 0.020_819_433_270_935_6;

/// Host wavenumber k = ω√ε_b/ħc in nm⁻¹ for a frequency in eV.
#[inline]
pub fn wavenumber(omega: f64, eps_b: f64) -> f64 {
    omega * eps_b.sqrt() / HBAR_C
}

#[inline]
pub fn debye_to_enm(debye: f64) -> f64 {
    debye * DEBYE
}

#[inline]
pub fn enm_to_debye(enm: f64) -> f64 {
    enm / DEBYE
}
