//! Metal optical response: Drude permittivity, quasi-static multipole
//! polarizabilities of a sphere, and the dipole pseudo-mode parameters
//! (ω_d, γ_d, μ_d, η₁) extracted from the dipolar polarizability.
//!
//! The multipole polarizability of order `n` of a sphere of radius `R` with
//! permittivity ε_m embedded in a host ε_b is
//!
//! $$ \alpha_n = R^{2n+1} \frac{n(\epsilon_m - \epsilon_b)}{n\epsilon_m + (n+1)\epsilon_b} $$
//!
//! in nm^(2n+1). Only the dipole term (`n = 1`) can carry the radiative
//! reaction and the dynamic-depolarization (finite-size) corrections.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::units::{wavenumber, COULOMB};

/// Drude metal: ε_m(ω) = ε_∞ − ω_p² / (ω² + iωγ_p).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DrudeMaterial {
    pub eps_inf: f64,
    /// Plasma frequency (eV).
    pub omega_p: f64,
    /// Damping rate (eV).
    pub gamma_p: f64,
}

impl DrudeMaterial {
    /// Silver parameters: ε_∞ = 6.0, ω_p = 7.9 eV, γ_p = 51 meV.
    pub const SILVER: DrudeMaterial = DrudeMaterial {
        eps_inf: 6.0,
        omega_p: 7.9,
        gamma_p: 0.051,
    };

    pub fn new(eps_inf: f64, omega_p: f64, gamma_p: f64) -> Result<Self> {
        let mat = DrudeMaterial {
            eps_inf,
            omega_p,
            gamma_p,
        };
        mat.validate()?;
        Ok(mat)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("omega_p", self.omega_p)?;
        if !(self.gamma_p.is_finite() && self.gamma_p >= 0.0) {
            return Err(Error::domain("gamma_p", format!("must be >= 0, got {}", self.gamma_p)));
        }
        if !self.eps_inf.is_finite() {
            return Err(Error::domain("eps_inf", "must be finite"));
        }
        Ok(())
    }

    pub fn permittivity(&self, omega: f64) -> Result<Complex64> {
        drude_permittivity(self, omega)
    }

    /// Permittivity without argument checks, for hot loops that have
    /// already validated `omega > 0`.
    #[inline]
    pub(crate) fn eps(&self, omega: f64) -> Complex64 {
        let denom = Complex64::new(omega * omega, omega * self.gamma_p);
        self.eps_inf - self.omega_p * self.omega_p / denom
    }
}

impl Default for DrudeMaterial {
    fn default() -> Self {
        Self::SILVER
    }
}

/// Drude permittivity at `omega` (eV). Im ε ≥ 0 for every ω > 0.
pub fn drude_permittivity(mat: &DrudeMaterial, omega: f64) -> Result<Complex64> {
    require_positive("omega", omega)?;
    Ok(mat.eps(omega))
}

/// Homogeneous, lossless embedding medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HostMedium {
    pub eps_b: f64,
}

impl HostMedium {
    pub const VACUUM: HostMedium = HostMedium { eps_b: 1.0 };

    pub fn new(eps_b: f64) -> Result<Self> {
        let host = HostMedium { eps_b };
        host.validate()?;
        Ok(host)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_b.is_finite() && self.eps_b >= 1.0 {
            Ok(())
        } else {
            Err(Error::domain("eps_b", format!("must be >= 1, got {}", self.eps_b)))
        }
    }
}

impl Default for HostMedium {
    fn default() -> Self {
        Self::VACUUM
    }
}

/// Corrections applied to the dipolar (n = 1) polarizability only. Requesting
/// them for n ≥ 2 is a no-op.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PolarizabilityOptions {
    /// Radiation reaction: α₁ → α₁ / (1 − i(2k³/3)α₁).
    pub radiative_correction: bool,
    /// Dynamic depolarization: adds −(k²/R)α₁ to the denominator. Red-shifts
    /// the dipole resonance as R grows.
    pub finite_size: bool,
}

impl PolarizabilityOptions {
    pub const QUASI_STATIC: PolarizabilityOptions = PolarizabilityOptions {
        radiative_correction: false,
        finite_size: false,
    };
    pub const RADIATIVE: PolarizabilityOptions = PolarizabilityOptions {
        radiative_correction: true,
        finite_size: false,
    };
}

/// A metal sphere in a host medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sphere {
    pub material: DrudeMaterial,
    pub host: HostMedium,
    /// Radius (nm).
    pub radius: f64,
    pub options: PolarizabilityOptions,
}

impl Sphere {
    pub fn new(material: DrudeMaterial, host: HostMedium, radius: f64, options: PolarizabilityOptions) -> Result<Self> {
        let sphere = Sphere {
            material,
            host,
            radius,
            options,
        };
        sphere.validate()?;
        Ok(sphere)
    }

    /// Silver sphere in vacuum with the radiative correction on.
    pub fn silver(radius: f64) -> Result<Self> {
        Self::new(
            DrudeMaterial::SILVER,
            HostMedium::VACUUM,
            radius,
            PolarizabilityOptions::RADIATIVE,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        self.host.validate()?;
        require_positive("radius", self.radius)
    }

    pub fn with_options(mut self, options: PolarizabilityOptions) -> Self {
        self.options = options;
        self
    }

    pub fn polarizability(&self, order: u32, omega: f64) -> Result<Complex64> {
        multipole_polarizability(self, order, omega)
    }
}

/// Size-independent factor a_n = α_n / R^(2n+1) of the quasi-static
/// polarizability.
pub(crate) fn reduced_polarizability(eps_m: Complex64, eps_b: f64, order: u32) -> Result<Complex64> {
    let n = order as f64;
    let num = n * (eps_m - eps_b);
    let den = n * eps_m + (n + 1.0) * eps_b;
    let scale = n * eps_m.norm() + (n + 1.0) * eps_b;
    if den.norm() <= 1e-13 * scale {
        return Err(Error::Singular { order, omega: f64::NAN });
    }
    Ok(num / den)
}

/// Dipolar polarizability (nm³) with the corrections selected in `options`.
///
/// The corrected form is evaluated through 1/α₁ so that the radiative term
/// also regularizes the lossless pole.
pub(crate) fn dipole_polarizability(
    eps_m: Complex64,
    eps_b: f64,
    radius: f64,
    omega: f64,
    options: PolarizabilityOptions,
) -> Result<Complex64> {
    let r3 = radius.powi(3);
    if !options.radiative_correction && !options.finite_size {
        return reduced_polarizability(eps_m, eps_b, 1).map(|a| a * r3);
    }
    let num = eps_m - eps_b;
    if num.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let k = wavenumber(omega, eps_b);
    let mut inv = (eps_m + 2.0 * eps_b) / (num * r3);
    if options.radiative_correction {
        inv -= Complex64::new(0.0, 2.0 * k.powi(3) / 3.0);
    }
    if options.finite_size {
        inv -= k * k / radius;
    }
    if inv.norm() == 0.0 {
        return Err(Error::Singular { order: 1, omega });
    }
    Ok(inv.inv())
}

/// Multipole polarizability α_n of the sphere at `omega`, in nm^(2n+1).
///
/// Fails with [`Error::Singular`] on the exact real pole of a lossless
/// sphere when no correction regularizes it.
pub fn multipole_polarizability(sphere: &Sphere, order: u32, omega: f64) -> Result<Complex64> {
    if order == 0 {
        return Err(Error::domain("order", "multipole order must be >= 1"));
    }
    sphere.validate()?;
    require_positive("omega", omega)?;
    let eps_m = sphere.material.eps(omega);
    let eps_b = sphere.host.eps_b;
    if order == 1 {
        return dipole_polarizability(eps_m, eps_b, sphere.radius, omega, sphere.options)
            .map_err(|e| with_omega(e, omega));
    }
    let a = reduced_polarizability(eps_m, eps_b, order).map_err(|e| with_omega(e, omega))?;
    Ok(a * sphere.radius.powi(2 * order as i32 + 1))
}

fn with_omega(err: Error, omega: f64) -> Error {
    match err {
        Error::Singular { order, .. } => Error::Singular { order, omega },
        other => other,
    }
}

/// Dipole pseudo-mode of the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DipoleModeParams {
    /// Resonance frequency (eV).
    pub omega_d: f64,
    /// Linewidth (eV), FWHM of Im α₁.
    pub gamma_d: f64,
    /// Effective dipole moment (e·nm).
    pub mu_d: f64,
    /// η₁ = [d Re ε_m/dω]⁻¹ at ω_d (eV).
    pub eta1: f64,
}

impl DipoleModeParams {
    /// Same mode with its frequency replaced; γ_d, μ_d and η₁ are kept.
    pub fn with_omega_d(mut self, omega_d: f64) -> Self {
        self.omega_d = omega_d;
        self
    }

    /// ω'_d = ω_d − iγ_d/2.
    pub fn complex_frequency(&self) -> Complex64 {
        Complex64::new(self.omega_d, -0.5 * self.gamma_d)
    }
}

/// Frequency step of the resonance search (eV).
const SEARCH_STEP: f64 = 1e-4;
/// Step of the centered difference used for η₁ (eV).
const ETA_STEP: f64 = 1e-4;

/// Extracts ω_d, γ_d, η₁ and μ_d from the dipolar polarizability.
///
/// ω_d is the maximum of Im α₁ on a 0.1 meV grid over [0.3ω_p, ω_p] refined
/// by a parabola through the three top samples; γ_d is the full width at half
/// maximum with linearly interpolated crossings; μ_d = ε_b √(3η₁R³/k_e).
pub fn dipole_mode_params(sphere: &Sphere) -> Result<DipoleModeParams> {
    sphere.validate()?;
    let mat = &sphere.material;
    let eps_b = sphere.host.eps_b;
    let lo = 0.3 * mat.omega_p;
    let hi = mat.omega_p;
    let no_resonance = || Error::NoResonance { lo, hi };

    let n = ((hi - lo) / SEARCH_STEP).floor() as usize + 1;
    let omegas: Vec<f64> = (0..n).map(|i| lo + i as f64 * SEARCH_STEP).collect();
    let mut im = Vec::with_capacity(n);
    for &w in &omegas {
        match dipole_polarizability(mat.eps(w), eps_b, sphere.radius, w, sphere.options) {
            Ok(a) => im.push(a.im),
            // A lossless pole sitting exactly on a grid node.
            Err(Error::Singular { .. }) => im.push(f64::INFINITY),
            Err(e) => return Err(e),
        }
    }

    let (imax, &peak) = im
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(no_resonance)?;
    if imax == 0 || imax == n - 1 || !peak.is_finite() || peak <= 0.0 {
        return Err(no_resonance());
    }

    let (y0, y1, y2) = (im[imax - 1], im[imax], im[imax + 1]);
    let curv = y0 - 2.0 * y1 + y2;
    let offset = if curv < 0.0 { 0.5 * (y0 - y2) / curv } else { 0.0 };
    let omega_d = omegas[imax] + offset.clamp(-1.0, 1.0) * SEARCH_STEP;

    let half = 0.5 * peak;
    let left = (1..=imax)
        .rev()
        .find(|&i| im[i - 1] < half)
        .map(|i| crossing(omegas[i - 1], im[i - 1], omegas[i], im[i], half))
        .ok_or_else(no_resonance)?;
    let right = (imax..n - 1)
        .find(|&i| im[i + 1] < half)
        .map(|i| crossing(omegas[i], im[i], omegas[i + 1], im[i + 1], half))
        .ok_or_else(no_resonance)?;
    let gamma_d = right - left;

    let slope = (mat.eps(omega_d + ETA_STEP).re - mat.eps(omega_d - ETA_STEP).re) / (2.0 * ETA_STEP);
    if !(slope > 0.0) {
        return Err(Error::Numerical(format!(
            "d Re eps/d omega = {slope} at omega_d = {omega_d} eV is not positive"
        )));
    }
    let eta1 = 1.0 / slope;
    let mu_d = eps_b * (3.0 * eta1 * sphere.radius.powi(3) / COULOMB).sqrt();

    Ok(DipoleModeParams {
        omega_d,
        gamma_d,
        mu_d,
        eta1,
    })
}

fn crossing(x0: f64, y0: f64, x1: f64, y1: f64, level: f64) -> f64 {
    x0 + (level - y0) / (y1 - y0) * (x1 - x0)
}
