//! Emitter-level quantities: the Lamb shift and decay rate induced by the
//! higher-order (dark) modes, the emitter–dipole-mode coupling, and the
//! complex effective frequencies that enter the spectra.
//!
//! With the prefactor P = μ_e² k_e / ε_b (eV·nm³) and the projected reduced
//! sum K = cos²θ K_rr + sin²θ K_tt over n ≥ 2:
//!
//! * Δ'_e(ω) = −P · Re K
//! * γ'_e(ω) = 2P · Im K
//! * g_de = k_e μ_d μ_e √(1 + 3cos²θ) / (ε_b d³)

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::greens::{check_distance, reduced_green_sum, ModeRange};
use crate::material::{DipoleModeParams, Sphere};
use crate::units::{debye_to_enm, COULOMB};

/// A two-level emitter treated as a point dipole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmitterParams {
    /// Transition dipole moment (e·nm).
    pub mu_e: f64,
    /// Bare transition frequency (eV).
    pub omega_e: f64,
    /// Total intrinsic linewidth γ_e (eV), radiative plus non-radiative.
    pub gamma_e: f64,
    /// Unit dipole orientation in the lab frame.
    pub orientation: [f64; 3],
}

impl EmitterParams {
    pub const DEFAULT_MU_DEBYE: f64 = 24.0;
    pub const DEFAULT_GAMMA_E: f64 = 0.015;

    pub fn new(mu_e: f64, omega_e: f64, gamma_e: f64, orientation: [f64; 3]) -> Result<Self> {
        let em = EmitterParams {
            mu_e,
            omega_e,
            gamma_e,
            orientation,
        };
        em.validate()?;
        Ok(em)
    }

    /// 24 D emitter with γ_e = 15 meV, polarized along z.
    pub fn with_frequency(omega_e: f64) -> Result<Self> {
        Self::new(
            debye_to_enm(Self::DEFAULT_MU_DEBYE),
            omega_e,
            Self::DEFAULT_GAMMA_E,
            [0.0, 0.0, 1.0],
        )
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("mu_e", self.mu_e)?;
        require_positive("omega_e", self.omega_e)?;
        if !(self.gamma_e.is_finite() && self.gamma_e >= 0.0) {
            return Err(Error::domain("gamma_e", format!("must be >= 0, got {}", self.gamma_e)));
        }
        let norm = self.orientation.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::domain(
                "orientation",
                format!("must be a unit vector, |o| = {norm}"),
            ));
        }
        Ok(())
    }

    /// Normalizes `orientation` before storing it.
    pub fn oriented(mut self, orientation: [f64; 3]) -> Result<Self> {
        let norm = orientation.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::domain("orientation", "must be a non-zero vector"));
        }
        self.orientation = orientation.map(|c| c / norm);
        Ok(self)
    }

    /// Interaction prefactor μ_e² k_e / ε_b (eV·nm³).
    #[inline]
    pub(crate) fn prefactor(&self, eps_b: f64) -> f64 {
        self.mu_e * self.mu_e * COULOMB / eps_b
    }
}

/// Emitter position relative to the sphere, reduced to the on-axis model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Geometry {
    /// Distance from the sphere center (nm); may be infinite.
    pub distance: f64,
    /// cos²θ between the emitter dipole and the center → emitter axis.
    pub cos2_theta: f64,
}

impl Geometry {
    pub fn new(distance: f64, cos2_theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&cos2_theta) {
            return Err(Error::domain(
                "cos2_theta",
                format!("must lie in [0, 1], got {cos2_theta}"),
            ));
        }
        if !(distance > 0.0) {
            return Err(Error::domain("distance", format!("must be > 0, got {distance}")));
        }
        Ok(Geometry { distance, cos2_theta })
    }

    /// Emitter a gap `h` above the surface of a sphere of `radius`, dipole
    /// tilted by `theta` radians from the axis.
    pub fn on_axis(radius: f64, h: f64, theta: f64) -> Result<Self> {
        require_positive("h", h)?;
        let c = theta.cos();
        Self::new(radius + h, c * c)
    }
}

/// Lamb shift and decay rate from the n ≥ 2 modes at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomSelfEnergy {
    /// Δ'_e (eV), negative for a red shift.
    pub shift: f64,
    /// γ'_e (eV), non-negative.
    pub decay: f64,
    pub n_used: u32,
}

/// Evaluates Δ'_e(ω) and γ'_e(ω) with a single Green sum over `range`.
pub fn hom_self_energy(
    sphere: &Sphere,
    geom: &Geometry,
    emitter: &EmitterParams,
    omega: f64,
    range: &ModeRange,
) -> Result<HomSelfEnergy> {
    let sum = reduced_green_sum(sphere, geom.distance, omega, range)?;
    let k = sum.projected(geom.cos2_theta);
    let p = emitter.prefactor(sphere.host.eps_b);
    Ok(HomSelfEnergy {
        shift: -p * k.re,
        decay: 2.0 * p * k.im,
        n_used: sum.n_used,
    })
}

/// Δ'_e(ω) from the n ≥ 2 modes (eV).
pub fn hom_lamb_shift(sphere: &Sphere, geom: &Geometry, emitter: &EmitterParams, omega: f64) -> Result<f64> {
    hom_self_energy(sphere, geom, emitter, omega, &ModeRange::higher_order()).map(|s| s.shift)
}

/// γ'_e(ω) from the n ≥ 2 modes (eV).
pub fn hom_decay(sphere: &Sphere, geom: &Geometry, emitter: &EmitterParams, omega: f64) -> Result<f64> {
    hom_self_energy(sphere, geom, emitter, omega, &ModeRange::higher_order()).map(|s| s.decay)
}

/// Near-field emitter–dipole-mode coupling g_de (eV).
pub fn coupling_gde(
    sphere: &Sphere,
    geom: &Geometry,
    emitter: &EmitterParams,
    dipole: &DipoleModeParams,
) -> Result<f64> {
    check_distance(sphere, geom.distance)?;
    let angular = (1.0 + 3.0 * geom.cos2_theta).sqrt();
    Ok(COULOMB * dipole.mu_d * emitter.mu_e * angular / (sphere.host.eps_b * geom.distance.powi(3)))
}

/// How the emitter self-energy is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingOptions {
    /// One fixed-point step ω → ω_e + Δ'_e(ω_e) before evaluating Δ'_e and
    /// γ'_e. Off: pole approximation at ω = ω_e.
    pub self_consistent: bool,
    pub range: ModeRange,
}

impl Default for CouplingOptions {
    fn default() -> Self {
        CouplingOptions {
            self_consistent: false,
            range: ModeRange::higher_order(),
        }
    }
}

/// Parameters of the coupled emitter–pseudo-mode system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingParams {
    pub g_de: f64,
    /// ω'_e = ω_e + Δ'_e − i(γ_e + γ'_e)/2.
    pub omega_e_eff: Complex64,
    /// ω'_d = ω_d − iγ_d/2.
    pub omega_d_eff: Complex64,
    pub delta_hom: f64,
    pub gamma_hom: f64,
}

impl CouplingParams {
    /// Same system with Δ'_e removed from ω'_e.
    pub fn without_lamb_shift(&self) -> Self {
        CouplingParams {
            omega_e_eff: self.omega_e_eff - self.delta_hom,
            delta_hom: 0.0,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g_de.is_finite() && self.g_de >= 0.0) {
            return Err(Error::domain("g_de", format!("must be >= 0, got {}", self.g_de)));
        }
        if !(self.omega_e_eff.is_finite() && self.omega_e_eff.im <= 0.0) {
            return Err(Error::domain("omega_e_eff", "imaginary part must be <= 0"));
        }
        if !(self.omega_d_eff.is_finite() && self.omega_d_eff.im < 0.0) {
            return Err(Error::domain("omega_d_eff", "imaginary part must be < 0"));
        }
        if !(self.gamma_hom >= 0.0) {
            return Err(Error::domain("gamma_hom", "must be >= 0"));
        }
        Ok(())
    }

    /// Dipole pseudo-mode self-energy g²/(ω − ω'_d) seen by the emitter.
    pub fn pseudo_mode_term(&self, omega: f64) -> Complex64 {
        self.g_de * self.g_de / (omega - self.omega_d_eff)
    }
}

/// Assembles ω'_e, ω'_d and g_de. Δ'_e and γ'_e are evaluated at ω_e
/// (pole approximation) or after one fixed-point step.
pub fn effective_frequencies(
    sphere: &Sphere,
    geom: &Geometry,
    emitter: &EmitterParams,
    dipole: &DipoleModeParams,
    options: &CouplingOptions,
) -> Result<CouplingParams> {
    emitter.validate()?;
    require_positive("gamma_d", dipole.gamma_d)?;
    let mut hom = hom_self_energy(sphere, geom, emitter, emitter.omega_e, &options.range)?;
    if options.self_consistent {
        let omega = emitter.omega_e + hom.shift;
        hom = hom_self_energy(sphere, geom, emitter, omega, &options.range)?;
    }
    let g_de = coupling_gde(sphere, geom, emitter, dipole)?;
    let params = CouplingParams {
        g_de,
        omega_e_eff: Complex64::new(emitter.omega_e + hom.shift, -0.5 * (emitter.gamma_e + hom.decay)),
        omega_d_eff: dipole.complex_frequency(),
        delta_hom: hom.shift,
        gamma_hom: hom.decay,
    };
    params.validate()?;
    Ok(params)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftAndRate {
    /// Δ'_e(ω) + Re[g²/(ω − ω'_d)] (eV).
    pub shift: f64,
    /// γ_e + γ'_e(ω) − 2 Im[g²/(ω − ω'_d)] (eV).
    pub rate: f64,
}

/// Total Lamb shift and decay rate at frequency `omega`.
pub fn total_shift_and_rate(
    sphere: &Sphere,
    geom: &Geometry,
    emitter: &EmitterParams,
    dipole: &DipoleModeParams,
    omega: f64,
) -> Result<ShiftAndRate> {
    require_positive("gamma_d", dipole.gamma_d)?;
    let hom = hom_self_energy(sphere, geom, emitter, omega, &ModeRange::higher_order())?;
    let g = coupling_gde(sphere, geom, emitter, dipole)?;
    let dip = g * g / (omega - dipole.complex_frequency());
    Ok(ShiftAndRate {
        shift: hom.shift + dip.re,
        rate: emitter.gamma_e + hom.decay - 2.0 * dip.im,
    })
}

/// One frequency of the pseudo-mode vs. n = 1 Green-function comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DipoleTermSample {
    pub omega: f64,
    /// g²/(ω − ω'_d).
    pub pseudo_mode: Complex64,
    /// −(μ_e² k_e/ε_b) K^(n=1)(ω).
    pub green: Complex64,
}

/// Evaluates the dipole-mode self-energy both as a Lorentzian pseudo-mode
/// and directly from the n = 1 Green term, on `omegas`.
pub fn dipole_term_equivalence(
    sphere: &Sphere,
    geom: &Geometry,
    emitter: &EmitterParams,
    dipole: &DipoleModeParams,
    omegas: &[f64],
) -> Result<Vec<DipoleTermSample>> {
    let g = coupling_gde(sphere, geom, emitter, dipole)?;
    let p = emitter.prefactor(sphere.host.eps_b);
    omegas
        .iter()
        .map(|&omega| {
            let k = reduced_green_sum(sphere, geom.distance, omega, &ModeRange::single(1))?;
            Ok(DipoleTermSample {
                omega,
                pseudo_mode: g * g / (omega - dipole.complex_frequency()),
                green: -p * k.projected(geom.cos2_theta),
            })
        })
        .collect()
}
