//! Scattered Green-function sums of the sphere at the emitter position.
//!
//! For an emitter on the sphere's symmetry axis at distance `d` from its
//! center, the quasi-static reflected field reduces to two diagonal sums
//!
//! $$ K_{rr} = \sum_n (n+1)^2 \frac{\alpha_n}{d^{2n+4}}, \qquad
//!    K_{tt} = \sum_n \tfrac12 n(n+1) \frac{\alpha_n}{d^{2n+4}} $$
//!
//! (nm⁻³). The dyadic component follows as
//! ê·G^S·ê = c²/(4πω²ε_b) · K. Terms are evaluated as
//! a_n (R/d)^(2n+1) / d³ so that high orders underflow to zero instead of
//! overflowing.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::material::{dipole_polarizability, reduced_polarizability, Sphere};
use crate::units::{wavenumber, HBAR_C};

/// Dipole orientation relative to the sphere-center → emitter axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Radial,
    Tangential,
}

impl Orientation {
    /// Multipole weight of order `n` for this orientation.
    #[inline]
    pub fn weight(self, order: u32) -> f64 {
        let n = order as f64;
        match self {
            Orientation::Radial => (n + 1.0) * (n + 1.0),
            Orientation::Tangential => 0.5 * n * (n + 1.0),
        }
    }
}

/// Which multipole orders enter a sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeRange {
    pub n_min: u32,
    /// `None` sums adaptively until the tail bound drops below `rel_tol`.
    pub n_max: Option<u32>,
    pub rel_tol: f64,
}

impl ModeRange {
    /// Hard cap on the order reached by adaptive summation.
    pub const HARD_CAP: u32 = 5000;
    pub const DEFAULT_TOL: f64 = 1e-8;

    /// Higher-order (dark) modes, n ≥ 2, adaptive.
    pub const fn higher_order() -> Self {
        ModeRange {
            n_min: 2,
            n_max: None,
            rel_tol: Self::DEFAULT_TOL,
        }
    }

    /// Every order, n ≥ 1, adaptive.
    pub const fn all() -> Self {
        ModeRange {
            n_min: 1,
            n_max: None,
            rel_tol: Self::DEFAULT_TOL,
        }
    }

    pub const fn single(order: u32) -> Self {
        Self::fixed(order, order)
    }

    pub const fn fixed(n_min: u32, n_max: u32) -> Self {
        ModeRange {
            n_min,
            n_max: Some(n_max),
            rel_tol: Self::DEFAULT_TOL,
        }
    }

    pub fn with_tolerance(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min == 0 {
            return Err(Error::domain("n_min", "must be >= 1"));
        }
        if let Some(n_max) = self.n_max {
            if n_max < self.n_min {
                return Err(Error::domain(
                    "n_max",
                    format!("must be >= n_min = {}, got {n_max}", self.n_min),
                ));
            }
        }
        require_positive("rel_tol", self.rel_tol)
    }
}

impl Default for ModeRange {
    fn default() -> Self {
        Self::higher_order()
    }
}

/// Partial sums K_rr, K_tt (nm⁻³) with truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedGreenSum {
    pub radial: Complex64,
    pub tangential: Complex64,
    /// Highest order included.
    pub n_used: u32,
    /// Estimated neglected tail relative to the partial sum. Below the
    /// tolerance for adaptive sums; informative only for fixed ranges.
    pub tail_bound: f64,
}

impl ReducedGreenSum {
    /// Projection on a dipole at angle θ to the axis:
    /// cos²θ·K_rr + sin²θ·K_tt.
    #[inline]
    pub fn projected(&self, cos2_theta: f64) -> Complex64 {
        cos2_theta * self.radial + (1.0 - cos2_theta) * self.tangential
    }

    pub fn component(&self, orientation: Orientation) -> Complex64 {
        match orientation {
            Orientation::Radial => self.radial,
            Orientation::Tangential => self.tangential,
        }
    }
}

/// Converts a reduced sum K (nm⁻³) into the dyadic component
/// ê·G^S·ê = c²/(4πω²ε_b)·K (nm⁻¹).
pub fn dyadic_component(k_sum: Complex64, omega: f64, eps_b: f64) -> Complex64 {
    let c_over_omega = HBAR_C / omega;
    k_sum * (c_over_omega * c_over_omega / (4.0 * std::f64::consts::PI * eps_b))
}

/// Reduced factor a_n of order `n`, including the dipole corrections for n = 1.
fn mode_factor(sphere: &Sphere, eps_m: Complex64, order: u32, omega: f64) -> Result<Complex64> {
    let eps_b = sphere.host.eps_b;
    let a = if order == 1 {
        dipole_polarizability(eps_m, eps_b, sphere.radius, omega, sphere.options).map(|a| a / sphere.radius.powi(3))
    } else {
        reduced_polarizability(eps_m, eps_b, order)
    };
    a.map_err(|e| match e {
        Error::Singular { order, .. } => Error::Singular { order, omega },
        other => other,
    })
}

pub(crate) fn check_distance(sphere: &Sphere, distance: f64) -> Result<()> {
    if distance.is_nan() || distance <= sphere.radius {
        return Err(Error::Geometry {
            distance,
            radius: sphere.radius,
        });
    }
    Ok(())
}

/// Sums K_rr and K_tt over the orders selected by `range`.
///
/// Adaptive ranges stop once the geometric tail bound
/// t_n·ρ/(1−ρ), with ρ the larger of the last term ratio and
/// (R/d)²((n+2)/(n+1))², falls below `rel_tol`·|partial sum| for both
/// components. Reaching [`ModeRange::HARD_CAP`] is a truncation error.
pub fn reduced_green_sum(sphere: &Sphere, distance: f64, omega: f64, range: &ModeRange) -> Result<ReducedGreenSum> {
    sphere.validate()?;
    range.validate()?;
    require_positive("omega", omega)?;
    check_distance(sphere, distance)?;

    let eps_m = sphere.material.eps(omega);
    let ratio = sphere.radius / distance;
    let q = ratio * ratio;
    let inv_d3 = distance.powi(-3);
    // (R/d)^(2n+1) for the current order.
    let mut rpow = ratio.powi(2 * range.n_min as i32 + 1);

    let mut radial = Complex64::new(0.0, 0.0);
    let mut tangential = Complex64::new(0.0, 0.0);
    let mut prev_term = f64::NAN;
    let mut tail_bound;
    let mut n = range.n_min;

    loop {
        let base = mode_factor(sphere, eps_m, n, omega)? * (rpow * inv_d3);
        let t_r = Orientation::Radial.weight(n) * base;
        let t_t = Orientation::Tangential.weight(n) * base;
        radial += t_r;
        tangential += t_t;

        let term = t_r.norm();
        let nf = n as f64;
        let floor = q * ((nf + 2.0) / (nf + 1.0)).powi(2);
        let rho = if prev_term.is_finite() && prev_term > 0.0 {
            (term / prev_term).max(floor)
        } else {
            floor
        };
        tail_bound = if term == 0.0 {
            0.0
        } else if rho < 1.0 {
            let tail = rho / (1.0 - rho);
            let rel_r = term * tail / radial.norm();
            let rel_t = t_t.norm() * tail / tangential.norm();
            rel_r.max(rel_t)
        } else {
            f64::INFINITY
        };
        prev_term = term;

        match range.n_max {
            Some(n_max) if n >= n_max => break,
            Some(_) => {}
            None => {
                let started = n > range.n_min;
                if (started || term == 0.0) && tail_bound <= range.rel_tol {
                    break;
                }
                if n >= ModeRange::HARD_CAP {
                    return Err(Error::Truncation {
                        terms: n - range.n_min + 1,
                        tail_bound,
                        rel_tol: range.rel_tol,
                        partial: radial.norm(),
                    });
                }
            }
        }
        n += 1;
        rpow *= q;
    }

    Ok(ReducedGreenSum {
        radial,
        tangential,
        n_used: n,
        tail_bound,
    })
}

/// Normalized spectral density J_n = Im[ê·G_n^S·ê]/G₀ with G₀ = k/6π,
/// which reduces to (3/(2k³))·Im K_n.
pub fn spectral_density(
    sphere: &Sphere,
    distance: f64,
    omega: f64,
    order: u32,
    orientation: Orientation,
) -> Result<f64> {
    let sum = reduced_green_sum(sphere, distance, omega, &ModeRange::single(order))?;
    Ok(density_from_sum(sum.component(orientation), omega, sphere.host.eps_b))
}

/// J_1 … J_{n_max} in one pass.
pub fn spectral_densities(
    sphere: &Sphere,
    distance: f64,
    omega: f64,
    n_max: u32,
    orientation: Orientation,
) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Err(Error::domain("n_max", "must be >= 1"));
    }
    sphere.validate()?;
    require_positive("omega", omega)?;
    check_distance(sphere, distance)?;
    let eps_m = sphere.material.eps(omega);
    let ratio = sphere.radius / distance;
    let inv_d3 = distance.powi(-3);
    let mut rpow = ratio.powi(3);
    let mut out = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let base = mode_factor(sphere, eps_m, n, omega)? * (rpow * inv_d3);
        out.push(density_from_sum(orientation.weight(n) * base, omega, sphere.host.eps_b));
        rpow *= ratio * ratio;
    }
    Ok(out)
}

/// Σ_{n≥2} J_n, adaptively summed.
pub fn higher_order_spectral_density(
    sphere: &Sphere,
    distance: f64,
    omega: f64,
    orientation: Orientation,
    range: &ModeRange,
) -> Result<f64> {
    let sum = reduced_green_sum(sphere, distance, omega, range)?;
    Ok(density_from_sum(sum.component(orientation), omega, sphere.host.eps_b))
}

fn density_from_sum(k_sum: Complex64, omega: f64, eps_b: f64) -> f64 {
    let k = wavenumber(omega, eps_b);
    1.5 * k_sum.im / (k * k * k)
}
