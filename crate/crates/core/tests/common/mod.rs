//! Brute-force SI evaluation of the near-field quantities, written without
//! the crate's reduced units, used as an oracle in the test targets.
#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::PI;

pub const E: f64 = 1.602_176_634e-19;
pub const H: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = H / (2.0 * PI);
pub const EPS0: f64 = 8.854_187_812_8e-12;
pub const C: f64 = 299_792_458.0;
/// One Debye in C·m.
pub const DEBYE_SI: f64 = 1e-21 / C;

pub struct SiSphere {
    pub eps_inf: f64,
    /// Plasma and damping frequencies in rad/s.
    pub omega_p: f64,
    pub gamma_p: f64,
    pub eps_b: f64,
    /// Radius in metres.
    pub radius: f64,
    pub radiative: bool,
    pub finite_size: bool,
}

pub fn ev_to_rad(ev: f64) -> f64 {
    ev * E / HBAR
}

pub fn rad_to_ev(w: f64) -> f64 {
    w * HBAR / E
}

impl SiSphere {
    /// Drude permittivity at angular frequency `w` (rad/s).
    pub fn eps(&self, w: f64) -> Complex64 {
        let den = Complex64::new(w * w, w * self.gamma_p);
        self.eps_inf - self.omega_p * self.omega_p / den
    }

    /// α_n in m^(2n+1) divided by R^(2n+1), with the dipole corrections.
    pub fn shape_factor(&self, n: u32, w: f64) -> Complex64 {
        let eps = self.eps(w);
        let nf = n as f64;
        let a = nf * (eps - self.eps_b) / (nf * eps + (nf + 1.0) * self.eps_b);
        if n != 1 || !(self.radiative || self.finite_size) {
            return a;
        }
        let r3 = self.radius.powi(3);
        let k = w * self.eps_b.sqrt() / C;
        let mut inv = 1.0 / (a * r3);
        if self.radiative {
            inv -= Complex64::new(0.0, 2.0 * k.powi(3) / 3.0);
        }
        if self.finite_size {
            inv -= k * k / self.radius;
        }
        1.0 / (inv * r3)
    }

    /// Reflected-field sums (radial, tangential) in m⁻³ over orders
    /// `n_lo..=n_hi` at distance `d` (m). Each term is
    /// w_n α_n / d^(2n+4) written as w_n a_n (R/d)^(2n+1) / d³.
    pub fn field_sums(&self, d: f64, w: f64, n_lo: u32, n_hi: u32) -> (Complex64, Complex64) {
        let mut rr = Complex64::new(0.0, 0.0);
        let mut tt = Complex64::new(0.0, 0.0);
        for n in n_lo..=n_hi {
            let nf = n as f64;
            let geom = (self.radius / d).powi(2 * n as i32 + 1) / d.powi(3);
            let t = self.shape_factor(n, w) * geom;
            rr += (nf + 1.0) * (nf + 1.0) * t;
            tt += 0.5 * nf * (nf + 1.0) * t;
        }
        (rr, tt)
    }

    /// Dyadic Green component c²K/(4πε_b ω²) in nm⁻¹.
    pub fn dyadic_nm(&self, k_sum: Complex64, w: f64) -> Complex64 {
        k_sum * (C * C / (4.0 * PI * self.eps_b * w * w)) * 1e-9
    }

    /// Im G / (k/6π).
    pub fn spectral_density(&self, k_sum: Complex64, w: f64) -> f64 {
        let g = k_sum * (C * C / (4.0 * PI * self.eps_b * w * w));
        let k = w * self.eps_b.sqrt() / C;
        g.im / (k / (6.0 * PI))
    }

    /// Field of the induced multipoles back at the emitter per unit dipole,
    /// Σ/(4πε₀ε_b), turned into (shift, decay) in eV for dipole `mu` (C·m).
    pub fn shift_and_decay(&self, k_proj: Complex64, mu: f64) -> (f64, f64) {
        let field = k_proj / (4.0 * PI * EPS0 * self.eps_b);
        let energy = mu * mu * field;
        (-energy.re / E, 2.0 * energy.im / E)
    }

    /// Dipole-mode moment in C·m from η₁ (eV).
    pub fn mu_d(&self, eta1_ev: f64) -> f64 {
        self.eps_b * (3.0 * eta1_ev * E * self.radius.powi(3) * 4.0 * PI * EPS0).sqrt()
    }
}

/// Near-field dipole–dipole coupling in eV.
pub fn coupling_ev(mu_d: f64, mu_e: f64, d: f64, cos2: f64, eps_b: f64) -> f64 {
    mu_d * mu_e * (1.0 + 3.0 * cos2).sqrt() / (4.0 * PI * EPS0 * eps_b * d.powi(3)) / E
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

pub fn rel_c(a: Complex64, b: Complex64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).norm() / a.norm().max(b.norm())
    }
}
