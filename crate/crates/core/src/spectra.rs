//! Emission and scattering spectra of the coupled emitter–pseudo-mode
//! system, their eigen-channel decomposition, and dip/peak extraction.
//!
//! * S_emi(ω) ∝ |ω − ω'_e − g²/(ω − ω'_d)|⁻²
//! * S_sca(ω) ∝ −Im[ω − ω'_d − g²/(ω − ω'_e)]⁻¹
//!
//! Spectra are max-normalized; the constant is kept on the [`Spectrum`].
//! The scattered field is taken to be radiated by the plasmon dipole only,
//! so the emitter's own output channel is not included.

use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{require_positive, Error, Result};
use crate::qed::CouplingParams;

/// Uniform frequency grid `start + i·step`, i = 0..len.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl FrequencyGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        require_positive("grid.step", step)?;
        if !(start.is_finite() && stop.is_finite() && stop > start) {
            return Err(Error::domain(
                "grid",
                format!("need start < stop, got [{start}, {stop}]"),
            ));
        }
        let len = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if len < 3 {
            return Err(Error::domain("grid", "needs at least 3 points"));
        }
        Ok(FrequencyGrid { start, step, len })
    }

    /// `center ± half_width` inclusive.
    pub fn centered(center: f64, half_width: f64, step: f64) -> Result<Self> {
        Self::new(center - half_width, center + half_width, step)
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.start + i as f64 * self.step).collect()
    }

    pub fn refined(&self) -> Self {
        FrequencyGrid {
            start: self.start,
            step: 0.5 * self.step,
            len: 2 * self.len - 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Emission,
    Scattering,
}

/// A max-normalized spectrum on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: SpectrumKind,
    /// SHA-256 over the kind, coupling parameters, flags and grid.
    pub params_fingerprint: String,
    /// Raw maximum that the values were divided by.
    pub normalization: f64,
    /// Grid step exceeds a quarter of the narrowest linewidth.
    pub under_resolved: bool,
}

impl Spectrum {
    /// Wraps externally supplied data (e.g. a measured spectrum) after
    /// validation and max-normalization.
    pub fn from_samples(kind: SpectrumKind, omegas: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if omegas.len() != values.len() {
            return Err(Error::domain("spectrum", "omegas and values differ in length"));
        }
        check_grid(&omegas)?;
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::domain("spectrum.values", "must be finite and >= 0"));
        }
        let mut hasher = Sha256::new();
        hasher.update([kind as u8]);
        for (w, v) in omegas.iter().zip(&values) {
            hasher.update(w.to_le_bytes());
            hasher.update(v.to_le_bytes());
        }
        let fingerprint = format!("{:x}", hasher.finalize());
        let step = max_step(&omegas);
        build(kind, omegas, values, fingerprint, step, f64::INFINITY)
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
}

fn check_grid(omegas: &[f64]) -> Result<()> {
    if omegas.len() < 3 {
        return Err(Error::domain("grid", "needs at least 3 points"));
    }
    if omegas.iter().any(|w| !w.is_finite()) || omegas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("grid", "must be finite and strictly increasing"));
    }
    Ok(())
}

fn max_step(omegas: &[f64]) -> f64 {
    omegas.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

fn fingerprint(kind: SpectrumKind, c: &CouplingParams, lamb_shift: bool, omegas: &[f64]) -> String {
    let mut hasher = Sha256::new();
    hasher.update([kind as u8, lamb_shift as u8]);
    for x in [
        c.g_de,
        c.omega_e_eff.re,
        c.omega_e_eff.im,
        c.omega_d_eff.re,
        c.omega_d_eff.im,
        c.delta_hom,
        c.gamma_hom,
    ] {
        hasher.update(x.to_le_bytes());
    }
    hasher.update((omegas.len() as u64).to_le_bytes());
    for w in omegas {
        hasher.update(w.to_le_bytes());
    }
    format!("{:x}", hasher.finalize())
}

fn build(
    kind: SpectrumKind,
    omegas: Vec<f64>,
    mut values: Vec<f64>,
    params_fingerprint: String,
    step: f64,
    narrowest: f64,
) -> Result<Spectrum> {
    let norm = values.iter().copied().fold(0.0, f64::max);
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::Numerical(format!("spectrum maximum is {norm}")));
    }
    for v in &mut values {
        *v /= norm;
    }
    Ok(Spectrum {
        omegas,
        values,
        kind,
        params_fingerprint,
        normalization: norm,
        under_resolved: step > 0.25 * narrowest,
    })
}

/// Emission spectrum S_emi on `omegas`.
pub fn emission_spectrum(coupling: &CouplingParams, omegas: &[f64]) -> Result<Spectrum> {
    coupling.validate()?;
    check_grid(omegas)?;
    let g2 = coupling.g_de * coupling.g_de;
    let values = omegas
        .iter()
        .map(|&w| {
            (w - coupling.omega_e_eff - g2 / (w - coupling.omega_d_eff))
                .norm_sqr()
                .recip()
        })
        .collect();
    let narrowest = -2.0 * coupling.omega_e_eff.im;
    build(
        SpectrumKind::Emission,
        omegas.to_vec(),
        values,
        fingerprint(SpectrumKind::Emission, coupling, true, omegas),
        max_step(omegas),
        narrowest,
    )
}

/// Scattering response −Im[ω − ω'_d − g²/(ω − ω'_e)]⁻¹ at one frequency.
#[inline]
pub fn scattering_response(coupling: &CouplingParams, omega: f64) -> f64 {
    let g2 = coupling.g_de * coupling.g_de;
    -(omega - coupling.omega_d_eff - g2 / (omega - coupling.omega_e_eff))
        .inv()
        .im
}

/// Scattering spectrum S_sca on `omegas`. With `lamb_shift` off, Δ'_e is
/// removed from ω'_e first.
pub fn scattering_spectrum(coupling: &CouplingParams, omegas: &[f64], lamb_shift: bool) -> Result<Spectrum> {
    coupling.validate()?;
    check_grid(omegas)?;
    let c = if lamb_shift {
        *coupling
    } else {
        coupling.without_lamb_shift()
    };
    let mut values = Vec::with_capacity(omegas.len());
    for &w in omegas {
        let v = scattering_response(&c, w);
        if v < -1e-12 {
            return Err(Error::Numerical(format!("negative scattering response {v} at ω = {w}")));
        }
        values.push(v.max(0.0));
    }
    let narrowest = (-2.0 * c.omega_e_eff.im).min(-2.0 * c.omega_d_eff.im);
    build(
        SpectrumKind::Scattering,
        omegas.to_vec(),
        values,
        fingerprint(SpectrumKind::Scattering, &c, lamb_shift, omegas),
        max_step(omegas),
        narrowest,
    )
}

/// Two-pole form [ω − ω'_d − g²/(ω − ω'_e)]⁻¹ = Σ± f±/(ω − ω±).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenDecomposition {
    pub omega_plus: Complex64,
    pub omega_minus: Complex64,
    pub f_plus: Complex64,
    pub f_minus: Complex64,
}

impl EigenDecomposition {
    pub fn evaluate(&self, omega: f64) -> Complex64 {
        self.f_plus / (omega - self.omega_plus) + self.f_minus / (omega - self.omega_minus)
    }

    /// Scattering response reconstructed from the two channels.
    pub fn scattering_response(&self, omega: f64) -> f64 {
        -self.evaluate(omega).im
    }
}

/// ω± = ½(ω'_e + ω'_d ± Δ) with Δ = √((ω'_d − ω'_e)² + 4g²), and residues
/// f± = ½ ± (ω'_d − ω'_e)/(2Δ).
pub fn eigen_decomposition(coupling: &CouplingParams) -> Result<EigenDecomposition> {
    if !(coupling.g_de >= 0.0) {
        return Err(Error::domain("g_de", "must be >= 0"));
    }
    let (we, wd) = (coupling.omega_e_eff, coupling.omega_d_eff);
    let detuning = wd - we;
    let g2 = coupling.g_de * coupling.g_de;
    let delta2 = detuning * detuning + 4.0 * g2;
    // Cancellation in Δ² to rounding level marks the exceptional point.
    if delta2.norm() <= 1e-12 * (detuning.norm_sqr() + 4.0 * g2) || delta2.norm() == 0.0 {
        return Err(Error::Degenerate);
    }
    let delta = delta2.sqrt();
    let sum = we + wd;
    let asym = detuning / (2.0 * delta);
    Ok(EigenDecomposition {
        omega_plus: 0.5 * (sum + delta),
        omega_minus: 0.5 * (sum - delta),
        f_plus: 0.5 + asym,
        f_minus: 0.5 - asym,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DipResult {
    pub omega_dip: f64,
    /// Lower neighbouring maximum minus the dip value, in normalized units.
    pub depth: f64,
    /// Parabolic refinement was applied (false: plain grid minimum).
    pub refined: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakResult {
    pub omega_peak: f64,
    /// Full width at half maximum; `None` if a half-maximum crossing falls
    /// outside the grid.
    pub fwhm: Option<f64>,
    /// Number of interior local maxima.
    pub maxima: usize,
}

fn local_maxima(v: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < v.len() {
        if v[i] > v[i - 1] {
            // Walk across a flat top before deciding.
            let mut j = i;
            while j + 1 < v.len() && v[j + 1] == v[i] {
                j += 1;
            }
            if j + 1 < v.len() && v[j + 1] < v[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Vertex of the parabola through (x[i−1..=i+1], v[i−1..=i+1]).
fn parabolic_vertex(x: &[f64], v: &[f64], i: usize) -> Option<(f64, f64)> {
    if i == 0 || i + 1 >= v.len() {
        return None;
    }
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (y0, y1, y2) = (v[i - 1], v[i], v[i + 1]);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if a == 0.0 || !a.is_finite() {
        return None;
    }
    let b = d01 - a * (x0 + x1);
    let xv = -b / (2.0 * a);
    if !(xv >= x0 && xv <= x2) {
        return None;
    }
    let yv = y1 + d01 * (xv - x1) + a * (xv - x0) * (xv - x1);
    Some((xv, yv))
}

/// Dip between the two highest local maxima, refined by a 3-point parabola.
pub fn find_dip(s: &Spectrum) -> Result<DipResult> {
    let maxima = local_maxima(&s.values);
    if maxima.len() < 2 {
        return Err(Error::NoDip {
            peak: find_peak(s).ok().map(|p| p.omega_peak),
        });
    }
    let mut by_height = maxima.clone();
    by_height.sort_by(|&a, &b| s.values[b].total_cmp(&s.values[a]).then(a.cmp(&b)));
    let (lo, hi) = if by_height[0] < by_height[1] {
        (by_height[0], by_height[1])
    } else {
        (by_height[1], by_height[0])
    };
    let imin = (lo..=hi)
        .min_by(|&a, &b| s.values[a].total_cmp(&s.values[b]))
        .expect("non-empty range");
    let (omega_dip, value, refined) = match parabolic_vertex(&s.omegas, &s.values, imin) {
        Some((x, y)) if imin > lo && imin < hi => (x, y, true),
        _ => (s.omegas[imin], s.values[imin], false),
    };
    let depth = (s.values[lo].min(s.values[hi]) - value).max(0.0);
    Ok(DipResult {
        omega_dip,
        depth,
        refined,
    })
}

/// Global maximum with parabolic refinement and linearly interpolated FWHM.
pub fn find_peak(s: &Spectrum) -> Result<PeakResult> {
    check_grid(&s.omegas)?;
    let imax = (0..s.values.len())
        .max_by(|&a, &b| s.values[a].total_cmp(&s.values[b]).then(b.cmp(&a)))
        .expect("non-empty");
    let (omega_peak, top) = parabolic_vertex(&s.omegas, &s.values, imax).unwrap_or((s.omegas[imax], s.values[imax]));
    let half = 0.5 * top;
    let crossing = |i: usize, j: usize| {
        let (vi, vj) = (s.values[i], s.values[j]);
        s.omegas[i] + (half - vi) * (s.omegas[j] - s.omegas[i]) / (vj - vi)
    };
    let left = (0..imax)
        .rev()
        .find(|&i| s.values[i] < half)
        .map(|i| crossing(i, i + 1));
    let right = (imax + 1..s.values.len())
        .find(|&i| s.values[i] < half)
        .map(|i| crossing(i - 1, i));
    Ok(PeakResult {
        omega_peak,
        fwhm: left.zip(right).map(|(l, r)| r - l),
        maxima: local_maxima(&s.values).len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftRow {
    pub param: f64,
    pub omega_dip: Option<f64>,
    /// ω_dip − reference (meV); negative is a red shift.
    pub shift_mev: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DipShiftTable {
    pub reference_omega: f64,
    /// The reference spectrum had no dip and `fallback` was used.
    pub reference_fallback: bool,
    pub rows: Vec<ShiftRow>,
}

/// Reference frequency: the dip of `reference` if it has one, else
/// `fallback` (typically ω_d). Returns the frequency and the fallback flag.
pub fn reference_dip(reference: &Spectrum, fallback: f64) -> (f64, bool) {
    match find_dip(reference) {
        Ok(d) => (d.omega_dip, false),
        Err(_) => (fallback, true),
    }
}

/// Dip shift of each `(param, spectrum)` pair relative to the reference
/// spectrum's dip. Spectra without a dip give empty rows.
pub fn dip_shift(reference: &Spectrum, sweep: &[(f64, Spectrum)], fallback: f64) -> DipShiftTable {
    let (reference_omega, reference_fallback) = reference_dip(reference, fallback);
    let rows = sweep
        .iter()
        .map(|(param, s)| {
            let omega_dip = find_dip(s).ok().map(|d| d.omega_dip);
            ShiftRow {
                param: *param,
                omega_dip,
                shift_mev: omega_dip.map(|w| 1e3 * (w - reference_omega)),
            }
        })
        .collect();
    DipShiftTable {
        reference_omega,
        reference_fallback,
        rows,
    }
}
