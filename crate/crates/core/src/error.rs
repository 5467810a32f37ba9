//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("invalid {name}: {reason}")]
    Domain { name: &'static str, reason: String },

    /// The emitter sits on or inside the sphere.
    #[error("emitter distance {distance} nm must exceed the sphere radius {radius} nm")]
    Geometry { distance: f64, radius: f64 },

    /// Exact pole of a lossless quasi-static polarizability.
    #[error("polarizability of order {order} is singular at omega = {omega} eV")]
    Singular { order: u32, omega: f64 },

    /// Adaptive multipole summation hit its hard cap.
    #[error(
        "multipole series did not converge: {terms} terms, tail bound {tail_bound:e} \
         (tolerance {rel_tol:e}), |partial sum| = {partial:e}"
    )]
    Truncation {
        terms: u32,
        tail_bound: f64,
        rel_tol: f64,
        partial: f64,
    },

    #[error("no dipole resonance in the search window [{lo}, {hi}] eV")]
    NoResonance { lo: f64, hi: f64 },

    /// The spectrum has no local minimum bracketed by two maxima.
    #[error("spectrum has no dip{}", match .peak { Some(p) => format!(" (single peak at {p} eV)"), None => String::new() })]
    NoDip { peak: Option<f64> },

    /// Δ_ls = 0: the eigen-channel decomposition does not exist.
    #[error("eigen-channel decomposition is degenerate (exceptional point)")]
    Degenerate,

    #[error("observed value {observed} lies outside the attainable range [{lo}, {hi}]")]
    OutOfRange { observed: f64, lo: f64, hi: f64 },

    #[error("forward map is not strictly monotone on [{lo}, {hi}]: {detail}")]
    NonMonotone { lo: f64, hi: f64, detail: String },

    #[error("map has {} comparable extrema: {candidates:?}", .candidates.len())]
    Ambiguous { candidates: Vec<(f64, f64)> },

    #[error("numerical error: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            name,
            reason: reason.into(),
        }
    }
}

/// Rejects non-finite or non-positive values.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(name, format!("must be finite and > 0, got {value}")))
    }
}
