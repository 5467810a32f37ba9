//! Forward model and inverse solver for the plasmon-enhanced Lamb shift of a
//! point-dipole quantum emitter near a metal nanosphere.
//!
//! Units throughout the crate: energies, frequencies and linewidths in eV
//! (ħ = 1, "frequency" means ħω), lengths in nm, dipole moments in e·nm.
//!
//! The layers build on each other:
//!
//! * [`material`]: Drude permittivity, multipole polarizabilities and the
//!   dipole pseudo-mode parameters of the sphere.
//! * [`greens`]: quasi-static scattered Green-function sums at the emitter
//!   and per-mode spectral densities.
//! * [`qed`]: higher-order-mode Lamb shift and decay, emitter–dipole
//!   coupling, complex effective frequencies.
//! * [`spectra`]: emission and scattering spectra, eigen-channel
//!   decomposition, dip and peak extraction.
//! * [`scenario`]: a bundled forward model (sphere + emitter + pseudo-mode +
//!   frequency grid) used by the sweep, scan and inversion layers.
//! * [`imaging`]: 1D sweeps and 2D lateral dip-shift maps.
//! * [`inversion`]: recovery of emitter depth, orientation and lateral
//!   position from dips, spectra and maps.

pub mod error;
pub mod greens;
pub mod imaging;
pub mod inversion;
pub mod material;
pub mod optim;
pub mod qed;
pub mod scenario;
pub mod spectra;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;
