//! A bundled forward model: sphere, emitter, dipole pseudo-mode, spectral
//! grid and evaluation flags. Sweeps, scans and inversions all go through
//! [`Scenario`] so that they share one set of parameters.

use serde::Serialize;

use crate::error::Result;
use crate::material::{dipole_mode_params, DipoleModeParams, Sphere};
use crate::qed::{effective_frequencies, CouplingOptions, CouplingParams, EmitterParams, Geometry};
use crate::spectra::{emission_spectrum, find_dip, scattering_spectrum, DipResult, FrequencyGrid, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioOptions {
    /// Include Δ'_e in the spectra.
    pub lamb_shift: bool,
    pub coupling: CouplingOptions,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        ScenarioOptions {
            lamb_shift: true,
            coupling: CouplingOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scenario {
    pub sphere: Sphere,
    pub emitter: EmitterParams,
    pub dipole: DipoleModeParams,
    pub grid: FrequencyGrid,
    pub options: ScenarioOptions,
}

impl Scenario {
    pub const RESONANT_OMEGA: f64 = 2.785;

    pub fn new(
        sphere: Sphere,
        emitter: EmitterParams,
        dipole: DipoleModeParams,
        grid: FrequencyGrid,
        options: ScenarioOptions,
    ) -> Result<Self> {
        sphere.validate()?;
        emitter.validate()?;
        options.coupling.range.validate()?;
        Ok(Scenario {
            sphere,
            emitter,
            dipole,
            grid,
            options,
        })
    }

    /// Silver sphere of radius 10 nm in vacuum with a resonant 24 D emitter:
    /// ω_e = ω_d = 2.785 eV, γ_e = 15 meV, z-polarized. γ_d and μ_d come from
    /// the sphere's dipole resonance; the grid is ω_d ± 0.3 eV at 0.2 meV.
    pub fn standard() -> Result<Self> {
        Self::resonant(Sphere::silver(10.0)?, Self::RESONANT_OMEGA)
    }

    /// Emitter and dipole mode both pinned at `omega`, other parameters
    /// as in [`Scenario::standard`].
    pub fn resonant(sphere: Sphere, omega: f64) -> Result<Self> {
        let dipole = dipole_mode_params(&sphere)?.with_omega_d(omega);
        let emitter = EmitterParams::with_frequency(omega)?;
        let grid = FrequencyGrid::centered(omega, 0.3, 2e-4)?;
        Self::new(sphere, emitter, dipole, grid, ScenarioOptions::default())
    }

    pub fn with_lamb_shift(mut self, on: bool) -> Self {
        self.options.lamb_shift = on;
        self
    }

    pub fn with_grid(mut self, grid: FrequencyGrid) -> Self {
        self.grid = grid;
        self
    }

    /// On-axis geometry at gap `h` (nm) and tilt `theta` (radians).
    pub fn geometry(&self, h: f64, theta: f64) -> Result<Geometry> {
        Geometry::on_axis(self.sphere.radius, h, theta)
    }

    /// Coupling parameters with Δ'_e included regardless of the flag.
    pub fn coupling_at(&self, geom: &Geometry) -> Result<CouplingParams> {
        effective_frequencies(&self.sphere, geom, &self.emitter, &self.dipole, &self.options.coupling)
    }

    pub fn scattering_at(&self, geom: &Geometry) -> Result<Spectrum> {
        let c = self.coupling_at(geom)?;
        scattering_spectrum(&c, &self.grid.points(), self.options.lamb_shift)
    }

    pub fn emission_at(&self, geom: &Geometry) -> Result<Spectrum> {
        let mut c = self.coupling_at(geom)?;
        if !self.options.lamb_shift {
            c = c.without_lamb_shift();
        }
        emission_spectrum(&c, &self.grid.points())
    }

    pub fn dip_at(&self, geom: &Geometry) -> Result<DipResult> {
        find_dip(&self.scattering_at(geom)?)
    }
}
