//! Run configuration: a TOML file with one optional section per concern.
//!
//! Every section has defaults matching the standard scenario (silver sphere
//! of radius 10 nm in vacuum, resonant 24 D emitter at 2.785 eV). Unknown
//! keys are rejected. `[sweep]` and `[invert]` have no defaults and must be
//! present for the subcommands that use them.

use std::path::{Path, PathBuf};

use lamb_core::greens::{ModeRange, Orientation};
use lamb_core::imaging::{LateralGrid, ScanConfig, SweepFixed, SweepKind};
use lamb_core::material::{dipole_mode_params, DrudeMaterial, HostMedium, PolarizabilityOptions, Sphere};
use lamb_core::qed::{CouplingOptions, EmitterParams};
use lamb_core::scenario::{Scenario, ScenarioOptions};
use lamb_core::spectra::{FrequencyGrid, SpectrumKind};
use lamb_core::units::debye_to_enm;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub material: MaterialConfig,
    pub host: HostConfig,
    pub probe: ProbeConfig,
    pub emitter: EmitterConfig,
    pub dipole: DipoleConfig,
    pub series: SeriesConfig,
    pub grid: GridConfig,
    pub band: BandConfig,
    pub geometry: GeometryConfig,
    pub spectrum: SpectrumConfig,
    pub modes: ModesConfig,
    pub scan: ScanSection,
    pub sweep: Option<SweepSection>,
    pub invert: Option<InvertSection>,
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialConfig {
    pub eps_inf: f64,
    /// Plasma frequency (eV).
    pub omega_p: f64,
    /// Drude damping (eV).
    pub gamma_p: f64,
}

impl Default for MaterialConfig {
    fn default() -> Self {
        let s = DrudeMaterial::SILVER;
        MaterialConfig {
            eps_inf: s.eps_inf,
            omega_p: s.omega_p,
            gamma_p: s.gamma_p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HostConfig {
    pub eps_b: f64,
}

impl Default for HostConfig {
    fn default() -> Self {
        HostConfig { eps_b: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    /// Sphere radius (nm).
    pub radius: f64,
    pub radiative_correction: bool,
    pub finite_size: bool,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            radius: 10.0,
            radiative_correction: true,
            finite_size: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmitterConfig {
    pub mu_debye: f64,
    /// Bare transition frequency (eV).
    pub omega_e: f64,
    /// Intrinsic linewidth (eV).
    pub gamma_e: f64,
    /// Dipole direction; normalized on load.
    pub orientation: [f64; 3],
}

impl Default for EmitterConfig {
    fn default() -> Self {
        EmitterConfig {
            mu_debye: EmitterParams::DEFAULT_MU_DEBYE,
            omega_e: Scenario::RESONANT_OMEGA,
            gamma_e: EmitterParams::DEFAULT_GAMMA_E,
            orientation: [0.0, 0.0, 1.0],
        }
    }
}

/// Dipole pseudo-mode frequency. By default it is pinned to the emitter
/// frequency; `omega_d` pins it elsewhere and `computed = true` keeps the
/// sphere's own resonance. γ_d and μ_d always come from the sphere.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DipoleConfig {
    pub omega_d: Option<f64>,
    pub computed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesConfig {
    /// Lowest order in the dark-mode sums.
    pub n_min: u32,
    /// Fixed highest order; adaptive when absent.
    pub n_max: Option<u32>,
    pub rel_tol: f64,
    pub self_consistent: bool,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        let r = ModeRange::higher_order();
        SeriesConfig {
            n_min: r.n_min,
            n_max: r.n_max,
            rel_tol: r.rel_tol,
            self_consistent: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Grid center (eV); defaults to the dipole-mode frequency.
    pub center: Option<f64>,
    pub half_width: f64,
    pub step: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            center: None,
            half_width: 0.3,
            step: 2e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    /// Gap between the sphere surface and the emitter (nm).
    pub h: f64,
    /// Dipole tilt from the sphere axis (degrees).
    pub theta_deg: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig { h: 2.0, theta_deg: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumChoice {
    Scattering,
    Emission,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub kind: SpectrumChoice,
    /// Relative amplitude of seeded multiplicative noise; 0 disables it.
    pub noise: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            kind: SpectrumChoice::Both,
            noise: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrientationChoice {
    Radial,
    Tangential,
}

impl From<OrientationChoice> for Orientation {
    fn from(o: OrientationChoice) -> Self {
        match o {
            OrientationChoice::Radial => Orientation::Radial,
            OrientationChoice::Tangential => Orientation::Tangential,
        }
    }
}

/// Frequency band tabulated by the `material` and `modes` subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub step: f64,
}

impl Default for BandConfig {
    fn default() -> Self {
        BandConfig {
            omega_min: 2.0,
            omega_max: 4.0,
            step: 0.005,
        }
    }
}

/// Settings of the `modes` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesConfig {
    /// One table per gap (nm).
    pub heights: Vec<f64>,
    /// Orders tabulated individually, J_1 … J_n_max.
    pub n_max: u32,
    pub orientation: OrientationChoice,
}

impl Default for ModesConfig {
    fn default() -> Self {
        ModesConfig {
            heights: vec![10.0, 2.0],
            n_max: 10,
            orientation: OrientationChoice::Radial,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    /// Lateral center of the grid (nm).
    pub center: [f64; 2],
    pub step: f64,
    /// Points per side.
    pub n: usize,
    pub z_offset: f64,
    pub emitter_position: [f64; 3],
}

impl Default for ScanSection {
    fn default() -> Self {
        ScanSection {
            center: [0.0, 0.0],
            step: 0.5,
            n: 41,
            z_offset: 2.5,
            emitter_position: [0.0; 3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKindChoice {
    Height,
    Theta,
    ZOffset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub kind: SweepKindChoice,
    /// Explicit parameter values; alternatively `start`, `stop`, `step`.
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default)]
    pub theta_deg: f64,
    #[serde(default = "default_reference_h")]
    pub reference_h: f64,
}

fn default_h() -> f64 {
    2.0
}

fn default_reference_h() -> f64 {
    20.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InvertMode {
    Height,
    Orientation,
    Spectrum,
    Lateral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindChoice {
    Scattering,
    Emission,
}

impl From<KindChoice> for SpectrumKind {
    fn from(k: KindChoice) -> Self {
        match k {
            KindChoice::Scattering => SpectrumKind::Scattering,
            KindChoice::Emission => SpectrumKind::Emission,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvertSection {
    pub mode: InvertMode,
    /// Observed spectrum CSV (omega_eV, intensity) or scan CSV
    /// (x_nm, y_nm, shift_meV). Relative paths resolve against the config
    /// file's directory.
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default = "default_kind")]
    pub kind: KindChoice,
    /// Observed dip (eV) for the height and orientation modes; taken from
    /// the input spectrum when absent.
    #[serde(default)]
    pub omega_dip: Option<f64>,
    /// Known tilt for `height` (degrees).
    #[serde(default)]
    pub theta_deg: f64,
    /// Known gap for `orientation` (nm).
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_h_bounds")]
    pub h_bounds: [f64; 2],
    #[serde(default = "default_theta_bounds")]
    pub theta_bounds: [f64; 2],
}

fn default_kind() -> KindChoice {
    KindChoice::Scattering
}

fn default_h_bounds() -> [f64; 2] {
    [1.5, 6.0]
}

fn default_theta_bounds() -> [f64; 2] {
    [0.0, 90.0]
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub jobs: Option<usize>,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::Validation {
        field: Some(field.to_string()),
        message: message.into(),
    }
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite and > 0, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite and >= 0, got {v}")))
    }
}

impl RunConfig {
    /// Parses a config file; relative paths inside it are resolved against
    /// its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: Some(path.to_path_buf()),
            message: e.to_string(),
        })?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(inv) = cfg.invert.as_mut() {
            if let Some(input) = inv.input.as_mut() {
                if input.is_relative() {
                    *input = base.join(&*input);
                }
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation {
            field: None,
            message: e.message().to_string(),
        })
    }

    /// The tabulation band as a frequency grid.
    pub fn band(&self) -> Result<FrequencyGrid, CliError> {
        positive("band.step", self.band.step)?;
        positive("band.omega_min", self.band.omega_min)?;
        Ok(FrequencyGrid::new(
            self.band.omega_min,
            self.band.omega_max,
            self.band.step,
        )?)
    }

    /// Field-level checks shared by every subcommand.
    pub fn validate(&self) -> Result<(), CliError> {
        positive("material.omega_p", self.material.omega_p)?;
        non_negative("material.gamma_p", self.material.gamma_p)?;
        if !self.material.eps_inf.is_finite() {
            return Err(invalid("material.eps_inf", "must be finite"));
        }
        if !(self.host.eps_b.is_finite() && self.host.eps_b >= 1.0) {
            return Err(invalid("host.eps_b", format!("must be >= 1, got {}", self.host.eps_b)));
        }
        positive("probe.radius", self.probe.radius)?;
        positive("emitter.mu_debye", self.emitter.mu_debye)?;
        positive("emitter.omega_e", self.emitter.omega_e)?;
        non_negative("emitter.gamma_e", self.emitter.gamma_e)?;
        let norm = self.emitter.orientation.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(invalid("emitter.orientation", "must be a non-zero vector"));
        }
        if let Some(w) = self.dipole.omega_d {
            positive("dipole.omega_d", w)?;
            if self.dipole.computed {
                return Err(invalid("dipole", "set either omega_d or computed = true, not both"));
            }
        }
        if self.series.n_min == 0 {
            return Err(invalid("series.n_min", "must be >= 1"));
        }
        if let Some(n) = self.series.n_max {
            if n < self.series.n_min {
                return Err(invalid("series.n_max", "must be >= series.n_min"));
            }
        }
        positive("series.rel_tol", self.series.rel_tol)?;
        if let Some(c) = self.grid.center {
            positive("grid.center", c)?;
        }
        positive("grid.half_width", self.grid.half_width)?;
        positive("grid.step", self.grid.step)?;
        positive("geometry.h", self.geometry.h)?;
        if !(0.0..=90.0).contains(&self.geometry.theta_deg) {
            return Err(invalid("geometry.theta_deg", "must lie in [0, 90]"));
        }
        non_negative("spectrum.noise", self.spectrum.noise)?;
        if let Some(0) = self.run.jobs {
            return Err(invalid("run.jobs", "must be >= 1"));
        }
        Ok(())
    }

    pub fn sphere(&self) -> Result<Sphere, CliError> {
        let material = DrudeMaterial::new(self.material.eps_inf, self.material.omega_p, self.material.gamma_p)?;
        let options = PolarizabilityOptions {
            radiative_correction: self.probe.radiative_correction,
            finite_size: self.probe.finite_size,
        };
        Ok(Sphere::new(
            material,
            HostMedium::new(self.host.eps_b)?,
            self.probe.radius,
            options,
        )?)
    }

    pub fn mode_range(&self) -> ModeRange {
        ModeRange {
            n_min: self.series.n_min,
            n_max: self.series.n_max,
            rel_tol: self.series.rel_tol,
        }
    }

    pub fn scenario(&self, lamb_shift: bool) -> Result<Scenario, CliError> {
        let sphere = self.sphere()?;
        let computed = dipole_mode_params(&sphere)?;
        let dipole = if self.dipole.computed {
            computed
        } else {
            computed.with_omega_d(self.dipole.omega_d.unwrap_or(self.emitter.omega_e))
        };
        let emitter = EmitterParams::with_frequency(self.emitter.omega_e)?;
        let emitter = EmitterParams {
            mu_e: debye_to_enm(self.emitter.mu_debye),
            gamma_e: self.emitter.gamma_e,
            ..emitter.oriented(self.emitter.orientation)?
        };
        let center = self.grid.center.unwrap_or(dipole.omega_d);
        let grid = FrequencyGrid::centered(center, self.grid.half_width, self.grid.step)?;
        let options = ScenarioOptions {
            lamb_shift,
            coupling: CouplingOptions {
                self_consistent: self.series.self_consistent,
                range: self.mode_range(),
            },
        };
        Ok(Scenario::new(sphere, emitter, dipole, grid, options)?)
    }

    pub fn sweep_section(&self) -> Result<&SweepSection, CliError> {
        self.sweep
            .as_ref()
            .ok_or_else(|| invalid("sweep", "the sweep subcommand needs a [sweep] section"))
    }

    pub fn invert_section(&self) -> Result<&InvertSection, CliError> {
        self.invert
            .as_ref()
            .ok_or_else(|| invalid("invert", "the invert subcommand needs an [invert] section"))
    }

    pub fn scan_config(&self) -> Result<ScanConfig, CliError> {
        let s = &self.scan;
        positive("scan.step", s.step)?;
        positive("scan.z_offset", s.z_offset)?;
        if s.n == 0 {
            return Err(invalid("scan.n", "must be >= 1"));
        }
        Ok(ScanConfig {
            grid: LateralGrid::centered(s.center[0], s.center[1], s.step, s.n)?,
            z_offset: s.z_offset,
            emitter_position: s.emitter_position,
        })
    }

    /// Fingerprint of everything that determines the outputs. The thread
    /// count and output directory are excluded.
    pub fn fingerprint(&self, lamb_shift: bool) -> String {
        use sha2::{Digest, Sha256};
        let mut canonical = self.clone();
        canonical.run.jobs = None;
        canonical.run.output_dir = None;
        let json = serde_json::to_string(&(canonical, lamb_shift)).expect("config serializes");
        format!("{:x}", Sha256::digest(json.as_bytes()))
    }
}

impl SweepSection {
    pub fn kind(&self) -> SweepKind {
        match self.kind {
            SweepKindChoice::Height => SweepKind::Height,
            SweepKindChoice::Theta => SweepKind::Theta,
            SweepKindChoice::ZOffset => SweepKind::ZOffset,
        }
    }

    pub fn fixed(&self) -> SweepFixed {
        SweepFixed {
            h: self.h,
            theta_deg: self.theta_deg,
            reference_h: self.reference_h,
        }
    }

    /// The swept values, from `values` or from `start`/`stop`/`step`
    /// (inclusive of `stop`; `step` may be negative).
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        match (&self.values, self.start, self.stop, self.step) {
            (Some(v), None, None, None) => {
                if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                    return Err(invalid("sweep.values", "must be a non-empty list of finite numbers"));
                }
                Ok(v.clone())
            }
            (None, Some(start), Some(stop), Some(step)) => {
                if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step == 0.0 {
                    return Err(invalid(
                        "sweep.step",
                        "start, stop and step must be finite with step != 0",
                    ));
                }
                let count = (stop - start) / step;
                if count < -1e-9 {
                    return Err(invalid("sweep.step", "step points away from stop"));
                }
                let n = (count + 1e-9).floor() as usize;
                if n > 1_000_000 {
                    return Err(invalid("sweep.step", "more than 10^6 sweep points"));
                }
                Ok((0..=n).map(|i| start + step * i as f64).collect())
            }
            _ => Err(invalid(
                "sweep",
                "give either `values` or all of `start`, `stop` and `step`",
            )),
        }
    }
}
