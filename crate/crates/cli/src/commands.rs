//! One function per subcommand. Each writes its data files into the output
//! directory and returns a one-line summary for the terminal.

use std::path::Path;

use lamb_core::greens::{higher_order_spectral_density, spectral_densities, ModeRange, Orientation};
use lamb_core::imaging::{scan_2d, sweep, LateralGrid, ScanConfig, ScanMap};
use lamb_core::inversion::{
    add_multiplicative_noise, fit_spectrum, invert_height, invert_orientation, localize_lateral, FitBounds,
    InversionResult, LateralEstimate,
};
use lamb_core::material::dipole_mode_params;
use lamb_core::qed::CouplingParams;
use lamb_core::scenario::Scenario;
use lamb_core::spectra::{find_dip, find_peak, DipResult, PeakResult, Spectrum, SpectrumKind};
use lamb_core::units::enm_to_debye;
use serde::Serialize;
use serde_json::json;

use crate::config::{InvertMode, RunConfig, SpectrumChoice};
use crate::error::CliError;
use crate::output::{num, opt, OutputDir};

pub struct Context<'a> {
    pub config: &'a RunConfig,
    pub lamb_shift: bool,
    pub seed: u64,
}

impl Context<'_> {
    fn scenario(&self) -> Result<Scenario, CliError> {
        self.config.scenario(self.lamb_shift)
    }
}

pub fn material(ctx: &Context, out: &mut OutputDir) -> Result<String, CliError> {
    let sphere = ctx.config.sphere()?;
    let band = ctx.config.band()?;
    let mut rows = Vec::with_capacity(band.len);
    for w in band.points() {
        let eps = sphere.material.permittivity(w)?;
        let alpha = sphere.polarizability(1, w)?;
        rows.push(vec![num(w), num(eps.re), num(eps.im), num(alpha.re), num(alpha.im)]);
    }
    out.write_csv(
        "permittivity.csv",
        &["omega_eV", "eps_re", "eps_im", "alpha1_re_nm3", "alpha1_im_nm3"],
        &rows,
    )?;
    let d = dipole_mode_params(&sphere)?;
    out.write_json(
        "dipole_mode.json",
        &json!({
            "sphere": sphere,
            "omega_d_eV": d.omega_d,
            "gamma_d_eV": d.gamma_d,
            "mu_d_e_nm": d.mu_d,
            "mu_d_debye": enm_to_debye(d.mu_d),
            "eta1_eV": d.eta1,
        }),
    )?;
    Ok(format!(
        "dipole resonance {:.4} eV, width {:.1} meV, moment {:.0} D",
        d.omega_d,
        1e3 * d.gamma_d,
        enm_to_debye(d.mu_d)
    ))
}

#[derive(Serialize)]
struct ModesSummary {
    h_nm: f64,
    file: String,
    max_j1: f64,
    omega_max_j1_ev: f64,
    max_j_higher: f64,
    omega_max_j_higher_ev: f64,
    dominant: &'static str,
}

pub fn modes(ctx: &Context, out: &mut OutputDir) -> Result<String, CliError> {
    let cfg = ctx.config;
    let sphere = cfg.sphere()?;
    let band = cfg.band()?;
    let n_max = cfg.modes.n_max;
    if n_max == 0 {
        return Err(CliError::Validation {
            field: Some("modes.n_max".into()),
            message: "must be >= 1".into(),
        });
    }
    if cfg.modes.heights.is_empty() {
        return Err(CliError::Validation {
            field: Some("modes.heights".into()),
            message: "needs at least one gap".into(),
        });
    }
    let orientation: Orientation = cfg.modes.orientation.into();
    let higher = ModeRange {
        n_min: 2,
        ..cfg.mode_range()
    };
    let mut header: Vec<String> = vec!["omega_eV".into()];
    header.extend((1..=n_max).map(|n| format!("J_{n}")));
    header.push("J_higher".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();

    let mut summary = Vec::new();
    for &h in &cfg.modes.heights {
        if !(h.is_finite() && h > 0.0) {
            return Err(CliError::Validation {
                field: Some("modes.heights".into()),
                message: format!("gaps must be finite and > 0, got {h}"),
            });
        }
        let d = sphere.radius + h;
        let mut rows = Vec::with_capacity(band.len);
        let (mut j1_best, mut jh_best) = ((f64::MIN, 0.0), (f64::MIN, 0.0));
        for w in band.points() {
            let js = spectral_densities(&sphere, d, w, n_max, orientation)?;
            let jh = higher_order_spectral_density(&sphere, d, w, orientation, &higher)?;
            if js[0] > j1_best.0 {
                j1_best = (js[0], w);
            }
            if jh > jh_best.0 {
                jh_best = (jh, w);
            }
            let mut row = vec![num(w)];
            row.extend(js.iter().map(|&j| num(j)));
            row.push(num(jh));
            rows.push(row);
        }
        let file = format!("modes_h{}.csv", num(h));
        out.write_csv(&file, &header, &rows)?;
        summary.push(ModesSummary {
            h_nm: h,
            file,
            max_j1: j1_best.0,
            omega_max_j1_ev: j1_best.1,
            max_j_higher: jh_best.0,
            omega_max_j_higher_ev: jh_best.1,
            dominant: if j1_best.0 >= jh_best.0 {
                "dipole"
            } else {
                "higher_order"
            },
        });
    }
    out.write_json("modes.json", &json!({ "orientation": orientation, "tables": summary }))?;
    Ok(summary
        .iter()
        .map(|s| format!("h = {} nm: {} dominated", s.h_nm, s.dominant))
        .collect::<Vec<_>>()
        .join("; "))
}

#[derive(Serialize)]
struct SpectrumReport {
    file: &'static str,
    params_fingerprint: String,
    normalization: f64,
    under_resolved: bool,
    noise: f64,
    peak: Option<PeakResult>,
    dip: Option<DipResult>,
    dip_error: Option<String>,
}

fn report(file: &'static str, s: &Spectrum, noise: f64) -> SpectrumReport {
    let (dip, dip_error) = match find_dip(s) {
        Ok(d) => (Some(d), None),
        Err(e) => (None, Some(e.to_string())),
    };
    SpectrumReport {
        file,
        params_fingerprint: s.params_fingerprint.clone(),
        normalization: s.normalization,
        under_resolved: s.under_resolved,
        noise,
        peak: find_peak(s).ok(),
        dip,
        dip_error,
    }
}

fn spectrum_rows(s: &Spectrum) -> Vec<Vec<String>> {
    s.omegas
        .iter()
        .zip(&s.values)
        .map(|(&w, &v)| vec![num(w), num(v)])
        .collect()
}

pub fn spectrum(ctx: &Context, out: &mut OutputDir) -> Result<String, CliError> {
    let cfg = ctx.config;
    let s = ctx.scenario()?;
    let geom = s.geometry(cfg.geometry.h, cfg.geometry.theta_deg.to_radians())?;
    let coupling: CouplingParams = s.coupling_at(&geom)?;
    let noise = cfg.spectrum.noise;
    let noisy = |spec: Spectrum, salt: u64| -> Result<Spectrum, CliError> {
        if noise > 0.0 {
            Ok(add_multiplicative_noise(&spec, noise, ctx.seed.wrapping_add(salt))?)
        } else {
            Ok(spec)
        }
    };

    let mut reports = Vec::new();
    let mut line = Vec::new();
    if matches!(cfg.spectrum.kind, SpectrumChoice::Scattering | SpectrumChoice::Both) {
        let sca = noisy(s.scattering_at(&geom)?, 0)?;
        out.write_csv("scattering.csv", &["omega_eV", "intensity"], &spectrum_rows(&sca))?;
        let r = report("scattering.csv", &sca, noise);
        line.push(match &r.dip {
            Some(d) => format!("scattering dip at {:.5} eV", d.omega_dip),
            None => "scattering spectrum has no dip".to_string(),
        });
        reports.push(r);
    }
    if matches!(cfg.spectrum.kind, SpectrumChoice::Emission | SpectrumChoice::Both) {
        let emi = noisy(s.emission_at(&geom)?, 1)?;
        out.write_csv("emission.csv", &["omega_eV", "intensity"], &spectrum_rows(&emi))?;
        let r = report("emission.csv", &emi, noise);
        if let Some(p) = &r.peak {
            line.push(format!("emission peak at {:.5} eV", p.omega_peak));
        }
        reports.push(r);
    }
    out.write_json(
        "spectrum.json",
        &json!({
            "geometry": { "h_nm": cfg.geometry.h, "theta_deg": cfg.geometry.theta_deg, "distance_nm": geom.distance },
            "lamb_shift": ctx.lamb_shift,
            "dipole": s.dipole,
            "coupling": {
                "g_de_eV": coupling.g_de,
                "delta_hom_eV": coupling.delta_hom,
                "gamma_hom_eV": coupling.gamma_hom,
                "omega_e_eff_eV": coupling.omega_e_eff,
                "omega_d_eff_eV": coupling.omega_d_eff,
            },
            "spectra": reports,
        }),
    )?;
    Ok(line.join(", "))
}

pub fn run_sweep(ctx: &Context, out: &mut OutputDir) -> Result<String, CliError> {
    let section = ctx.config.sweep_section()?;
    let values = section.values()?;
    let s = ctx.scenario()?;
    let table = sweep(&s, section.kind(), &values, &section.fixed())?;
    let mev = |x: Option<f64>| opt(x.map(|v| 1e3 * v));
    let rows: Vec<Vec<String>> = table
        .points
        .iter()
        .map(|p| {
            vec![
                num(p.param),
                mev(p.delta_hom),
                mev(p.gamma_hom),
                mev(p.g_de),
                opt(p.emission_peak),
                mev(p.emission_fwhm),
                opt(p.emission_shift_mev),
                opt(p.omega_dip),
                opt(p.dip_shift_mev),
                p.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    out.write_csv(
        "sweep.csv",
        &[
            "param",
            "delta_hom_meV",
            "gamma_hom_meV",
            "g_meV",
            "emission_peak_eV",
            "emission_fwhm_meV",
            "emission_shift_meV",
            "omega_dip_eV",
            "dip_shift_meV",
            "error",
        ],
        &rows,
    )?;
    out.write_json(
        "sweep.json",
        &json!({
            "kind": table.kind,
            "fixed": table.fixed,
            "lamb_shift": ctx.lamb_shift,
            "reference_omega_eV": table.reference_omega,
            "reference_fallback": table.reference_fallback,
            "reference_emission_eV": table.reference_emission,
            "points": table.points.len(),
            "failed_points": table.points.iter().filter(|p| p.error.is_some()).count(),
        }),
    )?;
    let shifts = table.dip_shifts();
    Ok(format!(
        "{} points, {} with a dip{}",
        table.points.len(),
        shifts.len(),
        shifts
            .last()
            .map(|(p, v)| format!(", shift {v:.2} meV at {p}"))
            .unwrap_or_default()
    ))
}

pub fn scan(ctx: &Context, out: &mut OutputDir) -> Result<String, CliError> {
    let s = ctx.scenario()?;
    let config = ctx.config.scan_config()?;
    let map = scan_2d(&s, &config)?;
    let mut rows = Vec::with_capacity(map.shifts.len());
    for (j, &y) in map.ys.iter().enumerate() {
        for (i, &x) in map.xs.iter().enumerate() {
            rows.push(vec![num(x), num(y), opt(map.get(i, j))]);
        }
    }
    out.write_csv("scan.csv", &["x_nm", "y_nm", "shift_meV"], &rows)?;
    let (spot, spot_error) = match localize_lateral(&map) {
        Ok(e) => (Some(e), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let grid: Vec<Vec<Option<f64>>> = (0..map.ny())
        .map(|j| (0..map.nx()).map(|i| map.get(i, j)).collect())
        .collect();
    out.write_json(
        "scan.json",
        &json!({
            "config": map.config,
            "xs_nm": map.xs,
            "ys_nm": map.ys,
            "shifts_meV": grid,
            "reference_omega_eV": map.reference_omega,
            "reference_fallback": map.reference_fallback,
            "fingerprint": map.fingerprint,
            "fwhm_x_nm": map.fwhm_x(),
            "fwhm_y_nm": map.fwhm_y(),
            "spot": spot,
            "spot_error": spot_error,
        }),
    )?;
    Ok(match spot {
        Some(e) => format!(
            "spot at ({:.3}, {:.3}) nm, azimuth {:.1} deg, anisotropy {:.3}",
            e.x, e.y, e.azimuth_deg, e.anisotropy
        ),
        None => "no localizable spot".to_string(),
    })
}

fn read_records(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>, Vec<Vec<bool>>), CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::io(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut values = Vec::new();
    let mut present = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::io(path, e))?;
        let mut row = Vec::with_capacity(rec.len());
        let mut mask = Vec::with_capacity(rec.len());
        for field in rec.iter() {
            let field = field.trim();
            if field.is_empty() {
                row.push(f64::NAN);
                mask.push(false);
            } else {
                row.push(field.parse::<f64>().map_err(|_| {
                    CliError::input(format!(
                        "{}: row {}: {field:?} is not a number",
                        path.display(),
                        line + 2
                    ))
                })?);
                mask.push(true);
            }
        }
        values.push(row);
        present.push(mask);
    }
    Ok((header, values, present))
}

fn read_spectrum(path: &Path, kind: SpectrumKind) -> Result<Spectrum, CliError> {
    let (header, rows, present) = read_records(path)?;
    if header != ["omega_eV", "intensity"] {
        return Err(CliError::input(format!(
            "{}: expected columns omega_eV,intensity, got {header:?}",
            path.display()
        )));
    }
    if present.iter().flatten().any(|p| !p) {
        return Err(CliError::input(format!(
            "{}: spectrum has empty fields",
            path.display()
        )));
    }
    let omegas = rows.iter().map(|r| r[0]).collect();
    let values = rows.iter().map(|r| r[1]).collect();
    Ok(Spectrum::from_samples(kind, omegas, values)?)
}

/// Rebuilds a dip-shift map from `x_nm,y_nm,shift_meV` rows on a uniform
/// grid, in any row order.
fn read_scan(path: &Path, z_offset: f64) -> Result<ScanMap, CliError> {
    let (header, rows, present) = read_records(path)?;
    if header != ["x_nm", "y_nm", "shift_meV"] {
        return Err(CliError::input(format!(
            "{}: expected columns x_nm,y_nm,shift_meV, got {header:?}",
            path.display()
        )));
    }
    let axis = |col: usize| -> Vec<f64> {
        let mut v: Vec<f64> = rows.iter().map(|r| r[col]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let (xs, ys) = (axis(0), axis(1));
    if xs.len() < 3 || ys.len() < 3 || xs.len() * ys.len() != rows.len() {
        return Err(CliError::input(format!(
            "{}: not a complete grid of at least 3 x 3 points",
            path.display()
        )));
    }
    let step = xs[1] - xs[0];
    let uniform = |v: &[f64]| {
        v.windows(2)
            .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.abs().max(1.0))
    };
    if !(uniform(&xs) && uniform(&ys)) {
        return Err(CliError::input(format!(
            "{}: grid must be uniform with equal x and y steps",
            path.display()
        )));
    }
    let index = |v: &[f64], x: f64| v.binary_search_by(|p| p.total_cmp(&x)).expect("value on its own axis");
    let mut shifts = vec![None; xs.len() * ys.len()];
    for (r, mask) in rows.iter().zip(&present) {
        let k = index(&ys, r[1]) * xs.len() + index(&xs, r[0]);
        shifts[k] = mask[2].then_some(r[2]);
    }
    let grid = LateralGrid::new(xs[0], ys[0], step, xs.len(), ys.len())?;
    Ok(ScanMap {
        xs,
        ys,
        shifts,
        reference_omega: f64::NAN,
        reference_fallback: false,
        config: ScanConfig {
            grid,
            z_offset,
            emitter_position: [0.0; 3],
        },
        fingerprint: String::new(),
    })
}

pub fn invert(ctx: &Context, out: &mut OutputDir) -> Result<String, CliError> {
    let inv = ctx.config.invert_section()?;
    let input = || {
        inv.input.as_deref().ok_or_else(|| CliError::Validation {
            field: Some("invert.input".into()),
            message: "this inversion mode needs an input file".into(),
        })
    };
    let bounds_h = (inv.h_bounds[0], inv.h_bounds[1]);
    let bounds_theta = (inv.theta_bounds[0], inv.theta_bounds[1]);

    if inv.mode == InvertMode::Lateral {
        let map = read_scan(input()?, ctx.config.scan.z_offset)?;
        let est: LateralEstimate = localize_lateral(&map)?;
        out.write_json("inversion.json", &json!({ "mode": inv.mode, "lateral": est }))?;
        return Ok(format!(
            "emitter at ({:.3}, {:.3}) nm, azimuth {:.1} deg, anisotropy {:.3}",
            est.x, est.y, est.azimuth_deg, est.anisotropy
        ));
    }

    let s = ctx.scenario()?;
    let observed_dip = || -> Result<f64, CliError> {
        match inv.omega_dip {
            Some(w) => Ok(w),
            None => Ok(find_dip(&read_spectrum(input()?, inv.kind.into())?)?.omega_dip),
        }
    };
    let (result, dip): (InversionResult, Option<f64>) = match inv.mode {
        InvertMode::Height => {
            let w = observed_dip()?;
            (invert_height(&s, w, inv.theta_deg, bounds_h)?, Some(w))
        }
        InvertMode::Orientation => {
            let w = observed_dip()?;
            (invert_orientation(&s, w, inv.h, bounds_theta)?, Some(w))
        }
        InvertMode::Spectrum => {
            let observed = read_spectrum(input()?, inv.kind.into())?;
            let bounds = FitBounds {
                h: bounds_h,
                theta_deg: bounds_theta,
            };
            (fit_spectrum(&s, &observed, &bounds)?, None)
        }
        InvertMode::Lateral => unreachable!("handled above"),
    };
    out.write_json(
        "inversion.json",
        &json!({ "mode": inv.mode, "observed_dip_eV": dip, "lamb_shift": ctx.lamb_shift, "result": result }),
    )?;
    Ok(format!(
        "h = {:.4} nm, theta = {:.2} deg, residual {:.2e}{}",
        result.h_est,
        result.theta_est,
        result.residual,
        if result.warnings.is_empty() {
            String::new()
        } else {
            format!(" ({})", result.warnings.join("; "))
        }
    ))
}
