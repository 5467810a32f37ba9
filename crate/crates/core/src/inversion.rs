//! Inverse problems: emitter gap, tilt and lateral position from dip
//! frequencies, full spectra or dip-shift maps.
//!
//! Dip inversions bisect a forward map that is first sampled across the
//! bounds and checked for strict monotonicity, so a branch is never picked
//! silently. Spectrum fitting seeds a coarse grid and polishes the best
//! seed with [`crate::optim::nelder_mead`]. Randomness is confined to
//! [`add_multiplicative_noise`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::imaging::ScanMap;
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::scenario::Scenario;
use crate::spectra::{emission_spectrum, scattering_spectrum, Spectrum, SpectrumKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InversionResult {
    /// Gap (nm).
    pub h_est: f64,
    /// Tilt (degrees).
    pub theta_est: f64,
    /// Lateral position (nm), when the inversion estimates it.
    pub lateral_est: Option<(f64, f64)>,
    /// Dimensionless misfit between model and observation.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Samples per bound interval in the monotonicity pre-check.
pub const MONOTONE_SAMPLES: usize = 33;

/// Solves `forward(x) = observed` on `[lo, hi]` by bisection to width `tol`.
///
/// `forward` returns `Ok(None)` where the observable is undefined (no dip).
/// The defined samples must form one contiguous run on which the map is
/// strictly monotone; the bracket is narrowed to that run. Returns the
/// root and the number of bisection steps.
pub fn invert_monotone<F>(forward: F, observed: f64, lo: f64, hi: f64, tol: f64) -> Result<(f64, usize)>
where
    F: Fn(f64) -> Result<Option<f64>> + Sync,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::domain("bounds", format!("need lo < hi, got [{lo}, {hi}]")));
    }
    if !observed.is_finite() {
        return Err(Error::domain("observed", "must be finite"));
    }
    let xs: Vec<f64> = (0..MONOTONE_SAMPLES)
        .map(|i| lo + (hi - lo) * i as f64 / (MONOTONE_SAMPLES - 1) as f64)
        .collect();
    let ys = xs.par_iter().map(|&x| forward(x)).collect::<Result<Vec<_>>>()?;

    let defined: Vec<usize> = (0..xs.len()).filter(|&i| ys[i].is_some()).collect();
    let (first, last) = match (defined.first(), defined.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::NoDip { peak: None }),
    };
    if last - first + 1 != defined.len() {
        return Err(Error::NonMonotone {
            lo,
            hi,
            detail: "the observable is undefined inside the sampled range".into(),
        });
    }
    let run: Vec<(f64, f64)> = (first..=last).map(|i| (xs[i], ys[i].unwrap())).collect();
    if run.len() < 2 {
        return Err(Error::NonMonotone {
            lo,
            hi,
            detail: "fewer than two defined samples".into(),
        });
    }
    let sign = (run[1].1 - run[0].1).signum();
    if let Some(w) = run
        .windows(2)
        .find(|w| (w[1].1 - w[0].1).signum() != sign || w[1].1 == w[0].1)
    {
        return Err(Error::NonMonotone {
            lo,
            hi,
            detail: format!("forward map turns between x = {} and x = {}", w[0].0, w[1].0),
        });
    }
    let (ymin, ymax) = if sign > 0.0 {
        (run[0].1, run[run.len() - 1].1)
    } else {
        (run[run.len() - 1].1, run[0].1)
    };
    if observed < ymin || observed > ymax {
        return Err(Error::OutOfRange {
            observed,
            lo: ymin,
            hi: ymax,
        });
    }

    let k = run
        .windows(2)
        .position(|w| (observed - w[0].1) * (observed - w[1].1) <= 0.0)
        .expect("observation is bracketed by the sampled run");
    for (x, y) in [run[k], run[k + 1]] {
        if y == observed {
            return Ok((x, 0));
        }
    }
    let (mut a, mut fa) = (run[k].0, run[k].1 - observed);
    let mut b = run[k + 1].0;
    let mut steps = 0;
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = match forward(m)? {
            Some(y) => y - observed,
            None => return Err(Error::NoDip { peak: None }),
        };
        steps += 1;
        if fm == 0.0 {
            return Ok((m, steps));
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok((0.5 * (a + b), steps))
}

fn dip_or_none(scenario: &Scenario, h: f64, theta_deg: f64) -> Result<Option<f64>> {
    let geom = scenario.geometry(h, theta_deg.to_radians())?;
    match scenario.dip_at(&geom) {
        Ok(d) => Ok(Some(d.omega_dip)),
        Err(Error::NoDip { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn dip_residual(scenario: &Scenario, h: f64, theta_deg: f64, observed: f64) -> Result<f64> {
    let model = dip_or_none(scenario, h, theta_deg)?.ok_or(Error::NoDip { peak: None })?;
    Ok((model - observed).abs() / observed)
}

/// Gap h (nm) whose scattering dip sits at `omega_dip_obs`, for a known
/// tilt. Bisection to 10⁻⁴ nm.
pub fn invert_height(
    scenario: &Scenario,
    omega_dip_obs: f64,
    theta_known_deg: f64,
    bounds: (f64, f64),
) -> Result<InversionResult> {
    let (h, steps) = invert_monotone(
        |h| dip_or_none(scenario, h, theta_known_deg),
        omega_dip_obs,
        bounds.0,
        bounds.1,
        1e-4,
    )?;
    Ok(InversionResult {
        h_est: h,
        theta_est: theta_known_deg,
        lateral_est: None,
        residual: dip_residual(scenario, h, theta_known_deg, omega_dip_obs)?,
        iterations: steps,
        converged: true,
        warnings: Vec::new(),
    })
}

/// Tilt θ (degrees) whose scattering dip sits at `omega_dip_obs`, for a
/// known gap. Bisection to 0.01°.
pub fn invert_orientation(
    scenario: &Scenario,
    omega_dip_obs: f64,
    h_known: f64,
    bounds_deg: (f64, f64),
) -> Result<InversionResult> {
    if bounds_deg.0 < 0.0 || bounds_deg.1 > 90.0 {
        return Err(Error::domain("theta bounds", "must lie within [0, 90] degrees"));
    }
    let (theta, steps) = invert_monotone(
        |t| dip_or_none(scenario, h_known, t),
        omega_dip_obs,
        bounds_deg.0,
        bounds_deg.1,
        1e-2,
    )?;
    Ok(InversionResult {
        h_est: h_known,
        theta_est: theta,
        lateral_est: None,
        residual: dip_residual(scenario, h_known, theta, omega_dip_obs)?,
        iterations: steps,
        converged: true,
        warnings: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitBounds {
    pub h: (f64, f64),
    pub theta_deg: (f64, f64),
}

impl Default for FitBounds {
    fn default() -> Self {
        FitBounds {
            h: (1.5, 6.0),
            theta_deg: (0.0, 90.0),
        }
    }
}

/// Seeds per axis of the coarse grid in [`fit_spectrum`].
pub const SEEDS_PER_AXIS: usize = 11;

/// Misfit assigned where the forward model fails.
const FAILED_MISFIT: f64 = 1e6;

/// Relative sum of squares Σ(m − o)²/Σo² between max-normalized spectra.
fn misfit(scenario: &Scenario, observed: &Spectrum, h: f64, theta_deg: f64) -> f64 {
    let model = scenario.geometry(h, theta_deg.to_radians()).and_then(|g| {
        let c = scenario.coupling_at(&g)?;
        match observed.kind {
            SpectrumKind::Scattering => scattering_spectrum(&c, &observed.omegas, scenario.options.lamb_shift),
            SpectrumKind::Emission => {
                let c = if scenario.options.lamb_shift {
                    c
                } else {
                    c.without_lamb_shift()
                };
                emission_spectrum(&c, &observed.omegas)
            }
        }
    });
    match model {
        Ok(m) => {
            let num: f64 = m
                .values
                .iter()
                .zip(&observed.values)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let den: f64 = observed.values.iter().map(|b| b * b).sum();
            num / den
        }
        Err(_) => FAILED_MISFIT,
    }
}

/// Least-squares fit of (h, θ) to an observed spectrum of the same kind.
pub fn fit_spectrum(scenario: &Scenario, observed: &Spectrum, bounds: &FitBounds) -> Result<InversionResult> {
    let (hl, hh) = bounds.h;
    let (tl, th) = bounds.theta_deg;
    if !(hl > 0.0 && hl < hh && hh.is_finite()) {
        return Err(Error::domain("bounds.h", format!("need 0 < lo < hi, got [{hl}, {hh}]")));
    }
    if !(0.0 <= tl && tl < th && th <= 90.0) {
        return Err(Error::domain(
            "bounds.theta",
            format!("need 0 <= lo < hi <= 90, got [{tl}, {th}]"),
        ));
    }
    let n = SEEDS_PER_AXIS;
    let at = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    let seeds: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| misfit(scenario, observed, at(hl, hh, k / n), at(tl, th, k % n)))
        .collect();
    let best = (0..seeds.len())
        .min_by(|&a, &b| seeds[a].total_cmp(&seeds[b]).then(a.cmp(&b)))
        .expect("non-empty");
    if seeds[best] >= FAILED_MISFIT {
        return Err(Error::Numerical("forward model failed at every seed".into()));
    }

    let mut warnings = Vec::new();
    let (bi, bj) = (best / n, best % n);
    let rivals = (0..seeds.len())
        .filter(|&k| {
            let (i, j) = (k / n, k % n);
            let far = i.abs_diff(bi) > 1 || j.abs_diff(bj) > 1;
            far && seeds[k] <= seeds[best] * 1.01 + 1e-12
        })
        .count();
    if rivals > 0 {
        warnings.push(format!(
            "misfit is nearly flat: {rivals} distant seed(s) within 1% of the best, multiple minima possible"
        ));
    }

    let opts = NelderMeadOptions {
        initial_step: 1.0 / (n - 1) as f64,
        ..Default::default()
    };
    let m = nelder_mead(
        |x| misfit(scenario, observed, x[0], x[1]),
        &[at(hl, hh, bi), at(tl, th, bj)],
        &[hl, tl],
        &[hh, th],
        &opts,
    );
    if !m.converged {
        warnings.push(format!(
            "simplex stopped after {} iterations without converging",
            m.iterations
        ));
    }
    Ok(InversionResult {
        h_est: m.x[0],
        theta_est: m.x[1],
        lateral_est: None,
        residual: m.f,
        iterations: m.iterations,
        converged: m.converged,
        warnings,
    })
}

/// Multiplies every sample by (1 + amplitude·N(0, 1)), clamps at zero and
/// re-normalizes. Deterministic in `seed`.
pub fn add_multiplicative_noise(spectrum: &Spectrum, amplitude: f64, seed: u64) -> Result<Spectrum> {
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::domain("noise amplitude", "must be >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).map_err(|e| Error::Numerical(e.to_string()))?;
    let values = spectrum
        .values
        .iter()
        .map(|v| (v * (1.0 + amplitude * normal.sample(&mut rng))).max(0.0))
        .collect();
    Spectrum::from_samples(spectrum.kind, spectrum.omegas.clone(), values)
}

/// Fits `trials` noisy copies of `clean` (seeds `seed + i`) in parallel and
/// returns |h_est − h_true| for each, in trial order.
pub fn monte_carlo_height_errors(
    scenario: &Scenario,
    clean: &Spectrum,
    h_true: f64,
    amplitude: f64,
    trials: usize,
    seed: u64,
    bounds: &FitBounds,
) -> Result<Vec<f64>> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let noisy = add_multiplicative_noise(clean, amplitude, seed.wrapping_add(i as u64))?;
            let fit = fit_spectrum(scenario, &noisy, bounds)?;
            Ok((fit.h_est - h_true).abs())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LateralEstimate {
    pub x: f64,
    pub y: f64,
    /// Major-axis direction of the spot, degrees in (−90, 90].
    pub azimuth_deg: f64,
    /// √(λ_major/λ_minor) of the spot's second-moment tensor.
    pub anisotropy: f64,
}

/// Relative height above which a second extremum counts as a rival.
const RIVAL_FRACTION: f64 = 0.95;

/// Emitter position and spot shape from a dip-shift map.
pub fn localize_lateral(map: &ScanMap) -> Result<LateralEstimate> {
    let (nx, ny) = (map.nx(), map.ny());
    let mag = |i: usize, j: usize| map.get(i, j).map(f64::abs);
    let (bi, bj) = map.extremum().ok_or(Error::NoDip { peak: None })?;
    let peak = mag(bi, bj).expect("extremum is defined");
    if peak == 0.0 {
        return Err(Error::Degenerate);
    }

    let mut rivals = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if i.abs_diff(bi) <= 1 && j.abs_diff(bj) <= 1 {
                continue;
            }
            let Some(v) = mag(i, j) else { continue };
            if v < RIVAL_FRACTION * peak {
                continue;
            }
            let is_local_max = (j.saturating_sub(1)..=(j + 1).min(ny - 1))
                .flat_map(|jj| (i.saturating_sub(1)..=(i + 1).min(nx - 1)).map(move |ii| (ii, jj)))
                .all(|(ii, jj)| (ii, jj) == (i, j) || mag(ii, jj).is_none_or(|w| w <= v));
            if is_local_max {
                rivals.push((map.xs[i], map.ys[j]));
            }
        }
    }
    if !rivals.is_empty() {
        rivals.insert(0, (map.xs[bi], map.ys[bj]));
        return Err(Error::Ambiguous { candidates: rivals });
    }

    let (mut x, mut y) = (map.xs[bi], map.ys[bj]);
    if let Some((du, dv)) = quadratic_offset(map, bi, bj) {
        x += du * map.config.grid.step;
        y += dv * map.config.grid.step;
    }

    let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
    let mut cells = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if let Some(v) = mag(i, j) {
                if v >= 0.5 * peak {
                    cells.push((map.xs[i], map.ys[j], v));
                    sw += v;
                    sx += v * map.xs[i];
                    sy += v * map.ys[j];
                }
            }
        }
    }
    let (mx, my) = (sx / sw, sy / sw);
    let (mut cxx, mut cyy, mut cxy) = (0.0, 0.0, 0.0);
    for (cx, cy, w) in &cells {
        cxx += w * (cx - mx) * (cx - mx);
        cyy += w * (cy - my) * (cy - my);
        cxy += w * (cx - mx) * (cy - my);
    }
    let (cxx, cyy, cxy) = (cxx / sw, cyy / sw, cxy / sw);
    let mean = 0.5 * (cxx + cyy);
    let radius = (0.25 * (cxx - cyy).powi(2) + cxy * cxy).sqrt();
    let (l1, l2) = (mean + radius, mean - radius);
    let anisotropy = if l1 <= 0.0 {
        1.0
    } else if l2 <= 0.0 {
        f64::INFINITY
    } else {
        (l1 / l2).sqrt()
    };
    let mut azimuth_deg = 0.5 * (2.0 * cxy).atan2(cxx - cyy).to_degrees();
    if azimuth_deg <= -90.0 {
        azimuth_deg += 180.0;
    }
    Ok(LateralEstimate {
        x,
        y,
        azimuth_deg,
        anisotropy,
    })
}

/// Stationary point of the least-squares quadratic through the 3×3 block
/// around (i, j), in grid steps. `None` at the border, with missing
/// neighbours, or if the stationary point leaves the block.
fn quadratic_offset(map: &ScanMap, i: usize, j: usize) -> Option<(f64, f64)> {
    if i == 0 || j == 0 || i + 1 >= map.nx() || j + 1 >= map.ny() {
        return None;
    }
    let (mut b, mut c, mut d, mut e, mut f) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for dv in -1i32..=1 {
        for du in -1i32..=1 {
            let v = map.get((i as i32 + du) as usize, (j as i32 + dv) as usize)?;
            let (u, w) = (du as f64, dv as f64);
            b += u * v / 6.0;
            c += w * v / 6.0;
            d += (u * u - 2.0 / 3.0) * v / 2.0;
            f += (w * w - 2.0 / 3.0) * v / 2.0;
            e += u * w * v / 4.0;
        }
    }
    // ∇(b u + c v + d u² + e u v + f v²) = 0.
    let det = 4.0 * d * f - e * e;
    if det.abs() < 1e-300 {
        return None;
    }
    let du = (-2.0 * f * b + e * c) / det;
    let dv = (-2.0 * d * c + e * b) / det;
    (du.abs() <= 1.0 && dv.abs() <= 1.0).then_some((du, dv))
}
