//! Parameter sweeps and 2D lateral dip-shift maps.
//!
//! A scan moves the sphere (the probe) over a fixed emitter. Every probe
//! position is reduced to the on-axis model by [`effective_geometry`], and
//! the map value is the scattering-dip shift against a probe parked far
//! away laterally. Grid points are independent and evaluated with rayon;
//! results are gathered in input order.

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{require_positive, Error, Result};
use crate::qed::Geometry;
use crate::scenario::Scenario;
use crate::spectra::{find_dip, find_peak};

/// Reduces a probe position to (distance, cos²θ). `orientation` is the
/// emitter dipole; θ is measured from the emitter → sphere-center axis.
pub fn effective_geometry(
    probe_center: [f64; 3],
    emitter_pos: [f64; 3],
    orientation: [f64; 3],
    radius: f64,
) -> Result<Geometry> {
    require_positive("radius", radius)?;
    let r = [
        probe_center[0] - emitter_pos[0],
        probe_center[1] - emitter_pos[1],
        probe_center[2] - emitter_pos[2],
    ];
    let d = r.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(d > radius) {
        return Err(Error::Geometry { distance: d, radius });
    }
    let norm = orientation.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::domain("orientation", "must be a non-zero vector"));
    }
    let proj = (0..3).map(|i| orientation[i] * r[i]).sum::<f64>() / (norm * d);
    Geometry::new(d, (proj * proj).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Gap h (nm) at fixed tilt.
    Height,
    /// Tilt θ (degrees) at fixed gap.
    Theta,
    /// Probe directly above the emitter at height z (nm) between the
    /// sphere bottom and the emitter; orientation from the emitter.
    ZOffset,
}

/// Parameters held fixed during a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepFixed {
    pub h: f64,
    pub theta_deg: f64,
    /// Gap of the reference spectrum whose dip defines zero shift.
    pub reference_h: f64,
}

impl Default for SweepFixed {
    fn default() -> Self {
        SweepFixed {
            h: 2.0,
            theta_deg: 0.0,
            reference_h: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub param: f64,
    pub delta_hom: Option<f64>,
    pub gamma_hom: Option<f64>,
    pub g_de: Option<f64>,
    pub emission_peak: Option<f64>,
    pub emission_fwhm: Option<f64>,
    /// Number of local maxima in the emission spectrum.
    pub emission_maxima: Option<usize>,
    /// Emission peak minus the reference emission peak (meV).
    pub emission_shift_mev: Option<f64>,
    pub omega_dip: Option<f64>,
    pub dip_shift_mev: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub kind: SweepKind,
    pub fixed: SweepFixed,
    pub reference_omega: f64,
    /// The reference spectrum had no dip; ω_d was used instead.
    pub reference_fallback: bool,
    pub reference_emission: Option<f64>,
    pub points: Vec<SweepPoint>,
}

impl SweepTable {
    /// `(param, shift)` pairs for points where a dip was found.
    pub fn dip_shifts(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|p| p.dip_shift_mev.map(|s| (p.param, s)))
            .collect()
    }
}

fn sweep_geometry(scenario: &Scenario, kind: SweepKind, param: f64, fixed: &SweepFixed) -> Result<Geometry> {
    let r = scenario.sphere.radius;
    match kind {
        SweepKind::Height => scenario.geometry(param, fixed.theta_deg.to_radians()),
        SweepKind::Theta => scenario.geometry(fixed.h, param.to_radians()),
        SweepKind::ZOffset => {
            require_positive("z_offset", param)?;
            effective_geometry([0.0, 0.0, param + r], [0.0; 3], scenario.emitter.orientation, r)
        }
    }
}

/// Evaluates the forward model at each value of the swept parameter.
/// Failing points keep their error message and the sweep continues.
pub fn sweep(scenario: &Scenario, kind: SweepKind, values: &[f64], fixed: &SweepFixed) -> Result<SweepTable> {
    let ref_param = match kind {
        SweepKind::Theta => fixed.theta_deg,
        _ => fixed.reference_h,
    };
    let ref_fixed = SweepFixed {
        h: fixed.reference_h,
        ..*fixed
    };
    let ref_geom = sweep_geometry(scenario, kind, ref_param, &ref_fixed)?;
    let (reference_omega, reference_fallback) = match scenario.dip_at(&ref_geom) {
        Ok(d) => (d.omega_dip, false),
        Err(_) => (scenario.dipole.omega_d, true),
    };
    let reference_emission = scenario
        .emission_at(&ref_geom)
        .and_then(|s| find_peak(&s))
        .ok()
        .map(|p| p.omega_peak);

    let points = values
        .par_iter()
        .map(|&param| {
            let mut point = SweepPoint {
                param,
                delta_hom: None,
                gamma_hom: None,
                g_de: None,
                emission_peak: None,
                emission_fwhm: None,
                emission_maxima: None,
                emission_shift_mev: None,
                omega_dip: None,
                dip_shift_mev: None,
                error: None,
            };
            let result = (|| -> Result<()> {
                let geom = sweep_geometry(scenario, kind, param, fixed)?;
                let c = scenario.coupling_at(&geom)?;
                point.delta_hom = Some(c.delta_hom);
                point.gamma_hom = Some(c.gamma_hom);
                point.g_de = Some(c.g_de);
                let peak = find_peak(&scenario.emission_at(&geom)?)?;
                point.emission_peak = Some(peak.omega_peak);
                point.emission_fwhm = peak.fwhm;
                point.emission_maxima = Some(peak.maxima);
                point.emission_shift_mev = reference_emission.map(|r| 1e3 * (peak.omega_peak - r));
                let dip = find_dip(&scenario.scattering_at(&geom)?)?;
                point.omega_dip = Some(dip.omega_dip);
                point.dip_shift_mev = Some(1e3 * (dip.omega_dip - reference_omega));
                Ok(())
            })();
            if let Err(e) = result {
                point.error = Some(e.to_string());
            }
            point
        })
        .collect();

    Ok(SweepTable {
        kind,
        fixed: *fixed,
        reference_omega,
        reference_fallback,
        reference_emission,
        points,
    })
}

/// Uniform lateral grid (nm): `x_min + i·step` for i = 0..nx, same for y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LateralGrid {
    pub x_min: f64,
    pub y_min: f64,
    pub step: f64,
    pub nx: usize,
    pub ny: usize,
}

impl LateralGrid {
    pub fn new(x_min: f64, y_min: f64, step: f64, nx: usize, ny: usize) -> Result<Self> {
        require_positive("grid.step", step)?;
        if nx == 0 || ny == 0 {
            return Err(Error::domain("grid", "needs at least one point per axis"));
        }
        if !(x_min.is_finite() && y_min.is_finite()) {
            return Err(Error::domain("grid", "origin must be finite"));
        }
        Ok(LateralGrid {
            x_min,
            y_min,
            step,
            nx,
            ny,
        })
    }

    /// Square `n × n` grid centered on `(cx, cy)`.
    pub fn centered(cx: f64, cy: f64, step: f64, n: usize) -> Result<Self> {
        let half = 0.5 * (n.max(1) - 1) as f64 * step;
        Self::new(cx - half, cy - half, step, n, n)
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x_min + i as f64 * self.step).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|i| self.y_min + i as f64 * self.step).collect()
    }

    pub fn extent(&self) -> f64 {
        (self.nx.max(self.ny).max(2) - 1) as f64 * self.step
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanConfig {
    pub grid: LateralGrid,
    /// Gap between the sphere bottom and the emitter plane (nm).
    pub z_offset: f64,
    pub emitter_position: [f64; 3],
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        require_positive("z_offset", self.z_offset)?;
        if self.emitter_position.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("emitter_position", "must be finite"));
        }
        LateralGrid::new(
            self.grid.x_min,
            self.grid.y_min,
            self.grid.step,
            self.grid.nx,
            self.grid.ny,
        )
        .map(|_| ())
    }

    fn probe_center(&self, radius: f64, x: f64, y: f64) -> [f64; 3] {
        [x, y, self.emitter_position[2] + radius + self.z_offset]
    }
}

/// Dip-shift map in meV, row-major with `shifts[iy * nx + ix]`. Points
/// without a resolvable dip are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanMap {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub shifts: Vec<Option<f64>>,
    pub reference_omega: f64,
    pub reference_fallback: bool,
    pub config: ScanConfig,
    /// SHA-256 of the scan configuration and forward-model parameters.
    pub fingerprint: String,
}

impl ScanMap {
    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.ys.len()
    }

    pub fn get(&self, ix: usize, iy: usize) -> Option<f64> {
        self.shifts[iy * self.nx() + ix]
    }

    /// Grid index of the largest |shift|; ties resolve to the first in
    /// row-major order.
    pub fn extremum(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, f64)> = None;
        for (k, v) in self.shifts.iter().enumerate() {
            if let Some(v) = v {
                if best.is_none_or(|(_, b)| v.abs() > b) {
                    best = Some((k, v.abs()));
                }
            }
        }
        best.map(|(k, _)| (k % self.nx(), k / self.nx()))
    }

    /// FWHM of |shift| along x through the extremum, from linearly
    /// interpolated half-maximum crossings.
    pub fn fwhm_x(&self) -> Option<f64> {
        let (ix, iy) = self.extremum()?;
        let line: Vec<Option<f64>> = (0..self.nx()).map(|i| self.get(i, iy)).collect();
        line_fwhm(&self.xs, &line, ix)
    }

    pub fn fwhm_y(&self) -> Option<f64> {
        let (ix, iy) = self.extremum()?;
        let line: Vec<Option<f64>> = (0..self.ny()).map(|j| self.get(ix, j)).collect();
        line_fwhm(&self.ys, &line, iy)
    }
}

fn line_fwhm(coords: &[f64], line: &[Option<f64>], center: usize) -> Option<f64> {
    let peak = line[center]?.abs();
    let half = 0.5 * peak;
    let crossing = |i: usize, j: usize| -> Option<f64> {
        let (a, b) = (line[i]?.abs(), line[j]?.abs());
        Some(coords[i] + (half - a) * (coords[j] - coords[i]) / (b - a))
    };
    let mut left = None;
    for i in (0..center).rev() {
        if line[i]?.abs() < half {
            left = crossing(i, i + 1);
            break;
        }
    }
    let mut right = None;
    for i in center + 1..line.len() {
        if line[i]?.abs() < half {
            right = crossing(i - 1, i);
            break;
        }
    }
    Some(right? - left?)
}

/// Scans the sphere over the lateral grid above a fixed emitter. The
/// emitter parameters, sphere and spectral grid come from `scenario`.
pub fn scan_2d(scenario: &Scenario, config: &ScanConfig) -> Result<ScanMap> {
    config.validate()?;
    let radius = scenario.sphere.radius;
    let orientation = scenario.emitter.orientation;
    let e = config.emitter_position;

    let far = config.probe_center(radius, e[0] + 10.0 * config.grid.extent(), e[1]);
    let ref_geom = effective_geometry(far, e, orientation, radius)?;
    let (reference_omega, reference_fallback) = match scenario.dip_at(&ref_geom) {
        Ok(d) => (d.omega_dip, false),
        Err(_) => (scenario.dipole.omega_d, true),
    };

    let xs = config.grid.xs();
    let ys = config.grid.ys();
    let nx = xs.len();
    let shifts = (0..nx * ys.len())
        .into_par_iter()
        .map(|k| {
            let probe = config.probe_center(radius, xs[k % nx], ys[k / nx]);
            let geom = effective_geometry(probe, e, orientation, radius).ok()?;
            scenario
                .dip_at(&geom)
                .ok()
                .map(|d| 1e3 * (d.omega_dip - reference_omega))
        })
        .collect();

    let mut hasher = Sha256::new();
    hasher.update(format!("{scenario:?}|{config:?}").as_bytes());
    Ok(ScanMap {
        xs,
        ys,
        shifts,
        reference_omega,
        reference_fallback,
        config: *config,
        fingerprint: format!("{:x}", hasher.finalize()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_reduction_basic_cases() {
        let g = effective_geometry([0.0, 0.0, 12.0], [0.0; 3], [0.0, 0.0, 1.0], 10.0).unwrap();
        assert_eq!((g.distance, g.cos2_theta), (12.0, 1.0));
        let g = effective_geometry([0.0, 0.0, 12.0], [0.0; 3], [1.0, 0.0, 0.0], 10.0).unwrap();
        assert_eq!(g.cos2_theta, 0.0);
        let g = effective_geometry([12.0, 0.0, 12.0], [0.0; 3], [1.0, 0.0, 0.0], 10.0).unwrap();
        assert!((g.cos2_theta - 0.5).abs() < 1e-15);
        assert!((g.distance - 12.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(matches!(
            effective_geometry([0.0, 0.0, 9.0], [0.0; 3], [0.0, 0.0, 1.0], 10.0),
            Err(Error::Geometry { .. })
        ));
    }

    #[test]
    fn lateral_grid_layout() {
        let g = LateralGrid::centered(1.0, -0.5, 0.5, 5).unwrap();
        assert_eq!(g.xs(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(g.ys(), vec![-1.5, -1.0, -0.5, 0.0, 0.5]);
        assert_eq!(g.extent(), 2.0);
        assert!(LateralGrid::new(0.0, 0.0, -1.0, 3, 3).is_err());
    }

    #[test]
    fn fwhm_of_a_triangle() {
        let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let line = [Some(0.0), Some(-2.0), Some(-4.0), Some(-2.0), Some(0.0)];
        assert_eq!(line_fwhm(&xs, &line, 2), Some(2.0));
        let holed = [None, Some(-3.0), Some(-4.0), Some(-2.0), Some(0.0)];
        assert_eq!(line_fwhm(&xs, &holed, 2), None);
    }

    #[test]
    fn sweep_records_errors_and_keeps_order() {
        let s = Scenario::standard().unwrap();
        let values = [5.0, -1.0, 3.0];
        let t = sweep(&s, SweepKind::Height, &values, &SweepFixed::default()).unwrap();
        assert_eq!(t.points.iter().map(|p| p.param).collect::<Vec<_>>(), values);
        assert!(t.points[1].error.is_some() && t.points[1].omega_dip.is_none());
        assert!(t.points[0].error.is_none() && t.points[2].error.is_none());
        // At 20 nm the dip is not yet resolved, so ω_d is the reference.
        assert!(t.reference_fallback);
        assert_eq!(t.reference_omega, s.dipole.omega_d);
    }

    fn scan(orientation: [f64; 3], z_offset: f64, step: f64, n: usize, emitter: [f64; 3]) -> ScanMap {
        let mut s = Scenario::standard().unwrap();
        s.emitter = s.emitter.oriented(orientation).unwrap();
        let config = ScanConfig {
            grid: LateralGrid::centered(emitter[0], emitter[1], step, n).unwrap(),
            z_offset,
            emitter_position: emitter,
        };
        scan_2d(&s, &config).unwrap()
    }

    const Z_POL: [f64; 3] = [0.0, 0.0, 1.0];
    const X_POL: [f64; 3] = [1.0, 0.0, 0.0];

    #[test]
    fn tilt_sweep_is_strongest_along_the_axis() {
        let s = Scenario::standard().unwrap();
        let thetas: Vec<f64> = (0..=9).map(|i| 10.0 * i as f64).collect();
        let t = sweep(&s, SweepKind::Theta, &thetas, &SweepFixed::default()).unwrap();
        let shifts = t.dip_shifts();
        let strongest = shifts.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        let weakest = shifts.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        assert_eq!(strongest.0, 0.0);
        // Past the last resolved tilt the dip is gone altogether.
        assert_eq!(weakest.0, shifts.last().unwrap().0);
        assert!(t
            .points
            .iter()
            .filter(|p| p.param > weakest.0)
            .all(|p| p.omega_dip.is_none()));
    }

    #[test]
    fn z_sweep_red_shifts_monotonically() {
        let s = Scenario::standard().unwrap();
        let zs: Vec<f64> = (0..=17).map(|i| 3.0 - 0.1 * i as f64).collect();
        let t = sweep(&s, SweepKind::ZOffset, &zs, &SweepFixed::default()).unwrap();
        let shifts = t.dip_shifts();
        assert_eq!(shifts.len(), zs.len());
        assert!(shifts.windows(2).all(|w| w[1].1 < w[0].1), "{shifts:?}");
        // On axis with a z dipole the z sweep is the height sweep.
        let h = sweep(&s, SweepKind::Height, &zs, &SweepFixed::default()).unwrap();
        for (a, b) in t.points.iter().zip(&h.points) {
            assert!((a.omega_dip.unwrap() - b.omega_dip.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn height_sweep_without_lamb_shift_is_flat() {
        let s = Scenario::standard().unwrap().with_lamb_shift(false);
        let hs: Vec<f64> = (0..=13).map(|i| 8.0 - 0.5 * i as f64).collect();
        let t = sweep(&s, SweepKind::Height, &hs, &SweepFixed::default()).unwrap();
        let shifts = t.dip_shifts();
        assert_eq!(shifts.len(), hs.len());
        assert!(shifts.iter().all(|p| p.1.abs() < 1e-6), "{shifts:?}");
    }

    #[test]
    fn z_polarized_response_is_rotationally_symmetric() {
        let s = Scenario::standard().unwrap();
        let (r, z) = (s.sphere.radius, 2.5);
        for rho in [0.5, 2.0, 4.0] {
            let dips: Vec<f64> = (0..8)
                .map(|k| {
                    let phi = std::f64::consts::FRAC_PI_4 * k as f64;
                    let centre = [rho * phi.cos(), rho * phi.sin(), r + z];
                    let g = effective_geometry(centre, [0.0; 3], Z_POL, r).unwrap();
                    s.dip_at(&g).unwrap().omega_dip
                })
                .collect();
            let spread = dips.iter().copied().fold(f64::MIN, f64::max) - dips.iter().copied().fold(f64::MAX, f64::min);
            assert!(1e3 * spread < 1e-6, "rho = {rho}: {dips:?}");
        }
    }

    #[test]
    fn scan_maps_have_the_expected_symmetry_and_centre() {
        let n = 21;
        let z = scan(Z_POL, 2.5, 0.5, n, [0.0; 3]);
        let x = scan(X_POL, 2.5, 0.5, n, [0.0; 3]);
        let c = n / 2;
        assert_eq!(z.extremum(), Some((c, c)));
        assert_eq!(x.extremum(), Some((c, c)));
        for j in 0..n {
            for i in 0..n {
                assert_eq!(z.get(i, j), z.get(j, i));
                assert_eq!(z.get(i, j), z.get(n - 1 - i, j));
                assert_eq!(x.get(i, j), x.get(n - 1 - i, j));
                assert_eq!(x.get(i, j), x.get(i, n - 1 - j));
                for map in [&z, &x] {
                    if let Some(v) = map.get(i, j) {
                        assert!(v <= 0.0, "({i}, {j}): {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn scan_follows_an_offset_emitter() {
        let map = scan(Z_POL, 2.5, 0.5, 21, [1.0, -0.5, 0.0]);
        let (i, j) = map.extremum().unwrap();
        assert_eq!((map.xs[i], map.ys[j]), (1.0, -0.5));
    }

    #[test]
    fn spot_widens_with_z_offset() {
        let near = scan(Z_POL, 2.5, 0.5, 41, [0.0; 3]);
        let far = scan(Z_POL, 3.5, 0.5, 41, [0.0; 3]);
        assert!(far.fwhm_x().unwrap() > near.fwhm_x().unwrap());
    }

    #[test]
    fn scan_output_is_independent_of_thread_count() {
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| scan(X_POL, 2.5, 0.5, 15, [0.0; 3]))
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn spot_width_converges_under_step_halving() {
        for orientation in [Z_POL, X_POL] {
            let coarse = scan(orientation, 2.5, 0.5, 41, [0.0; 3]);
            let fine = scan(orientation, 2.5, 0.25, 81, [0.0; 3]);
            let (a, b) = (coarse.fwhm_x().unwrap(), fine.fwhm_x().unwrap());
            assert!((a - b).abs() < 0.02 * b, "{orientation:?}: {a} vs {b}");
        }
    }
}
