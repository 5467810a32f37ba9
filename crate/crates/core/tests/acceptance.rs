//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Tolerances and runtime budgets are the
//! constants next to each check.

mod common;

use std::f64::consts::FRAC_PI_2;
use std::time::{Duration, Instant};

use common::*;
use lamb_core::greens::{
    dyadic_component, higher_order_spectral_density, reduced_green_sum, spectral_density, ModeRange, Orientation,
};
use lamb_core::imaging::{scan_2d, sweep, LateralGrid, ScanConfig, ScanMap, SweepFixed, SweepKind};
use lamb_core::inversion::{fit_spectrum, invert_height, invert_orientation, FitBounds};
use lamb_core::material::{dipole_mode_params, DrudeMaterial, HostMedium, PolarizabilityOptions, Sphere};
use lamb_core::qed::{coupling_gde, hom_self_energy, CouplingParams, EmitterParams, Geometry};
use lamb_core::scenario::Scenario;
use lamb_core::spectra::{eigen_decomposition, find_peak, scattering_response};
use lamb_core::units::{debye_to_enm, enm_to_debye};
use lamb_core::{Complex64, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn main() {
    rayon::ThreadPoolBuilder::new().num_threads(4).build_global().ok();
    let criteria = [
        Criterion {
            id: 1,
            title: "quasi-static dipole resonance",
            budget: Duration::from_secs(1),
            check: c1_dipole_resonance,
        },
        Criterion {
            id: 2,
            title: "dark-mode Lamb shift magnitude",
            budget: Duration::from_secs(1),
            check: c2_lamb_shift,
        },
        Criterion {
            id: 3,
            title: "two-channel identity",
            budget: Duration::from_secs(1),
            check: c3_identity,
        },
        Criterion {
            id: 4,
            title: "distance sweep",
            budget: Duration::from_secs(10),
            check: c4_distance_sweep,
        },
        Criterion {
            id: 5,
            title: "polarization sweep",
            budget: Duration::from_secs(10),
            check: c5_polarization_sweep,
        },
        Criterion {
            id: 6,
            title: "unit-reduction oracle",
            budget: Duration::from_secs(5),
            check: c6_unit_oracle,
        },
        Criterion {
            id: 7,
            title: "series convergence",
            budget: Duration::from_secs(1),
            check: c7_series,
        },
        Criterion {
            id: 8,
            title: "spectral-density crossover",
            budget: Duration::from_secs(5),
            check: c8_crossover,
        },
        Criterion {
            id: 9,
            title: "scan-map symmetry and ellipticity",
            budget: Duration::from_secs(60),
            check: c9_scan_maps,
        },
        Criterion {
            id: 10,
            title: "inversion round trips",
            budget: Duration::from_secs(30),
            check: c10_inversion,
        },
        Criterion {
            id: 11,
            title: "emission behaviour",
            budget: Duration::from_secs(10),
            check: c11_emission,
        },
    ];

    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(c.check);
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(_) => (false, "check panicked".to_string()),
        };
        let in_time = elapsed <= c.budget;
        let ok = pass && in_time;
        if !ok {
            failed += 1;
        }
        let timing = format!("{:.2}s of {}s", elapsed.as_secs_f64(), c.budget.as_secs());
        println!(
            "{} {:>2} {}: {} [{}{}]",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            detail,
            timing,
            if in_time { "" } else { ", over budget" }
        );
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn c1_dipole_resonance() -> Outcome {
    const TARGET: f64 = 2.793;
    const TOL: f64 = 0.005;
    let sphere = Sphere::silver(10.0)
        .unwrap()
        .with_options(PolarizabilityOptions::QUASI_STATIC);
    let d = dipole_mode_params(&sphere).unwrap();
    outcome(
        (d.omega_d - TARGET).abs() <= TOL,
        format!("omega_d = {:.4} eV (want {TARGET} ± {TOL})", d.omega_d),
    )
}

fn c2_lamb_shift() -> Outcome {
    const RANGE_MEV: (f64, f64) = (17.0, 68.0);
    const N2_TARGET_MEV: f64 = 4.2;
    const N2_TOL: f64 = 0.10;
    let omega = 2.785;
    let sphere = Sphere::silver(10.0).unwrap();
    let emitter = EmitterParams::with_frequency(omega).unwrap();
    let geom = Geometry::on_axis(10.0, 2.0, 0.0).unwrap();
    let total = hom_self_energy(&sphere, &geom, &emitter, omega, &ModeRange::higher_order()).unwrap();
    let quad = hom_self_energy(&sphere, &geom, &emitter, omega, &ModeRange::single(2)).unwrap();

    // Hand form of the n = 2 radial term: −μ²k_e · 9 Re[2(ε−1)/(2ε+3)] R⁵/d⁸.
    let eps = 6.0 - 7.9f64.powi(2) / Complex64::new(omega * omega, omega * 0.051);
    let a2 = 2.0 * (eps - 1.0) / (2.0 * eps + 3.0);
    let mu = 24.0 * DEBYE_SI;
    let (r, d): (f64, f64) = (10e-9, 12e-9);
    let hand = -mu * mu / (4.0 * std::f64::consts::PI * EPS0) * 9.0 * a2.re * r.powi(5) / d.powi(8) / E;

    let total_mev = 1e3 * total.shift.abs();
    let quad_mev = 1e3 * quad.shift.abs();
    let in_range = (RANGE_MEV.0..=RANGE_MEV.1).contains(&total_mev);
    let matches_hand = rel(quad.shift, hand) < 1e-8;
    let near_target = (quad_mev - N2_TARGET_MEV).abs() <= N2_TOL * N2_TARGET_MEV;
    outcome(
        in_range && matches_hand && near_target,
        format!(
            "|shift| = {total_mev:.2} meV (want {:?}); n=2 term {quad_mev:.3} meV, hand value {:.3} meV (want {N2_TARGET_MEV} ± 10%)",
            RANGE_MEV,
            1e3 * hand.abs()
        ),
    )
}

fn c3_identity() -> Outcome {
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let c = CouplingParams {
            g_de: rng.gen_range(0.0..0.05),
            omega_e_eff: Complex64::new(rng.gen_range(2.6..2.9), -rng.gen_range(1e-4..0.03)),
            omega_d_eff: Complex64::new(rng.gen_range(2.6..2.9), -rng.gen_range(5e-3..0.05)),
            delta_hom: 0.0,
            gamma_hom: 0.0,
        };
        let e = eigen_decomposition(&c).unwrap();
        let g2 = c.g_de * c.g_de;
        for i in 0..1000 {
            let w = 2.5 + 0.5 * i as f64 / 999.0;
            let direct = (w - c.omega_d_eff - g2 / (w - c.omega_e_eff)).inv();
            worst = worst.max(rel_c(e.evaluate(w), direct));
            worst = worst.max(rel(e.scattering_response(w), scattering_response(&c, w)));
        }
    }
    outcome(
        worst < TOL,
        format!("max relative deviation {worst:.2e} (want < {TOL:.0e})"),
    )
}

fn height_values() -> Vec<f64> {
    (0..=37).map(|i| 20.0 - 0.5 * i as f64).collect()
}

fn c4_distance_sweep() -> Outcome {
    const TOTAL_MEV: (f64, f64) = (26.0, 106.0);
    const GRADIENT: (f64, f64) = (25.0, 120.0);
    const LS_OFF_SPREAD_MEV: f64 = 0.1;
    let s = Scenario::standard().unwrap();
    let fixed = SweepFixed::default();
    let on = sweep(&s, SweepKind::Height, &height_values(), &fixed).unwrap();
    let shifts = on.dip_shifts();

    let turns: Vec<f64> = shifts
        .windows(2)
        .filter(|w| !(w[1].1 < w[0].1))
        .map(|w| w[1].0)
        .collect();
    let monotone = turns.is_empty() && shifts.iter().all(|p| p.1 < 0.0);
    let total = shifts.last().map(|p| -p.1).unwrap_or(f64::NAN);

    let near = sweep(&s, SweepKind::Height, &[2.05, 1.95], &fixed).unwrap();
    let gradient = match (near.points[0].omega_dip, near.points[1].omega_dip) {
        (Some(a), Some(b)) => 1e3 * (a - b) / 0.1,
        _ => f64::NAN,
    };

    let off = sweep(&s.with_lamb_shift(false), SweepKind::Height, &height_values(), &fixed).unwrap();
    let off_dips: Vec<f64> = off.points.iter().filter_map(|p| p.omega_dip).collect();
    let spread =
        1e3 * (off_dips.iter().copied().fold(f64::MIN, f64::max) - off_dips.iter().copied().fold(f64::MAX, f64::min));

    let resolved = shifts.first().map(|p| p.0).unwrap_or(f64::NAN);
    let pass = monotone
        && (TOTAL_MEV.0..=TOTAL_MEV.1).contains(&total)
        && (GRADIENT.0..=GRADIENT.1).contains(&gradient)
        && !off_dips.is_empty()
        && spread < LS_OFF_SPREAD_MEV;
    outcome(
        pass,
        format!(
            "dips resolved for h <= {resolved} nm; monotone red: {monotone}{}; total {total:.1} meV (want {TOTAL_MEV:?}); gradient at 2 nm {gradient:.1} meV/nm (want {GRADIENT:?}); without Lamb shift spread {spread:.2e} meV (want < {LS_OFF_SPREAD_MEV})",
            if turns.is_empty() {
                String::new()
            } else {
                format!(" (reverses at h = {turns:?} nm)")
            }
        ),
    )
}

fn c5_polarization_sweep() -> Outcome {
    const GRADIENT: (f64, f64) = (0.08, 0.34);
    let s = Scenario::standard().unwrap();
    let thetas: Vec<f64> = (0..=90).map(|i| i as f64).collect();
    let t = sweep(&s, SweepKind::Theta, &thetas, &SweepFixed::default()).unwrap();
    let shifts = t.dip_shifts();
    let contiguous = shifts.iter().enumerate().all(|(i, p)| p.0 == i as f64);
    let turns: Vec<f64> = shifts
        .windows(2)
        .filter(|w| !(w[1].1 > w[0].1))
        .map(|w| w[1].0)
        .collect();
    let monotone = turns.is_empty();
    let (first, last) = (shifts[0], shifts[shifts.len() - 1]);
    let mean = (last.1 - first.1) / (last.0 - first.0);
    outcome(
        contiguous && monotone && (GRADIENT.0..=GRADIENT.1).contains(&mean),
        format!(
            "dips resolved for theta in [0, {}] deg; monotone: {monotone}{}; mean gradient {mean:.3} meV/deg over that span (want {GRADIENT:?})",
            last.0,
            if monotone {
                String::new()
            } else {
                format!(" (reverses at theta = {turns:?} deg)")
            }
        ),
    )
}

fn c6_unit_oracle() -> Outcome {
    const TOL: f64 = 1e-8;
    const MU_D_DEBYE: (f64, f64) = (916.0, 1.5);
    const G_MEV: (f64, f64) = (15.9, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut worst_what = "";
    let mut track = |what: &'static str, e: f64| {
        if e > worst {
            worst = e;
            worst_what = what;
        }
    };
    let mut accepted = 0;
    let mut redrawn = 0;
    while accepted < 25 {
        let radius = rng.gen_range(5.0..30.0);
        let h = radius * rng.gen_range(0.1..1.0);
        let theta = rng.gen_range(0.0..FRAC_PI_2);
        let omega = rng.gen_range(2.2..3.4);
        let eps_b = rng.gen_range(1.0..2.5);
        let mu_debye = rng.gen_range(5.0..40.0);
        let options = PolarizabilityOptions {
            radiative_correction: rng.gen_bool(0.5),
            finite_size: rng.gen_bool(0.3),
        };
        let sphere = Sphere::new(DrudeMaterial::SILVER, HostMedium::new(eps_b).unwrap(), radius, options).unwrap();
        // Large spheres in dense hosts push the resonance below the search
        // window; those draws are replaced.
        let dipole = match dipole_mode_params(&sphere) {
            Ok(d) => d,
            Err(Error::NoResonance { .. }) => {
                redrawn += 1;
                continue;
            }
            Err(e) => panic!("{e}"),
        };
        accepted += 1;
        let si = SiSphere {
            eps_inf: 6.0,
            omega_p: ev_to_rad(7.9),
            gamma_p: ev_to_rad(0.051),
            eps_b,
            radius: radius * 1e-9,
            radiative: options.radiative_correction,
            finite_size: options.finite_size,
        };
        let d = radius + h;
        let w = ev_to_rad(omega);
        let geom = Geometry::on_axis(radius, h, theta).unwrap();
        let emitter = EmitterParams::with_frequency(omega)
            .unwrap()
            .oriented([theta.sin(), 0.0, theta.cos()])
            .unwrap();
        let emitter = EmitterParams {
            mu_e: debye_to_enm(mu_debye),
            ..emitter
        };

        let adaptive = reduced_green_sum(&sphere, d, omega, &ModeRange::higher_order()).unwrap();
        let n_hi = adaptive.n_used;

        let all = reduced_green_sum(&sphere, d, omega, &ModeRange::fixed(1, n_hi)).unwrap();
        let (rr, tt) = si.field_sums(d * 1e-9, w, 1, n_hi);
        track(
            "radial dyadic",
            rel_c(dyadic_component(all.radial, omega, eps_b), si.dyadic_nm(rr, w)),
        );
        track(
            "tangential dyadic",
            rel_c(dyadic_component(all.tangential, omega, eps_b), si.dyadic_nm(tt, w)),
        );

        for orientation in [Orientation::Radial, Orientation::Tangential] {
            let (rr1, tt1) = si.field_sums(d * 1e-9, w, 1, 1);
            let k1 = if orientation == Orientation::Radial { rr1 } else { tt1 };
            let j1 = spectral_density(&sphere, d, omega, 1, orientation).unwrap();
            track("J_1", rel(j1, si.spectral_density(k1, w)));
            let (rrh, tth) = si.field_sums(d * 1e-9, w, 2, n_hi);
            let kh = if orientation == Orientation::Radial { rrh } else { tth };
            let jh = higher_order_spectral_density(&sphere, d, omega, orientation, &ModeRange::fixed(2, n_hi)).unwrap();
            track("J_hom", rel(jh, si.spectral_density(kh, w)));
        }

        let hom = hom_self_energy(&sphere, &geom, &emitter, omega, &ModeRange::fixed(2, n_hi)).unwrap();
        let (rrh, tth) = si.field_sums(d * 1e-9, w, 2, n_hi);
        let c2 = geom.cos2_theta;
        let (shift, decay) = si.shift_and_decay(c2 * rrh + (1.0 - c2) * tth, mu_debye * DEBYE_SI);
        track("shift", rel(hom.shift, shift));
        track("decay", rel(hom.decay, decay));

        let mu_d_si = si.mu_d(dipole.eta1);
        track("mu_d", rel(dipole.mu_d * E * 1e-9, mu_d_si));
        let g = coupling_gde(&sphere, &geom, &emitter, &dipole).unwrap();
        track(
            "g",
            rel(g, coupling_ev(mu_d_si, mu_debye * DEBYE_SI, d * 1e-9, c2, eps_b)),
        );
    }

    let sphere = Sphere::silver(10.0).unwrap();
    let dipole = dipole_mode_params(&sphere).unwrap();
    let emitter = EmitterParams::with_frequency(2.785).unwrap();
    let g = coupling_gde(&sphere, &Geometry::on_axis(10.0, 2.0, 0.0).unwrap(), &emitter, &dipole).unwrap();
    let mu_d_debye = enm_to_debye(dipole.mu_d);
    let reference_ok = (mu_d_debye - MU_D_DEBYE.0).abs() <= MU_D_DEBYE.1 && (1e3 * g - G_MEV.0).abs() <= G_MEV.1;
    outcome(
        worst < TOL && reference_ok,
        format!(
            "worst relative deviation {worst:.2e} ({worst_what}) over 25 configurations, {redrawn} redrawn (want < {TOL:.0e}); mu_d = {mu_d_debye:.1} D, g = {:.2} meV at the reference point",
            1e3 * g
        ),
    )
}

fn c7_series() -> Outcome {
    const TOL: f64 = 1e-6;
    let sphere = Sphere::silver(10.0).unwrap();
    let emitter = EmitterParams::with_frequency(2.785).unwrap();
    let geom = Geometry::on_axis(10.0, 1.5, 0.0).unwrap();
    let adaptive = hom_self_energy(&sphere, &geom, &emitter, 2.785, &ModeRange::higher_order()).unwrap();
    let doubled = hom_self_energy(
        &sphere,
        &geom,
        &emitter,
        2.785,
        &ModeRange::fixed(2, 2 * adaptive.n_used),
    )
    .unwrap();
    let change = rel(adaptive.shift, doubled.shift);
    outcome(
        change < TOL,
        format!(
            "adaptive stop at n = {}, doubling changes the shift by {change:.2e} (want < {TOL:.0e})",
            adaptive.n_used
        ),
    )
}

fn c8_crossover() -> Outcome {
    let sphere = Sphere::silver(10.0).unwrap();
    let band: Vec<f64> = (0..=2000).map(|i| 2.0 + i as f64 * 1e-3).collect();
    let peaks = |h: f64| {
        let d = 10.0 + h;
        let j1 = band
            .iter()
            .map(|&w| spectral_density(&sphere, d, w, 1, Orientation::Radial).unwrap())
            .fold(0.0, f64::max);
        let jh = band
            .iter()
            .map(|&w| {
                higher_order_spectral_density(&sphere, d, w, Orientation::Radial, &ModeRange::higher_order()).unwrap()
            })
            .fold(0.0, f64::max);
        (j1, jh)
    };
    let (far1, farh) = peaks(10.0);
    let (near1, nearh) = peaks(2.0);
    outcome(
        far1 > farh && nearh > near1,
        format!(
            "h=10: max J1 {far1:.3e} vs max J(n>=2) {farh:.3e}; h=2: max J1 {near1:.3e} vs max J(n>=2) {nearh:.3e}"
        ),
    )
}

fn scan(orientation: [f64; 3], z_offset: f64) -> ScanMap {
    let mut s = Scenario::standard().unwrap();
    s.emitter = s.emitter.oriented(orientation).unwrap();
    let cfg = ScanConfig {
        grid: LateralGrid::centered(0.0, 0.0, 0.5, 41).unwrap(),
        z_offset,
        emitter_position: [0.0; 3],
    };
    scan_2d(&s, &cfg).unwrap()
}

fn c9_scan_maps() -> Outcome {
    const RADIAL_SPREAD_MEV: f64 = 1e-6;
    const MIRROR_MEV: f64 = 1e-9;
    const ELLIPTICITY: f64 = 1.1;
    let z = scan([0.0, 0.0, 1.0], 2.5);
    let x = scan([1.0, 0.0, 0.0], 2.5);
    let z_far = scan([0.0, 0.0, 1.0], 3.5);
    let x_far = scan([1.0, 0.0, 0.0], 3.5);
    let n = z.nx();
    let c = n / 2;

    // Cells at equal lateral radius: the 8 images of (i, j) under the
    // square's symmetry group.
    let mut spread: f64 = 0.0;
    for j in 0..=c {
        for i in j..=c {
            let offsets = [(i, j), (j, i)];
            let mut vals = Vec::new();
            for (a, b) in offsets {
                for (sa, sb) in [(1i64, 1i64), (-1, 1), (1, -1), (-1, -1)] {
                    let ix = (c as i64 + sa * a as i64) as usize;
                    let iy = (c as i64 + sb * b as i64) as usize;
                    vals.push(z.get(ix, iy));
                }
            }
            if vals.iter().all(Option::is_some) {
                let v: Vec<f64> = vals.into_iter().flatten().collect();
                spread =
                    spread.max(v.iter().copied().fold(f64::MIN, f64::max) - v.iter().copied().fold(f64::MAX, f64::min));
            } else if vals.iter().any(Option::is_some) {
                spread = f64::INFINITY;
            }
        }
    }
    // (3, 4, 5) triangles: distinct grid cells at the same radius.
    for k in 1..=4 {
        let (a, b, r) = (3 * k, 4 * k, 5 * k);
        if r <= c {
            let vals = [z.get(c + a, c + b), z.get(c + r, c), z.get(c, c + r)];
            if let [Some(p), Some(q), Some(s)] = vals {
                spread = spread.max(p.max(q).max(s) - p.min(q).min(s));
            }
        }
    }

    let mut mirror: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            for (p, q) in [(x.get(i, j), x.get(n - 1 - i, j)), (x.get(i, j), x.get(i, n - 1 - j))] {
                match (p, q) {
                    (Some(p), Some(q)) => mirror = mirror.max((p - q).abs()),
                    (None, None) => {}
                    _ => mirror = f64::INFINITY,
                }
            }
        }
    }

    let ratio = x.fwhm_x().zip(x.fwhm_y()).map(|(a, b)| a / b).unwrap_or(f64::NAN);
    let grows_z = matches!((z.fwhm_x(), z_far.fwhm_x()), (Some(a), Some(b)) if b > a);
    let grows_x = matches!((x.fwhm_x(), x_far.fwhm_x()), (Some(a), Some(b)) if b > a);
    let centered = z.extremum() == Some((c, c)) && x.extremum() == Some((c, c));

    let pass =
        spread < RADIAL_SPREAD_MEV && mirror < MIRROR_MEV && ratio > ELLIPTICITY && grows_z && grows_x && centered;
    outcome(
        pass,
        format!(
            "z-pol azimuthal spread {spread:.1e} meV (want < {RADIAL_SPREAD_MEV:.0e}); x-pol mirror error {mirror:.1e} meV (want < {MIRROR_MEV:.0e}); x-pol FWHM_x/FWHM_y = {ratio:.3} (want > {ELLIPTICITY}); FWHM grows with z_offset: z-pol {grows_z}, x-pol {grows_x}; extremum above emitter: {centered}"
        ),
    )
}

fn c10_inversion() -> Outcome {
    const H_TOL: f64 = 1e-3;
    const THETA_TOL: f64 = 0.1;
    const FIT_H_TOL: f64 = 5e-3;
    const FIT_THETA_TOL: f64 = 0.5;
    let s = Scenario::standard().unwrap();
    let dip = |h: f64, theta_deg: f64| {
        s.dip_at(&s.geometry(h, theta_deg.to_radians()).unwrap())
            .unwrap()
            .omega_dip
    };

    let mut h_err: f64 = 0.0;
    for h in [2.0, 5.0] {
        let r = invert_height(&s, dip(h, 0.0), 0.0, (1.5, 8.0)).unwrap();
        h_err = h_err.max((r.h_est - h).abs());
    }
    let r = invert_orientation(&s, dip(2.0, 30.0), 2.0, (0.0, 90.0)).unwrap();
    let theta_err = (r.theta_est - 30.0).abs();

    let truth = s.scattering_at(&s.geometry(2.0, 20f64.to_radians()).unwrap()).unwrap();
    let fit = fit_spectrum(&s, &truth, &FitBounds::default()).unwrap();
    let again = fit_spectrum(&s, &truth, &FitBounds::default()).unwrap();
    let (fh, ft) = ((fit.h_est - 2.0).abs(), (fit.theta_est - 20.0).abs());
    let deterministic = fit == again;

    let pass = h_err < H_TOL && theta_err < THETA_TOL && fh < FIT_H_TOL && ft < FIT_THETA_TOL && deterministic;
    outcome(
        pass,
        format!(
            "height error {h_err:.1e} nm (want < {H_TOL}); tilt error {theta_err:.3} deg (want < {THETA_TOL}); fit errors {fh:.1e} nm, {ft:.3} deg (want < {FIT_H_TOL}, {FIT_THETA_TOL}); repeat fit identical: {deterministic}"
        ),
    )
}

fn c11_emission() -> Outcome {
    let s = Scenario::standard().unwrap();
    let hs: Vec<f64> = (0..=37).map(|i| 20.0 - 0.5 * i as f64).collect();
    let mut peaks = Vec::new();
    let mut widths = Vec::new();
    let mut split = Vec::new();
    for &h in &hs {
        let p = find_peak(&s.emission_at(&s.geometry(h, 0.0).unwrap()).unwrap()).unwrap();
        peaks.push(p.omega_peak);
        widths.push(p.fwhm.unwrap_or(f64::NAN));
        if p.maxima != 1 {
            split.push(h);
        }
    }
    let red = peaks.windows(2).all(|w| w[1] < w[0]);
    let narrowing: Vec<f64> = (1..hs.len())
        .filter(|&i| !(widths[i] > widths[i - 1]))
        .map(|i| hs[i])
        .collect();
    let broad = narrowing.is_empty();
    outcome(
        red && broad && split.is_empty(),
        format!(
            "peak red-shifts monotonically: {red}; FWHM grows monotonically: {broad}{}; FWHM {:.1} -> {:.1} meV; split spectra at h = {split:?}",
            if broad {
                String::new()
            } else {
                format!(" (narrows at h = {narrowing:?} nm)")
            },
            1e3 * widths[0],
            1e3 * widths[widths.len() - 1]
        ),
    )
}
