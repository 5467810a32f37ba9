//! Box-constrained Nelder–Mead minimizer.
//!
//! The simplex lives in the unit cube; trial points are clamped to it and
//! mapped affinely onto the caller's bounds, so the objective is never
//! evaluated outside them.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Stop when max f − min f over the simplex falls below this.
    pub f_tol: f64,
    /// ... and every vertex is within this distance of the best one, in
    /// unit-cube coordinates.
    pub x_tol: f64,
    /// Initial simplex edge, in unit-cube coordinates.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_iter: 500,
            f_tol: 1e-10,
            x_tol: 1e-7,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct Boxed<'a, F> {
    f: F,
    lower: &'a [f64],
    upper: &'a [f64],
}

impl<F: Fn(&[f64]) -> f64> Boxed<'_, F> {
    fn to_x(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(i, ui)| self.lower[i] + ui.clamp(0.0, 1.0) * (self.upper[i] - self.lower[i]))
            .collect()
    }

    fn eval(&self, u: &mut [f64]) -> f64 {
        for ui in u.iter_mut() {
            *ui = ui.clamp(0.0, 1.0);
        }
        let v = (self.f)(&self.to_x(u));
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

/// Minimizes `f` over the box `[lower, upper]` starting from `x0`.
///
/// After the simplex collapses it is rebuilt around the best point; the run
/// counts as converged once a rebuilt simplex improves f by less than
/// `f_tol`. Clamping can otherwise strand a degenerate simplex on a face.
pub fn nelder_mead<F>(f: F, x0: &[f64], lower: &[f64], upper: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    assert!(n > 0 && lower.len() == n && upper.len() == n, "dimension mismatch");
    let obj = Boxed { f, lower, upper };
    let mut u: Vec<f64> = (0..n)
        .map(|i| {
            let w = upper[i] - lower[i];
            if w > 0.0 {
                (x0[i] - lower[i]) / w
            } else {
                0.0
            }
        })
        .collect();

    let mut iterations = 0;
    let mut best_f = f64::INFINITY;
    let mut converged = false;
    while iterations < opts.max_iter {
        let (next, fnext, used, collapsed) = descend(&obj, &u, opts, opts.max_iter - iterations);
        iterations += used;
        let improvement = best_f - fnext;
        if fnext <= best_f {
            u = next;
            best_f = fnext;
        }
        if !collapsed {
            break;
        }
        if improvement.abs() < opts.f_tol || improvement < 0.0 {
            converged = true;
            break;
        }
    }
    Minimum {
        x: obj.to_x(&u),
        f: best_f,
        iterations,
        converged,
    }
}

/// One Nelder–Mead descent from `u0`. Returns the best vertex, its value,
/// the iterations used and whether the simplex collapsed within `budget`.
fn descend<F: Fn(&[f64]) -> f64>(
    obj: &Boxed<'_, F>,
    u0: &[f64],
    opts: &NelderMeadOptions,
    budget: usize,
) -> (Vec<f64>, f64, usize, bool) {
    let n = u0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut start = u0.to_vec();
    let f0 = obj.eval(&mut start);
    simplex.push((start.clone(), f0));
    for i in 0..n {
        let mut v = start.clone();
        v[i] += if v[i] + opts.initial_step <= 1.0 {
            opts.initial_step
        } else {
            -opts.initial_step
        };
        let fv = obj.eval(&mut v);
        simplex.push((v, fv));
    }

    let mut iterations = 0;
    let mut collapsed = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .map(|(v, _)| {
                v.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.abs() < opts.f_tol && size < opts.x_tol {
            collapsed = true;
            break;
        }
        if iterations >= budget {
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(v, _)| v[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let mut reflected = along(1.0);
        let fr = obj.eval(&mut reflected);
        if fr < simplex[0].1 {
            let mut expanded = along(2.0);
            let fe = obj.eval(&mut expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let mut contracted = along(if fr < simplex[n].1 { 0.5 } else { -0.5 });
        let fc = obj.eval(&mut contracted);
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for (v, fv) in simplex[1..].iter_mut() {
            for (vj, bj) in v.iter_mut().zip(&best) {
                *vj = bj + 0.5 * (*vj - bj);
            }
            *fv = obj.eval(v);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (u, f) = simplex.swap_remove(0);
    (u, f, iterations, collapsed)
}
