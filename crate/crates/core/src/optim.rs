//! Small dense optimizers: Levenberg-Marquardt for nonlinear least squares
//! and a bounded Nelder-Mead simplex.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Stop once `max |r_i|` drops below this.
    pub residual_tol: f64,
    /// Stop once the step is below `step_tol * (|x| + step_tol)`.
    pub step_tol: f64,
    /// Stop once `max |J^T r|` drops below this.
    pub gradient_tol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            residual_tol: 1e-14,
            step_tol: 1e-15,
            gradient_tol: 1e-16,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmReport {
    pub x: DVector<f64>,
    pub residual: DVector<f64>,
    pub max_residual: f64,
    pub iterations: usize,
}

/// Minimizes `|r(x)|^2 / 2`. `eval` returns the residual and its Jacobian;
/// `project` is applied to every accepted iterate.
pub fn levenberg_marquardt<F, P>(
    eval: F,
    project: P,
    x0: DVector<f64>,
    opts: &LmOptions,
) -> LmReport
where
    F: Fn(&DVector<f64>) -> (DVector<f64>, DMatrix<f64>),
    P: Fn(&mut DVector<f64>),
{
    let mut x = x0;
    project(&mut x);
    let (mut r, mut jac) = eval(&x);
    let mut cost = 0.5 * r.norm_squared();
    let n = x.len();

    let mut jtj = jac.tr_mul(&jac);
    let mut mu = 1e-3 * jtj.diagonal().max().max(1e-12);
    let mut nu = 2.0;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if r.amax() < opts.residual_tol {
            break;
        }
        let g = jac.tr_mul(&r);
        if g.amax() < opts.gradient_tol {
            break;
        }
        iterations += 1;

        let mut a = jtj.clone();
        for i in 0..n {
            a[(i, i)] += mu;
        }
        let Some(chol) = a.cholesky() else {
            mu *= nu;
            nu *= 2.0;
            continue;
        };
        let h = chol.solve(&(-&g));
        if h.norm() < opts.step_tol * (x.norm() + opts.step_tol) {
            break;
        }

        let mut x_new = &x + &h;
        project(&mut x_new);
        let (r_new, jac_new) = eval(&x_new);
        let cost_new = 0.5 * r_new.norm_squared();
        let predicted = 0.5 * h.dot(&(mu * &h - &g));
        let gain = if predicted > 0.0 {
            (cost - cost_new) / predicted
        } else {
            -1.0
        };

        if gain > 0.0 {
            x = x_new;
            r = r_new;
            jac = jac_new;
            cost = cost_new;
            jtj = jac.tr_mul(&jac);
            mu *= (1.0f64 / 3.0).max(1.0 - (2.0 * gain - 1.0).powi(3));
            nu = 2.0;
        } else {
            mu *= nu;
            nu *= 2.0;
            if !mu.is_finite() || mu > 1e30 {
                break;
            }
        }
    }

    let max_residual = r.amax();
    LmReport {
        x,
        residual: r,
        max_residual,
        iterations,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Converged when every vertex lies within this distance of the best
    /// one (max-norm).
    pub x_tol: f64,
    pub f_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            x_tol: 1e-4,
            f_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadReport {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` inside the box `[lo, hi]` starting from a simplex built on
/// `x0` with per-axis offsets `step`. Points are clamped into the box.
pub fn nelder_mead<F>(
    f: F,
    x0: &[f64],
    step: &[f64],
    lo: &[f64],
    hi: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadReport
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let clamp = |mut p: Vec<f64>| {
        for i in 0..n {
            p[i] = p[i].clamp(lo[i], hi[i]);
        }
        p
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let start = clamp(x0.to_vec());
    simplex.push((start.clone(), f(&start)));
    for i in 0..n {
        let mut p = start.clone();
        p[i] += step[i];
        if p[i] > hi[i] {
            p[i] = start[i] - step[i];
        }
        let p = clamp(p);
        let v = f(&p);
        simplex.push((p, v));
    }

    let centroid = |s: &[(Vec<f64>, f64)]| -> Vec<f64> {
        let mut c = vec![0.0; n];
        for (p, _) in &s[..n] {
            for i in 0..n {
                c[i] += p[i] / n as f64;
            }
        }
        c
    };
    let along = |c: &[f64], p: &[f64], t: f64| -> Vec<f64> {
        clamp((0..n).map(|i| c[i] + t * (p[i] - c[i])).collect())
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].clone();
        let spread = simplex
            .iter()
            .flat_map(|(p, _)| p.iter().zip(&best.0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let f_spread = simplex[n].1 - simplex[0].1;
        if spread < opts.x_tol && f_spread.abs() < opts.f_tol.max(f64::EPSILON * best.1.abs()) {
            converged = true;
            break;
        }
        if spread < 0.1 * opts.x_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let c = centroid(&simplex);
        let worst = simplex[n].clone();
        let xr = along(&c, &worst.0, -1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(&c, &worst.0, -2.0);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = along(&c, &worst.0, -0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(&c, &worst.0, 0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let b = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let p = clamp((0..n).map(|i| b[i] + 0.5 * (v.0[i] - b[i])).collect());
                    let fv = f(&p);
                    *v = (p, fv);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex.swap_remove(0);
    NelderMeadReport {
        x,
        f,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lm_solves_rosenbrock_system() {
        // r = (10 (y - x^2), 1 - x) has its root at (1, 1).
        let eval = |v: &DVector<f64>| {
            let (x, y) = (v[0], v[1]);
            let r = DVector::from_vec(vec![10.0 * (y - x * x), 1.0 - x]);
            let j = DMatrix::from_row_slice(2, 2, &[-20.0 * x, 10.0, -1.0, 0.0]);
            (r, j)
        };
        let rep = levenberg_marquardt(
            eval,
            |_| {},
            DVector::from_vec(vec![-1.2, 1.0]),
            &LmOptions::default(),
        );
        assert!(rep.max_residual < 1e-12, "{rep:?}");
        assert!((rep.x[0] - 1.0).abs() < 1e-10 && (rep.x[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lm_projection_keeps_unit_norm() {
        // Find a unit vector with x0 = 0.6.
        let eval = |v: &DVector<f64>| {
            let r = DVector::from_vec(vec![v[0] - 0.6]);
            let j = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
            (r, j)
        };
        let rep = levenberg_marquardt(
            eval,
            |v| {
                let n = v.norm();
                *v /= n;
            },
            DVector::from_vec(vec![0.1, 0.9]),
            &LmOptions::default(),
        );
        assert!((rep.x.norm() - 1.0).abs() < 1e-14);
        assert!((rep.x[0] - 0.6).abs() < 1e-10);
    }

    #[test]
    fn nelder_mead_finds_box_interior_minimum() {
        let f = |p: &[f64]| (p[0] - 0.3).powi(2) + 4.0 * (p[1] - 0.7).powi(2);
        let rep = nelder_mead(
            f,
            &[1.0, 1.0],
            &[0.1, 0.1],
            &[0.0, 0.0],
            &[1.5, 1.5],
            &NelderMeadOptions::default(),
        );
        assert!(rep.converged);
        assert!(
            (rep.x[0] - 0.3).abs() < 2e-4 && (rep.x[1] - 0.7).abs() < 2e-4,
            "{rep:?}"
        );
    }

    #[test]
    fn nelder_mead_respects_bounds() {
        let f = |p: &[f64]| p[0] + p[1];
        let rep = nelder_mead(
            f,
            &[1.0, 1.0],
            &[0.2, 0.2],
            &[0.5, 0.25],
            &[1.5, 1.5],
            &NelderMeadOptions::default(),
        );
        assert!(
            (rep.x[0] - 0.5).abs() < 1e-4 && (rep.x[1] - 0.25).abs() < 1e-4,
            "{rep:?}"
        );
    }
}
