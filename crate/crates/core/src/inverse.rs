//! Inverse problem: sender amplitudes that create a prescribed receiver
//! state.
//!
//! Every real observable of the receiver (four populations, six complex
//! coherences) is a real quadratic form in the 21 real sender coordinates
//! of [`SenderState::to_real_vec`]. The forms are built once per parameter
//! table and drive a multi-start Levenberg-Marquardt search.

use nalgebra::{DMatrix, DVector, Matrix4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{n_pairs, pair_list, SenderState};
use crate::error::{Error, Result};
use crate::optim::{levenberg_marquardt, LmOptions};
use crate::receiver::{assemble_rho, frobenius, LineParams, ParamKey, ReceiverState};

/// Residual below which a Werner solve counts as exact.
pub const EXACT_TOL: f64 = 1e-10;
/// Residual below which a Werner parameter counts as creatable.
pub const FEASIBLE_TOL: f64 = 1e-8;

/// `|rho - A|_F / |A|_F`.
pub fn discrepancy(rho: &Matrix4<Complex64>, target: &Matrix4<Complex64>) -> Result<f64> {
    let norm = frobenius(target);
    if norm == 0.0 {
        return Err(Error::ZeroNormTarget);
    }
    Ok(frobenius(&(rho - target)) / norm)
}

/// Two-qubit Werner state in the receiver basis.
pub fn werner(p: f64) -> Matrix4<Complex64> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let (lo, hi, off) = ((1.0 - p) / 4.0, (1.0 + p) / 4.0, -p / 2.0);
    let z = c(0.0);
    #[rustfmt::skip]
    let m = Matrix4::new(
        c(lo), z,       z,       z,
        z,     c(hi),   c(off),  z,
        z,     c(off),  c(hi),   z,
        z,     z,       z,       c(lo),
    );
    m
}

/// Desired receiver density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetState {
    pub matrix: Matrix4<Complex64>,
}

impl TargetState {
    /// Requires a Hermitian, unit-trace, positive semidefinite matrix.
    pub fn new(matrix: Matrix4<Complex64>) -> Result<Self> {
        let r = ReceiverState { rho: matrix };
        if r.hermitian_defect() > 1e-10 {
            return Err(Error::InvalidTarget("not Hermitian".into()));
        }
        if (r.trace() - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::InvalidTarget(format!("trace {}", r.trace())));
        }
        let e = r.eigenvalues()[0];
        if e < -1e-9 {
            return Err(Error::InvalidTarget(format!("negative eigenvalue {e:e}")));
        }
        Ok(Self { matrix })
    }

    /// Skips physical validation; for diagnostics with non-physical targets.
    pub fn unchecked(matrix: Matrix4<Complex64>) -> Self {
        Self { matrix }
    }

    pub fn werner(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "Werner parameter {p} outside [0, 1]"
            )));
        }
        Ok(Self { matrix: werner(p) })
    }

    pub fn discrepancy(&self, rho: &ReceiverState) -> Result<f64> {
        discrepancy(&rho.rho, &self.matrix)
    }
}

/// Order of the 16 real observables.
const OBS_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Observable `j` of a Hermitian matrix: populations first, then
/// `Re, Im` of each upper coherence.
fn observables(m: &Matrix4<Complex64>) -> [f64; 16] {
    let mut out = [0.0; 16];
    for a in 0..4 {
        out[a] = m[(a, a)].re;
    }
    for (j, &(a, b)) in OBS_PAIRS.iter().enumerate() {
        out[4 + 2 * j] = m[(a, b)].re;
        out[5 + 2 * j] = m[(a, b)].im;
    }
    out
}

/// Weights making the residual norm equal the Frobenius distance.
fn observable_weights() -> [f64; 16] {
    let mut w = [std::f64::consts::SQRT_2; 16];
    w[..4].fill(1.0);
    w
}

/// Receiver observables as real quadratic forms `x^T S_j x`.
#[derive(Debug, Clone)]
pub struct ReceiverForms {
    n_sender: usize,
    forms: Vec<DMatrix<f64>>,
}

impl ReceiverForms {
    pub fn new(params: &LineParams) -> Self {
        let ns = params.n_sender();
        let pairs = pair_list(ns);
        let nc = 1 + ns + pairs.len();
        let dim = 1 + 2 * (nc - 1);
        let p = |k: ParamKey| params.get(&k).expect("complete parameter table");
        let z = Complex64::new(0.0, 0.0);

        // rho_ab = sum_uv K[u][v] c_u conj(c_v) over the complex amplitudes
        // c = (a0, a_1..a_NS, a_pairs).
        let pair = |j: usize| 1 + ns + j;
        let mut k_mats = vec![DMatrix::<Complex64>::zeros(nc, nc); 10];
        let slot = |a: usize, b: usize| -> usize {
            // 0..4 diagonal, 4.. upper pairs in OBS_PAIRS order
            if a == b {
                a
            } else {
                4 + OBS_PAIRS.iter().position(|&q| q == (a, b)).unwrap()
            }
        };
        for k in 1..=ns {
            k_mats[slot(0, 1)][(0, k)] += p(ParamKey::SingleNm1(k)).conj();
            k_mats[slot(0, 2)][(0, k)] += p(ParamKey::SingleN(k)).conj();
            for (j, &q) in pairs.iter().enumerate() {
                k_mats[slot(0, 1)][(k, pair(j))] += p(ParamKey::CrossNm1(k, q));
                k_mats[slot(0, 2)][(k, pair(j))] += p(ParamKey::CrossN(k, q));
                k_mats[slot(1, 3)][(k, pair(j))] +=
                    p(ParamKey::SingleNm1(k)) * p(ParamKey::Pair(q)).conj();
                k_mats[slot(2, 3)][(k, pair(j))] +=
                    p(ParamKey::SingleN(k)) * p(ParamKey::Pair(q)).conj();
            }
            for m in 1..=ns {
                let (am, an) = (p(ParamKey::SingleNm1(k)), p(ParamKey::SingleNm1(m)));
                let (bm, bn) = (p(ParamKey::SingleN(k)), p(ParamKey::SingleN(m)));
                k_mats[slot(1, 1)][(k, m)] += am * an.conj();
                k_mats[slot(1, 2)][(k, m)] += am * bn.conj();
                k_mats[slot(2, 2)][(k, m)] += bm * bn.conj();
            }
        }
        for (j, &q) in pairs.iter().enumerate() {
            k_mats[slot(0, 3)][(0, pair(j))] += p(ParamKey::Pair(q)).conj();
            for (l, &r) in pairs.iter().enumerate() {
                k_mats[slot(1, 1)][(pair(j), pair(l))] += p(ParamKey::Mm(q, r));
                k_mats[slot(1, 2)][(pair(j), pair(l))] += p(ParamKey::MN(q, r));
                k_mats[slot(2, 2)][(pair(j), pair(l))] += p(ParamKey::NN(q, r));
                k_mats[slot(3, 3)][(pair(j), pair(l))] +=
                    p(ParamKey::Pair(q)) * p(ParamKey::Pair(r)).conj();
            }
        }
        // Vacuum population is the norm minus the other populations.
        let mut k00 = DMatrix::<Complex64>::identity(nc, nc);
        for a in 1..4 {
            k00 -= &k_mats[slot(a, a)];
        }
        k_mats[0] = k00;

        // Real coordinates of c_u.
        let re = |u: usize| if u == 0 { 0 } else { 2 * u - 1 };
        let im = |u: usize| if u == 0 { None } else { Some(2 * u) };

        let mut forms = vec![DMatrix::<f64>::zeros(dim, dim); 16];
        for (s, km) in k_mats.iter().enumerate() {
            let (target_re, target_im) = if s < 4 {
                (s, None)
            } else {
                (4 + 2 * (s - 4), Some(5 + 2 * (s - 4)))
            };
            for u in 0..nc {
                for v in 0..nc {
                    let kv = km[(u, v)];
                    if kv == z {
                        continue;
                    }
                    // c_u conj(c_v) = A + iB with
                    // A = xr_u xr_v + xi_u xi_v, B = xi_u xr_v - xr_u xi_v.
                    let mut terms: Vec<(usize, usize, f64, f64)> = vec![(re(u), re(v), 1.0, 0.0)];
                    if let (Some(iu), Some(iv)) = (im(u), im(v)) {
                        terms.push((iu, iv, 1.0, 0.0));
                    }
                    if let Some(iu) = im(u) {
                        terms.push((iu, re(v), 0.0, 1.0));
                    }
                    if let Some(iv) = im(v) {
                        terms.push((re(u), iv, 0.0, -1.0));
                    }
                    for (i, j, ca, cb) in terms {
                        // K (A + iB): real part Kr A - Ki B, imaginary Ki A + Kr B.
                        let real = kv.re * ca - kv.im * cb;
                        let imag = kv.im * ca + kv.re * cb;
                        forms[target_re][(i, j)] += real;
                        if let Some(ti) = target_im {
                            forms[ti][(i, j)] += imag;
                        }
                    }
                }
            }
        }
        for f in forms.iter_mut() {
            *f = 0.5 * (&*f + f.transpose());
        }
        Self {
            n_sender: ns,
            forms,
        }
    }

    pub fn dim(&self) -> usize {
        self.forms[0].nrows()
    }

    /// Receiver matrix for real coordinates `x`, normalized by `|x|^2`.
    pub fn rho(&self, x: &DVector<f64>) -> Matrix4<Complex64> {
        let n2 = x.norm_squared();
        let v: Vec<f64> = self.forms.iter().map(|s| x.dot(&(s * x)) / n2).collect();
        let mut m = Matrix4::<Complex64>::zeros();
        for a in 0..4 {
            m[(a, a)] = Complex64::new(v[a], 0.0);
        }
        for (j, &(a, b)) in OBS_PAIRS.iter().enumerate() {
            let z = Complex64::new(v[4 + 2 * j], v[5 + 2 * j]);
            m[(a, b)] = z;
            m[(b, a)] = z.conj();
        }
        m
    }

    /// Coordinates of the pair amplitudes' real parts within `x`.
    fn real_pair_coords(&self) -> Vec<usize> {
        let ns = self.n_sender;
        (0..n_pairs(ns)).map(|j| 2 * (1 + ns + j) - 1).collect()
    }

    fn restricted(&self, obs: usize, coords: &[usize]) -> DMatrix<f64> {
        let s = &self.forms[obs];
        DMatrix::from_fn(coords.len(), coords.len(), |i, j| s[(coords[i], coords[j])])
    }
}

/// Multi-start settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Replaces the first random start; real pair amplitudes for the
    /// Werner solver, the full real coordinate vector otherwise.
    #[serde(default)]
    pub initial: Option<Vec<f64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            starts: 32,
            seed: 0,
            max_iter: 500,
            initial: None,
        }
    }
}

/// Sender amplitudes with their honest residual and discrepancy.
#[derive(Debug, Clone, Serialize)]
pub struct InverseSolution {
    pub a: SenderState,
    /// Largest violation of the solved equations.
    pub residual: f64,
    /// Discrepancy of the created state against the exact target.
    pub discrepancy: f64,
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> DVector<f64> {
    let v = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let n = v.norm();
    v / n
}

/// Start `i`: the supplied initial point for `i = 0`, random otherwise.
fn start_point(opts: &SolveOptions, i: usize, dim: usize) -> DVector<f64> {
    match (&opts.initial, i) {
        (Some(x), 0) if x.len() == dim && x.iter().any(|v| *v != 0.0) => {
            DVector::from_column_slice(x).normalize()
        }
        _ => random_unit(&mut start_rng(opts.seed, i), dim),
    }
}

fn start_rng(seed: u64, start: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(start as u64);
    rng
}

/// First start (by index) whose residual meets `exact`, otherwise the
/// lowest residual. Exact solutions differ only by rounding noise, so
/// ranking them would make the choice fragile.
fn pick_best(results: Vec<(DVector<f64>, f64)>, exact: f64) -> (DVector<f64>, f64) {
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.1 < exact {
            best = i;
            break;
        }
        if r.1 < results[best].1 {
            best = i;
        }
    }
    results.into_iter().nth(best).expect("at least one start")
}

/// Werner equations restricted to real pair amplitudes.
struct WernerSystem {
    pop_m: DMatrix<f64>,
    pop_n: DMatrix<f64>,
    pop_mn: DMatrix<f64>,
    coh_re: DMatrix<f64>,
    coh_im: DMatrix<f64>,
    p: f64,
}

impl WernerSystem {
    fn new(forms: &ReceiverForms, p: f64) -> Self {
        let c = forms.real_pair_coords();
        Self {
            pop_m: forms.restricted(1, &c),
            pop_n: forms.restricted(2, &c),
            pop_mn: forms.restricted(3, &c),
            coh_re: forms.restricted(4 + 2 * 3, &c),
            coh_im: forms.restricted(5 + 2 * 3, &c),
            p,
        }
    }

    fn eval(&self, y: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let p = self.p;
        let forms = [
            &self.pop_mn,
            &self.pop_m,
            &self.pop_n,
            &self.coh_re,
            &self.coh_im,
        ];
        let targets = [
            (1.0 - p) / 4.0,
            (1.0 + p) / 4.0,
            (1.0 + p) / 4.0,
            -p / 2.0,
            0.0,
        ];
        let n = y.len();
        let mut r = DVector::zeros(6);
        let mut jac = DMatrix::zeros(6, n);
        for (i, (s, t)) in forms.iter().zip(targets).enumerate() {
            let sy = *s * y;
            r[i] = y.dot(&sy) - t;
            jac.row_mut(i).copy_from(&(2.0 * sy).transpose());
        }
        r[5] = y.norm_squared() - 1.0;
        jac.row_mut(5).copy_from(&(2.0 * y).transpose());
        (r, jac)
    }
}

/// Best real pair amplitudes for the Werner equations and their residual.
fn werner_search(forms: &ReceiverForms, p: f64, opts: &SolveOptions) -> (DVector<f64>, f64) {
    let system = WernerSystem::new(forms, p);
    let dim = forms.real_pair_coords().len();
    // Default first start: equal weight on every pair state.
    let mut opts = opts.clone();
    opts.initial.get_or_insert_with(|| vec![1.0; dim]);
    let opts = &opts;
    let lm = LmOptions {
        max_iter: opts.max_iter,
        residual_tol: 1e-15,
        ..Default::default()
    };
    let results: Vec<(DVector<f64>, f64)> = (0..opts.starts)
        .into_par_iter()
        .map(|i| {
            let y0 = start_point(opts, i, dim);
            let rep = levenberg_marquardt(|y| system.eval(y), |_| {}, y0, &lm);
            let y = rep.x.normalize();
            let res = system.eval(&y).0.amax();
            (y, if res.is_finite() { res } else { f64::INFINITY })
        })
        .collect();
    pick_best(results, EXACT_TOL)
}

/// Werner state from a pure two-excitation sender with real amplitudes:
/// `a0 = a_i = 0`, six real `a_nm`, six real equations.
///
/// Unless `opts.initial` says otherwise, the first start is the equal
/// superposition of the pair states and the first start (by index) that
/// solves the system exactly is returned. When the system is
/// underdetermined (as with a truncated parameter table) this picks the
/// solution branch reached from that start.
///
/// `Ok` when the residual is below [`EXACT_TOL`]. Residuals in
/// `[EXACT_TOL, FEASIBLE_TOL)` are reported as non-convergence, anything
/// larger as infeasible; both errors carry the best residual found.
pub fn solve_werner(params: &LineParams, p: f64, opts: &SolveOptions) -> Result<InverseSolution> {
    let target = TargetState::werner(p)?;
    let forms = ReceiverForms::new(params);
    let (y, residual) = werner_search(&forms, p, opts);
    if residual >= FEASIBLE_TOL {
        return Err(Error::Infeasible { p, residual });
    }
    if residual >= EXACT_TOL {
        return Err(Error::NotConverged { residual });
    }
    let a = SenderState::from_real_pairs(params.n_sender(), y.as_slice())?;
    let discrepancy = target.discrepancy(&assemble_rho(params, &a)?)?;
    Ok(InverseSolution {
        a,
        residual,
        discrepancy,
    })
}

/// Least-squares fit of all sender amplitudes to an arbitrary target,
/// `min |rho(a) - A|_F` over the unit sphere. Always returns the best point
/// found; `residual` is the Frobenius distance of the fit.
pub fn solve_general(
    params: &LineParams,
    target: &TargetState,
    opts: &SolveOptions,
) -> Result<InverseSolution> {
    let forms = ReceiverForms::new(params);
    let dim = forms.dim();
    let goal = observables(&target.matrix);
    let w = observable_weights();

    let eval = |x: &DVector<f64>| {
        let n2 = x.norm_squared();
        let mut r = DVector::zeros(16);
        let mut jac = DMatrix::zeros(16, dim);
        for j in 0..16 {
            let sx = &forms.forms[j] * x;
            let q = x.dot(&sx) / n2;
            r[j] = w[j] * (q - goal[j]);
            let g = (2.0 / n2) * (sx - q * x);
            jac.row_mut(j).copy_from(&(w[j] * g).transpose());
        }
        (r, jac)
    };
    let lm = LmOptions {
        max_iter: opts.max_iter,
        residual_tol: 1e-15,
        ..Default::default()
    };
    let results: Vec<(DVector<f64>, f64)> = (0..opts.starts)
        .into_par_iter()
        .map(|i| {
            let x0 = start_point(opts, i, dim);
            let rep = levenberg_marquardt(
                eval,
                |x| {
                    x.normalize_mut();
                },
                x0,
                &lm,
            );
            let cost = eval(&rep.x).0.norm();
            (
                rep.x,
                if cost.is_finite() {
                    cost
                } else {
                    f64::INFINITY
                },
            )
        })
        .collect();
    let (x, _) = pick_best(results, EXACT_TOL);
    let mut a = SenderState::from_real_vec(params.n_sender(), x.as_slice())?.normalized();
    if a.a0.re < 0.0 {
        // Global sign is free; keep a0 >= 0.
        let flipped: Vec<f64> = a.to_real_vec().iter().map(|v| -v).collect();
        a = SenderState::from_real_vec(params.n_sender(), &flipped)?;
    }
    let rho = assemble_rho(params, &a)?;
    let residual = frobenius(&(rho.rho - target.matrix));
    let discrepancy = target.discrepancy(&rho)?;
    Ok(InverseSolution {
        a,
        residual,
        discrepancy,
    })
}

/// Largest creatable Werner parameter found by bisection.
#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityBoundary {
    /// `(p, creatable)` for every grid point.
    pub grid: Vec<(f64, bool)>,
    /// Largest parameter shown creatable.
    pub lower: f64,
    /// Smallest parameter above `lower` shown not creatable, if any.
    pub upper: Option<f64>,
}

impl FeasibilityBoundary {
    pub fn estimate(&self) -> f64 {
        self.upper.map_or(self.lower, |u| 0.5 * (self.lower + u))
    }

    pub fn uncertainty(&self) -> f64 {
        self.upper.map_or(0.0, |u| 0.5 * (u - self.lower))
    }
}

/// Whether the Werner state with parameter `p` can be created exactly.
pub fn werner_feasible(params: &LineParams, p: f64, opts: &SolveOptions) -> bool {
    let forms = ReceiverForms::new(params);
    werner_search(&forms, p, opts).1 < FEASIBLE_TOL
}

/// Scans `p_grid` and bisects between the last creatable and the next
/// non-creatable grid point until the bracket is narrower than
/// `resolution`.
pub fn feasibility_scan(
    params: &LineParams,
    p_grid: &[f64],
    resolution: f64,
    opts: &SolveOptions,
) -> Result<FeasibilityBoundary> {
    if p_grid.is_empty() || p_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "p grid must be nonempty and increasing".into(),
        ));
    }
    let forms = ReceiverForms::new(params);
    let feasible = |p: f64| werner_search(&forms, p, opts).1 < FEASIBLE_TOL;
    let grid: Vec<(f64, bool)> = p_grid.iter().map(|&p| (p, feasible(p))).collect();

    let Some(first_bad) = grid.iter().position(|g| !g.1) else {
        return Ok(FeasibilityBoundary {
            lower: *p_grid.last().unwrap(),
            upper: None,
            grid,
        });
    };
    if first_bad == 0 {
        return Err(Error::Infeasible {
            p: p_grid[0],
            residual: werner_search(&forms, p_grid[0], opts).1,
        });
    }
    let (mut lo, mut hi) = (grid[first_bad - 1].0, grid[first_bad].0);
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(FeasibilityBoundary {
        grid,
        lower: lo,
        upper: Some(hi),
    })
}
