//! Tuning of the two boundary coupling pairs for end-to-end transfer.
//!
//! The objective is the first maximum of `|p_{N;1}(t)|`: the first local
//! maximum of the scanned amplitude that exceeds [`ARRIVAL_FLOOR`], refined
//! by golden-section search.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::SpectralData;
use crate::error::{Error, Result};
use crate::hamiltonian::ChainSpec;
use crate::optim::{nelder_mead, NelderMeadOptions};

/// Local maxima at or below this value are treated as ripples.
pub const ARRIVAL_FLOOR: f64 = 0.2;
pub const DEFAULT_DT: f64 = 0.05;
const REFINE_TOL: f64 = 1e-7;

/// Default scan horizon, `3N`.
pub fn default_t_max(n_nodes: usize) -> f64 {
    3.0 * n_nodes as f64
}

/// `|<N| exp(-iHt) |1>|` from the one-excitation spectrum.
#[derive(Debug, Clone)]
pub struct EndToEnd {
    energies: Vec<f64>,
    weights: Vec<f64>,
}

impl EndToEnd {
    pub fn from_spectral(s: &SpectralData) -> Self {
        let n = s.n_nodes();
        Self {
            energies: s.e1.iter().copied().collect(),
            weights: (0..n).map(|k| s.v1[(0, k)] * s.v1[(n - 1, k)]).collect(),
        }
    }

    /// Diagonalizes only the one-excitation block of `spec`.
    pub fn from_chain(spec: &ChainSpec) -> Result<Self> {
        let bonds = spec.bonds();
        let n = spec.n_nodes;
        let mut h1 = DMatrix::<f64>::zeros(n, n);
        for (i, &j) in bonds.iter().enumerate() {
            h1[(i, i + 1)] = 0.5 * j;
            h1[(i + 1, i)] = 0.5 * j;
        }
        let eig = SymmetricEigen::try_new(h1, f64::EPSILON, 100 * n)
            .ok_or_else(|| Error::Eigensolver("h1 did not converge".into()))?;
        Ok(Self {
            weights: (0..n)
                .map(|k| eig.eigenvectors[(0, k)] * eig.eigenvectors[(n - 1, k)])
                .collect(),
            energies: eig.eigenvalues.iter().copied().collect(),
        })
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        self.energies
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| w * Complex64::from_polar(1.0, -e * t))
            .sum::<Complex64>()
            .norm()
    }

    /// First maximum of the amplitude on `[0, t_max]`, see the module docs.
    pub fn first_maximum(&self, t_max: f64, dt: f64) -> Result<(f64, f64)> {
        if dt.is_nan() || dt <= 0.0 || t_max.is_nan() || t_max <= dt {
            return Err(Error::InvalidArgument(format!(
                "need 0 < dt < t_max, got dt={dt}, t_max={t_max}"
            )));
        }
        // Phasors advanced by a fixed rotation per grid step.
        let step: Vec<Complex64> = self
            .energies
            .iter()
            .map(|e| Complex64::from_polar(1.0, -e * dt))
            .collect();
        let mut z: Vec<Complex64> = self
            .weights
            .iter()
            .map(|&w| Complex64::new(w, 0.0))
            .collect();
        let value = |z: &[Complex64]| z.iter().sum::<Complex64>().norm();

        let n_steps = (t_max / dt).floor() as usize;
        let mut prev = value(&z);
        let mut cur = {
            z.iter_mut().zip(&step).for_each(|(a, r)| *a *= r);
            value(&z)
        };
        for j in 1..n_steps {
            z.iter_mut().zip(&step).for_each(|(a, r)| *a *= r);
            let next = value(&z);
            if cur > prev && cur >= next && cur > ARRIVAL_FLOOR {
                let t = j as f64 * dt;
                return Ok(self.golden_max(t - dt, t + dt));
            }
            prev = cur;
            cur = next;
        }
        Err(Error::NoArrival {
            floor: ARRIVAL_FLOOR,
            t_max,
        })
    }

    fn golden_max(&self, mut a: f64, mut b: f64) -> (f64, f64) {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (self.amplitude(c), self.amplitude(d));
        while b - a > REFINE_TOL {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = self.amplitude(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = self.amplitude(d);
            }
        }
        let t = 0.5 * (a + b);
        (t, self.amplitude(t))
    }
}

/// First maximum of `|p_{N;1}(t)|` for a diagonalized chain.
pub fn first_maximum(spectral: &SpectralData, t_max: f64, dt: f64) -> Result<(f64, f64)> {
    EndToEnd::from_spectral(spectral).first_maximum(t_max, dt)
}

/// Tuned couplings and the resulting registration time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryOptimum {
    pub delta1: f64,
    pub delta2: f64,
    pub t0: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySearch {
    pub delta1_range: (f64, f64),
    pub delta2_range: (f64, f64),
    pub grid_step: f64,
    pub t_max: f64,
    pub dt: f64,
    /// Simplex convergence tolerance on the couplings.
    pub coupling_tol: f64,
}

impl BoundarySearch {
    pub fn new(n_nodes: usize) -> Self {
        Self {
            delta1_range: (0.01, 1.5),
            delta2_range: (0.01, 1.5),
            grid_step: 0.01,
            t_max: default_t_max(n_nodes),
            dt: DEFAULT_DT,
            coupling_tol: 1e-4,
        }
    }

    fn validate(&self) -> Result<()> {
        for (lo, hi) in [self.delta1_range, self.delta2_range] {
            if !(lo > 0.0 && lo <= hi && hi <= 1.5) {
                return Err(Error::InvalidArgument(format!(
                    "coupling range ({lo}, {hi}) must lie in (0, 1.5]"
                )));
            }
        }
        if self.grid_step.is_nan() || self.grid_step <= 0.0 {
            return Err(Error::InvalidArgument("grid step must be positive".into()));
        }
        Ok(())
    }
}

fn axis((lo, hi): (f64, f64), step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

/// First-maximum amplitude, or 0 when nothing arrives.
fn objective(n_nodes: usize, d1: f64, d2: f64, t_max: f64, dt: f64) -> (f64, f64) {
    ChainSpec::tuned(n_nodes, d1, d2)
        .and_then(|spec| EndToEnd::from_chain(&spec))
        .and_then(|e| e.first_maximum(t_max, dt))
        .map(|(t, a)| (a, t))
        .unwrap_or((0.0, f64::NAN))
}

/// Coarse grid over `(delta1, delta2)` followed by simplex refinement of
/// the best grid point.
pub fn optimize_boundary(n_nodes: usize, search: &BoundarySearch) -> Result<BoundaryOptimum> {
    search.validate()?;
    ChainSpec::tuned(n_nodes, 1.0, 1.0)?;

    let xs = axis(search.delta1_range, search.grid_step);
    let ys = axis(search.delta2_range, search.grid_step);
    let points: Vec<(f64, f64)> = xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
        .collect();
    let values: Vec<(f64, f64)> = points
        .par_iter()
        .map(|&(x, y)| objective(n_nodes, x, y, search.t_max, search.dt))
        .collect();

    // Highest amplitude wins; ties go to the lexicographically first point,
    // which is the earliest in `points`.
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if v.0 > values[best].0 {
            best = i;
        }
    }
    let (gx, gy) = points[best];
    let (ga, gt) = values[best];
    if ga <= 0.0 {
        return Err(Error::NoArrival {
            floor: ARRIVAL_FLOOR,
            t_max: search.t_max,
        });
    }

    let f = |p: &[f64]| -objective(n_nodes, p[0], p[1], search.t_max, search.dt).0;
    let rep = nelder_mead(
        f,
        &[gx, gy],
        &[search.grid_step, search.grid_step],
        &[search.delta1_range.0, search.delta2_range.0],
        &[search.delta1_range.1, search.delta2_range.1],
        &NelderMeadOptions {
            x_tol: search.coupling_tol,
            ..Default::default()
        },
    );
    let (ra, rt) = objective(n_nodes, rep.x[0], rep.x[1], search.t_max, search.dt);
    Ok(if ra >= ga {
        BoundaryOptimum {
            delta1: rep.x[0],
            delta2: rep.x[1],
            t0: rt,
            amplitude: ra,
        }
    } else {
        BoundaryOptimum {
            delta1: gx,
            delta2: gy,
            t0: gt,
            amplitude: ga,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::ExcitationBasis;
    use crate::dynamics::diagonalize;
    use crate::hamiltonian::HamiltonianBlocks;

    #[test]
    fn tuned_twenty_node_first_maximum() {
        let spec = ChainSpec::tuned(20, 0.550, 0.817).unwrap();
        let (t0, amp) = EndToEnd::from_chain(&spec)
            .unwrap()
            .first_maximum(60.0, DEFAULT_DT)
            .unwrap();
        assert!((t0 - 26.441).abs() < 0.01, "t0 = {t0}");
        assert!((amp - 0.99606).abs() < 5e-4, "amp = {amp}");
    }

    #[test]
    fn spectral_and_light_paths_agree() {
        let spec = ChainSpec::tuned(11, 0.6, 0.8).unwrap();
        let basis = ExcitationBasis::new(11).unwrap();
        let s = diagonalize(&HamiltonianBlocks::build(&spec, &basis).unwrap()).unwrap();
        let a = first_maximum(&s, 33.0, DEFAULT_DT).unwrap();
        let b = EndToEnd::from_chain(&spec)
            .unwrap()
            .first_maximum(33.0, DEFAULT_DT)
            .unwrap();
        assert!((a.0 - b.0).abs() < 1e-6 && (a.1 - b.1).abs() < 1e-10);
        let amps = s.propagators(a.0);
        assert!((amps.single(11, 1).norm() - amps.single(1, 11).norm()).abs() < 1e-12);
    }

    #[test]
    fn uniform_chain_is_worse() {
        let tuned = EndToEnd::from_chain(&ChainSpec::tuned(20, 0.550, 0.817).unwrap())
            .unwrap()
            .first_maximum(60.0, DEFAULT_DT)
            .unwrap();
        let uniform = EndToEnd::from_chain(&ChainSpec::uniform(20).unwrap())
            .unwrap()
            .first_maximum(60.0, DEFAULT_DT)
            .unwrap();
        assert!(uniform.1 < tuned.1);
    }

    #[test]
    fn no_arrival() {
        let e = EndToEnd::from_chain(&ChainSpec::uniform(20).unwrap()).unwrap();
        assert!(matches!(
            e.first_maximum(5.0, DEFAULT_DT),
            Err(Error::NoArrival { .. })
        ));
        assert!(e.first_maximum(5.0, 0.0).is_err());
    }

    #[test]
    fn seven_node_optimum_beats_uniform() {
        let search = BoundarySearch {
            grid_step: 0.05,
            ..BoundarySearch::new(7)
        };
        let opt = optimize_boundary(7, &search).unwrap();
        let uniform = EndToEnd::from_chain(&ChainSpec::uniform(7).unwrap())
            .unwrap()
            .first_maximum(21.0, DEFAULT_DT)
            .unwrap();
        assert!(opt.amplitude > uniform.1);
        assert!(opt.amplitude <= 1.0 + 1e-12 && opt.t0 > 0.0);
    }

    #[test]
    fn rejects_box_outside_domain() {
        let search = BoundarySearch {
            delta1_range: (0.0, 1.0),
            ..BoundarySearch::new(20)
        };
        assert!(optimize_boundary(20, &search).is_err());
    }
}
