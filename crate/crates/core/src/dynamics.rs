//! Spectral time evolution in the one- and two-excitation sectors.
//!
//! Each block is diagonalized once; propagator entries at any time are then
//! `V exp(-i L t) V^T`.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::basis::{n_pairs, pair_list, SenderState};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianBlocks;

const EIG_TOL: f64 = 1e-10;

/// Eigenpairs of both Hamiltonian blocks.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub e1: DVector<f64>,
    pub v1: DMatrix<f64>,
    pub e2: DVector<f64>,
    pub v2: DMatrix<f64>,
}

fn eigh(m: &DMatrix<f64>, label: &str) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 100 * n.max(10))
        .ok_or_else(|| Error::Eigensolver(format!("{label}: QR iteration did not converge")))?;
    Ok((eig.eigenvalues, eig.eigenvectors))
}

/// Diagonalizes both blocks and checks `max |H V - V L| < 1e-10`.
pub fn diagonalize(blocks: &HamiltonianBlocks) -> Result<SpectralData> {
    let (e1, v1) = eigh(&blocks.h1, "h1")?;
    let (e2, v2) = eigh(&blocks.h2, "h2")?;

    let r1 = (&blocks.h1 * &v1 - &v1 * DMatrix::from_diagonal(&e1)).amax();
    if r1 > EIG_TOL {
        return Err(Error::Eigensolver(format!("h1 residual {r1:e}")));
    }
    // h2 has at most four nonzeros per row, so the residual is cheap even
    // when the dense product would not be.
    let mut hv = DMatrix::<f64>::zeros(v2.nrows(), v2.ncols());
    for &(i, j, h) in blocks.h2_upper_nonzeros() {
        for k in 0..v2.ncols() {
            hv[(i, k)] += h * v2[(j, k)];
            hv[(j, k)] += h * v2[(i, k)];
        }
    }
    let mut r2 = 0.0f64;
    for k in 0..v2.ncols() {
        for i in 0..v2.nrows() {
            r2 = r2.max((hv[(i, k)] - e2[k] * v2[(i, k)]).abs());
        }
    }
    if r2 > EIG_TOL {
        return Err(Error::Eigensolver(format!("h2 residual {r2:e}")));
    }
    Ok(SpectralData { e1, v1, e2, v2 })
}

impl SpectralData {
    pub fn n_nodes(&self) -> usize {
        self.v1.nrows()
    }

    /// `<i| exp(-iHt) |k>` in the one-excitation sector (1-based nodes).
    pub fn single_amplitude(&self, i: usize, k: usize, t: f64) -> Complex64 {
        let (ri, rk) = (self.v1.row(i - 1), self.v1.row(k - 1));
        ri.iter()
            .zip(rk.iter())
            .zip(self.e1.iter())
            .map(|((a, b), e)| a * b * Complex64::from_polar(1.0, -e * t))
            .sum()
    }

    /// Full propagators at time `t`.
    pub fn propagators(&self, t: f64) -> TransferAmplitudes {
        self.propagators_from(t, self.n_nodes())
    }

    /// Propagators whose two-excitation columns cover only pairs inside the
    /// first `source_nodes` nodes. For long chains this avoids the dense
    /// `C(N,2)^3` product when only sender columns are needed.
    pub fn propagators_from(&self, t: f64, source_nodes: usize) -> TransferAmplitudes {
        let n = self.n_nodes();
        let source_nodes = source_nodes.clamp(2, n);
        let p1 = evolve_columns(&self.e1, &self.v1, &(0..n).collect::<Vec<_>>(), t);

        let sources = pair_list(source_nodes);
        let cols: Vec<usize> = sources
            .iter()
            .map(|&(a, b)| crate::basis::pair_index(n, a, b))
            .collect();
        let p2 = evolve_columns(&self.e2, &self.v2, &cols, t);
        TransferAmplitudes {
            t,
            n_nodes: n,
            source_nodes,
            p1,
            p2,
        }
    }
}

/// Columns `cols` of `V exp(-i L t) V^T`.
fn evolve_columns(
    e: &DVector<f64>,
    v: &DMatrix<f64>,
    cols: &[usize],
    t: f64,
) -> DMatrix<Complex64> {
    let d = v.nrows();
    let m = cols.len();
    // Real and imaginary parts of exp(-i L t) V^T[:, cols], side by side.
    let mut w = DMatrix::<f64>::zeros(d, 2 * m);
    for (j, &c) in cols.iter().enumerate() {
        for k in 0..d {
            let (s, co) = (-e[k] * t).sin_cos();
            let x = v[(c, k)];
            w[(k, j)] = co * x;
            w[(k, m + j)] = s * x;
        }
    }
    let prod = v * w;
    DMatrix::from_fn(d, m, |i, j| Complex64::new(prod[(i, j)], prod[(i, m + j)]))
}

/// Transition amplitudes `p_{i;k}(t)` and `p_{ij;nm}(t)`.
#[derive(Debug, Clone)]
pub struct TransferAmplitudes {
    pub t: f64,
    n_nodes: usize,
    source_nodes: usize,
    /// `p1[(i-1, k-1)] = <i|exp(-iHt)|k>`.
    pub p1: DMatrix<Complex64>,
    /// Rows over all pairs of the chain, columns over pairs of the first
    /// `source_nodes` nodes, both lexicographic.
    pub p2: DMatrix<Complex64>,
}

impl TransferAmplitudes {
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Nodes whose pair columns are available in `p2`.
    pub fn source_nodes(&self) -> usize {
        self.source_nodes
    }

    /// `p_{i;k}`, 1-based.
    pub fn single(&self, i: usize, k: usize) -> Complex64 {
        self.p1[(i - 1, k - 1)]
    }

    /// `p_{ij;nm}`, 1-based, `i < j`, `n < m <= source_nodes`.
    pub fn pair(&self, i: usize, j: usize, n: usize, m: usize) -> Complex64 {
        let row = crate::basis::pair_index(self.n_nodes, i, j);
        let col = crate::basis::pair_index(self.source_nodes, n, m);
        self.p2[(row, col)]
    }

    /// Evolves a sender state. The sender must fit into the source columns.
    pub fn evolve(&self, s: &SenderState) -> Result<EvolvedState> {
        let ns = s.n_sender();
        if ns > self.source_nodes || s.double.len() != n_pairs(ns) {
            return Err(Error::SizeMismatch(format!(
                "sender of {ns} nodes, propagator columns for {} nodes",
                self.source_nodes
            )));
        }
        let single = DVector::from_fn(self.n_nodes, |i, _| {
            (0..ns).map(|k| self.p1[(i, k)] * s.single[k]).sum()
        });
        let sender_pairs = pair_list(ns);
        let cols: Vec<usize> = sender_pairs
            .iter()
            .map(|&(a, b)| crate::basis::pair_index(self.source_nodes, a, b))
            .collect();
        let double = DVector::from_fn(self.p2.nrows(), |r, _| {
            cols.iter()
                .zip(&s.double)
                .map(|(&c, a)| self.p2[(r, c)] * a)
                .sum()
        });
        Ok(EvolvedState {
            f0: s.a0.re,
            single,
            double,
        })
    }

    /// CSV dump with columns `row_label,col_label,re,im`. One-excitation rows
    /// are labelled `i`, two-excitation rows `(n,m)`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row_label", "col_label", "re", "im"])?;
        for i in 0..self.n_nodes {
            for k in 0..self.n_nodes {
                let v = self.p1[(i, k)];
                w.write_record([
                    (i + 1).to_string(),
                    (k + 1).to_string(),
                    format!("{:.17e}", v.re),
                    format!("{:.17e}", v.im),
                ])?;
            }
        }
        let rows = pair_list(self.n_nodes);
        let cols = pair_list(self.source_nodes);
        for (r, (i, j)) in rows.iter().enumerate() {
            for (c, (n, m)) in cols.iter().enumerate() {
                let v = self.p2[(r, c)];
                w.write_record([
                    format!("({i},{j})"),
                    format!("({n},{m})"),
                    format!("{:.17e}", v.re),
                    format!("{:.17e}", v.im),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Amplitudes `f_0`, `f_i(t)`, `f_ij(t)` of the evolved chain state.
#[derive(Debug, Clone)]
pub struct EvolvedState {
    pub f0: f64,
    pub single: DVector<Complex64>,
    /// Lexicographic over all pairs of the chain.
    pub double: DVector<Complex64>,
}

impl EvolvedState {
    pub fn norm_sqr(&self) -> f64 {
        self.f0 * self.f0
            + self.single.iter().map(|a| a.norm_sqr()).sum::<f64>()
            + self.double.iter().map(|a| a.norm_sqr()).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::ExcitationBasis;
    use crate::hamiltonian::ChainSpec;

    fn spectral(bonds: &[f64]) -> SpectralData {
        let basis = ExcitationBasis::new(bonds.len() + 1).unwrap();
        diagonalize(&HamiltonianBlocks::from_bonds(&basis, bonds).unwrap()).unwrap()
    }

    fn max_unitarity_defect(p: &DMatrix<Complex64>) -> f64 {
        let g = p.adjoint() * p;
        (g - DMatrix::identity(p.ncols(), p.ncols()))
            .map(|z| z.norm())
            .max()
    }

    #[test]
    fn uniform_four_node_spectrum() {
        let s = spectral(&[1.0, 1.0, 1.0]);
        let mut e: Vec<f64> = s.e1.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        let a = (1.0 + 5f64.sqrt()) / 4.0;
        let b = (5f64.sqrt() - 1.0) / 4.0;
        let expected = [-a, -b, b, a];
        for (x, y) in e.iter().zip(expected) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
        assert!(s.e1.sum().abs() < 1e-12);
    }

    #[test]
    fn identity_at_zero_time() {
        let s = spectral(&[0.4, 0.9, 1.0, 1.3, 0.6, 0.8]);
        let a = s.propagators(0.0);
        let id1 = DMatrix::<Complex64>::identity(7, 7);
        let id2 = DMatrix::<Complex64>::identity(21, 21);
        assert!((&a.p1 - id1).map(|z| z.norm()).max() < 1e-12);
        assert!((&a.p2 - id2).map(|z| z.norm()).max() < 1e-12);
    }

    #[test]
    fn unitarity_and_composition() {
        let s = spectral(&[0.4, 0.9, 1.0, 1.3, 0.6, 0.8]);
        for t in [0.3, 2.0, 17.5] {
            let a = s.propagators(t);
            assert!(max_unitarity_defect(&a.p1) < 1e-10);
            assert!(max_unitarity_defect(&a.p2) < 1e-10);
        }
        let (t1, t2) = (1.7, 4.2);
        let (a, b, c) = (s.propagators(t1), s.propagators(t2), s.propagators(t1 + t2));
        assert!((&a.p1 * &b.p1 - &c.p1).map(|z| z.norm()).max() < 1e-9);
        assert!((&a.p2 * &b.p2 - &c.p2).map(|z| z.norm()).max() < 1e-9);
    }

    #[test]
    fn mirror_symmetry_of_tuned_chain() {
        let spec = ChainSpec::tuned(12, 0.6, 0.85).unwrap();
        let basis = ExcitationBasis::new(12).unwrap();
        let s = diagonalize(&HamiltonianBlocks::build(&spec, &basis).unwrap()).unwrap();
        let a = s.propagators(9.3);
        for i in 1..=12 {
            for k in 1..=12 {
                let d = a.single(i, k).norm() - a.single(13 - i, 13 - k).norm();
                assert!(d.abs() < 1e-10);
            }
        }
        assert!((a.single(12, 1) - s.single_amplitude(12, 1, 9.3)).norm() < 1e-12);
    }

    #[test]
    fn sender_columns_match_full_matrix() {
        let s = spectral(&[0.4, 0.9, 1.0, 1.3, 0.6, 0.8, 1.1]);
        let full = s.propagators(3.3);
        let part = s.propagators_from(3.3, 4);
        assert_eq!(part.p2.ncols(), 6);
        for i in 1..8 {
            for j in (i + 1)..=8 {
                for (n, m) in pair_list(4) {
                    assert!((full.pair(i, j, n, m) - part.pair(i, j, n, m)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn evolve_basic_states() {
        let s = spectral(&[0.4, 0.9, 1.0, 1.3, 0.6, 0.8]);
        let a = s.propagators_from(5.0, 4);
        let vac = a.evolve(&SenderState::vacuum(4)).unwrap();
        assert_eq!(vac.f0, 1.0);
        assert!(vac
            .single
            .iter()
            .chain(vac.double.iter())
            .all(|z| z.norm() == 0.0));

        let mut one = SenderState::zeros(4);
        one.single[0] = Complex64::new(1.0, 0.0);
        let ev = a.evolve(&one).unwrap();
        for i in 1..=7 {
            assert!((ev.single[i - 1] - a.single(i, 1)).norm() < 1e-15);
        }
        assert!((ev.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn csv_dump_has_every_entry() {
        let s = spectral(&[1.0, 1.0, 1.0]);
        let mut buf = Vec::new();
        s.propagators(1.0).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 16 + 36);
        assert!(text.lines().any(|l| l.starts_with("\"(1,2)\",\"(3,4)\"")));
    }
}
