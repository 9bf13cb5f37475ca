//! Nearest-neighbour XY Hamiltonian restricted to the one- and
//! two-excitation sectors.
//!
//! The exchange term `J (I_x I_x + I_y I_y)` on a bond moves a single
//! excitation across that bond with amplitude `J/2`. The vacuum has zero
//! energy and is not stored.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::ExcitationBasis;
use crate::error::{Error, Result};

/// Smallest chain for which the two tuned boundary pairs and the bulk do
/// not overlap.
pub const MIN_PROFILE_NODES: usize = 7;

/// Coupling profile `[d1, d2, D_3, ..., D_{N-3}, d2, d1]` of an `N`-node chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    #[serde(rename = "n")]
    pub n_nodes: usize,
    pub delta1: f64,
    pub delta2: f64,
    /// Couplings of bonds `3..=N-3`.
    pub bulk: Vec<f64>,
}

impl ChainSpec {
    /// Boundary-tuned chain with unit bulk couplings.
    pub fn tuned(n_nodes: usize, delta1: f64, delta2: f64) -> Result<Self> {
        if n_nodes < MIN_PROFILE_NODES {
            return Err(Error::InvalidChainLength {
                n: n_nodes,
                min: MIN_PROFILE_NODES,
            });
        }
        let spec = Self {
            n_nodes,
            delta1,
            delta2,
            bulk: vec![1.0; n_nodes - 5],
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn uniform(n_nodes: usize) -> Result<Self> {
        Self::tuned(n_nodes, 1.0, 1.0)
    }

    /// Number of bulk bonds, `N - 5`.
    pub fn n_bulk(&self) -> usize {
        self.n_nodes.saturating_sub(5)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < MIN_PROFILE_NODES {
            return Err(Error::InvalidChainLength {
                n: self.n_nodes,
                min: MIN_PROFILE_NODES,
            });
        }
        if self.bulk.len() != self.n_bulk() {
            return Err(Error::BulkLength {
                expected: self.n_bulk(),
                got: self.bulk.len(),
            });
        }
        for (i, &j) in self.bonds().iter().enumerate() {
            if !j.is_finite() || j <= 0.0 {
                return Err(Error::NonPositiveCoupling {
                    bond: i + 1,
                    value: j,
                });
            }
        }
        Ok(())
    }

    /// Couplings of bonds `1..=N-1`; entry `i` couples nodes `i+1` and `i+2`.
    pub fn bonds(&self) -> Vec<f64> {
        let mut b = Vec::with_capacity(self.n_nodes - 1);
        b.push(self.delta1);
        b.push(self.delta2);
        b.extend_from_slice(&self.bulk);
        b.push(self.delta2);
        b.push(self.delta1);
        b
    }

    /// Sets bulk couplings to `1 + epsilon * deltas[i]`. Boundary pairs are
    /// left exactly as they are.
    pub fn apply_disorder(&self, epsilon: f64, deltas: &[f64]) -> Result<Self> {
        if epsilon < 0.0 {
            return Err(Error::NegativeEpsilon(epsilon));
        }
        if deltas.len() != self.n_bulk() {
            return Err(Error::BulkLength {
                expected: self.n_bulk(),
                got: deltas.len(),
            });
        }
        if let Some((i, &d)) = deltas.iter().enumerate().find(|(_, d)| d.abs() > 1.0) {
            return Err(Error::DisorderOutOfRange {
                bond: i + 3,
                value: d,
            });
        }
        let mut out = self.clone();
        out.bulk = deltas.iter().map(|d| 1.0 + epsilon * d).collect();
        out.validate()?;
        Ok(out)
    }
}

/// Hamiltonian blocks on the one-excitation (`N x N`) and two-excitation
/// (`C(N,2) x C(N,2)`) sectors.
#[derive(Debug, Clone)]
pub struct HamiltonianBlocks {
    pub h1: DMatrix<f64>,
    pub h2: DMatrix<f64>,
    /// Nonzero upper-triangle entries of `h2` as `(row, col, value)`.
    h2_sparse: Vec<(usize, usize, f64)>,
    bonds: Vec<f64>,
}

impl HamiltonianBlocks {
    pub fn build(spec: &ChainSpec, basis: &ExcitationBasis) -> Result<Self> {
        spec.validate()?;
        if spec.n_nodes != basis.n_nodes() {
            return Err(Error::SizeMismatch(format!(
                "chain of {} nodes, basis of {}",
                spec.n_nodes,
                basis.n_nodes()
            )));
        }
        Self::from_bonds(basis, &spec.bonds())
    }

    /// Blocks for an arbitrary coupling profile of `N - 1` bonds.
    pub fn from_bonds(basis: &ExcitationBasis, bonds: &[f64]) -> Result<Self> {
        let n = basis.n_nodes();
        if bonds.len() + 1 != n {
            return Err(Error::SizeMismatch(format!(
                "{} bonds for {} nodes",
                bonds.len(),
                n
            )));
        }

        let mut h1 = DMatrix::zeros(n, n);
        for (i, &j) in bonds.iter().enumerate() {
            h1[(i, i + 1)] = 0.5 * j;
            h1[(i + 1, i)] = 0.5 * j;
        }

        // Two hard-core excitations at (p, q), p < q. Moving either one by a
        // single bond onto an empty node gives the off-diagonal elements;
        // only moves to the right are enumerated, the transpose fills the rest.
        let np = basis.n_pairs();
        let mut h2 = DMatrix::zeros(np, np);
        let mut h2_sparse = Vec::new();
        for (idx, &(p, q)) in basis.pairs().iter().enumerate() {
            let mut hop = |target: (usize, usize), bond: usize| {
                let jdx = crate::basis::pair_index(n, target.0, target.1);
                let v = 0.5 * bonds[bond - 1];
                h2[(idx, jdx)] = v;
                h2[(jdx, idx)] = v;
                h2_sparse.push((idx.min(jdx), idx.max(jdx), v));
            };
            if p + 1 < q {
                hop((p + 1, q), p);
            }
            if q < n {
                hop((p, q + 1), q);
            }
        }

        Ok(Self {
            h1,
            h2,
            h2_sparse,
            bonds: bonds.to_vec(),
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.h1.nrows()
    }

    pub fn bonds(&self) -> &[f64] {
        &self.bonds
    }

    pub(crate) fn h2_upper_nonzeros(&self) -> &[(usize, usize, f64)] {
        &self.h2_sparse
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blocks(bonds: &[f64]) -> HamiltonianBlocks {
        let basis = ExcitationBasis::new(bonds.len() + 1).unwrap();
        HamiltonianBlocks::from_bonds(&basis, bonds).unwrap()
    }

    #[test]
    fn uniform_four_node_hopping() {
        let b = blocks(&[1.0, 1.0, 1.0]);
        for i in 0..4 {
            assert_eq!(b.h1[(i, i)], 0.0);
        }
        for i in 0..3 {
            assert_eq!(b.h1[(i, i + 1)], 0.5);
        }
        let basis = ExcitationBasis::new(4).unwrap();
        let idx = |p, q| basis.pair_index(p, q).unwrap();
        assert_eq!(b.h2[(idx(1, 2), idx(1, 3))], 0.5);
        assert_eq!(b.h2[(idx(1, 2), idx(3, 4))], 0.0);
        assert_eq!(b.h2[(idx(1, 2), idx(1, 2))], 0.0);
    }

    #[test]
    fn tuned_twenty_node_couplings() {
        let spec = ChainSpec::tuned(20, 0.550, 0.817).unwrap();
        let basis = ExcitationBasis::new(20).unwrap();
        let b = HamiltonianBlocks::build(&spec, &basis).unwrap();
        assert!((b.h1[(0, 1)] - 0.275).abs() < 1e-15);
        assert!((b.h1[(1, 2)] - 0.4085).abs() < 1e-15);
        assert!((b.h1[(18, 19)] - 0.275).abs() < 1e-15);
        assert!((b.h1[(17, 18)] - 0.4085).abs() < 1e-15);
        assert_eq!(b.h1[(2, 3)], 0.5);
    }

    #[test]
    fn exact_symmetry_and_sparsity() {
        let b = blocks(&[0.3, 1.1, 0.9, 1.4, 0.7, 0.5, 1.2]);
        assert_eq!(b.h1, b.h1.transpose());
        assert_eq!(b.h2, b.h2.transpose());
        for row in b.h2.row_iter() {
            assert!(row.iter().filter(|v| **v != 0.0).count() <= 4);
        }
    }

    #[test]
    fn bond_layout() {
        let spec = ChainSpec::tuned(9, 0.5, 0.8).unwrap();
        assert_eq!(spec.bonds(), vec![0.5, 0.8, 1.0, 1.0, 1.0, 1.0, 0.8, 0.5]);
        assert!(ChainSpec::tuned(6, 0.5, 0.8).is_err());
        assert!(ChainSpec::tuned(9, 0.0, 0.8).is_err());
    }

    #[test]
    fn disorder() {
        let spec = ChainSpec::tuned(20, 0.55, 0.817).unwrap();
        assert_eq!(spec.apply_disorder(0.0, &[0.3; 15]).unwrap(), spec);

        let d = spec.apply_disorder(0.05, &[1.0; 15]).unwrap();
        assert!(d.bulk.iter().all(|&b| (b - 1.05).abs() < 1e-15));
        assert_eq!((d.delta1, d.delta2), (0.55, 0.817));

        let mut deltas = vec![0.0; 15];
        deltas[0] = -1.0;
        let d = spec.apply_disorder(0.025, &deltas).unwrap();
        assert!((d.bulk[0] - 0.975).abs() < 1e-15);

        assert!(matches!(
            spec.apply_disorder(0.05, &[1.5; 15]),
            Err(Error::DisorderOutOfRange { .. })
        ));
        assert!(matches!(
            spec.apply_disorder(0.05, &[0.0; 3]),
            Err(Error::BulkLength { .. })
        ));
    }

    #[test]
    fn json_shape() {
        let spec = ChainSpec::tuned(7, 0.5, 0.8).unwrap();
        let v: serde_json::Value = serde_json::to_value(&spec).unwrap();
        assert_eq!(v["n"], 7);
        assert_eq!(v["bulk"].as_array().unwrap().len(), 2);
        let back: ChainSpec = serde_json::from_value(v).unwrap();
        assert_eq!(back, spec);
    }
}
