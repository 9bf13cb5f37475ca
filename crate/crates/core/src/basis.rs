//! Zero-, one- and two-excitation basis of an `N`-node chain.
//!
//! Node labels are 1-based at every public boundary. Pairs `(n, m)` always
//! satisfy `n < m` and are ordered lexicographically.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest chain that holds a 4-node sender and a 2-node receiver.
pub const MIN_NODES: usize = 4;

/// Index bookkeeping for the `|0>`, `|k>`, `|nm>` states of a chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcitationBasis {
    n_nodes: usize,
    pairs: Vec<(usize, usize)>,
}

/// Number of unordered pairs drawn from `n` items.
pub fn n_pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Lexicographic index of the pair `(n, m)`, `1 <= n < m <= nodes`.
///
/// Row `n` starts after all pairs with a smaller first element.
pub fn pair_index(nodes: usize, n: usize, m: usize) -> usize {
    debug_assert!(1 <= n && n < m && m <= nodes);
    let before = (n - 1) * nodes - (n - 1) * n / 2;
    before + (m - n - 1)
}

/// All pairs of `1..=nodes` in lexicographic order.
pub fn pair_list(nodes: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n_pairs(nodes));
    for n in 1..nodes {
        for m in (n + 1)..=nodes {
            out.push((n, m));
        }
    }
    out
}

impl ExcitationBasis {
    pub fn new(n_nodes: usize) -> Result<Self> {
        if n_nodes < MIN_NODES {
            return Err(Error::InvalidChainLength {
                n: n_nodes,
                min: MIN_NODES,
            });
        }
        Ok(Self {
            n_nodes,
            pairs: pair_list(n_nodes),
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Size of the two-excitation block, `N(N-1)/2`.
    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// Total dimension `1 + N + N(N-1)/2`.
    pub fn dim(&self) -> usize {
        1 + self.n_nodes + self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Position of `(n, m)` within the two-excitation block.
    pub fn pair_index(&self, n: usize, m: usize) -> Option<usize> {
        if n >= 1 && n < m && m <= self.n_nodes {
            Some(pair_index(self.n_nodes, n, m))
        } else {
            None
        }
    }

    pub fn pair(&self, idx: usize) -> Option<(usize, usize)> {
        self.pairs.get(idx).copied()
    }
}

/// Pure initial state of the sender:
/// `a0 |0> + sum_i a_i |i> + sum_{n<m} a_nm |nm>` on nodes `1..=N_S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SenderState {
    /// Vacuum amplitude. Stored complex so that a non-real value can be
    /// rejected by [`SenderState::validate`] instead of silently dropped.
    pub a0: Complex64,
    pub single: Vec<Complex64>,
    /// Lexicographic over pairs of `1..=N_S`.
    pub double: Vec<Complex64>,
}

/// Tolerance of the normalization check.
pub const NORM_TOL: f64 = 1e-12;

impl SenderState {
    /// All-zero amplitudes for an `n_sender`-node sender (not normalized).
    pub fn zeros(n_sender: usize) -> Self {
        Self {
            a0: Complex64::new(0.0, 0.0),
            single: vec![Complex64::new(0.0, 0.0); n_sender],
            double: vec![Complex64::new(0.0, 0.0); n_pairs(n_sender)],
        }
    }

    pub fn vacuum(n_sender: usize) -> Self {
        let mut s = Self::zeros(n_sender);
        s.a0 = Complex64::new(1.0, 0.0);
        s
    }

    /// Normalized state from real pair amplitudes only.
    pub fn from_real_pairs(n_sender: usize, pairs: &[f64]) -> Result<Self> {
        if pairs.len() != n_pairs(n_sender) {
            return Err(Error::SizeMismatch(format!(
                "{} pair amplitudes for a {}-node sender",
                pairs.len(),
                n_sender
            )));
        }
        let mut s = Self::zeros(n_sender);
        for (slot, &v) in s.double.iter_mut().zip(pairs) {
            *slot = Complex64::new(v, 0.0);
        }
        Ok(s)
    }

    pub fn n_sender(&self) -> usize {
        self.single.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a0.norm_sqr()
            + self.single.iter().map(|a| a.norm_sqr()).sum::<f64>()
            + self.double.iter().map(|a| a.norm_sqr()).sum::<f64>()
    }

    /// Rescales to unit norm. A zero vector is left untouched.
    pub fn normalized(mut self) -> Self {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            self.a0 /= norm;
            self.single.iter_mut().for_each(|a| *a /= norm);
            self.double.iter_mut().for_each(|a| *a /= norm);
        }
        self
    }

    /// Amplitude of the pair `(n, m)`, 1-based.
    pub fn pair(&self, n: usize, m: usize) -> Complex64 {
        self.double[pair_index(self.n_sender(), n, m)]
    }

    pub fn validate(&self) -> Result<()> {
        if self.double.len() != n_pairs(self.single.len()) {
            return Err(Error::SizeMismatch(format!(
                "{} pair amplitudes for a {}-node sender",
                self.double.len(),
                self.single.len()
            )));
        }
        if self.a0.im != 0.0 {
            return Err(Error::ComplexVacuumAmplitude(self.a0.im));
        }
        let deviation = (self.norm_sqr() - 1.0).abs();
        if deviation > NORM_TOL {
            return Err(Error::NormViolation { deviation });
        }
        Ok(())
    }

    /// Real coordinates `[a0, Re a_i, Im a_i, ..., Re a_nm, Im a_nm, ...]`.
    /// For `N_S = 4` this is 21 numbers tied by one normalization.
    pub fn to_real_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(1 + 2 * (self.single.len() + self.double.len()));
        out.push(self.a0.re);
        for a in self.single.iter().chain(&self.double) {
            out.push(a.re);
            out.push(a.im);
        }
        out
    }

    pub fn from_real_vec(n_sender: usize, x: &[f64]) -> Result<Self> {
        let np = n_pairs(n_sender);
        let expected = 1 + 2 * (n_sender + np);
        if x.len() != expected {
            return Err(Error::SizeMismatch(format!(
                "{} real coordinates, expected {expected}",
                x.len()
            )));
        }
        let c = |j: usize| Complex64::new(x[1 + 2 * j], x[2 + 2 * j]);
        Ok(Self {
            a0: Complex64::new(x[0], 0.0),
            single: (0..n_sender).map(c).collect(),
            double: (n_sender..n_sender + np).map(c).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(ExcitationBasis::new(20).unwrap().dim(), 211);
        assert_eq!(ExcitationBasis::new(60).unwrap().dim(), 1831);
        for n in 4..40 {
            assert_eq!(ExcitationBasis::new(n).unwrap().dim(), (n * n + n + 2) / 2);
        }
    }

    #[test]
    fn four_node_pair_order() {
        let b = ExcitationBasis::new(4).unwrap();
        assert_eq!(b.pairs(), &[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]);
    }

    #[test]
    fn pair_round_trip() {
        for n in [4, 7, 13, 60] {
            let b = ExcitationBasis::new(n).unwrap();
            let mut last = None;
            for (idx, &(p, q)) in b.pairs().iter().enumerate() {
                assert_eq!(b.pair_index(p, q), Some(idx));
                assert_eq!(b.pair(idx), Some((p, q)));
                if let Some(prev) = last {
                    assert!(idx > prev);
                }
                last = Some(idx);
            }
            assert_eq!(b.pair_index(3, 3), None);
            assert_eq!(b.pair_index(4, 2), None);
        }
    }

    #[test]
    fn too_short_chain() {
        assert!(matches!(
            ExcitationBasis::new(3),
            Err(Error::InvalidChainLength { n: 3, .. })
        ));
    }

    #[test]
    fn validation() {
        assert!(SenderState::vacuum(4).validate().is_ok());

        let mut s = SenderState::zeros(4);
        s.double[0] = Complex64::new(1.0, 0.0);
        assert!(s.validate().is_ok());

        let mut s = SenderState::zeros(4);
        s.a0 = Complex64::new(0.8, 0.0);
        s.single[0] = Complex64::new(0.8, 0.0);
        match s.validate() {
            Err(Error::NormViolation { deviation }) => assert!((deviation - 0.28).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }

        let mut s = SenderState::zeros(4);
        s.a0 = Complex64::new(0.0, 1.0);
        assert!(matches!(
            s.validate(),
            Err(Error::ComplexVacuumAmplitude(_))
        ));
    }

    #[test]
    fn real_parameter_count() {
        let s = SenderState::vacuum(4);
        assert_eq!(s.to_real_vec().len(), 21);
        let back = SenderState::from_real_vec(4, &s.to_real_vec()).unwrap();
        assert_eq!(back, s);
    }
}
