//! Independent full-Hilbert-space simulator used as a cross-check.
#![allow(dead_code)]

use chainstate_core::{ChainSpec, SenderState};
use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::Rng;

/// State vector over all `2^N` spin configurations; node `k` is bit `k-1`.
pub struct FullChain {
    n: usize,
    /// `(bond, coupling)` with the bond joining nodes `bond+1` and `bond+2`.
    bonds: Vec<f64>,
}

impl FullChain {
    pub fn new(spec: &ChainSpec) -> Self {
        Self {
            n: spec.n_nodes,
            bonds: spec.bonds(),
        }
    }

    fn apply_h(&self, psi: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (s, amp) in psi.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            for (b, &j) in self.bonds.iter().enumerate() {
                let (x, y) = ((s >> b) & 1, (s >> (b + 1)) & 1);
                if x != y {
                    let flipped = s ^ (0b11 << b);
                    out[flipped] += amp * (0.5 * j);
                }
            }
        }
    }

    /// `exp(-iHt) psi` by Taylor series on short substeps.
    pub fn evolve(&self, psi: &[Complex64], t: f64) -> Vec<Complex64> {
        let norm_bound = self.bonds.iter().sum::<f64>();
        let steps = ((norm_bound * t.abs()) / 0.5).ceil().max(1.0) as usize;
        let dt = t / steps as f64;
        let mut cur = psi.to_vec();
        let mut term = vec![Complex64::new(0.0, 0.0); psi.len()];
        let mut tmp = term.clone();
        for _ in 0..steps {
            let mut acc = cur.clone();
            term.copy_from_slice(&cur);
            for order in 1..60 {
                self.apply_h(&term, &mut tmp);
                let f = Complex64::new(0.0, -dt / order as f64);
                for (t, v) in term.iter_mut().zip(&tmp) {
                    *t = v * f;
                }
                let size: f64 = term.iter().map(|v| v.norm_sqr()).sum();
                acc.iter_mut().zip(&term).for_each(|(a, t)| *a += t);
                if size < 1e-40 {
                    break;
                }
            }
            cur = acc;
        }
        cur
    }

    pub fn initial(&self, s: &SenderState) -> Vec<Complex64> {
        let mut psi = vec![Complex64::new(0.0, 0.0); 1 << self.n];
        psi[0] = s.a0;
        for (k, a) in s.single.iter().enumerate() {
            psi[1 << k] = *a;
        }
        let ns = s.n_sender();
        let mut idx = 0;
        for n in 1..=ns {
            for m in n + 1..=ns {
                psi[(1 << (n - 1)) | (1 << (m - 1))] = s.double[idx];
                idx += 1;
            }
        }
        psi
    }

    /// Reduced state of nodes `N-1, N` in the order
    /// `|0>, |N-1>, |N>, |(N-1)N>`.
    pub fn receiver(&self, psi: &[Complex64]) -> Matrix4<Complex64> {
        let (bm, bn) = (self.n - 2, self.n - 1);
        let env_mask = !((1usize << bm) | (1 << bn));
        let mut rho = Matrix4::zeros();
        for (s, a) in psi.iter().enumerate() {
            let ra = ((s >> bm) & 1) | (((s >> bn) & 1) << 1);
            for rb in 0..4 {
                let sb = (s & env_mask) | ((rb & 1) << bm) | (((rb >> 1) & 1) << bn);
                rho[(ra, rb)] += a * psi[sb].conj();
            }
        }
        rho
    }
}

/// Random normalized sender state with real `a0`.
pub fn random_sender<R: Rng>(rng: &mut R, n_sender: usize) -> SenderState {
    let mut s = SenderState::zeros(n_sender);
    let mut g = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    s.a0 = Complex64::new(g().re.abs(), 0.0);
    s.single.iter_mut().for_each(|v| *v = g());
    s.double.iter_mut().for_each(|v| *v = g());
    s.normalized()
}
