//! Reconstruction of the line parameters from receiver states produced by
//! a fixed family of probe sender states.

use std::collections::HashMap;
use std::io::{Read, Write};

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{pair_index, pair_list, SenderState};
use crate::error::{Error, Result};
use crate::receiver::{LineParams, Pair, ParamKey, ReceiverState};

/// Sender size the protocol is enumerated for.
pub const PROBE_SENDER: usize = 4;
/// Intermediate magnitudes below this abort extraction.
pub const DIVISION_GUARD: f64 = 1e-13;

/// Which two sender basis states a probe superposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProbeKind {
    /// `a0|0> + a_k|k>`
    Single { k: usize },
    /// `a_k|k> + a_nm|nm>`
    SinglePair { k: usize, nm: Pair },
    /// `a_kl|kl> + a_nm|nm>`
    PairPairReal { kl: Pair, nm: Pair },
    /// `a_kl|kl> + i a_nm|nm>`
    PairPairImag { kl: Pair, nm: Pair },
}

/// A probe with its two real amplitudes, `alpha^2 + beta^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeState {
    #[serde(flatten)]
    pub kind: ProbeKind,
    pub alpha: f64,
    pub beta: f64,
}

impl ProbeState {
    pub fn new(kind: ProbeKind) -> Self {
        let w = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            kind,
            alpha: w,
            beta: w,
        }
    }

    /// Sender state prepared by this probe.
    pub fn sender_state(&self) -> Result<SenderState> {
        let mut s = SenderState::zeros(PROBE_SENDER);
        let pair = |q: Pair| -> Result<usize> {
            let (n, m) = q;
            if n == 0 || n >= m || m > PROBE_SENDER {
                return Err(Error::InvalidArgument(format!(
                    "pair ({n},{m}) outside the sender"
                )));
            }
            Ok(pair_index(PROBE_SENDER, n, m))
        };
        let single = |k: usize| -> Result<usize> {
            if k == 0 || k > PROBE_SENDER {
                return Err(Error::InvalidArgument(format!(
                    "node {k} outside the sender"
                )));
            }
            Ok(k - 1)
        };
        let (a, b) = (
            Complex64::new(self.alpha, 0.0),
            Complex64::new(self.beta, 0.0),
        );
        match self.kind {
            ProbeKind::Single { k } => {
                s.a0 = a;
                s.single[single(k)?] = b;
            }
            ProbeKind::SinglePair { k, nm } => {
                s.single[single(k)?] = a;
                s.double[pair(nm)?] = b;
            }
            ProbeKind::PairPairReal { kl, nm } | ProbeKind::PairPairImag { kl, nm } => {
                if pair(kl)? >= pair(nm)? {
                    return Err(Error::InvalidArgument(format!(
                        "pair probe needs {kl:?} < {nm:?}"
                    )));
                }
                s.double[pair(kl)?] = a;
                s.double[pair(nm)?] = match self.kind {
                    ProbeKind::PairPairImag { .. } => Complex64::new(0.0, self.beta),
                    _ => b,
                };
            }
        }
        s.validate()?;
        Ok(s)
    }
}

/// The full probe family: 4 single, 24 single-pair and 15 + 15 pair-pair
/// probes for a four-node sender.
pub fn probe_set(n_sender: usize) -> Result<Vec<ProbeState>> {
    if n_sender != PROBE_SENDER {
        return Err(Error::UnsupportedSenderSize(n_sender));
    }
    let pairs = pair_list(n_sender);
    let mut out: Vec<ProbeState> = (1..=n_sender)
        .map(|k| ProbeState::new(ProbeKind::Single { k }))
        .collect();
    for k in 1..=n_sender {
        for &nm in &pairs {
            out.push(ProbeState::new(ProbeKind::SinglePair { k, nm }));
        }
    }
    for imag in [false, true] {
        for (i, &kl) in pairs.iter().enumerate() {
            for &nm in &pairs[i + 1..] {
                let kind = if imag {
                    ProbeKind::PairPairImag { kl, nm }
                } else {
                    ProbeKind::PairPairReal { kl, nm }
                };
                out.push(ProbeState::new(kind));
            }
        }
    }
    Ok(out)
}

/// Receiver states for `probes` from any forward model.
pub fn simulate_probes<F>(
    probes: &[ProbeState],
    mut forward: F,
) -> Result<Vec<(ProbeState, ReceiverState)>>
where
    F: FnMut(&SenderState) -> Result<ReceiverState>,
{
    probes
        .iter()
        .map(|p| Ok((*p, forward(&p.sender_state()?)?)))
        .collect()
}

/// Tracks which real components of each parameter have been fixed.
struct Extraction {
    params: LineParams,
    known: Vec<[bool; 2]>,
}

impl Extraction {
    fn set(&mut self, key: ParamKey, v: Complex64) {
        self.params.set(&key, v);
        let i = self.params.position(&key).expect("key in table");
        self.known[i] = [true, true];
    }

    fn set_re(&mut self, key: ParamKey, re: f64) {
        let i = self.params.position(&key).expect("key in table");
        let old = self.params.values()[i];
        self.params.set(&key, Complex64::new(re, old.im));
        self.known[i][0] = true;
    }

    fn set_im(&mut self, key: ParamKey, im: f64) {
        let i = self.params.position(&key).expect("key in table");
        let old = self.params.values()[i];
        self.params.set(&key, Complex64::new(old.re, im));
        self.known[i][1] = true;
    }

    fn is_known(&self, key: ParamKey) -> bool {
        let i = self.params.position(&key).expect("key in table");
        self.known[i] == [true, true]
    }

    fn get(&self, key: ParamKey) -> Complex64 {
        self.params.get(&key).expect("key in table")
    }
}

fn guard(what: &str, v: f64) -> Result<()> {
    if v.abs() < DIVISION_GUARD || !v.is_finite() {
        return Err(Error::Conditioning {
            what: what.to_string(),
            value: v,
        });
    }
    Ok(())
}

/// Inverts the probe relations stage by stage: single probes give the
/// bare single-excitation amplitudes, single-pair probes the cross terms,
/// pair amplitudes and diagonal blocks, pair-pair probes the off-diagonal
/// blocks. Fails with [`Error::IncompleteExtraction`] naming every real
/// component the supplied probes leave undetermined.
pub fn extract_params(
    outputs: &[(ProbeState, ReceiverState)],
    n_nodes: usize,
    t: f64,
) -> Result<LineParams> {
    let ns = PROBE_SENDER;
    let pairs = pair_list(ns);
    let params = LineParams::zeros(n_nodes, ns, t);
    let mut ex = Extraction {
        known: vec![[false, false]; params.len()],
        params,
    };
    let by_kind: HashMap<ProbeKind, (f64, f64, Matrix4<Complex64>)> = outputs
        .iter()
        .map(|(p, r)| (p.kind, (p.alpha, p.beta, r.rho)))
        .collect();

    // Singles.
    for k in 1..=ns {
        if let Some(&(a, b, rho)) = by_kind.get(&ProbeKind::Single { k }) {
            guard("single probe amplitude product", a * b)?;
            ex.set(ParamKey::SingleNm1(k), rho[(0, 1)].conj() / (a * b));
            ex.set(ParamKey::SingleN(k), rho[(0, 2)].conj() / (a * b));
        }
    }

    // Single-pair probes.
    let mut pair_ls: HashMap<Pair, (Complex64, f64)> = HashMap::new();
    for k in 1..=ns {
        for &q in &pairs {
            let Some(&(a, b, rho)) = by_kind.get(&ProbeKind::SinglePair { k, nm: q }) else {
                continue;
            };
            guard("single-pair probe amplitude product", a * b)?;
            ex.set(ParamKey::CrossNm1(k, q), rho[(0, 1)] / (a * b));
            ex.set(ParamKey::CrossN(k, q), rho[(0, 2)] / (a * b));
            if !(ex.is_known(ParamKey::SingleNm1(k)) && ex.is_known(ParamKey::SingleN(k))) {
                continue;
            }
            let pm = ex.get(ParamKey::SingleNm1(k));
            let pn = ex.get(ParamKey::SingleN(k));
            // rho_13 = pm conj(p_q) a b and rho_23 = pn conj(p_q) a b:
            // accumulate least squares for conj(p_q).
            let acc = pair_ls.entry(q).or_insert((Complex64::new(0.0, 0.0), 0.0));
            for (c, obs) in [(pm * a * b, rho[(1, 3)]), (pn * a * b, rho[(2, 3)])] {
                acc.0 += c.conj() * obs;
                acc.1 += c.norm_sqr();
            }
            if !ex.is_known(ParamKey::Mm(q, q)) {
                guard("single-pair probe pair amplitude", b)?;
                let b2 = b * b;
                let a2 = a * a;
                ex.set(ParamKey::Mm(q, q), (rho[(1, 1)] - pm.norm_sqr() * a2) / b2);
                ex.set(ParamKey::NN(q, q), (rho[(2, 2)] - pn.norm_sqr() * a2) / b2);
                ex.set(ParamKey::MN(q, q), (rho[(1, 2)] - pm * pn.conj() * a2) / b2);
            }
        }
    }
    for (&q, &(num, den)) in &pair_ls {
        guard(
            "single-node amplitudes weighting the pair amplitude",
            den.sqrt(),
        )?;
        ex.set(ParamKey::Pair(q), (num / den).conj());
    }

    // Pair-pair probes.
    for (i, &kl) in pairs.iter().enumerate() {
        for &nm in &pairs[i + 1..] {
            let diag_known = [kl, nm].iter().all(|&q| ex.is_known(ParamKey::Mm(q, q)));
            if !diag_known {
                continue;
            }
            let [dm, dmn, dn] = [ParamKey::Mm, ParamKey::MN, ParamKey::NN]
                .map(|key| (ex.get(key(kl, kl)), ex.get(key(nm, nm))));
            let diag = |d: (Complex64, Complex64), a: f64, b: f64| d.0 * a * a + d.1 * b * b;
            let real = by_kind.get(&ProbeKind::PairPairReal { kl, nm }).copied();
            let imag = by_kind.get(&ProbeKind::PairPairImag { kl, nm }).copied();
            let mut s_mn = None;
            if let Some((a, b, rho)) = real {
                guard("pair-pair probe amplitude product", a * b)?;
                let mm = (rho[(1, 1)] - diag(dm, a, b)).re / (2.0 * a * b);
                let nn = (rho[(2, 2)] - diag(dn, a, b)).re / (2.0 * a * b);
                ex.set_re(ParamKey::Mm(kl, nm), mm);
                ex.set_re(ParamKey::Mm(nm, kl), mm);
                ex.set_re(ParamKey::NN(kl, nm), nn);
                ex.set_re(ParamKey::NN(nm, kl), nn);
                s_mn = Some((rho[(1, 2)] - diag(dmn, a, b)) / (a * b));
            }
            let mut d_mn = None;
            if let Some((a, b, rho)) = imag {
                guard("pair-pair probe amplitude product", a * b)?;
                let mm = (rho[(1, 1)] - diag(dm, a, b)).re / (2.0 * a * b);
                let nn = (rho[(2, 2)] - diag(dn, a, b)).re / (2.0 * a * b);
                ex.set_im(ParamKey::Mm(kl, nm), mm);
                ex.set_im(ParamKey::Mm(nm, kl), -mm);
                ex.set_im(ParamKey::NN(kl, nm), nn);
                ex.set_im(ParamKey::NN(nm, kl), -nn);
                d_mn = Some(Complex64::i() * (rho[(1, 2)] - diag(dmn, a, b)) / (a * b));
            }
            // The mixed block is not Hermitian: the real probe gives the sum
            // of the two transposed entries, the imaginary probe their
            // difference.
            if let (Some(s), Some(d)) = (s_mn, d_mn) {
                ex.set(ParamKey::MN(kl, nm), 0.5 * (s + d));
                ex.set(ParamKey::MN(nm, kl), 0.5 * (s - d));
            }
        }
    }

    let missing: Vec<String> = ex
        .params
        .keys()
        .iter()
        .zip(&ex.known)
        .flat_map(|(key, k)| {
            let mut v = Vec::new();
            if !k[0] {
                v.push(format!("Re {key}"));
            }
            if !k[1] {
                v.push(format!("Im {key}"));
            }
            v
        })
        .collect();
    if !missing.is_empty() {
        return Err(Error::IncompleteExtraction(missing));
    }
    Ok(ex.params)
}

/// One probe measurement in the interchange format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub probe: ProbeState,
    pub rho: MatrixRecord,
}

/// 4x4 complex matrix as separate real and imaginary row arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub re: [[f64; 4]; 4],
    pub im: [[f64; 4]; 4],
}

impl From<&Matrix4<Complex64>> for MatrixRecord {
    fn from(m: &Matrix4<Complex64>) -> Self {
        let mut re = [[0.0; 4]; 4];
        let mut im = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                re[i][j] = m[(i, j)].re;
                im[i][j] = m[(i, j)].im;
            }
        }
        Self { re, im }
    }
}

impl From<&MatrixRecord> for Matrix4<Complex64> {
    fn from(r: &MatrixRecord) -> Self {
        Matrix4::from_fn(|i, j| Complex64::new(r.re[i][j], r.im[i][j]))
    }
}

pub fn write_probe_json<W: Write>(out: W, outputs: &[(ProbeState, ReceiverState)]) -> Result<()> {
    let records: Vec<ProbeRecord> = outputs
        .iter()
        .map(|(p, r)| ProbeRecord {
            probe: *p,
            rho: (&r.rho).into(),
        })
        .collect();
    serde_json::to_writer_pretty(out, &records)?;
    Ok(())
}

pub fn read_probe_json<R: Read>(input: R) -> Result<Vec<(ProbeState, ReceiverState)>> {
    let records: Vec<ProbeRecord> = serde_json::from_reader(input)?;
    Ok(records
        .iter()
        .map(|r| {
            (
                r.probe,
                ReceiverState {
                    rho: (&r.rho).into(),
                },
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::ExcitationBasis;
    use crate::dynamics::diagonalize;
    use crate::hamiltonian::{ChainSpec, HamiltonianBlocks};
    use crate::receiver::{assemble_rho, compute_line_params, partial_trace_oracle};

    fn max_diff(a: &LineParams, b: &LineParams) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn probe_counts() {
        let set = probe_set(4).unwrap();
        assert_eq!(set.len(), 58);
        let count = |f: fn(&ProbeKind) -> bool| set.iter().filter(|p| f(&p.kind)).count();
        assert_eq!(count(|k| matches!(k, ProbeKind::Single { .. })), 4);
        assert_eq!(count(|k| matches!(k, ProbeKind::SinglePair { .. })), 24);
        assert_eq!(count(|k| matches!(k, ProbeKind::PairPairReal { .. })), 15);
        assert_eq!(count(|k| matches!(k, ProbeKind::PairPairImag { .. })), 15);
        assert!(matches!(probe_set(3), Err(Error::UnsupportedSenderSize(3))));
        for p in &set {
            assert!(p.sender_state().is_ok());
        }
    }

    #[test]
    fn imaginary_probe_carries_phase() {
        let p = ProbeState::new(ProbeKind::PairPairImag {
            kl: (1, 2),
            nm: (3, 4),
        });
        let s = p.sender_state().unwrap();
        assert_eq!(
            s.pair(3, 4),
            Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2)
        );
    }

    #[test]
    fn single_probe_inversion() {
        let spec = ChainSpec::tuned(10, 0.6, 0.85).unwrap();
        let basis = ExcitationBasis::new(10).unwrap();
        let sp = diagonalize(&HamiltonianBlocks::build(&spec, &basis).unwrap()).unwrap();
        let params = compute_line_params(&sp.propagators_from(8.0, 4), 4).unwrap();
        let probe = ProbeState::new(ProbeKind::Single { k: 1 });
        let rho = assemble_rho(&params, &probe.sender_state().unwrap()).unwrap();
        let p = rho.rho[(0, 2)].conj() * 2.0;
        assert!((p - params.get(&ParamKey::SingleN(1)).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn round_trip_through_oracle() {
        let spec = ChainSpec::tuned(9, 0.5, 0.9).unwrap();
        let basis = ExcitationBasis::new(9).unwrap();
        let sp = diagonalize(&HamiltonianBlocks::build(&spec, &basis).unwrap()).unwrap();
        let amps = sp.propagators(5.3);
        let params = compute_line_params(&amps, 4).unwrap();
        let outputs = simulate_probes(&probe_set(4).unwrap(), |s| {
            partial_trace_oracle(s, &amps, &basis)
        })
        .unwrap();
        let got = extract_params(&outputs, 9, 5.3).unwrap();
        assert!(max_diff(&got, &params) < 1e-10);
    }

    #[test]
    fn missing_imaginary_probes_are_named() {
        let spec = ChainSpec::tuned(9, 0.5, 0.9).unwrap();
        let basis = ExcitationBasis::new(9).unwrap();
        let sp = diagonalize(&HamiltonianBlocks::build(&spec, &basis).unwrap()).unwrap();
        let params = compute_line_params(&sp.propagators(5.3), 4).unwrap();
        let probes: Vec<_> = probe_set(4)
            .unwrap()
            .into_iter()
            .filter(|p| !matches!(p.kind, ProbeKind::PairPairImag { .. }))
            .collect();
        let outputs = simulate_probes(&probes, |s| assemble_rho(&params, s)).unwrap();
        let Err(Error::IncompleteExtraction(missing)) = extract_params(&outputs, 9, 5.3) else {
            panic!("expected incomplete extraction");
        };
        // 30 off-diagonal entries in each Hermitian block lose Im, the 30
        // off-diagonal mixed entries lose both parts.
        assert_eq!(missing.len(), 30 + 30 + 60);
        assert!(missing
            .iter()
            .all(|m| m.contains("P_(N-1)(N-1)") || m.contains("P_NN") || m.contains("P_(N-1)N")));
        assert!(missing
            .iter()
            .filter(|m| !m.contains("P_(N-1)N"))
            .all(|m| m.starts_with("Im ")));
    }

    #[test]
    fn zero_amplitude_guard() {
        let mut p = ProbeState::new(ProbeKind::Single { k: 2 });
        p.alpha = 0.0;
        p.beta = 1.0;
        let outputs = vec![(
            p,
            ReceiverState {
                rho: Matrix4::identity(),
            },
        )];
        assert!(matches!(
            extract_params(&outputs, 9, 1.0),
            Err(Error::Conditioning { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let p = ProbeState::new(ProbeKind::SinglePair { k: 2, nm: (1, 3) });
        let mut rho = Matrix4::<Complex64>::identity() * Complex64::new(0.25, 0.0);
        rho[(0, 1)] = Complex64::new(0.1, -0.2);
        let outputs = vec![(p, ReceiverState { rho })];
        let mut buf = Vec::new();
        write_probe_json(&mut buf, &outputs).unwrap();
        let back = read_probe_json(buf.as_slice()).unwrap();
        assert_eq!(back[0].0, p);
        assert_eq!(back[0].1.rho, rho);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"kind\": \"single-pair\""));
    }
}
