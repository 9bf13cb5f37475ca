//! Line parameters of a sender/receiver pair and the receiver density matrix.
//!
//! The receiver is the last two nodes, `N-1` and `N`, with the local basis
//! `{|0>, |N-1>, |N>, |(N-1)N>}`. For a fixed chain and registration time its
//! state depends on the sender amplitudes only through a fixed table of
//! complex constants ([`LineParams`]): bare transition amplitudes into the
//! receiver and sums over the environment nodes `1..=N-2`.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{n_pairs, pair_index, pair_list, ExcitationBasis, SenderState};
use crate::dynamics::TransferAmplitudes;
use crate::error::{Error, Result};

pub type Pair = (usize, usize);

/// Key of one line parameter. Node labels are 1-based; pairs `(n, m)` have
/// `n < m <= N_S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ParamKey {
    /// `p_{N;k}`
    SingleN(usize),
    /// `p_{N-1;k}`
    SingleNm1(usize),
    /// `p_{(N-1)N;nm}`
    Pair(Pair),
    /// `P_{N-1;k,nm} = sum_i p_{i;k} conj(p_{i(N-1);nm})`
    CrossNm1(usize, Pair),
    /// `P_{N;k,nm} = sum_i p_{i;k} conj(p_{iN;nm})`
    CrossN(usize, Pair),
    /// `P_{(N-1)(N-1);kl,nm} = sum_i p_{i(N-1);kl} conj(p_{i(N-1);nm})`
    Mm(Pair, Pair),
    /// `P_{(N-1)N;kl,nm} = sum_i p_{i(N-1);kl} conj(p_{iN;nm})`
    MN(Pair, Pair),
    /// `P_{NN;kl,nm} = sum_i p_{iN;kl} conj(p_{iN;nm})`
    NN(Pair, Pair),
}

impl ParamKey {
    pub fn kind(&self) -> &'static str {
        match self {
            ParamKey::SingleN(_) => "p_N",
            ParamKey::SingleNm1(_) => "p_N-1",
            ParamKey::Pair(_) => "p_(N-1)N",
            ParamKey::CrossNm1(..) => "P_N-1",
            ParamKey::CrossN(..) => "P_N",
            ParamKey::Mm(..) => "P_(N-1)(N-1)",
            ParamKey::MN(..) => "P_(N-1)N",
            ParamKey::NN(..) => "P_NN",
        }
    }

    /// Comma-separated index tuple, e.g. `2,3,1,3`.
    pub fn indices(&self) -> String {
        let v: Vec<usize> = match *self {
            ParamKey::SingleN(k) | ParamKey::SingleNm1(k) => vec![k],
            ParamKey::Pair((n, m)) => vec![n, m],
            ParamKey::CrossNm1(k, (n, m)) | ParamKey::CrossN(k, (n, m)) => vec![k, n, m],
            ParamKey::Mm((k, l), (n, m))
            | ParamKey::MN((k, l), (n, m))
            | ParamKey::NN((k, l), (n, m)) => {
                vec![k, l, n, m]
            }
        };
        v.iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse(kind: &str, indices: &str) -> Result<Self> {
        let idx: Vec<usize> = indices
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("indices {indices:?}: {e}")))?;
        let bad = || Error::Parse(format!("parameter {kind} with indices {indices:?}"));
        let key = match (kind, idx.as_slice()) {
            ("p_N", &[k]) => ParamKey::SingleN(k),
            ("p_N-1", &[k]) => ParamKey::SingleNm1(k),
            ("p_(N-1)N", &[n, m]) => ParamKey::Pair((n, m)),
            ("P_N-1", &[k, n, m]) => ParamKey::CrossNm1(k, (n, m)),
            ("P_N", &[k, n, m]) => ParamKey::CrossN(k, (n, m)),
            ("P_(N-1)(N-1)", &[k, l, n, m]) => ParamKey::Mm((k, l), (n, m)),
            ("P_(N-1)N", &[k, l, n, m]) => ParamKey::MN((k, l), (n, m)),
            ("P_NN", &[k, l, n, m]) => ParamKey::NN((k, l), (n, m)),
            _ => return Err(bad()),
        };
        Ok(key)
    }
}

impl fmt::Display for ParamKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.kind(), self.indices())
    }
}

/// All keys for an `n_sender`-node sender in storage order.
pub fn param_keys(n_sender: usize) -> Vec<ParamKey> {
    let pairs = pair_list(n_sender);
    let mut keys = Vec::new();
    keys.extend((1..=n_sender).map(ParamKey::SingleN));
    keys.extend((1..=n_sender).map(ParamKey::SingleNm1));
    keys.extend(pairs.iter().map(|&p| ParamKey::Pair(p)));
    for k in 1..=n_sender {
        keys.extend(pairs.iter().map(|&p| ParamKey::CrossNm1(k, p)));
    }
    for k in 1..=n_sender {
        keys.extend(pairs.iter().map(|&p| ParamKey::CrossN(k, p)));
    }
    for ctor in [
        ParamKey::Mm as fn(Pair, Pair) -> ParamKey,
        ParamKey::MN,
        ParamKey::NN,
    ] {
        for &a in &pairs {
            keys.extend(pairs.iter().map(|&b| ctor(a, b)));
        }
    }
    keys
}

/// `(3 N_S^2 - 5 N_S + 6)(N_S + 1) N_S / 4`; 170 for a 4-node sender.
pub fn param_count(n_sender: usize) -> usize {
    (3 * n_sender * n_sender + 6 - 5 * n_sender) * (n_sender + 1) * n_sender / 4
}

/// The complete parameter table of a line at one registration time.
#[derive(Debug, Clone, PartialEq)]
pub struct LineParams {
    pub t: f64,
    pub n_nodes: usize,
    n_sender: usize,
    values: Vec<Complex64>,
    index: HashMap<ParamKey, usize>,
}

impl LineParams {
    /// Table with every entry zero.
    pub fn zeros(n_nodes: usize, n_sender: usize, t: f64) -> Self {
        let keys = param_keys(n_sender);
        let index = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        Self {
            t,
            n_nodes,
            n_sender,
            values: vec![Complex64::new(0.0, 0.0); keys.len()],
            index,
        }
    }

    pub fn n_sender(&self) -> usize {
        self.n_sender
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn keys(&self) -> Vec<ParamKey> {
        param_keys(self.n_sender)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamKey, Complex64)> + '_ {
        self.keys().into_iter().zip(self.values.iter().copied())
    }

    pub fn position(&self, key: &ParamKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn get(&self, key: &ParamKey) -> Option<Complex64> {
        self.position(key).map(|i| self.values[i])
    }

    /// Panics on keys outside the table.
    pub fn set(&mut self, key: &ParamKey, v: Complex64) {
        let i = self
            .position(key)
            .unwrap_or_else(|| panic!("unknown parameter {key}"));
        self.values[i] = v;
    }

    fn at(&self, key: ParamKey) -> Complex64 {
        self.values[self.index[&key]]
    }

    /// Largest violation of `P(kl,nm) = conj P(nm,kl)` over the two
    /// Hermitian blocks.
    pub fn hermitian_defect(&self) -> f64 {
        let pairs = pair_list(self.n_sender);
        let mut worst = 0.0f64;
        for &a in &pairs {
            for &b in &pairs {
                for ctor in [ParamKey::Mm as fn(Pair, Pair) -> ParamKey, ParamKey::NN] {
                    let d = (self.at(ctor(a, b)) - self.at(ctor(b, a)).conj()).norm();
                    worst = worst.max(d);
                }
            }
        }
        worst
    }

    /// Copy with all entries of `family` set to zero.
    pub fn with_family_zeroed(&self, family: Family) -> Self {
        let mut out = self.clone();
        for (i, key) in self.keys().iter().enumerate() {
            if classify(key) == family {
                out.values[i] = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// CSV with columns `kind,indices,re,im,family`, preceded by `#` comment
    /// lines carrying `header` and the table metadata.
    pub fn write_csv<W: Write>(&self, mut out: W, header: &[String]) -> Result<()> {
        for line in header {
            writeln!(out, "# {line}")?;
        }
        writeln!(
            out,
            "# line-params n_nodes={} n_sender={} t={:.17e}",
            self.n_nodes, self.n_sender, self.t
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "indices", "re", "im", "family"])?;
        for (key, v) in self.iter() {
            w.write_record([
                key.kind().to_string(),
                key.indices(),
                format!("{:.17e}", v.re),
                format!("{:.17e}", v.im),
                classify(&key).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format produced by [`LineParams::write_csv`].
    pub fn read_csv<R: BufRead>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        let meta = text
            .lines()
            .find_map(|l| l.strip_prefix("# line-params "))
            .ok_or_else(|| Error::Parse("missing '# line-params' header".into()))?;
        let mut n_nodes = None;
        let mut n_sender = None;
        let mut t = None;
        for tok in meta.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header token {tok:?}")))?;
            let perr = |e: String| Error::Parse(format!("header {k}: {e}"));
            match k {
                "n_nodes" => n_nodes = Some(v.parse::<usize>().map_err(|e| perr(e.to_string()))?),
                "n_sender" => n_sender = Some(v.parse::<usize>().map_err(|e| perr(e.to_string()))?),
                "t" => t = Some(v.parse::<f64>().map_err(|e| perr(e.to_string()))?),
                _ => {}
            }
        }
        let (n_nodes, n_sender, t) = match (n_nodes, n_sender, t) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return Err(Error::Parse("incomplete '# line-params' header".into())),
        };

        let mut params = Self::zeros(n_nodes, n_sender, t);
        let mut seen = vec![false; params.len()];
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() < 4 {
                return Err(Error::Parse(format!("short record {rec:?}")));
            }
            let key = ParamKey::parse(&rec[0], &rec[1])?;
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{key}: {e}")))
            };
            let v = Complex64::new(num(&rec[2])?, num(&rec[3])?);
            let pos = params
                .position(&key)
                .ok_or_else(|| Error::Parse(format!("{key} outside a {n_sender}-node table")))?;
            params.values[pos] = v;
            seen[pos] = true;
        }
        let missing: Vec<String> = params
            .keys()
            .iter()
            .zip(&seen)
            .filter(|(_, s)| !**s)
            .map(|(k, _)| k.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::Parse(format!(
                "missing entries: {}",
                missing.join(", ")
            )));
        }
        Ok(params)
    }
}

/// Evaluates every line parameter from the propagators.
pub fn compute_line_params(amps: &TransferAmplitudes, n_sender: usize) -> Result<LineParams> {
    let n = amps.n_nodes();
    if n_sender + 2 > n {
        return Err(Error::SenderReceiverOverlap {
            sender: n_sender,
            n,
        });
    }
    if amps.source_nodes() < n_sender {
        return Err(Error::SizeMismatch(format!(
            "propagator columns cover {} nodes, sender has {n_sender}",
            amps.source_nodes()
        )));
    }
    let mut out = LineParams::zeros(n, n_sender, amps.t);
    let pairs = pair_list(n_sender);
    let env = 1..=(n - 2);

    // Rows of the propagator restricted to the environment.
    let single = |i: usize, k: usize| amps.single(i, k);
    let to_m = |i: usize, p: Pair| amps.pair(i, n - 1, p.0, p.1);
    let to_n = |i: usize, p: Pair| amps.pair(i, n, p.0, p.1);

    for k in 1..=n_sender {
        out.set(&ParamKey::SingleN(k), single(n, k));
        out.set(&ParamKey::SingleNm1(k), single(n - 1, k));
    }
    for &p in &pairs {
        out.set(&ParamKey::Pair(p), amps.pair(n - 1, n, p.0, p.1));
    }
    for k in 1..=n_sender {
        for &p in &pairs {
            let (mut a, mut b) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for i in env.clone() {
                a += single(i, k) * to_m(i, p).conj();
                b += single(i, k) * to_n(i, p).conj();
            }
            out.set(&ParamKey::CrossNm1(k, p), a);
            out.set(&ParamKey::CrossN(k, p), b);
        }
    }
    for &kl in &pairs {
        for &nm in &pairs {
            let mut mm = Complex64::new(0.0, 0.0);
            let mut mn = Complex64::new(0.0, 0.0);
            let mut nn = Complex64::new(0.0, 0.0);
            for i in env.clone() {
                mm += to_m(i, kl) * to_m(i, nm).conj();
                mn += to_m(i, kl) * to_n(i, nm).conj();
                nn += to_n(i, kl) * to_n(i, nm).conj();
            }
            out.set(&ParamKey::Mm(kl, nm), mm);
            out.set(&ParamKey::MN(kl, nm), mn);
            out.set(&ParamKey::NN(kl, nm), nn);
        }
    }
    Ok(out)
}

/// Two-qubit state of the receiver in the basis
/// `{|0>, |N-1>, |N>, |(N-1)N>}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverState {
    pub rho: Matrix4<Complex64>,
}

/// Frobenius norm of a 4x4 complex matrix.
pub fn frobenius(m: &Matrix4<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl ReceiverState {
    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn hermitian_defect(&self) -> f64 {
        (self.rho - self.rho.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let h = (self.rho + self.rho.adjoint()).map(|z| z * 0.5);
        let eig = SymmetricEigen::new(h);
        let mut e = [0.0; 4];
        for (slot, v) in e.iter_mut().zip(eig.eigenvalues.iter()) {
            *slot = *v;
        }
        e.sort_by(f64::total_cmp);
        e
    }

    /// Hermitian within 1e-10, unit trace within 1e-10, eigenvalues >= -1e-9.
    pub fn is_valid(&self) -> bool {
        self.hermitian_defect() < 1e-10
            && (self.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-10
            && self.eigenvalues()[0] >= -1e-9
    }
}

/// Receiver state created by sender amplitudes `s` on a line with
/// parameters `params`. The vacuum population is the complement of the
/// other three diagonal entries.
pub fn assemble_rho(params: &LineParams, s: &SenderState) -> Result<ReceiverState> {
    let ns = params.n_sender;
    if s.n_sender() != ns || s.double.len() != n_pairs(ns) {
        return Err(Error::SizeMismatch(format!(
            "sender state for {} nodes, parameters for {ns}",
            s.n_sender()
        )));
    }
    let pairs = pair_list(ns);
    let p = |k| params.at(k);
    let a0 = s.a0;

    // Receiver-side amplitudes carried directly by the bare p's.
    let f_m: Complex64 = (1..=ns)
        .map(|k| p(ParamKey::SingleNm1(k)) * s.single[k - 1])
        .sum();
    let f_n: Complex64 = (1..=ns)
        .map(|k| p(ParamKey::SingleN(k)) * s.single[k - 1])
        .sum();
    let f_mn: Complex64 = pairs
        .iter()
        .zip(&s.double)
        .map(|(&q, a)| p(ParamKey::Pair(q)) * a)
        .sum();

    let mut cross_m = Complex64::new(0.0, 0.0);
    let mut cross_n = Complex64::new(0.0, 0.0);
    for k in 1..=ns {
        for (&q, a) in pairs.iter().zip(&s.double) {
            let w = s.single[k - 1] * a.conj();
            cross_m += p(ParamKey::CrossNm1(k, q)) * w;
            cross_n += p(ParamKey::CrossN(k, q)) * w;
        }
    }
    let mut mm = Complex64::new(0.0, 0.0);
    let mut mn = Complex64::new(0.0, 0.0);
    let mut nn = Complex64::new(0.0, 0.0);
    for (&kl, a) in pairs.iter().zip(&s.double) {
        for (&q, b) in pairs.iter().zip(&s.double) {
            let w = a * b.conj();
            mm += p(ParamKey::Mm(kl, q)) * w;
            mn += p(ParamKey::MN(kl, q)) * w;
            nn += p(ParamKey::NN(kl, q)) * w;
        }
    }

    let r01 = a0 * f_m.conj() + cross_m;
    let r02 = a0 * f_n.conj() + cross_n;
    let r03 = a0 * f_mn.conj();
    let r11 = f_m * f_m.conj() + mm;
    let r12 = f_m * f_n.conj() + mn;
    let r13 = f_m * f_mn.conj();
    let r22 = f_n * f_n.conj() + nn;
    let r23 = f_n * f_mn.conj();
    let r33 = f_mn * f_mn.conj();
    let r00 = Complex64::new(1.0, 0.0) - r11 - r22 - r33;

    #[rustfmt::skip]
    let rho = Matrix4::new(
        r00,         r01,         r02,         r03,
        r01.conj(),  r11,         r12,         r13,
        r02.conj(),  r12.conj(),  r22,         r23,
        r03.conj(),  r13.conj(),  r23.conj(),  r33,
    );
    Ok(ReceiverState { rho })
}

/// Reduced state of the last two nodes by explicit summation over the
/// environment configurations of the evolved chain state.
pub fn partial_trace_oracle(
    s: &SenderState,
    amps: &TransferAmplitudes,
    basis: &ExcitationBasis,
) -> Result<ReceiverState> {
    let n = basis.n_nodes();
    if amps.n_nodes() != n {
        return Err(Error::SizeMismatch(
            "propagators and basis differ in size".into(),
        ));
    }
    let ev = amps.evolve(s)?;

    // Each basis state = (environment occupation, receiver index 0..4).
    let receiver_of = |nodes: &[usize]| -> (Vec<usize>, usize) {
        let mut env = Vec::new();
        let mut r = 0usize;
        for &x in nodes {
            if x == n - 1 {
                r |= 1;
            } else if x == n {
                r |= 2;
            } else {
                env.push(x);
            }
        }
        // r: bit0 -> node N-1, bit1 -> node N; map to basis order 0, N-1, N, (N-1)N.
        (env, r)
    };
    let mut blocks: HashMap<Vec<usize>, [Complex64; 4]> = HashMap::new();
    let mut put = |nodes: &[usize], amp: Complex64| {
        let (env, r) = receiver_of(nodes);
        blocks.entry(env).or_insert([Complex64::new(0.0, 0.0); 4])[r] += amp;
    };
    put(&[], Complex64::new(ev.f0, 0.0));
    for i in 1..=n {
        put(&[i], ev.single[i - 1]);
    }
    for (idx, &(i, j)) in basis.pairs().iter().enumerate() {
        debug_assert_eq!(pair_index(n, i, j), idx);
        put(&[i, j], ev.double[idx]);
    }

    let mut rho = Matrix4::<Complex64>::zeros();
    for psi in blocks.values() {
        for a in 0..4 {
            for b in 0..4 {
                rho[(a, b)] += psi[a] * psi[b].conj();
            }
        }
    }
    Ok(ReceiverState { rho })
}

/// Magnitude families of the line parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    I,
    II,
    III,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::I => "I",
            Family::II => "II",
            Family::III => "III",
        })
    }
}

/// Members of the near-unity family, in their conventional numbering.
/// Each pairs mirror-symmetric transition amplitudes.
pub const FAMILY_I: [ParamKey; 13] = [
    ParamKey::SingleNm1(2),
    ParamKey::SingleN(1),
    ParamKey::Pair((1, 2)),
    ParamKey::CrossNm1(3, (2, 3)),
    ParamKey::CrossNm1(4, (2, 4)),
    ParamKey::CrossN(3, (1, 3)),
    ParamKey::CrossN(4, (1, 4)),
    ParamKey::NN((1, 3), (1, 3)),
    ParamKey::NN((1, 4), (1, 4)),
    ParamKey::Mm((2, 3), (2, 3)),
    ParamKey::Mm((2, 4), (2, 4)),
    ParamKey::MN((2, 3), (1, 3)),
    ParamKey::MN((2, 4), (1, 4)),
];

/// Members of the intermediate family, in their conventional numbering.
pub const FAMILY_II: [ParamKey; 14] = [
    ParamKey::SingleNm1(4),
    ParamKey::Pair((1, 4)),
    ParamKey::CrossNm1(2, (2, 4)),
    ParamKey::CrossNm1(3, (3, 4)),
    ParamKey::CrossN(2, (1, 2)),
    ParamKey::CrossN(4, (1, 2)),
    ParamKey::CrossN(2, (1, 4)),
    ParamKey::NN((1, 2), (1, 2)),
    ParamKey::NN((1, 4), (1, 2)),
    ParamKey::NN((1, 2), (1, 4)),
    ParamKey::Mm((3, 4), (2, 3)),
    ParamKey::Mm((2, 3), (3, 4)),
    ParamKey::MN((2, 4), (1, 2)),
    ParamKey::MN((3, 4), (1, 3)),
];

/// Family of a parameter: membership in the structural lists above,
/// everything else is family III.
pub fn classify(key: &ParamKey) -> Family {
    if FAMILY_I.contains(key) {
        Family::I
    } else if FAMILY_II.contains(key) {
        Family::II
    } else {
        Family::III
    }
}

/// Per-family count and magnitude range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilySummary {
    pub family: Family,
    pub count: usize,
    pub min_abs: f64,
    pub max_abs: f64,
}

/// Tags every parameter and summarizes each family.
pub fn classify_families(params: &LineParams) -> (Vec<(ParamKey, Family)>, [FamilySummary; 3]) {
    let tags: Vec<(ParamKey, Family)> = params
        .keys()
        .into_iter()
        .map(|k| (k, classify(&k)))
        .collect();
    let summary = [Family::I, Family::II, Family::III].map(|fam| {
        let mags: Vec<f64> = params
            .iter()
            .filter(|(k, _)| classify(k) == fam)
            .map(|(_, v)| v.norm())
            .collect();
        FamilySummary {
            family: fam,
            count: mags.len(),
            min_abs: mags.iter().copied().fold(f64::INFINITY, f64::min),
            max_abs: mags.iter().copied().fold(0.0, f64::max),
        }
    });
    (tags, summary)
}
