use std::hint::black_box;

use chainstate_core::chainopt::{first_maximum, DEFAULT_DT};
use chainstate_core::disorder::line_params;
use chainstate_core::inverse::{solve_werner, SolveOptions};
use chainstate_core::probing::{extract_params, probe_set, simulate_probes};
use chainstate_core::receiver::{assemble_rho, compute_line_params};
use chainstate_core::reference::TUNED_20;
use chainstate_core::{diagonalize, ChainSpec, ExcitationBasis, HamiltonianBlocks, SenderState};
use criterion::{criterion_group, criterion_main, Criterion};

fn tuned() -> (ChainSpec, ExcitationBasis) {
    let spec = ChainSpec::tuned(20, TUNED_20.delta1, TUNED_20.delta2).unwrap();
    (spec, ExcitationBasis::new(20).unwrap())
}

fn spectral(c: &mut Criterion) {
    let (spec, basis) = tuned();
    let blocks = HamiltonianBlocks::build(&spec, &basis).unwrap();
    c.bench_function("diagonalize n=20", |b| {
        b.iter(|| diagonalize(black_box(&blocks)).unwrap())
    });
    let s = diagonalize(&blocks).unwrap();
    c.bench_function("first maximum n=20", |b| {
        b.iter(|| first_maximum(black_box(&s), 60.0, DEFAULT_DT).unwrap())
    });
    c.bench_function("sender propagators n=20", |b| {
        b.iter(|| s.propagators_from(black_box(TUNED_20.t0), 4))
    });
    let amps = s.propagators_from(TUNED_20.t0, 4);
    c.bench_function("line parameters n=20", |b| {
        b.iter(|| compute_line_params(black_box(&amps), 4).unwrap())
    });
}

fn receiver(c: &mut Criterion) {
    let (spec, _) = tuned();
    let params = line_params(&spec, TUNED_20.t0, 4).unwrap();
    let x: Vec<f64> = (0..21).map(|i| (i as f64 * 0.37).sin()).collect();
    let s = SenderState::from_real_vec(4, &x).unwrap().normalized();
    c.bench_function("assemble receiver state", |b| {
        b.iter(|| assemble_rho(black_box(&params), black_box(&s)).unwrap())
    });
    let outputs = simulate_probes(&probe_set(4).unwrap(), |s| assemble_rho(&params, s)).unwrap();
    c.bench_function("extract parameters from probes", |b| {
        b.iter(|| extract_params(black_box(&outputs), 20, TUNED_20.t0).unwrap())
    });
    let opts = SolveOptions::default();
    c.bench_function("Werner solve p=0.4", |b| {
        b.iter(|| solve_werner(black_box(&params), 0.4, &opts).unwrap())
    });
}

criterion_group!(benches, spectral, receiver);
criterion_main!(benches);
