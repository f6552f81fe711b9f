//! Parallel (`batch::map`) vs sequential (`batch::map_seq`) on the batch
//! loops of a run: random similarity trials, codimension sweeps and
//! per-order quotient systems.

use std::hint::black_box;

use bdf_core::batch;
use bdf_core::frame::{frame_bounds, iterate, OperatorTriple};
use bdf_core::hardy::{DegreePair, TruncatedSpace};
use bdf_core::inner::InnerSpec;
use bdf_core::model::{random_similarity, transport, triple_from_quotient};
use bdf_core::runner::Experiment;
use bdf_core::submodule::{beurling_from_spec, quotient};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn zw_triple(n: usize) -> OperatorTriple {
    let space = TruncatedSpace::new(DegreePair::new(n, n));
    triple_from_quotient(&quotient(&beurling_from_spec(&InnerSpec::monomial(1, 1), space).unwrap())).unwrap()
}

fn similarity_trial(t: &OperatorTriple, horizon: DegreePair, k: u64) -> f64 {
    let l = random_similarity(&mut Experiment::rng(1, k), t.dim(), 1e3).unwrap();
    let (moved, _) = transport(t, &l).unwrap();
    frame_bounds(&iterate(&moved, horizon).unwrap()).upper
}

fn codim(n: &usize) -> usize {
    let space = TruncatedSpace::new(DegreePair::new(*n, *n));
    beurling_from_spec(&InnerSpec::monomial(2, 1), space).unwrap().codimension()
}

fn bench_similarity(c: &mut Criterion) {
    let mut g = c.benchmark_group("similarity_trials");
    g.sample_size(10);
    for n in [6usize, 10] {
        let t = zw_triple(n);
        let h = DegreePair::new(n, n);
        let trials: Vec<u64> = (0..20).collect();
        g.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, _| {
            b.iter(|| black_box(batch::map(&trials, |&k| similarity_trial(&t, h, k))))
        });
        g.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, _| {
            b.iter(|| black_box(batch::map_seq(&trials, |&k| similarity_trial(&t, h, k))))
        });
    }
    g.finish();
}

fn bench_codimension(c: &mut Criterion) {
    let mut g = c.benchmark_group("codimension_sweep");
    g.sample_size(10);
    let orders: Vec<usize> = (2..=14).collect();
    g.bench_function("parallel", |b| b.iter(|| black_box(batch::map(&orders, codim))));
    g.bench_function("sequential", |b| b.iter(|| black_box(batch::map_seq(&orders, codim))));
    g.finish();
}

criterion_group!(benches, bench_similarity, bench_codimension);
criterion_main!(benches);
