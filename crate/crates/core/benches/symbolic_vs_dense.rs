use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qdirac_core::bench::{Case, CASES};
use qdirac_core::corpus::{check_file, check_file_seq, parse_file, CheckConfig, CorpusFile};
use qdirac_core::oracle::OracleConfig;

fn symbolic_vs_dense(c: &mut Criterion) {
    let mut group = c.benchmark_group("symbolic_vs_dense");
    for name in CASES {
        let case = Case::load(name, &OracleConfig::default()).expect("case");
        group.bench_with_input(BenchmarkId::new("symbolic", name), &case, |b, case| {
            b.iter(|| assert!(black_box(case.symbolic().unwrap())))
        });
        if case.dense_feasible() {
            group.bench_with_input(BenchmarkId::new("dense", name), &case, |b, case| {
                b.iter(|| assert!(black_box(case.dense().unwrap())))
            });
        }
    }
    group.finish();
}

fn corpus_files() -> Vec<(String, CorpusFile)> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus");
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .expect("corpus dir")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "qd"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, parse_file(&std::fs::read_to_string(&p).expect("read")).expect("parse"))
        })
        .collect()
}

fn parallel_vs_sequential(c: &mut Criterion) {
    let cfg = CheckConfig::default();
    let mut group = c.benchmark_group("parallel_vs_sequential");
    group.sample_size(10);
    for (name, file) in corpus_files() {
        if !["dj_n5", "simon", "grover", "teleport"].contains(&name.as_str()) {
            continue;
        }
        group.bench_with_input(BenchmarkId::new("parallel", &name), &file, |b, f| {
            b.iter(|| black_box(check_file(f, &cfg)))
        });
        group.bench_with_input(BenchmarkId::new("sequential", &name), &file, |b, f| {
            b.iter(|| black_box(check_file_seq(f, &cfg)))
        });
    }
    group.finish();
}

criterion_group!(benches, symbolic_vs_dense, parallel_vs_sequential);
criterion_main!(benches);
