use criterion::{black_box, criterion_group, criterion_main, Criterion};
use mdag_core::*;
use num::rational::BigRational;
use std::collections::BTreeMap;

fn no_cards() -> BTreeMap<String, u8> {
    BTreeMap::new()
}

fn bench_identify(c: &mut Criterion) {
    let (g1, m1) = figures::fig1();
    c.bench_function("identify_full_law colluder graph", |b| {
        b.iter(|| identify_full_law(black_box(&g1), black_box(&m1)).unwrap())
    });
    let (g5, m5) = figures::fig3e();
    c.bench_function("identify_colluded_at_one helper search", |b| {
        b.iter(|| identify_colluded_at_one(black_box(&g5), black_box(&m5), "R_Y").unwrap())
    });
}

fn bench_models(c: &mut Criterion) {
    let (g, mono) = figures::fig3d();
    c.bench_function("random_model 8 vertices", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            random_model(black_box(&g), black_box(&mono), seed, &no_cards()).unwrap()
        })
    });
    let m = random_model(&g, &mono, 7, &no_cards()).unwrap();
    c.bench_function("observed_law coarsening 8 vertices", |b| {
        b.iter(|| observed_law(black_box(&m)))
    });
}

fn bench_verify(c: &mut Criterion) {
    let (g, mono) = figures::fig1();
    let res = identify_full_law(&g, &mono).unwrap();
    let expr = res.functional.unwrap();
    c.bench_function("verify_functional full law x5", |b| {
        b.iter(|| verify_functional(&g, &mono, black_box(&expr), &Query::FullLaw, 5, 3).unwrap())
    });
}

fn bench_or(c: &mut Criterion) {
    let g = MDag::build(
        &[],
        &["X", "Y", "Z"],
        &[
            ("X", "Y"),
            ("Y", "Z"),
            ("X", "R_Y"),
            ("Y", "R_Z"),
            ("Z", "R_X"),
        ],
    )
    .unwrap();
    let none = MonotoneSpec::empty();
    let m = random_model(&g, &none, 5, &no_cards()).unwrap();
    let ordering: Vec<String> = vec!["R_X".into(), "R_Y".into(), "R_Z".into()];
    c.bench_function("or_reconstruct 3 indicators", |b| {
        b.iter(|| or_reconstruct(black_box(&m), black_box(&ordering)).unwrap())
    });
}

fn bench_counterexamples(c: &mut Criterion) {
    let (g, mono) = figures::fig2b();
    let gamma: BigRational = ratio(1, 3);
    c.bench_function("chain_pair k=4", |b| {
        b.iter(|| chain_pair(black_box(&g), black_box(&mono), 4, &gamma).unwrap())
    });
    let (g2, mono2) = figures::fig2a();
    let a = [ratio(7, 15), ratio(8, 15)];
    c.bench_function("bivariate_pair solve", |b| {
        b.iter(|| {
            bivariate_pair(
                black_box(&g2),
                black_box(&mono2),
                &ObservedBivariate::example(),
                &a,
            )
            .unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_identify,
    bench_models,
    bench_verify,
    bench_or,
    bench_counterexamples
);
criterion_main!(benches);
