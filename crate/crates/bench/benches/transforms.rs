use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use freeprob::cumulant::{cumulants_to_moments_by_partitions, moments_to_cumulants_by_mobius};
use freeprob::fock::{FockConfig, FockModel, FockOperator};
use freeprob::infdiv::check_infdiv;
use freeprob::limits::poisson_approximation;
use freeprob::{cumulants_to_moments, enumerate_nc, free_product, moments_to_cumulants, Rational};
use freeprob_bench::{compound, random_moments};
use num_traits::Zero;

fn lattice(c: &mut Criterion) {
    let mut g = c.benchmark_group("nc");
    for n in [8, 10, 12] {
        g.bench_with_input(BenchmarkId::new("enumerate", n), &n, |b, &n| b.iter(|| enumerate_nc(black_box(n)).unwrap()));
    }
    g.finish();
}

fn transforms(c: &mut Criterion) {
    let mut g = c.benchmark_group("transform");
    g.sample_size(10);
    for order in [4, 6] {
        let mf = random_moments(2, order, 7);
        let cf = moments_to_cumulants(&mf);
        g.bench_with_input(BenchmarkId::new("m2c_recursive", order), &mf, |b, mf| b.iter(|| moments_to_cumulants(mf)));
        g.bench_with_input(BenchmarkId::new("m2c_mobius", order), &mf, |b, mf| b.iter(|| moments_to_cumulants_by_mobius(mf)));
        g.bench_with_input(BenchmarkId::new("c2m_recursive", order), &cf, |b, cf| b.iter(|| cumulants_to_moments(cf)));
        g.bench_with_input(BenchmarkId::new("c2m_partitions", order), &cf, |b, cf| {
            b.iter(|| cumulants_to_moments_by_partitions(cf))
        });
    }
    let mf = random_moments(2, 8, 7);
    g.bench_function("m2c_recursive/8", |b| b.iter(|| moments_to_cumulants(&mf)));
    g.finish();
}

fn products(c: &mut Criterion) {
    let mut g = c.benchmark_group("free_product");
    g.sample_size(10);
    let fams = [random_moments(1, 6, 1), random_moments(2, 6, 2).renamed(vec!["y1".into(), "y2".into()]).unwrap()];
    g.bench_function("three_letters/6", |b| b.iter(|| free_product(&fams, 6).unwrap()));
    g.finish();
}

fn positivity(c: &mut Criterion) {
    let mut g = c.benchmark_group("infdiv");
    g.sample_size(10);
    let cf = compound(2, 8);
    g.bench_function("check/k2_d4", |b| b.iter(|| check_infdiv(&cf, 2, 4, &Rational::zero()).unwrap()));
    g.bench_function("approximation/j100", |b| b.iter(|| poisson_approximation(&cf, 100, 6).unwrap()));
    g.finish();
}

fn fock(c: &mut Criterion) {
    let mut g = c.benchmark_group("fock");
    g.sample_size(10);
    let cf = compound(2, 9).to_f64();
    let model = FockModel::build(&cf, 2, &FockConfig::new(4, 4)).unwrap();
    let one = Rational::from_integer(1.into());
    let ops: Vec<FockOperator<f64>> = (0..2).map(|i| model.levy_process(i, &one).unwrap()).collect();
    g.bench_function("vacuum_moments/order4", |b| {
        b.iter(|| model.vacuum_moments(vec!["x".into(), "y".into()], &ops, 4).unwrap())
    });
    g.finish();
}

criterion_group!(benches, lattice, transforms, products, positivity, fock);
criterion_main!(benches);
