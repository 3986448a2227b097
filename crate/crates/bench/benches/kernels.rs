use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use klap::exponents::{certify_total, Rat, SamplingConfig};
use klap::ffarith::cyclic_convolve;
use klap::oscint::{fourier2d, g_weight};
use klap::quad::QuadConfig;
use klap::{kl_spectrum, Complex64, FieldCtx, WeightParams};

fn spectrum(c: &mut Criterion) {
    let mut g = c.benchmark_group("kl_spectrum");
    g.sample_size(10);
    for q in [1009u64, 10007, 100003] {
        let ctx = FieldCtx::new(q).unwrap();
        g.bench_with_input(BenchmarkId::new("m2", q), &ctx, |b, ctx| {
            b.iter(|| kl_spectrum(2, black_box(ctx)).unwrap())
        });
    }
    g.finish();
}

fn convolution(c: &mut Criterion) {
    let mut g = c.benchmark_group("cyclic_convolve");
    for n in [1000usize, 4096, 10006] {
        let a: Vec<Complex64> = (0..n).map(|i| Complex64::new((i as f64).sin(), 0.0)).collect();
        let b: Vec<Complex64> = (0..n).map(|i| Complex64::new(0.0, (i as f64).cos())).collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &(a, b), |bch, (a, b)| {
            bch.iter(|| cyclic_convolve(black_box(a), black_box(b)).unwrap())
        });
    }
    g.finish();
}

fn oscillatory(c: &mut Criterion) {
    let t = WeightParams::new(12.0 / 30.0, 1009.0, 30.0, 30.0, 5.0, 0.01);
    let w = g_weight(&t).unwrap();
    let cfg = QuadConfig::default();
    c.bench_function("fourier2d_q1009", |b| {
        b.iter(|| fourier2d(&w, black_box(500.0 / 1009.0), black_box(-700.0 / 1009.0), &cfg).unwrap())
    });
}

fn certify(c: &mut Criterion) {
    let mut g = c.benchmark_group("certify_total");
    g.sample_size(10);
    let sampling = SamplingConfig {
        resolution: 360,
        random_samples: 10_000,
        seed: 0,
    };
    let x = Rat::int(1);
    let (k, e) = (Rat::new(1, 192), Rat::new(1, 100));
    g.bench_function("x1_res360", |b| {
        b.iter(|| certify_total(&x, &k, &e, &e, 10, black_box(&sampling)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, spectrum, convolution, oscillatory, certify);
criterion_main!(benches);
