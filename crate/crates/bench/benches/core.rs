use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use medsynth_core::diffusion::{linear_schedule, sample, GaussianDenoiser, SamplerKind};
use medsynth_core::fidelity::ms_ssim;
use medsynth_core::radiomics::{extract_all, ExtractionConfig};
use medsynth_core::volume::{gaussian_blur, wavelet3d};
use medsynth_core::{Geometry, IntensityKind, LabelMask, Volume};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn noise(n: usize, kind: IntensityKind, lo: f64, hi: f64, seed: u64) -> Volume {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Volume::from_fn(Geometry::isotropic([n, n, n]), kind, |_, _, _| rng.random_range(lo..hi)).unwrap()
}

fn ball(n: usize) -> LabelMask {
    let c = (n as f64 - 1.0) / 2.0;
    let r2 = (n as f64 * 0.4).powi(2);
    LabelMask::from_fn(Geometry::isotropic([n, n, n]), |x, y, z| {
        u32::from((x as f64 - c).powi(2) + (y as f64 - c).powi(2) + (z as f64 - c).powi(2) <= r2)
    })
}

fn radiomics(c: &mut Criterion) {
    let v = noise(24, IntensityKind::Hu, -300.0, 300.0, 1);
    let m = ball(24);
    let mut g = c.benchmark_group("radiomics");
    g.sample_size(10);
    g.bench_function("original_only_24", |b| {
        let cfg = ExtractionConfig::original_only();
        b.iter(|| extract_all(black_box(&v), &m, &cfg).unwrap())
    });
    g.bench_function("all_1065_24", |b| {
        let cfg = ExtractionConfig::default();
        b.iter(|| extract_all(black_box(&v), &m, &cfg).unwrap())
    });
    g.finish();
}

fn fidelity(c: &mut Criterion) {
    let a = noise(64, IntensityKind::Normalized, -1.0, 1.0, 2);
    let b = noise(64, IntensityKind::Normalized, -1.0, 1.0, 3);
    c.bench_function("ms_ssim_64", |bench| bench.iter(|| ms_ssim(black_box(&a), &b).unwrap()));
}

fn volume_ops(c: &mut Criterion) {
    let v = noise(64, IntensityKind::Arbitrary, 0.0, 1.0, 4);
    c.bench_function("haar_64", |b| b.iter(|| wavelet3d(black_box(&v)).unwrap()));
    c.bench_function("blur_factor_25_64", |b| b.iter(|| gaussian_blur(black_box(&v), 25.0).unwrap()));
}

fn sampling(c: &mut Criterion) {
    let schedule = linear_schedule(1000).unwrap();
    let d = GaussianDenoiser { mean: 0.0, std: 0.5 };
    let g = Geometry::isotropic([32, 32, 32]);
    let mut group = c.benchmark_group("sample_32");
    group.sample_size(10);
    for kind in [SamplerKind::Dpmpp2m, SamplerKind::Dpmpp2mSdeKarras] {
        group.bench_function(kind.as_str(), |b| {
            b.iter(|| sample(&d, &schedule, kind, 100, g, None, 7).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, radiomics, fidelity, volume_ops, sampling);
criterion_main!(benches);
