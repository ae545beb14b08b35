//! Benchmarks of the data-parallel inner loops.
//!
//! Run `cargo bench` for the rayon-backed build and
//! `cargo bench --no-default-features` for the sequential fallback; compare
//! with criterion baselines, e.g.
//!
//!   cargo bench -- --save-baseline parallel
//!   cargo bench --no-default-features -- --baseline parallel
//!
//! Both builds produce identical numerical results; only scheduling differs.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use hamsynth::cost::{cost, CostMode};
use hamsynth::optimize::{gradient_shift, minimize, InitStrategy, OptimizerConfig};
use hamsynth::pauli::{standard_spec, ParamVector, Preset};
use hamsynth::targets::{builtin, BuiltinTarget};
use hamsynth::trotter::{circuit_unitary, trotterize, TrotterConfig, TrotterMode};

fn seeded_theta(len: usize, seed: u64) -> ParamVector {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    ParamVector::new((0..len).map(|_| rng.gen_range(-1.5..1.5)).collect())
}

fn bench_circuit_unitary(c: &mut Criterion) {
    let mut group = c.benchmark_group("circuit_unitary");
    for (name, preset, n, m) in [
        ("3q_reference_m6", Preset::Fig4a, 3, 6usize),
        ("4q_reference_m5", Preset::Fig4b, 4, 5),
        ("3q_full_general_m6", Preset::FullGeneral, 3, 6),
    ] {
        let spec = standard_spec(preset, n).unwrap();
        let theta = seeded_theta(spec.num_terms(), 7);
        let cfg = TrotterConfig::new(m, TrotterMode::Primitive).unwrap();
        let circuit = trotterize(&spec, &theta, &cfg).unwrap();
        group.bench_function(name, |b| b.iter(|| circuit_unitary(&circuit).unwrap()));
    }
    group.finish();
}

fn bench_cost(c: &mut Criterion) {
    let toffoli = builtin(BuiltinTarget::Toffoli).matrix;
    let spec = standard_spec(Preset::Fig4a, 3).unwrap();
    let theta = seeded_theta(9, 3);
    let cfg = TrotterConfig::new(6, TrotterMode::Primitive).unwrap();

    let mut group = c.benchmark_group("cost");
    group.bench_function("exact_trace_3q_m6", |b| {
        b.iter(|| cost(&toffoli, &spec, &theta, &cfg, &CostMode::ExactTrace).unwrap())
    });
    group.bench_function("overlap_test_exact_3q_m6", |b| {
        b.iter(|| cost(&toffoli, &spec, &theta, &cfg, &CostMode::HsExact).unwrap())
    });
    group.bench_function("overlap_test_sampled_3q_m6_100k", |b| {
        b.iter(|| {
            cost(
                &toffoli,
                &spec,
                &theta,
                &cfg,
                &CostMode::HsSampled {
                    shots: 100_000,
                    seed: 5,
                },
            )
            .unwrap()
        })
    });
    group.finish();
}

/// The optimizer hot path: 2 m Q shifted evaluations per call.
fn bench_gradient_shift(c: &mut Criterion) {
    let mut group = c.benchmark_group("gradient_shift");
    for (name, preset, target, n, m) in [
        ("9_terms_m6", Preset::Fig4a, BuiltinTarget::Toffoli, 3, 6usize),
        ("36_terms_m6", Preset::FullGeneral, BuiltinTarget::Toffoli, 3, 6),
        ("12_terms_m5_4q", Preset::Fig4b, BuiltinTarget::Parity4, 4, 5),
        ("66_terms_m5_4q", Preset::FullGeneral, BuiltinTarget::Parity4, 4, 5),
    ] {
        let spec = standard_spec(preset, n).unwrap();
        let target = builtin(target).matrix;
        let theta = seeded_theta(spec.num_terms(), 11);
        let cfg = TrotterConfig::new(m, TrotterMode::Primitive).unwrap();
        group.bench_function(name, |b| {
            b.iter(|| gradient_shift(&spec, &theta, &cfg, &target).unwrap())
        });
    }
    group.finish();
}

fn bench_descent(c: &mut Criterion) {
    let toffoli = builtin(BuiltinTarget::Toffoli).matrix;
    let spec = standard_spec(Preset::FullGeneral, 3).unwrap();
    let cfg = TrotterConfig::new(6, TrotterMode::Primitive).unwrap();
    let opt = OptimizerConfig {
        learning_rate: 0.3,
        max_iters: 10,
        cost_tolerance: 1e-12,
        grad_norm_tolerance: 1e-12,
        init: InitStrategy::Uniform {
            lo: -1.0,
            hi: 1.0,
            seed: 9,
        },
        restarts: 0,
    };
    let mut group = c.benchmark_group("descent");
    group.sample_size(20);
    group.bench_function("10_iterations_36_terms_m6", |b| {
        b.iter_batched(
            || (),
            |_| minimize(&spec, &toffoli, &cfg, &opt, &CostMode::ExactTrace).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_circuit_unitary,
    bench_cost,
    bench_gradient_shift,
    bench_descent
);
criterion_main!(benches);
