use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ppdesup::analysis::{solve_oracle, DEFAULT_ORACLE_BUDGET};
use ppdesup::secondstage::evaluate_full;
use ppdesup::{generate, Execution, GeneratorConfig, ProductionInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn plans(inst: &ProductionInstance, n: usize) -> Vec<(Vec<Vec<f64>>, Vec<Vec<usize>>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (np, nf) = (inst.num_products(), inst.num_facilities());
    (0..n)
        .map(|_| {
            let y = vec![vec![0; nf]; np];
            let x = (0..np)
                .map(|p| (0..nf).map(|f| rng.random_range(0.0..inst.levels[p][f][0].upper.min(inst.capacity[f] / np as f64))).collect())
                .collect();
            (x, y)
        })
        .collect()
}

fn oracle(c: &mut Criterion) {
    let inst = generate(&GeneratorConfig::new(3, 2, 2, 5, 1)).unwrap();
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| solve_oracle(black_box(&inst), DEFAULT_ORACLE_BUDGET, exec).unwrap())
        });
    }
    group.finish();
}

fn batch_evaluation(c: &mut Criterion) {
    let inst = generate(&GeneratorConfig::new(8, 3, 2, 25, 2)).unwrap();
    let batch = plans(&inst, 2000);
    let mut group = c.benchmark_group("evaluate_full");
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| exec.map(&batch, |(x, y)| evaluate_full(&inst, x, y).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, oracle, batch_evaluation);
criterion_main!(benches);
