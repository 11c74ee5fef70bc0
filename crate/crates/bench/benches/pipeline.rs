use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mmc_bench::cantilever_fixture;
use mmc_core::driver::{flatten, Analysis};
use mmc_core::fea::{cell_moduli, FeSystem};
use mmc_core::geometry::TdfField;
use mmc_core::optimizer::{MmaSettings, MmaState};

fn tdf(c: &mut Criterion) {
    let (problem, comps, settings) = cantilever_fixture([640, 320], 4);
    let grid = problem.grid().unwrap();
    let reg = settings.regularization(&grid).unwrap();
    c.bench_function("tdf_build_640x320_576_components", |b| {
        b.iter(|| TdfField::build(black_box(&comps), &grid, &reg, None))
    });
}

fn fea(c: &mut Criterion) {
    let (problem, comps, settings) = cantilever_fixture([640, 320], 4);
    let grid = problem.grid().unwrap();
    let reg = settings.regularization(&grid).unwrap();
    let h = TdfField::build(&comps, &grid, &reg, None).heaviside(&reg);
    let moduli = cell_moduli(&h, &grid, &settings.material);
    let analysis = Analysis::new(&problem, reg, settings.material, settings.solver).unwrap();
    let mut system: FeSystem = analysis.system().clone();
    c.bench_function("assemble_160x80_ratio4", |b| b.iter(|| system.assemble(black_box(&moduli)).nnz()));
}

fn evaluate(c: &mut Criterion) {
    let (problem, comps, settings) = cantilever_fixture([640, 320], 4);
    let grid = problem.grid().unwrap();
    let reg = settings.regularization(&grid).unwrap();
    let mut analysis = Analysis::new(&problem, reg, settings.material, settings.solver).unwrap();
    let mut group = c.benchmark_group("evaluate_640x320_ratio4");
    group.sample_size(10);
    group.bench_function("responses", |b| b.iter(|| analysis.evaluate(black_box(&comps), false).unwrap().compliance));
    group.bench_function("responses_and_gradients", |b| {
        b.iter(|| analysis.evaluate(black_box(&comps), true).unwrap().compliance)
    });
    group.finish();
}

fn mma(c: &mut Criterion) {
    let (_, comps, _) = cantilever_fixture([640, 320], 4);
    let x = flatten(&comps);
    let n = x.len();
    let lower: Vec<f64> = x.iter().map(|v| v - 1.0).collect();
    let upper: Vec<f64> = x.iter().map(|v| v + 1.0).collect();
    let df: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
    let dg: Vec<f64> = (0..n).map(|i| ((i * 104_729) % 5) as f64 * 0.1).collect();
    c.bench_function("mma_update_3456_variables", |b| {
        b.iter(|| {
            let mut st = MmaState::new(n, vec![0.1; n], MmaSettings::default()).unwrap();
            st.update(black_box(&x), &df, 0.05, &dg, &lower, &upper).unwrap().lambda
        })
    });
}

criterion_group!(benches, tdf, fea, evaluate, mma);
criterion_main!(benches);
