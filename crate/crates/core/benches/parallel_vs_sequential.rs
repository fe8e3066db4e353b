use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use landis_core::builders::{build_lattice, LatticeSpec};
use landis_core::fractional::{fractional_weights, QuadSpec};
use landis_core::graph::apply_laplacian_with;
use landis_core::lattice_norms::{default_a2_grid, verify_norm_lemmas};
use landis_core::linalg::{DirichletOperator, SymOperator};
use landis_core::resolvent::{green_dirichlet_with, GreenOptions};
use landis_core::{Execution, VertexFunction};

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn operator_apply(c: &mut Criterion) {
    let g = build_lattice(&LatticeSpec::new(3, 40)).unwrap();
    let f = VertexFunction((0..g.len()).map(|i| (i % 17) as f64).collect());
    let mut group = c.benchmark_group("laplacian_z3_r40");
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| apply_laplacian_with(exec, &g, &f).unwrap())
        });
    }
    group.finish();

    let op = DirichletOperator::with_exec(Execution::Parallel, &g, &vec![1.0; g.len()]).unwrap();
    let x = vec![1.0; op.dim()];
    let mut y = vec![0.0; op.dim()];
    let mut group = c.benchmark_group("dirichlet_apply_z3_r40");
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| op.apply(exec, &x, &mut y)));
    }
    group.finish();
}

fn green_solve(c: &mut Criterion) {
    let g = build_lattice(&LatticeSpec::new(3, 24)).unwrap();
    let o = g.labels().index_of(&[0, 0, 0]).unwrap();
    let opts = GreenOptions::default();
    let mut group = c.benchmark_group("green_z3_r24_cg");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| green_dirichlet_with(exec, &g, o, 1.0, &opts).unwrap())
        });
    }
    group.finish();
}

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("norm_lemmas_d3_r8");
    group.sample_size(10);
    let grid = default_a2_grid();
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| verify_norm_lemmas(exec, 3, 8, &grid).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("fractional_weights_d2_rw10");
    group.sample_size(10);
    let quad = QuadSpec {
        dual_check: false,
        ..QuadSpec::default()
    };
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| fractional_weights(exec, 2, 0.5, 10, &quad).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, operator_apply, green_solve, sweeps);
criterion_main!(benches);
