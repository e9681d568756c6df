use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use virtphot::atom::AaBasis;
use virtphot::circuit::CircuitDesign;
use virtphot::design::{sweep, SweepGrid};
use virtphot::exec::Parallelism;
use virtphot::merit::merit_slice;
use virtphot::study::{StudyOptions, Truncation};

fn design_sweep(c: &mut Criterion) {
    let grid = SweepGrid { ec1_points: 8, u11_points: 8, ..SweepGrid::default() };
    let basis = AaBasis { check_convergence: false, ..AaBasis::default() };
    let mut g = c.benchmark_group("design_sweep_8x8");
    g.sample_size(10);
    for (name, par) in [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Auto)] {
        g.bench_with_input(BenchmarkId::from_parameter(name), &par, |b, &par| b.iter(|| sweep(&grid, &basis, par).unwrap()));
    }
    g.finish();
}

fn merit(c: &mut Criterion) {
    let designs: Vec<_> = (0..4).map(|k| CircuitDesign::new(0.9, 0.080 + 0.002 * k as f64, 0.5)).collect();
    let opts = StudyOptions { truncation: Truncation { n_atom: 10, n_fock: 12 }, ..StudyOptions::default() };
    let mut g = c.benchmark_group("merit_slice_4");
    g.sample_size(10);
    for (name, par) in [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Auto)] {
        g.bench_with_input(BenchmarkId::from_parameter(name), &par, |b, &par| b.iter(|| merit_slice(&designs, &opts, par)));
    }
    g.finish();
}

criterion_group!(benches, design_sweep, merit);
criterion_main!(benches);
