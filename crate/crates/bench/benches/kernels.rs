use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use wavecheck::{
    dealiased_product, fit_modal_potential, make_grid, solve_kinematic_nonlocal, step_rk4,
    GridParams, KinematicSolver, PeriodicGrid, SurfaceField, SurfaceState,
};

fn grid(n: usize) -> PeriodicGrid {
    make_grid(GridParams {
        nx: n,
        ny: n,
        ..GridParams::default()
    })
    .unwrap()
}

fn wave(grid: &PeriodicGrid) -> SurfaceState {
    let eta = SurfaceField::from_fn(grid, |x, y| 0.01 * (x.cos() + (x + y).sin()));
    let q = SurfaceField::from_fn(grid, |x, y| 0.01 * (y.sin() - (x - y).cos()));
    SurfaceState::new(eta, q, 0.0)
}

fn kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("kernels");
    g.sample_size(10);
    for n in [8, 16] {
        let grid = grid(n);
        let s = wave(&grid);
        g.bench_with_input(BenchmarkId::new("nonlocal_solve", n), &s, |b, s| {
            b.iter(|| solve_kinematic_nonlocal(&grid, black_box(s)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("collocation_fit", n), &s, |b, s| {
            b.iter(|| fit_modal_potential(&grid, black_box(&s.eta), &s.q).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("dealiased_product", n), &s, |b, s| {
            b.iter(|| dealiased_product(&grid, black_box(&s.eta), &s.q))
        });
        g.bench_with_input(BenchmarkId::new("rk4_step", n), &s, |b, s| {
            b.iter(|| step_rk4(&grid, black_box(s), 1e-3, KinematicSolver::Nonlocal).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
