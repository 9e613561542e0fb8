//! Sequential vs rayon execution on the kernel solve and the transform.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;

use pointwave::exec::Exec;
use pointwave::kernels::{solve_kernels, KernelOptions};
use pointwave::presets;
use pointwave::state::{random_smooth_state, PlantState};
use pointwave::transform::Transform;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn kernel_solve(c: &mut Criterion) {
    let p = presets::generic();
    let (spec, des) = p.build().unwrap();
    let mut g = c.benchmark_group("kernel_solve");
    g.sample_size(10);
    for n in [201, 401] {
        for (name, exec) in MODES {
            let mut opts = KernelOptions::aligned_with(n, p.xi).unwrap();
            opts.goursat.exec = exec;
            g.bench_with_input(BenchmarkId::new(name, n), &opts, |b, opts| {
                b.iter(|| solve_kernels(&spec, &des, opts).unwrap())
            });
        }
    }
    g.finish();
}

fn transform_batch(c: &mut Criterion) {
    let p = presets::generic();
    let (spec, des) = p.build().unwrap();
    let opts = KernelOptions::aligned_with(801, p.xi).unwrap();
    let ks = solve_kernels(&spec, &des, &opts).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let states: Vec<PlantState> = (0..8)
        .map(|_| random_smooth_state(&mut rng, p.xi, opts.n1, opts.n2, 6).unwrap())
        .collect();
    let mut g = c.benchmark_group("transform_batch");
    for (name, exec) in MODES {
        let t = Transform::new(&ks, opts.n1, opts.n2).unwrap().with_exec(exec);
        g.bench_function(name, |b| {
            b.iter(|| {
                for s in &states {
                    let _: pointwave::state::TargetState = t.forward(s).unwrap();
                }
            })
        });
    }
    g.finish();
}

criterion_group!(benches, kernel_solve, transform_batch);
criterion_main!(benches);
