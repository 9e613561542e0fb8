//! Acceptance criteria 1–10, one PASS/FAIL line each. Exits non-zero if any
//! criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use pointwave::config::RunConfig;
use pointwave::kernels::goursat::check_iteration_bound;
use pointwave::kernels::{kernel_residual, solve_kernels, solve_inverse_kernels, solve_subdomain, KernelOptions, KernelSet};
use pointwave::pipeline::Pipeline;
use pointwave::presets::{self, Preset};
use pointwave::problem::{to_left_form, Side};
use pointwave::sim::{commutation_error, fit_decay, simulate_plant, simulate_target, SimConfig};
use pointwave::state::{difference, random_smooth_state, state_norm, PlantState, TargetState};
use pointwave::transform::{check_compatibility, pullback, Transform};
use rand::SeedableRng;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn kernels(p: &Preset, n1: usize, n2: usize) -> KernelSet {
    let (spec, des) = p.build().unwrap();
    solve_kernels(&spec, &des, &KernelOptions { n1, n2, ..Default::default() }).unwrap()
}

fn bessel_oracle() -> Outcome {
    let start = Instant::now();
    let ks = kernels(&presets::undamped(0.5, 4.0), 201, 201);
    let secs = start.elapsed().as_secs_f64();
    let (mut ek, mut es) = (0.0_f64, 0.0_f64);
    for s in [&ks.sub1, &ks.sub2] {
        let (k, sv) = s.bessel_errors(4.0);
        ek = ek.max(k);
        es = es.max(sv);
    }
    (
        ek <= 1e-4 && es <= 1e-12 && secs < 30.0,
        format!("sup|k - Bessel| = {ek:.2e} (<= 1e-4), sup|s| = {es:.1e} (<= 1e-12), {secs:.2} s (< 30 s)"),
    )
}

fn boundary_traces() -> Outcome {
    let configs = [
        ("generic", presets::generic()),
        ("closed-loop", presets::closed_loop()),
        ("mirrored", presets::symmetric()),
        ("undamped", presets::undamped(0.4, 4.0)),
    ];
    let mut worst = 0.0_f64;
    for (_, p) in &configs {
        let ks = kernels(p, 161, 241);
        for s in [&ks.sub1, &ks.sub2] {
            let e = s.trace_errors();
            worst = worst.max(e.0.max(e.1).max(e.2).max(e.3));
        }
    }
    (worst <= 1e-9, format!("max trace error over {} configs = {worst:.1e} (<= 1e-9)", configs.len()))
}

fn residual_order() -> Outcome {
    let (spec, des) = presets::generic().build().unwrap();
    let mut ratios = Vec::new();
    for side in [Side::Left, Side::Right] {
        let res: Vec<f64> = [65, 129, 257]
            .iter()
            .map(|&n| {
                let sk = solve_subdomain(to_left_form(&spec, &des, side).unwrap(), n, &Default::default()).unwrap();
                kernel_residual(sk.k(), sk.s(), &sk.problem).unwrap().max()
            })
            .collect();
        ratios.push(res[0] / res[1]);
        ratios.push(res[1] / res[2]);
    }
    let ok = ratios.iter().all(|r| (3.0..=5.0).contains(r));
    (ok, format!("residual ratios {:?} (each in [3, 5])", ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>()))
}

fn iteration_bound() -> Outcome {
    let mut worst = 0.0_f64;
    let mut ok = true;
    for p in [presets::generic(), presets::closed_loop()] {
        let ks = kernels(&p, 201, 301);
        for s in [&ks.sub1, &ks.sub2] {
            let b = check_iteration_bound(&s.solution.bound, 5);
            ok &= b.pass;
            worst = worst.max(b.worst_ratio());
        }
    }
    (ok, format!("worst observed/bound ratio for terms n <= 5 = {worst:.3} (<= 1)"))
}

fn roundtrip_error(n: usize) -> Vec<f64> {
    let p = presets::generic();
    let (spec, des) = p.build().unwrap();
    let opts = KernelOptions::aligned_with(n, p.xi).unwrap();
    let ks = solve_kernels(&spec, &des, &opts).unwrap();
    let inv = solve_inverse_kernels(&spec, &des, &ks, &opts).unwrap();
    let fwd = Transform::new(&ks, opts.n1, opts.n2).unwrap();
    let bwd = Transform::new(&inv, opts.n1, opts.n2).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    (0..20)
        .map(|_| {
            let x = random_smooth_state(&mut rng, p.xi, opts.n1, opts.n2, 6).unwrap();
            let back: PlantState = bwd.backward(&fwd.forward(&x).unwrap()).unwrap();
            state_norm(&difference(&back, &x).unwrap()) / state_norm(&x)
        })
        .collect()
}

fn roundtrip() -> Outcome {
    let coarse = roundtrip_error(401);
    let fine = roundtrip_error(801);
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let each_better = coarse.iter().zip(&fine).all(|(c, f)| f < c);
    (
        max(&coarse) <= 1e-3 && each_better,
        format!(
            "max relative error {:.2e} at n=401 (<= 1e-3), {:.2e} at n=801; every state improves: {each_better}",
            max(&coarse),
            max(&fine)
        ),
    )
}

fn run_cfg(n: usize, t: f64) -> SimConfig {
    SimConfig { n, t_final: t, sample_every: 1, ..Default::default() }
}

fn target_decay() -> Outcome {
    let (_, des) = presets::closed_loop().build().unwrap();
    let init = TargetState::from_fns(0.4, 161, 241, |x| (PI * x).sin(), |x| -(PI * x).sin()).unwrap();
    let start = Instant::now();
    let tr = simulate_target(&des, 0.4, &init, &run_cfg(401, 8.0)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let f = fit_decay(&tr, 0.5).unwrap();
    (
        (0.9..=1.1).contains(&f.rate) && f.r_squared >= 0.99 && secs < 10.0,
        format!("rate {:.4} (in [0.9, 1.1]), r^2 {:.4} (>= 0.99), {secs:.2} s (< 10 s)", f.rate, f.r_squared),
    )
}

fn open_loop_growth() -> Outcome {
    let (spec, _) = presets::closed_loop().build().unwrap();
    let init = PlantState::from_fns(0.4, 161, 241, |x| (PI * x).sin(), |_| 0.0).unwrap();
    let start = Instant::now();
    let tr = simulate_plant(&spec, None, &init, &run_cfg(401, 8.0)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let f = fit_decay(&tr, 0.5).unwrap();
    (f.rate <= -0.2 && secs < 10.0, format!("rate {:.4} (<= -0.2), {secs:.2} s (< 10 s)", f.rate))
}

fn closed_loop_pipeline() -> Pipeline {
    let cfg = RunConfig::from_json(include_str!("../configs/closed_loop.json")).unwrap();
    Pipeline::new(cfg).unwrap()
}

fn closed_loop() -> Outcome {
    let p = closed_loop_pipeline();
    let ks = p.kernels().unwrap();
    let inv = p.inverse_kernels(&ks).unwrap();
    let (fwd, bwd) = p.transforms(&ks, &inv).unwrap();
    let (init, target) = p.matched_initial(&fwd, &bwd).unwrap();
    let cfg = p.sim_config();
    let g = p.gains(&ks).unwrap();
    let plant = simulate_plant(&p.spec, Some(&g), &init, &cfg).unwrap();
    let tgt = simulate_target(&p.design, p.xi, &target, &cfg).unwrap();
    let rate = fit_decay(&plant, 0.5).unwrap().rate;
    let rel = commutation_error(&fwd, &plant, &tgt).unwrap() / state_norm(&init);
    (rate >= 0.8 && rel <= 0.05, format!("closed-loop rate {rate:.4} (>= 0.8), commutation {rel:.3e} x |init| (<= 0.05)"))
}

fn compatibility() -> Outcome {
    let p = closed_loop_pipeline();
    let ks = p.kernels().unwrap();
    let inv = p.inverse_kernels(&ks).unwrap();
    let (fwd, bwd) = p.transforms(&ks, &inv).unwrap();
    let (n1, n2) = p.grids().unwrap();
    let smooth = TargetState::from_fns(p.xi, n1, n2, |x| (PI * x).sin(), |x| -(PI * x).sin()).unwrap();
    let good = check_compatibility(&ks, &pullback(&fwd, &bwd, &smooth).unwrap()).unwrap();
    let mut jumped = smooth.clone();
    let xi = p.xi;
    jumped.w2 = pointwave::field::ScalarField::from_fn(*smooth.w2.grid(), |x| (PI * x).sin() + 0.1 * (1.0 - x) / (1.0 - xi));
    let bad = check_compatibility(&ks, &pullback(&fwd, &bwd, &jumped).unwrap()).unwrap();
    let ok = good.pass && !bad.pass && (bad.c0_jump - 0.1).abs() <= 1e-6;
    (
        ok,
        format!(
            "pullback data: jumps ({:.1e}, {:.1e}) pass={}; injected 0.1: reported {:.9} pass={}",
            good.c0_jump, good.c1_jump, good.pass, bad.c0_jump, bad.pass
        ),
    )
}

fn conservation() -> Outcome {
    let p = Preset {
        xi: 0.4,
        plant: Default::default(),
        design: Default::default(),
        omega: 1.0,
    };
    let (spec, des) = p.build().unwrap();
    let drift = |e: &[f64]| e.iter().map(|v| (v - e[0]).abs() / e[0]).fold(0.0, f64::max);
    let plant = simulate_plant(
        &spec,
        None,
        &PlantState::from_fns(0.4, 161, 241, |x| (PI * x).sin(), |x| (2.0 * PI * x).sin()).unwrap(),
        &run_cfg(401, 4.0),
    )
    .unwrap();
    let target = simulate_target(
        &des,
        0.4,
        &TargetState::from_fns(0.4, 161, 241, |x| (PI * x).sin(), |x| (2.0 * PI * x).sin()).unwrap(),
        &run_cfg(401, 4.0),
    )
    .unwrap();
    let (a, b) = (drift(&plant.energies), drift(&target.energies));
    (a <= 0.01 && b <= 0.01, format!("energy drift plant {a:.2e}, target {b:.2e} (<= 1e-2)"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("Bessel oracle", bessel_oracle),
        ("boundary traces", boundary_traces),
        ("residual order", residual_order),
        ("iteration bound", iteration_bound),
        ("roundtrip", roundtrip),
        ("target decay", target_decay),
        ("open-loop growth", open_loop_growth),
        ("closed-loop stabilization", closed_loop),
        ("compatibility checks", compatibility),
        ("energy conservation", conservation),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (ok, detail) = f();
        println!("{} {:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
        if !ok {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
