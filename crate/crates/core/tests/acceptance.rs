//! Acceptance gate: one line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pcapacity::constants::{c_d_gamma, c_d_monte_carlo};
use pcapacity::continuum::{lyons_flow_on, strength_identity_check, QuadratureConfig};
use pcapacity::lattice::{build_lattice, capacity, capacity_with_options, solve_lattice, LatticeSpec};
use pcapacity::network::{dirichlet_energy, node_residual, Role};
use pcapacity::sample::random_network_between;
use pcapacity::solver::{certify, p1_capacity, solve_dirichlet, SolverConfig};
use pcapacity::verify;
use pcapacity::{Exponent, Network, Potential};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn exponent(p: f64) -> Exponent {
    Exponent::new(p).expect("valid exponent")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Gradient descent with backtracking on `Σ |f(i+1) - f(i)|^p` over the path
/// `-n..=n` with `f(0) = 0` and `f(±n) = 1`.
fn path_energy_by_descent(n: usize, p: f64) -> f64 {
    let len = 2 * n + 1;
    let energy = |f: &[f64]| f.windows(2).map(|w| (w[1] - w[0]).abs().powf(p)).sum::<f64>();
    let mut f: Vec<f64> = (0..len).map(|i| if i == n { 0.0 } else if i == 0 || i == len - 1 { 1.0 } else { 0.5 }).collect();
    let fixed = |i: usize| i == 0 || i == n || i == len - 1;
    let mut step = 0.1;
    for _ in 0..200_000 {
        let mut grad = vec![0.0; len];
        for i in 0..len - 1 {
            let d = f[i + 1] - f[i];
            let g = p * d.abs().powf(p - 1.0) * d.signum();
            grad[i + 1] += g;
            grad[i] -= g;
        }
        let norm2: f64 = (0..len).filter(|&i| !fixed(i)).map(|i| grad[i] * grad[i]).sum();
        if norm2 < 1e-28 {
            break;
        }
        let e0 = energy(&f);
        loop {
            let trial: Vec<f64> = (0..len).map(|i| if fixed(i) { f[i] } else { f[i] - step * grad[i] }).collect();
            if energy(&trial) <= e0 - 0.5 * step * norm2 {
                f = trial;
                step *= 1.5;
                break;
            }
            step *= 0.5;
            if step < 1e-18 {
                return energy(&f);
            }
        }
    }
    energy(&f)
}

fn criterion_1() -> Check {
    let mut worst: f64 = 0.0;
    for p in [1.5, 2.0, 3.0] {
        for n in [2usize, 5, 10, 50] {
            let exact = 2.0 * (n as f64).powf(1.0 - p);
            if n <= 5 {
                let oracle = path_energy_by_descent(n, p);
                ensure((oracle - exact).abs() <= 1e-8 * exact, || {
                    format!("descent oracle {oracle} disagrees with 2n^(1-p) = {exact} at n = {n}, p = {p}")
                })?;
            }
            let spec = LatticeSpec::new(1, n, exponent(p)).map_err(err)?;
            let (_, sol) = solve_lattice(&spec, &SolverConfig::for_lattice(&spec)).map_err(err)?;
            let rel = (sol.report.capacity - exact).abs() / exact;
            ensure(rel <= 1e-8, || format!("n = {n}, p = {p}: {} vs {exact}", sol.report.capacity))?;
            worst = worst.max(rel);
        }
    }
    Ok(format!("12 (p, n) pairs, max relative error {worst:.1e}"))
}

fn criterion_2() -> Check {
    let quad = QuadratureConfig::default();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut last_distance = f64::INFINITY;
    for n in [16usize, 32, 64, 128] {
        let spec = LatticeSpec::new(2, n, exponent(2.0)).map_err(err)?;
        let r = capacity(&spec, &SolverConfig::for_lattice(&spec), &quad).map_err(err)?;
        let cap = r.report.capacity;
        let lyons = r.lyons_lower.ok_or("no face-flux bound")?;
        let upper = r.test_function_upper.ok_or("no test-function bound")?;
        let scaled = (n as f64).ln() * cap;
        let distance = (scaled - 2.0 * PI).abs();
        rows.push(format!("n={n}: {lyons:.6} ≤ {cap:.6} ≤ {upper:.6}, (ln n)·Cap = {scaled:.4}"));
        if !r.report.converged {
            failures.push(format!("n = {n}: solver did not converge"));
        }
        if !(lyons <= cap && cap <= upper) {
            failures.push(format!("n = {n}: bracket {lyons} ≤ {cap} ≤ {upper} broken"));
        }
        if !(4.0..=8.5).contains(&scaled) {
            failures.push(format!("n = {n}: (ln n)·Cap = {scaled:.4} outside [4.0, 8.5]"));
        }
        if distance >= last_distance {
            failures.push(format!("n = {n}: |(ln n)·Cap - 2π| did not decrease"));
        }
        last_distance = distance;
    }
    if failures.is_empty() {
        Ok(rows.join("; "))
    } else {
        Err(format!("{} [{}]", failures.join("; "), rows.join("; ")))
    }
}

fn criterion_3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cfg = SolverConfig { tol_residual: 1e-11, ..SolverConfig::default() };
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let net = random_network_between(&mut rng, 2, 40, 0.1);
        let p = exponent([1.5, 2.0, 3.0][k % 3]);
        let sol = solve_dirichlet(&net, p, &cfg).map_err(err)?;
        let r = certify(&net, p, &sol.potential).map_err(err)?;
        let gap = r.duality_gap.ok_or_else(|| format!("network {k}: current fails the node law"))?;
        ensure(gap <= 1e-6 * r.capacity, || format!("network {k}, p = {p}: gap {gap:e}, capacity {}", r.capacity))?;
        worst = worst.max(gap / r.capacity);
    }
    Ok(format!("200 networks, max gap/capacity {worst:.1e}"))
}

fn criterion_4() -> Check {
    let quad = QuadratureConfig::with_points(16);
    // Γ(5/3)
    let gamma_5_3 = 0.902_745_292_950_933_6_f64;
    let mut rows = Vec::new();
    for d in [2usize, 3] {
        let spec = LatticeSpec::new(d, 20, exponent(d as f64)).map_err(err)?;
        let net = build_lattice(&spec).map_err(err)?;
        let theta = lyons_flow_on(&net, &spec, &quad).map_err(err)?;
        let residual = node_residual(&net, &theta).map_err(err)?;
        let worst = net.free_vertices().map(|x| residual[x].abs()).fold(0.0, f64::max);
        ensure(worst <= 1e-9, || format!("d = {d}: node residual {worst:e}"))?;
        let strength = residual[spec.origin()];
        let (target, tol) = if d == 2 { (4.0 * 2.0 * 1f64.atan(), 1e-8) } else { (12.0 * gamma_5_3.powi(3), 1e-5) };
        let rel = (strength - target).abs() / target;
        ensure(rel <= tol, || format!("d = {d}: origin strength {strength} vs {target}"))?;
        rows.push(format!("d={d}: residual {worst:.1e}, strength error {rel:.1e}"));
    }
    Ok(rows.join("; "))
}

fn criterion_5() -> Check {
    let mut rows = Vec::new();
    for d in 2..=5 {
        let exact = c_d_gamma(d).map_err(err)?;
        let (est, se) = c_d_monte_carlo(d, 1_000_000, 7).map_err(err)?;
        let sigmas = (est - exact).abs() / se;
        ensure(sigmas <= 3.0, || format!("d = {d}: Monte Carlo {est} ± {se} vs {exact}"))?;
        rows.push(format!("d={d} {sigmas:.2}σ"));
    }
    for d in [2, 3] {
        let (flux, exact) = strength_identity_check(20, d, &QuadratureConfig::default()).map_err(err)?;
        ensure((flux - exact).abs() <= 1e-5, || format!("d = {d}: flux {flux} vs {exact}"))?;
        rows.push(format!("d={d} flux error {:.1e}", (flux - exact).abs()));
    }
    Ok(rows.join(", "))
}

fn criterion_6() -> Check {
    let mut rows = Vec::new();
    for (d, p) in [(2usize, 1.5), (2, 2.0), (2, 3.0), (3, 3.0)] {
        let mut kappas = Vec::new();
        for n in [4usize, 8, 16, 32] {
            let spec = LatticeSpec::new(d, n, exponent(p)).map_err(err)?;
            let r = capacity_with_options(&spec, &SolverConfig::for_lattice(&spec), None).map_err(err)?;
            ensure(r.report.converged, || format!("d = {d}, p = {p}, n = {n}: solver did not converge"))?;
            kappas.push(r.kappa.ok_or("κ undefined")?);
        }
        let (lo, hi) = kappas.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &k| (l.min(k), h.max(k)));
        ensure(hi <= 3.0 * lo, || format!("d = {d}, p = {p}: κ = {kappas:?}"))?;
        rows.push(format!("(d={d}, p={p}) κ ∈ [{lo:.3}, {hi:.3}]"));
    }
    Ok(rows.join("; "))
}

/// Minimum of the `p = 1` energy over every `0/1` potential.
fn min_cut_by_enumeration(net: &Network) -> f64 {
    let free: Vec<usize> = net.free_vertices().collect();
    let one = exponent(1.0);
    let mut best = f64::INFINITY;
    for mask in 0u32..1 << free.len() {
        let mut f: Vec<f64> = (0..net.num_vertices()).map(|x| if net.role(x) == Role::Sink { 1.0 } else { 0.0 }).collect();
        for (i, &x) in free.iter().enumerate() {
            f[x] = (mask >> i & 1) as f64;
        }
        best = best.min(dirichlet_energy(net, &Potential::new(f), one).expect("valid potential"));
    }
    best
}

fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let net = random_network_between(&mut rng, 2, 12, 0.25);
        let r = p1_capacity(&net).map_err(err)?;
        let oracle = min_cut_by_enumeration(&net);
        ensure((r.capacity - oracle).abs() <= 1e-9 * oracle, || format!("network {k}: primal {} vs cut {oracle}", r.capacity))?;
        let rel = (r.dual - r.capacity).abs() / r.capacity;
        ensure(rel <= 1e-9, || format!("network {k}: primal {} vs dual {}", r.capacity, r.dual))?;
        worst = worst.max(rel);
    }
    Ok(format!("100 networks, max primal/dual mismatch {worst:.1e}"))
}

fn criterion_8() -> Check {
    let results = [
        verify::maximum_principle(1),
        verify::comparison_principle(1),
        verify::strength_uniqueness(1),
        verify::ohm_round_trip(1),
    ];
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| format!("{}: {}", r.name, r.detail)).collect();
    if failed.is_empty() {
        Ok(results.iter().map(|r| r.name).collect::<Vec<_>>().join(", "))
    } else {
        Err(failed.join("; "))
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check, Duration); 8] = [
        ("one-dimensional exact law", criterion_1, Duration::from_secs(1)),
        ("critical bracket d=2, p=2", criterion_2, Duration::from_secs(300)),
        ("duality gap at optimum", criterion_3, Duration::from_secs(60)),
        ("face-flux flow validity", criterion_4, Duration::from_secs(30)),
        ("constant cross-validation", criterion_5, Duration::from_secs(30)),
        ("regime normalisation", criterion_6, Duration::from_secs(600)),
        ("p=1 primal and dual", criterion_7, Duration::from_secs(60)),
        ("principle suite", criterion_8, Duration::from_secs(120)),
    ];
    let mut failed = 0;
    for (k, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *budget => Err(format!("{detail}; took {elapsed:.1?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("[PASS] criterion {}: {name}: {detail} ({elapsed:.2?})", k + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {detail} ({elapsed:.2?})", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
