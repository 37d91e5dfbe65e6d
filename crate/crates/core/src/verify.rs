//! Self-checks run by `pcapacity verify`. Each suite returns a pass/fail
//! verdict with a one-line summary instead of panicking.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constants::{c_d_gamma, c_d_monte_carlo};
use crate::continuum::{lyons_flow_on, strength_identity_check, QuadratureConfig};
use crate::lattice::{build_lattice, capacity, solve_lattice, LatticeSpec};
use crate::network::{
    current_from_potential, dirichlet_energy, node_residual, potential_from_flow, strength, Exponent, Network,
    Potential, Role,
};
use crate::sample::random_network_between;
use crate::solver::{certify, p1_capacity, p_harmonic_extension, solve_dirichlet, SolverConfig, WarmStart};

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = std::result::Result<String, String>;

fn run(name: &'static str, body: impl FnOnce() -> Outcome) -> SuiteResult {
    match body() {
        Ok(detail) => SuiteResult { name, passed: true, detail },
        Err(detail) => SuiteResult { name, passed: false, detail },
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exponent(p: f64) -> Exponent {
    Exponent::new(p).expect("valid exponent")
}

fn tight() -> SolverConfig {
    SolverConfig { tol_residual: 1e-11, ..SolverConfig::default() }
}

const EXPONENTS: [f64; 4] = [1.5, 2.0, 3.0, 4.0];

/// A named check; the argument seeds any random inputs.
pub struct Suite {
    pub name: &'static str,
    pub run: fn(u64) -> SuiteResult,
}

pub const SUITES: &[Suite] = &[
    Suite { name: "maximum principle", run: maximum_principle },
    Suite { name: "comparison principle", run: comparison_principle },
    Suite { name: "strength uniqueness", run: strength_uniqueness },
    Suite { name: "Ohm round trip", run: ohm_round_trip },
    Suite { name: "energy monotone", run: energy_monotone },
    Suite { name: "brute force on small networks", run: |_| brute_force_small_networks() },
    Suite { name: "one-dimensional law", run: |_| one_dimensional_law() },
    Suite { name: "duality gap", run: duality_gap },
    Suite { name: "p = 1 duality", run: p1_duality },
    Suite { name: "Lyons flow", run: |_| lyons_flow_validity() },
    Suite { name: "constants", run: constants_agree },
    Suite { name: "lattice symmetry", run: |_| lattice_symmetry() },
];

/// Runs every suite with random inputs drawn from `seed`.
pub fn run_all(seed: u64) -> Vec<SuiteResult> {
    SUITES.iter().map(|s| (s.run)(seed)).collect()
}

pub fn maximum_principle(seed: u64) -> SuiteResult {
    run("maximum principle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..40 {
            let net = random_network_between(&mut rng, 2, 50, 0.08);
            let p = EXPONENTS[k % 4];
            let h = solve_dirichlet(&net, exponent(p), &SolverConfig::default()).map_err(|e| e.to_string())?.potential;
            let (lo, hi) = h.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), &v| (l.min(v), u.max(v)));
            ensure(lo >= -1e-12 && hi <= 1.0 + 1e-12, || format!("network {k}, p = {p}: range [{lo}, {hi}]"))?;
        }
        Ok("40 random networks, extremes on the boundary".into())
    })
}

pub fn comparison_principle(seed: u64) -> SuiteResult {
    run("comparison principle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let delta = 0.3;
        let mut worst: f64 = 0.0;
        for k in 0..20 {
            let net = random_network_between(&mut rng, 2, 40, 0.1);
            let p = exponent(EXPONENTS[k % 4]);
            let a = p_harmonic_extension(&net, p, &tight(), 0.0, 1.0).map_err(|e| e.to_string())?.potential;
            let b = p_harmonic_extension(&net, p, &tight(), delta, 1.0 + delta).map_err(|e| e.to_string())?.potential;
            for (x, y) in a.iter().zip(b.iter()) {
                ensure(*y >= x - 1e-7, || format!("network {k}: comparison fails ({x} > {y})"))?;
                worst = worst.max((y - x - delta).abs());
            }
        }
        ensure(worst <= 1e-7, || format!("affine shift off by {worst:e}"))?;
        Ok(format!("20 random networks, shift error {worst:.1e}"))
    })
}

fn unit_current(net: &Network, p: Exponent, h: &Potential) -> std::result::Result<Vec<f64>, String> {
    let current = current_from_potential(net, h, p).map_err(|e| e.to_string())?;
    let s = strength(net, &current).map_err(|e| e.to_string())?;
    Ok(current.values().iter().map(|v| v / s).collect())
}

pub fn strength_uniqueness(seed: u64) -> SuiteResult {
    run("strength uniqueness", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let mut worst: f64 = 0.0;
        for k in 0..20 {
            let net = random_network_between(&mut rng, 3, 40, 0.1);
            let p = exponent(EXPONENTS[k % 4]);
            let warm: Vec<f64> = (0..net.num_vertices()).map(|_| rng.gen()).collect();
            let a = solve_dirichlet(&net, p, &tight()).map_err(|e| e.to_string())?.potential;
            let cfg = SolverConfig { warm_start: WarmStart::User(Potential::new(warm)), ..tight() };
            let b = solve_dirichlet(&net, p, &cfg).map_err(|e| e.to_string())?.potential;
            let (ia, ib) = (unit_current(&net, p, &a)?, unit_current(&net, p, &b)?);
            worst = ia.iter().zip(&ib).fold(worst, |m, (x, y)| m.max((x - y).abs()));
        }
        ensure(worst <= 1e-6, || format!("unit currents differ by {worst:e}"))?;
        Ok(format!("20 random networks, max difference {worst:.1e}"))
    })
}

pub fn ohm_round_trip(seed: u64) -> SuiteResult {
    run("Ohm round trip", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let mut worst: f64 = 0.0;
        for k in 0..40 {
            let net = random_network_between(&mut rng, 2, 40, 0.1);
            let p = exponent(EXPONENTS[k % 4]);
            let h = Potential::from_fn(&net, |_| rng.gen_range(-2.0..2.0));
            let theta = current_from_potential(&net, &h, p).map_err(|e| e.to_string())?;
            let back = potential_from_flow(&net, &theta, p, 0, h[0]).map_err(|e| e.to_string())?;
            worst = h.iter().zip(back.iter()).fold(worst, |m, (x, y)| m.max((x - y).abs()));
        }
        ensure(worst <= 1e-9, || format!("round trip error {worst:e}"))?;
        Ok(format!("40 random potentials, max error {worst:.1e}"))
    })
}

pub fn energy_monotone(seed: u64) -> SuiteResult {
    run("energy monotone", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 4);
        for k in 0..20 {
            let net = random_network_between(&mut rng, 2, 50, 0.08);
            let p = exponent(EXPONENTS[k % 4]);
            let cfg = SolverConfig { over_relaxation: Some(1.6), ..SolverConfig::default() };
            let hist = solve_dirichlet(&net, p, &cfg).map_err(|e| e.to_string())?.energy_history;
            for (i, w) in hist.windows(2).enumerate() {
                ensure(w[1] <= w[0] + 1e-12, || format!("network {k}: energy rose at sweep {i}"))?;
            }
        }
        Ok("20 random networks".into())
    })
}

/// Minimises the energy by compass search over the free vertices: an oracle
/// that shares no code with the relaxation solver.
pub fn compass_search_capacity(net: &Network, p: Exponent) -> f64 {
    let free: Vec<usize> = net.free_vertices().collect();
    let mut f: Vec<f64> = (0..net.num_vertices())
        .map(|x| match net.role(x) {
            Role::Source => 0.0,
            Role::Sink => 1.0,
            Role::Free => 0.5,
        })
        .collect();
    let energy = |f: &[f64]| -> f64 { net.edges().iter().map(|e| e.conductance * (f[e.u] - f[e.v]).abs().powf(p.value())).sum() };
    let mut best = energy(&f);
    let mut step = 0.25;
    while step > 1e-11 {
        let mut improved = false;
        for &x in &free {
            for dir in [step, -step] {
                let old = f[x];
                f[x] = old + dir;
                let e = energy(&f);
                if e < best {
                    best = e;
                    improved = true;
                } else {
                    f[x] = old;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

/// Every connected graph on `n` labelled vertices, unit conductances, source
/// `{0}` and sink `{n - 1}`.
pub fn all_small_networks(n: usize) -> Vec<Network> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    (0u32..1 << pairs.len())
        .filter_map(|mask| {
            let edges = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &(u, v))| (u, v, 1.0));
            Network::new(n, edges, [0], [n - 1]).ok()
        })
        .collect()
}

pub fn brute_force_small_networks() -> SuiteResult {
    run("brute force on small networks", || {
        let mut count = 0;
        let mut worst: f64 = 0.0;
        for n in 2..=5 {
            for net in all_small_networks(n) {
                for p in [1.5, 2.0, 3.0] {
                    let cap = solve_dirichlet(&net, exponent(p), &tight()).map_err(|e| e.to_string())?.report.capacity;
                    let oracle = compass_search_capacity(&net, exponent(p));
                    worst = worst.max((cap - oracle).abs());
                    count += 1;
                }
            }
        }
        ensure(worst <= 1e-6, || format!("solver and oracle differ by {worst:e}"))?;
        Ok(format!("{count} solves, max difference {worst:.1e}"))
    })
}

pub fn one_dimensional_law() -> SuiteResult {
    run("one-dimensional law", || {
        for p in [1.5, 2.0, 3.0] {
            for n in [2, 5, 10, 50] {
                let spec = LatticeSpec::new(1, n, exponent(p)).map_err(|e| e.to_string())?;
                let cap = capacity(&spec, &SolverConfig::for_lattice(&spec), &QuadratureConfig::default())
                    .map_err(|e| e.to_string())?
                    .report
                    .capacity;
                let exact = 2.0 * (n as f64).powf(1.0 - p);
                ensure((cap - exact).abs() <= 1e-8 * exact, || format!("n = {n}, p = {p}: {cap} vs {exact}"))?;
            }
        }
        Ok("cap = 2 n^(1-p) for 12 pairs".into())
    })
}

pub fn duality_gap(seed: u64) -> SuiteResult {
    run("duality gap", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 5);
        let mut worst: f64 = 0.0;
        for k in 0..50 {
            let net = random_network_between(&mut rng, 2, 40, 0.1);
            let p = exponent([1.5, 2.0, 3.0][k % 3]);
            let sol = solve_dirichlet(&net, p, &tight()).map_err(|e| e.to_string())?;
            let r = certify(&net, p, &sol.potential).map_err(|e| e.to_string())?;
            let gap = r.duality_gap.ok_or_else(|| format!("network {k}: no lower bound"))?;
            ensure(gap >= -1e-9, || format!("network {k}: negative gap {gap:e}"))?;
            worst = worst.max(gap / r.upper_bound);
        }
        ensure(worst <= 1e-6, || format!("relative gap {worst:e}"))?;
        Ok(format!("50 random networks, max relative gap {worst:.1e}"))
    })
}

/// Minimum over all `0/1` potentials of the `p = 1` energy.
pub fn exhaustive_min_cut(net: &Network) -> f64 {
    let free: Vec<usize> = net.free_vertices().collect();
    assert!(free.len() < 30);
    let one = exponent(1.0);
    let mut f: Vec<f64> = (0..net.num_vertices()).map(|x| if net.role(x) == Role::Sink { 1.0 } else { 0.0 }).collect();
    (0u64..1 << free.len())
        .map(|mask| {
            for (i, &x) in free.iter().enumerate() {
                f[x] = (mask >> i & 1) as f64;
            }
            dirichlet_energy(net, &Potential::new(f.clone()), one).expect("valid potential")
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn p1_duality(seed: u64) -> SuiteResult {
    run("p = 1 duality", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 6);
        for k in 0..50 {
            let net = random_network_between(&mut rng, 2, 12, 0.25);
            let r = p1_capacity(&net).map_err(|e| e.to_string())?;
            let cut = exhaustive_min_cut(&net);
            ensure((r.capacity - cut).abs() <= 1e-9 * cut, || format!("network {k}: {} vs cut {cut}", r.capacity))?;
            ensure((r.dual - cut).abs() <= 1e-9 * cut, || format!("network {k}: dual {} vs cut {cut}", r.dual))?;
        }
        Ok("50 random networks".into())
    })
}

pub fn lyons_flow_validity() -> SuiteResult {
    run("Lyons flow", || {
        let spec = LatticeSpec::new(2, 10, exponent(2.0)).map_err(|e| e.to_string())?;
        let net = build_lattice(&spec).map_err(|e| e.to_string())?;
        let flow = lyons_flow_on(&net, &spec, &QuadratureConfig::with_points(16)).map_err(|e| e.to_string())?;
        let res = node_residual(&net, &flow).map_err(|e| e.to_string())?;
        let worst = net.free_vertices().map(|x| res[x].abs()).fold(0.0, f64::max);
        ensure(worst <= 1e-9, || format!("node residual {worst:e}"))?;
        let s = strength(&net, &flow).map_err(|e| e.to_string())?;
        ensure((s - 2.0 * PI).abs() <= 1e-8, || format!("strength {s} vs 2π"))?;
        Ok(format!("d = 2, n = 10: node residual {worst:.1e}"))
    })
}

pub fn constants_agree(seed: u64) -> SuiteResult {
    run("constants", || {
        let mut parts = Vec::new();
        for d in 2..=5 {
            let exact = c_d_gamma(d).map_err(|e| e.to_string())?;
            let (est, se) = c_d_monte_carlo(d, 1_000_000, seed).map_err(|e| e.to_string())?;
            ensure((est - exact).abs() <= 3.0 * se, || format!("d = {d}: Monte Carlo {est} ± {se} vs {exact}"))?;
            parts.push(format!("d={d} {:.2}σ", (est - exact).abs() / se));
        }
        for d in [2, 3] {
            let (flux, c) = strength_identity_check(10, d, &QuadratureConfig::default()).map_err(|e| e.to_string())?;
            ensure((flux - c).abs() <= 1e-5, || format!("d = {d}: flux {flux} vs {c}"))?;
        }
        Ok(parts.join(", "))
    })
}

pub fn lattice_symmetry() -> SuiteResult {
    run("lattice symmetry", || {
        for (d, n, p) in [(2, 8, 3.0), (3, 4, 2.0)] {
            let spec = LatticeSpec::new(d, n, exponent(p)).map_err(|e| e.to_string())?;
            let cfg = SolverConfig { tol_residual: 1e-11, ..SolverConfig::for_lattice(&spec) };
            let (_, sol) = solve_lattice(&spec, &cfg).map_err(|e| e.to_string())?;
            let h = sol.potential;
            for i in 0..spec.num_vertices() as usize {
                let x = spec.coords(i);
                let mut image: Vec<i64> = x.iter().rev().copied().collect();
                image[0] = -image[0];
                let j = spec.index(&image).expect("image stays in the box");
                ensure((h[i] - h[j]).abs() <= 1e-7, || format!("{x:?} vs {image:?}: {} vs {}", h[i], h[j]))?;
            }
        }
        Ok("d = 2 and d = 3 boxes".into())
    })
}
