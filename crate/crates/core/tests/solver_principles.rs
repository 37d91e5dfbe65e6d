use pcapacity::network::{current_from_potential, dirichlet_energy, strength};
use pcapacity::sample::random_network_between;
use pcapacity::solver::{
    certify, node_update, p_harmonic_extension, solve_dirichlet, thomson_lower_bound, SolverConfig, WarmStart,
};
use pcapacity::{Exponent, Network, Potential};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p(v: f64) -> Exponent {
    Exponent::new(v).unwrap()
}

fn tight() -> SolverConfig {
    SolverConfig { tol_residual: 1e-11, ..SolverConfig::default() }
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.5), Just(2.0), Just(3.0), Just(4.0)]
}

fn network(seed: u64, max: usize) -> Network {
    random_network_between(&mut ChaCha8Rng::seed_from_u64(seed), 2, max, 0.1)
}

/// Gauss–Seidel fixed point by plain bisection on each vertex equation, as an
/// independent route to the same potential.
fn bisection_oracle(net: &Network, q: f64) -> Vec<f64> {
    let mut h: Vec<f64> = (0..net.num_vertices()).map(|x| if net.sink().contains(&x) { 1.0 } else { 0.0 }).collect();
    let free: Vec<usize> = net.free_vertices().collect();
    let eq = |h: &[f64], x: usize, t: f64| -> f64 {
        net.arcs(x).iter().map(|a| a.conductance * (h[a.head] - t).abs().powf(q - 1.0) * (h[a.head] - t).signum()).sum()
    };
    for _ in 0..20_000 {
        let mut moved: f64 = 0.0;
        for &x in &free {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if eq(&h, x, mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            moved = moved.max((h[x] - 0.5 * (lo + hi)).abs());
            h[x] = 0.5 * (lo + hi);
        }
        if moved < 1e-13 {
            break;
        }
    }
    h
}

#[test]
fn agrees_with_bisection_oracle() {
    for (seed, q) in [(1, 2.0), (2, 3.0), (3, 4.0), (4, 2.5)] {
        let net = network(seed, 12);
        let oracle = bisection_oracle(&net, q);
        let oracle_energy = dirichlet_energy(&net, &Potential::new(oracle), p(q)).unwrap();
        let sol = solve_dirichlet(&net, p(q), &tight()).unwrap();
        assert!((sol.report.capacity - oracle_energy).abs() <= 1e-9 * oracle_energy, "seed {seed}");
    }
}

#[test]
fn node_update_is_the_exact_minimiser() {
    let net = Network::new(4, [(0, 1, 1.0), (1, 2, 2.0), (1, 3, 0.5)], [0], [2, 3]).unwrap();
    let h = Potential::new(vec![0.0, 0.9, 1.0, 1.0]);
    for q in [1.5, 2.0, 3.0] {
        let t = node_update(&net, &h, 1, p(q), 1e-14).unwrap();
        let local = |s: f64| net.arcs(1).iter().map(|a| a.conductance * (h[a.head] - s).abs().powf(q)).sum::<f64>();
        for d in [1e-6, -1e-6, 1e-3, -1e-3] {
            assert!(local(t) <= local(t + d));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn maximum_principle(seed in any::<u64>(), q in exponent()) {
        let net = network(seed, 50);
        let sol = solve_dirichlet(&net, p(q), &tight()).unwrap();
        let h = sol.potential.values();
        let boundary: Vec<usize> = net.source().iter().chain(net.sink()).copied().collect();
        let (bmin, bmax) = boundary.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), &x| (l.min(h[x]), u.max(h[x])));
        for x in net.free_vertices() {
            prop_assert!(h[x] >= bmin - 1e-12 && h[x] <= bmax + 1e-12);
        }
    }

    #[test]
    fn comparison_is_an_affine_shift(seed in any::<u64>(), q in exponent(), delta in 0.01f64..0.5) {
        let net = network(seed, 30);
        let low = p_harmonic_extension(&net, p(q), &tight(), 0.0, 1.0).unwrap();
        let high = p_harmonic_extension(&net, p(q), &tight(), delta, 1.0 + delta).unwrap();
        for x in 0..net.num_vertices() {
            prop_assert!(high.potential[x] >= low.potential[x] - 1e-7);
            prop_assert!((high.potential[x] - low.potential[x] - delta).abs() <= 1e-7);
        }
    }

    #[test]
    fn duality_sandwich(seed in any::<u64>(), q in exponent()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network_between(&mut rng, 2, 40, 0.1);
        let sol = solve_dirichlet(&net, p(q), &tight()).unwrap();
        let lower = sol.report.lower_bound.unwrap();
        prop_assert!(lower <= sol.report.capacity * (1.0 + 1e-12), "{lower:e} > {:e}", sol.report.capacity);
        for _ in 0..5 {
            let f = Potential::from_fn(&net, |x| match net.role(x) {
                pcapacity::network::Role::Source => 0.0,
                pcapacity::network::Role::Sink => 1.0,
                pcapacity::network::Role::Free => rng.gen_range(-0.5..1.5),
            });
            prop_assert!(lower <= dirichlet_energy(&net, &f, p(q)).unwrap());
        }
    }

    #[test]
    fn unit_currents_agree_across_warm_starts(seed in any::<u64>(), q in exponent()) {
        let net = network(seed, 30);
        let a = solve_dirichlet(&net, p(q), &tight()).unwrap();
        let cfg = SolverConfig { warm_start: WarmStart::LogProfile, over_relaxation: Some(1.5), ..tight() };
        let b = solve_dirichlet(&net, p(q), &cfg).unwrap();
        let ia = current_from_potential(&net, &a.potential, p(q)).unwrap();
        let ib = current_from_potential(&net, &b.potential, p(q)).unwrap();
        let (sa, sb) = (strength(&net, &ia).unwrap(), strength(&net, &ib).unwrap());
        for (x, y) in ia.values().iter().zip(ib.values()) {
            prop_assert!((x / sa - y / sb).abs() <= 1e-6);
        }
    }

    #[test]
    fn energy_is_monotone(seed in any::<u64>(), q in exponent(), omega in prop::option::of(1.0f64..1.95)) {
        let net = network(seed, 40);
        let cfg = SolverConfig { over_relaxation: omega, ..tight() };
        let sol = solve_dirichlet(&net, p(q), &cfg).unwrap();
        for w in sol.energy_history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn certify_bounds_any_feasible_potential(seed in any::<u64>(), q in exponent()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network_between(&mut rng, 2, 25, 0.15);
        let h = Potential::from_fn(&net, |x| match net.role(x) {
            pcapacity::network::Role::Source => 0.0,
            pcapacity::network::Role::Sink => 1.0,
            pcapacity::network::Role::Free => rng.gen_range(0.0..1.0),
        });
        let r = certify(&net, p(q), &h).unwrap();
        let cap = solve_dirichlet(&net, p(q), &tight()).unwrap().report.capacity;
        prop_assert!(r.upper_bound >= cap * (1.0 - 1e-9));
        if let Some(lower) = r.lower_bound {
            prop_assert!(lower <= cap * (1.0 + 1e-9));
        }
        let theta = current_from_potential(&net, &h, p(q)).unwrap();
        if let Ok(lower) = thomson_lower_bound(&net, p(q), &theta) {
            prop_assert!(lower <= cap * (1.0 + 1e-9));
        }
    }
}
