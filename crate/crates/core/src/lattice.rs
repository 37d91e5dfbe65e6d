//! The boxes `D_n = {x ∈ Z^d : |x|_∞ ≤ n}` with unit conductances, source
//! `{0}` and sink `∂D_n = {|x|_∞ = n}`.
//!
//! Vertices are numbered row-major over `[-n, n]^d`, last coordinate fastest.

use log::info;
use serde::Serialize;

use crate::constants::conjugate_norm;
use crate::continuum::{lyons_lower_bound_on, q_norm, QuadratureConfig};
use crate::error::{Error, Result};
use crate::network::{dirichlet_energy, Exponent, Network, Potential, Role, VertexId};
use crate::solver::{solve_dirichlet, CapacityReport, DirichletSolution, SolverConfig, WarmStart};

pub const DEFAULT_VERTEX_BUDGET: usize = 8_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    dim: usize,
    radius: usize,
    p: Exponent,
}

impl LatticeSpec {
    pub fn new(dim: usize, radius: usize, p: Exponent) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if radius == 0 {
            return Err(Error::InvalidArgument("radius must be at least 1".into()));
        }
        Ok(LatticeSpec { dim, radius, p })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// `(2n + 1)^d`, saturating.
    pub fn num_vertices(&self) -> u128 {
        (self.side() as u128).saturating_pow(self.dim as u32)
    }

    pub fn check_budget(&self, budget: usize) -> Result<()> {
        let required = self.num_vertices();
        if required > budget as u128 {
            return Err(Error::BudgetExceeded { required, budget });
        }
        Ok(())
    }

    pub fn coords(&self, mut index: VertexId) -> Vec<i64> {
        let side = self.side();
        let mut x = vec![0; self.dim];
        for k in (0..self.dim).rev() {
            x[k] = (index % side) as i64 - self.radius as i64;
            index /= side;
        }
        x
    }

    pub fn index(&self, x: &[i64]) -> Option<VertexId> {
        if x.len() != self.dim {
            return None;
        }
        let n = self.radius as i64;
        x.iter().try_fold(0usize, |acc, &v| (-n..=n).contains(&v).then(|| acc * self.side() + (v + n) as usize))
    }

    pub fn origin(&self) -> VertexId {
        (self.num_vertices() as usize - 1) / 2
    }

    fn is_critical(&self) -> bool {
        self.p.value() == self.dim as f64
    }
}

pub fn build_lattice(spec: &LatticeSpec) -> Result<Network> {
    build_lattice_with_budget(spec, DEFAULT_VERTEX_BUDGET)
}

pub fn build_lattice_with_budget(spec: &LatticeSpec, budget: usize) -> Result<Network> {
    spec.check_budget(budget)?;
    let total = spec.num_vertices() as usize;
    let side = spec.side();
    let n = spec.radius as i64;
    let strides: Vec<usize> = (0..spec.dim).map(|k| side.pow((spec.dim - 1 - k) as u32)).collect();
    let mut edges = Vec::with_capacity(spec.dim * total);
    let mut sink = Vec::new();
    for i in 0..total {
        let x = spec.coords(i);
        if x.iter().any(|v| v.abs() == n) {
            sink.push(i);
        }
        for (k, &stride) in strides.iter().enumerate() {
            if x[k] < n {
                edges.push((i, i + stride, 1.0));
            }
        }
    }
    Network::new(total, edges, [spec.origin()], sink)
}

/// The regime normalisation: `cap` for `p < d`, `(log n)^{d-1} cap` for
/// `p = d` and `n^{p-d} cap` for `p > d`.
pub fn kappa(spec: &LatticeSpec, cap: f64) -> Result<f64> {
    if !(cap > 0.0 && cap.is_finite()) {
        return Err(Error::InvalidArgument(format!("capacity must be positive and finite, got {cap}")));
    }
    let (d, n, p) = (spec.dim as f64, spec.radius as f64, spec.p.value());
    if p < d {
        Ok(cap)
    } else if p == d {
        if spec.radius < 2 {
            return Err(Error::InvalidArgument("κ needs n ≥ 2 when p = d".into()));
        }
        Ok(n.ln().powi(spec.dim as i32 - 1) * cap)
    } else {
        Ok(n.powf(p - d) * cap)
    }
}

/// `log(d |x|_q + 1) / log n`, clipped to `[0, 1]` and set to `1` on the sink;
/// `|x|_q` is `|x|` when `d = 1`.
pub fn test_function_potential(spec: &LatticeSpec, net: &Network) -> Result<Potential> {
    if spec.radius < 2 {
        return Err(Error::InvalidArgument("the test function needs n ≥ 2".into()));
    }
    let d = spec.dim;
    let q = if d == 1 { 1.0 } else { conjugate_norm(d) };
    let log_n = (spec.radius as f64).ln();
    let mut values = Vec::with_capacity(net.num_vertices());
    for i in 0..net.num_vertices() {
        let x: Vec<f64> = spec.coords(i).iter().map(|&v| v as f64).collect();
        let raw = (d as f64 * q_norm(&x, q) + 1.0).ln() / log_n;
        let value = if net.role(i) == Role::Sink {
            if raw < 1.0 {
                return Err(Error::Infeasible(format!("test function is {raw} < 1 at sink vertex {x:?}")));
            }
            1.0
        } else {
            raw.clamp(0.0, 1.0)
        };
        values.push(value);
    }
    Ok(Potential::new(values))
}

/// The test function and its energy, an upper bound on the capacity.
pub fn upper_bound_test_function(spec: &LatticeSpec) -> Result<(Potential, f64)> {
    if !spec.is_critical() {
        return Err(Error::InvalidArgument(format!("the test function bound needs p = d, got p = {}", spec.p)));
    }
    let net = build_lattice(spec)?;
    let f = test_function_potential(spec, &net)?;
    let energy = dirichlet_energy(&net, &f, spec.p)?;
    Ok((f, energy))
}

/// `2 / (1 + sin(π / 2n))`, the optimal SOR factor for the discrete Laplacian
/// on a box of side `2n`.
pub fn lattice_omega(radius: usize) -> f64 {
    2.0 / (1.0 + (std::f64::consts::PI / (2.0 * radius as f64)).sin())
}

impl SolverConfig {
    /// Defaults for `D_n`: logarithmic warm start and over-relaxation.
    pub fn for_lattice(spec: &LatticeSpec) -> Self {
        SolverConfig {
            warm_start: WarmStart::LogProfile,
            over_relaxation: Some(lattice_omega(spec.radius)),
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LatticeReport {
    pub dim: usize,
    pub radius: usize,
    pub p: f64,
    pub report: CapacityReport,
    pub kappa: Option<f64>,
    /// Thomson bound of the face-flux flow, when `p = d ≥ 2` and `n ≥ 2`.
    pub lyons_lower: Option<f64>,
    /// Energy of the logarithmic test function, when `p = d` and `n ≥ 2`.
    pub test_function_upper: Option<f64>,
}

impl LatticeReport {
    /// The larger of the face-flux bound and the Thomson bound of the computed current.
    pub fn lower(&self) -> Option<f64> {
        match (self.report.lower_bound, self.lyons_lower) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }

    /// Best certified upper bound.
    pub fn upper(&self) -> f64 {
        self.test_function_upper.map_or(self.report.upper_bound, |t| t.min(self.report.upper_bound))
    }
}

/// Solves on `D_n`. A `LogProfile` warm start uses the logarithmic test
/// function.
pub fn solve_lattice(spec: &LatticeSpec, cfg: &SolverConfig) -> Result<(Network, DirichletSolution)> {
    let net = build_lattice(spec)?;
    let mut cfg = cfg.clone();
    if cfg.warm_start == WarmStart::LogProfile {
        cfg.warm_start = if spec.radius >= 2 {
            WarmStart::User(test_function_potential(spec, &net)?)
        } else {
            WarmStart::Zero
        };
    }
    let sol = solve_dirichlet(&net, spec.p, &cfg)?;
    Ok((net, sol))
}

/// The capacity of `D_n` with its certificates.
pub fn capacity(spec: &LatticeSpec, cfg: &SolverConfig, quad: &QuadratureConfig) -> Result<LatticeReport> {
    capacity_with_options(spec, cfg, Some(quad))
}

/// [`capacity`], skipping the face-flux lower bound when `quad` is `None`.
pub fn capacity_with_options(
    spec: &LatticeSpec,
    cfg: &SolverConfig,
    quad: Option<&QuadratureConfig>,
) -> Result<LatticeReport> {
    let (net, sol) = solve_lattice(spec, cfg)?;
    let report = sol.report;
    info!(
        "d = {}, n = {}, p = {}: cap = {:.12e} after {} sweeps",
        spec.dim, spec.radius, spec.p, report.capacity, report.sweeps
    );
    let critical = spec.is_critical() && spec.radius >= 2;
    let lyons_lower = match quad {
        Some(quad) if critical && spec.dim >= 2 => Some(lyons_lower_bound_on(&net, spec, quad)?),
        _ => None,
    };
    let test_function_upper = if critical {
        Some(dirichlet_energy(&net, &test_function_potential(spec, &net)?, spec.p)?)
    } else {
        None
    };
    let kappa = kappa(spec, report.capacity).ok();
    Ok(LatticeReport { dim: spec.dim, radius: spec.radius, p: spec.p.value(), report, kappa, lyons_lower, test_function_upper })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(d: usize, n: usize, p: f64) -> LatticeSpec {
        LatticeSpec::new(d, n, Exponent::new(p).unwrap()).unwrap()
    }

    #[test]
    fn sizes() {
        for (d, n, v, e, b) in [(1, 2, 5, 4, 2), (2, 1, 9, 12, 8), (3, 1, 27, 54, 26), (2, 3, 49, 84, 24)] {
            let net = build_lattice(&spec(d, n, 2.0)).unwrap();
            assert_eq!((net.num_vertices(), net.num_edges(), net.sink().len()), (v, e, b));
            assert_eq!(net.source(), &[spec(d, n, 2.0).origin()]);
        }
        let s = spec(1, 2, 2.0);
        let net = build_lattice(&s).unwrap();
        let sink: Vec<_> = net.sink().iter().map(|&b| s.coords(b)).collect();
        assert_eq!(sink, vec![vec![-2], vec![2]]);
    }

    #[test]
    fn coordinates_round_trip() {
        let s = spec(3, 2, 2.0);
        for i in 0..125 {
            assert_eq!(s.index(&s.coords(i)), Some(i));
        }
        assert_eq!(s.coords(s.origin()), vec![0, 0, 0]);
        assert_eq!(s.index(&[3, 0, 0]), None);
    }

    #[test]
    fn budget_is_enforced() {
        let err = build_lattice(&spec(3, 200, 2.0)).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { required: 64_481_201, .. }));
        assert!(build_lattice_with_budget(&spec(2, 3, 2.0), 48).is_err());
    }

    #[test]
    fn one_dimensional_closed_form() {
        for (n, p) in [(3, 2.0), (2, 1.5), (7, 3.0)] {
            let s = spec(1, n, p);
            let r = capacity(&s, &SolverConfig::for_lattice(&s), &QuadratureConfig::default()).unwrap();
            assert_relative_eq!(r.report.capacity, 2.0 * (n as f64).powf(1.0 - p), max_relative = 1e-10);
        }
    }

    #[test]
    fn forced_box() {
        let s = spec(2, 1, 2.0);
        let r = capacity(&s, &SolverConfig::for_lattice(&s), &QuadratureConfig::default()).unwrap();
        assert_eq!(r.report.capacity, 4.0);
        assert!(r.lyons_lower.is_none() && r.kappa.is_none());
    }

    #[test]
    fn kappa_regimes() {
        assert_relative_eq!(kappa(&spec(1, 5, 2.0), 0.4).unwrap(), 2.0);
        assert_eq!(kappa(&spec(3, 5, 2.0), 0.7).unwrap(), 0.7);
        assert_relative_eq!(kappa(&spec(2, 7, 2.0), 0.5).unwrap(), 0.5 * 7f64.ln());
        assert!(kappa(&spec(2, 1, 2.0), 1.0).is_err());
        assert!(kappa(&spec(2, 4, 2.0), 0.0).is_err());
    }

    #[test]
    fn test_function_shape() {
        let s = spec(2, 8, 2.0);
        let (f, energy) = upper_bound_test_function(&s).unwrap();
        assert_eq!(f[s.origin()], 0.0);
        let net = build_lattice(&s).unwrap();
        for &b in net.sink() {
            assert_eq!(f[b], 1.0);
        }
        assert!(f.iter().all(|v| (0.0..=1.0).contains(v)));
        let cap = capacity(&s, &SolverConfig::for_lattice(&s), &QuadratureConfig::default()).unwrap();
        assert!(cap.report.capacity <= energy);
        assert!(upper_bound_test_function(&spec(2, 8, 3.0)).is_err());
    }

    #[test]
    fn test_function_bound_at_128() {
        let (_, energy) = upper_bound_test_function(&spec(2, 128, 2.0)).unwrap();
        assert!(energy * 128f64.ln() <= 1.2 * 2.0 * std::f64::consts::PI);
    }

    #[test]
    fn solution_is_symmetric() {
        for (d, n, p) in [(2, 6, 2.0), (2, 5, 3.0), (3, 3, 1.5)] {
            let s = spec(d, n, p);
            let cfg = SolverConfig { tol_residual: 1e-11, ..SolverConfig::for_lattice(&s) };
            let (_, sol) = solve_lattice(&s, &cfg).unwrap();
            let h = &sol.potential;
            for i in 0..s.num_vertices() as usize {
                let x = s.coords(i);
                let mut rev: Vec<i64> = x.iter().rev().copied().collect();
                rev[0] = -rev[0];
                let j = s.index(&rev).unwrap();
                assert!((h[i] - h[j]).abs() <= 1e-7, "{x:?} vs {rev:?}");
            }
        }
    }

    #[test]
    fn capacity_decreases_with_radius() {
        for p in [1.5, 2.0, 3.0] {
            let caps: Vec<f64> = (1..=6)
                .map(|n| {
                    let s = spec(2, n, p);
                    capacity(&s, &SolverConfig::for_lattice(&s), &QuadratureConfig::default()).unwrap().report.capacity
                })
                .collect();
            assert!(caps.windows(2).all(|w| w[1] <= w[0]), "p = {p}: {caps:?}");
        }
    }

    #[test]
    fn certified_bracket_at_small_radius() {
        let s = spec(2, 8, 2.0);
        let r = capacity(&s, &SolverConfig::for_lattice(&s), &QuadratureConfig::default()).unwrap();
        let lyons = r.lyons_lower.unwrap();
        let upper = r.test_function_upper.unwrap();
        assert!(lyons <= r.report.capacity && r.report.capacity <= upper);
        assert!(r.lower().unwrap() <= r.report.capacity + 1e-9);
    }
}
