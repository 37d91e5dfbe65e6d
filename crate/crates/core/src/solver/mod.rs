//! Capacities and their certificates.
//!
//! [`solve_dirichlet`] minimises the energy over potentials with `h = 0` on the
//! source set and `h = 1` on the sink set. The constraint `f ≥ 1` on the sink
//! is imposed as `f = 1`: truncating a feasible potential at 1 never raises
//! its energy. [`certify`] turns any feasible potential into an upper bound
//! and, when its current is a flow, a Thomson lower bound.

mod maxflow;
mod p1;
mod prune;
mod relax;

use std::collections::VecDeque;

use log::{debug, warn};
use rayon::prelude::*;
use serde::Serialize;

pub use p1::{p1_capacity, P1Capacity};
pub use relax::node_update;

use crate::error::{Error, Result};
use crate::network::laws::energy_unchecked;
use crate::network::{
    current_from_potential, dirichlet_energy, node_residual, strength_with_tolerance, thomson_energy, Exponent,
    Flow, Network, Potential, Role, DEFAULT_NODE_LAW_TOL,
};
use relax::Relaxer;

/// Colour classes at least this large are relaxed in parallel.
const PARALLEL_CLASS_SIZE: usize = 4096;
/// Sweeps without residual improvement before an energy plateau ends the solve.
const STALL_SWEEPS: usize = 50;
/// Neighbours closer than this fraction of the boundary range move together
/// when p < 2.
const STICK: f64 = 1e-8;
const SHIFT_FACTOR: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Default)]
pub enum WarmStart {
    /// `0` on every free vertex.
    #[default]
    Zero,
    /// `min(1, log(1 + dist) / log(1 + dist(A, B)))` with hop distances from the
    /// source set. Lattice solves substitute the exact logarithmic test function.
    LogProfile,
    /// Caller-supplied values; boundary values are overwritten.
    User(Potential),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Largest acceptable `|Σ_y c |h(y)-h(x)|^{p-2}(h(y)-h(x))|` over free vertices.
    pub tol_residual: f64,
    /// Relative energy decrease per sweep treated as a plateau.
    pub tol_energy: f64,
    pub max_sweeps: usize,
    /// Accuracy of each single-vertex solve.
    pub bisection_tol: f64,
    pub warm_start: WarmStart,
    /// Over-relaxation factor in `(0, 2)`; `None` is plain Gauss–Seidel.
    pub over_relaxation: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_residual: 1e-8,
            tol_energy: 1e-12,
            max_sweeps: 100_000,
            bisection_tol: 1e-12,
            warm_start: WarmStart::Zero,
            over_relaxation: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tol_residual", self.tol_residual),
            ("tol_energy", self.tol_energy),
            ("bisection_tol", self.bisection_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidArgument("max_sweeps must be at least 1".into()));
        }
        if let Some(w) = self.over_relaxation {
            if !(w > 0.0 && w < 2.0) {
                return Err(Error::InvalidArgument(format!("over-relaxation factor must lie in (0, 2), got {w}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityReport {
    /// Best estimate of the capacity: the energy of the returned potential.
    pub capacity: f64,
    /// Thomson bound from the normalised current; absent when the current
    /// fails the node law.
    pub lower_bound: Option<f64>,
    pub upper_bound: f64,
    pub duality_gap: Option<f64>,
    pub sweeps: usize,
    pub max_residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct DirichletSolution {
    pub potential: Potential,
    pub report: CapacityReport,
    /// Energy before the first sweep and after each sweep.
    pub energy_history: Vec<f64>,
}

/// Minimises the Dirichlet energy by nonlinear Gauss–Seidel over a greedy
/// vertex colouring, solving each vertex equation exactly.
///
/// Non-convergence within `max_sweeps` is not an error: the best iterate is
/// returned with `converged = false`.
pub fn solve_dirichlet(net: &Network, p: Exponent, cfg: &SolverConfig) -> Result<DirichletSolution> {
    let ext = p_harmonic_extension(net, p, cfg, 0.0, 1.0)?;
    let mut report = certify(net, p, &ext.potential)?;
    report.sweeps = ext.sweeps;
    report.max_residual = ext.max_residual;
    report.converged = ext.converged;
    Ok(DirichletSolution { potential: ext.potential, report, energy_history: ext.energy_history })
}

/// Result of [`p_harmonic_extension`].
#[derive(Debug, Clone)]
pub struct Extension {
    pub potential: Potential,
    pub sweeps: usize,
    pub max_residual: f64,
    pub converged: bool,
    pub energy_history: Vec<f64>,
}

/// The `p`-harmonic function equal to `source_value` on the source set and
/// `sink_value` on the sink set.
pub fn p_harmonic_extension(
    net: &Network,
    p: Exponent,
    cfg: &SolverConfig,
    source_value: f64,
    sink_value: f64,
) -> Result<Extension> {
    p.require_above_one()?;
    cfg.validate()?;
    if !(source_value.is_finite() && sink_value.is_finite()) {
        return Err(Error::InvalidArgument("boundary values must be finite".into()));
    }
    let mut h = initial_potential(net, &cfg.warm_start, source_value, sink_value)?;
    let dangling = prune::dangling(net);
    let dead = dangling.as_ref().map(|d| d.dead.as_slice());
    let relaxer = Relaxer {
        net,
        p,
        tol: cfg.bisection_tol,
        residual_tol: 0.01 * cfg.tol_residual,
        omega: cfg.over_relaxation,
        dead,
    };
    let is_live = |x: &usize| dead.is_none_or(|d| !d[*x]);
    let classes = colour_classes(net, dead);
    let free: Vec<usize> = net.free_vertices().filter(is_live).collect();
    if let Some(d) = &dangling {
        debug!("{} free vertices hang off a single vertex", d.anchors.len());
        d.sync(&mut h);
    }

    let mut energy = deterministic_energy(net, &h, p);
    let mut history = vec![energy];
    let mut residual = max_residual(&relaxer, &h, &free);
    let mut best_residual = residual;
    let mut since_improvement = 0;
    let mut sweeps = 0;
    let mut converged = residual <= cfg.tol_residual;

    while !converged && sweeps < cfg.max_sweeps {
        sweeps += 1;
        for class in &classes {
            let updated: Vec<f64> = if class.len() >= PARALLEL_CLASS_SIZE {
                class.par_iter().map(|&x| relaxer.relax(&h, x)).collect()
            } else {
                class.iter().map(|&x| relaxer.relax(&h, x)).collect()
            };
            for (&x, v) in class.iter().zip(updated) {
                h[x] = v;
            }
        }
        if p.value() < 2.0 {
            let range = (sink_value - source_value).abs();
            relaxer.shift_clusters(&mut h, &free, STICK * range, true);
            relaxer.shift_clusters(&mut h, &free, SHIFT_FACTOR * range, false);
        }
        if let Some(d) = &dangling {
            d.sync(&mut h);
        }
        let previous = energy;
        energy = deterministic_energy(net, &h, p);
        history.push(energy);
        residual = max_residual(&relaxer, &h, &free);
        if residual <= cfg.tol_residual {
            converged = true;
            break;
        }
        if residual < 0.999 * best_residual {
            best_residual = residual;
            since_improvement = 0;
        } else {
            since_improvement += 1;
        }
        if previous - energy <= cfg.tol_energy * energy && since_improvement >= STALL_SWEEPS {
            debug!("energy plateau after {sweeps} sweeps, residual {residual:e}");
            break;
        }
    }
    if !converged {
        warn!("solver stopped after {sweeps} sweeps with residual {residual:e} > {:e}", cfg.tol_residual);
    }
    Ok(Extension { potential: Potential::new(h), sweeps, max_residual: residual, converged, energy_history: history })
}

fn initial_potential(net: &Network, warm: &WarmStart, source_value: f64, sink_value: f64) -> Result<Vec<f64>> {
    let mut h = match warm {
        WarmStart::Zero => vec![0.0; net.num_vertices()],
        WarmStart::User(pot) => {
            if pot.len() != net.num_vertices() {
                return Err(Error::LengthMismatch { expected: net.num_vertices(), got: pot.len() });
            }
            if pot.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("warm start contains non-finite values".into()));
            }
            pot.values().to_vec()
        }
        WarmStart::LogProfile => hop_log_profile(net)
            .into_iter()
            .map(|t| source_value + (sink_value - source_value) * t)
            .collect(),
    };
    for x in 0..net.num_vertices() {
        match net.role(x) {
            Role::Source => h[x] = source_value,
            Role::Sink => h[x] = sink_value,
            Role::Free => {}
        }
    }
    Ok(h)
}

fn hop_log_profile(net: &Network) -> Vec<f64> {
    let mut dist = vec![usize::MAX; net.num_vertices()];
    let mut queue: VecDeque<usize> = net.source().iter().copied().collect();
    for &a in net.source() {
        dist[a] = 0;
    }
    while let Some(x) = queue.pop_front() {
        for a in net.arcs(x) {
            if dist[a.head] == usize::MAX {
                dist[a.head] = dist[x] + 1;
                queue.push_back(a.head);
            }
        }
    }
    let reach = net.sink().iter().map(|&b| dist[b]).min().unwrap_or(1).max(1) as f64;
    let scale = (1.0 + reach).ln();
    dist.iter().map(|&d| ((1.0 + d as f64).ln() / scale).min(1.0)).collect()
}

/// Greedy colouring of the free vertices in index order; on a lattice this is
/// the red/black checkerboard.
fn colour_classes(net: &Network, dead: Option<&[bool]>) -> Vec<Vec<usize>> {
    let mut colour = vec![usize::MAX; net.num_vertices()];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut used = Vec::new();
    for x in net.free_vertices().filter(|&x| dead.is_none_or(|d| !d[x])) {
        used.clear();
        used.extend(net.arcs(x).iter().map(|a| colour[a.head]).filter(|&c| c != usize::MAX));
        used.sort_unstable();
        used.dedup();
        let c = used.iter().enumerate().find(|&(i, &c)| i != c).map_or(used.len(), |(i, _)| i);
        colour[x] = c;
        if c == classes.len() {
            classes.push(Vec::new());
        }
        classes[c].push(x);
    }
    classes
}

/// Energy summed in fixed-size chunks so the result does not depend on the
/// number of worker threads.
fn deterministic_energy(net: &Network, h: &[f64], p: Exponent) -> f64 {
    const CHUNK: usize = 8192;
    if net.num_edges() < 4 * CHUNK {
        return energy_unchecked(net, h, p);
    }
    let partial: Vec<f64> = net
        .edges()
        .par_chunks(CHUNK)
        .map(|chunk| chunk.iter().map(|e| e.conductance * p.abs_pow(h[e.v] - h[e.u])).sum())
        .collect();
    partial.iter().sum()
}

fn max_residual(relaxer: &Relaxer<'_>, h: &[f64], free: &[usize]) -> f64 {
    if free.len() >= PARALLEL_CLASS_SIZE {
        free.par_iter().map(|&x| relaxer.residual(h, x)).reduce(|| 0.0, f64::max)
    } else {
        free.iter().map(|&x| relaxer.residual(h, x)).fold(0.0, f64::max)
    }
}

/// Upper bound `E(h)` for a feasible `h`, plus the Thomson lower bound of its
/// normalised current when that current obeys the node law.
pub fn certify(net: &Network, p: Exponent, h: &Potential) -> Result<CapacityReport> {
    certify_with_tolerance(net, p, h, DEFAULT_NODE_LAW_TOL)
}

pub fn certify_with_tolerance(net: &Network, p: Exponent, h: &Potential, node_law_tol: f64) -> Result<CapacityReport> {
    p.require_above_one()?;
    let upper = dirichlet_energy(net, h, p)?;
    for &a in net.source() {
        if h[a].abs() > 1e-12 {
            return Err(Error::Infeasible(format!("h({a}) = {} on the source set", h[a])));
        }
    }
    for &b in net.sink() {
        if (h[b] - 1.0).abs() > 1e-12 {
            return Err(Error::Infeasible(format!("h({b}) = {} on the sink set", h[b])));
        }
    }
    let current = current_from_potential(net, h, p)?;
    let residual = node_residual(net, &current)?;
    let max_residual = net.free_vertices().map(|x| residual[x].abs()).fold(0.0, f64::max);
    let lower = match thomson_lower_bound_with_tolerance(net, p, &current, node_law_tol) {
        Ok(v) => Some(v),
        Err(Error::ZeroStrength) => {
            warn!("current of the supplied potential has zero strength; no lower bound");
            None
        }
        Err(Error::NodeLaw { vertex, residual }) => {
            debug!("current violates the node law at {vertex} ({residual:e}); no lower bound");
            None
        }
        Err(e) => return Err(e),
    };
    Ok(CapacityReport {
        capacity: upper,
        lower_bound: lower,
        upper_bound: upper,
        duality_gap: lower.map(|l| upper - l),
        sweeps: 0,
        max_residual,
        converged: lower.is_some(),
    })
}

/// `E(θ/‖θ‖)^{-(p-1)}`, a lower bound on the capacity for any flow from the
/// source set to the sink set. Node-law violations within the tolerance are
/// charged against the strength, so the bound stays valid for them.
pub fn thomson_lower_bound(net: &Network, p: Exponent, theta: &Flow) -> Result<f64> {
    thomson_lower_bound_with_tolerance(net, p, theta, DEFAULT_NODE_LAW_TOL)
}

pub fn thomson_lower_bound_with_tolerance(net: &Network, p: Exponent, theta: &Flow, node_law_tol: f64) -> Result<f64> {
    p.require_above_one()?;
    let s = strength_with_tolerance(net, theta, node_law_tol)?;
    // Each free vertex that leaks flux against the flow lowers the usable
    // strength by the leak, since `Σ θ·df ≥ s - Σ leaks` for every feasible
    // `0 ≤ f ≤ 1`. This keeps the bound valid for currents that obey the node
    // law only approximately; for exact flows it changes nothing.
    let sign = s.signum();
    let residual = node_residual(net, theta)?;
    let leak: f64 = net.free_vertices().map(|x| (-sign * residual[x]).max(0.0)).sum();
    let s = s - sign * leak;
    if s == 0.0 || s.signum() != sign {
        return Err(Error::ZeroStrength);
    }
    let unit = theta.scaled(1.0 / s);
    Ok(thomson_energy(net, &unit, p)?.powf(-(p.value() - 1.0)))
}
