//! The `p = 1` capacity: a minimum cut, checked against its bottleneck dual.

use log::debug;
use serde::Serialize;

use super::maxflow::max_flow;
use crate::error::{Error, Result};
use crate::network::{dirichlet_energy, Exponent, Flow, Network, Potential};

const DUALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct P1Capacity {
    /// Energy of the optimal cut potential.
    pub capacity: f64,
    /// `inf max_e r_e |θ(e)|` over unit flows, found by bisection on the
    /// capacity scale.
    pub bottleneck: f64,
    /// `1 / bottleneck`.
    pub dual: f64,
    /// `0` on the source side of a minimum cut, `1` elsewhere.
    pub cut: Potential,
    /// A unit flow with `r_e |θ(e)| ≤ bottleneck` on every edge.
    pub flow: Flow,
}

/// Minimises `Σ c_e |f(u) - f(v)|` over `f = 0` on the source set and `f = 1`
/// on the sink set. Extreme points of this problem are `0/1`-valued, so the
/// minimum is a minimum cut; it is recomputed from the dual side as the
/// smallest `t` for which capacities `t·c_e` carry a unit flow.
pub fn p1_capacity(net: &Network) -> Result<P1Capacity> {
    let mf = max_flow(net, 1.0);
    let cut = Potential::from_fn(net, |x| if mf.source_side[x] { 0.0 } else { 1.0 });
    let capacity = dirichlet_energy(net, &cut, Exponent::new(1.0)?)?;
    if !(capacity > 0.0) {
        return Err(Error::Infeasible("no positive-conductance edge separates the source and sink sets".into()));
    }

    let c_min = net.edges().iter().map(|e| e.conductance).fold(f64::INFINITY, f64::min);
    let feasible = |t: f64| max_flow(net, t).value >= 1.0 - 1e-14;
    let mut lo = 0.0;
    let mut hi = 1.0 / c_min;
    while !feasible(hi) {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let bottleneck = hi;
    let dual = 1.0 / bottleneck;
    let scaled = max_flow(net, bottleneck);
    let flow = Flow::new(scaled.edge_flow).scaled(1.0 / scaled.value);
    debug!("p = 1: primal {capacity:e}, dual {dual:e}");
    if (capacity - dual).abs() > DUALITY_TOL * capacity.max(dual) {
        return Err(Error::DualityMismatch { primal: capacity, dual });
    }
    Ok(P1Capacity { capacity, bottleneck, dual, cut, flow })
}
