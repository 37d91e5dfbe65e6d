use super::fields::{Flow, Potential};
use super::graph::{Network, Role, VertexId};
use super::Exponent;
use crate::error::{Error, Result};

/// Default absolute tolerance on the cycle-law defect of a fundamental cycle.
pub const DEFAULT_CYCLE_LAW_TOL: f64 = 1e-8;

/// Default node-law tolerance, relative to the flow's scale.
pub const DEFAULT_NODE_LAW_TOL: f64 = 1e-6;

/// `Σ_e c_e |f(u) - f(v)|^p`, each undirected edge counted once.
pub fn dirichlet_energy(net: &Network, f: &Potential, p: Exponent) -> Result<f64> {
    f.check(net)?;
    Ok(energy_unchecked(net, f.values(), p))
}

pub(crate) fn energy_unchecked(net: &Network, f: &[f64], p: Exponent) -> f64 {
    net.edges().iter().map(|e| e.conductance * p.abs_pow(f[e.v] - f[e.u])).sum()
}

/// `Σ_e r_e^{1/(p-1)} |θ(e)|^{p/(p-1)}`.
pub fn thomson_energy(net: &Network, theta: &Flow, p: Exponent) -> Result<f64> {
    p.require_above_one()?;
    theta.check(net)?;
    let inv = 1.0 / (p.value() - 1.0);
    let conj = p.value() * inv;
    Ok(net
        .edges()
        .iter()
        .zip(theta.values())
        .map(|(e, &t)| {
            if t == 0.0 {
                0.0
            } else if p.value() == 2.0 {
                e.resistance() * t * t
            } else {
                e.resistance().powf(inv) * t.abs().powf(conj)
            }
        })
        .sum())
}

/// Net outflow `Σ_{y∼x} θ(x → y)` at every vertex.
pub fn node_residual(net: &Network, theta: &Flow) -> Result<Vec<f64>> {
    theta.check(net)?;
    let mut out = vec![0.0; net.num_vertices()];
    for (e, &t) in net.edges().iter().zip(theta.values()) {
        out[e.u] += t;
        out[e.v] -= t;
    }
    Ok(out)
}

/// `r^{1/(p-1)} θ / |θ|^{(p-2)/(p-1)}` for one traversed edge; zero when `θ = 0`.
#[inline]
fn ohm_drop(resistance: f64, theta: f64, p: Exponent) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    let r = if p.value() == 2.0 { resistance } else { resistance.powf(1.0 / (p.value() - 1.0)) };
    r * p.inverse_signed_pow(theta)
}

/// Sum of the potential drops `r^{1/(p-1)} θ/|θ|^{(p-2)/(p-1)}` around a closed walk.
pub fn cycle_residual(net: &Network, theta: &Flow, p: Exponent, cycle: &[VertexId]) -> Result<f64> {
    p.require_above_one()?;
    theta.check(net)?;
    if cycle.len() < 2 || cycle.first() != cycle.last() {
        return Err(Error::OpenCycle);
    }
    let mut sum = 0.0;
    for w in cycle.windows(2) {
        let (x, y) = (w[0], w[1]);
        let (e, forward) = net.find_edge(x, y).ok_or(Error::NotAdjacent(x, y))?;
        let t = if forward { theta[e] } else { -theta[e] };
        sum += ohm_drop(net.edges()[e].resistance(), t, p);
    }
    Ok(sum)
}

/// The current flow `I(x → y) = c_xy |h(y) - h(x)|^{p-2} (h(y) - h(x))`.
pub fn current_from_potential(net: &Network, h: &Potential, p: Exponent) -> Result<Flow> {
    p.require_above_one()?;
    h.check(net)?;
    Ok(Flow::new(
        net.edges().iter().map(|e| e.conductance * p.signed_pow(h[e.v] - h[e.u])).collect(),
    ))
}

/// Integrates a flow satisfying the cycle law back into its potential, with
/// `h(anchor) = anchor_value`.
pub fn potential_from_flow(
    net: &Network,
    theta: &Flow,
    p: Exponent,
    anchor: VertexId,
    anchor_value: f64,
) -> Result<Potential> {
    potential_from_flow_with_tolerance(net, theta, p, anchor, anchor_value, DEFAULT_CYCLE_LAW_TOL)
}

/// As [`potential_from_flow`]; `tol` bounds the defect on every fundamental
/// cycle of a breadth-first spanning tree. The worst cycle is reported on failure.
pub fn potential_from_flow_with_tolerance(
    net: &Network,
    theta: &Flow,
    p: Exponent,
    anchor: VertexId,
    anchor_value: f64,
    tol: f64,
) -> Result<Potential> {
    p.require_above_one()?;
    theta.check(net)?;
    net.check_vertex(anchor)?;
    let (parent, order) = net.bfs_tree(anchor);
    let mut h = vec![0.0; net.num_vertices()];
    h[anchor] = anchor_value;
    for &x in &order[1..] {
        let y = parent[x];
        // drop along y → x
        let (e, forward) = net.find_edge(y, x).expect("tree edge exists");
        let t = if forward { theta[e] } else { -theta[e] };
        h[x] = h[y] + ohm_drop(net.edges()[e].resistance(), t, p);
    }

    let mut worst: Option<(f64, usize)> = None;
    for (i, e) in net.edges().iter().enumerate() {
        if parent[e.v] == e.u || parent[e.u] == e.v {
            continue;
        }
        // cycle u → (tree path) → v → u
        let defect = h[e.v] - h[e.u] - ohm_drop(e.resistance(), theta[i], p);
        if defect.abs() > tol && worst.is_none_or(|(w, _)| defect.abs() > w.abs()) {
            worst = Some((defect, i));
        }
    }
    if let Some((defect, i)) = worst {
        let e = net.edges()[i];
        let mut cycle = tree_path(&parent, e.u, e.v);
        cycle.push(e.u);
        return Err(Error::CycleLaw { residual: defect, cycle });
    }
    Ok(Potential::new(h))
}

/// Vertices on the tree path from `x` to `y`, both included.
fn tree_path(parent: &[usize], x: VertexId, y: VertexId) -> Vec<VertexId> {
    let ancestors = |mut v: VertexId| {
        let mut out = vec![v];
        while parent[v] != usize::MAX {
            v = parent[v];
            out.push(v);
        }
        out
    };
    let up_x = ancestors(x);
    let up_y = ancestors(y);
    let on_x: std::collections::HashSet<_> = up_x.iter().copied().collect();
    let meet_y = up_y.iter().position(|v| on_x.contains(v)).expect("common root");
    let lca = up_y[meet_y];
    let meet_x = up_x.iter().position(|&v| v == lca).unwrap();
    let mut path: Vec<VertexId> = up_x[..=meet_x].to_vec();
    path.extend(up_y[..meet_y].iter().rev());
    path
}

/// Strength `‖θ‖`: the net flux out of the source set, after checking the
/// node law off `A ∪ B` at [`DEFAULT_NODE_LAW_TOL`].
pub fn strength(net: &Network, theta: &Flow) -> Result<f64> {
    strength_with_tolerance(net, theta, DEFAULT_NODE_LAW_TOL)
}

/// As [`strength`], with a node-law tolerance relative to
/// `max(|flux out of A|, max_e |θ(e)|)`.
pub fn strength_with_tolerance(net: &Network, theta: &Flow, tol: f64) -> Result<f64> {
    let residual = node_residual(net, theta)?;
    let out_of_source: f64 = net.source().iter().map(|&a| residual[a]).sum();
    let scale = out_of_source.abs().max(theta.max_abs());
    let limit = tol * scale;
    let mut worst: Option<(VertexId, f64)> = None;
    for (x, &r) in residual.iter().enumerate() {
        if net.role(x) == Role::Free && r.abs() > limit && worst.is_none_or(|(_, w)| r.abs() > w.abs()) {
            worst = Some((x, r));
        }
    }
    match worst {
        Some((vertex, residual)) => Err(Error::NodeLaw { vertex, residual }),
        None => Ok(out_of_source),
    }
}
