//! Edmonds–Karp on real capacities.

use std::collections::VecDeque;

use crate::network::Network;

struct ResidualArc {
    to: usize,
    cap: f64,
    rev: usize,
}

pub(crate) struct MaxFlow {
    /// Total flow from the source set to the sink set.
    pub value: f64,
    /// `true` for vertices reachable from the source set in the final residual graph.
    pub source_side: Vec<bool>,
    /// Flow on each edge along its canonical orientation.
    pub edge_flow: Vec<f64>,
}

/// Maximum flow with capacity `scale · c_e` in both directions of every edge;
/// source and sink sets are joined to a super source and super sink by
/// unbounded arcs.
pub(crate) fn max_flow(net: &Network, scale: f64) -> MaxFlow {
    let n = net.num_vertices();
    let (s, t) = (n, n + 1);
    let mut g: Vec<Vec<ResidualArc>> = (0..n + 2).map(|_| Vec::new()).collect();
    let add = |g: &mut Vec<Vec<ResidualArc>>, u: usize, v: usize, cu: f64, cv: f64| -> usize {
        let (iu, iv) = (g[u].len(), g[v].len());
        g[u].push(ResidualArc { to: v, cap: cu, rev: iv });
        g[v].push(ResidualArc { to: u, cap: cv, rev: iu });
        iu
    };
    let mut edge_arc = Vec::with_capacity(net.num_edges());
    for e in net.edges() {
        let c = scale * e.conductance;
        edge_arc.push(add(&mut g, e.u, e.v, c, c));
    }
    for &a in net.source() {
        add(&mut g, s, a, f64::INFINITY, 0.0);
    }
    for &b in net.sink() {
        add(&mut g, b, t, f64::INFINITY, 0.0);
    }

    let max_cap = net.edges().iter().map(|e| scale * e.conductance).fold(0.0, f64::max);
    let eps = 1e-15 * max_cap;
    let mut value = 0.0;
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; n + 2];
    loop {
        prev.iter_mut().for_each(|x| *x = None);
        let mut queue = VecDeque::from([s]);
        let mut seen = vec![false; n + 2];
        seen[s] = true;
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for (i, arc) in g[u].iter().enumerate() {
                if !seen[arc.to] && arc.cap > eps {
                    seen[arc.to] = true;
                    prev[arc.to] = Some((u, i));
                    queue.push_back(arc.to);
                }
            }
        }
        if !seen[t] {
            let edge_flow = net
                .edges()
                .iter()
                .zip(&edge_arc)
                .map(|(e, &i)| 0.5 * (g[e.v][g[e.u][i].rev].cap - g[e.u][i].cap))
                .collect();
            return MaxFlow { value, source_side: seen[..n].to_vec(), edge_flow };
        }
        let mut bottleneck = f64::INFINITY;
        let mut v = t;
        while let Some((u, i)) = prev[v] {
            bottleneck = bottleneck.min(g[u][i].cap);
            v = u;
        }
        let mut v = t;
        while let Some((u, i)) = prev[v] {
            g[u][i].cap -= bottleneck;
            let (to, rev) = (g[u][i].to, g[u][i].rev);
            g[to][rev].cap += bottleneck;
            v = u;
        }
        value += bottleneck;
    }
}
