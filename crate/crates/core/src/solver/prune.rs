//! Free regions that hang off a single vertex.
//!
//! Contract the source set to one node and the sink set to another, and join
//! the two. A free vertex outside the biconnected block containing that join
//! is cut off from the boundary by a single vertex, so the energy minimiser is
//! constant on its region and equal to the value at the cut vertex. Relaxing
//! such vertices is pointless, and for `p < 2` it is harmful: the vertex
//! equation is steep near a neighbour's value, and Gauss–Seidel crawls while
//! a dangling vertex and its anchor chase each other.

use crate::network::{Network, Role};

const NONE: usize = usize::MAX;

pub(crate) struct Dangling {
    /// `true` for free vertices whose region hangs off a single vertex.
    pub dead: Vec<bool>,
    /// `(vertex, anchor)`: the anchor is a live free vertex or a boundary vertex.
    pub anchors: Vec<(usize, usize)>,
}

impl Dangling {
    pub fn sync(&self, h: &mut [f64]) {
        for &(x, a) in &self.anchors {
            h[x] = h[a];
        }
    }
}

/// `None` when every free vertex lies in the block joining source and sink.
pub(crate) fn dangling(net: &Network) -> Option<Dangling> {
    let n = net.num_vertices();
    let (sa, sb) = (n, n + 1);
    let node = |x: usize| match net.role(x) {
        Role::Source => sa,
        Role::Sink => sb,
        Role::Free => x,
    };
    // Neighbour lists of the two contracted nodes; the joining edge comes
    // first so the sink node is the first child of the root.
    let contracted = |set: &[usize], own: usize, first: Option<usize>| -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = first.map(|b| (b, NONE - 1)).into_iter().collect();
        for &x in set {
            out.extend(net.arcs(x).iter().map(|a| (node(a.head), a.edge)).filter(|&(w, _)| w != own));
        }
        out
    };
    let boundary = [contracted(net.source(), sa, Some(sb)), contracted(net.sink(), sb, None)];
    let neighbour = |u: usize, k: usize| -> Option<(usize, usize)> {
        if u >= n {
            let list = &boundary[u - n];
            if k < list.len() {
                return Some(list[k]);
            }
            return if u == sb && k == list.len() { Some((sa, NONE - 1)) } else { None };
        }
        net.arcs(u).get(k).map(|a| (node(a.head), a.edge))
    };

    let mut disc = vec![NONE; n + 2];
    let mut low = vec![NONE; n + 2];
    let mut parent = vec![NONE; n + 2];
    let mut order = Vec::with_capacity(n + 2);
    let mut stack: Vec<(usize, usize, usize)> = vec![(sa, NONE, 0)];
    disc[sa] = 0;
    low[sa] = 0;
    order.push(sa);
    while let Some(top) = stack.last_mut() {
        let (u, via, k) = *top;
        if let Some((w, e)) = neighbour(u, k) {
            top.2 += 1;
            if e == via {
                continue;
            }
            if disc[w] == NONE {
                disc[w] = order.len();
                low[w] = disc[w];
                parent[w] = u;
                order.push(w);
                stack.push((w, e, 0));
            } else {
                low[u] = low[u].min(disc[w]);
            }
        } else {
            stack.pop();
            if let Some(&(p, _, _)) = stack.last() {
                low[p] = low[p].min(low[u]);
            }
        }
    }

    let mut live = vec![false; n + 2];
    let mut anchor = vec![NONE; n + 2];
    live[sa] = true;
    live[sb] = true;
    anchor[sa] = sa;
    anchor[sb] = sb;
    for &w in &order[1..] {
        if w == sb {
            continue;
        }
        let p = parent[w];
        live[w] = p != sa && live[p] && low[w] < disc[p];
        anchor[w] = if live[w] { w } else { anchor[p] };
    }

    let original = |a: usize| match a {
        a if a == sa => net.source()[0],
        a if a == sb => net.sink()[0],
        a => a,
    };
    let anchors: Vec<(usize, usize)> =
        net.free_vertices().filter(|&x| !live[x]).map(|x| (x, original(anchor[x]))).collect();
    if anchors.is_empty() {
        return None;
    }
    let mut dead = vec![false; n];
    for &(x, _) in &anchors {
        dead[x] = true;
    }
    Some(Dangling { dead, anchors })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn anchors(net: &Network) -> Vec<(usize, usize)> {
        dangling(net).map(|d| d.anchors).unwrap_or_default()
    }

    #[test]
    fn cycle_has_no_dangling_vertices() {
        let net = Network::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)], [0], [2]).unwrap();
        assert!(dangling(&net).is_none());
    }

    #[test]
    fn path_interior_is_live() {
        let net = Network::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)], [0], [3]).unwrap();
        assert!(dangling(&net).is_none());
    }

    #[test]
    fn leaves_and_hanging_triangles() {
        // path 0-1-2 with a leaf 3 on 1, a triangle 4-5 on 1, and a leaf 6 on the sink
        let edges = [(0, 1, 1.0), (1, 2, 1.0), (1, 3, 1.0), (1, 4, 1.0), (4, 5, 1.0), (5, 1, 1.0), (2, 6, 1.0)];
        let net = Network::new(7, edges, [0], [2]).unwrap();
        assert_eq!(anchors(&net), vec![(3, 1), (4, 1), (5, 1), (6, 2)]);
    }

    #[test]
    fn region_touching_one_side_only() {
        // 3 touches two source vertices and nothing else
        let edges = [(0, 2, 1.0), (1, 2, 1.0), (2, 4, 1.0), (0, 3, 1.0), (1, 3, 1.0)];
        let net = Network::new(5, edges, [0, 1], [4]).unwrap();
        assert_eq!(anchors(&net), vec![(3, 0)]);
    }

    #[test]
    fn deep_chain_does_not_overflow() {
        let n = 200_000;
        let mut edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        edges.push((0, n - 1, 1.0));
        let net = Network::new(n + 1, edges.into_iter().chain([(5, n, 1.0)]), [0], [n / 2]).unwrap();
        assert_eq!(anchors(&net), vec![(n, 5)]);
    }
}
