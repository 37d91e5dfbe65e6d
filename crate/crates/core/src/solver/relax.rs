//! Exact single-vertex solves and the safeguarded relaxation step.

use crate::error::{Error, Result};
use crate::network::{Arc, Exponent, Network, Potential, VertexId};

const MAX_NODE_ITERATIONS: usize = 300;

/// Solves the vertex equation `Σ_y c_xy |h(y) - t|^{p-2} (h(y) - t) = 0` for `t`,
/// holding every neighbour fixed.
///
/// The left side is continuous and strictly decreasing in `t`, so the root lies
/// in `[min_y h(y), max_y h(y)]`. It is found by Newton steps that are only
/// accepted while they stay inside the bracket and at least halve the previous
/// step; otherwise the bracket is bisected. The result is within `tol` of the root.
pub fn node_update(net: &Network, h: &Potential, x: VertexId, p: Exponent, tol: f64) -> Result<f64> {
    p.require_above_one()?;
    net.check_vertex(x)?;
    if h.len() != net.num_vertices() {
        return Err(Error::LengthMismatch { expected: net.num_vertices(), got: h.len() });
    }
    if net.arcs(x).is_empty() {
        return Err(Error::IsolatedVertex(x));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("node tolerance must be positive, got {tol}")));
    }
    Ok(Relaxer { net, p, tol, residual_tol: 0.0, omega: None, dead: None }.solve(h, x).root)
}

pub(crate) struct NodeSolve {
    pub root: f64,
    pub lo: f64,
    pub hi: f64,
}

pub(crate) struct Relaxer<'a> {
    pub net: &'a Network,
    pub p: Exponent,
    pub tol: f64,
    /// Largest acceptable value of the vertex equation at the returned root.
    pub residual_tol: f64,
    pub omega: Option<f64>,
    /// Vertices whose arcs are ignored; they are held at their anchor's value.
    pub dead: Option<&'a [bool]>,
}

impl<'a> Relaxer<'a> {
    #[inline]
    fn arcs(&self, x: VertexId) -> impl Iterator<Item = &'a Arc> + '_ {
        let arcs = self.net.arcs(x).iter();
        let dead = self.dead;
        arcs.filter(move |a| dead.is_none_or(|d| !d[a.head]))
    }

    pub fn solve(&self, h: &[f64], x: VertexId) -> NodeSolve {
        let (lo, hi) = self
            .arcs(x)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), a| (l.min(h[a.head]), u.max(h[a.head])));
        let (lo0, hi0) = (lo, hi);
        if self.p.value() == 2.0 {
            let (num, den) = self.arcs(x).fold((0.0, 0.0), |(n, d), a| (n + a.conductance * h[a.head], d + a.conductance));
            return NodeSolve { root: (num / den).clamp(lo, hi), lo, hi };
        }
        if hi == lo {
            return NodeSolve { root: lo, lo, hi };
        }

        let root = self.find_root(h[x], lo, hi, |t| self.equation(self.arcs(x).map(|a| (h[a.head], a.conductance)), t));
        NodeSolve { root, lo: lo0, hi: hi0 }
    }

    /// Root in `[lo, hi]` of a decreasing vertex equation `eq`, which returns
    /// the value and the magnitude of the slope.
    ///
    /// For p < 2 the equation is steep near each neighbour value, so a small
    /// error in `t` can leave a large residual. Stop only once both `t` and
    /// the equation value are resolved, or the bracket is a few ulps wide.
    fn find_root(&self, start: f64, mut lo: f64, mut hi: f64, eq: impl Fn(f64) -> (f64, f64)) -> f64 {
        let mut t = start.clamp(lo, hi);
        let mut last_step = hi - lo;
        let mut step = f64::INFINITY;
        for _ in 0..MAX_NODE_ITERATIONS {
            let (f, slope) = eq(t);
            if f == 0.0 || (step <= self.tol && f.abs() <= self.residual_tol) {
                break;
            }
            if f > 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) {
                break;
            }
            let newton = t + f / slope;
            let accept = slope.is_finite() && newton > lo && newton < hi && (newton - t).abs() <= 0.5 * last_step;
            let next = if accept { newton } else { 0.5 * (lo + hi) };
            step = (next - t).abs();
            t = next;
            last_step = step;
        }
        t
    }

    /// `Σ c |v - t|^{p-2} (v - t)` over `(v, c)` pairs, and the magnitude of
    /// its derivative in `t`.
    #[inline]
    fn equation(&self, terms: impl Iterator<Item = (f64, f64)>, t: f64) -> (f64, f64) {
        let p = self.p.value();
        let mut f = 0.0;
        let mut slope = 0.0;
        for (v, c) in terms {
            let u = v - t;
            let abs = u.abs();
            let w = if p == 3.0 {
                abs
            } else if p == 4.0 {
                abs * abs
            } else if abs == 0.0 {
                if p < 2.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            } else {
                abs.powf(p - 2.0)
            };
            if abs != 0.0 {
                f += c * w * u;
            }
            slope += c * w;
        }
        (f, (p - 1.0) * slope)
    }

    pub fn local_energy(&self, h: &[f64], x: VertexId, t: f64) -> f64 {
        self.arcs(x).map(|a| a.conductance * self.p.abs_pow(h[a.head] - t)).sum()
    }

    /// New value for `x`: the exact vertex minimiser, pushed past it by the
    /// over-relaxation factor when that does not raise the local energy.
    pub fn relax(&self, h: &[f64], x: VertexId) -> f64 {
        let s = self.solve(h, x);
        let Some(omega) = self.omega else { return s.root };
        let old = h[x];
        let t = (old + omega * (s.root - old)).clamp(s.lo, s.hi);
        if self.p.value() == 2.0 || self.local_energy(h, x, t) <= self.local_energy(h, x, old) {
            t
        } else {
            s.root
        }
    }

    /// Moves each group of free vertices joined by edges with `|Δh| ≤ stick`
    /// together. The group is first collapsed to the single value that
    /// minimises the energy of its outgoing edges; if that raises the energy
    /// of the edges it touches, every member is shifted by the common amount
    /// that does, which leaves internal edges unchanged. Neither move can
    /// raise the energy.
    ///
    /// For p < 2 two neighbours with equal values at the optimum pull each
    /// other so hard that single-vertex updates move them only by the square
    /// of the residual; the joint move does not have that problem.
    pub fn shift_clusters(&self, h: &mut [f64], free: &[VertexId], stick: f64, collapse: bool) {
        let n = self.net.num_vertices();
        let mut root: Vec<usize> = (0..n).collect();
        fn find(root: &mut [usize], mut x: usize) -> usize {
            while root[x] != x {
                root[x] = root[root[x]];
                x = root[x];
            }
            x
        }
        let mut any = false;
        for &x in free {
            for a in self.arcs(x) {
                if a.head > x && self.net.is_free(a.head) && (h[a.head] - h[x]).abs() <= stick {
                    let (rx, ry) = (find(&mut root, x), find(&mut root, a.head));
                    if rx != ry {
                        root[rx.max(ry)] = rx.min(ry);
                        any = true;
                    }
                }
            }
        }
        if !any {
            return;
        }
        let mut members: Vec<(usize, usize)> = free.iter().map(|&x| (find(&mut root, x), x)).collect();
        members.sort_unstable();
        // (neighbour value, member value, conductance) for outgoing arcs
        let mut outgoing: Vec<(f64, f64, f64)> = Vec::new();
        for group in members.chunk_by(|a, b| a.0 == b.0).filter(|g| g.len() > 1) {
            outgoing.clear();
            let mut internal = 0.0;
            for &(r, x) in group {
                for a in self.arcs(x) {
                    if !self.net.is_free(a.head) || find(&mut root, a.head) != r {
                        outgoing.push((h[a.head], h[x], a.conductance));
                    } else if a.head > x {
                        internal += a.conductance * self.p.abs_pow(h[a.head] - h[x]);
                    }
                }
            }
            let range = |f: &dyn Fn(&(f64, f64, f64)) -> f64| {
                outgoing.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), v| (l.min(v), u.max(v)))
            };
            let (lo, hi) = range(&|o| o.0);
            if !(lo <= hi) {
                continue;
            }
            let start = group.iter().map(|&(_, x)| h[x]).sum::<f64>() / group.len() as f64;
            let t = self.find_root(start, lo, hi, |t| self.equation(outgoing.iter().map(|o| (o.0, o.2)), t));
            let before: f64 = internal + outgoing.iter().map(|o| o.2 * self.p.abs_pow(o.0 - o.1)).sum::<f64>();
            let collapsed: f64 = outgoing.iter().map(|o| o.2 * self.p.abs_pow(o.0 - t)).sum();
            if collapse && collapsed <= before {
                for &(_, x) in group {
                    h[x] = t;
                }
                continue;
            }
            let (lo, hi) = range(&|o| o.0 - o.1);
            let shift = self.find_root(0.0, lo, hi, |s| self.equation(outgoing.iter().map(|o| (o.0 - o.1, o.2)), s));
            for &(_, x) in group {
                h[x] += shift;
            }
        }
    }

    /// `|Σ_y c_xy |h(y) - h(x)|^{p-2} (h(y) - h(x))|`.
    #[inline]
    pub fn residual(&self, h: &[f64], x: VertexId) -> f64 {
        self.arcs(x).map(|a| a.conductance * self.p.signed_pow(h[a.head] - h[x])).sum::<f64>().abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn star(values: &[f64], conductances: &[f64]) -> (Network, Potential) {
        let k = values.len();
        let edges: Vec<_> = (0..k).map(|i| (0, i + 1, conductances[i])).collect();
        let net = Network::new(k + 1, edges, [1], 2..=k.max(2)).unwrap();
        let mut h = vec![0.37];
        h.extend_from_slice(values);
        (net, Potential::new(h))
    }

    #[test]
    fn symmetric_pair_gives_midpoint() {
        for p in [1.1, 1.5, 2.0, 3.0, 4.0, 7.5] {
            let (net, h) = star(&[0.0, 1.0], &[1.0, 1.0]);
            let t = node_update(&net, &h, 0, Exponent::new(p).unwrap(), 1e-13).unwrap();
            assert_abs_diff_eq!(t, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_neighbour() {
        let net = Network::new(3, [(0, 1, 2.0), (1, 2, 1.0)], [1], [2]).unwrap();
        let h = Potential::new(vec![0.9, 0.25, 1.0]);
        for p in [1.5, 2.0, 3.0] {
            let t = node_update(&net, &h, 0, Exponent::new(p).unwrap(), 1e-13).unwrap();
            assert_abs_diff_eq!(t, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn arithmetic_mean_for_p2() {
        let (net, h) = star(&[0.0, 0.0, 1.0], &[1.0, 1.0, 1.0]);
        let t = node_update(&net, &h, 0, Exponent::new(2.0).unwrap(), 1e-12).unwrap();
        assert_abs_diff_eq!(t, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn root_solves_vertex_equation() {
        let vals = [0.0, 0.1, 0.8, 1.0];
        let cs = [0.3, 1.0, 0.2, 0.9];
        for p in [1.2, 1.5, 2.5, 3.0, 4.0, 6.0] {
            let e = Exponent::new(p).unwrap();
            let (net, h) = star(&vals, &cs);
            let t = node_update(&net, &h, 0, e, 1e-13).unwrap();
            // the equation changes sign across [t - tol, t + tol]
            let f = |s: f64| -> f64 { vals.iter().zip(cs).map(|(v, c)| c * e.signed_pow(v - s)).sum() };
            assert!(f(t - 1e-11) > 0.0 && f(t + 1e-11) < 0.0, "p = {p}, t = {t}");
        }
    }

    #[test]
    fn errors() {
        let net = Network::new(3, [(0, 1, 1.0)], [0], [1]);
        assert!(net.is_err());
        let (net, h) = star(&[0.0, 1.0], &[1.0, 1.0]);
        assert!(node_update(&net, &h, 9, Exponent::new(2.0).unwrap(), 1e-12).is_err());
        assert!(node_update(&net, &h, 0, Exponent::new(1.0).unwrap(), 1e-12).is_err());
    }
}
