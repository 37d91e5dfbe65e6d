//! Tensor Gauss–Legendre integration of `Θ` over unit cube faces.
//!
//! On a face `{z : z_i = a}` the normal component is
//! `a / (Σ_{j≠i} |z_j|^q + |a|^q)^{d-1}`. The only non-smooth factor is
//! `|z_j|^q` at `z_j = 0`, so each coordinate interval is split at `0` and
//! panels ending at `0` are integrated in the variable `w` with `z = ±w^{d-1}`,
//! which turns `|z|^q` into the polynomial `w^d`.

use super::gauss::GaussLegendre;

/// A quadrature node along one face coordinate: its weight (including any
/// change of variables) and `|z|^q`.
#[derive(Debug, Clone, Copy)]
struct Sample {
    weight: f64,
    zq: f64,
}

pub(crate) struct FaceIntegrator {
    d: usize,
    q: f64,
    rule: GaussLegendre,
}

impl FaceIntegrator {
    pub fn new(d: usize, points: usize) -> Self {
        assert!(d >= 2);
        FaceIntegrator { d, q: d as f64 / (d as f64 - 1.0), rule: GaussLegendre::new(points) }
    }

    fn panel(&self, a: f64, b: f64, out: &mut Vec<Sample>) {
        let m = self.d - 1;
        if m > 1 && (a == 0.0 || b == 0.0) {
            let end = if a == 0.0 { b } else { a };
            let top = end.abs().powf(1.0 / m as f64);
            let half = 0.5 * top;
            for (t, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                let s = half * (1.0 + t);
                out.push(Sample { weight: w * half * m as f64 * s.powi(m as i32 - 1), zq: s.powi(self.d as i32) });
            }
        } else {
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (t, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                let z = mid + half * t;
                out.push(Sample { weight: w * half, zq: z.abs().powf(self.q) });
            }
        }
    }

    /// Samples over `[lo, hi]` cut into `panels` equal pieces and at `0`.
    fn axis(&self, lo: f64, hi: f64, panels: usize) -> Vec<Sample> {
        let mut cuts: Vec<f64> = (0..=panels).map(|k| lo + (hi - lo) * k as f64 / panels as f64).collect();
        if lo < 0.0 && hi > 0.0 && !cuts.contains(&0.0) {
            cuts.push(0.0);
            cuts.sort_by(f64::total_cmp);
        }
        let mut out = Vec::with_capacity(cuts.len() * self.rule.nodes.len());
        for w in cuts.windows(2) {
            self.panel(w[0], w[1], &mut out);
        }
        out
    }

    /// `∫ (Σ_j |z_j|^q + c)^{-(d-1)} dz` over the box `Π_j [lo_j, hi_j]`.
    fn integrate(&self, ranges: &[(f64, f64)], panels: usize, c: f64) -> f64 {
        let axes: Vec<Vec<Sample>> = ranges.iter().map(|&(lo, hi)| self.axis(lo, hi, panels)).collect();
        let power = self.d as i32 - 1;
        fn walk(axes: &[Vec<Sample>], weight: f64, sum: f64, power: i32) -> f64 {
            match axes.split_first() {
                None => weight / sum.powi(power),
                Some((first, rest)) => first.iter().map(|s| walk(rest, weight * s.weight, sum + s.zq, power)).sum(),
            }
        }
        walk(&axes, 1.0, c, power)
    }

    /// Flux of `Θ` through the unit face between lattice points `x` and
    /// `x + s e_axis`, measured in the direction `s e_axis`.
    pub fn face_flux(&self, x: &[i64], axis: usize, s: i64, panels: usize) -> f64 {
        let a = x[axis] as f64 + 0.5 * s as f64;
        let ranges: Vec<(f64, f64)> = (0..self.d)
            .filter(|&j| j != axis)
            .map(|j| (x[j] as f64 - 0.5, x[j] as f64 + 0.5))
            .collect();
        s as f64 * a * self.integrate(&ranges, panels, a.abs().powf(self.q))
    }

    /// Flux of `Θ` out of the cube `[-r, r]^d`.
    pub fn cube_flux(&self, r: f64, panels: usize) -> f64 {
        let m = self.d - 1;
        // one face, reduced to the positive orthant by symmetry
        let ranges = vec![(0.0, r); m];
        let face = r * 2f64.powi(m as i32) * self.integrate(&ranges, panels, r.powf(self.q));
        2.0 * self.d as f64 * face
    }
}
