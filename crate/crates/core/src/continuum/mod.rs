//! The continuous optimiser for `p = d` and its lattice discretisation.
//!
//! With `q = d/(d-1)`, `g(x) = log |x|_q` solves `Σ_i ∂_i(|∂_i g|^{d-2} ∂_i g) = 0`
//! away from the origin, and its flow `Θ(x) = x / |x|_q^d` is divergence free
//! there. Integrating `Θ` over the unit faces of the dual cubes gives a lattice
//! flow out of the origin whose node law holds up to quadrature error.

mod face;
mod gauss;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{c_d_gamma, conjugate_norm};
use crate::error::{Error, Result};
use crate::lattice::{build_lattice, LatticeSpec};
use crate::network::{Flow, Network, Role};
use crate::solver::thomson_lower_bound;
use face::FaceIntegrator;

/// Panels per axis on faces inside the refinement radius.
const REFINED_PANELS: usize = 4;
/// Panels per axis for the flux through a large cube.
const CUBE_PANELS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Gauss–Legendre points per panel and axis.
    pub points_per_axis: usize,
    /// Faces whose centre has `|·|_q` at most this are split into four panels per axis.
    pub refinement_radius: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { points_per_axis: 12, refinement_radius: 4.0 }
    }
}

impl QuadratureConfig {
    pub fn with_points(points_per_axis: usize) -> Self {
        QuadratureConfig { points_per_axis, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points_per_axis < 2 {
            return Err(Error::InvalidArgument(format!(
                "points_per_axis must be at least 2, got {}",
                self.points_per_axis
            )));
        }
        if !(self.refinement_radius >= 0.0 && self.refinement_radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad refinement radius {}", self.refinement_radius)));
        }
        Ok(())
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("the continuous flow needs d ≥ 2, got {d}")));
    }
    Ok(())
}

/// `|x|_q`.
pub fn q_norm(x: &[f64], q: f64) -> f64 {
    x.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q)
}

/// `g(x) = log |x|_q` with `q = d/(d-1)`, where `d = x.len()`.
pub fn g_value(x: &[f64]) -> Result<f64> {
    check_dim(x.len())?;
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidArgument("g is undefined at the origin".into()));
    }
    Ok(q_norm(x, conjugate_norm(x.len())).ln())
}

/// `Θ(x) = x / |x|_q^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContinuousFlowField {
    d: usize,
}

impl ContinuousFlowField {
    pub fn new(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(ContinuousFlowField { d })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.d);
        let q = conjugate_norm(self.d);
        // |x|_q^d = (Σ |x_j|^q)^{d-1}
        let denom = x.iter().map(|v| v.abs().powf(q)).sum::<f64>().powi(self.d as i32 - 1);
        x.iter().map(|v| v / denom).collect()
    }

    /// Central-difference divergence with step `h`.
    pub fn divergence(&self, x: &[f64], h: f64) -> f64 {
        let mut y = x.to_vec();
        (0..self.d)
            .map(|i| {
                y[i] = x[i] + h;
                let plus = self.eval(&y)[i];
                y[i] = x[i] - h;
                let minus = self.eval(&y)[i];
                y[i] = x[i];
                (plus - minus) / (2.0 * h)
            })
            .sum()
    }
}

fn panels_for(x: &[i64], axis: usize, s: i64, quad: &QuadratureConfig, q: f64) -> usize {
    let centre: Vec<f64> =
        x.iter().enumerate().map(|(j, &v)| v as f64 + if j == axis { 0.5 * s as f64 } else { 0.0 }).collect();
    if q_norm(&centre, q) <= quad.refinement_radius {
        REFINED_PANELS
    } else {
        1
    }
}

/// Flux of `Θ` through the unit face separating the lattice points `x` and
/// `y`, in the direction `x → y`.
pub fn face_flux(x: &[i64], y: &[i64], quad: &QuadratureConfig) -> Result<f64> {
    quad.validate()?;
    let d = x.len();
    check_dim(d)?;
    if y.len() != d {
        return Err(Error::LengthMismatch { expected: d, got: y.len() });
    }
    let diff: Vec<i64> = x.iter().zip(y).map(|(a, b)| b - a).collect();
    let moved: Vec<usize> = (0..d).filter(|&j| diff[j] != 0).collect();
    if moved.len() != 1 || diff[moved[0]].abs() != 1 {
        return Err(Error::InvalidArgument(format!("{x:?} and {y:?} are not lattice neighbours")));
    }
    let (axis, s) = (moved[0], diff[moved[0]]);
    let integrator = FaceIntegrator::new(d, quad.points_per_axis);
    Ok(integrator.face_flux(x, axis, s, panels_for(x, axis, s, quad, conjugate_norm(d))))
}

fn check_critical(spec: &LatticeSpec) -> Result<()> {
    check_dim(spec.dim())?;
    if spec.p().value() != spec.dim() as f64 {
        return Err(Error::InvalidArgument(format!(
            "the continuous flow is the optimiser only for p = d; got p = {}, d = {}",
            spec.p(),
            spec.dim()
        )));
    }
    Ok(())
}

/// The face-flux flow on `D_n`, on the network built by [`build_lattice`].
///
/// Edges joining two sink vertices carry no flow: the sink set acts as a
/// single absorbing vertex, on which such edges are loops.
pub fn lyons_flow(spec: &LatticeSpec, quad: &QuadratureConfig) -> Result<Flow> {
    let net = build_lattice(spec)?;
    lyons_flow_on(&net, spec, quad)
}

/// [`lyons_flow`] on an already built copy of the lattice network.
pub fn lyons_flow_on(net: &Network, spec: &LatticeSpec, quad: &QuadratureConfig) -> Result<Flow> {
    check_critical(spec)?;
    quad.validate()?;
    if net.num_vertices() as u128 != spec.num_vertices() {
        return Err(Error::LengthMismatch { expected: spec.num_vertices() as usize, got: net.num_vertices() });
    }
    let d = spec.dim();
    let q = conjugate_norm(d);
    let integrator = FaceIntegrator::new(d, quad.points_per_axis);
    let values: Vec<f64> = net
        .edges()
        .par_iter()
        .map(|e| {
            if net.role(e.u) == Role::Sink && net.role(e.v) == Role::Sink {
                return 0.0;
            }
            let x = spec.coords(e.u);
            let y = spec.coords(e.v);
            let axis = (0..d).find(|&j| x[j] != y[j]).expect("lattice edge joins distinct points");
            let s = y[axis] - x[axis];
            integrator.face_flux(&x, axis, s, panels_for(&x, axis, s, quad, q))
        })
        .collect();
    Ok(Flow::new(values))
}

/// Thomson bound of the normalised Lyons flow: a certified lower bound on the
/// capacity of `D_n`.
pub fn lyons_lower_bound(spec: &LatticeSpec, quad: &QuadratureConfig) -> Result<f64> {
    let net = build_lattice(spec)?;
    lyons_lower_bound_on(&net, spec, quad)
}

pub fn lyons_lower_bound_on(net: &Network, spec: &LatticeSpec, quad: &QuadratureConfig) -> Result<f64> {
    if spec.radius() < 2 {
        return Err(Error::InvalidArgument("the Lyons bound needs n ≥ 2".into()));
    }
    let flow = lyons_flow_on(net, spec, quad)?;
    thomson_lower_bound(net, spec.p(), &flow)
}

/// Flux of `Θ` through the cube `∂[-n, n]^d`, paired with `c_d`.
///
/// `Θ` is radial, so the flux through a cube face equals the flux through its
/// radial projection onto the sphere `n S_q`; the two faces of a solid cone
/// bound a source-free region.
pub fn strength_identity_check(n: usize, d: usize, quad: &QuadratureConfig) -> Result<(f64, f64)> {
    check_dim(d)?;
    quad.validate()?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n must be at least 2, got {n}")));
    }
    let integrator = FaceIntegrator::new(d, quad.points_per_axis);
    Ok((integrator.cube_flux(n as f64, CUBE_PANELS), c_d_gamma(d)?))
}
