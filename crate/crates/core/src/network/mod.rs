//! Networks, potentials, flows and the local laws linking them.
//!
//! Energies are conductance weighted and every undirected edge is counted once:
//! `E(f) = Σ_e c_e |f(u) - f(v)|^p`.

mod edgelist;
mod fields;
mod graph;
pub(crate) mod laws;

pub use edgelist::{parse_edge_list, read_edge_list, write_edge_list};
pub use fields::{Flow, Potential};
pub use graph::{Arc, Edge, Network, Role, VertexId};
pub use laws::{
    current_from_potential, cycle_residual, dirichlet_energy, node_residual, potential_from_flow,
    potential_from_flow_with_tolerance, strength, strength_with_tolerance, thomson_energy,
    DEFAULT_CYCLE_LAW_TOL, DEFAULT_NODE_LAW_TOL,
};

use crate::error::{Error, Result};

/// The exponent `p ≥ 1` of the energy.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(Exponent(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `p / (p - 1)`, or `None` for `p = 1`.
    pub fn conjugate(self) -> Option<f64> {
        (self.0 > 1.0).then(|| self.0 / (self.0 - 1.0))
    }

    pub fn require_above_one(self) -> Result<()> {
        if self.0 > 1.0 {
            Ok(())
        } else {
            Err(Error::RequiresPAboveOne(self.0))
        }
    }

    /// `|u|^p`.
    #[inline]
    pub fn abs_pow(self, u: f64) -> f64 {
        let a = u.abs();
        match self.0 {
            p if p == 1.0 => a,
            p if p == 2.0 => a * a,
            p if p == 3.0 => a * a * a,
            p if p == 4.0 => (a * a) * (a * a),
            p => a.powf(p),
        }
    }

    /// The nonlinear Ohm map `|u|^{p-2} u`, continuous at `u = 0` for every `p ≥ 1`
    /// except `p = 1` where it is the sign.
    #[inline]
    pub fn signed_pow(self, u: f64) -> f64 {
        match self.0 {
            p if p == 2.0 => u,
            p if p == 3.0 => u * u.abs(),
            p if p == 4.0 => u * u * u,
            _ if u == 0.0 => 0.0,
            p => u.signum() * u.abs().powf(p - 1.0),
        }
    }

    /// Inverse of [`signed_pow`](Self::signed_pow): `sign(v) |v|^{1/(p-1)}`.
    #[inline]
    pub(crate) fn inverse_signed_pow(self, v: f64) -> f64 {
        match self.0 {
            p if p == 2.0 => v,
            _ if v == 0.0 => 0.0,
            p if p == 3.0 => v.signum() * v.abs().sqrt(),
            p => v.signum() * v.abs().powf(1.0 / (p - 1.0)),
        }
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}
