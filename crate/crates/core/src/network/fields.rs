use std::ops::{Deref, Index};

use serde::{Deserialize, Serialize};

use super::graph::{Arc, Network, VertexId};
use crate::error::{Error, Result};

/// A real value per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential(Vec<f64>);

impl Potential {
    pub fn new(values: Vec<f64>) -> Self {
        Potential(values)
    }

    pub fn constant(net: &Network, value: f64) -> Self {
        Potential(vec![value; net.num_vertices()])
    }

    pub fn from_fn(net: &Network, f: impl FnMut(VertexId) -> f64) -> Self {
        Potential((0..net.num_vertices()).map(f).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub(crate) fn check(&self, net: &Network) -> Result<()> {
        if self.0.len() != net.num_vertices() {
            return Err(Error::LengthMismatch { expected: net.num_vertices(), got: self.0.len() });
        }
        if let Some(x) = self.0.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("potential at vertex {x} is not finite")));
        }
        Ok(())
    }
}

impl Deref for Potential {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<VertexId> for Potential {
    type Output = f64;
    fn index(&self, x: VertexId) -> &f64 {
        &self.0[x]
    }
}

/// A signed value per undirected edge, measured along the edge's canonical
/// orientation (lower vertex id to higher). Antisymmetry is built in:
/// `θ(y → x)` is always the negation of `θ(x → y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flow(Vec<f64>);

impl Flow {
    pub fn new(values: Vec<f64>) -> Self {
        Flow(values)
    }

    pub fn zeros(net: &Network) -> Self {
        Flow(vec![0.0; net.num_edges()])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    /// `θ(x → y)`.
    pub fn along(&self, net: &Network, x: VertexId, y: VertexId) -> Result<f64> {
        let (e, forward) = net.find_edge(x, y).ok_or(Error::NotAdjacent(x, y))?;
        Ok(if forward { self.0[e] } else { -self.0[e] })
    }

    /// Value of the flow in the direction the arc is traversed.
    #[inline]
    pub fn on_arc(&self, arc: &Arc) -> f64 {
        if arc.forward {
            self.0[arc.edge]
        } else {
            -self.0[arc.edge]
        }
    }

    pub fn scaled(&self, factor: f64) -> Flow {
        Flow(self.0.iter().map(|v| v * factor).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub(crate) fn check(&self, net: &Network) -> Result<()> {
        if self.0.len() != net.num_edges() {
            return Err(Error::LengthMismatch { expected: net.num_edges(), got: self.0.len() });
        }
        if let Some(e) = self.0.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("flow on edge {e} is not finite")));
        }
        Ok(())
    }
}

impl Index<usize> for Flow {
    type Output = f64;
    fn index(&self, e: usize) -> &f64 {
        &self.0[e]
    }
}
