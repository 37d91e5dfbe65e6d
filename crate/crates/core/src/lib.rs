//! Discrete p-capacities on finite networks and on the lattice boxes
//! `D_n = {x ∈ Z^d : |x|_∞ ≤ n}`.
//!
//! The capacity between a source set `A` and a sink set `B` is the minimum of
//! the conductance-weighted energy `Σ c_e |f(u) - f(v)|^p` over potentials with
//! `f = 0` on `A` and `f = 1` on `B`. Every computed value is bracketed by two
//! certificates:
//!
//! * an upper bound from a feasible potential (Dirichlet principle), and
//! * a lower bound `E(θ)^{-(p-1)}` from a unit flow `θ` (Thomson principle).
//!
//! [`solver`] minimises the energy by safeguarded nonlinear Gauss–Seidel,
//! [`lattice`] builds `D_n` and the explicit logarithmic test function,
//! [`continuum`] discretises the exact continuous flow `x / |x|_q^d` into a
//! lattice flow by integrating it over cube faces, and [`constants`] evaluates
//! the limiting constant `c_d` in two independent ways.

pub mod constants;
pub mod continuum;
pub mod error;
pub mod lattice;
pub mod network;
pub mod sample;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use network::{Exponent, Flow, Network, Potential, VertexId};
