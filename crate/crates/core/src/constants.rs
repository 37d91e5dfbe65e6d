//! The limiting constant `c_d`: the cone measure of the unit `ℓ^q` sphere,
//! `q = d/(d-1)`, which equals `d · vol(B_q^d)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Samples drawn per independent random stream.
const SHARD: u64 = 1 << 16;
pub const MIN_MONTE_CARLO_SAMPLES: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GammaFormula,
    MonteCarlo,
    FluxQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticConstant {
    pub d: usize,
    pub value: f64,
    pub method: Method,
}

/// `q = d/(d-1)`.
pub fn conjugate_norm(d: usize) -> f64 {
    d as f64 / (d as f64 - 1.0)
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("c_d needs d ≥ 2, got {d}")));
    }
    Ok(())
}

/// `d · 2^d · Γ(1 + 1/q)^d / Γ(d)`.
pub fn c_d_gamma(d: usize) -> Result<f64> {
    check_dim(d)?;
    if d == 2 {
        // Γ(3/2)² = π/4; the Lanczos gamma is a few ulps off here
        return Ok(2.0 * std::f64::consts::PI);
    }
    let q = conjugate_norm(d);
    let df = d as f64;
    Ok(df * 2f64.powi(d as i32) * gamma(1.0 + 1.0 / q).powi(d as i32) / gamma(df))
}

/// Rejection estimate of `d · vol(B_q^d)` from uniform points in `[-1, 1]^d`,
/// with its binomial standard error.
///
/// The samples are split into fixed-size shards, each drawn from its own
/// stream of a ChaCha generator seeded with `seed`, so the estimate depends
/// only on `(d, samples, seed)`.
pub fn c_d_monte_carlo(d: usize, samples: u64, seed: u64) -> Result<(f64, f64)> {
    check_dim(d)?;
    if samples < MIN_MONTE_CARLO_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_MONTE_CARLO_SAMPLES} samples are required, got {samples}"
        )));
    }
    let q = conjugate_norm(d);
    let shards = samples.div_ceil(SHARD);
    let hits: u64 = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s);
            let count = SHARD.min(samples - s * SHARD);
            (0..count)
                .filter(|_| (0..d).map(|_| rng.gen_range(-1.0f64..1.0).abs().powf(q)).sum::<f64>() <= 1.0)
                .count() as u64
        })
        .sum();
    let frac = hits as f64 / samples as f64;
    let scale = d as f64 * 2f64.powi(d as i32);
    Ok((scale * frac, scale * (frac * (1.0 - frac) / samples as f64).sqrt()))
}

impl AsymptoticConstant {
    pub fn gamma_formula(d: usize) -> Result<Self> {
        Ok(AsymptoticConstant { d, value: c_d_gamma(d)?, method: Method::GammaFormula })
    }

    pub fn monte_carlo(d: usize, samples: u64, seed: u64) -> Result<Self> {
        Ok(AsymptoticConstant { d, value: c_d_monte_carlo(d, samples, seed)?.0, method: Method::MonteCarlo })
    }
}
