//! Event simulation by thinning.
//!
//! Candidate events are drawn from a homogeneous process at the exact
//! supremum of the intensity over the horizon and accepted with probability
//! `lambda(t) / lambda_sup`. Using the exact supremum keeps the rejection
//! rate as low as the model allows. The generator is a seeded ChaCha stream,
//! so a fixed seed reproduces the same event times on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

use super::ModelParams;

/// Simulates one realization of the process over `(0, horizon]`, returning
/// strictly increasing event times.
pub fn simulate_nhpp(params: &ModelParams, horizon: f64, seed: u64) -> Result<Vec<f64>> {
    let sup = params.intensity_sup(horizon)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events = Vec::new();
    let mut t = 0.0;
    loop {
        // Inversion on u in (0, 1); rejecting u == 0 keeps increments
        // strictly positive, so event times never repeat.
        let exp_sample = loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                break -u.ln();
            }
        };
        t += exp_sample / sup;
        if t > horizon {
            break;
        }
        let accept: f64 = rng.random();
        if accept * sup < params.intensity_unchecked(t) {
            events.push(t);
        }
    }
    Ok(events)
}
