//! Variational dropout: one mask per sequence, shared by all time steps.

use super::{Real, Tape, TensorId};
use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Drops whole feature columns of an n×d sequence tensor.
///
/// In training, samples a single Bernoulli(1−rate) mask of width d from
/// `mask_seed` and broadcasts it across all n rows with inverted scaling
/// 1/(1−rate), so every time step keeps and loses the same features. At
/// inference (or rate 0) the input is returned unchanged.
pub fn apply_variational_dropout<F: Real>(
    tape: &mut Tape<F>,
    a: TensorId,
    rate: f64,
    mask_seed: u64,
    training: bool,
) -> Result<TensorId> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Config(format!(
            "dropout rate must be in [0, 1), got {rate}"
        )));
    }
    if !training || rate == 0.0 {
        return Ok(a);
    }
    let (n, d) = tape.shape(a);
    let mut rng = ChaCha8Rng::seed_from_u64(mask_seed);
    let keep_scale = F::from_f64(1.0 / (1.0 - rate));
    let column_mask: Vec<F> = (0..d)
        .map(|_| {
            if rng.random::<f64>() < rate {
                F::zero()
            } else {
                keep_scale
            }
        })
        .collect();
    let mut tiled = Vec::with_capacity(n * d);
    for _ in 0..n {
        tiled.extend_from_slice(&column_mask);
    }
    let mask = tape.constant(tiled, n, d)?;
    tape.mul(a, mask)
}
