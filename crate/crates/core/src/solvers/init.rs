use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::FactorPair;
use crate::error::{NmfError, Result};
use crate::scalar::Scalar;

/// Lower end of the open initialization interval `(0.01, 1]`.
pub const INIT_LOW: f64 = 0.01;

/// Random starting factors, i.i.d. uniform on `(0.01, 1]`.
///
/// `W` (`m x r`) is drawn first in row-major order, then `H` (`r x n`), from
/// a ChaCha8 stream seeded with `seed`.
pub fn init_factors<T: Scalar>(m: usize, n: usize, r: usize, seed: u64) -> Result<FactorPair<T>> {
    if r == 0 || r >= m.min(n) {
        return Err(NmfError::Rank { rank: r, rows: m, cols: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |_| {
        // random::<f64>() is in [0, 1), so 1 - 0.99·u lies in (0.01, 1].
        let u: f64 = rng.random();
        T::lit(1.0 - (1.0 - INIT_LOW) * u)
    };
    let w = Array2::from_shape_fn((m, r), &mut draw);
    let h = Array2::from_shape_fn((r, n), &mut draw);
    Ok(FactorPair { w: Some(w), h })
}
