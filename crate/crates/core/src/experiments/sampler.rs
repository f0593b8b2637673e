//! Approximate Haar samples on `X_n` by random words, checked against the
//! Siegel mean value `E[#(x∖0) ∩ B(r)] = (2r)ⁿ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lattice::{count_points_in_ball_with_budget, lll_reduce, make_point, LatticePoint};
use crate::linalg::Mat;

pub const DEFAULT_WORD_LENGTH: usize = 256;
const REDUCE_EVERY: usize = 8;

/// `ℤⁿ` moved by a word of `len` letters, each an elementary unipotent
/// `I + s·E_ij` or a diagonal `exp(s)(e_i − e_j)` with `s` uniform in `[−1, 1]`.
pub fn haar_sample(n: usize, len: usize, rng: &mut impl Rng) -> LatticePoint<f64> {
    let mut b = Mat::<f64>::identity(n);
    for step in 0..len {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let s: f64 = rng.gen_range(-1.0..1.0);
        if rng.gen_bool(0.5) {
            for c in 0..n {
                let v = b[(j, c)];
                b[(i, c)] += s * v;
            }
        } else {
            let e = s.exp();
            for c in 0..n {
                b[(i, c)] *= e;
                b[(j, c)] /= e;
            }
        }
        if step % REDUCE_EVERY == REDUCE_EVERY - 1 {
            b = lll_reduce(&b).0;
        }
    }
    make_point(&b).expect("words are invertible")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiegelRow {
    pub r: f64,
    pub mean_count: f64,
    pub expected: f64,
    pub relative_error: f64,
}

/// Mean nonzero point counts over `samples` random-word lattices; sample `i`
/// uses its own stream seeded by `(seed, i)`.
pub fn siegel_calibration(
    n: usize,
    samples: usize,
    word_length: usize,
    radii: &[f64],
    seed: u64,
    budget: u64,
) -> Result<Vec<SiegelRow>> {
    let counts: Vec<Vec<u64>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            let x = haar_sample(n, word_length, &mut rng);
            radii.iter().map(|&r| count_points_in_ball_with_budget(&x, r, budget)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(radii
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let mean = counts.iter().map(|c| c[k] as f64).sum::<f64>() / samples.max(1) as f64;
            let expected = (2.0 * r).powi(n as i32);
            SiegelRow { r, mean_count: mean, expected, relative_error: (mean - expected).abs() / expected }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unimodular_and_reproducible() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        let x = haar_sample(3, 64, &mut a);
        assert!(x.unimodularity_defect() < 1e-10);
        assert_eq!(x.basis(), haar_sample(3, 64, &mut b).basis());
    }
}
