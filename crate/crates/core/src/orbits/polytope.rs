//! The polytopes `F_π` and the law of the minimum coordinate on them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const STALL_RATE: f64 = 1e-4;
const STALL_CHECK_AFTER: u64 = 100_000;

/// `F_π = {v ∈ ℝⁿ, Σvᵢ = 0 : v_{π(i)} ≥ v_{π(i+1)} − 1}`, indices of `π` cyclic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplexPolytope {
    perm: Vec<usize>,
}

impl SimplexPolytope {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &i in &perm {
            if i >= n || seen[i] {
                return Err(Error::Config(format!("{perm:?} is not a permutation")));
            }
            seen[i] = true;
        }
        if n < 2 {
            return Err(Error::Config("F_π needs n ≥ 2".into()));
        }
        Ok(Self { perm })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new((0..n).collect())
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Slacks `v_{π(i)} − v_{π(i+1)} + 1`; they are nonnegative on `F_π` and sum to `n`.
    pub fn slacks(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| v[self.perm[i]] - v[self.perm[(i + 1) % n]] + 1.0).collect()
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        let s: f64 = v.iter().sum();
        s.abs() < 1e-9 && self.slacks(v).iter().all(|&x| x >= 0.0)
    }

    /// The `n` vertices: all slack on one constraint.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n)
            .map(|k| {
                // walking from π(k+1) around the cycle the coordinates increase by one
                let mut v = vec![0.0; n];
                for step in 0..n {
                    v[self.perm[(k + 1 + step) % n]] = step as f64 - (n as f64 - 1.0) / 2.0;
                }
                v
            })
            .collect()
    }

    /// Half-width of the coordinate box containing `F_π`.
    pub fn box_radius(&self) -> f64 {
        (self.dim() as f64 - 1.0) / 2.0
    }
}

pub fn min_coordinate(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Weighted right-continuous step CDF.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    xs: Vec<f64>,
    cum: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn from_weighted(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        let mut xs: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut cum: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut acc = 0.0;
        for (x, w) in pairs {
            acc += w / total;
            if xs.last() == Some(&x) {
                *cum.last_mut().unwrap() = acc;
            } else {
                xs.push(x);
                cum.push(acc);
            }
        }
        *cum.last_mut().unwrap() = 1.0;
        Ok(Self { xs, cum })
    }

    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        Self::from_weighted(samples.iter().map(|&x| (x, 1.0)).collect())
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.xs.partition_point(|&x| x <= t) {
            0 => 0.0,
            k => self.cum[k - 1],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.xs
    }

    /// `(t, F(t))` at every breakpoint.
    pub fn table(&self) -> Vec<(f64, f64)> {
        self.xs.iter().copied().zip(self.cum.iter().copied()).collect()
    }

    /// Smallest breakpoint `t` with `F(t) ≥ c`.
    pub fn quantile(&self, c: f64) -> f64 {
        let k = self.cum.partition_point(|&f| f < c).min(self.xs.len() - 1);
        self.xs[k]
    }

    pub fn min(&self) -> f64 {
        self.xs[0]
    }

    pub fn max(&self) -> f64 {
        *self.xs.last().unwrap()
    }
}

/// `sup_t |F(t) − G(t)|`.
pub fn ks_distance(f: &EmpiricalCdf, g: &EmpiricalCdf) -> f64 {
    f.xs.iter()
        .chain(&g.xs)
        .map(|&t| (f.eval(t) - g.eval(t)).abs())
        .fold(0.0, f64::max)
}

/// Monte-Carlo CDF of `min-co` under the uniform measure on `F_π`, by
/// rejection from the box `[−(n−1)/2, (n−1)/2]^{n−1}`.
pub fn min_co_cdf(perm: &[usize], n: usize, samples: usize, seed: u64) -> Result<EmpiricalCdf> {
    if perm.len() != n {
        return Err(Error::Config(format!("permutation of length {} for n = {n}", perm.len())));
    }
    if n > 5 {
        return Err(Error::DimensionTooLarge(n));
    }
    if samples == 0 {
        return Err(Error::EmptyMeasure);
    }
    let poly = SimplexPolytope::new(perm.to_vec())?;
    let h = poly.box_radius();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(samples);
    let mut v = vec![0.0; n];
    let mut tries: u64 = 0;
    while values.len() < samples {
        tries += 1;
        let mut last = 0.0;
        for c in v.iter_mut().take(n - 1) {
            *c = rng.gen_range(-h..=h);
            last -= *c;
        }
        v[n - 1] = last;
        if poly.slacks(&v).iter().all(|&s| s >= 0.0) {
            values.push(min_coordinate(&v));
        }
        if tries >= STALL_CHECK_AFTER {
            let rate = values.len() as f64 / tries as f64;
            if rate < STALL_RATE {
                return Err(Error::RejectionStall(rate));
            }
        }
    }
    EmpiricalCdf::from_samples(&values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertices_lie_on_the_polytope() {
        for perm in [vec![0, 1], vec![0, 1, 2], vec![2, 0, 1, 3], vec![4, 2, 0, 1, 3]] {
            let p = SimplexPolytope::new(perm).unwrap();
            for v in p.vertices() {
                assert!(p.contains(&v), "{v:?}");
                assert!((min_coordinate(&v) + p.box_radius()).abs() < 1e-12);
                assert_eq!(p.slacks(&v).iter().filter(|s| **s > 0.5).count(), 1);
            }
        }
        assert!(SimplexPolytope::new(vec![0, 0]).is_err());
    }

    #[test]
    fn segment_oracle() {
        let cdf = min_co_cdf(&[0, 1], 2, 20_000, 7).unwrap();
        let exact = EmpiricalCdf::from_samples(&(0..=2000).map(|k| -0.5 + 0.5 * k as f64 / 2000.0).collect::<Vec<_>>())
            .unwrap();
        assert!(ks_distance(&cdf, &exact) < 0.02);
        assert!((cdf.eval(-0.25) - 0.5).abs() < 0.02);
        assert_eq!(cdf.eval(-0.5 - 1e-9), 0.0);
        assert_eq!(cdf.eval(0.0), 1.0);
    }

    #[test]
    fn reproducible_and_independent_of_perm() {
        let a = min_co_cdf(&[0, 1, 2], 3, 20_000, 3).unwrap();
        assert_eq!(a, min_co_cdf(&[0, 1, 2], 3, 20_000, 3).unwrap());
        let b = min_co_cdf(&[0, 2, 1], 3, 20_000, 4).unwrap();
        assert!(ks_distance(&a, &b) < 0.03);
        assert!(a.min() > -1.0 - 1e-12 && a.min() < -0.9);
        assert!(a.max() <= 0.0);
    }

    #[test]
    fn cdf_basics() {
        let c = EmpiricalCdf::from_weighted(vec![(1.0, 1.0), (0.0, 3.0), (1.0, 0.0)]).unwrap();
        assert_eq!(c.eval(-1.0), 0.0);
        assert_eq!(c.eval(0.0), 0.75);
        assert_eq!(c.eval(1.0), 1.0);
        assert_eq!(c.quantile(0.5), 0.0);
        assert_eq!(c.quantile(0.9), 1.0);
        assert_eq!(ks_distance(&c, &c), 0.0);
        assert!(EmpiricalCdf::from_samples(&[]).is_err());
    }
}
