//! Finitely supported measures with exact rational weights.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// `Σ wᵢ δ_{xᵢ}` with positive rational weights.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure<P> {
    samples: Vec<(P, BigRational)>,
    domain: String,
}

impl<P> EmpiricalMeasure<P> {
    pub fn new(domain: impl Into<String>) -> Self {
        Self { samples: Vec::new(), domain: domain.into() }
    }

    pub fn dirac(x: P, domain: impl Into<String>) -> Self {
        Self { samples: vec![(x, BigRational::one())], domain: domain.into() }
    }

    /// Equal weights summing to one.
    pub fn uniform(points: Vec<P>, domain: impl Into<String>) -> Self {
        let w = BigRational::new(1.into(), (points.len().max(1) as i64).into());
        Self { samples: points.into_iter().map(|p| (p, w.clone())).collect(), domain: domain.into() }
    }

    pub fn push(&mut self, x: P, weight: BigRational) {
        assert!(weight.is_positive(), "weights must be positive");
        self.samples.push((x, weight));
    }

    pub fn domain(&self) -> &str {
        &self.domain
    }

    pub fn samples(&self) -> &[(P, BigRational)] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<(P, BigRational)> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn total_mass(&self) -> BigRational {
        self.samples.iter().fold(BigRational::zero(), |acc, (_, w)| acc + w)
    }

    pub fn points(&self) -> impl Iterator<Item = &P> {
        self.samples.iter().map(|(p, _)| p)
    }

    /// `a·self + b·other`.
    pub fn combine(mut self, a: &BigRational, other: Self, b: &BigRational) -> Self {
        for (_, w) in &mut self.samples {
            *w = &*w * a;
        }
        self.samples.extend(other.samples.into_iter().map(|(p, w)| (p, w * b)));
        self
    }

    pub fn map<Q>(&self, f: impl Fn(&P) -> Q) -> EmpiricalMeasure<Q> {
        EmpiricalMeasure {
            samples: self.samples.iter().map(|(p, w)| (f(p), w.clone())).collect(),
            domain: self.domain.clone(),
        }
    }

    /// Restriction to the samples satisfying `keep` (mass is not renormalized).
    pub fn restrict(&self, keep: impl Fn(&P) -> bool) -> Self
    where
        P: Clone,
    {
        Self {
            samples: self.samples.iter().filter(|(p, _)| keep(p)).cloned().collect(),
            domain: self.domain.clone(),
        }
    }

    /// `∫ f dμ` in floating point.
    pub fn integrate(&self, f: impl Fn(&P) -> f64) -> f64 {
        self.samples.iter().map(|(p, w)| crate::scalar::rational_to_f64(w) * f(p)).sum()
    }
}
