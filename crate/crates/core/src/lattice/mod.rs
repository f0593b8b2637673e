//! Points of the space of unimodular lattices.
//!
//! A [`LatticePoint`] is `ref_basis · Q · s^{1/r}` where the reference basis
//! is floating point, `Q` is an exact rational transform and the scale is
//! kept as an exact rational base with an integer root.

mod distance;
mod enumerate;
mod ual;

pub use distance::lattice_distance;
pub use enumerate::{
    count_points_in_ball, count_points_in_ball_with_budget, lll_reduce, shortest_vector, successive_minima,
    successive_minima_with_budget, DEFAULT_ENUMERATION_BUDGET,
};
pub use ual::ual_factorize;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{QMat, ZMat};
use crate::linalg::Mat;
use crate::numfield::{bigint_from_json, bigint_to_json, rational_ln_abs};
use crate::scalar::Real;

/// The positive real `base^{1/root}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scale {
    base: BigRational,
    root: u32,
}

impl Scale {
    pub fn new(base: BigRational, root: u32) -> Result<Self> {
        if !base.is_positive() || root == 0 {
            return Err(Error::Config("scale must be a positive rational with a positive root".into()));
        }
        Ok(Self { base, root })
    }

    pub fn one() -> Self {
        Self { base: BigRational::one(), root: 1 }
    }

    /// `p^{-s/n}`.
    pub fn prime_power(p: u64, s: u32, n: u32) -> Self {
        let den = num_traits::pow(BigInt::from(p), s as usize);
        Self { base: BigRational::new(BigInt::one(), den), root: n }
    }

    pub fn base(&self) -> &BigRational {
        &self.base
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn mul(&self, other: &Scale) -> Scale {
        if self.root == other.root {
            return Scale { base: &self.base * &other.base, root: self.root };
        }
        let g = num_integer::gcd(self.root, other.root);
        let l = self.root / g * other.root;
        let a = num_traits::pow(self.base.clone(), (l / self.root) as usize);
        let b = num_traits::pow(other.base.clone(), (l / other.root) as usize);
        Scale { base: a * b, root: l }
    }

    pub fn to_real<T: Real>(&self) -> T {
        T::lit((rational_ln_abs(&self.base) / self.root as f64).exp())
    }
}

/// A lattice `B ℤⁿ` in `ℝⁿ` with exact sublattice bookkeeping.
#[derive(Clone, Debug)]
pub struct LatticePoint<T: Real> {
    ref_basis: Mat<T>,
    transform: QMat,
    scale: Scale,
    basis: Mat<T>,
}

impl<T: Real> PartialEq for LatticePoint<T> {
    fn eq(&self, other: &Self) -> bool {
        self.ref_basis == other.ref_basis && self.transform == other.transform && self.scale == other.scale
    }
}

impl<T: Real> LatticePoint<T> {
    pub fn from_parts(ref_basis: Mat<T>, transform: QMat, scale: Scale) -> Result<Self> {
        let n = ref_basis.nrows();
        if !ref_basis.is_square() || transform.nrows() != n || transform.ncols() != n {
            return Err(Error::DimensionMismatch { degree: n, found: transform.nrows() });
        }
        if transform.det().is_zero() {
            return Err(Error::SingularBasis);
        }
        let basis = (&ref_basis * &transform.to_real::<T>()).scale(scale.to_real());
        if basis.det() == T::zero() {
            return Err(Error::SingularBasis);
        }
        Ok(Self { ref_basis, transform, scale, basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn ref_basis(&self) -> &Mat<T> {
        &self.ref_basis
    }

    pub fn transform(&self) -> &QMat {
        &self.transform
    }

    pub fn scale(&self) -> &Scale {
        &self.scale
    }

    /// Columns generate the lattice.
    pub fn basis(&self) -> &Mat<T> {
        &self.basis
    }

    pub fn covolume(&self) -> T {
        self.basis.det().abs()
    }

    /// `|det B − 1|`, relative to one.
    pub fn unimodularity_defect(&self) -> T {
        (self.covolume() - T::one()).abs()
    }

    /// The sublattice `B·H ℤⁿ`, multiplied by `extra`.
    pub fn sublattice(&self, h: &ZMat, extra: &Scale) -> Result<Self> {
        Self::from_parts(self.ref_basis.clone(), self.transform.mul(&h.to_qmat()), self.scale.mul(extra))
    }

    /// Replaces the transform by an exact rational matrix, keeping the scale.
    pub fn with_transform(&self, transform: QMat) -> Result<Self> {
        Self::from_parts(self.ref_basis.clone(), transform, self.scale.clone())
    }

    pub fn map_scalar<U: Real>(&self) -> LatticePoint<U> {
        let ref_basis = self.ref_basis.map(|x| U::lit(x.to_f64_lossy()));
        let basis = self.basis.map(|x| U::lit(x.to_f64_lossy()));
        LatticePoint { ref_basis, transform: self.transform.clone(), scale: self.scale.clone(), basis }
    }

    pub fn to_json(&self) -> LatticeJson {
        let den = self.transform.common_denominator();
        let n = self.dim();
        let num = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let v = &self.transform[(i, j)] * BigRational::from_integer(den.clone());
                        bigint_to_json(&v.to_integer())
                    })
                    .collect()
            })
            .collect();
        LatticeJson {
            ref_basis: self.ref_basis.to_rows().iter().map(|r| r.iter().map(|x| x.to_f64_lossy()).collect()).collect(),
            transform_num: num,
            transform_den: bigint_to_json(&den),
            scale_num: bigint_to_json(self.scale.base.numer()),
            scale_den: bigint_to_json(self.scale.base.denom()),
            scale_root: self.scale.root,
        }
    }

    pub fn from_json(j: &LatticeJson) -> Result<Self> {
        let n = j.ref_basis.len();
        let rows: Vec<Vec<T>> = j.ref_basis.iter().map(|r| r.iter().map(|&x| T::lit(x)).collect()).collect();
        if rows.iter().any(|r| r.len() != n) || j.transform_num.len() != n {
            return Err(Error::Serde("lattice basis must be square".into()));
        }
        let den = bigint_from_json(&j.transform_den)?;
        if den.is_zero() {
            return Err(Error::Serde("zero transform denominator".into()));
        }
        let mut entries = Vec::with_capacity(n * n);
        for row in &j.transform_num {
            if row.len() != n {
                return Err(Error::Serde("transform must be square".into()));
            }
            for v in row {
                entries.push(BigRational::new(bigint_from_json(v)?, den.clone()));
            }
        }
        let transform = QMat::from_fn(n, n, |i, k| entries[i * n + k].clone());
        let scale_den = bigint_from_json(&j.scale_den)?;
        if scale_den.is_zero() {
            return Err(Error::Serde("zero scale denominator".into()));
        }
        let scale = Scale::new(BigRational::new(bigint_from_json(&j.scale_num)?, scale_den), j.scale_root)?;
        Self::from_parts(Mat::from_rows(&rows), transform, scale)
    }
}

/// Serialized form of a [`LatticePoint`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeJson {
    pub ref_basis: Vec<Vec<f64>>,
    pub transform_num: Vec<Vec<serde_json::Value>>,
    pub transform_den: serde_json::Value,
    pub scale_num: serde_json::Value,
    pub scale_den: serde_json::Value,
    pub scale_root: u32,
}

/// Covolume-normalized lattice spanned by the columns of `basis`.
pub fn make_point<T: Real>(basis: &Mat<T>) -> Result<LatticePoint<T>> {
    let n = basis.nrows();
    if !basis.is_square() || n == 0 {
        return Err(Error::SingularBasis);
    }
    let det = basis.det().abs();
    if !(det > T::zero()) || !det.is_finite() {
        return Err(Error::SingularBasis);
    }
    let c = det.powf(-T::one() / T::lit(n as f64));
    LatticePoint::from_parts(basis.scale(c), QMat::identity(n), Scale::one())
}

/// The standard lattice `ℤⁿ`.
pub fn standard_lattice<T: Real>(n: usize) -> LatticePoint<T> {
    make_point(&Mat::identity(n)).expect("identity is invertible")
}

/// A vector in the trace-zero hyperplane of `ℝⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalVector<T> {
    coords: Vec<T>,
}

impl<T: Real> DiagonalVector<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        let s: T = coords.iter().copied().sum();
        let scale = coords.iter().fold(T::one(), |m, x| m.max(x.abs()));
        let tol = T::lit(64.0) * T::unit_roundoff() * T::lit(coords.len() as f64) * scale;
        if s.abs() > tol.max(T::lit(1e-9) * scale) {
            return Err(Error::NotTraceZero(s.to_f64_lossy()));
        }
        Ok(Self { coords })
    }

    /// Subtracts the mean so the coordinates sum to zero.
    pub fn project(mut coords: Vec<T>) -> Self {
        let mean = coords.iter().copied().sum::<T>() / T::lit(coords.len() as f64);
        for c in &mut coords {
            *c = *c - mean;
        }
        Self { coords }
    }

    pub fn zero(n: usize) -> Self {
        Self { coords: vec![T::zero(); n] }
    }

    /// `w₀ = ((n+1−2i)/2)ᵢ`.
    pub fn w0(n: usize) -> Self {
        Self { coords: (1..=n).map(|i| T::lit((n as f64 + 1.0 - 2.0 * i as f64) / 2.0)).collect() }
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| *a + *b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| *a - *b).collect() }
    }

    pub fn scale(&self, c: T) -> Self {
        Self { coords: self.coords.iter().map(|a| *a * c).collect() }
    }

    pub fn neg(&self) -> Self {
        self.scale(-T::one())
    }

    pub fn min_coordinate(&self) -> T {
        self.coords.iter().copied().fold(T::infinity(), T::min)
    }

    /// `diag(e^{vᵢ})`.
    pub fn exp_matrix(&self) -> Mat<T> {
        Mat::from_diag(&self.coords.iter().map(|x| x.exp()).collect::<Vec<_>>())
    }
}

/// `exp(v)·x`: scales row `i` of the basis by `e^{vᵢ}`.
pub fn apply_diagonal<T: Real>(v: &DiagonalVector<T>, x: &LatticePoint<T>) -> LatticePoint<T> {
    let d: Vec<T> = v.coords.iter().map(|c| c.exp()).collect();
    LatticePoint {
        ref_basis: x.ref_basis.scale_rows(&d),
        transform: x.transform.clone(),
        scale: x.scale.clone(),
        basis: x.basis.scale_rows(&d),
    }
}

/// `g·x` for an arbitrary invertible real matrix `g` acting on the reference basis.
pub fn apply_matrix<T: Real>(g: &Mat<T>, x: &LatticePoint<T>) -> LatticePoint<T> {
    LatticePoint {
        ref_basis: g * &x.ref_basis,
        transform: x.transform.clone(),
        scale: x.scale.clone(),
        basis: g * &x.basis,
    }
}

pub fn sup_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;

    #[test]
    fn make_point_normalizes() {
        let x = make_point(&Mat::from_rows(&[vec![2.0, 0.0], vec![0.0, 2.0]])).unwrap();
        assert!(x.basis().sub(&Mat::identity(2)).max_abs() < 1e-15);
        assert_eq!(x.scale(), &Scale::one());
        let s = 2f64.sqrt();
        let y = make_point(&Mat::from_rows(&[vec![1.0, -s], vec![1.0, s]])).unwrap();
        assert!(y.unimodularity_defect() < 1e-14);
        assert!((y.basis()[(0, 0)] - (2.0 * s).powf(-0.5)).abs() < 1e-15);
        assert_eq!(make_point(&Mat::<f64>::zeros(2, 2)).unwrap_err(), Error::SingularBasis);
    }

    #[test]
    fn diagonal_action_is_a_group_action() {
        let x = standard_lattice::<f64>(2);
        let l2 = 2f64.ln();
        let v = DiagonalVector::new(vec![l2, -l2]).unwrap();
        let y = apply_diagonal(&v, &x);
        assert!(y.basis().sub(&Mat::from_diag(&[2.0, 0.5])).max_abs() < 1e-15);
        let w = DiagonalVector::new(vec![0.3, -0.3]).unwrap();
        let a = apply_diagonal(&v, &apply_diagonal(&w, &x));
        let b = apply_diagonal(&v.add(&w), &x);
        assert!(a.basis().sub(b.basis()).max_abs() < 1e-14);
        assert_eq!(apply_diagonal(&DiagonalVector::zero(2), &x).basis(), x.basis());
        assert!(DiagonalVector::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn w0_coordinates() {
        assert_eq!(DiagonalVector::<f64>::w0(3).coords(), &[1.0, 0.0, -1.0]);
        assert_eq!(DiagonalVector::<f64>::w0(2).coords(), &[0.5, -0.5]);
    }

    #[test]
    fn sublattice_scale_is_exact() {
        let x = standard_lattice::<f64>(2);
        let h = ZMat::from_rows(&[vec![1, 0], vec![0, 2]]);
        let y = x.sublattice(&h, &Scale::prime_power(2, 1, 2)).unwrap();
        assert!(y.unimodularity_defect() < 1e-14);
        assert_eq!(y.scale().base(), &BigRational::new(1.into(), 2.into()));
        let z = y.sublattice(&h, &Scale::prime_power(2, 1, 2)).unwrap();
        assert_eq!(z.scale().base(), &BigRational::new(1.into(), 4.into()));
        assert_eq!(z.transform()[(1, 1)], q(4));
        let mixed = Scale::prime_power(2, 1, 2).mul(&Scale::prime_power(3, 1, 3));
        assert_eq!(mixed.root(), 6);
        assert!((mixed.to_real::<f64>() - 2f64.powf(-0.5) * 3f64.powf(-1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let x = make_point(&Mat::from_rows(&[vec![1.0, 0.3], vec![0.2, 1.7]])).unwrap();
        let h = ZMat::from_rows(&[vec![5, 3], vec![0, 1]]);
        let y = x.sublattice(&h, &Scale::prime_power(5, 1, 2)).unwrap();
        let text = serde_json::to_string(&y.to_json()).unwrap();
        let back: LatticePoint<f64> = LatticePoint::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, y);
        assert_eq!(back.basis(), y.basis());
    }
}
