//! Totally real number fields `K = ℚ[α]`, their real embeddings, exact norms,
//! unit log vectors and unit lattices.
//!
//! Orders are always the monogenic order `ℤ[α]`; coordinates are taken in the
//! power basis `1, α, …, α^{n−1}`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{q, qz, CertifiedRoot, QMat, QPoly, ZMat};
use crate::linalg::Mat;
use crate::scalar::{rational_to_f64, Real};

pub const DEFAULT_PRECISION_BITS: u32 = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldOptions {
    pub precision_bits: u32,
    /// Skip the rational-root reducibility check (and allow degree > 4).
    pub assume_irreducible: bool,
}

impl Default for FieldOptions {
    fn default() -> Self {
        Self { precision_bits: DEFAULT_PRECISION_BITS, assume_irreducible: false }
    }
}

/// A totally real field given by a monic integer minimal polynomial together
/// with certified enclosures of its real roots.
#[derive(Clone, Debug, PartialEq)]
pub struct NumberField {
    degree: usize,
    min_poly: Vec<BigInt>,
    poly: QPoly,
    roots: Vec<CertifiedRoot>,
    embedding_order: Vec<usize>,
    precision_bits: u32,
}

/// Element of `K` in power-basis coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    coeffs: Vec<BigRational>,
}

impl FieldElement {
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        Self { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| q(x)).collect())
    }

    pub fn from_bigints(c: &[BigInt]) -> Self {
        Self::new(c.iter().map(qz).collect())
    }

    pub fn scalar(n: usize, c: BigRational) -> Self {
        let mut coeffs = vec![BigRational::zero(); n];
        coeffs[0] = c;
        Self { coeffs }
    }

    pub fn one(n: usize) -> Self {
        Self::scalar(n, BigRational::one())
    }

    /// The generator `α`.
    pub fn generator(n: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); n];
        coeffs[1] = BigRational::one();
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(BigRational::is_integer)
    }

    pub fn to_poly(&self) -> QPoly {
        QPoly::new(self.coeffs.clone())
    }

    /// Integer coordinates, if the element lies in `ℤ[α]`.
    pub fn integer_coords(&self) -> Option<Vec<BigInt>> {
        self.is_integral().then(|| self.coeffs.iter().map(|c| c.to_integer()).collect())
    }
}

/// Enclosure `[mid − radius, mid + radius]` of an embedded value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    pub mid: BigRational,
    pub radius: BigRational,
}

impl Enclosure {
    pub fn contains_zero(&self) -> bool {
        self.mid.abs() <= self.radius
    }

    pub fn value(&self) -> f64 {
        rational_to_f64(&self.mid)
    }

    /// `ln |mid|`, accurate also far outside the `f64` exponent range.
    pub fn ln_abs(&self) -> f64 {
        rational_ln_abs(&self.mid)
    }
}

pub fn rational_ln_abs(x: &BigRational) -> f64 {
    fn ln_int(z: &BigInt) -> f64 {
        let bits = z.bits() as i64;
        let shift = (bits - 60).max(0);
        let head = (z.abs() >> shift as usize).to_f64().unwrap_or(f64::NAN);
        head.ln() + shift as f64 * std::f64::consts::LN_2
    }
    ln_int(x.numer()) - ln_int(x.denom())
}

/// Log-embedding lattice of a group of units, inside the trace-zero hyperplane.
#[derive(Clone, Debug)]
pub struct UnitLogLattice<T: Real> {
    /// `n × (n−1)`, columns are generators.
    generators: Mat<T>,
    regulator: T,
}

impl<T: Real> UnitLogLattice<T> {
    pub fn from_generators(generators: Mat<T>) -> Result<Self> {
        let n = generators.nrows();
        let r = generators.ncols();
        for j in 0..r {
            let s: T = generators.column(j).into_iter().sum();
            let scale = generators.column(j).iter().fold(T::one(), |m, x| m.max(x.abs()));
            if s.abs() > T::lit(1e-9) * scale {
                return Err(Error::NotTraceZero(s.to_f64_lossy()));
            }
        }
        let gram = &generators.transpose() * &generators;
        let det = gram.det();
        if r + 1 != n || !(det > T::zero()) {
            return Err(Error::DegenerateSpan { rank: r.min(n - 1), needed: n - 1 });
        }
        Ok(Self { generators, regulator: det.sqrt() })
    }

    pub fn generators(&self) -> &Mat<T> {
        &self.generators
    }

    pub fn generator(&self, j: usize) -> Vec<T> {
        self.generators.column(j)
    }

    pub fn rank(&self) -> usize {
        self.generators.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.generators.nrows()
    }

    /// Covolume inside the trace-zero hyperplane.
    pub fn regulator(&self) -> T {
        self.regulator
    }

    /// `Σ cⱼ gⱼ`.
    pub fn combine(&self, coords: &[T]) -> Vec<T> {
        self.generators.mul_vec(coords)
    }
}

impl NumberField {
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `[c₀, …, c_{n−1}, 1]`.
    pub fn min_poly(&self) -> &[BigInt] {
        &self.min_poly
    }

    pub fn poly(&self) -> &QPoly {
        &self.poly
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    /// Root enclosures in embedding order: `roots()[i]` is `σᵢ(α)`.
    pub fn roots(&self) -> Vec<CertifiedRoot> {
        self.embedding_order.iter().map(|&k| self.roots[k].clone()).collect()
    }

    pub fn embedding_order(&self) -> &[usize] {
        &self.embedding_order
    }

    /// Reorders the embeddings; `order[i]` is the index (in ascending root
    /// order) of the root used for `σᵢ`.
    pub fn with_embedding_order(mut self, order: Vec<usize>) -> Result<Self> {
        let mut sorted = order.clone();
        sorted.sort_unstable();
        if sorted != (0..self.degree).collect::<Vec<_>>() {
            return Err(Error::Config("embedding order is not a permutation".into()));
        }
        self.embedding_order = order;
        Ok(self)
    }

    fn check(&self, e: &FieldElement) -> Result<()> {
        if e.len() != self.degree {
            return Err(Error::DimensionMismatch { degree: self.degree, found: e.len() });
        }
        Ok(())
    }

    /// Reduces an arbitrary polynomial in `α` to a field element.
    pub fn element_from_poly(&self, p: &QPoly) -> FieldElement {
        let r = p.rem(&self.poly);
        FieldElement::new((0..self.degree).map(|k| r.coeff(k)).collect())
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.element_from_poly(&a.to_poly().mul(&b.to_poly()))
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement::new(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect())
    }

    pub fn pow(&self, a: &FieldElement, mut e: u32) -> FieldElement {
        let mut base = a.clone();
        let mut acc = FieldElement::one(self.degree);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Certified enclosures of `σᵢ(e)` for all `i`, in embedding order.
    pub fn embed_certified(&self, e: &FieldElement) -> Result<Vec<Enclosure>> {
        self.check(e)?;
        let p = e.to_poly();
        let zero = e.is_zero();
        self.roots()
            .iter()
            .map(|root| {
                let mid = p.eval(&root.mid);
                // |p(x) − p(mid)| ≤ r · Σ k|c_k|(|mid| + r)^(k−1)
                let reach = root.mid.abs() + &root.radius;
                let mut slope = BigRational::zero();
                let mut pw = BigRational::one();
                for (k, c) in p.coeffs().iter().enumerate().skip(1) {
                    slope += c.abs() * q(k as i64) * &pw;
                    pw *= &reach;
                }
                let enc = Enclosure { mid, radius: slope * &root.radius };
                if !zero && enc.contains_zero() {
                    return Err(Error::PrecisionExhausted);
                }
                Ok(enc)
            })
            .collect()
    }

    /// `(σ₁(e), …, σₙ(e))`.
    pub fn embed_element<T: Real>(&self, e: &FieldElement) -> Result<Vec<T>> {
        Ok(self.embed_certified(e)?.iter().map(|x| T::from_rational(&x.mid)).collect())
    }

    /// Exact norm `N_{K/ℚ}(e)` as the resultant of the minimal polynomial and `e`.
    pub fn field_norm(&self, e: &FieldElement) -> Result<BigRational> {
        self.check(e)?;
        if e.is_zero() {
            return Err(Error::ZeroElement);
        }
        Ok(self.poly.resultant(&e.to_poly()))
    }

    /// `(log|σᵢ(u)|)ᵢ` for a unit `u`.
    pub fn log_embedding<T: Real>(&self, u: &FieldElement) -> Result<Vec<T>> {
        let norm = self.field_norm(u)?;
        if norm.abs() != BigRational::one() {
            return Err(Error::NotAUnit(norm.to_string()));
        }
        Ok(self.embed_certified(u)?.iter().map(|x| T::lit(x.ln_abs())).collect())
    }

    /// Whether `u ∈ ℤ + p^k ℤ[α]`.
    pub fn in_suborder(&self, u: &FieldElement, p: u64, k: u32) -> Result<bool> {
        self.check(u)?;
        let coords = u.integer_coords().ok_or(Error::NonIntegralElement)?;
        let pk = num_traits::pow(BigInt::from(p), k as usize);
        Ok(coords[1..].iter().all(|c| c.is_multiple_of(&pk)))
    }

    /// Matrix of multiplication by `u` in the power basis: column `j` holds
    /// the coordinates of `u·αʲ`.
    pub fn multiplication_matrix(&self, u: &FieldElement) -> Result<QMat> {
        self.check(u)?;
        let n = self.degree;
        let mut cols = Vec::with_capacity(n);
        let mut cur = u.clone();
        let alpha = FieldElement::generator(n);
        for _ in 0..n {
            cols.push(cur.clone());
            cur = self.mul(&cur, &alpha);
        }
        Ok(QMat::from_fn(n, n, |i, j| cols[j].coeffs[i].clone()))
    }

    /// Lattice generated by the log vectors of `units`. Redundant generators
    /// are allowed; the lattice they span is reduced to a basis.
    pub fn unit_log_lattice<T: Real>(&self, units: &[FieldElement]) -> Result<UnitLogLattice<T>> {
        let n = self.degree;
        let logs: Vec<Vec<T>> = units.iter().map(|u| self.log_embedding::<T>(u)).collect::<Result<_>>()?;
        let basis_idx = independent_subset(&logs);
        if basis_idx.len() < n - 1 {
            return Err(Error::DegenerateSpan { rank: basis_idx.len(), needed: n - 1 });
        }
        let basis = Mat::from_fn(n, n - 1, |i, j| logs[basis_idx[j]][i]);
        let gram = &basis.transpose() * &basis;
        let gram_inv = gram.inverse().ok_or(Error::DegenerateSpan { rank: 0, needed: n - 1 })?;
        // coordinates of the remaining vectors in the chosen basis
        let mut extra: Vec<Vec<T>> = Vec::new();
        for (k, w) in logs.iter().enumerate() {
            if basis_idx.contains(&k) {
                continue;
            }
            let btw = basis.transpose().mul_vec(w);
            extra.push(gram_inv.mul_vec(&btw));
        }
        let Some(den) = common_small_denominator(&extra) else {
            return Err(Error::NonLatticeGenerators);
        };
        if den == 1 {
            return UnitLogLattice::from_generators(basis);
        }
        // refine: HNF of all generators in basis coordinates scaled by `den`
        let r = n - 1;
        let mut cols: Vec<Vec<BigInt>> = (0..r)
            .map(|j| (0..r).map(|i| BigInt::from(if i == j { den } else { 0 })).collect())
            .collect();
        for c in &extra {
            cols.push(c.iter().map(|x| BigInt::from((x.to_f64_lossy() * den as f64).round() as i64)).collect());
        }
        let gens = ZMat::from_fn(r, cols.len(), |i, j| cols[j][i].clone());
        let h = gens.column_hnf().ok_or(Error::DegenerateSpan { rank: 0, needed: r })?;
        let hf: Mat<T> = h.to_real::<T>().scale(T::one() / T::lit(den as f64));
        UnitLogLattice::from_generators(&basis * &hf)
    }

    pub fn to_json(&self) -> FieldJson {
        let digits = (self.precision_bits as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
        FieldJson {
            degree: self.degree,
            min_poly: self.min_poly.iter().map(bigint_to_json).collect(),
            roots: self.roots().iter().map(|r| r.to_decimal(digits)).collect(),
            precision_bits: self.precision_bits,
        }
    }

    pub fn from_json(j: &FieldJson, assume_irreducible: bool) -> Result<Self> {
        let coeffs: Vec<BigInt> = j.min_poly.iter().map(bigint_from_json).collect::<Result<_>>()?;
        let field = build_field(&coeffs, FieldOptions { precision_bits: j.precision_bits, assume_irreducible })?;
        if field.degree != j.degree {
            return Err(Error::Serde("degree does not match min_poly".into()));
        }
        Ok(field)
    }
}

/// Serialized form of a [`NumberField`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldJson {
    pub degree: usize,
    pub min_poly: Vec<serde_json::Value>,
    pub roots: Vec<String>,
    pub precision_bits: u32,
}

pub(crate) fn bigint_to_json(z: &BigInt) -> serde_json::Value {
    match z.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::String(z.to_string()),
    }
}

pub(crate) fn bigint_from_json(v: &serde_json::Value) -> Result<BigInt> {
    match v {
        serde_json::Value::Number(n) => {
            n.as_i64().map(BigInt::from).ok_or_else(|| Error::Serde(format!("not an integer: {n}")))
        }
        serde_json::Value::String(s) => s.parse().map_err(|_| Error::Serde(format!("not an integer: {s}"))),
        other => Err(Error::Serde(format!("not an integer: {other}"))),
    }
}

/// Builds the field of a monic integer polynomial `[c₀, …, c_{n−1}, 1]`,
/// isolating all `n` real roots to radius `2^-precision_bits`.
pub fn build_field(min_poly: &[BigInt], opts: FieldOptions) -> Result<NumberField> {
    let poly = QPoly::from_bigints(min_poly);
    let degree = match poly.degree() {
        Some(d) if d >= 2 && poly.is_monic() && poly.coeffs().len() == min_poly.len() => d,
        _ => return Err(Error::BadPolynomial),
    };
    if !opts.assume_irreducible && degree > 4 {
        return Err(Error::IrreducibilityUnchecked(degree));
    }
    let g = poly.gcd(&poly.derivative());
    if g.degree() != Some(0) {
        return Err(Error::RepeatedRoot);
    }
    let roots = poly.isolate_real_roots(opts.precision_bits);
    if roots.len() < degree {
        return Err(Error::NotTotallyReal { degree, found: roots.len() });
    }
    for w in roots.windows(2) {
        if w[1].lower() <= w[0].upper() {
            return Err(Error::RepeatedRoot);
        }
    }
    if !opts.assume_irreducible {
        // only integer roots are possible for a monic integer polynomial
        for r in &roots {
            let cand = r.mid.round();
            if poly.eval(&cand).is_zero() {
                return Err(Error::Reducible(cand.to_integer().to_string()));
            }
        }
    }
    Ok(NumberField {
        degree,
        min_poly: min_poly.to_vec(),
        poly,
        roots,
        embedding_order: (0..degree).collect(),
        precision_bits: opts.precision_bits,
    })
}

pub fn build_field_i64(min_poly: &[i64], opts: FieldOptions) -> Result<NumberField> {
    build_field(&min_poly.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>(), opts)
}

/// Indices of a maximal linearly independent subset (greedy, in order).
fn independent_subset<T: Real>(vecs: &[Vec<T>]) -> Vec<usize> {
    let mut ortho: Vec<Vec<T>> = Vec::new();
    let mut idx = Vec::new();
    for (k, v) in vecs.iter().enumerate() {
        let norm0 = v.iter().map(|x| *x * *x).sum::<T>().sqrt();
        if norm0 == T::zero() {
            continue;
        }
        let mut w = v.clone();
        for o in &ortho {
            let d: T = w.iter().zip(o).map(|(a, b)| *a * *b).sum();
            for (wi, oi) in w.iter_mut().zip(o) {
                *wi = *wi - d * *oi;
            }
        }
        let norm = w.iter().map(|x| *x * *x).sum::<T>().sqrt();
        if norm > T::lit(1e-8) * norm0 {
            ortho.push(w.iter().map(|x| *x / norm).collect());
            idx.push(k);
        }
    }
    idx
}

/// Smallest `d ≤ 720` making every coordinate an integer within tolerance.
fn common_small_denominator<T: Real>(coords: &[Vec<T>]) -> Option<i64> {
    (1..=720i64).find(|&d| {
        coords.iter().flatten().all(|c| {
            let x = c.to_f64_lossy() * d as f64;
            (x - x.round()).abs() < 1e-6 * (1.0 + x.abs()).sqrt()
        })
    })
}
