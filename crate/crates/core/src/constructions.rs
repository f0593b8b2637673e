//! The two explicit polynomial families: special fields whose units lie in
//! `ℤ + pℤ[α]`, and Shapira's escape-of-mass fields.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{q, QPoly};
use crate::linalg::Mat;
use crate::numfield::{bigint_to_json, build_field, FieldElement, FieldJson, FieldOptions, NumberField};

const MAX_PRECISION_BITS: u32 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpecialOptions {
    /// Smallest accepted prime; `None` means `2n + 1`.
    pub min_prime: Option<u64>,
    pub precision_bits: u32,
}

impl Default for SpecialOptions {
    fn default() -> Self {
        Self { min_prime: None, precision_bits: crate::numfield::DEFAULT_PRECISION_BITS }
    }
}

#[derive(Clone, Debug)]
pub struct SpecialFieldData {
    pub p: u64,
    pub n: usize,
    /// Solutions of `xⁿ ≡ −1 (mod pⁿ)` in `[1, pⁿ)`, ascending.
    pub residues: Vec<BigInt>,
    /// `aᵢ = aᵢ' + 2i·pⁿ`.
    pub nodes: Vec<BigInt>,
    /// `R = (∏(px − aᵢ) − 1)/pⁿ`, coefficients from the constant term up.
    pub poly: Vec<BigInt>,
    pub field: NumberField,
    /// `pα − aᵢ`.
    pub base_units: Vec<FieldElement>,
    /// `uᵢ = (pα − aᵢ)²`.
    pub units: Vec<FieldElement>,
    /// Entry `(i, j)` is `log σᵢ(uⱼ)`.
    pub log_matrix: Mat<f64>,
}

#[derive(Clone, Debug)]
pub struct ShapiraFieldData {
    pub m: u64,
    pub n: usize,
    /// Minimal node gap as a fraction of `M`.
    pub eta: f64,
    pub nodes: Vec<i64>,
    /// `P = ∏(z − aᵢ) − 1`, coefficients from the constant term up.
    pub poly: Vec<BigInt>,
    pub field: NumberField,
    /// `aᵢ − α`.
    pub base_units: Vec<FieldElement>,
    /// `(aᵢ − α)²`.
    pub units: Vec<FieldElement>,
    pub log_matrix: Mat<f64>,
}

/// Outcome of the exact checks on a special field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialChecks {
    pub residues_are_roots: bool,
    pub poly_identity: bool,
    pub unit_product_is_one: bool,
    pub units_in_suborder: bool,
    pub base_units_have_norm_one: bool,
}

impl SpecialChecks {
    pub fn all(&self) -> bool {
        self.residues_are_roots
            && self.poly_identity
            && self.unit_product_is_one
            && self.units_in_suborder
            && self.base_units_have_norm_one
    }
}

/// Roots of `xⁿ + 1` modulo `pⁿ`, lifted from the roots modulo `p`.
pub fn hensel_roots(p: u64, n: usize) -> Result<Vec<BigInt>> {
    let pb = BigInt::from(p);
    let target = num_traits::pow(pb.clone(), n);
    let f = |x: &BigInt, m: &BigInt| (num_traits::pow(x.clone(), n) + BigInt::one()).mod_floor(m);
    let mut out = Vec::new();
    for r in 1..p {
        let r = BigInt::from(r);
        if !f(&r, &pb).is_zero() {
            continue;
        }
        let mut x = r;
        let mut modulus = pb.clone();
        while modulus < target {
            modulus = (&modulus * &modulus).min(target.clone());
            let fx = num_traits::pow(x.clone(), n) + BigInt::one();
            let dfx = BigInt::from(n) * num_traits::pow(x.clone(), n - 1);
            let inv = mod_inverse(&dfx, &modulus).ok_or(Error::HenselFailure(p))?;
            x = (&x - fx * inv).mod_floor(&modulus);
        }
        if !f(&x, &target).is_zero() {
            return Err(Error::HenselFailure(p));
        }
        out.push(x);
    }
    if out.len() != n {
        return Err(Error::HenselFailure(p));
    }
    out.sort();
    Ok(out)
}

/// `c₀ + c₁α` in a degree-`n` field.
fn linear_element(n: usize, c0: BigInt, c1: BigInt) -> FieldElement {
    let mut c = vec![BigInt::zero(); n];
    c[0] = c0;
    c[1] = c1;
    FieldElement::from_bigints(&c)
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

fn poly_from_roots_scaled(p: &BigInt, nodes: &[BigInt]) -> QPoly {
    nodes.iter().fold(QPoly::constant(q(1)), |acc, a| {
        acc.mul(&QPoly::from_bigints(&[-a.clone(), p.clone()]))
    })
}

fn integer_coeffs(poly: &QPoly) -> Option<Vec<BigInt>> {
    poly.coeffs().iter().map(|c| c.is_integer().then(|| c.to_integer())).collect()
}

fn build_with_retry(poly: &[BigInt], bits: u32, units: &[FieldElement]) -> Result<(NumberField, Mat<f64>)> {
    let mut bits = bits;
    loop {
        let field = build_field(poly, FieldOptions { precision_bits: bits, assume_irreducible: true })
            .map_err(|e| match e {
                Error::NotTotallyReal { .. } | Error::RepeatedRoot => Error::RootCertificationFailure(e.to_string()),
                other => other,
            })?;
        let n = field.degree();
        let logs: Result<Vec<Vec<f64>>> = units.iter().map(|u| field.log_embedding::<f64>(u)).collect();
        match logs {
            Ok(l) => return Ok((field, Mat::from_fn(n, units.len(), |i, j| l[j][i]))),
            Err(Error::PrecisionExhausted) if bits < MAX_PRECISION_BITS => bits *= 2,
            Err(e) => return Err(e),
        }
    }
}

pub fn special_field(p: u64, n: usize) -> Result<SpecialFieldData> {
    special_field_with(p, n, SpecialOptions::default())
}

pub fn special_field_with(p: u64, n: usize, opts: SpecialOptions) -> Result<SpecialFieldData> {
    if n < 2 {
        return Err(Error::Config("degree must be at least 2".into()));
    }
    let modulus = 2 * n as u64;
    if !crate::hecke::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p % modulus != 1 {
        return Err(Error::BadCongruence { p, modulus });
    }
    let min = opts.min_prime.unwrap_or(modulus + 1);
    if p < min {
        return Err(Error::PrimeTooSmall { p, min });
    }
    let residues = hensel_roots(p, n)?;
    let pb = BigInt::from(p);
    let pn = num_traits::pow(pb.clone(), n);
    let nodes: Vec<BigInt> = residues.iter().enumerate().map(|(i, a)| a + BigInt::from(2 * i) * &pn).collect();
    let product = poly_from_roots_scaled(&pb, &nodes);
    let r = product.sub(&QPoly::constant(q(1))).scale(&crate::exact::qz(&pn).recip());
    let poly = integer_coeffs(&r).ok_or_else(|| Error::Config("R is not integral".into()))?;
    let base_units: Vec<FieldElement> =
        nodes.iter().map(|a| linear_element(n, -a.clone(), pb.clone())).collect();
    // the field is only needed for the squares; squaring is exact polynomial arithmetic
    let provisional = build_field(&poly, FieldOptions { precision_bits: 64, assume_irreducible: true })
        .map_err(|e| Error::RootCertificationFailure(e.to_string()))?;
    let units: Vec<FieldElement> = base_units.iter().map(|u| provisional.mul(u, u)).collect();
    let (field, log_matrix) = build_with_retry(&poly, opts.precision_bits, &units)?;
    Ok(SpecialFieldData { p, n, residues, nodes, poly, field, base_units, units, log_matrix })
}

impl SpecialFieldData {
    /// The exact identities the construction promises.
    pub fn checks(&self) -> Result<SpecialChecks> {
        let pb = BigInt::from(self.p);
        let pn = num_traits::pow(pb.clone(), self.n);
        let residues_are_roots = self
            .residues
            .iter()
            .chain(&self.nodes)
            .all(|a| (num_traits::pow(a.clone(), self.n) + BigInt::one()).mod_floor(&pn).is_zero());
        let lhs = QPoly::from_bigints(&self.poly).scale(&crate::exact::qz(&pn)).add(&QPoly::constant(q(1)));
        let poly_identity = lhs == poly_from_roots_scaled(&pb, &self.nodes);
        let k = &self.field;
        let one = FieldElement::one(self.n);
        let prod_base = self.base_units.iter().fold(one.clone(), |acc, u| k.mul(&acc, u));
        let prod = self.units.iter().fold(one.clone(), |acc, u| k.mul(&acc, u));
        let unit_product_is_one = prod_base == one && prod == one;
        let mut units_in_suborder = true;
        for u in &self.units {
            units_in_suborder &= k.in_suborder(u, self.p, 1)?;
        }
        let mut base_units_have_norm_one = true;
        for u in &self.base_units {
            base_units_have_norm_one &= k.field_norm(u)?.abs().is_one();
        }
        Ok(SpecialChecks {
            residues_are_roots,
            poly_identity,
            unit_product_is_one,
            units_in_suborder,
            base_units_have_norm_one,
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "construction": "special",
            "p": self.p,
            "n": self.n,
            "field": self.field.to_json(),
            "residues": self.residues.iter().map(bigint_to_json).collect::<Vec<_>>(),
            "nodes": self.nodes.iter().map(bigint_to_json).collect::<Vec<_>>(),
            "units": units_json(&self.units),
            "log_matrix": self.log_matrix.to_rows(),
            "expected_log_matrix": expected_unit_log_matrix(self.p, self.n).to_rows(),
        })
    }
}

fn units_json(units: &[FieldElement]) -> Vec<Vec<serde_json::Value>> {
    units
        .iter()
        .map(|u| u.integer_coords().unwrap_or_default().iter().map(bigint_to_json).collect())
        .collect()
}

/// Leading-order prediction for `log σᵢ(uⱼ)`: `−2n(n−1)·log p` on the
/// diagonal and `2n·log p` elsewhere.
pub fn expected_unit_log_matrix(p: u64, n: usize) -> Mat<f64> {
    let lp = (p as f64).ln();
    let nf = n as f64;
    Mat::from_fn(n, n, |i, j| if i == j { -2.0 * nf * (nf - 1.0) * lp } else { 2.0 * nf * lp })
}

/// Nodes `aᵢ = ⌊iM/n⌋`, `i = 1..n`.
pub fn shapira_nodes(m: u64, n: usize) -> Vec<i64> {
    (1..=n as u64).map(|i| (i * m / n as u64) as i64).collect()
}

pub fn shapira_field(m: u64, n: usize) -> Result<ShapiraFieldData> {
    shapira_field_with_nodes(m, n, &shapira_nodes(m, n), crate::numfield::DEFAULT_PRECISION_BITS)
}

/// Smallest node gap accepted regardless of `M`: it keeps every root within
/// `1/2` of its node.
pub const MIN_NODE_GAP: i64 = 3;

pub fn shapira_field_with_nodes(m: u64, n: usize, nodes: &[i64], precision_bits: u32) -> Result<ShapiraFieldData> {
    if n < 2 || nodes.len() != n {
        return Err(Error::Config("need n ≥ 2 nodes".into()));
    }
    let eta = 1.0 / (2.0 * n as f64);
    let gap = nodes.windows(2).map(|w| w[1] - w[0]).min().unwrap_or(0);
    let needed = (eta * m as f64).max(MIN_NODE_GAP as f64);
    if (gap as f64) < needed || nodes[0] < 0 || nodes[n - 1] as u64 > m {
        return Err(Error::NodesTooClose { gap, needed });
    }
    let product = nodes.iter().fold(QPoly::constant(q(1)), |acc, &a| acc.mul(&QPoly::from_ints(&[-a, 1])));
    let p = product.sub(&QPoly::constant(q(1)));
    let poly = integer_coeffs(&p).expect("integer nodes");
    let base_units: Vec<FieldElement> =
        nodes.iter().map(|&a| linear_element(n, BigInt::from(a), BigInt::from(-1))).collect();
    let provisional = build_field(&poly, FieldOptions { precision_bits: 64, assume_irreducible: true })
        .map_err(|e| Error::RootCertificationFailure(e.to_string()))?;
    let units: Vec<FieldElement> = base_units.iter().map(|u| provisional.mul(u, u)).collect();
    let (field, log_matrix) = build_with_retry(&poly, precision_bits, &units)?;
    Ok(ShapiraFieldData { m, n, eta, nodes: nodes.to_vec(), poly, field, base_units, units, log_matrix })
}

impl ShapiraFieldData {
    /// `N(aᵢ − α) = P(aᵢ) = −1` for every node, checked by resultant.
    pub fn norms_are_minus_one(&self) -> Result<bool> {
        let mut ok = true;
        for u in &self.base_units {
            ok &= self.field.field_norm(u)? == q(-1);
        }
        Ok(ok)
    }

    /// Certified positivity of every embedding of every squared unit.
    pub fn units_totally_positive(&self) -> Result<bool> {
        let mut ok = true;
        for u in &self.units {
            for e in self.field.embed_certified(u)? {
                ok &= !e.contains_zero() && e.mid.is_positive();
            }
        }
        Ok(ok)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "construction": "shapira",
            "M": self.m,
            "n": self.n,
            "eta": self.eta,
            "field": self.field.to_json(),
            "nodes": self.nodes,
            "units": units_json(&self.units),
            "log_matrix": self.log_matrix.to_rows(),
        })
    }
}

/// Field document emitted by the CLI, for either construction.
pub fn field_json_from_document(doc: &serde_json::Value) -> Result<FieldJson> {
    Ok(serde_json::from_value(doc.get("field").cloned().unwrap_or_else(|| doc.clone()))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn special_quadratic_at_five() {
        let d = special_field(5, 2).unwrap();
        assert_eq!(d.residues, vec![BigInt::from(7), BigInt::from(18)]);
        assert_eq!(d.nodes, vec![BigInt::from(7), BigInt::from(68)]);
        assert_eq!(d.poly, vec![BigInt::from(19), BigInt::from(-15), BigInt::from(1)]);
        assert!(d.checks().unwrap().all());
        // (5α−7)(5α−68) = 1
        let prod = d.field.mul(&d.base_units[0], &d.base_units[1]);
        assert_eq!(prod, FieldElement::one(2));
        let l = &d.log_matrix;
        assert!((l[(0, 0)] + 8.2223).abs() < 1e-3 && (l[(1, 0)] - 8.2223).abs() < 1e-3);
        assert!((l[(0, 0)] + l[(0, 1)]).abs() < 1e-9);
    }

    #[test]
    fn congruence_gate() {
        assert_eq!(special_field(7, 2).unwrap_err(), Error::BadCongruence { p: 7, modulus: 4 });
        assert_eq!(special_field(9, 2).unwrap_err(), Error::NotPrime(9));
        let opts = SpecialOptions { min_prime: Some(16), ..SpecialOptions::default() };
        assert_eq!(special_field_with(5, 2, opts).unwrap_err(), Error::PrimeTooSmall { p: 5, min: 16 });
    }

    #[test]
    fn hensel_lifts() {
        let r = hensel_roots(13, 3).unwrap();
        let m = BigInt::from(13i64.pow(3));
        assert_eq!(r.len(), 3);
        for a in r {
            assert!((num_traits::pow(a, 3) + BigInt::one()).mod_floor(&m).is_zero());
        }
    }

    #[test]
    fn expected_logs() {
        let e = expected_unit_log_matrix(5, 2);
        assert!((e[(0, 0)] + 4.0 * 5f64.ln()).abs() < 1e-12);
        assert!((e[(0, 0)] + 6.438).abs() < 1e-3 && (e[(0, 1)] - 6.438).abs() < 1e-3);
        let e3 = expected_unit_log_matrix(7, 3);
        for i in 0..3 {
            assert!((0..3).map(|j| e3[(i, j)]).sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn shapira_ten() {
        let s = shapira_field(10, 2).unwrap();
        assert_eq!(s.nodes, vec![5, 10]);
        assert_eq!(s.poly, vec![BigInt::from(49), BigInt::from(-15), BigInt::from(1)]);
        let r: Vec<f64> = s.field.roots().iter().map(|r| crate::scalar::rational_to_f64(&r.mid)).collect();
        assert!((r[0] - (15.0 - 29f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!((r[0] - 4.8074).abs() < 1e-4 && (r[1] - 10.1926).abs() < 1e-4);
        assert!(s.norms_are_minus_one().unwrap());
        assert!(s.units_totally_positive().unwrap());
        assert!(matches!(shapira_field(3, 2), Err(Error::NodesTooClose { gap: 2, .. })));
    }
}
