//! Univariate polynomials over ℚ, Sturm sequences and certified real roots.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{q, qz};

/// Polynomial with rational coefficients, lowest degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QPoly {
    coeffs: Vec<BigRational>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| q(x)).collect())
    }

    pub fn from_bigints(c: &[BigInt]) -> Self {
        Self::new(c.iter().map(qz).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// `x − r`
    pub fn linear_root(r: BigRational) -> Self {
        Self::new(vec![-r, BigRational::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_one()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * q(k as i64)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.leading();
        let mut r = self.coeffs.clone();
        let Some(sd) = self.degree() else {
            return (Self::zero(), Self::zero());
        };
        if sd < dd {
            return (Self::zero(), self.clone());
        }
        let mut quo = vec![BigRational::zero(); sd - dd + 1];
        for k in (0..=sd - dd).rev() {
            let c = &r[k + dd] / &lead;
            if c.is_zero() {
                continue;
            }
            for (j, dj) in d.coeffs.iter().enumerate() {
                r[k + j] -= &c * dj;
            }
            quo[k] = c;
        }
        r.truncate(dd);
        (Self::new(quo), Self::new(r))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.div_rem(d).1
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let l = a.leading();
        a.scale(&(BigRational::one() / l))
    }

    /// Resultant `lc(self)^deg(other) · ∏_{self(r)=0} other(r)`, computed by
    /// the Euclidean remainder sequence.
    pub fn resultant(&self, other: &Self) -> BigRational {
        let (Some(da), Some(db)) = (self.degree(), other.degree()) else {
            return BigRational::zero();
        };
        if da == 0 {
            return num_traits::pow(self.leading(), db);
        }
        if db == 0 {
            return num_traits::pow(other.leading(), da);
        }
        // res(a, b) = lc(a)^(deg b − deg r) · res(a, r) with r = b mod a
        let r = other.rem(self);
        match r.degree() {
            None => BigRational::zero(),
            Some(dr) => {
                let factor = num_traits::pow(self.leading(), db - dr);
                // res(a, r) = (−1)^(deg a · deg r) res(r, a)
                let sign = if (da * dr) % 2 == 1 { -BigRational::one() } else { BigRational::one() };
                factor * sign * r.resultant(self)
            }
        }
    }

    /// Sturm sequence `f, f', −rem(…), …`.
    pub fn sturm_sequence(&self) -> Vec<QPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let k = seq.len();
            if seq[k - 1].is_zero() {
                seq.pop();
                break;
            }
            let r = seq[k - 2].rem(&seq[k - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.scale(&-BigRational::one()));
        }
        seq
    }

    /// `p(x)` reduced modulo the monic `modulus`.
    pub fn reduce_mod(&self, modulus: &Self) -> Self {
        self.rem(modulus)
    }

    /// Cauchy bound on the absolute value of all roots.
    pub fn root_bound(&self) -> BigRational {
        let lead = self.leading().abs();
        let m = self.coeffs[..self.coeffs.len() - 1]
            .iter()
            .map(|c| c.abs() / &lead)
            .fold(BigRational::zero(), |a, b| if b > a { b } else { a });
        m + BigRational::one()
    }

    /// Certified isolation of all real roots to radius `2^-bits`, ascending.
    /// Requires square-free input.
    pub fn isolate_real_roots(&self, bits: u32) -> Vec<CertifiedRoot> {
        let sturm = self.sturm_sequence();
        let b = dyadic_ceil(&self.root_bound());
        let lo = -b.clone();
        let hi = b;
        let mut out = Vec::new();
        let mut stack = vec![(lo.clone(), hi.clone(), variations(&sturm, &lo) - variations(&sturm, &hi))];
        while let Some((a, b, count)) = stack.pop() {
            if count == 0 {
                continue;
            }
            if count == 1 {
                out.push(self.refine_root(&a, &b, bits));
                continue;
            }
            let mid = (&a + &b) / q(2);
            let vm = variations(&sturm, &mid);
            let left = variations(&sturm, &a) - vm;
            stack.push((mid.clone(), b, count - left));
            stack.push((a, mid, left));
        }
        out.sort_by(|x, y| x.mid.cmp(&y.mid));
        out
    }

    /// Refines the unique root in `(a, b]`.
    fn refine_root(&self, a: &BigRational, b: &BigRational, bits: u32) -> CertifiedRoot {
        let radius = BigRational::new(BigInt::one(), BigInt::one() << bits as usize);
        let (mut a, mut b) = (a.clone(), b.clone());
        if self.eval(&b).is_zero() {
            return CertifiedRoot { mid: b, radius: BigRational::zero() };
        }
        // b is not a root, so its sign is a valid reference even when a is one
        let sb = self.eval(&b).signum();
        let coarse = BigRational::new(BigInt::one(), BigInt::one() << 24usize);
        // bisection down to a coarse bracket
        while &b - &a > coarse {
            let m = (&a + &b) / q(2);
            let fm = self.eval(&m);
            if fm.is_zero() {
                return CertifiedRoot { mid: m, radius: BigRational::zero() };
            }
            if fm.signum() == sb {
                b = m;
            } else {
                a = m;
            }
        }
        // Newton steps rounded to the working grid, certified by a sign change
        let df = self.derivative();
        let mut x = (&a + &b) / q(2);
        let scale = BigInt::one() << (bits as usize + 8);
        for _ in 0..16 {
            let d = df.eval(&x);
            if d.is_zero() {
                break;
            }
            let step = self.eval(&x) / d;
            x = round_to_grid(&(&x - &step), &scale);
            if step.abs() < radius.clone() / q(16) {
                break;
            }
        }
        let lo = &x - &radius;
        let hi = &x + &radius;
        let inside = lo > a && hi <= b;
        let fl = self.eval(&lo);
        let fh = self.eval(&hi);
        if inside && (fl.is_zero() || fh.is_zero() || fl.signum() != fh.signum()) {
            return CertifiedRoot { mid: x, radius };
        }
        // Newton did not certify: finish by plain bisection
        let width = &radius * q(2);
        while &b - &a > width {
            let m = (&a + &b) / q(2);
            let fm = self.eval(&m);
            if fm.is_zero() {
                return CertifiedRoot { mid: m, radius: BigRational::zero() };
            }
            if fm.signum() == sb {
                b = m;
            } else {
                a = m;
            }
        }
        CertifiedRoot { mid: (&a + &b) / q(2), radius }
    }
}

impl fmt::Debug for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self.coeffs.iter().map(ToString::to_string).collect();
        write!(f, "QPoly[{}]", terms.join(", "))
    }
}

/// A real root known to lie in `[mid − radius, mid + radius]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedRoot {
    pub mid: BigRational,
    pub radius: BigRational,
}

impl CertifiedRoot {
    pub fn lower(&self) -> BigRational {
        &self.mid - &self.radius
    }

    pub fn upper(&self) -> BigRational {
        &self.mid + &self.radius
    }

    /// Decimal rendering of the midpoint with `digits` fractional digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        rational_to_decimal(&self.mid, digits)
    }
}

fn variations(seq: &[QPoly], x: &BigRational) -> i64 {
    let mut count = 0;
    let mut last = 0i8;
    for p in seq {
        let v = p.eval(x);
        let s = if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

fn dyadic_ceil(x: &BigRational) -> BigRational {
    let mut p = BigRational::one();
    while &p < x {
        p *= q(2);
    }
    p
}

fn round_to_grid(x: &BigRational, scale: &BigInt) -> BigRational {
    let s = qz(scale);
    BigRational::new((x * &s).round().to_integer(), scale.clone())
}

/// Truncated decimal expansion (round half away from zero) of a rational.
pub fn rational_to_decimal(x: &BigRational, digits: usize) -> String {
    let ten = num_traits::pow(BigInt::from(10), digits);
    let scaled = (x * qz(&ten)).round().to_integer();
    let neg = scaled.is_negative();
    let s = scaled.abs().to_string();
    let s = if s.len() <= digits { format!("{}{}", "0".repeat(digits + 1 - s.len()), s) } else { s };
    let (int, frac) = s.split_at(s.len() - digits);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

/// Parses a plain decimal string into an exact rational.
pub fn decimal_to_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let d = num_traits::pow(BigInt::from(10), frac.len());
    let v = BigRational::new(n, d);
    Some(if neg { -v } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resultant_gives_norm() {
        // norm(5α − 7) in ℚ[x]/(x² − 15x + 19)
        let f = QPoly::from_ints(&[19, -15, 1]);
        let g = QPoly::from_ints(&[-7, 5]);
        assert_eq!(f.resultant(&g), q(-1));
        // constant element: c^n
        assert_eq!(f.resultant(&QPoly::from_ints(&[7])), q(49));
    }

    #[test]
    fn sturm_counts_roots() {
        let f = QPoly::from_ints(&[-2, 0, 1]);
        let roots = f.isolate_real_roots(64);
        assert_eq!(roots.len(), 2);
        let r = crate::scalar::rational_to_f64(&roots[1].mid);
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
        assert!(QPoly::from_ints(&[1, 0, 1]).isolate_real_roots(64).is_empty());
    }

    #[test]
    fn decimal_round_trip() {
        let x = BigRational::new(BigInt::from(-22), BigInt::from(7));
        let s = rational_to_decimal(&x, 6);
        assert_eq!(s, "-3.142857");
        assert_eq!(decimal_to_rational("-3.142857").unwrap(), BigRational::new(BigInt::from(-3142857), BigInt::from(1000000)));
        assert_eq!(rational_to_decimal(&q(0), 2), "0.00");
    }
}
