//! Floating-point scalar abstraction.
//!
//! Everything that lives on the "real" side of the library (reference bases,
//! embeddings, minima, distances) is generic over [`Real`]. Exact bookkeeping
//! uses `BigInt`/`BigRational` directly and never goes through this trait.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point types usable as the real scalar (`f32`, `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Unit roundoff of the type.
    fn unit_roundoff() -> Self {
        Self::epsilon()
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal fits the scalar type")
    }

    fn from_rational(q: &BigRational) -> Self {
        Self::lit(rational_to_f64(q))
    }

    fn from_bigint(z: &BigInt) -> Self {
        Self::lit(z.to_f64().unwrap_or(f64::NAN))
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Correctly scaled conversion of a big rational to `f64`, also for
/// numerators and denominators far outside the `f64` range.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let Some(x) = q.to_f64() {
        if x.is_finite() && (x != 0.0 || q.numer().bits() == 0) {
            return x;
        }
    }
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    // bring both into a 64-bit window and fix up with a power of two
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let n = (q.numer() >> shift_n as usize).to_f64().unwrap_or(0.0);
    let d = (q.denom() >> shift_d as usize).to_f64().unwrap_or(1.0);
    let e = (shift_n - shift_d) as i32;
    (n / d) * 2f64.powi(e)
}
