//! A finite surrogate for the distance between measures on `X_n`.
//!
//! Family version 1: for each `ε` the bumps
//! `f(x) = max(0, h − |log λ₁(x) − c|)` with `h ∈ {1/4, 1/2, 1}` and centers
//! `c = log ε + h + j·h/2 ≤ 0`. They are 1-Lipschitz because
//! `|log λ₁(gx) − log λ₁(x)| ≤ log(1 + d)` and supported on `λ₁ > ε`.

use crate::lattice::{successive_minima, LatticePoint};
use crate::measure::EmpiricalMeasure;
use crate::scalar::Real;
use crate::Result;

pub const BUMP_FAMILY_VERSION: u32 = 1;
const HEIGHTS: [f64; 3] = [0.25, 0.5, 1.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub center: f64,
    pub height: f64,
}

impl Bump {
    pub fn eval(&self, log_lambda1: f64) -> f64 {
        (self.height - (log_lambda1 - self.center).abs()).max(0.0)
    }
}

pub fn bump_family(eps: f64) -> Vec<Bump> {
    let mut out = Vec::new();
    for &h in &HEIGHTS {
        let mut c = eps.ln() + h;
        while c <= 0.0 {
            out.push(Bump { center: c, height: h });
            c += h / 2.0;
        }
    }
    out
}

/// `max_ε ε·max_f |∫f dμ₁ − ∫f dμ₂|` for measures given by their `log λ₁` values.
pub fn measure_distance_log_lambda(a: &EmpiricalMeasure<f64>, b: &EmpiricalMeasure<f64>, eps_grid: &[f64]) -> f64 {
    eps_grid
        .iter()
        .map(|&eps| {
            bump_family(eps)
                .iter()
                .map(|f| eps * (a.integrate(|x| f.eval(*x)) - b.integrate(|x| f.eval(*x))).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

pub fn measure_distance<T: Real>(
    a: &EmpiricalMeasure<LatticePoint<T>>,
    b: &EmpiricalMeasure<LatticePoint<T>>,
    eps_grid: &[f64],
) -> Result<f64> {
    let logs = |m: &EmpiricalMeasure<LatticePoint<T>>| -> Result<EmpiricalMeasure<f64>> {
        let mut out = EmpiricalMeasure::new(m.domain());
        for (x, w) in m.samples() {
            out.push(successive_minima(x, 1)?[0].to_f64_lossy().ln(), w.clone());
        }
        Ok(out)
    };
    Ok(measure_distance_log_lambda(&logs(a)?, &logs(b)?, eps_grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{apply_diagonal, lattice_distance, standard_lattice, DiagonalVector};

    #[test]
    fn family_is_supported_on_k_eps() {
        for eps in [0.05, 0.2, 0.7] {
            let fam = bump_family(eps);
            assert!(!fam.is_empty());
            for f in fam {
                assert_eq!(f.eval(eps.ln()), 0.0);
                assert_eq!(f.eval(eps.ln() - 1.0), 0.0);
            }
        }
    }

    #[test]
    fn identical_and_nearby_diracs() {
        let x = standard_lattice::<f64>(2);
        let grid = [0.05, 0.1, 0.5];
        let m = EmpiricalMeasure::dirac(x.clone(), "X");
        assert_eq!(measure_distance(&m, &m, &grid).unwrap(), 0.0);
        let y = apply_diagonal(&DiagonalVector::new(vec![0.3, -0.3]).unwrap(), &x);
        let d = lattice_distance(&x, &y, 1).0;
        let got = measure_distance(&m, &EmpiricalMeasure::dirac(y, "X"), &grid).unwrap();
        assert!(got > 0.0 && got <= 0.5 * d + 1e-12, "{got} vs {d}");
    }
}
