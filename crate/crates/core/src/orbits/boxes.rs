//! Boxed maps `v ↦ exp(v)x₀` over order intervals, the `U·A·L` closing
//! search, and gluing of two boxes through a closing element.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::lll_reduce;
use crate::lattice::{apply_diagonal, apply_matrix, lattice_distance, ual_factorize, DiagonalVector, LatticePoint};
use crate::linalg::Mat;
use crate::scalar::Real;

/// Allowed distance between `k_l·exp(v₀)·k_u·f₁(v₁)` and `f₂(0)`.
pub const CLOSING_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_GLUE_GRID: usize = 9;

/// Gaps `vᵢ − vᵢ₊₁`.
fn gaps<T: Real>(v: &DiagonalVector<T>) -> Vec<T> {
    v.coords().windows(2).map(|w| w[0] - w[1]).collect()
}

/// `a ≺ b`: every gap `aᵢ − aᵢ₊₁` is at most the corresponding gap of `b`.
pub fn precedes<T: Real>(a: &DiagonalVector<T>, b: &DiagonalVector<T>) -> bool {
    let tol = T::lit(1e-12);
    gaps(a).iter().zip(gaps(b)).all(|(x, y)| *x <= y + tol)
}

/// The trace-zero vector with prescribed gaps.
fn from_gaps<T: Real>(d: &[T]) -> DiagonalVector<T> {
    let mut v = vec![T::zero(); d.len() + 1];
    for (i, &g) in d.iter().enumerate() {
        v[i + 1] = v[i] - g;
    }
    DiagonalVector::project(v)
}

/// `f(v) = exp(v)·x₀` on `S_{v₀} = {0 ≺ v ≺ v₀}`.
#[derive(Clone, Debug)]
pub struct BoxedMap<T: Real> {
    v0: DiagonalVector<T>,
    x0: LatticePoint<T>,
}

impl<T: Real> BoxedMap<T> {
    pub fn new(v0: DiagonalVector<T>, x0: LatticePoint<T>) -> Result<Self> {
        if v0.dim() != x0.dim() || !precedes(&DiagonalVector::zero(v0.dim()), &v0) {
            return Err(Error::NotPositiveBox);
        }
        Ok(Self { v0, x0 })
    }

    pub fn v0(&self) -> &DiagonalVector<T> {
        &self.v0
    }

    pub fn x0(&self) -> &LatticePoint<T> {
        &self.x0
    }

    pub fn eval(&self, v: &DiagonalVector<T>) -> LatticePoint<T> {
        apply_diagonal(v, &self.x0)
    }

    pub fn contains(&self, v: &DiagonalVector<T>) -> bool {
        precedes(&DiagonalVector::zero(v.dim()), v) && precedes(v, &self.v0)
    }

    /// `m` evenly spaced gap values per direction over `S_{upper}`.
    pub fn grid(upper: &DiagonalVector<T>, m: usize) -> Vec<DiagonalVector<T>> {
        let d = gaps(upper);
        if d.iter().any(|&g| g < T::zero()) || m == 0 {
            return Vec::new();
        }
        let k = d.len();
        let steps = m.max(2) - 1;
        (0..(steps + 1).pow(k as u32))
            .map(|idx| {
                let mut rest = idx;
                let g: Vec<T> = d
                    .iter()
                    .map(|&dj| {
                        let i = rest % (steps + 1);
                        rest /= steps + 1;
                        dj * T::lit(i as f64 / steps as f64)
                    })
                    .collect();
                from_gaps(&g)
            })
            .collect()
    }
}

/// `k_u·exp(v₀)·k_l` with `k_u·exp(v₀)·k_l·x₀ = x₁`.
#[derive(Clone, Debug)]
pub struct ClosingData<T: Real> {
    pub k_u: Mat<T>,
    pub v0: DiagonalVector<T>,
    pub k_l: Mat<T>,
    /// Integer change of basis between the LLL bases, row-major.
    pub gamma: Vec<i64>,
    /// `max(‖k_u − I‖, ‖v₀‖_∞, ‖k_l − I‖)`.
    pub cost: T,
    pub residual: T,
}

/// Closing element in the order used for gluing: `k_l·exp(v₀)·k_u·f₁(v₁) = f₂(0)`.
#[derive(Clone, Debug)]
pub struct GlueClosing<T: Real> {
    pub k_l: Mat<T>,
    pub v0: DiagonalVector<T>,
    pub k_u: Mat<T>,
}

impl<T: Real> GlueClosing<T> {
    pub fn trivial(n: usize) -> Self {
        Self { k_l: Mat::identity(n), v0: DiagonalVector::zero(n), k_u: Mat::identity(n) }
    }

    /// Inverts a closing `k_u a k_l·f₂(0) = f₁(v₁)` found by [`closing_search`].
    pub fn from_reverse_search(c: &ClosingData<T>) -> Result<Self> {
        Ok(Self {
            k_l: c.k_l.inverse().ok_or(Error::SingularBasis)?,
            v0: c.v0.neg(),
            k_u: c.k_u.inverse().ok_or(Error::SingularBasis)?,
        })
    }

    /// Searches a closing from `f₂(0)` to `f₁(v₁)` and inverts it.
    pub fn search(f1: &BoxedMap<T>, f2: &BoxedMap<T>, search_bound: u32) -> Result<Self> {
        let end = f1.eval(&f1.v0);
        let start = f2.eval(&DiagonalVector::zero(f2.v0.dim()));
        Self::from_reverse_search(&closing_search(&start, &end, search_bound)?)
    }

    pub fn matrix(&self) -> Mat<T> {
        &(&self.k_l * &self.v0.exp_matrix()) * &self.k_u
    }
}

fn deviation<T: Real>(m: &Mat<T>) -> T {
    m.sub(&Mat::identity(m.nrows())).op_norm_inf()
}

/// Searches `γ` within `search_bound` of `round(B₁⁻¹B₀)` (and `−γ` in even
/// dimension) such that `B₁γB₀⁻¹ = k_u·a·k_l` with `a` positive diagonal,
/// and returns the factorization of least cost.
pub fn closing_search<T: Real>(x0: &LatticePoint<T>, x1: &LatticePoint<T>, search_bound: u32) -> Result<ClosingData<T>> {
    let n = x0.dim();
    if x1.dim() != n {
        return Err(Error::DimensionMismatch { degree: n, found: x1.dim() });
    }
    let b0 = lll_reduce(x0.basis()).0;
    let b1 = lll_reduce(x1.basis()).0;
    let (Some(b0_inv), Some(b1_inv)) = (b0.inverse(), b1.inverse()) else {
        return Err(Error::SingularBasis);
    };
    let target = (b0.det() * b1.det()).signum();
    let c = &b1_inv * &b0;
    let seed: Vec<i64> = (0..n * n).map(|k| c[(k / n, k % n)].round().to_i64().unwrap_or(0)).collect();
    let s = search_bound as i64;
    let width = (2 * s + 1) as usize;
    let total = width
        .checked_pow((n * n) as u32)
        .filter(|&t| t <= 50_000_000)
        .ok_or_else(|| Error::BudgetExceeded(format!("{width}^{} closing candidates", n * n)))?;
    let signs: &[i64] = if n.is_multiple_of(2) { &[1, -1] } else { &[1] };

    let mut best: Option<ClosingData<T>> = None;
    let mut obstruction = String::from("no unimodular candidate in range");
    let mut gamma = vec![0i64; n * n];
    for idx in 0..total {
        let mut rest = idx;
        for (k, g) in gamma.iter_mut().enumerate() {
            *g = seed[k] + (rest % width) as i64 - s;
            rest /= width;
        }
        let base = Mat::from_fn(n, n, |i, j| T::lit(gamma[i * n + j] as f64));
        let d = base.det().to_f64_lossy();
        if (d.abs() - 1.0).abs() > 1e-6 || d.signum() != target.to_f64_lossy() {
            continue;
        }
        for &sign in signs {
            let gm = base.scale(T::lit(sign as f64));
            let g = &(&b1 * &gm) * &b0_inv;
            let (u, a, l) = match ual_factorize(&g) {
                Ok(f) => f,
                Err(e) => {
                    obstruction = e.to_string();
                    continue;
                }
            };
            let diag: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();
            if diag.iter().any(|&x| x <= T::zero()) {
                obstruction = format!("negative diagonal {:?}", diag.iter().map(|x| x.to_f64_lossy()).collect::<Vec<_>>());
                continue;
            }
            let logs: Vec<T> = diag.iter().map(|x| x.ln()).collect();
            let v0 = DiagonalVector::project(logs.clone());
            let cost = deviation(&u).max(deviation(&l)).max(logs.iter().fold(T::zero(), |m, x| m.max(x.abs())));
            if best.as_ref().is_none_or(|b| cost < b.cost) {
                let residual = (&(&u * &a) * &l).sub(&g).max_abs();
                best = Some(ClosingData {
                    k_u: u,
                    v0,
                    k_l: l,
                    gamma: gamma.iter().map(|g| g * sign).collect(),
                    cost,
                    residual,
                });
            }
        }
    }
    best.ok_or(Error::NotFound(obstruction))
}

/// Sizes and grid errors of a gluing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlueReport {
    #[serde(rename = "R")]
    pub r: f64,
    pub rho: f64,
    pub max_error_box1: f64,
    pub max_error_box2: f64,
    pub grid_points: usize,
    pub closing_mismatch: f64,
    pub v3: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
}

/// [`glue_boxes_with_grid`] with [`DEFAULT_GLUE_GRID`] points per direction.
pub fn glue_boxes<T: Real>(
    f1: &BoxedMap<T>,
    f2: &BoxedMap<T>,
    closing: &GlueClosing<T>,
    r: T,
) -> Result<(BoxedMap<T>, GlueReport)> {
    glue_boxes_with_grid(f1, f2, closing, r, DEFAULT_GLUE_GRID)
}

/// Glues `f₁` and `f₂` into `f(v) = exp(v)·exp(−v₁)k_u exp(v₁)f₁(0)` on
/// `S_{v₁+v₂+v₀}` and measures `d(f(wᵢ+v), fᵢ(ρw₀+v))` on `S_{vᵢ−2ρw₀}`.
pub fn glue_boxes_with_grid<T: Real>(
    f1: &BoxedMap<T>,
    f2: &BoxedMap<T>,
    closing: &GlueClosing<T>,
    r: T,
    grid: usize,
) -> Result<(BoxedMap<T>, GlueReport)> {
    let n = f1.v0.dim();
    if f2.v0.dim() != n {
        return Err(Error::DimensionMismatch { degree: n, found: f2.v0.dim() });
    }
    let w0 = DiagonalVector::<T>::w0(n);
    if !(r > T::zero()) || !precedes(&w0.scale(r), &f1.v0) || !precedes(&w0.scale(r), &f2.v0) {
        return Err(Error::Config("boxes must dominate R·w0".into()));
    }
    let v1 = &f1.v0;
    let v2 = &f2.v0;
    let end = apply_matrix(&closing.matrix(), &f1.eval(v1));
    let start = f2.eval(&DiagonalVector::zero(n));
    let mismatch = lattice_distance(&end, &start, 1).0.to_f64_lossy();
    if !(mismatch <= CLOSING_TOLERANCE) {
        return Err(Error::ClosingMismatch(mismatch));
    }

    let rho = r.sqrt();
    let conj = &(&v1.neg().exp_matrix() * &closing.k_u) * &v1.exp_matrix();
    let x0 = apply_matrix(&conj, &f1.x0);
    let v3 = v1.add(v2).add(&closing.v0);
    let glued = BoxedMap::new(v3.clone(), x0)?;
    let w1 = w0.scale(rho);
    let w2 = v1.add(&w1).add(&closing.v0);

    let mut points = 0;
    let mut box_error = |fi: &BoxedMap<T>, wi: &DiagonalVector<T>| -> f64 {
        let shrunk = fi.v0.sub(&w0.scale(T::lit(2.0) * rho));
        BoxedMap::grid(&shrunk, grid)
            .iter()
            .map(|v| {
                points += 1;
                let a = glued.eval(&wi.add(v));
                let b = fi.eval(&w1.add(v));
                lattice_distance(&a, &b, 1).0.to_f64_lossy()
            })
            .fold(0.0, f64::max)
    };
    let e1 = box_error(f1, &w1);
    let e2 = box_error(f2, &w2);
    let to_f64 = |v: &DiagonalVector<T>| v.coords().iter().map(|x| x.to_f64_lossy()).collect::<Vec<_>>();
    let report = GlueReport {
        r: r.to_f64_lossy(),
        rho: rho.to_f64_lossy(),
        max_error_box1: e1,
        max_error_box2: e2,
        grid_points: points,
        closing_mismatch: mismatch,
        v3: to_f64(&v3),
        w1: to_f64(&w1),
        w2: to_f64(&w2),
    };
    Ok((glued, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_point, standard_lattice};

    fn skew() -> LatticePoint<f64> {
        make_point(&Mat::from_rows(&[vec![1.0, 0.3], vec![0.2, 1.06]])).unwrap()
    }

    #[test]
    fn order_and_grid() {
        let w = DiagonalVector::<f64>::w0(3);
        assert!(precedes(&DiagonalVector::zero(3), &w));
        assert!(!precedes(&w, &DiagonalVector::zero(3)));
        let g = BoxedMap::grid(&w.scale(2.0), 3);
        assert_eq!(g.len(), 9);
        assert!(g.iter().all(|v| precedes(v, &w.scale(2.0)) && precedes(&DiagonalVector::zero(3), v)));
        assert!(BoxedMap::new(w.neg(), standard_lattice(3)).is_err());
    }

    #[test]
    fn identity_closing() {
        let x = skew();
        let c = closing_search(&x, &x, 1).unwrap();
        assert!(c.cost < 1e-12);
        assert!(c.k_u.sub(&Mat::identity(2)).max_abs() < 1e-12);
    }

    #[test]
    fn unipotent_closing() {
        let x = skew();
        let u = Mat::from_rows(&[vec![1.0, 0.1], vec![0.0, 1.0]]);
        let c = closing_search(&x, &apply_matrix(&u, &x), 1).unwrap();
        assert!(c.k_u.sub(&u).max_abs() < 1e-9);
        assert!(c.k_l.sub(&Mat::identity(2)).max_abs() < 1e-9);
        assert!(c.v0.coords().iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn reconstruction() {
        let x = skew();
        let g: Mat<f64> = Mat::from_rows(&[vec![1.05, -0.08], vec![0.11, 0.9]]);
        let g = g.scale(1.0 / g.det().sqrt());
        let y = apply_matrix(&g, &x);
        let c = closing_search(&x, &y, 1).unwrap();
        let m = &(&c.k_u * &c.v0.exp_matrix()) * &c.k_l;
        assert!(lattice_distance(&apply_matrix(&m, &x), &y, 1).0 < 1e-6);
        assert!(c.residual < 1e-10);
    }

    #[test]
    fn trivial_gluing() {
        let x = skew();
        let v1 = DiagonalVector::w0(2).scale(6.0);
        let f1 = BoxedMap::new(v1.clone(), x.clone()).unwrap();
        let f2 = BoxedMap::new(v1.clone(), apply_diagonal(&v1, &x)).unwrap();
        let (f, rep) = glue_boxes(&f1, &f2, &GlueClosing::trivial(2), 4.0).unwrap();
        assert_eq!(f.v0(), &v1.add(&v1));
        assert!(rep.max_error_box1 < 1e-9 && rep.max_error_box2 < 1e-9, "{rep:?}");
        assert!(rep.grid_points > 0);
        let wrong = GlueClosing { k_u: Mat::from_rows(&[vec![1.0, 0.4], vec![0.0, 1.0]]), ..GlueClosing::trivial(2) };
        assert!(matches!(glue_boxes(&f1, &f2, &wrong, 4.0), Err(Error::ClosingMismatch(_))));
    }
}
