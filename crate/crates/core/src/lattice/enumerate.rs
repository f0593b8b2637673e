//! LLL reduction and Fincke–Pohst enumeration for sup-norm minima and counts.

use num_integer::Integer;

use super::LatticePoint;
use crate::error::{Error, Result};
use crate::exact::{integer_rank, ZMat};
use crate::linalg::Mat;
use crate::scalar::Real;

/// Default cap on enumeration tree nodes per call.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 10_000_000;

const LLL_DELTA: f64 = 0.99;

struct Gso {
    mu: Vec<Vec<f64>>,
    bn: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gso(cols: &[Vec<f64>]) -> Gso {
    let n = cols.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    let mut bn = vec![0.0; n];
    for i in 0..n {
        let mut v = cols[i].clone();
        for j in 0..i {
            mu[i][j] = dot(&cols[i], &star[j]) / bn[j];
            for (vk, sk) in v.iter_mut().zip(&star[j]) {
                *vk -= mu[i][j] * sk;
            }
        }
        mu[i][i] = 1.0;
        bn[i] = dot(&v, &v);
        star.push(v);
    }
    Gso { mu, bn }
}

fn columns<T: Real>(b: &Mat<T>) -> Vec<Vec<f64>> {
    (0..b.ncols()).map(|j| b.column(j).iter().map(|x| x.to_f64_lossy()).collect()).collect()
}

/// LLL-reduces the columns of `b`; returns the reduced basis `B·U` and `U`.
pub fn lll_reduce<T: Real>(b: &Mat<T>) -> (Mat<T>, ZMat) {
    let n = b.ncols();
    let (cols, u) = lll_columns(columns(b));
    let reduced = Mat::from_fn(b.nrows(), n, |i, j| T::lit(cols[j][i]));
    let u = ZMat::from_fn(n, n, |i, j| u[j][i].into());
    (reduced, u)
}

fn lll_columns(mut cols: Vec<Vec<f64>>) -> (Vec<Vec<f64>>, Vec<Vec<i64>>) {
    let n = cols.len();
    let mut u: Vec<Vec<i64>> = (0..n).map(|j| (0..n).map(|i| i64::from(i == j)).collect()).collect();
    if n < 2 {
        return (cols, u);
    }
    let mut k = 1;
    let mut steps = 0usize;
    while k < n && steps < 10_000 * n {
        steps += 1;
        for j in (0..k).rev() {
            let g = gso(&cols);
            let m = g.mu[k][j].round();
            if m != 0.0 {
                let mi = m as i64;
                for r in 0..cols[k].len() {
                    cols[k][r] -= m * cols[j][r];
                }
                for r in 0..n {
                    u[k][r] -= mi * u[j][r];
                }
            }
        }
        let g = gso(&cols);
        if g.bn[k] >= (LLL_DELTA - g.mu[k][k - 1] * g.mu[k][k - 1]) * g.bn[k - 1] {
            k += 1;
        } else {
            cols.swap(k, k - 1);
            u.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    (cols, u)
}

/// Visits every nonzero `z` with `‖Bz‖₂² ≤ radius_sq`, up to sign (first
/// nonzero coordinate positive). Returns `false` if the budget ran out.
fn enumerate(cols: &[Vec<f64>], radius_sq: f64, budget: u64, visit: &mut dyn FnMut(&[i64], &[f64])) -> bool {
    let n = cols.len();
    let g = gso(cols);
    let mut z = vec![0i64; n];
    let mut nodes = 0u64;
    let r2 = radius_sq * (1.0 + 1e-10);

    #[allow(clippy::too_many_arguments)]
    fn rec(
        k: usize,
        partial: f64,
        z: &mut Vec<i64>,
        g: &Gso,
        cols: &[Vec<f64>],
        r2: f64,
        nodes: &mut u64,
        budget: u64,
        visit: &mut dyn FnMut(&[i64], &[f64]),
    ) -> bool {
        let n = z.len();
        let c: f64 = -(k + 1..n).map(|j| z[j] as f64 * g.mu[j][k]).sum::<f64>();
        let room = ((r2 - partial) / g.bn[k]).max(0.0).sqrt();
        // above level k every coordinate is zero: only z_k ≥ 0 is needed
        let upper_zero = z[k + 1..].iter().all(|&x| x == 0);
        let lo = if upper_zero { 0 } else { (c - room).ceil() as i64 };
        let hi = (c + room).floor() as i64;
        for zk in lo..=hi {
            *nodes += 1;
            if *nodes > budget {
                return false;
            }
            let d = zk as f64 - c;
            let next = partial + d * d * g.bn[k];
            if next > r2 {
                continue;
            }
            z[k] = zk;
            if k == 0 {
                if z.iter().any(|&x| x != 0) {
                    let dim = cols[0].len();
                    let v: Vec<f64> =
                        (0..dim).map(|i| (0..n).map(|j| z[j] as f64 * cols[j][i]).sum()).collect();
                    visit(z, &v);
                }
            } else if !rec(k - 1, next, z, g, cols, r2, nodes, budget, visit) {
                z[k] = 0;
                return false;
            }
        }
        z[k] = 0;
        true
    }

    rec(n - 1, 0.0, &mut z, &g, cols, r2, &mut nodes, budget, visit)
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn lower_bound(cols: &[Vec<f64>]) -> f64 {
    let n = cols.len();
    let b = Mat::from_fn(n, n, |i, j| cols[j][i]);
    b.inverse().map_or(0.0, |inv| 1.0 / inv.op_norm_inf())
}

/// Sup-norm successive minima `λ₁ ≤ … ≤ λ_upto`.
pub fn successive_minima<T: Real>(x: &LatticePoint<T>, upto: usize) -> Result<Vec<T>> {
    successive_minima_with_budget(x, upto, DEFAULT_ENUMERATION_BUDGET)
}

pub fn successive_minima_with_budget<T: Real>(x: &LatticePoint<T>, upto: usize, budget: u64) -> Result<Vec<T>> {
    let n = x.dim();
    if n > 5 {
        return Err(Error::DimensionTooLarge(n));
    }
    if upto > n {
        return Err(Error::Config(format!("upto = {upto} exceeds dimension {n}")));
    }
    if upto == 0 {
        return Ok(Vec::new());
    }
    let (cols, _) = lll_columns(columns(x.basis()));
    let mut sups: Vec<f64> = cols.iter().map(|c| sup(c)).collect();
    sups.sort_by(f64::total_cmp);
    let r = sups[upto - 1] * (1.0 + 1e-12);
    let mut found: Vec<(f64, Vec<i64>)> = Vec::new();
    let ok = enumerate(&cols, n as f64 * r * r, budget, &mut |z, v| {
        let s = sup(v);
        if s <= r && z.iter().fold(0i64, |g, &c| g.gcd(&c)) == 1 {
            found.push((s, z.to_vec()));
        }
    });
    if !ok {
        return Err(Error::EnumerationBudgetExceeded {
            lower: vec![lower_bound(&cols); upto],
            upper: sups[..upto].to_vec(),
        });
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut chosen: Vec<Vec<i64>> = Vec::new();
    let mut minima = Vec::with_capacity(upto);
    for (s, z) in found {
        chosen.push(z);
        if integer_rank(&chosen) == chosen.len() {
            minima.push(T::lit(s));
            if minima.len() == upto {
                break;
            }
        } else {
            chosen.pop();
        }
    }
    debug_assert_eq!(minima.len(), upto);
    Ok(minima)
}

/// A shortest nonzero vector in the sup norm.
pub fn shortest_vector<T: Real>(x: &LatticePoint<T>) -> Result<Vec<T>> {
    let (cols, _) = lll_columns(columns(x.basis()));
    let r = cols.iter().map(|c| sup(c)).fold(f64::INFINITY, f64::min) * (1.0 + 1e-12);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let n = x.dim();
    let ok = enumerate(&cols, n as f64 * r * r, DEFAULT_ENUMERATION_BUDGET, &mut |_, v| {
        let s = sup(v);
        if best.as_ref().is_none_or(|b| s < b.0) {
            best = Some((s, v.to_vec()));
        }
    });
    if !ok {
        let s = cols.iter().map(|c| sup(c)).fold(f64::INFINITY, f64::min);
        return Err(Error::EnumerationBudgetExceeded { lower: vec![lower_bound(&cols)], upper: vec![s] });
    }
    Ok(best.map(|b| b.1.into_iter().map(T::lit).collect()).unwrap_or_default())
}

/// Number of nonzero lattice vectors of sup norm at most `r`.
pub fn count_points_in_ball<T: Real>(x: &LatticePoint<T>, r: T) -> Result<u64> {
    count_points_in_ball_with_budget(x, r, DEFAULT_ENUMERATION_BUDGET)
}

pub fn count_points_in_ball_with_budget<T: Real>(x: &LatticePoint<T>, r: T, budget: u64) -> Result<u64> {
    let r = r.to_f64_lossy();
    let r = r + 1e-12 * r.max(1.0);
    let (cols, _) = lll_columns(columns(x.basis()));
    let n = x.dim();
    let mut count = 0u64;
    let ok = enumerate(&cols, n as f64 * r * r, budget, &mut |_, v| {
        if sup(v) <= r {
            count += 2;
        }
    });
    if !ok {
        return Err(Error::EnumerationBudgetExceeded { lower: vec![count as f64], upper: vec![] });
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{apply_diagonal, make_point, standard_lattice, DiagonalVector};

    #[test]
    fn standard_minima_and_counts() {
        for n in 1..=4 {
            let x = standard_lattice::<f64>(n);
            assert_eq!(successive_minima(&x, n).unwrap(), vec![1.0; n]);
        }
        let z2 = standard_lattice::<f64>(2);
        assert_eq!(count_points_in_ball(&z2, 1.0).unwrap(), 8);
        assert_eq!(count_points_in_ball(&z2, 0.5).unwrap(), 0);
        assert_eq!(count_points_in_ball(&z2, 2.0).unwrap(), 24);
    }

    #[test]
    fn diagonal_lattice() {
        let x = make_point(&Mat::from_diag(&[0.5, 2.0])).unwrap();
        assert_eq!(successive_minima(&x, 2).unwrap(), vec![0.5, 2.0]);
        assert_eq!(count_points_in_ball(&x, 0.6).unwrap(), 2);
    }

    #[test]
    fn lll_keeps_lattice() {
        let b = Mat::from_rows(&[vec![1.0, 37.0], vec![0.0, 1.0]]);
        let (r, u) = lll_reduce(&b);
        assert_eq!(num_traits::Signed::abs(&u.det()), 1.into());
        let bu = &b * &u.to_real::<f64>();
        assert!(bu.sub(&r).max_abs() < 1e-12);
        assert!(r.max_abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn minimum_on_diagonal_orbit() {
        let z = standard_lattice::<f64>(3);
        let v = DiagonalVector::new(vec![-1.5, 0.5, 1.0]).unwrap();
        let l = successive_minima(&apply_diagonal(&v, &z), 1).unwrap()[0];
        assert!((l - (-1.5f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn budget_reports_bounds() {
        let x = make_point(&Mat::from_diag(&[1e-3, 1e3])).unwrap();
        match successive_minima_with_budget(&x, 2, 100) {
            Err(Error::EnumerationBudgetExceeded { lower, upper }) => {
                assert!(lower[1] <= 2e-3 && upper[1] >= 1e3 - 1e-9)
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(successive_minima(&x, 2).unwrap(), vec![1e-3, 1e3]);
        assert_eq!(successive_minima(&standard_lattice::<f64>(6), 1), Err(Error::DimensionTooLarge(6)));
    }
}
