use super::enumerate::lll_reduce;
use super::LatticePoint;
use crate::linalg::Mat;
use crate::scalar::Real;

/// Upper bound for the distance between `x` and `y`: the minimum of
/// `max(‖g−I‖, ‖g⁻¹−I‖)` over `g = B_y γ B_x⁻¹`, with `γ` ranging over integer
/// matrices within `search_bound` of the rounded seed `B_y⁻¹B_x`.
///
/// The flag is `true` when the search box provably contains every `γ` that
/// could beat the returned value.
pub fn lattice_distance<T: Real>(x: &LatticePoint<T>, y: &LatticePoint<T>, search_bound: u32) -> (T, bool) {
    let n = x.dim();
    let bx = lll_reduce(x.basis()).0.map(|v| v.to_f64_lossy());
    let by = lll_reduce(y.basis()).0.map(|v| v.to_f64_lossy());
    let (Some(bx_inv), Some(by_inv)) = (bx.inverse(), by.inverse()) else {
        return (T::infinity(), false);
    };
    let target_sign = (bx.det() * by.det()).signum();
    let c = &by_inv * &bx;
    let seed: Vec<i64> = (0..n * n).map(|k| c[(k / n, k % n)].round() as i64).collect();
    let s = search_bound as i64;
    let width = (2 * s + 1) as usize;
    let total = width.pow((n * n) as u32);

    let mut best = f64::INFINITY;
    let mut gamma = vec![0f64; n * n];
    for idx in 0..total {
        let mut rest = idx;
        for (k, g) in gamma.iter_mut().enumerate() {
            let off = (rest % width) as i64 - s;
            rest /= width;
            *g = (seed[k] + off) as f64;
        }
        let gm = Mat::from_fn(n, n, |i, j| gamma[i * n + j]);
        let d = gm.det();
        if (d.abs() - 1.0).abs() > 1e-6 || d.signum() != target_sign {
            continue;
        }
        let g = &(&by * &gm) * &bx_inv;
        if let Some(v) = g.distance_to_identity() {
            best = best.min(v);
        }
    }
    if !best.is_finite() {
        return (T::infinity(), false);
    }
    // every γ with value ≤ best satisfies |γ − B_y⁻¹B_x| ≤ ‖B_y⁻¹‖·best·‖B_x‖ entrywise
    let reach = by_inv.op_norm_inf() * best * bx.op_norm_inf();
    let certified = (0..n * n).all(|k| {
        let ck = c[(k / n, k % n)];
        (seed[k] - s) as f64 <= ck - reach && ck + reach <= (seed[k] + s) as f64
    });
    (T::lit(best), certified)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{apply_diagonal, make_point, standard_lattice, DiagonalVector};

    #[test]
    fn zero_distance_to_self() {
        let x = make_point(&Mat::from_rows(&[vec![1.0, 0.4], vec![0.3, 1.1]])).unwrap();
        let (d, cert) = lattice_distance(&x, &x, 1);
        assert!(d < 1e-12 && cert);
    }

    #[test]
    fn small_diagonal_shift() {
        let z = standard_lattice::<f64>(2);
        let v = DiagonalVector::new(vec![1e-3, -1e-3]).unwrap();
        let y = apply_diagonal(&v, &z);
        let (d, cert) = lattice_distance(&z, &y, 1);
        let expect = (1e-3f64).exp() - 1.0;
        assert!((d - expect).abs() < 1e-12, "{d}");
        assert!(cert);
    }

    #[test]
    fn basis_change_is_invisible() {
        let b = Mat::from_rows(&[vec![1.0, 0.4], vec![0.3, 1.1]]);
        let x = make_point(&b).unwrap();
        let g = Mat::from_rows(&[vec![3.0, 2.0], vec![4.0, 3.0]]);
        let y = make_point(&(&b * &g)).unwrap();
        assert!(lattice_distance(&x, &y, 1).0 < 1e-9);
    }
}
