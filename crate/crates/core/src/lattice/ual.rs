use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Real;

const MINOR_TOLERANCE: f64 = 1e-6;

/// `g = u·a·l` with `u` unit upper triangular, `a` diagonal and `l` unit lower
/// triangular. Exists iff the trailing principal minors of `g` are nonzero.
///
/// Computed as the LDU factorization of `JgJ` (`J` the reversal matrix).
pub fn ual_factorize<T: Real>(g: &Mat<T>) -> Result<(Mat<T>, Mat<T>, Mat<T>)> {
    let n = g.nrows();
    let r = |i: usize| n - 1 - i;
    let mut w = Mat::from_fn(n, n, |i, j| g[(r(i), r(j))]);
    let mut lower = Mat::identity(n);
    let mut minor = T::one();
    for k in 0..n {
        let d = w[(k, k)];
        minor = minor * d;
        if minor.abs() < T::lit(MINOR_TOLERANCE) {
            return Err(Error::SingularMinor { index: k + 1, value: minor.to_f64_lossy() });
        }
        for i in k + 1..n {
            let f = w[(i, k)] / d;
            lower[(i, k)] = f;
            for j in k..n {
                let t = w[(k, j)];
                w[(i, j)] = w[(i, j)] - f * t;
            }
        }
    }
    let diag: Vec<T> = (0..n).map(|k| w[(k, k)]).collect();
    let upper = Mat::from_fn(n, n, |i, j| if j >= i { w[(i, j)] / diag[i] } else { T::zero() });
    let u = Mat::from_fn(n, n, |i, j| lower[(r(i), r(j))]);
    let a = Mat::from_diag(&(0..n).map(|i| diag[r(i)]).collect::<Vec<_>>());
    let l = Mat::from_fn(n, n, |i, j| upper[(r(i), r(j))]);
    Ok((u, a, l))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(g: &Mat<f64>) -> f64 {
        let (u, a, l) = ual_factorize(g).unwrap();
        (&(&u * &a) * &l).sub(g).max_abs()
    }

    #[test]
    fn examples() {
        let (u, a, l) = ual_factorize(&Mat::<f64>::identity(3)).unwrap();
        assert_eq!((u.clone(), a, l), (Mat::identity(3), Mat::identity(3), Mat::identity(3)));
        let d = Mat::from_diag(&[2.0, 0.5]);
        let (u, a, l) = ual_factorize(&d).unwrap();
        assert_eq!((u, a, l), (Mat::identity(2), d.clone(), Mat::identity(2)));
        let g = Mat::from_rows(&[vec![1.0, 1.0], vec![1.0, 2.0]]);
        let (u, a, l) = ual_factorize(&g).unwrap();
        assert_eq!(u, Mat::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]));
        assert_eq!(a, Mat::from_diag(&[0.5, 2.0]));
        assert_eq!(l, Mat::from_rows(&[vec![1.0, 0.0], vec![0.5, 1.0]]));
    }

    #[test]
    fn triangular_shapes_and_reconstruction() {
        let g = Mat::from_rows(&[vec![2.0, 0.3, -1.0], vec![0.7, 1.5, 0.2], vec![0.1, -0.4, 0.9]]);
        let (u, _, l) = ual_factorize(&g).unwrap();
        for i in 0..3 {
            assert_eq!(u[(i, i)], 1.0);
            assert_eq!(l[(i, i)], 1.0);
            for j in 0..i {
                assert_eq!(u[(i, j)], 0.0);
                assert_eq!(l[(j, i)], 0.0);
            }
        }
        assert!(reconstruct(&g) < 1e-12);
    }

    #[test]
    fn singular_minor() {
        let g = Mat::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0]]);
        assert!(matches!(ual_factorize(&g), Err(Error::SingularMinor { index: 1, .. })));
    }
}
