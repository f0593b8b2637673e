//! Small dense real matrices (n ≤ 5 in practice).

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use crate::scalar::Real;

/// Row-major dense matrix over a [`Real`] scalar.
#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.iter().flatten().copied().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.cols.max(1)).map(<[T]>::to_vec).collect()
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `self * diag(...)` is a column scaling; this is the row scaling `diag(d) * self`.
    pub fn scale_rows(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.rows);
        Self::from_fn(self.rows, self.cols, |i, j| d[i] * self[(i, j)])
    }

    pub fn scale(&self, c: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * c).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    /// Operator norm on `(ℝⁿ, ‖·‖_∞)`: the maximal absolute row sum.
    pub fn op_norm_inf(&self) -> T {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// `max(‖self − I‖, ‖self⁻¹ − I‖)` in the sup operator norm.
    pub fn distance_to_identity(&self) -> Option<T> {
        let id = Self::identity(self.rows);
        let inv = self.inverse()?;
        Some(self.sub(&id).op_norm_inf().max(inv.sub(&id).op_norm_inf()))
    }

    fn lu(&self) -> Option<(Vec<T>, Vec<usize>, T)> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, a[i * n + k].abs()))
                .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == T::zero() {
                return None;
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let d = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / d;
                a[i * n + k] = f;
                for j in k + 1..n {
                    let t = a[k * n + j];
                    a[i * n + j] = a[i * n + j] - f * t;
                }
            }
        }
        Some((a, perm, sign))
    }

    pub fn det(&self) -> T {
        match self.lu() {
            None => T::zero(),
            Some((a, _, sign)) => {
                let n = self.rows;
                (0..n).fold(sign, |acc, i| acc * a[i * n + i])
            }
        }
    }

    pub fn inverse(&self) -> Option<Self> {
        let n = self.rows;
        let (a, perm, _) = self.lu()?;
        let mut inv = Self::zeros(n, n);
        for col in 0..n {
            // solve L U x = P e_col
            let mut x: Vec<T> = (0..n).map(|i| if perm[i] == col { T::one() } else { T::zero() }).collect();
            for i in 0..n {
                for k in 0..i {
                    x[i] = x[i] - a[i * n + k] * x[k];
                }
            }
            for i in (0..n).rev() {
                for k in i + 1..n {
                    x[i] = x[i] - a[i * n + k] * x[k];
                }
                x[i] = x[i] / a[i * n + i];
            }
            for i in 0..n {
                inv[(i, col)] = x[i];
            }
        }
        Some(inv)
    }

    pub fn map<U: Real>(&self, f: impl Fn(T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }
}

impl<T: Real> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &Mat<T> {
    type Output = Mat<T>;
    fn mul(self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        Mat::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * rhs[(k, j)]).sum()
        })
    }
}

impl<T: Real> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_det() {
        let m = Mat::from_rows(&[vec![1.0, 1.0], vec![1.0, 2.0]]);
        assert!((m.det() - 1.0f64).abs() < 1e-14);
        let inv = m.inverse().unwrap();
        let id = &m * &inv;
        assert!(id.sub(&Mat::identity(2)).max_abs() < 1e-14);
        assert!(Mat::<f64>::zeros(2, 2).inverse().is_none());
    }

    #[test]
    fn sup_operator_norm() {
        let m = Mat::from_rows(&[vec![1.0, -2.0], vec![0.5, 0.5]]);
        assert_eq!(m.op_norm_inf(), 3.0);
    }
}
