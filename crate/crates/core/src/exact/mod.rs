//! Exact integer and rational linear algebra.
//!
//! Matrices here are small (n ≤ 5) and entries are arbitrary precision, so
//! every routine favours clarity over asymptotics.

mod poly;

pub use poly::{decimal_to_rational, rational_to_decimal, CertifiedRoot, QPoly};

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::linalg::Mat;
use crate::scalar::Real;

pub fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn qz(z: &BigInt) -> BigRational {
    BigRational::from_integer(z.clone())
}

/// Dense matrix of big rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMat {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigRational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigRational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_int_rows(rows: &[Vec<i64>]) -> Self {
        let c = rows.first().map_or(0, Vec::len);
        Self::from_fn(rows.len(), c, |i, j| q(rows[i][j]))
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<BigRational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn mul(&self, rhs: &QMat) -> QMat {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        QMat::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = BigRational::zero();
            for k in 0..self.cols {
                if !self[(i, k)].is_zero() && !rhs[(k, j)].is_zero() {
                    acc += &self[(i, k)] * &rhs[(k, j)];
                }
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).fold(BigRational::zero(), |acc, k| acc + &self[(i, k)] * &v[k]))
            .collect()
    }

    pub fn scale(&self, c: &BigRational) -> QMat {
        QMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * c).collect() }
    }

    /// Gaussian elimination with exact pivots.
    pub fn det(&self) -> BigRational {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = BigRational::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !a[i * n + k].is_zero()) else {
                return BigRational::zero();
            };
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                det = -det;
            }
            let pivot = a[k * n + k].clone();
            det *= &pivot;
            for i in k + 1..n {
                if a[i * n + k].is_zero() {
                    continue;
                }
                let f = &a[i * n + k] / &pivot;
                for j in k..n {
                    let t = &f * &a[k * n + j];
                    a[i * n + j] -= t;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<QMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = QMat::identity(n);
        for k in 0..n {
            let p = (k..n).find(|&i| !a[(i, k)].is_zero())?;
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                    inv.data.swap(k * n + j, p * n + j);
                }
            }
            let pivot = a[(k, k)].clone();
            for j in 0..n {
                a[(k, j)] = &a[(k, j)] / &pivot;
                inv[(k, j)] = &inv[(k, j)] / &pivot;
            }
            for i in 0..n {
                if i == k || a[(i, k)].is_zero() {
                    continue;
                }
                let f = a[(i, k)].clone();
                for j in 0..n {
                    let t = &f * &a[(k, j)];
                    a[(i, j)] -= t;
                    let t = &f * &inv[(k, j)];
                    inv[(i, j)] -= t;
                }
            }
        }
        Some(inv)
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(BigRational::is_integer)
    }

    pub fn to_zmat(&self) -> Option<ZMat> {
        self.is_integral().then(|| ZMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.to_integer()).collect(),
        })
    }

    /// Least common multiple of all entry denominators.
    pub fn common_denominator(&self) -> BigInt {
        self.data.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }

    pub fn to_real<T: Real>(&self) -> Mat<T> {
        Mat::from_fn(self.rows, self.cols, |i, j| T::from_rational(&self[(i, j)]))
    }
}

impl Index<(usize, usize)> for QMat {
    type Output = BigRational;
    fn index(&self, (i, j): (usize, usize)) -> &BigRational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigRational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for QMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].to_string()).collect())
            .collect();
        f.debug_list().entries(rows).finish()
    }
}

/// Dense matrix of big integers.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZMat {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl ZMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let c = rows.first().map_or(0, Vec::len);
        Self::from_fn(rows.len(), c, |i, j| BigInt::from(rows[i][j]))
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        self.data.chunks(self.cols.max(1)).map(<[BigInt]>::to_vec).collect()
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn mul(&self, rhs: &ZMat) -> ZMat {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        ZMat::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).fold(BigInt::zero(), |acc, k| acc + &self[(i, k)] * &rhs[(k, j)])
        })
    }

    pub fn to_qmat(&self) -> QMat {
        QMat::from_fn(self.rows, self.cols, |i, j| qz(&self[(i, j)]))
    }

    pub fn to_real<T: Real>(&self) -> Mat<T> {
        Mat::from_fn(self.rows, self.cols, |i, j| T::from_bigint(&self[(i, j)]))
    }

    /// Fraction-free (Bareiss) determinant.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.data.clone();
        let mut sign = 1;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k * n + k].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a[i * n + k].is_zero()) else {
                    return BigInt::zero();
                };
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j];
                    a[i * n + j] = v / &prev;
                }
            }
            prev = a[k * n + k].clone();
        }
        let d = a[n * n - 1].clone();
        if sign < 0 {
            -d
        } else {
            d
        }
    }

    /// Elementary divisors d₁ | d₂ | … (positive, zeros for rank deficiency),
    /// sorted ascending.
    pub fn elementary_divisors(&self) -> Vec<BigInt> {
        let mut a = self.clone();
        let (m, n) = (a.rows, a.cols);
        let r = m.min(n);
        let mut diag = Vec::with_capacity(r);
        for t in 0..r {
            // smallest nonzero entry in the trailing block as pivot
            loop {
                let mut best: Option<(usize, usize)> = None;
                for i in t..m {
                    for j in t..n {
                        if a[(i, j)].is_zero() {
                            continue;
                        }
                        if best.is_none_or(|(bi, bj)| a[(i, j)].abs() < a[(bi, bj)].abs()) {
                            best = Some((i, j));
                        }
                    }
                }
                let Some((pi, pj)) = best else {
                    diag.extend(std::iter::repeat_n(BigInt::zero(), r - t));
                    diag.sort();
                    return diag;
                };
                a.swap_rows(t, pi);
                a.swap_cols(t, pj);
                let p = a[(t, t)].clone();
                let mut clean = true;
                for i in t + 1..m {
                    let f = a[(i, t)].div_floor(&p);
                    if !f.is_zero() {
                        a.row_axpy(i, t, &-f);
                    }
                    if !a[(i, t)].is_zero() {
                        clean = false;
                    }
                }
                for j in t + 1..n {
                    let f = a[(t, j)].div_floor(&p);
                    if !f.is_zero() {
                        a.col_axpy(j, t, &-f);
                    }
                    if !a[(t, j)].is_zero() {
                        clean = false;
                    }
                }
                if !clean {
                    continue;
                }
                // enforce divisibility of the remaining block by the pivot
                let bad = (t + 1..m)
                    .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                    .find(|&(i, j)| !a[(i, j)].is_multiple_of(&p));
                match bad {
                    Some((i, _)) => a.row_axpy(t, i, &BigInt::one()),
                    None => {
                        diag.push(p.abs());
                        break;
                    }
                }
            }
        }
        diag.sort();
        diag
    }

    /// Column-style Hermite normal form of the lattice spanned by the columns
    /// (assumed to have full row rank): upper triangular, positive diagonal,
    /// `0 ≤ H[i][j] < H[i][i]` for `j > i`. Returns `None` on rank deficiency.
    pub fn column_hnf(&self) -> Option<ZMat> {
        let n = self.rows;
        let mut pool: Vec<Vec<BigInt>> = (0..self.cols).map(|j| self.column(j)).collect();
        let mut pivots: Vec<Vec<BigInt>> = vec![Vec::new(); n];
        for i in (0..n).rev() {
            loop {
                let nz: Vec<usize> = (0..pool.len()).filter(|&c| !pool[c][i].is_zero()).collect();
                if nz.is_empty() {
                    return None;
                }
                let &piv = nz.iter().min_by(|&&a, &&b| pool[a][i].abs().cmp(&pool[b][i].abs())).unwrap();
                if nz.len() == 1 {
                    let mut col = pool.swap_remove(piv);
                    if col[i].is_negative() {
                        col.iter_mut().for_each(|x| *x = -x.clone());
                    }
                    pivots[i] = col;
                    break;
                }
                let pv = pool[piv].clone();
                for &c in &nz {
                    if c == piv {
                        continue;
                    }
                    let f = pool[c][i].div_floor(&pv[i]);
                    for (x, y) in pool[c].iter_mut().zip(&pv) {
                        *x -= &f * y;
                    }
                }
            }
        }
        if pool.iter().any(|c| c.iter().any(|x| !x.is_zero())) {
            // leftover non-zero columns cannot exist for a full-rank lattice in ℤⁿ
            unreachable!("column pool not exhausted");
        }
        let mut h = ZMat::from_fn(n, n, |i, j| pivots[j][i].clone());
        for j in 0..n {
            for i in (0..j).rev() {
                let f = h[(i, j)].div_floor(&h[(i, i)]);
                if !f.is_zero() {
                    h.col_axpy(j, i, &-f);
                }
            }
        }
        Some(h)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += f · row[src]
    fn row_axpy(&mut self, dst: usize, src: usize, f: &BigInt) {
        for j in 0..self.cols {
            let t = f * &self[(src, j)];
            self[(dst, j)] += t;
        }
    }

    /// col[dst] += f · col[src]
    fn col_axpy(&mut self, dst: usize, src: usize, f: &BigInt) {
        for i in 0..self.rows {
            let t = f * &self[(i, src)];
            self[(i, dst)] += t;
        }
    }
}

impl Index<(usize, usize)> for ZMat {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ZMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ZMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = self.to_rows().iter().map(|r| r.iter().map(ToString::to_string).collect()).collect();
        f.debug_list().entries(rows).finish()
    }
}

/// Exact rank of a list of integer vectors.
pub fn integer_rank(vectors: &[Vec<i64>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let n = vectors[0].len();
    let mut rows: Vec<Vec<BigRational>> = vectors.iter().map(|v| v.iter().map(|&x| q(x)).collect()).collect();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank][col].clone();
        for i in rank + 1..rows.len() {
            if rows[i][col].is_zero() {
                continue;
            }
            let f = &rows[i][col] / &pivot;
            for j in col..n {
                let t = &f * &rows[rank][j];
                rows[i][j] -= t;
            }
        }
        rank += 1;
    }
    rank
}
