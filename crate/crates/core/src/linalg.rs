//! Minimal dense real matrices, sized for desk-scale chains (≤ ~2000 states).
//!
//! Provides exactly what the rest of the crate needs: row-major storage,
//! multiplication, the matrix exponential by scaling-and-squaring, a cyclic
//! Jacobi eigensolver for symmetric matrices, and a reachability test on the
//! off-diagonal support.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Build from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn scaled(&self, c: f64) -> Matrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= c;
        }
        out
    }

    pub fn add_assign(&mut self, other: &Matrix) {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Matrix exponential `e^A` by scaling-and-squaring.
///
/// The scaling count `k` is chosen so `‖A/2^k‖_∞ ≤ 0.5`; the scaled
/// exponential is summed as a Taylor series to machine precision (terms
/// decay at least geometrically at that norm), then squared `k` times.
pub fn expm(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "expm needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let norm = a.inf_norm();
    if !norm.is_finite() {
        return Err(Error::Domain("expm: matrix has non-finite entries".into()));
    }
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        squarings += 1;
        scale *= 0.5;
    }
    let b = a.scaled(scale);

    let mut term = Matrix::identity(n);
    let mut sum = Matrix::identity(n);
    for j in 1..=40 {
        term = term.matmul(&b).scaled(1.0 / j as f64);
        sum.add_assign(&term);
        if term.inf_norm() <= 1e-19 * sum.inf_norm().max(1.0) {
            break;
        }
    }
    let mut result = sum;
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    Ok(result)
}

/// Eigenvalues of a symmetric matrix, ascending, by the cyclic Jacobi method.
///
/// The input is symmetrized by averaging before the sweeps; entries may
/// disagree across the diagonal by at most `1e-8 · max|entry|`, otherwise the
/// matrix is rejected.
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "eigensolver needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = a.max_abs_entry().max(1.0);
    let mut m = a.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-8 * scale {
                return Err(Error::Domain(format!(
                    "matrix is not symmetric at ({i},{j}): {} vs {}",
                    m[(i, j)],
                    m[(j, i)]
                )));
            }
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }

    let frob: f64 = math::sqrt(m.data.iter().map(|v| v * v).sum::<f64>());
    let stop = (1e-13 * frob.max(f64::MIN_POSITIVE)).max(1e-300);

    for _sweep in 0..64 {
        let off: f64 = {
            let mut s = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    s += m[(i, j)] * m[(i, j)];
                }
            }
            math::sqrt(2.0 * s)
        };
        if off <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + math::sqrt(theta * theta + 1.0))
                } else {
                    -1.0 / (-theta + math::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / math::sqrt(t * t + 1.0);
                let s = t * c;

                m[(p, p)] = app - t * apq;
                m[(q, q)] = aqq + t * apq;
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    m[(k, p)] = new_kp;
                    m[(p, k)] = new_kp;
                    m[(k, q)] = new_kq;
                    m[(q, k)] = new_kq;
                }
            }
        }
    }

    let mut eigs: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
    Ok(eigs)
}

/// Whether the off-diagonal support graph of `a` connects every vertex to
/// vertex 0. Edges are `i → j` for `i ≠ j` with `a[i,j] > 0`; generators of
/// reversible chains have symmetric support, so one sweep decides
/// irreducibility.
pub fn support_irreducible(a: &Matrix) -> bool {
    let n = a.rows();
    if n <= 1 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for y in 0..n {
            if y != x && !seen[y] && (a[(x, y)] > 0.0 || a[(y, x)] > 0.0) {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen.into_iter().all(|v| v)
}
