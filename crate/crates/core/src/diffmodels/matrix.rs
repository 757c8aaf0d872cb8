use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix of doubles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr")]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<MatrixRepr> for DenseMatrix {
    type Error = Error;
    fn try_from(r: MatrixRepr) -> Result<Self> {
        let expected = r.rows.checked_mul(r.cols);
        if expected != Some(r.data.len()) {
            return Err(Error::dim("matrix data length must equal rows * cols"));
        }
        DenseMatrix::from_vec(r.rows, r.cols, r.data)
    }
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::dim(format!(
                "{}x{} matrix cannot hold {} entries",
                rows,
                cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::dim("ragged rows"));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// `self * x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::dim(format!(
                "matvec: {} columns vs vector of {}",
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows).map(|r| dot(self.row(r), x)).collect())
    }

    /// `selfᵀ * x`.
    pub fn tr_matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(Error::dim(format!(
                "transposed matvec: {} rows vs vector of {}",
                self.rows,
                x.len()
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (r, &xr) in x.iter().enumerate() {
            axpy(xr, self.row(r), &mut out);
        }
        Ok(out)
    }

    /// `xᵀ self x` for square matrices.
    pub fn quad_form(&self, x: &[f64]) -> Result<f64> {
        if self.rows != self.cols {
            return Err(Error::dim("quadratic form needs a square matrix"));
        }
        Ok(dot(x, &self.matvec(x)?))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    /// Columns `[start, start + width)` copied into a new matrix.
    pub fn column_block(&self, start: usize, width: usize) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, width);
        for r in 0..self.rows {
            out.row_mut(r)
                .copy_from_slice(&self.row(r)[start..start + width]);
        }
        out
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows {
            return Err(Error::dim("hstack: row counts differ"));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(DenseMatrix {
            rows: self.rows,
            cols,
            data,
        })
    }

    /// Attempts a Cholesky factorization of `self + shift·I`; true iff it
    /// succeeds, i.e. the smallest eigenvalue exceeds `-shift`.
    pub fn cholesky_succeeds(&self, shift: f64) -> bool {
        let n = self.rows;
        if n != self.cols {
            return false;
        }
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = self.get(j, j) + shift;
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d.is_nan() || d <= 0.0 {
                return false;
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = 0.5 * (self.get(i, j) + self.get(j, i));
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        true
    }

    /// Largest eigenvalue magnitude estimate by power iteration.
    pub fn spectral_radius_estimate(&self, iters: usize) -> f64 {
        let n = self.rows;
        if n == 0 {
            return 0.0;
        }
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64) * 1e-3).collect();
        let mut lambda = 0.0;
        for _ in 0..iters {
            let w: Vec<f64> = (0..n).map(|r| dot(self.row(r), &v)).collect();
            let norm = dot(&w, &w).sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            let next = norm / dot(&v, &v).sqrt();
            v = w.iter().map(|x| x / norm).collect();
            if (next - lambda).abs() <= 1e-12 * next {
                return next;
            }
            lambda = next;
        }
        lambda
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `C = alpha * op(A) * op(B) + beta * C` on row-major buffers.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: &[f64],
    a_trans: bool,
    b: &[f64],
    b_trans: bool,
    beta: f64,
    c: &mut [f64],
) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    if m == 0 || n == 0 {
        return;
    }
    // op(A) is m×k. Stored as m×k (rs=k, cs=1) or as k×m (rs=1, cs=m).
    let (rsa, csa) = if a_trans { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if b_trans { (1, k as isize) } else { (n as isize, 1) };
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gemm_matches_naive_for_all_transpositions() {
        let a: Vec<f64> = (0..6).map(|v| v as f64 + 0.5).collect();
        let b: Vec<f64> = (0..6).map(|v| 2.0 - v as f64).collect();
        // A as 2×3, B as 3×2.
        let naive = |at: bool, bt: bool| {
            let mut c = vec![0.0; 4];
            for i in 0..2 {
                for j in 0..2 {
                    for l in 0..3 {
                        let av = if at { a[l * 2 + i] } else { a[i * 3 + l] };
                        let bv = if bt { b[j * 3 + l] } else { b[l * 2 + j] };
                        c[i * 2 + j] += av * bv;
                    }
                }
            }
            c
        };
        for &at in &[false, true] {
            for &bt in &[false, true] {
                let mut c = vec![0.0; 4];
                gemm(2, 3, 2, 1.0, &a, at, &b, bt, 0.0, &mut c);
                assert_eq!(c, naive(at, bt));
            }
        }
    }

    #[test]
    fn cholesky_detects_indefinite() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(!m.cholesky_succeeds(1e-8));
        assert!(DenseMatrix::identity(3).cholesky_succeeds(0.0));
        // PSD but singular passes once shifted.
        let s = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(s.cholesky_succeeds(1e-8));
    }

    #[test]
    fn power_iteration_finds_dominant_eigenvalue() {
        let m = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!((m.spectral_radius_estimate(500) - 3.0).abs() < 1e-9);
    }
}
