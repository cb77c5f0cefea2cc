//! Dense complex matrices.
//!
//! Only what the codebook, metric and simulation code needs: products,
//! conjugate transpose, Frobenius norm, Gram determinants and a
//! re-orthogonalized modified Gram-Schmidt. Storage is row-major.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type ComplexScalar = Complex64;

/// Imaginary residue of `det(AᴴA)` tolerated before it is treated as an
/// instability (relative to `max(1, |det|)`).
pub const GRAM_IMAG_TOL: f64 = 1e-9;

/// Residual column norm below which Gram-Schmidt reports rank deficiency.
pub const RANK_TOL: f64 = 1e-12;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> ComplexScalar {
    Complex64::new(re, im)
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<ComplexScalar>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major data.
    pub fn new(rows: usize, cols: usize, data: Vec<ComplexScalar>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("empty matrix {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain(format!("non-finite entry at flat index {bad}")));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Self {
            rows,
            cols,
            data: vec![ComplexScalar::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from nested rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<ComplexScalar>]) -> Self {
        let r = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == cols), "ragged rows");
        Self::new(r, cols, rows.concat()).expect("valid rows")
    }

    /// Builds a real-valued matrix from nested rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let rows: Vec<Vec<ComplexScalar>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| c(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// Column vector from entries.
    pub fn column_vector(entries: &[ComplexScalar]) -> Self {
        Self::new(entries.len(), 1, entries.to_vec()).expect("non-empty finite column")
    }

    /// Diagonal matrix from entries.
    pub fn diagonal(entries: &[ComplexScalar]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
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
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Row-major entries.
    #[inline]
    pub fn data(&self) -> &[ComplexScalar] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<ComplexScalar> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// New matrix made of the listed columns, in order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Shape("no columns selected".into()));
        }
        if let Some(&bad) = columns.iter().find(|&&j| j >= self.cols) {
            return Err(Error::Shape(format!(
                "column {bad} out of range for {} columns",
                self.cols
            )));
        }
        let mut out = Self::zeros(self.rows, columns.len());
        for i in 0..self.rows {
            for (k, &j) in columns.iter().enumerate() {
                out[(i, k)] = self[(i, j)];
            }
        }
        Ok(out)
    }

    /// Multiplies every entry by `s`.
    pub fn scale(&self, s: ComplexScalar) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Standard product `self · rhs`.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        rhs: &Self,
        op: &'static str,
        f: impl Fn(ComplexScalar, ComplexScalar) -> ComplexScalar,
    ) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch {
                op,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Sum of squared entry magnitudes.
    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest entry-wise magnitude of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> Result<f64> {
        Ok(self
            .sub(rhs)?
            .data
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    /// `det(AᴴA)` for a tall matrix, returned as a non-negative real.
    ///
    /// For square input this is `|det A|²`.
    pub fn gram_determinant(&self) -> Result<f64> {
        if self.rows < self.cols {
            return Err(Error::NotTall {
                op: "gram_determinant",
                rows: self.rows,
                cols: self.cols,
            });
        }
        let gram = self.hermitian().matmul(self)?;
        let det = determinant(&gram)?;
        let scale = det.norm().max(1.0);
        if det.im.abs() > GRAM_IMAG_TOL * scale {
            return Err(Error::NumericalInstability(format!(
                "Gram determinant has imaginary residue {:e}",
                det.im
            )));
        }
        if det.re < -GRAM_IMAG_TOL * scale {
            return Err(Error::NumericalInstability(format!(
                "Gram determinant is negative ({:e})",
                det.re
            )));
        }
        Ok(det.re.max(0.0))
    }

    /// Orthonormal basis of the column span, same column order.
    ///
    /// Modified Gram-Schmidt followed by one re-orthogonalization pass.
    pub fn orthonormalize_columns(&self) -> Result<Self> {
        if self.rows < self.cols {
            return Err(Error::NotTall {
                op: "orthonormalize_columns",
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut basis: Vec<Vec<ComplexScalar>> = Vec::with_capacity(self.cols);
        for j in 0..self.cols {
            let mut v = self.column(j);
            let original = norm(&v);
            for _pass in 0..2 {
                for q in &basis {
                    let proj = inner(q, &v);
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= proj * qi;
                    }
                }
            }
            let residual = norm(&v);
            if residual < RANK_TOL * original.max(1.0) {
                return Err(Error::RankDeficient {
                    column: j,
                    norm: residual,
                });
            }
            v.iter_mut().for_each(|z| *z /= residual);
            basis.push(v);
        }
        let mut out = Self::zeros(n, self.cols);
        for (j, q) in basis.iter().enumerate() {
            for (i, &z) in q.iter().enumerate() {
                out[(i, j)] = z;
            }
        }
        Ok(out)
    }
}

/// `⟨a, b⟩ = aᴴb`.
fn inner(a: &[ComplexScalar], b: &[ComplexScalar]) -> ComplexScalar {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(v: &[ComplexScalar]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Determinant of a square matrix by LU with partial pivoting.
pub fn determinant(a: &ComplexMatrix) -> Result<ComplexScalar> {
    if a.rows != a.cols {
        return Err(Error::Shape(format!(
            "determinant of non-square {}x{} matrix",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    let mut m = a.data.clone();
    let mut det = c(1.0, 0.0);
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| m[i * n + k].norm().total_cmp(&m[j * n + k].norm()))
            .unwrap_or(k);
        if m[pivot * n + k].norm() == 0.0 {
            return Ok(c(0.0, 0.0));
        }
        if pivot != k {
            for j in 0..n {
                m.swap(k * n + j, pivot * n + j);
            }
            det = -det;
        }
        let p = m[k * n + k];
        det *= p;
        for i in (k + 1)..n {
            let f = m[i * n + k] / p;
            for j in k..n {
                let t = m[k * n + j];
                m[i * n + j] -= f * t;
            }
        }
    }
    Ok(det)
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = ComplexScalar;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &ComplexScalar {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut ComplexScalar {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}j ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let data = (0..rows * cols)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        ComplexMatrix::new(rows, cols, data).unwrap()
    }

    #[test]
    fn matmul_small_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random(2, 2, &mut rng);
        assert_eq!(ComplexMatrix::identity(2).matmul(&a).unwrap(), a);

        let swap = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let abcd = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let want = ComplexMatrix::from_real_rows(&[&[3.0, 4.0], &[1.0, 2.0]]);
        assert_eq!(swap.matmul(&abcd).unwrap(), want);

        let jj = ComplexMatrix::diagonal(&[c(0.0, 1.0), c(0.0, 1.0)]);
        let neg = ComplexMatrix::diagonal(&[c(-1.0, 0.0), c(-1.0, 0.0)]);
        assert_eq!(jj.matmul(&jj).unwrap(), neg);
    }

    #[test]
    fn matmul_rejects_mismatch() {
        let err = ComplexMatrix::zeros(2, 3)
            .matmul(&ComplexMatrix::zeros(2, 3))
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(2, 3)"), "{msg}");
    }

    #[test]
    fn hermitian_cases() {
        let a = ComplexMatrix::from_rows(&[vec![c(1.0, 1.0)]]);
        assert_eq!(a.hermitian(), ComplexMatrix::from_rows(&[vec![c(1.0, -1.0)]]));
        let sym = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 5.0]]);
        assert_eq!(sym.hermitian(), sym);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random(3, 2, &mut rng);
        let b = random(2, 4, &mut rng);
        let lhs = a.matmul(&b).unwrap().hermitian();
        let rhs = b.hermitian().matmul(&a.hermitian()).unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-15);
    }

    #[test]
    fn frobenius_cases() {
        assert_eq!(ComplexMatrix::zeros(3, 2).frobenius_norm_sq(), 0.0);
        assert_eq!(ComplexMatrix::from_rows(&[vec![c(3.0, 4.0)]]).frobenius_norm_sq(), 25.0);
        let h = ComplexMatrix::from_real_rows(&[
            &[1.0, 1.0, 1.0, 1.0],
            &[1.0, -1.0, 1.0, -1.0],
            &[1.0, 1.0, -1.0, -1.0],
            &[1.0, -1.0, -1.0, 1.0],
        ]);
        assert_eq!(h.frobenius_norm_sq(), 16.0);
    }

    /// Product of the eigenvalues of the 2x2 Hermitian Gram matrix, found
    /// from its characteristic polynomial.
    fn squared_singular_value_product(a: &ComplexMatrix) -> f64 {
        let col = |j| a.column(j);
        let (u, v) = (col(0), col(1));
        let g11: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        let g22: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let g12: ComplexScalar = u.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
        let tr = g11 + g22;
        let disc = ((g11 - g22).powi(2) + 4.0 * g12.norm_sqr()).sqrt();
        let (l1, l2) = ((tr + disc) / 2.0, (tr - disc) / 2.0);
        l1 * l2
    }

    #[test]
    fn gram_determinant_cases() {
        assert_eq!(ComplexMatrix::identity(2).gram_determinant().unwrap(), 1.0);

        // Orthogonal columns with squared norm 3 each.
        let a = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(-1.0, 0.0)],
            vec![c(0.0, 1.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 1.0)],
        ]);
        assert!((a.gram_determinant().unwrap() - 9.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random(4, 2, &mut rng);
            let want = squared_singular_value_product(&a);
            let got = a.gram_determinant().unwrap();
            assert!((got - want).abs() <= 1e-12 * want.max(1.0), "{got} vs {want}");
        }
    }

    #[test]
    fn gram_determinant_rejects_wide() {
        assert!(matches!(
            ComplexMatrix::zeros(2, 3).gram_determinant(),
            Err(Error::NotTall { .. })
        ));
    }

    #[test]
    fn orthonormalize_cases() {
        let v = ComplexMatrix::from_real_rows(&[&[1.0], &[1.0]]);
        let q = v.orthonormalize_columns().unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((q[(0, 0)] - c(s, 0.0)).norm() < 1e-15);
        assert!((q[(1, 0)] - c(s, 0.0)).norm() < 1e-15);

        let id = ComplexMatrix::identity(3);
        assert!(id.orthonormalize_columns().unwrap().max_abs_diff(&id).unwrap() < 1e-15);

        let dependent = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[1.0, 2.0], &[0.0, 0.0]]);
        assert!(matches!(
            dependent.orthonormalize_columns(),
            Err(Error::RankDeficient { column: 1, .. })
        ));
    }

    #[test]
    fn orthonormalize_reaches_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let q = random(16, 4, &mut rng).orthonormalize_columns().unwrap();
            let gram = q.hermitian().matmul(&q).unwrap();
            let err = gram.sub(&ComplexMatrix::identity(4)).unwrap().frobenius_norm_sq().sqrt();
            assert!(err <= 1e-10, "{err}");
        }
    }

    #[test]
    fn determinant_of_permutation() {
        let p = ComplexMatrix::from_real_rows(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert_eq!(determinant(&p).unwrap(), c(-1.0, 0.0));
    }

    #[test]
    fn new_rejects_non_finite() {
        assert!(ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(ComplexMatrix::new(1, 2, vec![c(1.0, 0.0)]).is_err());
    }
}
