//! Dense complex matrices and the Hermitian spectral utilities built on them.
//!
//! Storage is row-major with one `Complex64` per entry, mirroring the JSON
//! encoding `{"rows": r, "cols": c, "data": [[re, im], ...]}`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Numerical tolerance shared by every validation and comparison.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Tolerance(f64);

impl Tolerance {
    pub const DEFAULT_EPS: f64 = 1e-9;

    pub fn new(eps: f64) -> Result<Self> {
        if eps.is_finite() && eps >= 0.0 {
            Ok(Self(eps))
        } else {
            Err(Error::InvalidTolerance(eps))
        }
    }

    #[inline]
    pub fn eps(self) -> f64 {
        self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self(Self::DEFAULT_EPS)
    }
}

impl TryFrom<f64> for Tolerance {
    type Error = Error;
    fn try_from(eps: f64) -> Result<Self> {
        Self::new(eps)
    }
}

impl From<Tolerance> for f64 {
    fn from(t: Tolerance) -> f64 {
        t.0
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.0)
    }
}

/// Which tensor factor a partial trace removes, for operators on `A ⊗ B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceOut {
    /// Trace over the first factor, leaving an operator on `B`.
    First,
    /// Trace over the second factor, leaving an operator on `A`.
    Second,
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl TryFrom<MatrixRepr> for ComplexMatrix {
    type Error = Error;
    fn try_from(r: MatrixRepr) -> Result<Self> {
        let data = r.data.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        ComplexMatrix::new(r.rows, r.cols, data)
    }
}

impl From<ComplexMatrix> for MatrixRepr {
    fn from(m: ComplexMatrix) -> Self {
        MatrixRepr {
            rows: m.rows,
            cols: m.cols,
            data: m.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Spectral decomposition of a Hermitian matrix; eigenvalues ascending and
/// eigenvectors stored as the matching columns of `vectors`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// The `k`-th eigenvector as a column slice copy.
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        (0..self.vectors.rows).map(|i| self.vectors[(i, k)]).collect()
    }

    /// Rebuilds `Σ g(λ_k) v_k v_k†`.
    pub fn map_spectrum(&self, g: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.vectors.rows;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = g(lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = self.vectors[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vi * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(dim_mismatch("positive dimensions", format!("{rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::EntryCount {
                rows,
                cols,
                expected: rows * cols,
                found: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Real matrix from row-major values.
    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(rows, cols, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { Complex64::new(values[i], 0.0) } else { ZERO })
    }

    /// Rank-one operator `|v⟩⟨v|`.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    /// `|k⟩⟨k|` in dimension `n`.
    pub fn basis_projector(n: usize, k: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == k && j == k { ONE } else { ZERO })
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
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    fn require_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows == other.rows && self.cols == other.cols {
            Ok(())
        } else {
            Err(dim_mismatch(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ))
        }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(dim_mismatch(
                format!("{} rows on the right factor", self.cols),
                other.rows,
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.require_same_shape(other)?;
        Ok(self.zip_map(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.require_same_shape(other)?;
        Ok(self.zip_map(other, |a, b| a - b))
    }

    fn zip_map(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, r: f64) -> Self {
        self.map(|z| z * r)
    }

    pub fn scale_complex(&self, c: Complex64) -> Self {
        self.map(|z| z * c)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Result<Complex64> {
        let n = self.require_square()?;
        Ok((0..n).map(|i| self[(i, i)]).sum())
    }

    /// `Tr[AB]` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        if self.cols != other.rows || self.rows != other.cols {
            return Err(dim_mismatch(
                format!("{}x{}", self.cols, self.rows),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        Ok(acc)
    }

    /// Largest entry-wise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.require_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Kronecker product; block `(i, j)` equals `self[i, j] · other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        Self::from_fn(rows, cols, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    /// Partial trace of an operator on `C^{d_a} ⊗ C^{d_b}`.
    pub fn partial_trace(&self, dims: (usize, usize), side: TraceOut) -> Result<Self> {
        let (da, db) = dims;
        let n = self.require_square()?;
        if da == 0 || db == 0 || da * db != n {
            return Err(dim_mismatch(format!("{da}*{db}"), n));
        }
        Ok(match side {
            TraceOut::Second => Self::from_fn(da, da, |i, j| (0..db).map(|k| self[(i * db + k, j * db + k)]).sum()),
            TraceOut::First => Self::from_fn(db, db, |i, j| (0..da).map(|k| self[(k * db + i, k * db + j)]).sum()),
        })
    }

    /// `U A U†`.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self> {
        u.multiply(self)?.multiply(&u.adjoint())
    }

    /// Max-entry distance between `self` and its adjoint.
    pub fn hermiticity_defect(&self) -> Result<f64> {
        let n = self.require_square()?;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        Ok(worst)
    }

    pub fn is_hermitian(&self, tol: Tolerance) -> Result<bool> {
        Ok(self.hermiticity_defect()? <= tol.eps())
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// Full eigendecomposition of a Hermitian matrix. The input is replaced
    /// by its Hermitian part before decomposition.
    pub fn hermitian_eigen(&self, tol: Tolerance) -> Result<HermitianEigen> {
        let n = self.require_square()?;
        let defect = self.hermiticity_defect()?;
        if defect > tol.eps() {
            return Err(Error::NotHermitian(defect));
        }
        let h = self.hermitian_part();
        let m = DMatrix::from_row_slice(n, n, &h.data);
        let eig = m.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = Self::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(HermitianEigen { values, vectors })
    }

    pub fn hermitian_eigenvalues(&self, tol: Tolerance) -> Result<Vec<f64>> {
        Ok(self.hermitian_eigen(tol)?.values)
    }

    /// Hermitian within `tol` and smallest eigenvalue `≥ −eps`.
    pub fn is_psd(&self, tol: Tolerance) -> Result<bool> {
        self.require_square()?;
        if !self.is_hermitian(tol)? {
            return Ok(false);
        }
        let values = self.hermitian_eigenvalues(tol)?;
        Ok(values[0] >= -tol.eps())
    }

    /// Operator-norm distance `max |λ(A − B)|` between Hermitian matrices.
    pub fn operator_norm_distance(&self, other: &Self, tol: Tolerance) -> Result<f64> {
        self.require_same_shape(other)?;
        let diff = self.try_sub(other)?;
        let values = diff.hermitian_eigenvalues(tol)?;
        Ok(values[0].abs().max(values[values.len() - 1].abs()))
    }

    /// `A^{-1/2}` for a positive-definite Hermitian `A`. Returns the smallest
    /// eigenvalue as the error payload when it is not above `floor`.
    pub(crate) fn inverse_sqrt(&self, floor: f64, tol: Tolerance) -> std::result::Result<Self, f64> {
        let eig = self.hermitian_eigen(tol).map_err(|_| f64::NAN)?;
        let min = eig.values[0];
        if min.is_nan() || min <= floor {
            return Err(min);
        }
        Ok(eig.map_spectrum(|l| 1.0 / l.sqrt()))
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    /// Panics on shape mismatch; use [`ComplexMatrix::try_add`] for the checked form.
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix shapes must agree")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix shapes must agree")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.multiply(rhs).expect("inner dimensions must agree")
    }
}
