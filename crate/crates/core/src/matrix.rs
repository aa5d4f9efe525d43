//! Dense complex matrices.
//!
//! Everything in this crate (states, operators, isometries, Kraus operators,
//! correlation matrices) is carried by [`ComplexMatrix`], a row-major buffer of
//! `Complex64`. Dimensions are small, so all routines are plain dense loops.
//! Tensor-structured routines ([`apply_on_factor`], [`partial_trace`]) work on
//! a multi-index without materializing large Kronecker products.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
pub use num_complex::Complex64;

use crate::error::{Error, Result};

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const C_I: Complex64 = Complex64::new(0.0, 1.0);

/// Default absolute tolerance on `max |A - A†|` for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Build from a row-major buffer. Rejects zero dimensions, length
    /// mismatches and non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDims(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from rows of complex entries. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let data = rows.iter().flatten().copied().collect();
        Self::from_vec(r, c, data).expect("finite, non-empty rows")
    }

    /// Build from rows of real entries. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C_ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C_ONE;
        }
        m
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C_ONE; rows * cols],
        }
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// Column vector (`n x 1`).
    pub fn column(entries: &[Complex64]) -> Self {
        Self {
            rows: entries.len(),
            cols: 1,
            data: entries.to_vec(),
        }
    }

    /// Computational basis vector `|index⟩` in dimension `dim`.
    pub fn basis_vector(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim, 1);
        v[(index, 0)] = C_ONE;
        v
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

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    /// Column `j` as an `n x 1` matrix.
    pub fn col(&self, j: usize) -> Self {
        Self::from_fn(self.rows, 1, |i, _| self[(i, j)])
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    /// Sum of diagonal entries; panics if not square.
    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of non-square {}x{}", self.rows, self.cols);
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |A - A†|`; `None` for non-square input.
    pub fn hermiticity_defect(&self) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        Some(worst)
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with("add", other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with("sub", other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        op: &'static str,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

// Operator impls panic on shape mismatch; use the `try_*`/free functions
// when shapes come from user input.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        multiply(self, rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

/// Matrix product `a · b`.
pub fn multiply(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols != b.rows {
        return Err(Error::ShapeMismatch {
            op: "multiply",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let mut out = ComplexMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for k in 0..a.cols {
            let aik = a.data[i * a.cols + k];
            if aik == C_ZERO {
                continue;
            }
            let b_row = &b.data[k * b.cols..(k + 1) * b.cols];
            for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                *o += aik * bkj;
            }
        }
    }
    Ok(out)
}

/// Kronecker product; `(a⊗b)[i·b.rows + k, j·b.cols + l] = a[i,j]·b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Left-to-right Kronecker product of a non-empty list.
pub fn kron_all(factors: &[ComplexMatrix]) -> ComplexMatrix {
    let (first, rest) = factors.split_first().expect("kron_all of empty list");
    rest.iter().fold(first.clone(), |acc, f| kron(&acc, f))
}

pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    a.dagger()
}

/// Entrywise (Schur/Hadamard) product.
pub fn schur_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.zip_with("schur_product", b, |x, y| x * y)
}

/// `|v⟩⟨w|` for column vectors.
pub fn outer(v: &ComplexMatrix, w: &ComplexMatrix) -> ComplexMatrix {
    v * &w.dagger()
}

/// Swap of two tensor factors of dimension `d` each, as a `d² x d²` permutation.
pub fn swap_matrix(d: usize) -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            s[(j * d + i, i * d + j)] = C_ONE;
        }
    }
    s
}

#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in eigenvalue order.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V · diag(λ) · V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let scaled = ComplexMatrix::from_fn(v.rows(), v.cols(), |i, j| v[(i, j)] * self.eigenvalues[j]);
        &scaled * &v.dagger()
    }
}

fn ensure_hermitian(a: &ComplexMatrix, op: &'static str, tol: f64) -> Result<()> {
    let defect = a.hermiticity_defect().ok_or(Error::NotSquare {
        op,
        rows: a.rows,
        cols: a.cols,
    })?;
    if defect > tol {
        return Err(Error::NotHermitian {
            max_asymmetry: defect,
        });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix (within `tol`). The input is
/// symmetrized before decomposition; degenerate eigenvectors carry no
/// particular gauge.
pub fn hermitian_eig(a: &ComplexMatrix, tol: f64) -> Result<HermitianEigen> {
    ensure_hermitian(a, "hermitian_eig", tol)?;
    let n = a.rows;
    let sym = a.hermitian_part();
    let m = DMatrix::from_fn(n, n, |i, j| sym[(i, j)]);
    let eig = nalgebra::SymmetricEigen::new(m);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdReport {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
}

/// Positive semidefiniteness: `min λ ≥ -tol`.
pub fn is_psd(a: &ComplexMatrix, tol: f64) -> Result<PsdReport> {
    let eig = hermitian_eig(a, tol.max(HERMITIAN_TOL))?;
    let min_eigenvalue = eig.eigenvalues.first().copied().unwrap_or(0.0);
    Ok(PsdReport {
        is_psd: min_eigenvalue >= -tol,
        min_eigenvalue,
    })
}

fn check_factorization(side: usize, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidDims(format!("factor dimensions {dims:?}")));
    }
    let total: usize = dims.iter().product();
    if total != side {
        return Err(Error::InvalidDims(format!(
            "factors {dims:?} have product {total}, matrix side is {side}"
        )));
    }
    Ok(())
}

/// Reduce `m` (acting on `⊗ dims`) to the factors listed in `keep`, tracing
/// out the rest. Kept factors appear in ascending order.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            op: "partial_trace",
            rows: m.rows,
            cols: m.cols,
        });
    }
    check_factorization(m.rows, dims)?;
    let mut kept = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() {
            return Err(Error::InvalidDims(format!(
                "keep index {k} out of range for {} factors",
                dims.len()
            )));
        }
        kept[k] = true;
    }

    // Split a flat index into (kept index, traced index).
    let split = |mut idx: usize| -> (usize, usize) {
        let (mut k_idx, mut k_stride) = (0, 1);
        let (mut t_idx, mut t_stride) = (0, 1);
        for (f, &d) in dims.iter().enumerate().rev() {
            let digit = idx % d;
            idx /= d;
            if kept[f] {
                k_idx += digit * k_stride;
                k_stride *= d;
            } else {
                t_idx += digit * t_stride;
                t_stride *= d;
            }
        }
        (k_idx, t_idx)
    };

    let out_dim: usize = dims
        .iter()
        .zip(&kept)
        .filter(|(_, &k)| k)
        .map(|(&d, _)| d)
        .product();
    let parts: Vec<(usize, usize)> = (0..m.rows).map(split).collect();
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    for (r, &(kr, tr)) in parts.iter().enumerate() {
        for (c, &(kc, tc)) in parts.iter().enumerate() {
            if tr == tc {
                out[(kr, kc)] += m[(r, c)];
            }
        }
    }
    Ok(out)
}

/// Left-multiply tensor factor `site` of the row index of `m` by `op`, i.e.
/// `(I ⊗ … ⊗ op ⊗ … ⊗ I) · m` without forming the Kronecker product.
/// `op` may be rectangular (`e x dims[site]`); the factor then becomes `e`.
pub fn apply_on_factor(
    op: &ComplexMatrix,
    m: &ComplexMatrix,
    dims: &[usize],
    site: usize,
) -> Result<ComplexMatrix> {
    check_factorization(m.rows, dims)?;
    if site >= dims.len() {
        return Err(Error::InvalidDims(format!("site {site} out of range")));
    }
    let d = dims[site];
    if op.cols != d {
        return Err(Error::ShapeMismatch {
            op: "apply_on_factor",
            left: op.shape(),
            right: (d, d),
        });
    }
    let e = op.rows;
    let inner: usize = dims[site + 1..].iter().product();
    let outer_blocks = m.rows / (d * inner);
    let cols = m.cols;
    let mut out = ComplexMatrix::zeros(outer_blocks * e * inner, cols);
    for o in 0..outer_blocks {
        for p in 0..e {
            for q in 0..d {
                let w = op[(p, q)];
                if w == C_ZERO {
                    continue;
                }
                for r in 0..inner {
                    let dst = ((o * e + p) * inner + r) * cols;
                    let src = ((o * d + q) * inner + r) * cols;
                    for c in 0..cols {
                        out.data[dst + c] += w * m.data[src + c];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `m · (I ⊗ … ⊗ op ⊗ … ⊗ I)` acting on the column index of `m`.
pub fn apply_on_factor_right(
    m: &ComplexMatrix,
    op: &ComplexMatrix,
    dims: &[usize],
    site: usize,
) -> Result<ComplexMatrix> {
    Ok(apply_on_factor(&op.dagger(), &m.dagger(), dims, site)?.dagger())
}
