//! Dense complex matrices and truncated harmonic-oscillator operators.
//!
//! Everything here is small (at most a few hundred rows), so matrices are
//! stored row-major in a flat `Vec`. Hermitian eigendecomposition is handed
//! to nalgebra.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Result, ThermoError};

/// Relative tolerance for the Hermiticity contract.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Normalization tolerance for state vectors handed to [`expectation`].
pub const NORM_TOL: f64 = 1e-12;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (k, &d) in diag.iter().enumerate() {
            m[(k, k)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    /// Builds a matrix from row slices. Panics on ragged input.
    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            assert_eq!(r.len(), n_cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self { rows: n_rows, cols: n_cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// `|u⟩⟨v|`
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|k| self[(k, k)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|r| (0..self.cols).all(|c| r == c || self[(r, c)] == ZERO))
    }

    /// Largest entrywise deviation from `M = M†`, relative to the Frobenius norm.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        let scale = self.norm();
        if scale == 0.0 {
            worst
        } else {
            worst / scale
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= HERMITIAN_TOL
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }

    /// Eigenvalues (ascending) and the matching orthonormal eigenvectors as columns.
    pub fn eigh(&self) -> Result<(Vec<f64>, CMatrix)> {
        self.check_hermitian()?;
        if self.is_diagonal() {
            let mut idx: Vec<usize> = (0..self.rows).collect();
            idx.sort_by(|&a, &b| self[(a, a)].re.total_cmp(&self[(b, b)].re));
            let vals = idx.iter().map(|&k| self[(k, k)].re).collect();
            let vecs = Self::from_fn(self.rows, self.rows, |r, c| if idx[c] == r { ONE } else { ZERO });
            return Ok((vals, vecs));
        }
        let eig = self.to_nalgebra().symmetric_eigen();
        let mut idx: Vec<usize> = (0..self.rows).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vals = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vecs = Self::from_nalgebra(&eig.eigenvectors);
        let vecs = Self::from_fn(self.rows, self.rows, |r, c| vecs[(r, idx[c])]);
        Ok((vals, vecs))
    }

    fn check_hermitian(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(ThermoError::NonFinite("matrix entries"));
        }
        let defect = self.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(ThermoError::NotHermitian { defect });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                for c in 0..rhs.cols {
                    out.data[r * rhs.cols + c] += a * rhs.data[k * rhs.cols + c];
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "dimension mismatch in sum");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "dimension mismatch in difference");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// `e^{sM}` for Hermitian `M`, via eigendecomposition.
pub fn hermitian_exp(m: &CMatrix, s: C64) -> Result<CMatrix> {
    m.check_hermitian()?;
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(ThermoError::NonFinite("exponent scale"));
    }
    if m.is_diagonal() {
        let d: Vec<C64> = (0..m.rows).map(|k| (s * m[(k, k)].re).exp()).collect();
        return Ok(CMatrix::from_diag(&d));
    }
    let (vals, vecs) = m.eigh()?;
    let n = m.rows;
    let weights: Vec<C64> = vals.iter().map(|&l| (s * l).exp()).collect();
    Ok(CMatrix::from_fn(n, n, |r, c| (0..n).map(|k| vecs[(r, k)] * weights[k] * vecs[(c, k)].conj()).sum()))
}

/// Spectral norm of a Hermitian matrix (largest eigenvalue magnitude).
/// Falls back to the Frobenius norm if `m` is not Hermitian.
pub fn operator_norm(m: &CMatrix) -> f64 {
    match m.eigh() {
        Ok((vals, _)) => vals.iter().fold(0.0, |acc, v| acc.max(v.abs())),
        Err(_) => m.norm(),
    }
}

/// Kronecker product `A ⊗ B`; the left factor is the spin throughout the crate.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    CMatrix::from_fn(rows, cols, |r, c| a[(r / b.rows, c / b.cols)] * b[(r % b.rows, c % b.cols)])
}

/// Kronecker product of vectors, spin factor first.
pub fn tensor_vec(u: &[C64], v: &[C64]) -> Vec<C64> {
    u.iter().flat_map(|&x| v.iter().map(move |&y| x * y)).collect()
}

/// Truncated oscillator Hilbert space: `dim` Fock levels, pointer width `sigma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FockSpace {
    dim: usize,
    sigma: f64,
}

impl FockSpace {
    pub fn new(dim: usize, sigma: f64) -> Result<Self> {
        if dim < 2 {
            return Err(ThermoError::InvalidParameter(format!("Fock dimension must be at least 2, got {dim}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(ThermoError::InvalidParameter(format!("pointer width must be positive, got {sigma}")));
        }
        Ok(Self { dim, sigma })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn annihilation(&self) -> CMatrix {
        let mut a = CMatrix::zeros(self.dim, self.dim);
        for n in 1..self.dim {
            a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        a
    }

    /// `a†a`, built directly so the diagonal is exactly `0..D-1`.
    pub fn number(&self) -> CMatrix {
        let d: Vec<f64> = (0..self.dim).map(|n| n as f64).collect();
        CMatrix::from_real_diag(&d)
    }

    /// Dimensionless quadrature `a + a†`.
    pub fn quadrature_x(&self) -> CMatrix {
        let a = self.annihilation();
        &a + &a.adjoint()
    }

    /// Dimensionless quadrature `i(a† − a)`.
    pub fn quadrature_p(&self) -> CMatrix {
        let a = self.annihilation();
        (&a.adjoint() - &a).scale(I)
    }
}

/// Ladder and quadrature operators of a truncated oscillator.
#[derive(Clone, Debug)]
pub struct FockOperators {
    pub a: CMatrix,
    pub adag: CMatrix,
    /// `z = σ(a + a†)`
    pub z: CMatrix,
    /// `p = i(a† − a)/(2σ)`, so `[z, p] = i` away from the truncation corner.
    pub p: CMatrix,
}

pub fn fock_operators(space: &FockSpace) -> FockOperators {
    let a = space.annihilation();
    let adag = a.adjoint();
    let z = (&a + &adag).scale(C64::new(space.sigma, 0.0));
    let p = (&adag - &a).scale(C64::new(0.0, 1.0 / (2.0 * space.sigma)));
    FockOperators { a, adag, z, p }
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// `⟨u|v⟩`
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    assert_eq!(u.len(), v.len(), "dimension mismatch in inner product");
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// `⟨v|M|v⟩` for a normalized `v`. For Hermitian `M` the imaginary roundoff is dropped.
pub fn expectation(v: &[C64], m: &CMatrix) -> Result<C64> {
    if m.cols() != v.len() || m.rows() != v.len() {
        return Err(ThermoError::DimensionMismatch { expected: m.rows(), found: v.len() });
    }
    let n2 = norm_sqr(v);
    if (n2 - 1.0).abs() > NORM_TOL {
        return Err(ThermoError::NotNormalized { norm: n2.sqrt() });
    }
    let val = inner(v, &m.apply(v));
    if m.is_hermitian() {
        Ok(C64::new(val.re, 0.0))
    } else {
        Ok(val)
    }
}

/// `⟨u|M|v⟩` with no normalization requirement.
pub fn matrix_element(u: &[C64], m: &CMatrix, v: &[C64]) -> C64 {
    inner(u, &m.apply(v))
}
