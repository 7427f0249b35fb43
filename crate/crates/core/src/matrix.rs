//! Dense complex matrix carrier.

use std::fmt;
use std::ops::{Add, Deref, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix with finite entries.
///
/// Thin wrapper over `nalgebra::DMatrix<Complex64>`; dereferences to it so
/// the whole nalgebra API is available read-only.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    /// Wraps a nalgebra matrix, rejecting NaN/Inf entries.
    pub fn new(inner: DMatrix<Complex64>) -> Result<Self> {
        if inner.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(Self(inner))
        } else {
            Err(Error::NonFinite)
        }
    }

    /// Wraps without the finiteness check. Only for results of arithmetic on
    /// already validated matrices.
    pub(crate) fn wrap(inner: DMatrix<Complex64>) -> Self {
        Self(inner)
    }

    /// Builds from row-major entries.
    pub fn from_rows(rows: usize, cols: usize, data: &[Complex64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, data))
    }

    /// Builds from row-major real entries.
    pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        let data: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_rows(rows, cols, &data)
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    /// Scalar 1x1 matrix.
    pub fn scalar(z: Complex64) -> Self {
        Self(DMatrix::from_element(1, 1, z))
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn is_square(&self) -> bool {
        self.0.nrows() == self.0.ncols()
    }

    pub fn ensure_square(&self, what: &str) -> Result<usize> {
        if self.is_square() {
            Ok(self.0.nrows())
        } else {
            Err(Error::Shape(format!(
                "{what} must be square, got {}x{}",
                self.0.nrows(),
                self.0.ncols()
            )))
        }
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(self.0.map(|z| z * c))
    }

    pub fn scale_complex(&self, c: Complex64) -> Self {
        Self(self.0.map(|z| z * c))
    }

    /// Largest absolute entry difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff: shape mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral norm (largest singular value).
    pub fn norm2(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.0.clone().svd(false, false).singular_values.max()
    }

    /// Whether every entry has zero imaginary part.
    pub fn is_real(&self, tol: f64) -> bool {
        self.0
            .iter()
            .all(|z| z.im.abs() <= tol * (1.0 + z.re.abs()))
    }

    /// Block-diagonal assembly.
    pub fn block_diag(blocks: &[&ComplexMatrix]) -> Self {
        let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
        let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
        let mut out = DMatrix::zeros(rows, cols);
        let (mut r, mut c) = (0, 0);
        for b in blocks {
            out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(&b.0);
            r += b.nrows();
            c += b.ncols();
        }
        Self(out)
    }

    /// Assembles `[[a, b], [c, d]]`.
    pub fn block2x2(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        if a.nrows() != b.nrows()
            || c.nrows() != d.nrows()
            || a.ncols() != c.ncols()
            || b.ncols() != d.ncols()
        {
            return Err(Error::Shape("inconsistent 2x2 block dimensions".into()));
        }
        let (n1, n2) = (a.nrows(), c.nrows());
        let (m1, m2) = (a.ncols(), b.ncols());
        let mut out = DMatrix::zeros(n1 + n2, m1 + m2);
        out.view_mut((0, 0), (n1, m1)).copy_from(&a.0);
        out.view_mut((0, m1), (n1, m2)).copy_from(&b.0);
        out.view_mut((n1, 0), (n2, m1)).copy_from(&c.0);
        out.view_mut((n1, m1), (n2, m2)).copy_from(&d.0);
        Ok(Self(out))
    }

    /// Copies out a sub-block.
    pub fn block(&self, row: usize, col: usize, rows: usize, cols: usize) -> Self {
        Self(self.0.view((row, col), (rows, cols)).into_owned())
    }

    /// Inverse via LU; errors when numerically singular.
    pub fn try_inverse(&self) -> Result<Self> {
        let n = self.ensure_square("inverse operand")?;
        if n == 0 {
            return Ok(self.clone());
        }
        let sv = self.0.clone().svd(false, false).singular_values;
        let (smin, smax) = (sv.min(), sv.max());
        if smax == 0.0 || smin <= crate::DEFAULT_TOL * smax {
            return Err(Error::Singular(format!(
                "sigma_min/sigma_max = {:e}",
                if smax == 0.0 { 0.0 } else { smin / smax }
            )));
        }
        self.0
            .clone()
            .try_inverse()
            .map(Self)
            .ok_or_else(|| Error::Singular("LU pivot breakdown".into()))
    }
}

impl Deref for ComplexMatrix {
    type Target = DMatrix<Complex64>;
    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.0)
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix((&self.0).$method(&rhs.0))
            }
        }
        impl $tr<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(self.0.$method(rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-self.0)
    }
}

/// Shorthand for a complex scalar.
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
