use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::{Polynomial, COEFF_CLEANUP};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::realize::RealizationArray;

/// Scalar real rational function `num / den`, kept reduced with a monic
/// denominator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RationalWire")]
pub struct Rational {
    num: Polynomial,
    den: Polynomial,
}

#[derive(Deserialize)]
struct RationalWire {
    num: Polynomial,
    den: Polynomial,
}

impl TryFrom<RationalWire> for Rational {
    type Error = Error;
    fn try_from(w: RationalWire) -> Result<Self> {
        Rational::new(w.num, w.den)
    }
}

impl Rational {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidArgument(
                "denominator is the zero polynomial".into(),
            ));
        }
        if num
            .coeffs()
            .iter()
            .chain(den.coeffs())
            .any(|c| !c.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(Self::reduced(num, den))
    }

    fn reduced(num: Polynomial, den: Polynomial) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let g = num.gcd(&den);
        let (num, den) = if g.degree().unwrap_or(0) > 0 {
            (num.div_rem(&g).0, den.div_rem(&g).0)
        } else {
            (num, den)
        };
        let lead = den.leading();
        let num = num.scale(1.0 / lead).cleanup(COEFF_CLEANUP);
        let den = den.scale(1.0 / lead).cleanup(COEFF_CLEANUP);
        if num.is_zero() {
            return Self::zero();
        }
        Self { num, den }
    }

    pub fn zero() -> Self {
        Self {
            num: Polynomial::zero(),
            den: Polynomial::one(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_polynomial(Polynomial::constant(c))
    }

    pub fn from_polynomial(p: Polynomial) -> Self {
        Self {
            num: p,
            den: Polynomial::one(),
        }
    }

    /// `1/s`
    pub fn one_over_s() -> Self {
        Self {
            num: Polynomial::one(),
            den: Polynomial::s(),
        }
    }

    /// `s`
    pub fn s() -> Self {
        Self::from_polynomial(Polynomial::s())
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `None` when `s` is a pole to rounding accuracy.
    pub fn eval(&self, s: Complex64) -> Option<Complex64> {
        let d = self.den.eval(s);
        if d.norm() <= 1e-13 * self.den.eval_magnitude(s) {
            return None;
        }
        Some(self.num.eval(s) / d)
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.den == other.den {
            return Self::reduced(self.num.add(&other.num), self.den.clone());
        }
        Self::reduced(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn neg(&self) -> Self {
        Self {
            num: self.num.scale(-1.0),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::reduced(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn scale(&self, c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        Self {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::IdenticallySingular(
                "inverse of the zero function".into(),
            ));
        }
        Ok(Self::reduced(self.den.clone(), self.num.clone()))
    }

    /// Roots of the denominator.
    pub fn poles(&self) -> Vec<Complex64> {
        self.den.roots()
    }

    /// Coefficient-wise comparison relative to the largest coefficient.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let close = |a: &Polynomial, b: &Polynomial| {
            if a.degree() != b.degree() {
                return false;
            }
            let scale = a.max_abs().max(b.max_abs()).max(1.0);
            a.coeffs()
                .iter()
                .zip(b.coeffs())
                .all(|(x, y)| (x - y).abs() <= tol * scale)
        };
        close(&self.num, &other.num) && close(&self.den, &other.den)
    }
}

/// `m x m` real rational matrix function, row-major entries.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMatrixFunction {
    m: usize,
    entries: Vec<Rational>,
    realization: Option<Box<RealizationArray>>,
}

#[derive(Serialize, Deserialize)]
struct MatrixFunctionWire {
    m: usize,
    entries: Vec<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    realization: Option<RealizationArray>,
}

impl Serialize for RationalMatrixFunction {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        MatrixFunctionWire {
            m: self.m,
            entries: self
                .entries
                .chunks(self.m.max(1))
                .map(|r| r.to_vec())
                .collect(),
            realization: self.realization.as_deref().cloned(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RationalMatrixFunction {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = MatrixFunctionWire::deserialize(deserializer)?;
        if wire.entries.len() != wire.m || wire.entries.iter().any(|r| r.len() != wire.m) {
            return Err(D::Error::custom(format!("entries must be {0}x{0}", wire.m)));
        }
        let mut f =
            RationalMatrixFunction::new(wire.m, wire.entries.into_iter().flatten().collect())
                .map_err(D::Error::custom)?;
        if let Some(r) = wire.realization {
            f = f.with_realization(r).map_err(D::Error::custom)?;
        }
        Ok(f)
    }
}

impl RationalMatrixFunction {
    pub fn new(m: usize, entries: Vec<Rational>) -> Result<Self> {
        if entries.len() != m * m {
            return Err(Error::Shape(format!(
                "{} entries for a {m}x{m} function",
                entries.len()
            )));
        }
        Ok(Self {
            m,
            entries,
            realization: None,
        })
    }

    pub fn scalar(r: Rational) -> Self {
        Self {
            m: 1,
            entries: vec![r],
            realization: None,
        }
    }

    /// `r * I_m`
    pub fn scalar_identity(r: &Rational, m: usize) -> Self {
        let entries = (0..m * m)
            .map(|k| {
                if k / m == k % m {
                    r.clone()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        Self {
            m,
            entries,
            realization: None,
        }
    }

    pub fn identity(m: usize) -> Self {
        Self::scalar_identity(&Rational::constant(1.0), m)
    }

    pub fn zeros(m: usize) -> Self {
        Self {
            m,
            entries: vec![Rational::zero(); m * m],
            realization: None,
        }
    }

    pub fn diagonal(diag: Vec<Rational>) -> Self {
        let m = diag.len();
        let mut out = Self::zeros(m);
        for (i, r) in diag.into_iter().enumerate() {
            out.entries[i * m + i] = r;
        }
        out
    }

    /// Constant function from a real matrix.
    pub fn constant(mat: &ComplexMatrix) -> Result<Self> {
        let m = mat.ensure_square("constant function")?;
        if !mat.is_real(0.0) {
            return Err(Error::InvalidArgument(
                "rational functions carry real coefficients".into(),
            ));
        }
        Ok(Self {
            m,
            entries: mat
                .iter_row_major()
                .map(|z| Rational::constant(z.re))
                .collect(),
            realization: None,
        })
    }

    /// Attaches a state-space form; its size must match.
    pub fn with_realization(mut self, r: RealizationArray) -> Result<Self> {
        if r.m() != self.m {
            return Err(Error::Shape(format!(
                "realization has m = {}, function has m = {}",
                r.m(),
                self.m
            )));
        }
        self.realization = Some(Box::new(r));
        Ok(self)
    }

    pub fn realization(&self) -> Option<&RealizationArray> {
        self.realization.as_deref()
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.m + j]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    /// Entrywise evaluation; `None` if any entry has a pole at `s`.
    pub fn eval(&self, s: Complex64) -> Option<ComplexMatrix> {
        let vals: Option<Vec<Complex64>> = self.entries.iter().map(|r| r.eval(s)).collect();
        ComplexMatrix::from_rows(self.m, self.m, &vals?).ok()
    }

    fn zip(&self, other: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Result<Self> {
        if self.m != other.m {
            return Err(Error::Shape(format!("sizes {} and {}", self.m, other.m)));
        }
        Ok(Self {
            m: self.m,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(a, b))
                .collect(),
            realization: None,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, Rational::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, Rational::sub)
    }

    pub fn neg(&self) -> Self {
        Self {
            m: self.m,
            entries: self.entries.iter().map(Rational::neg).collect(),
            realization: None,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            m: self.m,
            entries: self.entries.iter().map(|r| r.scale(c)).collect(),
            realization: None,
        }
    }

    /// Matrix product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.m != other.m {
            return Err(Error::Shape(format!("sizes {} and {}", self.m, other.m)));
        }
        let m = self.m;
        let mut entries = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let mut acc = Rational::zero();
                for k in 0..m {
                    let (a, b) = (self.entry(i, k), other.entry(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.mul(b));
                    }
                }
                entries.push(acc);
            }
        }
        Ok(Self {
            m,
            entries,
            realization: None,
        })
    }

    /// Determinant by cofactor expansion.
    pub fn det(&self) -> Rational {
        let idx: Vec<usize> = (0..self.m).collect();
        self.minor_det(&idx, &idx)
    }

    fn minor_det(&self, rows: &[usize], cols: &[usize]) -> Rational {
        match rows.len() {
            0 => Rational::constant(1.0),
            1 => self.entry(rows[0], cols[0]).clone(),
            _ => {
                let r0 = rows[0];
                let sub_rows = &rows[1..];
                let mut acc = Rational::zero();
                for (k, &c) in cols.iter().enumerate() {
                    let e = self.entry(r0, c);
                    if e.is_zero() {
                        continue;
                    }
                    let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                    let term = e.mul(&self.minor_det(sub_rows, &sub_cols));
                    acc = if k % 2 == 0 {
                        acc.add(&term)
                    } else {
                        acc.sub(&term)
                    };
                }
                acc
            }
        }
    }

    /// Inverse through adjugate over determinant.
    pub fn inverse(&self) -> Result<Self> {
        let m = self.m;
        if m == 1 {
            return Ok(Self::scalar(self.entries[0].inverse()?));
        }
        if self.is_diagonal() {
            let diag: Result<Vec<_>> = (0..m).map(|i| self.entry(i, i).inverse()).collect();
            return Ok(Self::diagonal(diag?));
        }
        let det = self.det();
        if det.is_zero() {
            return Err(Error::IdenticallySingular(
                "determinant vanishes identically".into(),
            ));
        }
        let det_inv = det.inverse()?;
        let all: Vec<usize> = (0..m).collect();
        let mut entries = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                // (adj F)_{ij} = (-1)^{i+j} det(F without row j, column i)
                let rows: Vec<usize> = all.iter().copied().filter(|&r| r != j).collect();
                let cols: Vec<usize> = all.iter().copied().filter(|&c| c != i).collect();
                let cof = self.minor_det(&rows, &cols);
                let cof = if (i + j) % 2 == 0 { cof } else { cof.neg() };
                entries.push(cof.mul(&det_inv));
            }
        }
        Ok(Self {
            m,
            entries,
            realization: None,
        })
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.m).all(|i| (0..self.m).all(|j| i == j || self.entry(i, j).is_zero()))
    }

    /// Assembles `[[a, b], [c, d]]` from equally sized blocks.
    pub fn block2x2(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        let m = a.m;
        if [b.m, c.m, d.m].iter().any(|&x| x != m) {
            return Err(Error::Shape("blocks must share one size".into()));
        }
        let size = 2 * m;
        let mut entries = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                let blk = match (i < m, j < m) {
                    (true, true) => a,
                    (true, false) => b,
                    (false, true) => c,
                    (false, false) => d,
                };
                entries.push(blk.entry(i % m, j % m).clone());
            }
        }
        Ok(Self {
            m: size,
            entries,
            realization: None,
        })
    }

    /// Copies out the `size x size` block at `(row, col)`.
    pub fn block(&self, row: usize, col: usize, size: usize) -> Self {
        let entries = (0..size)
            .flat_map(|i| (0..size).map(move |j| (i, j)))
            .map(|(i, j)| self.entry(row + i, col + j).clone())
            .collect();
        Self {
            m: size,
            entries,
            realization: None,
        }
    }

    /// All poles of all entries.
    pub fn poles(&self) -> Vec<Complex64> {
        self.entries.iter().flat_map(Rational::poles).collect()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.m == other.m
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.approx_eq(b, tol))
    }
}

trait RowMajor {
    fn iter_row_major(&self) -> Box<dyn Iterator<Item = Complex64> + '_>;
}

impl RowMajor for ComplexMatrix {
    fn iter_row_major(&self) -> Box<dyn Iterator<Item = Complex64> + '_> {
        Box::new((0..self.nrows()).flat_map(move |i| (0..self.ncols()).map(move |j| self[(i, j)])))
    }
}
