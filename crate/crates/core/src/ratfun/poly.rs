use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Relative magnitude below which coefficients are dropped after reduction.
pub const COEFF_CLEANUP: f64 = 1e-12;
/// Relative remainder size treated as zero inside the Euclidean gcd.
const GCD_TOL: f64 = 1e-9;
/// Relative remainder size accepted when verifying a gcd candidate.
const GCD_VERIFY_TOL: f64 = 1e-11;

/// Real polynomial, coefficients in ascending degree. The highest stored
/// coefficient is nonzero unless the polynomial is zero (empty).
#[derive(Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl From<Vec<f64>> for Polynomial {
    fn from(coeffs: Vec<f64>) -> Self {
        Self::new(coeffs)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        if p.coeffs.is_empty() {
            vec![0.0]
        } else {
            p.coeffs
        }
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial{:?}", self.coeffs)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}*s")?,
                _ => write!(f, "{a}*s^{k}")?,
            }
        }
        Ok(())
    }
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    /// The polynomial `s`.
    pub fn s() -> Self {
        Self::new(vec![0.0, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    /// `sum |c_k| |s|^k`, the scale against which `eval` rounding is measured.
    pub fn eval_magnitude(&self, s: Complex64) -> f64 {
        let r = s.norm();
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * r + c.abs())
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Self, k: usize| p.coeffs.get(k).copied().unwrap_or(0.0);
        Self::new((0..len).map(|k| get(self, k) + get(other, k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Zeroes coefficients below `rel * max|c|`.
    pub fn cleanup(&self, rel: f64) -> Self {
        let cut = rel * self.max_abs();
        Self::new(
            self.coeffs
                .iter()
                .map(|&c| if c.abs() < cut { 0.0 } else { c })
                .collect(),
        )
    }

    /// Divides by the largest coefficient magnitude.
    fn normalized(&self) -> Self {
        let m = self.max_abs();
        if m == 0.0 {
            self.clone()
        } else {
            self.scale(1.0 / m)
        }
    }

    pub fn monic(&self) -> Self {
        let lead = self.leading();
        if lead == 0.0 {
            self.clone()
        } else {
            self.scale(1.0 / lead)
        }
    }

    /// Polynomial long division. Panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let Some(nd) = self.degree() else {
            return (Self::zero(), Self::zero());
        };
        if nd < dd {
            return (Self::zero(), self.clone());
        }
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0.0; nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= q * dc;
            }
            rem[k + dd] = 0.0;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Numerical greatest common divisor (monic). Returns `1` when no
    /// nontrivial common factor can be confirmed.
    pub fn gcd(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        let (mut r0, mut r1) = if self.degree() >= other.degree() {
            (self.normalized(), other.normalized())
        } else {
            (other.normalized(), self.normalized())
        };
        loop {
            if r1.degree() == Some(0) {
                return Self::one();
            }
            let (_, r) = r0.div_rem(&r1);
            if r.max_abs() <= GCD_TOL * r0.max_abs().max(r1.max_abs()) {
                break;
            }
            r0 = r1;
            r1 = r.normalized();
        }
        let g = r1.monic();
        if g.degree().unwrap_or(0) == 0 {
            return Self::one();
        }
        let divides = |p: &Self| {
            let (_, rem) = p.div_rem(&g);
            rem.max_abs() <= GCD_VERIFY_TOL * p.max_abs()
        };
        if divides(self) && divides(other) {
            g
        } else {
            Self::one()
        }
    }

    /// Complex roots via eigenvalues of the (balanced) companion matrix.
    pub fn roots(&self) -> Vec<Complex64> {
        let Some(deg) = self.degree() else {
            return Vec::new();
        };
        // peel exact zero roots
        let zeros = self.coeffs.iter().take_while(|&&c| c == 0.0).count();
        let mut out = vec![Complex64::new(0.0, 0.0); zeros];
        let deg = deg - zeros;
        if deg == 0 {
            return out;
        }
        let c = &self.coeffs[zeros..];
        let lead = c[deg];
        let mut comp = DMatrix::<f64>::zeros(deg, deg);
        for i in 1..deg {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..deg {
            comp[(i, deg - 1)] = -c[i] / lead;
        }
        balance(&mut comp);
        out.extend(comp.complex_eigenvalues().iter().copied());
        out
    }
}

/// Parlett-Reinsch diagonal similarity balancing (powers of two).
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut col = 0.0;
            let mut row = 0.0;
            for j in 0..n {
                if j != i {
                    col += m[(j, i)].abs();
                    row += m[(i, j)].abs();
                }
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let mut f = 1.0;
            let s = col + row;
            let mut g = row / radix;
            while col < g {
                f *= radix;
                col *= radix * radix;
            }
            g = row * radix;
            while col > g {
                f /= radix;
                col /= radix * radix;
            }
            if (col + row) / f < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Polynomial {
        Polynomial::new(c.to_vec())
    }

    #[test]
    fn trims_and_degrees() {
        assert_eq!(p(&[1.0, 2.0, 0.0]).degree(), Some(1));
        assert!(p(&[0.0, 0.0]).is_zero());
        assert_eq!(Polynomial::zero().degree(), None);
    }

    #[test]
    fn long_division() {
        // (s^2 + 3s + 2) / (s + 1) = s + 2
        let (q, r) = p(&[2.0, 3.0, 1.0]).div_rem(&p(&[1.0, 1.0]));
        assert_eq!(q, p(&[2.0, 1.0]));
        assert!(r.is_zero());
        let (q, r) = p(&[1.0, 0.0, 1.0]).div_rem(&p(&[0.0, 1.0]));
        assert_eq!(q, p(&[0.0, 1.0]));
        assert_eq!(r, p(&[1.0]));
    }

    #[test]
    fn gcd_finds_common_factor() {
        let a = p(&[1.0, 1.0]).mul(&p(&[2.0, 1.0]));
        let b = p(&[1.0, 1.0]).mul(&p(&[3.0, 0.0, 1.0]));
        let g = a.gcd(&b);
        assert_eq!(g.degree(), Some(1));
        assert!((g.coeffs()[0] - 1.0).abs() < 1e-12);
        assert_eq!(p(&[1.0, 1.0]).gcd(&p(&[2.0, 1.0])), Polynomial::one());
    }

    #[test]
    fn gcd_of_imaginary_axis_factors() {
        let w = p(&[1.0, 0.0, 1.0]);
        let a = w.mul(&p(&[0.5, 2.0]));
        let b = w.mul(&w).mul(&p(&[0.0, 3.0]));
        let g = a.gcd(&b);
        assert_eq!(g.degree(), Some(2));
        assert!(g.sub(&w).max_abs() < 1e-10);
    }

    #[test]
    fn gcd_rejects_nearby_roots() {
        // a near pair of small roots must not be cancelled as common
        let a = p(&[0.0066, 1.0])
            .mul(&p(&[810.0, 1.0]))
            .mul(&p(&[0.0, 1.0]));
        let b = p(&[0.0066 + 4e-5, 1.0])
            .mul(&p(&[3.0, 2.0, 1.0]))
            .mul(&p(&[810.0, 1.0]));
        let g = a.gcd(&b);
        assert!(g.roots().iter().all(|r| (r.re + 0.0066).abs() > 1e-3));
    }

    #[test]
    fn roots_of_quadratic() {
        let mut r = p(&[2.0, 3.0, 1.0]).roots();
        r.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((r[0] - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
        assert!((r[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        let r = p(&[0.0, 0.0, 1.0, 0.0, 1.0]).roots();
        assert_eq!(r.len(), 4);
        assert!(r.iter().filter(|z| z.norm() < 1e-15).count() == 2);
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(p(&[1.0, -2.0, 3.0]).to_string(), "3*s^2 - 2*s + 1");
    }
}
