//! Dense complex linear-algebra kernel.
//!
//! Every classification here uses the relative tolerance policy: a
//! quantity `x` counts as zero when `|x| <= tol * max(1, ||M||_2)`, and a
//! matrix counts as singular when `sigma_min <= tol * sigma_max`.

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::DEFAULT_TOL;

/// Condition number of the eigenvector matrix above which the sign matrix
/// is computed by Newton iteration instead.
pub const SIGN_EIGVEC_COND_LIMIT: f64 = 1e12;
const NEWTON_SIGN_TOL: f64 = 1e-12;
const NEWTON_SIGN_MAX_STEPS: usize = 100;

/// `A = P + iH` with both parts Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianSplit {
    pub p: ComplexMatrix,
    pub h: ComplexMatrix,
}

impl HermitianSplit {
    pub fn reassemble(&self) -> ComplexMatrix {
        &self.p + &self.h.scale_complex(Complex64::i())
    }
}

pub fn hermitian_split(a: &ComplexMatrix) -> Result<HermitianSplit> {
    a.ensure_square("hermitian_split input")?;
    let adj = a.adjoint();
    let p = (a + &adj).scale(0.5);
    // (A - A*) / (2i) = -i (A - A*) / 2
    let h = (a - &adj).scale_complex(Complex64::new(0.0, -0.5));
    Ok(HermitianSplit { p, h })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefinitenessClass {
    PositiveDefinite,
    PositiveSemidefiniteSingular,
    Indefinite,
    NegativeSemidefiniteSingular,
    NegativeDefinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefinitenessVerdict {
    pub class: DefinitenessClass,
    pub min_eig: f64,
    pub max_eig: f64,
}

impl DefinitenessVerdict {
    pub fn is_positive_definite(&self) -> bool {
        self.class == DefinitenessClass::PositiveDefinite
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        matches!(
            self.class,
            DefinitenessClass::PositiveDefinite | DefinitenessClass::PositiveSemidefiniteSingular
        )
    }

    pub fn is_negative_definite(&self) -> bool {
        self.class == DefinitenessClass::NegativeDefinite
    }

    fn classify(min_eig: f64, max_eig: f64, tol: f64) -> Self {
        let scale = min_eig.abs().max(max_eig.abs()).max(1.0);
        let zero = tol * scale;
        use DefinitenessClass::*;
        let class = if min_eig > zero {
            PositiveDefinite
        } else if min_eig >= -zero {
            PositiveSemidefiniteSingular
        } else if max_eig > zero {
            Indefinite
        } else if max_eig >= -zero {
            NegativeSemidefiniteSingular
        } else {
            NegativeDefinite
        };
        Self {
            class,
            min_eig,
            max_eig,
        }
    }
}

/// Deviation of `m` from Hermitian symmetry, relative to `max(1, ||m||_F)`.
pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    let d = (m - &m.adjoint()).frobenius_norm();
    d / m.frobenius_norm().max(1.0)
}

fn ensure_hermitian(m: &ComplexMatrix, tol: f64) -> Result<()> {
    m.ensure_square("Hermitian input")?;
    let defect = hermitian_defect(m);
    if defect > tol.max(1e-12) * 10.0 {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = (m.inner() + m.inner().adjoint()) * Complex64::new(0.5, 0.0);
    let mut vals: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

/// Eigen-decomposition `M = V diag(w) V*` of a Hermitian matrix, ascending `w`.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), ComplexMatrix::zeros(0, 0));
    }
    let sym = (m.inner() + m.inner().adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, ComplexMatrix::wrap(vecs))
}

/// Applies a real scalar function to a Hermitian matrix through its spectrum.
pub fn hermitian_function(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let (vals, v) = hermitian_eigen(m);
    let d: Vec<f64> = vals.into_iter().map(f).collect();
    &(&v * &ComplexMatrix::from_real_diagonal(&d)) * &v.adjoint()
}

pub fn definiteness(m: &ComplexMatrix) -> Result<DefinitenessVerdict> {
    definiteness_with_tol(m, DEFAULT_TOL)
}

pub fn definiteness_with_tol(m: &ComplexMatrix, tol: f64) -> Result<DefinitenessVerdict> {
    ensure_hermitian(m, tol)?;
    let eigs = hermitian_eigenvalues(m);
    match (eigs.first(), eigs.last()) {
        (Some(&lo), Some(&hi)) => Ok(DefinitenessVerdict::classify(lo, hi, tol)),
        // 0x0: vacuously positive definite
        _ => Ok(DefinitenessVerdict {
            class: DefinitenessClass::PositiveDefinite,
            min_eig: 0.0,
            max_eig: 0.0,
        }),
    }
}

pub(crate) fn schur(a: &ComplexMatrix) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    Schur::try_new(a.inner().clone(), f64::EPSILON, 100_000)
        .map(|s| s.unpack())
        .ok_or_else(|| Error::Precondition("Schur decomposition did not converge".into()))
}

/// Eigenvalues of a general square matrix (Schur diagonal).
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    a.ensure_square("eigenvalue input")?;
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let (_, t) = schur(a)?;
    Ok(t.diagonal().iter().copied().collect())
}

/// Eigenvalues and unit eigenvectors (columns) of a general square matrix.
pub fn eigen(a: &ComplexMatrix) -> Result<(Vec<Complex64>, ComplexMatrix)> {
    let n = a.ensure_square("eigen input")?;
    if n == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    let (q, t) = schur(a)?;
    let tnorm = t
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < small {
                denom = Complex64::new(small, 0.0);
            }
            y[(i, k)] = -acc / denom;
        }
    }
    let mut v = q * y;
    for mut col in v.column_iter_mut() {
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            col.iter_mut().for_each(|z| *z /= norm);
        }
    }
    let vals = t.diagonal().iter().copied().collect();
    Ok((vals, ComplexMatrix::wrap(v)))
}

pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a
        .inner()
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Smallest singular value; zero for matrices with fewer singular values
/// than their larger dimension would need (rank-deficient by shape is not
/// implied, only `min(rows, cols)` values exist).
pub fn smallest_singular_value(a: &ComplexMatrix) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

/// `sigma_max / sigma_min`, infinite for singular input.
pub fn condition_number(a: &ComplexMatrix) -> f64 {
    let sv = singular_values(a);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

pub fn is_singular(a: &ComplexMatrix, tol: f64) -> bool {
    let sv = singular_values(a);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) => hi == 0.0 || lo <= tol * hi,
        _ => false,
    }
}

/// How the sign matrix was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignMethod {
    Eigendecomposition,
    NewtonIteration,
}

pub fn sign_matrix(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    sign_matrix_with_tol(a, DEFAULT_TOL).map(|(e, _)| e)
}

/// The involution `E_A` commuting with `A` such that `A E_A` has spectrum in
/// the open right half-plane.
pub fn sign_matrix_with_tol(a: &ComplexMatrix, tol: f64) -> Result<(ComplexMatrix, SignMethod)> {
    let n = a.ensure_square("sign_matrix input")?;
    if n == 0 {
        return Ok((a.clone(), SignMethod::Eigendecomposition));
    }
    let (vals, v) = eigen(a)?;
    let axis_zero = tol * a.norm2().max(1.0);
    if let Some(&bad) = vals.iter().find(|l| l.re.abs() <= axis_zero) {
        return Err(Error::AxisEigenvalue(bad));
    }
    if condition_number(&v) <= SIGN_EIGVEC_COND_LIMIT {
        let signs: Vec<f64> = vals.iter().map(|l| l.re.signum()).collect();
        let vinv = v.try_inverse()?;
        let e = &(&v * &ComplexMatrix::from_real_diagonal(&signs)) * &vinv;
        return Ok((e, SignMethod::Eigendecomposition));
    }
    newton_sign(a).map(|e| (e, SignMethod::NewtonIteration))
}

/// `X <- (X + X^{-1}) / 2` from `X = A`.
pub fn newton_sign(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let mut x = a.clone();
    for _ in 0..NEWTON_SIGN_MAX_STEPS {
        let next = (&x + &x.try_inverse()?).scale(0.5);
        let step = (&next - &x).frobenius_norm();
        let done = step <= NEWTON_SIGN_TOL * next.frobenius_norm().max(1.0);
        x = next;
        if done {
            return Ok(x);
        }
    }
    Err(Error::Precondition(format!(
        "Newton sign iteration did not converge in {NEWTON_SIGN_MAX_STEPS} steps"
    )))
}

/// `exp(A t)` by Pade scaling-and-squaring.
pub fn matrix_exponential(a: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    a.ensure_square("matrix_exponential input")?;
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "time must be finite, got {t}"
        )));
    }
    if a.nrows() == 0 {
        return Ok(a.clone());
    }
    ComplexMatrix::new((a.inner() * Complex64::new(t, 0.0)).exp())
}

/// Standard complex Gaussian matrix (real and imaginary parts N(0, 1/2)).
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let data: Vec<Complex64> = (0..rows * cols)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * s, im * s)
        })
        .collect();
    ComplexMatrix::wrap(DMatrix::from_row_slice(rows, cols, &data))
}

/// Real Gaussian matrix with N(0, 1) entries.
pub fn real_gaussian_matrix<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> ComplexMatrix {
    let data: Vec<Complex64> = (0..rows * cols)
        .map(|_| Complex64::new(rng.sample(StandardNormal), 0.0))
        .collect();
    ComplexMatrix::wrap(DMatrix::from_row_slice(rows, cols, &data))
}

/// Orthonormal columns from a seeded Gaussian draw.
pub fn isometry_from_rng<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let g = gaussian_matrix(rows, cols, rng);
    ComplexMatrix::wrap(g.into_inner().qr().q())
}

/// `kn x n` matrix with orthonormal columns, deterministic in `seed`.
pub fn random_isometry(k: usize, n: usize, seed: u64) -> Result<ComplexMatrix> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidArgument(
            "random_isometry needs k >= 1 and n >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(isometry_from_rng(k * n, n, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::c;
    use std::f64::consts::PI;

    fn real(rows: usize, cols: usize, d: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows, cols, d).unwrap()
    }

    #[test]
    fn split_identity_and_skew() {
        let s = hermitian_split(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(s.p, ComplexMatrix::identity(2));
        assert_eq!(s.h, ComplexMatrix::zeros(2, 2));

        let s = hermitian_split(&ComplexMatrix::scalar(c(0.0, 1.0))).unwrap();
        assert!(s.p[(0, 0)].norm() < 1e-15);
        assert!((s.h[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn split_upper_triangular() {
        let a = real(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        let s = hermitian_split(&a).unwrap();
        assert!(s.p.max_abs_diff(&real(2, 2, &[1.0, 1.0, 1.0, 1.0])) < 1e-15);
        let h =
            ComplexMatrix::from_rows(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
                .unwrap();
        assert!(s.h.max_abs_diff(&h) < 1e-15);
        assert!(s.reassemble().max_abs_diff(&a) < 1e-15);
    }

    #[test]
    fn split_rejects_rectangular() {
        assert!(hermitian_split(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn definiteness_examples() {
        let v = definiteness(&ComplexMatrix::from_real_diagonal(&[1.0, 2.0])).unwrap();
        assert_eq!(v.class, DefinitenessClass::PositiveDefinite);
        assert!((v.min_eig - 1.0).abs() < 1e-14);

        let v = definiteness(&ComplexMatrix::from_real_diagonal(&[0.0, 3.0])).unwrap();
        assert_eq!(v.class, DefinitenessClass::PositiveSemidefiniteSingular);

        let v = definiteness(&real(2, 2, &[2.0, 2.0, 2.0, 2.0])).unwrap();
        assert_eq!(v.class, DefinitenessClass::PositiveSemidefiniteSingular);
        assert!(v.min_eig.abs() < 1e-12 && (v.max_eig - 4.0).abs() < 1e-12);

        let v = definiteness(&ComplexMatrix::from_real_diagonal(&[-1.0, 2.0])).unwrap();
        assert_eq!(v.class, DefinitenessClass::Indefinite);
        let v = definiteness(&ComplexMatrix::from_real_diagonal(&[-1.0, 0.0])).unwrap();
        assert_eq!(v.class, DefinitenessClass::NegativeSemidefiniteSingular);
        let v = definiteness(&ComplexMatrix::from_real_diagonal(&[-1.0, -2.0])).unwrap();
        assert_eq!(v.class, DefinitenessClass::NegativeDefinite);
    }

    #[test]
    fn definiteness_rejects_non_hermitian() {
        let a = real(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(definiteness(&a), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn sign_of_diagonal() {
        let e = sign_matrix(&ComplexMatrix::from_real_diagonal(&[-2.0, 3.0])).unwrap();
        assert!(e.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[-1.0, 1.0])) < 1e-14);
    }

    #[test]
    fn sign_of_off_diagonal_pair() {
        // eigenvalues +-2 with eigenvectors (2, 1) and (-2, 1)
        let a = real(2, 2, &[0.0, 4.0, 1.0, 0.0]);
        let e = sign_matrix(&a).unwrap();
        assert!(e.max_abs_diff(&real(2, 2, &[0.0, 2.0, 0.5, 0.0])) < 1e-12);
        assert!((&e * &e).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn sign_of_right_half_plane_matrix_is_identity() {
        let a = real(2, 2, &[2.0, 5.0, 0.0, 1.0]);
        let e = sign_matrix(&a).unwrap();
        assert!(e.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn sign_rejects_axis_eigenvalue() {
        let a = real(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(matches!(sign_matrix(&a), Err(Error::AxisEigenvalue(_))));
    }

    #[test]
    fn sign_of_defective_matrix_uses_newton() {
        // Jordan block: eigenvector matrix is singular
        let a = real(2, 2, &[-1.0, 1.0, 0.0, -1.0]);
        let (e, method) = sign_matrix_with_tol(&a, DEFAULT_TOL).unwrap();
        assert_eq!(method, SignMethod::NewtonIteration);
        assert!(e.max_abs_diff(&(-ComplexMatrix::identity(2))) < 1e-10);
    }

    #[test]
    fn block_triangular_sign_has_expected_inertia() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for nu in 0..=4 {
            let n = 4;
            let mut t = gaussian_matrix(n, n, &mut rng).into_inner();
            for i in 0..n {
                for j in 0..i {
                    t[(i, j)] = c(0.0, 0.0);
                }
                t[(i, i)] = if i < nu {
                    c(-1.0 - i as f64, 0.3)
                } else {
                    c(1.0 + i as f64, -0.2)
                };
            }
            let u = isometry_from_rng(n, n, &mut rng);
            let a = &(&u * &ComplexMatrix::wrap(t)) * &u.adjoint();
            let e = sign_matrix(&a).unwrap();
            let mut eigs = eigenvalues(&e).unwrap();
            eigs.sort_by(|x, y| x.re.total_cmp(&y.re));
            for (i, l) in eigs.iter().enumerate() {
                let want = if i < nu { -1.0 } else { 1.0 };
                assert!((l - c(want, 0.0)).norm() < 1e-8, "nu={nu} eig {l}");
            }
        }
    }

    #[test]
    fn exponential_examples() {
        let e = matrix_exponential(&ComplexMatrix::zeros(3, 3), 7.5).unwrap();
        assert!(e.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);

        let e = matrix_exponential(&real(1, 1, &[-1.0]), 1.0).unwrap();
        assert!((e[(0, 0)].re - (-1.0f64).exp()).abs() < 1e-15);

        let rot = real(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let e = matrix_exponential(&rot, PI).unwrap();
        assert!(e.max_abs_diff(&(-ComplexMatrix::identity(2))) < 1e-12);
    }

    #[test]
    fn exponential_matches_eigen_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = gaussian_matrix(4, 4, &mut rng);
            let (vals, v) = eigen(&a).unwrap();
            let d: Vec<Complex64> = vals.iter().map(|l| (l * 0.7).exp()).collect();
            let oracle = &(&v * &ComplexMatrix::from_diagonal(&d)) * &v.try_inverse().unwrap();
            let e = matrix_exponential(&a, 0.7).unwrap();
            assert!(e.max_abs_diff(&oracle) <= 1e-10 * oracle.norm2().max(1.0));
        }
    }

    #[test]
    fn isometry_examples() {
        let u = random_isometry(1, 2, 3).unwrap();
        assert_eq!(u.shape(), (2, 2));
        assert!((&u.adjoint() * &u).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
        let y = random_isometry(3, 2, 3).unwrap();
        assert_eq!(y.shape(), (6, 2));
        assert!((&y.adjoint() * &y - ComplexMatrix::identity(2)).norm2() <= 1e-10);
        assert_eq!(
            random_isometry(3, 2, 99).unwrap(),
            random_isometry(3, 2, 99).unwrap()
        );
        assert!(random_isometry(0, 2, 1).is_err());
    }

    #[test]
    fn smallest_singular_value_examples() {
        assert!((smallest_singular_value(&ComplexMatrix::identity(3)) - 1.0).abs() < 1e-14);
        assert!(
            smallest_singular_value(&ComplexMatrix::from_real_diagonal(&[0.0, 5.0])).abs() < 1e-14
        );
        assert!(smallest_singular_value(&real(2, 2, &[1.0, 1.0, 1.0, 1.0])) < 1e-14);
    }

    #[test]
    fn eigenvectors_satisfy_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = gaussian_matrix(6, 6, &mut rng);
        let (vals, v) = eigen(&a).unwrap();
        for (k, l) in vals.iter().enumerate() {
            let col = v.column(k).into_owned();
            let resid = a.inner() * &col - col.map(|z| z * l);
            assert!(resid.norm() < 1e-10);
        }
    }
}
