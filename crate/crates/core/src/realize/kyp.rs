//! KYP certificates: `Q(H) = diag(-H, I) R + R* diag(-H, I)` must be
//! positive semidefinite for some `H > 0`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::RealizationArray;
use crate::error::{Error, Result};
use crate::matcore::{
    definiteness_with_tol, hermitian_defect, hermitian_eigen, DefinitenessVerdict,
};
use crate::matrix::ComplexMatrix;
use crate::DEFAULT_TOL;

#[derive(Debug, Clone, Serialize)]
pub struct KypCertificate {
    #[serde(rename = "H")]
    pub h: ComplexMatrix,
    #[serde(rename = "Q")]
    pub q: ComplexMatrix,
    pub verdict: DefinitenessVerdict,
    pub valid: bool,
}

pub(crate) fn ensure_state_weight(r: &RealizationArray, h: &ComplexMatrix, tol: f64) -> Result<()> {
    if h.shape() != (r.n(), r.n()) {
        return Err(Error::Shape(format!(
            "H is {:?}, state dimension is {}",
            h.shape(),
            r.n()
        )));
    }
    let defect = hermitian_defect(h);
    if defect > 10.0 * tol.max(1e-12) {
        return Err(Error::NotHermitian(defect));
    }
    let v = definiteness_with_tol(h, tol)?;
    if !v.is_positive_definite() {
        return Err(Error::NotPositiveDefinite(format!(
            "H has min eigenvalue {:e}",
            v.min_eig
        )));
    }
    Ok(())
}

/// `[[-HA - A*H, C* - HB], [C - B*H, D + D*]]`
pub fn kyp_residual(r: &RealizationArray, h: &ComplexMatrix) -> ComplexMatrix {
    let ha = h * r.a();
    let hb = h * r.b();
    let q11 = -(&ha + &ha.adjoint());
    let q12 = &r.c().adjoint() - &hb;
    let q21 = q12.adjoint();
    let q22 = r.d() + &r.d().adjoint();
    ComplexMatrix::block2x2(&q11, &q12, &q21, &q22).expect("blocks are consistent")
}

pub fn kyp_verify(r: &RealizationArray, h: &ComplexMatrix) -> Result<KypCertificate> {
    kyp_verify_with_tol(r, h, DEFAULT_TOL)
}

pub fn kyp_verify_with_tol(
    r: &RealizationArray,
    h: &ComplexMatrix,
    tol: f64,
) -> Result<KypCertificate> {
    ensure_state_weight(r, h, tol)?;
    let q = kyp_residual(r, h);
    let verdict = definiteness_with_tol(&q, tol)?;
    Ok(KypCertificate {
        h: h.clone(),
        q,
        verdict,
        valid: verdict.is_positive_semidefinite(),
    })
}

/// Search controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KypSearch {
    pub max_iter: usize,
    /// Classification tolerance, floor on `H`, and stall threshold.
    pub tol: f64,
    /// Window over which the residual must keep shrinking.
    pub stall_window: usize,
}

impl Default for KypSearch {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tol: DEFAULT_TOL,
            stall_window: 25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InfeasibilityReason {
    Stalled,
    IterationLimit,
}

#[derive(Debug, Clone, Serialize)]
pub struct InfeasibilityReport {
    pub reason: InfeasibilityReason,
    pub iterations: usize,
    /// Frobenius distance from `Q(H)` to the PSD cone at the best iterate.
    pub residual: f64,
    #[serde(rename = "H")]
    pub h: ComplexMatrix,
    pub min_eig: f64,
    /// Dimensions of the controllable and observable subspaces; when both
    /// equal `n` the realization is minimal and infeasibility refutes PR.
    pub controllable_dim: usize,
    pub observable_dim: usize,
    pub minimal: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum KypSearchOutcome {
    Found {
        certificate: KypCertificate,
        iterations: usize,
    },
    Infeasible(InfeasibilityReport),
}

impl KypSearchOutcome {
    pub fn is_found(&self) -> bool {
        matches!(self, Self::Found { .. })
    }
}

/// Real basis of the `n x n` Hermitian matrices.
fn hermitian_basis(n: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in i..n {
            let mut e = DMatrix::<Complex64>::zeros(n, n);
            if i == j {
                e[(i, i)] = Complex64::new(1.0, 0.0);
            } else {
                e[(i, j)] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                e[(j, i)] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            }
            out.push(ComplexMatrix::wrap(e));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut e = DMatrix::<Complex64>::zeros(n, n);
            e[(i, j)] = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
            e[(j, i)] = Complex64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2);
            out.push(ComplexMatrix::wrap(e));
        }
    }
    out
}

fn real_vec(m: &ComplexMatrix) -> Vec<f64> {
    m.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Distance to the PSD cone and the projection itself.
fn psd_projection(q: &ComplexMatrix) -> (ComplexMatrix, f64) {
    let (vals, v) = hermitian_eigen(q);
    let clipped: Vec<f64> = vals.iter().map(|&x| x.max(0.0)).collect();
    let dist = vals
        .iter()
        .filter(|&&x| x < 0.0)
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    (
        &(&v * &ComplexMatrix::from_real_diagonal(&clipped)) * &v.adjoint(),
        dist,
    )
}

fn floor_eigenvalues(h: &ComplexMatrix, delta: f64) -> ComplexMatrix {
    crate::matcore::hermitian_function(h, |x| x.max(delta))
}

/// Orthonormal basis of the range of `m` (columns), rank cut at `tol * sigma_max`.
fn range_basis(m: &DMatrix<Complex64>, tol: f64, scale: f64) -> DMatrix<Complex64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > tol * scale)
        .collect();
    DMatrix::from_fn(m.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Orthonormal basis of the smallest `A`-invariant subspace containing `range(B)`.
pub(crate) fn reachable_basis(a: &ComplexMatrix, b: &ComplexMatrix) -> DMatrix<Complex64> {
    let n = a.nrows();
    let scale = a.norm2().max(b.norm2()).max(1.0);
    let tol = 1e-9;
    let mut basis = range_basis(b.inner(), tol, scale);
    let mut frontier = basis.clone();
    while basis.ncols() < n && frontier.ncols() > 0 {
        let mut next = a.inner() * &frontier;
        next -= &basis * (basis.adjoint() * &next);
        frontier = range_basis(&next, tol, scale);
        if frontier.ncols() == 0 {
            break;
        }
        let mut joined = DMatrix::zeros(n, basis.ncols() + frontier.ncols());
        joined
            .view_mut((0, 0), (n, basis.ncols()))
            .copy_from(&basis);
        joined
            .view_mut((0, basis.ncols()), (n, frontier.ncols()))
            .copy_from(&frontier);
        basis = range_basis(&joined, tol, 1.0);
    }
    basis
}

fn reachable_dim(a: &ComplexMatrix, b: &ComplexMatrix) -> usize {
    reachable_basis(a, b).ncols().min(a.nrows())
}

pub fn controllable_dim(r: &RealizationArray) -> usize {
    reachable_dim(r.a(), r.b())
}

pub fn observable_dim(r: &RealizationArray) -> usize {
    reachable_dim(&r.a().adjoint(), &r.c().adjoint())
}

/// Alternating projections between the PSD cone and the affine family `Q(H)`,
/// starting from `H = I`.
pub fn kyp_search(r: &RealizationArray, opts: &KypSearch) -> KypSearchOutcome {
    let n = r.n();
    let tol = opts.tol;
    let mut h = ComplexMatrix::identity(n);

    // Q(H) = Q(0) + L(H) with L linear; columns of `lin` are L on the basis
    let basis = hermitian_basis(n);
    let q0 = kyp_residual(r, &ComplexMatrix::zeros(n, n));
    let cols: Vec<Vec<f64>> = basis
        .iter()
        .map(|e| real_vec(&(&kyp_residual(r, e) - &q0)))
        .collect();
    let rows = cols.first().map_or(0, Vec::len);
    let lin = DMatrix::from_fn(rows, basis.len(), |i, j| cols[j][i]);
    let lin_svd = (n > 0).then(|| lin.svd(true, true));

    let mut history: Vec<f64> = Vec::new();
    let mut best = (f64::INFINITY, h.clone(), 0.0);
    for iter in 0..opts.max_iter.max(1) {
        let q = kyp_residual(r, &h);
        if let Ok(cert) = kyp_verify_with_tol(r, &h, tol) {
            if cert.valid {
                return KypSearchOutcome::Found {
                    certificate: cert,
                    iterations: iter,
                };
            }
        }
        let (proj, dist) = psd_projection(&q);
        let scale = q.frobenius_norm().max(1.0);
        if dist < best.0 {
            let min_eig = crate::matcore::hermitian_eigenvalues(&q)
                .first()
                .copied()
                .unwrap_or(0.0);
            best = (dist, h.clone(), min_eig);
        }
        history.push(dist / scale);
        let w = opts.stall_window;
        if history.len() > w {
            let then = history[history.len() - 1 - w];
            let now = history[history.len() - 1];
            if then - now <= tol * then.max(tol) {
                return infeasible(r, InfeasibilityReason::Stalled, iter + 1, best);
            }
        }
        let target = DVector::from_vec(real_vec(&(&proj - &q0)));
        let Some(svd) = &lin_svd else { break };
        let coeffs = svd.solve(&target, 1e-14).expect("U and V were computed");
        let mut next = ComplexMatrix::zeros(n, n);
        for (e, c) in basis.iter().zip(coeffs.iter()) {
            next = &next + &e.scale(*c);
        }
        h = floor_eigenvalues(&next, tol);
    }
    let reason = if n == 0 {
        InfeasibilityReason::Stalled
    } else {
        InfeasibilityReason::IterationLimit
    };
    infeasible(r, reason, opts.max_iter, best)
}

fn infeasible(
    r: &RealizationArray,
    reason: InfeasibilityReason,
    iterations: usize,
    best: (f64, ComplexMatrix, f64),
) -> KypSearchOutcome {
    let (controllable_dim, observable_dim) = (controllable_dim(r), observable_dim(r));
    KypSearchOutcome::Infeasible(InfeasibilityReport {
        reason,
        iterations,
        residual: best.0,
        h: best.1,
        min_eig: best.2,
        controllable_dim,
        observable_dim,
        minimal: controllable_dim == r.n() && observable_dim == r.n(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::{r_f, r_h};
    use super::*;

    fn one() -> ComplexMatrix {
        ComplexMatrix::identity(1)
    }

    #[test]
    fn first_order_certificate() {
        let cert = kyp_verify(&r_h(1.0, 4.0, 2.0).unwrap(), &one()).unwrap();
        let want = ComplexMatrix::from_real_diagonal(&[2.0, 4.0]);
        assert!(cert.q.max_abs_diff(&want) < 1e-15);
        assert!(cert.valid);
        assert!(
            !kyp_verify(&r_h(-1.0, 4.0, 2.0).unwrap(), &one())
                .unwrap()
                .valid
        );
        assert!(
            !kyp_verify(&r_h(1.0, 4.0, -2.0).unwrap(), &one())
                .unwrap()
                .valid
        );
    }

    #[test]
    fn static_and_lossless() {
        let r = RealizationArray::new(
            -ComplexMatrix::identity(2),
            ComplexMatrix::zeros(2, 2),
            ComplexMatrix::zeros(2, 2),
            ComplexMatrix::identity(2),
        )
        .unwrap();
        let cert = kyp_verify(&r, &ComplexMatrix::identity(2)).unwrap();
        assert!(cert.q.max_abs_diff(&ComplexMatrix::identity(4).scale(2.0)) < 1e-15);
        assert!(cert.verdict.is_positive_definite());

        let cert = kyp_verify(&r_f(), &one()).unwrap();
        assert!(cert.q.norm2() < 1e-15);
        assert!(cert.valid);
    }

    #[test]
    fn rejects_bad_weights() {
        let r = r_h(1.0, 4.0, 2.0).unwrap();
        assert!(matches!(
            kyp_verify(&r, &-one()),
            Err(Error::NotPositiveDefinite(_))
        ));
        assert!(matches!(
            kyp_verify(&r, &ComplexMatrix::identity(2)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn search_finds_unit_weight() {
        match kyp_search(&r_h(1.0, 4.0, 2.0).unwrap(), &KypSearch::default()) {
            KypSearchOutcome::Found {
                certificate,
                iterations,
            } => {
                assert_eq!(iterations, 0);
                assert!((certificate.h[(0, 0)].re - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn search_needs_nontrivial_weight() {
        // b/(s+a)+d with H = 1 fails when the cross term is large; scaled
        // coordinates of the same function need H far from 1
        let base = r_h(0.5, 1.0, 0.3).unwrap();
        let stretched = super::super::coordinate_change(
            &base,
            &ComplexMatrix::from_real_rows(1, 1, &[9.0]).unwrap(),
        )
        .unwrap();
        assert!(!kyp_verify(&stretched, &one()).unwrap().valid);
        let out = kyp_search(&stretched, &KypSearch::default());
        assert!(out.is_found(), "{out:?}");
    }

    #[test]
    fn search_refutes_all_pass() {
        // (1 - s)/(1 + s) = -1 + 2/(s + 1)
        let r = RealizationArray::from_real(1, 1, &[-1.0], &[1.0], &[2.0], &[-1.0]).unwrap();
        match kyp_search(&r, &KypSearch::default()) {
            KypSearchOutcome::Infeasible(rep) => {
                assert!(rep.minimal);
                assert!(rep.residual > 1e-3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn search_on_static_gain() {
        let ok =
            RealizationArray::static_gain(ComplexMatrix::from_real_rows(1, 1, &[0.5]).unwrap())
                .unwrap();
        match kyp_search(&ok, &KypSearch::default()) {
            KypSearchOutcome::Found { certificate, .. } => {
                assert_eq!(certificate.h.shape(), (0, 0))
            }
            other => panic!("{other:?}"),
        }
        let bad =
            RealizationArray::static_gain(ComplexMatrix::from_real_rows(1, 1, &[-0.5]).unwrap())
                .unwrap();
        assert!(!kyp_search(&bad, &KypSearch::default()).is_found());
    }

    #[test]
    fn minimality_dimensions() {
        let r = RealizationArray::from_real(
            2,
            1,
            &[-1.0, 0.0, 0.0, -2.0],
            &[1.0, 0.0],
            &[1.0, 1.0],
            &[0.0],
        )
        .unwrap();
        assert_eq!(controllable_dim(&r), 1);
        assert_eq!(observable_dim(&r), 2);
    }
}
