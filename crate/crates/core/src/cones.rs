//! Lyapunov cones `L_H = {A : HA + A*H > 0}`, maximality witnesses and
//! matrix-convex combinations (plain and n,m-structured).

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    self, definiteness_with_tol, gaussian_matrix, hermitian_split, DefinitenessVerdict,
    HermitianSplit,
};
use crate::matrix::ComplexMatrix;
use crate::DEFAULT_TOL;

/// Membership of `A` in `L_H` (open) and its closure, with the Lyapunov
/// certificate `HA + A*H` attached.
#[derive(Debug, Clone)]
pub struct ConeMembership {
    pub in_open: bool,
    pub in_closed: bool,
    pub certificate: ComplexMatrix,
    pub verdict: DefinitenessVerdict,
    /// `P + iH` form, filled for `L_I` queries.
    pub split: Option<HermitianSplit>,
}

impl Serialize for ConeMembership {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            in_open: bool,
            in_closed: bool,
            min_eig: f64,
            certificate: &'a ComplexMatrix,
        }
        Wire {
            in_open: self.in_open,
            in_closed: self.in_closed,
            min_eig: self.verdict.min_eig,
            certificate: &self.certificate,
        }
        .serialize(serializer)
    }
}

pub fn membership_l_h(a: &ComplexMatrix, h: &ComplexMatrix) -> Result<ConeMembership> {
    membership_l_h_with_tol(a, h, DEFAULT_TOL)
}

pub fn membership_l_h_with_tol(
    a: &ComplexMatrix,
    h: &ComplexMatrix,
    tol: f64,
) -> Result<ConeMembership> {
    let n = a.ensure_square("A")?;
    if h.shape() != (n, n) {
        return Err(Error::Shape(format!("H is {:?}, A is {n}x{n}", h.shape())));
    }
    if matcore::hermitian_defect(h) > 10.0 * tol.max(1e-12) {
        return Err(Error::NotHermitian(matcore::hermitian_defect(h)));
    }
    if matcore::is_singular(h, tol) {
        return Err(Error::Singular("H must be non-singular".into()));
    }
    let ha = h * a;
    let certificate = &ha + &ha.adjoint();
    let verdict = definiteness_with_tol(&certificate, tol)?;
    Ok(ConeMembership {
        in_open: verdict.is_positive_definite(),
        in_closed: verdict.is_positive_semidefinite(),
        certificate,
        verdict,
        split: None,
    })
}

pub fn membership_l_i(a: &ComplexMatrix) -> Result<ConeMembership> {
    membership_l_i_with_tol(a, DEFAULT_TOL)
}

pub fn membership_l_i_with_tol(a: &ComplexMatrix, tol: f64) -> Result<ConeMembership> {
    let n = a.ensure_square("A")?;
    let mut out = membership_l_h_with_tol(a, &ComplexMatrix::identity(n), tol)?;
    out.split = Some(hermitian_split(a)?);
    Ok(out)
}

/// A member `A` of `L_I` with `A + B` singular, for `B` outside the closed cone.
#[derive(Debug, Clone, Serialize)]
pub struct MaximalityWitness {
    pub alpha: f64,
    #[serde(rename = "A")]
    pub a: ComplexMatrix,
    pub sigma_min_sum: f64,
    pub sigma_max_sum: f64,
}

pub fn maximality_witness(b: &ComplexMatrix) -> Result<MaximalityWitness> {
    maximality_witness_with_tol(b, DEFAULT_TOL)
}

pub fn maximality_witness_with_tol(b: &ComplexMatrix, tol: f64) -> Result<MaximalityWitness> {
    let n = b.ensure_square("B")?;
    let herm = b + &b.adjoint();
    let verdict = definiteness_with_tol(&herm, tol)?;
    let zero = tol * verdict.min_eig.abs().max(verdict.max_eig.abs()).max(1.0);
    if verdict.min_eig >= -zero {
        return Err(Error::NoWitness(format!(
            "B lies in the closed cone or within tolerance of its boundary (min eig of B+B* = {:e})",
            verdict.min_eig
        )));
    }
    let alpha = -verdict.min_eig;
    // A = (alpha I + B* - B) / 2, so A + A* = alpha I and A + B = (alpha I + B + B*) / 2
    let a = (&ComplexMatrix::identity(n).scale(alpha) + &(&b.adjoint() - b)).scale(0.5);
    let sv = matcore::singular_values(&(&a + b));
    Ok(MaximalityWitness {
        alpha,
        a,
        sigma_min_sum: sv.last().copied().unwrap_or(0.0),
        sigma_max_sum: sv.first().copied().unwrap_or(0.0),
    })
}

/// Which Gram condition the compressing map must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CombineMode {
    /// `Y*Y = I`
    Isometry,
    /// `Y*Y > 0`
    FullRankCone,
}

fn check_gram(gram: &ComplexMatrix, mode: CombineMode, tol: f64) -> Result<()> {
    match mode {
        CombineMode::Isometry => {
            let dev = (gram - &ComplexMatrix::identity(gram.nrows())).norm2();
            if dev > tol.max(1e-10) * 10.0 {
                return Err(Error::GramCondition(format!("||Y*Y - I||_2 = {dev:e}")));
            }
        }
        CombineMode::FullRankCone => {
            let v = definiteness_with_tol(gram, tol)?;
            if !v.is_positive_definite() {
                return Err(Error::GramCondition(format!(
                    "Y*Y is not positive definite (min eig {:e})",
                    v.min_eig
                )));
            }
        }
    }
    Ok(())
}

/// `Y* diag(A_1, ..., A_k) Y`.
pub fn matrix_convex_combine(
    mats: &[ComplexMatrix],
    upsilon: &ComplexMatrix,
    mode: CombineMode,
) -> Result<ComplexMatrix> {
    let k = mats.len();
    if k == 0 {
        return Err(Error::InvalidArgument("need at least one matrix".into()));
    }
    let n = mats[0].ensure_square("A_1")?;
    if mats.iter().any(|m| m.shape() != (n, n)) {
        return Err(Error::Shape("all A_j must share the same size".into()));
    }
    if upsilon.shape() != (k * n, n) {
        return Err(Error::Shape(format!(
            "isometry must be {}x{n}, got {:?}",
            k * n,
            upsilon.shape()
        )));
    }
    check_gram(&(&upsilon.adjoint() * upsilon), mode, DEFAULT_TOL)?;
    let mut out = ComplexMatrix::zeros(n, n);
    for (j, a) in mats.iter().enumerate() {
        let yj = upsilon.block(j * n, 0, n, n);
        out = &out + &(&(&yj.adjoint() * a) * &yj);
    }
    Ok(out)
}

/// The two convex combinations of `[[-1, t], [0, 1]]` with a unitary
/// conjugate that land on a singular matrix.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaCombination {
    pub thetas: [f64; 2],
    pub matrices: [ComplexMatrix; 2],
}

/// The unitary `U` used in the combination.
pub fn theta_unitary(t: Complex64) -> ComplexMatrix {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let lower = if t.norm() == 0.0 { -one } else { -t.conj() / t };
    ComplexMatrix::from_rows(2, 2, &[z, one, lower, z]).expect("finite 2x2")
}

pub fn singular_theta_combination(t: Complex64) -> ThetaCombination {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let x = ComplexMatrix::from_rows(2, 2, &[-one, t, z, one]).expect("finite 2x2");
    let u = theta_unitary(t);
    let conj = &(&u.adjoint() * &x) * &u;
    let r = t.norm();
    let half_gap = r / (2.0 * (r * r + 4.0).sqrt());
    let thetas = [0.5 + half_gap, 0.5 - half_gap];
    let at = |theta: f64| &x.scale(theta) + &conj.scale(1.0 - theta);
    ThetaCombination {
        thetas,
        matrices: [at(thetas[0]), at(thetas[1])],
    }
}

/// Interleaved `(n+m)k x (n+m)` map built from per-slot state and port blocks.
#[derive(Debug, Clone)]
pub struct StructuredIsometry {
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub blocks_n: Vec<ComplexMatrix>,
    pub blocks_m: Vec<ComplexMatrix>,
    pub assembled: ComplexMatrix,
    pub mode: CombineMode,
}

impl StructuredIsometry {
    /// `diag(v_{j,n}, v_{j,m})`
    pub fn slot(&self, j: usize) -> ComplexMatrix {
        ComplexMatrix::block_diag(&[&self.blocks_n[j], &self.blocks_m[j]])
    }
}

pub fn structured_isometry(
    blocks_n: Vec<ComplexMatrix>,
    blocks_m: Vec<ComplexMatrix>,
    mode: CombineMode,
) -> Result<StructuredIsometry> {
    let k = blocks_n.len();
    if k == 0 || blocks_m.len() != k {
        return Err(Error::Shape(format!(
            "need equal, non-zero block counts (got {} and {})",
            k,
            blocks_m.len()
        )));
    }
    let n = blocks_n[0].ncols();
    let m = blocks_m[0].ncols();
    if blocks_n.iter().any(|b| b.shape() != (n, n)) || blocks_m.iter().any(|b| b.shape() != (m, m))
    {
        return Err(Error::Shape(
            "state blocks must be n x n and port blocks m x m".into(),
        ));
    }
    let mut assembled = ComplexMatrix::zeros((n + m) * k, n + m).into_inner();
    for j in 0..k {
        let r = j * (n + m);
        assembled
            .view_mut((r, 0), (n, n))
            .copy_from(blocks_n[j].inner());
        assembled
            .view_mut((r + n, n), (m, m))
            .copy_from(blocks_m[j].inner());
    }
    let assembled = ComplexMatrix::wrap(assembled);
    check_gram(&(&assembled.adjoint() * &assembled), mode, DEFAULT_TOL)?;
    Ok(StructuredIsometry {
        k,
        n,
        m,
        blocks_n,
        blocks_m,
        assembled,
        mode,
    })
}

/// `sum_j diag(v_{j,n}, v_{j,m})* R_j diag(v_{j,n}, v_{j,m})`.
pub fn nm_matrix_convex_combine(
    rs: &[ComplexMatrix],
    upsilon: &StructuredIsometry,
) -> Result<ComplexMatrix> {
    let size = upsilon.n + upsilon.m;
    if rs.len() != upsilon.k {
        return Err(Error::Shape(format!(
            "{} matrices for {} isometry slots",
            rs.len(),
            upsilon.k
        )));
    }
    if rs.iter().any(|r| r.shape() != (size, size)) {
        return Err(Error::Shape(format!("every R_j must be {size}x{size}")));
    }
    let mut out = ComplexMatrix::zeros(size, size);
    for (j, r) in rs.iter().enumerate() {
        let s = upsilon.slot(j);
        out = &out + &(&(&s.adjoint() * r) * &s);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BallMembership {
    Open,
    Boundary,
    Outside,
}

/// Where `A` sits relative to the spectral-norm ball of radius `alpha`.
pub fn spectral_norm_ball_membership(a: &ComplexMatrix, alpha: f64) -> Result<BallMembership> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "radius must be positive, got {alpha}"
        )));
    }
    let norm = a.norm2();
    let zero = DEFAULT_TOL * alpha.max(1.0);
    Ok(if (norm - alpha).abs() <= zero {
        BallMembership::Boundary
    } else if norm < alpha {
        BallMembership::Open
    } else {
        BallMembership::Outside
    })
}

/// Random member of the open cone `L_I` in `P + iH` form: `P = G*G + eps I`,
/// `H = (G' + G'*)/2`.
pub fn random_l_i_member<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = gaussian_matrix(n, n, rng);
    let p = &(&g.adjoint() * &g) + &ComplexMatrix::identity(n).scale(1e-3);
    let g2 = gaussian_matrix(n, n, rng);
    let h = (&g2 + &g2.adjoint()).scale(0.5);
    &p + &h.scale_complex(Complex64::i())
}
