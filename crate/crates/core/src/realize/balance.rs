//! Square-root balancing and the convex sign iteration driving a negative
//! definite `H` to `-I` while carrying the Gram factors along.

use serde::Serialize;

use super::lyapunov::{controllability_gramian, observability_gramian};
use super::RealizationArray;
use crate::error::{Error, Result};
use crate::matcore::{definiteness, eigenvalues};
use crate::matrix::ComplexMatrix;

#[derive(Debug, Clone, Serialize)]
pub struct SignStep {
    pub alpha: f64,
    /// `||H_j + I||_2`
    pub distance: f64,
    #[serde(rename = "H")]
    pub h: ComplexMatrix,
}

/// Residuals of `-(A + A*) = B B* = C* C` after the iteration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TerminalCheck {
    pub residual_b: f64,
    pub residual_c: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignIterationTrace {
    pub steps: Vec<SignStep>,
    /// Final `B_j B_j*` and `C_j* C_j`.
    pub gram_b: ComplexMatrix,
    pub gram_c: ComplexMatrix,
    pub converged: bool,
    pub terminal: Option<TerminalCheck>,
}

impl SignIterationTrace {
    pub fn iterations(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    /// Whether `||H_j + I||` never increased along the trace.
    pub fn is_monotone(&self) -> bool {
        self.steps
            .windows(2)
            .all(|w| w[1].distance <= w[0].distance * (1.0 + 1e-12) + 1e-15)
    }

    /// Whether every `alpha_j` is at most one half.
    pub fn alphas_bounded(&self) -> bool {
        self.steps.iter().all(|s| s.alpha <= 0.5 + 1e-15)
    }

    /// Checks the terminal identity against a state matrix `A`.
    pub fn terminal_check(&self, a: &ComplexMatrix) -> TerminalCheck {
        let lhs = -(a + &a.adjoint());
        let scale = lhs.norm2().max(1.0);
        TerminalCheck {
            residual_b: (&lhs - &self.gram_b).norm2() / scale,
            residual_c: (&lhs - &self.gram_c).norm2() / scale,
        }
    }
}

pub const SIGN_ITERATION_TOL: f64 = 1e-10;
pub const SIGN_ITERATION_MAX: usize = 500;

/// `H_{j+1} = a_j H_j + (1 - a_j) H_j^{-1}` with
/// `a_j = 1 / (1 + max(||H_j||, ||H_j^{-1}||))`; the Gram factors follow
/// `BB* <- a BB* + (1-a) H^{-1} C*C H^{-1}` and symmetrically for `C*C`.
pub fn sign_iteration(
    h: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
) -> Result<SignIterationTrace> {
    sign_iteration_with(h, b, c, SIGN_ITERATION_TOL, SIGN_ITERATION_MAX)
}

pub fn sign_iteration_with(
    h: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<SignIterationTrace> {
    let n = h.ensure_square("H")?;
    if b.nrows() != n || c.ncols() != n {
        return Err(Error::Shape(format!(
            "B is {:?}, C is {:?}, H is {n}x{n}",
            b.shape(),
            c.shape()
        )));
    }
    let v = definiteness(h)?;
    if !v.is_negative_definite() {
        return Err(Error::Precondition(format!(
            "H must be negative definite (max eigenvalue {:e})",
            v.max_eig
        )));
    }
    let eye = ComplexMatrix::identity(n);
    let mut hj = h.clone();
    let mut gb = b * &b.adjoint();
    let mut gc = &c.adjoint() * c;
    let mut steps = Vec::new();
    let mut converged = false;
    for j in 0..=max_iter {
        let inv = hj.try_inverse()?;
        let alpha = 1.0 / (1.0 + hj.norm2().max(inv.norm2()));
        let distance = (&hj + &eye).norm2();
        steps.push(SignStep {
            alpha,
            distance,
            h: hj.clone(),
        });
        if distance <= tol {
            converged = true;
            break;
        }
        if j == max_iter {
            break;
        }
        let next_gb = &gb.scale(alpha) + &(&(&inv * &gc) * &inv).scale(1.0 - alpha);
        let next_gc = &gc.scale(alpha) + &(&(&inv * &gb) * &inv).scale(1.0 - alpha);
        let next = &hj.scale(alpha) + &inv.scale(1.0 - alpha);
        hj = (&next + &next.adjoint()).scale(0.5);
        gb = next_gb;
        gc = next_gc;
    }
    Ok(SignIterationTrace {
        steps,
        gram_b: gb,
        gram_c: gc,
        converged,
        terminal: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BalancingResult {
    /// `T` with `A_bal = T A T^{-1}`, `B_bal = T B`, `C_bal = C T^{-1}`.
    pub transform: ComplexMatrix,
    pub balanced: RealizationArray,
    /// Common diagonal Gramian.
    pub gramian: ComplexMatrix,
    pub iterations: Option<SignIterationTrace>,
}

fn cholesky(w: &ComplexMatrix, what: &str) -> Result<ComplexMatrix> {
    let v = definiteness(w)?;
    if !v.is_positive_definite() || v.min_eig <= 1e-12 * v.max_eig {
        return Err(Error::Singular(format!(
            "{what} Gramian is numerically singular (min eig {:e})",
            v.min_eig
        )));
    }
    let sym = (w + &w.adjoint()).scale(0.5);
    sym.inner()
        .clone()
        .cholesky()
        .map(|ch| ComplexMatrix::wrap(ch.unpack()))
        .ok_or_else(|| Error::Singular(format!("{what} Gramian is not positive definite")))
}

pub fn gramian_balance(r: &RealizationArray, via_sign_iteration: bool) -> Result<BalancingResult> {
    let n = r.n();
    let scale = r.a().norm2().max(1.0);
    if let Some(l) = eigenvalues(r.a())?
        .into_iter()
        .find(|l| l.re >= -1e-12 * scale)
    {
        return Err(Error::Precondition(format!(
            "A is not Hurwitz (eigenvalue {l})"
        )));
    }
    let w = controllability_gramian(r)?;
    let m = observability_gramian(r)?;
    let lc = cholesky(&w, "controllability")?;
    let lo = cholesky(&m, "observability")?;
    let svd = (&lo.adjoint() * &lc).inner().clone().svd(true, true);
    let u = ComplexMatrix::wrap(svd.u.expect("requested U"));
    let vt = ComplexMatrix::wrap(svd.v_t.expect("requested V"));
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let root_inv: Vec<f64> = sigma.iter().map(|s| 1.0 / s.sqrt()).collect();
    let d = ComplexMatrix::from_real_diagonal(&root_inv);
    let t = &(&d * &u.adjoint()) * &lo.adjoint();
    let t_inv = &(&lc * &vt.adjoint()) * &d;
    let balanced = RealizationArray::new(
        &(&t * r.a()) * &t_inv,
        &t * r.b(),
        r.c() * &t_inv,
        r.d().clone(),
    )?;
    let gramian = ComplexMatrix::from_real_diagonal(&sigma);
    let iterations = if via_sign_iteration && n > 0 {
        let mut trace = sign_iteration(&-&gramian, balanced.b(), balanced.c())?;
        trace.terminal = Some(trace.terminal_check(balanced.a()));
        Some(trace)
    } else {
        None
    };
    Ok(BalancingResult {
        transform: t,
        balanced,
        gramian,
        iterations,
    })
}
