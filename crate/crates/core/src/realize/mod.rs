//! Realization arrays `R = [A B; C D]` read both as the state-space system
//! `F(s) = C (sI - A)^{-1} B + D` and as an `(n+m) x (n+m)` matrix.

mod balance;
mod kyp;
mod lyapunov;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use balance::{
    gramian_balance, sign_iteration, sign_iteration_with, BalancingResult, SignIterationTrace,
    SignStep, TerminalCheck,
};
pub use kyp::{
    controllable_dim, kyp_residual, kyp_search, kyp_verify, kyp_verify_with_tol, observable_dim,
    InfeasibilityReason, InfeasibilityReport, KypCertificate, KypSearch, KypSearchOutcome,
};
pub use lyapunov::{controllability_gramian, lyapunov_solve, observability_gramian};

use crate::cones::{nm_matrix_convex_combine, StructuredIsometry};
use crate::error::{Error, Result};
use crate::matcore::{hermitian_function, singular_values};
use crate::matrix::ComplexMatrix;
use crate::ratfun::{Polynomial, Rational, RationalMatrixFunction};
use crate::DEFAULT_TOL;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RealizationWire")]
pub struct RealizationArray {
    n: usize,
    m: usize,
    #[serde(rename = "A")]
    a: ComplexMatrix,
    #[serde(rename = "B")]
    b: ComplexMatrix,
    #[serde(rename = "C")]
    c: ComplexMatrix,
    #[serde(rename = "D")]
    d: ComplexMatrix,
}

#[derive(Deserialize)]
struct RealizationWire {
    n: usize,
    m: usize,
    #[serde(rename = "A")]
    a: ComplexMatrix,
    #[serde(rename = "B")]
    b: ComplexMatrix,
    #[serde(rename = "C")]
    c: ComplexMatrix,
    #[serde(rename = "D")]
    d: ComplexMatrix,
}

impl TryFrom<RealizationWire> for RealizationArray {
    type Error = Error;
    fn try_from(w: RealizationWire) -> Result<Self> {
        let r = Self::new(w.a, w.b, w.c, w.d)?;
        if (r.n, r.m) != (w.n, w.m) {
            return Err(Error::Shape(format!(
                "declared (n, m) = ({}, {}), blocks give ({}, {})",
                w.n, w.m, r.n, r.m
            )));
        }
        Ok(r)
    }
}

impl RealizationArray {
    pub fn new(
        a: ComplexMatrix,
        b: ComplexMatrix,
        c: ComplexMatrix,
        d: ComplexMatrix,
    ) -> Result<Self> {
        let n = a.nrows();
        let m = d.nrows();
        if a.shape() != (n, n) || b.shape() != (n, m) || c.shape() != (m, n) || d.shape() != (m, m)
        {
            return Err(Error::Shape(format!(
                "A {:?}, B {:?}, C {:?}, D {:?} do not form a square realization",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        Ok(Self { n, m, a, b, c, d })
    }

    /// Real realization from row-major blocks.
    pub fn from_real(
        n: usize,
        m: usize,
        a: &[f64],
        b: &[f64],
        c: &[f64],
        d: &[f64],
    ) -> Result<Self> {
        Self::new(
            ComplexMatrix::from_real_rows(n, n, a)?,
            ComplexMatrix::from_real_rows(n, m, b)?,
            ComplexMatrix::from_real_rows(m, n, c)?,
            ComplexMatrix::from_real_rows(m, m, d)?,
        )
    }

    /// Static gain, no state.
    pub fn static_gain(d: ComplexMatrix) -> Result<Self> {
        let m = d.ensure_square("D")?;
        Self::new(
            ComplexMatrix::zeros(0, 0),
            ComplexMatrix::zeros(0, m),
            ComplexMatrix::zeros(m, 0),
            d,
        )
    }

    /// Splits an `(n+m) x (n+m)` matrix after its first `n` rows and columns.
    pub fn from_matrix(r: &ComplexMatrix, n: usize) -> Result<Self> {
        let size = r.ensure_square("realization matrix")?;
        if n > size {
            return Err(Error::Shape(format!(
                "state dimension {n} exceeds matrix size {size}"
            )));
        }
        let m = size - n;
        Self::new(
            r.block(0, 0, n, n),
            r.block(0, n, n, m),
            r.block(n, 0, m, n),
            r.block(n, n, m, m),
        )
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::block2x2(&self.a, &self.b, &self.c, &self.d).expect("blocks are consistent")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn b(&self) -> &ComplexMatrix {
        &self.b
    }

    pub fn c(&self) -> &ComplexMatrix {
        &self.c
    }

    pub fn d(&self) -> &ComplexMatrix {
        &self.d
    }

    pub fn is_real(&self) -> bool {
        [&self.a, &self.b, &self.c, &self.d]
            .iter()
            .all(|x| x.is_real(0.0))
    }

    /// Transfer function as reduced rational entries (real realizations only).
    pub fn to_rational(&self) -> Result<RationalMatrixFunction> {
        if !self.is_real() {
            return Err(Error::InvalidArgument(
                "only real realizations have real rational transfer functions".into(),
            ));
        }
        let (n, m) = (self.n, self.m);
        // Faddeev-LeVerrier: adj(sI - A) = sum_k N_k s^{n-1-k}, det = sum_k c_k s^{n-k}
        let mut charpoly = vec![0.0; n + 1];
        charpoly[n] = 1.0;
        let mut adj_terms = Vec::with_capacity(n);
        let mut nk = ComplexMatrix::identity(n);
        for k in 1..=n {
            adj_terms.push(nk.clone());
            let an = &self.a * &nk;
            let ck = -an.trace().re / k as f64;
            charpoly[n - k] = ck;
            nk = &an + &ComplexMatrix::identity(n).scale(ck);
        }
        let den = Polynomial::new(charpoly);
        let weighted: Vec<ComplexMatrix> = adj_terms
            .iter()
            .map(|nk| &(&self.c * nk) * &self.b)
            .collect();
        let mut entries = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let mut num = vec![0.0; n.max(1)];
                for (k, w) in weighted.iter().enumerate() {
                    num[n - 1 - k] = w[(i, j)].re;
                }
                let num = Polynomial::new(num).add(&den.scale(self.d[(i, j)].re));
                entries.push(Rational::new(num, den.clone())?);
            }
        }
        RationalMatrixFunction::new(m, entries)?.with_realization(self.clone())
    }

    /// Controllable and observable part (Kalman reduction onto orthonormal
    /// bases); same transfer function, possibly fewer states.
    pub fn minimal_part(&self) -> RealizationArray {
        let v = ComplexMatrix::wrap(kyp::reachable_basis(&self.a, &self.b));
        let (a1, b1, c1) = (
            &(&v.adjoint() * &self.a) * &v,
            &v.adjoint() * &self.b,
            &self.c * &v,
        );
        let w = ComplexMatrix::wrap(kyp::reachable_basis(&a1.adjoint(), &c1.adjoint()));
        RealizationArray::new(
            &(&w.adjoint() * &a1) * &w,
            &w.adjoint() * &b1,
            &c1 * &w,
            self.d.clone(),
        )
        .expect("projected blocks are consistent")
    }

    fn same_split(&self, other: &Self) -> bool {
        self.n == other.n && self.m == other.m
    }
}

/// `C (sI - A)^{-1} B + D`; `None` when `s` is (numerically) an eigenvalue of `A`.
pub fn transfer_eval(r: &RealizationArray, s: Complex64) -> Option<ComplexMatrix> {
    if r.n == 0 {
        return Some(r.d.clone());
    }
    let resolvent = &ComplexMatrix::identity(r.n).scale_complex(s) - &r.a;
    let sv = singular_values(&resolvent);
    let scale = r.a.norm2().max(s.norm()).max(1.0);
    if sv.last().copied().unwrap_or(0.0) <= 1e3 * f64::EPSILON * scale {
        // the pole may be hidden (uncontrollable or unobservable)
        let reduced = r.minimal_part();
        return if reduced.n < r.n {
            transfer_eval(&reduced, s)
        } else {
            None
        };
    }
    let x = resolvent.inner().clone().lu().solve(r.b.inner())?;
    Some(&(&r.c * &ComplexMatrix::wrap(x)) + &r.d)
}

/// Cone operations carried out on the matrix views.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum RealizationOp {
    Scale { factor: f64 },
    Sum,
    Invert,
}

pub fn realization_matrix_op(
    rs: &[RealizationArray],
    op: RealizationOp,
) -> Result<RealizationArray> {
    let first = rs
        .first()
        .ok_or_else(|| Error::InvalidArgument("no realizations given".into()))?;
    if rs.iter().any(|r| !r.same_split(first)) {
        return Err(Error::Shape("realizations must share (n, m)".into()));
    }
    let single = || {
        if rs.len() == 1 {
            Ok(first)
        } else {
            Err(Error::InvalidArgument(format!(
                "operation takes one realization, got {}",
                rs.len()
            )))
        }
    };
    let out = match op {
        RealizationOp::Scale { factor } => {
            if !(factor.is_finite() && factor > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "scale factor must be positive, got {factor}"
                )));
            }
            single()?.to_matrix().scale(factor)
        }
        RealizationOp::Sum => rs
            .iter()
            .skip(1)
            .fold(first.to_matrix(), |acc, r| &acc + &r.to_matrix()),
        RealizationOp::Invert => single()?.to_matrix().try_inverse()?,
    };
    RealizationArray::from_matrix(&out, first.n)
}

pub fn scale(r: &RealizationArray, factor: f64) -> Result<RealizationArray> {
    realization_matrix_op(std::slice::from_ref(r), RealizationOp::Scale { factor })
}

pub fn sum(rs: &[RealizationArray]) -> Result<RealizationArray> {
    realization_matrix_op(rs, RealizationOp::Sum)
}

pub fn invert(r: &RealizationArray) -> Result<RealizationArray> {
    realization_matrix_op(std::slice::from_ref(r), RealizationOp::Invert)
}

/// `diag(H^{1/2}, I) R diag(H^{-1/2}, I)`
pub fn coordinate_change(r: &RealizationArray, h: &ComplexMatrix) -> Result<RealizationArray> {
    kyp::ensure_state_weight(r, h, DEFAULT_TOL)?;
    let root = hermitian_function(h, f64::sqrt);
    let root_inv = hermitian_function(h, |x| 1.0 / x.sqrt());
    RealizationArray::new(
        &(&root * &r.a) * &root_inv,
        &root * &r.b,
        &r.c * &root_inv,
        r.d.clone(),
    )
}

/// Structured matrix-convex combination of realizations with a shared split.
pub fn nm_realization_combine(
    rs: &[RealizationArray],
    upsilon: &StructuredIsometry,
) -> Result<RealizationArray> {
    let first = rs
        .first()
        .ok_or_else(|| Error::InvalidArgument("no realizations given".into()))?;
    if rs.iter().any(|r| !r.same_split(first)) || (upsilon.n, upsilon.m) != (first.n, first.m) {
        return Err(Error::Shape(format!(
            "realizations and isometry must share (n, m); isometry has ({}, {})",
            upsilon.n, upsilon.m
        )));
    }
    let views: Vec<ComplexMatrix> = rs.iter().map(RealizationArray::to_matrix).collect();
    RealizationArray::from_matrix(&nm_matrix_convex_combine(&views, upsilon)?, first.n)
}

/// `[0 | 1; 1 | 0]`, realizing `1/s`.
pub fn r_f() -> RealizationArray {
    RealizationArray::from_real(1, 1, &[0.0], &[1.0], &[1.0], &[0.0]).expect("1x1 blocks")
}

/// `[0 | 0; 0 | 1]`, realizing the constant `1`.
pub fn r_g() -> RealizationArray {
    RealizationArray::from_real(1, 1, &[0.0], &[0.0], &[0.0], &[1.0]).expect("1x1 blocks")
}

/// `[-a | sqrt(b); sqrt(b) | d]`, realizing `b/(s+a) + d`.
pub fn r_h(a: f64, b: f64, d: f64) -> Result<RealizationArray> {
    if b.is_nan() || b < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "b must be non-negative, got {b}"
        )));
    }
    RealizationArray::from_real(1, 1, &[-a], &[b.sqrt()], &[b.sqrt()], &[d])
}
