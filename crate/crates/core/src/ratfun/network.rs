//! The `phi(X, Y) = (X^{-1} + Y)^{-1}` map, driving-point impedances of two
//! reference circuits, the 2m x 2m feedback-loop network, and the
//! construction showing no rational function outside the PR family can join
//! the cone.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cic::{cic_eval, CicExpression, CicNode};
use super::rational::{Rational, RationalMatrixFunction};
use crate::error::{Error, Result};
use crate::matcore::{eigenvalues, singular_values};
use crate::matrix::ComplexMatrix;
use crate::DEFAULT_TOL;

/// Anything with addition and inversion.
pub trait InvertibleAlgebra: Sized {
    fn plus(&self, other: &Self) -> Result<Self>;
    fn invert(&self) -> Result<Self>;
}

impl InvertibleAlgebra for ComplexMatrix {
    fn plus(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(self + other)
    }

    fn invert(&self) -> Result<Self> {
        self.try_inverse()
    }
}

impl InvertibleAlgebra for RationalMatrixFunction {
    fn plus(&self, other: &Self) -> Result<Self> {
        self.add(other)
    }

    fn invert(&self) -> Result<Self> {
        self.inverse()
    }
}

/// `(X^{-1} + Y)^{-1}`
pub fn phi<T: InvertibleAlgebra>(x: &T, y: &T) -> Result<T> {
    x.invert()?.plus(y)?.invert()
}

/// Element values for the two reference one-port circuits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "topology", content = "values")]
pub enum CircuitSpec {
    /// `R1` in series with `R2 || C`: `Z = d + b/(s + a)` with `d = R1`,
    /// `b = 1/C`, `a = 1/(R2 C)`.
    #[serde(rename = "fig2")]
    SeriesRParallelRc { r1: f64, r2: f64, c: f64 },
    /// Lossless network: series `C_a`-`L_b` branch, shunt `L_c`, shunt `C_d`,
    /// all across the port.
    #[serde(rename = "fig3")]
    TwoBranchLossless { ca: f64, lb: f64, lc: f64, cd: f64 },
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidArgument(format!(
            "element {name} must be positive, got {v}"
        )))
    }
}

/// `s * value`
fn reactance(value: f64) -> RationalMatrixFunction {
    RationalMatrixFunction::scalar(Rational::s().scale(value))
}

pub fn ladder_impedance(spec: &CircuitSpec) -> Result<RationalMatrixFunction> {
    match *spec {
        CircuitSpec::SeriesRParallelRc { r1, r2, c } => {
            let (r1, r2, c) = (positive("r1", r1)?, positive("r2", r2)?, positive("c", c)?);
            let admittance =
                RationalMatrixFunction::scalar(Rational::constant(1.0 / r2)).add(&reactance(c))?;
            RationalMatrixFunction::scalar(Rational::constant(r1)).add(&admittance.inverse()?)
        }
        CircuitSpec::TwoBranchLossless { ca, lb, lc, cd } => {
            let (ca, lb, lc, cd) = (
                positive("ca", ca)?,
                positive("lb", lb)?,
                positive("lc", lc)?,
                positive("cd", cd)?,
            );
            // series branch admittance ((s C_a)^{-1} + s L_b)^{-1} = phi(s C_a, s L_b)
            let branch = phi(&reactance(ca), &reactance(lb))?;
            let total = branch.add(&reactance(lc).inverse()?)?.add(&reactance(cd))?;
            total.inverse()
        }
    }
}

/// The 2m x 2m transfer of the two-loop feedback network with blocks
/// `F_a, F_b` (lower loop) and `F_c, F_d` (upper loop).
pub fn feedback_network(
    fa: &RationalMatrixFunction,
    fb: &RationalMatrixFunction,
    fc: &RationalMatrixFunction,
    fd: &RationalMatrixFunction,
) -> Result<RationalMatrixFunction> {
    let m = fa.size();
    if [fb.size(), fc.size(), fd.size()].iter().any(|&x| x != m) {
        return Err(Error::Shape("all four blocks must share one size".into()));
    }
    let fc_hat = fc.inverse()?.add(fd)?;
    let fa_hat = fa.inverse()?.add(fb)?;
    let fa_hat_inv = fa_hat.inverse()?;
    let upper = fc_hat.add(&fa_hat_inv)?.inverse()?;
    let lower_right = fc_hat.inverse()?.add(&fa_hat)?.inverse()?;
    let upper_right = upper.mul(&fa_hat_inv)?.neg();
    let lower_left = fa_hat_inv.mul(&upper)?;
    RationalMatrixFunction::block2x2(&upper, &upper_right, &lower_left, &lower_right)
}

#[derive(Debug, Clone, Serialize)]
pub struct MaximalityCounterexample {
    /// `(G + aI + b^2 (G + aI)^{-1})^{-1}`
    pub function: RationalMatrixFunction,
    /// The same function as an expression over `G` and the constant `I`.
    pub expression: CicExpression,
    /// `sigma_min` of the pre-inverse at `s0`, relative to the size of its
    /// summands.
    pub relative_sigma_min: f64,
    /// Pole of the result closest to `s0`.
    pub pole_near_s0: [f64; 2],
}

/// Given `G` analytic in the right half-plane with `G(s0) v = (-a + ib) v`,
/// builds an element of `cic(G, I)` with a pole at `s0`.
pub fn maximality_counterexample(
    g: &RationalMatrixFunction,
    s0: Complex64,
    a: f64,
    b: f64,
) -> Result<MaximalityCounterexample> {
    let m = g.size();
    if a.is_nan() || a <= 0.0 {
        return Err(Error::Precondition(format!("a must be positive, got {a}")));
    }
    if s0.re.is_nan() || s0.re <= 0.0 {
        return Err(Error::Precondition(format!(
            "s0 = {s0} is not in the open right half-plane"
        )));
    }
    if let Some(p) = g
        .poles()
        .into_iter()
        .find(|p| p.re > 1e-9 * p.norm().max(1.0))
    {
        return Err(Error::Precondition(format!(
            "G has a right half-plane pole at {p}"
        )));
    }
    let g0 = g
        .eval(s0)
        .ok_or_else(|| Error::Precondition(format!("G has a pole at {s0}")))?;
    let target = Complex64::new(-a, b);
    let closest = eigenvalues(&g0)?
        .into_iter()
        .map(|l| (l - target).norm())
        .fold(f64::INFINITY, f64::min);
    if closest > 1e-8 * target.norm().max(1.0) {
        return Err(Error::Precondition(format!(
            "G(s0) has no eigenvalue -a + ib = {target} (closest distance {closest:e})"
        )));
    }

    let shifted = CicNode::sum(vec![
        CicNode::leaf(g.clone()),
        CicNode::scale(a, CicNode::g()),
    ]);
    let mut terms = vec![shifted.clone()];
    if b != 0.0 {
        terms.push(CicNode::scale(b * b, CicNode::inverse(shifted.clone())));
    }
    let expression = CicExpression::new(m, CicNode::inverse(CicNode::sum(terms.clone())))?;

    let shifted_fn = g.add(&RationalMatrixFunction::identity(m).scale(a))?;
    if shifted_fn.det().is_zero() {
        return Err(Error::IdenticallySingular(
            "G + aI vanishes identically (degenerate)".into(),
        ));
    }
    let pre = cic_eval(&CicExpression::new(m, CicNode::sum(terms))?)?;
    if pre.det().is_zero() {
        return Err(Error::IdenticallySingular(
            "pre-inverse vanishes identically (degenerate)".into(),
        ));
    }
    let pre0 = pre
        .eval(s0)
        .ok_or_else(|| Error::Precondition("pre-inverse has a pole at s0".into()))?;
    let shifted0 = &g0 + &ComplexMatrix::identity(m).scale(a);
    let mut scale = g0.norm2() + a;
    if b != 0.0 {
        scale += b * b
            / singular_values(&shifted0)
                .last()
                .copied()
                .unwrap_or(f64::INFINITY);
    }
    let relative_sigma_min = singular_values(&pre0).last().copied().unwrap_or(0.0) / scale.max(1.0);
    let function = cic_eval(&expression)?;
    let pole = function
        .poles()
        .into_iter()
        .min_by(|x, y| (x - s0).norm().total_cmp(&(y - s0).norm()))
        .ok_or_else(|| Error::Precondition("result has no finite poles".into()))?;
    if relative_sigma_min > 1e3 * DEFAULT_TOL.sqrt() {
        return Err(Error::Precondition(format!(
            "pre-inverse is not singular at s0 (sigma ratio {relative_sigma_min:e})"
        )));
    }
    Ok(MaximalityCounterexample {
        function,
        expression,
        relative_sigma_min,
        pole_near_s0: [pole.re, pole.im],
    })
}
