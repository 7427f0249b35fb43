//! Sampling-based positive-real verification with exact right-half-plane
//! pole exclusion.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::rational::RationalMatrixFunction;
use crate::matcore::hermitian_eigenvalues;
use crate::matrix::ComplexMatrix;

/// Sampling configuration for [`pr_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrGrid {
    /// Log-spaced frequencies on the imaginary axis (plus `omega = 0`).
    pub boundary_points: usize,
    pub omega_min: f64,
    pub omega_max: f64,
    /// Interior grid is `interior_points x interior_points`.
    pub interior_points: usize,
    pub re_min: f64,
    pub re_max: f64,
    /// Relative tolerance on the Hermitian part, against `max(1, ||F(s)||)`.
    pub tol: f64,
    /// Relative real-part threshold for calling a pole right-half-plane.
    pub pole_tol: f64,
}

impl Default for PrGrid {
    fn default() -> Self {
        Self {
            boundary_points: 200,
            omega_min: 1e-4,
            omega_max: 1e4,
            interior_points: 20,
            re_min: 1e-3,
            re_max: 1e3,
            tol: 1e-8,
            pole_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrFailureReason {
    RhpPole,
    HermitianPartIndefinite,
    NotRealOnReals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrFailure {
    /// `[re, im]` of the offending pole or sample point.
    pub location: [f64; 2],
    pub reason: PrFailureReason,
    /// Minimum Hermitian-part eigenvalue (or pole real part).
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrVerdict {
    pub is_pr: bool,
    pub failures: Vec<PrFailure>,
    /// Boundary frequencies skipped because they sit on a pole.
    pub skipped: Vec<f64>,
    pub points_checked: usize,
}

pub(crate) fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n)
                .map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64))
                .collect()
        }
    }
}

fn hermitian_min_eig(f: &ComplexMatrix) -> f64 {
    if f.nrows() == 1 {
        return f[(0, 0)].re;
    }
    let herm = (f + &f.adjoint()).scale(0.5);
    hermitian_eigenvalues(&herm)[0]
}

fn scale_of(f: &ComplexMatrix) -> f64 {
    f.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

pub fn pr_check(f: &RationalMatrixFunction, grid: &PrGrid) -> PrVerdict {
    let mut failures = Vec::new();
    let mut skipped = Vec::new();
    let mut points = 0;

    let poles = f.poles();
    for p in &poles {
        if p.re > grid.pole_tol * p.norm().max(1.0) {
            failures.push(PrFailure {
                location: [p.re, p.im],
                reason: PrFailureReason::RhpPole,
                value: p.re,
            });
        }
    }

    let near_pole = |s: Complex64| {
        poles
            .iter()
            .any(|p| (s - p).norm() <= 1e-6 * p.norm().max(1.0))
    };
    let check_at = |s: Complex64, failures: &mut Vec<PrFailure>| -> bool {
        let Some(val) = f.eval(s) else {
            return false;
        };
        let min = hermitian_min_eig(&val);
        if min < -grid.tol * scale_of(&val) {
            failures.push(PrFailure {
                location: [s.re, s.im],
                reason: PrFailureReason::HermitianPartIndefinite,
                value: min,
            });
        }
        true
    };

    // F(-iw) = conj F(iw), so w >= 0 covers the axis
    let omegas = std::iter::once(0.0).chain(logspace(
        grid.omega_min,
        grid.omega_max,
        grid.boundary_points,
    ));
    for w in omegas {
        let s = Complex64::new(0.0, w);
        if near_pole(s) || !check_at(s, &mut failures) {
            skipped.push(w);
        } else {
            points += 1;
        }
    }

    let res = logspace(grid.re_min, grid.re_max, grid.interior_points);
    let ims: Vec<f64> = std::iter::once(0.0)
        .chain(logspace(
            grid.re_min,
            grid.re_max,
            grid.interior_points.saturating_sub(1),
        ))
        .collect();
    for &x in &res {
        for &y in &ims {
            let s = Complex64::new(x, y);
            if check_at(s, &mut failures) {
                points += 1;
            }
            if y == 0.0 {
                if let Some(val) = f.eval(s) {
                    let worst = val.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
                    if worst > grid.tol * scale_of(&val) {
                        failures.push(PrFailure {
                            location: [x, 0.0],
                            reason: PrFailureReason::NotRealOnReals,
                            value: worst,
                        });
                    }
                }
            }
        }
    }

    PrVerdict {
        is_pr: failures.is_empty(),
        failures,
        skipped,
        points_checked: points,
    }
}
