//! Switched linear systems `dx/dt = A_{sigma(t)} x`: quadratic-stability
//! checks, exact piecewise propagation and exponential-envelope verification.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::cones::{membership_l_h_with_tol, ConeMembership};
use crate::error::{Error, Result};
use crate::json::format_f64;
use crate::matcore::{definiteness, hermitian_eigenvalues, hermitian_function, matrix_exponential};
use crate::matrix::ComplexMatrix;
use crate::DEFAULT_TOL;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchedSystem {
    pub matrices: Vec<ComplexMatrix>,
    /// Common Lyapunov weight candidate, `-H > 0`.
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<ComplexMatrix>,
}

impl SwitchedSystem {
    pub fn new(matrices: Vec<ComplexMatrix>, h: Option<ComplexMatrix>) -> Result<Self> {
        let sys = Self { matrices, h };
        sys.dim()?;
        Ok(sys)
    }

    /// State dimension; errors on an empty or inconsistent family.
    pub fn dim(&self) -> Result<usize> {
        let first = self
            .matrices
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty matrix set".into()))?;
        let n = first.ensure_square("A_1")?;
        if self.matrices.iter().any(|a| a.shape() != (n, n)) {
            return Err(Error::Shape("all matrices must share one size".into()));
        }
        if let Some(h) = &self.h {
            if h.shape() != (n, n) {
                return Err(Error::Shape(format!(
                    "H is {:?}, family is {n}x{n}",
                    h.shape()
                )));
            }
        }
        Ok(n)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuadraticStability {
    pub contained: bool,
    pub members: Vec<ConeMembership>,
}

fn negative_weight(sys: &SwitchedSystem) -> Result<&ComplexMatrix> {
    let h = sys
        .h
        .as_ref()
        .ok_or_else(|| Error::Precondition("no H supplied".into()))?;
    if !definiteness(h)?.is_negative_definite() {
        return Err(Error::Precondition("-H must be positive definite".into()));
    }
    Ok(h)
}

/// Membership of every `A_i` in `L_H`; the family is contained when all are.
pub fn check_quadratic_stability(sys: &SwitchedSystem) -> Result<QuadraticStability> {
    check_quadratic_stability_with_tol(sys, DEFAULT_TOL)
}

pub fn check_quadratic_stability_with_tol(
    sys: &SwitchedSystem,
    tol: f64,
) -> Result<QuadraticStability> {
    sys.dim()?;
    let h = negative_weight(sys)?;
    let members = sys
        .matrices
        .iter()
        .map(|a| membership_l_h_with_tol(a, h, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuadraticStability {
        contained: members.iter().all(|m| m.in_open),
        members,
    })
}

/// Piecewise-constant switching rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum SwitchingPolicy {
    /// Cycles through `sequence` (all indices when empty), `dwell` seconds each.
    Fixed { sequence: Vec<usize>, dwell: f64 },
    /// Exponential dwell times with mean `mean_dwell`, uniform index choice.
    Random { seed: u64, mean_dwell: f64 },
    /// Every `dwell` seconds picks `argmax_i x*(A_i + A_i*)x`.
    Greedy { dwell: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchInterval {
    pub start: f64,
    pub end: f64,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
    pub switch_schedule: Vec<SwitchInterval>,
    pub norms: Vec<f64>,
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn apply(m: &ComplexMatrix, x: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum())
        .collect()
}

/// Index maximizing the instantaneous growth rate `x*(A_i + A_i*)x`
/// (lowest index on ties).
pub fn greedy_choice(sys: &SwitchedSystem, x: &[Complex64]) -> usize {
    let rate = |a: &ComplexMatrix| {
        let ax = apply(a, x);
        2.0 * x
            .iter()
            .zip(&ax)
            .map(|(xi, yi)| (xi.conj() * yi).re)
            .sum::<f64>()
    };
    let mut best = (0, f64::NEG_INFINITY);
    for (i, a) in sys.matrices.iter().enumerate() {
        let r = rate(a);
        if r > best.1 {
            best = (i, r);
        }
    }
    best.0
}

struct Propagators {
    dt: f64,
    full_step: Vec<ComplexMatrix>,
}

impl Propagators {
    fn new(sys: &SwitchedSystem, dt: f64) -> Result<Self> {
        let full_step = sys
            .matrices
            .iter()
            .map(|a| matrix_exponential(a, dt))
            .collect::<Result<_>>()?;
        Ok(Self { dt, full_step })
    }

    fn step(
        &self,
        sys: &SwitchedSystem,
        i: usize,
        tau: f64,
        x: &[Complex64],
    ) -> Result<Vec<Complex64>> {
        if (tau - self.dt).abs() <= 1e-12 * self.dt {
            Ok(apply(&self.full_step[i], x))
        } else {
            Ok(apply(&matrix_exponential(&sys.matrices[i], tau)?, x))
        }
    }
}

/// Simulates on `[0, horizon]`, sampling every `dt`. Propagation between
/// events is exact (`x <- exp(A_i tau) x`).
pub fn simulate(
    sys: &SwitchedSystem,
    policy: &SwitchingPolicy,
    x0: &[Complex64],
    horizon: f64,
    dt: f64,
) -> Result<Trajectory> {
    let n = sys.dim()?;
    let count = sys.matrices.len();
    if x0.len() != n {
        return Err(Error::Shape(format!(
            "x0 has {} entries, system has {n} states",
            x0.len()
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) || !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need dt > 0 and horizon >= 0 (dt = {dt}, horizon = {horizon})"
        )));
    }
    let dwell = match policy {
        SwitchingPolicy::Fixed { sequence, dwell } => {
            if let Some(bad) = sequence.iter().find(|&&i| i >= count) {
                return Err(Error::InvalidArgument(format!(
                    "sequence index {bad} out of range"
                )));
            }
            *dwell
        }
        SwitchingPolicy::Random { mean_dwell, .. } => *mean_dwell,
        SwitchingPolicy::Greedy { dwell } => *dwell,
    };
    if !(dwell > 0.0 && dwell.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "dwell must be positive, got {dwell}"
        )));
    }

    let steps = (horizon / dt).round() as usize;
    let props = Propagators::new(sys, dt)?;
    let sequence: Vec<usize> = match policy {
        SwitchingPolicy::Fixed { sequence, .. } if !sequence.is_empty() => sequence.clone(),
        _ => (0..count).collect(),
    };
    let mut rng = match policy {
        SwitchingPolicy::Random { seed, .. } => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    let exp = Exp::new(1.0 / dwell).map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let mut x = x0.to_vec();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut norms = Vec::with_capacity(steps + 1);
    let mut schedule: Vec<SwitchInterval> = Vec::new();
    let record = |t: f64,
                  x: &[Complex64],
                  times: &mut Vec<f64>,
                  states: &mut Vec<Vec<Complex64>>,
                  norms: &mut Vec<f64>| {
        times.push(t);
        states.push(x.to_vec());
        norms.push(norm(x));
    };

    let mut switch_count = 0usize;
    let mut choose = |x: &[Complex64], rng: &mut Option<ChaCha8Rng>| -> (usize, f64) {
        let out = match policy {
            SwitchingPolicy::Fixed { .. } => (sequence[switch_count % sequence.len()], dwell),
            SwitchingPolicy::Random { .. } => {
                let rng = rng.as_mut().expect("random policy has an rng");
                (rng.random_range(0..count), exp.sample(rng))
            }
            SwitchingPolicy::Greedy { .. } => (greedy_choice(sys, x), dwell),
        };
        switch_count += 1;
        out
    };

    record(0.0, &x, &mut times, &mut states, &mut norms);
    let (mut index, first_dwell) = choose(&x, &mut rng);
    let mut mode_start = 0.0;
    let mut next_switch = first_dwell;
    let mut t = 0.0;
    let snap = 1e-9 * dt;
    for k in 1..=steps {
        let t_sample = k as f64 * dt;
        while next_switch < t_sample - snap {
            x = props.step(sys, index, next_switch - t, &x)?;
            t = next_switch;
            schedule.push(SwitchInterval {
                start: mode_start,
                end: t,
                index,
            });
            let (i, d) = choose(&x, &mut rng);
            index = i;
            mode_start = t;
            next_switch = t + d;
        }
        x = props.step(sys, index, t_sample - t, &x)?;
        t = t_sample;
        record(t, &x, &mut times, &mut states, &mut norms);
        if (next_switch - t_sample).abs() <= snap && k < steps {
            schedule.push(SwitchInterval {
                start: mode_start,
                end: t,
                index,
            });
            let (i, d) = choose(&x, &mut rng);
            index = i;
            mode_start = t;
            next_switch = t + d;
        }
    }
    schedule.push(SwitchInterval {
        start: mode_start,
        end: t,
        index,
    });
    Ok(Trajectory {
        times,
        states,
        switch_schedule: schedule,
        norms,
    })
}

impl Trajectory {
    /// Columns `t, x_1_re, x_1_im, ..., norm`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let n = self.states.first().map_or(0, Vec::len);
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        for k in 1..=n {
            header.push(format!("x_{k}_re"));
            header.push(format!("x_{k}_im"));
        }
        header.push("norm".into());
        w.write_record(&header)?;
        for ((t, x), nrm) in self.times.iter().zip(&self.states).zip(&self.norms) {
            let mut row = vec![format_f64(*t)];
            for z in x {
                row.push(format_f64(z.re));
                row.push(format_f64(z.im));
            }
            row.push(format_f64(*nrm));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub alpha: f64,
    pub beta: f64,
    /// `(t0, t)` pairs breaking the bound, worst `t0` per `t`, truncated.
    pub violations: Vec<[f64; 2]>,
    pub violation_count: usize,
    pub max_ratio: f64,
    pub tolerance: f64,
}

const MAX_REPORTED_VIOLATIONS: usize = 1000;

/// Decay rate and overshoot of the quadratic envelope
/// `||x(t)|| <= beta ||x(t0)|| exp(alpha (t0 - t))` implied by `H`
/// (`-I` when absent).
pub fn envelope_constants(sys: &SwitchedSystem) -> Result<(f64, f64)> {
    let n = sys.dim()?;
    let p = match &sys.h {
        Some(h) => -negative_weight(sys).map(|_| h)?,
        None => ComplexMatrix::identity(n),
    };
    let p_eigs = hermitian_eigenvalues(&p);
    let beta = (p_eigs[n - 1] / p_eigs[0]).sqrt();
    let root_inv = hermitian_function(&p, |x| 1.0 / x.sqrt());
    let mut alpha = f64::INFINITY;
    for a in &sys.matrices {
        let pa = &p * a;
        let decay = &(&root_inv * &-(&pa + &pa.adjoint())) * &root_inv;
        alpha = alpha.min(hermitian_eigenvalues(&decay)[0] / 2.0);
    }
    Ok((alpha, beta))
}

pub fn verify_envelope(traj: &Trajectory, sys: &SwitchedSystem) -> Result<EnvelopeReport> {
    verify_envelope_with_tol(traj, sys, 1e-7)
}

/// Checks every sampled pair `t0 <= t` in one pass: with
/// `g(t) = ln ||x(t)|| + alpha t`, the worst ratio ending at `t` is
/// `exp(g(t) - min_{t0 <= t} g(t0)) / beta`.
pub fn verify_envelope_with_tol(
    traj: &Trajectory,
    sys: &SwitchedSystem,
    tol: f64,
) -> Result<EnvelopeReport> {
    let (alpha, beta) = envelope_constants(sys)?;
    let mut best: Option<(f64, f64)> = None;
    let mut max_ratio: f64 = 0.0;
    let mut violations = Vec::new();
    let mut violation_count = 0;
    for (&t, &nrm) in traj.times.iter().zip(&traj.norms) {
        if nrm == 0.0 {
            continue;
        }
        let g = nrm.ln() + alpha * t;
        if best.is_none_or(|(gmin, _)| g < gmin) {
            best = Some((g, t));
        }
        let (gmin, t0) = best.expect("set above");
        let ratio = (g - gmin).exp() / beta;
        max_ratio = max_ratio.max(ratio);
        if ratio > 1.0 + tol {
            violation_count += 1;
            if violations.len() < MAX_REPORTED_VIOLATIONS {
                violations.push([t0, t]);
            }
        }
    }
    Ok(EnvelopeReport {
        alpha,
        beta,
        violations,
        violation_count,
        max_ratio,
        tolerance: tol,
    })
}

/// Random member of `L_{-I}`, i.e. `A + A* < 0`, with margin `eps`.
pub fn random_contained_matrix<R: Rng + ?Sized>(n: usize, eps: f64, rng: &mut R) -> ComplexMatrix {
    let g = crate::matcore::real_gaussian_matrix(n, n, rng);
    let k = crate::matcore::real_gaussian_matrix(n, n, rng);
    let skew = (&k - &k.adjoint()).scale(0.5);
    -(&(&g.adjoint() * &g).scale(0.5) + &ComplexMatrix::identity(n).scale(eps)) + skew
}
