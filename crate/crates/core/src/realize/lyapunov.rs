use nalgebra::DMatrix;
use num_complex::Complex64;

use super::RealizationArray;
use crate::error::{Error, Result};
use crate::matcore::eigen;
use crate::matrix::ComplexMatrix;

/// Above this size the Kronecker system (`n^2 x n^2`) is replaced by a
/// diagonalization-based solve.
const KRONECKER_MAX: usize = 30;

/// Solves `A X + X A* = Q`.
pub fn lyapunov_solve(a: &ComplexMatrix, q: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.ensure_square("A")?;
    if q.shape() != (n, n) {
        return Err(Error::Shape(format!("Q is {:?}, A is {n}x{n}", q.shape())));
    }
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    if n <= KRONECKER_MAX {
        kronecker(a, q)
    } else {
        diagonalized(a, q)
    }
}

fn kronecker(a: &ComplexMatrix, q: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.nrows();
    // column-major vec: vec(AX) = (I kron A) vec X, vec(X A*) = (conj(A) kron I) vec X
    let eye = DMatrix::<Complex64>::identity(n, n);
    let op = eye.kronecker(a.inner()) + a.inner().map(|z| z.conj()).kronecker(&eye);
    let rhs = DMatrix::from_column_slice(n * n, 1, q.inner().as_slice());
    let probe = ComplexMatrix::wrap(op.clone());
    if crate::matcore::is_singular(&probe, 1e-13) {
        return Err(Error::Singular(
            "Lyapunov operator is singular (A has eigenvalues summing to zero)".into(),
        ));
    }
    let x = op
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("Lyapunov operator is singular".into()))?;
    Ok(ComplexMatrix::wrap(DMatrix::from_column_slice(
        n,
        n,
        x.as_slice(),
    )))
}

fn diagonalized(a: &ComplexMatrix, q: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.nrows();
    let (vals, v) = eigen(a)?;
    let v_inv = v.try_inverse()?;
    let f = &(&v_inv * q) * &v_inv.adjoint();
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let denom = vals[i] + vals[j].conj();
            if denom.norm() <= 1e-13 * (vals[i].norm() + vals[j].norm()).max(1.0) {
                return Err(Error::Singular("Lyapunov operator is singular".into()));
            }
            y[(i, j)] = f[(i, j)] / denom;
        }
    }
    Ok(&(&v * &ComplexMatrix::wrap(y)) * &v.adjoint())
}

fn hermitian_part(x: ComplexMatrix) -> ComplexMatrix {
    (&x + &x.adjoint()).scale(0.5)
}

/// `W` with `A W + W A* = -B B*`.
pub fn controllability_gramian(r: &RealizationArray) -> Result<ComplexMatrix> {
    let bb = r.b() * &r.b().adjoint();
    Ok(hermitian_part(lyapunov_solve(r.a(), &-&bb)?))
}

/// `M` with `A* M + M A = -C* C`.
pub fn observability_gramian(r: &RealizationArray) -> Result<ComplexMatrix> {
    let cc = &r.c().adjoint() * r.c();
    Ok(hermitian_part(lyapunov_solve(&r.a().adjoint(), &-&cc)?))
}
