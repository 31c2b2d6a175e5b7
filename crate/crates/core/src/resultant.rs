//! Sylvester matrices, resultants and a repeated-root test.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::RealMatrix;
use crate::poly::Polynomial;

/// Default threshold for [`has_repeated_roots`] on
/// [`repeated_root_measure`].
pub const REPEATED_ROOT_TOL: f64 = 1e-10;

/// Sylvester matrix of `f` (degree `n`) and `g` (degree `m`): `m` rows of
/// `f`'s coefficients, highest degree first, each shifted one column right
/// of the previous, followed by `n` such rows of `g`'s.
///
/// With this layout `R(λ − a, λ − b) = a − b` and `R(λ² − 1, 2λ) = −4`.
pub fn sylvester_matrix(f: &Polynomial, g: &Polynomial) -> Result<RealMatrix> {
    if f.is_zero() || g.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let (n, m) = (f.degree(), g.degree());
    let size = n + m;
    if size == 0 {
        return Err(Error::InvalidArgument(
            "Sylvester matrix of two constants is empty".into(),
        ));
    }
    let mut s = RealMatrix::zeros(size, size);
    for (rows, poly, offset) in [(m, f, 0), (n, g, m)] {
        let desc: Vec<f64> = poly.coeffs().iter().rev().copied().collect();
        for r in 0..rows {
            for (c, &v) in desc.iter().enumerate() {
                s[(offset + r, r + c)] = v;
            }
        }
    }
    Ok(s)
}

/// Determinant of the Sylvester matrix.
pub fn resultant(f: &Polynomial, g: &Polynomial) -> Result<f64> {
    sylvester_matrix(f, g)?.determinant()
}

/// Ratio `σ_min / σ_max` of the singular values of the Sylvester matrix
/// `S(p̂, p̂′)`, a value in `[0, 1]` that vanishes exactly when `p` has a
/// repeated root (`det S = R(p̂, p̂′)`).
///
/// `p̂(λ) = p(s·λ)` with `s` the geometric mean of the root moduli, after
/// any factor `λ^k` has been divided out (`k ≥ 2` already means a repeated
/// root at zero and yields 0). The ratio is the relative distance of `S` to
/// the nearest singular matrix, so it is insensitive to rescaling of both
/// `λ` and the coefficients and does not underflow with the degree the way
/// the determinant does.
pub fn repeated_root_measure(p: &Polynomial) -> Result<f64> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let (core, zeros) = p.strip_zero_roots();
    if zeros >= 2 {
        return Ok(0.0);
    }
    let n = core.degree();
    if n <= 1 {
        return Ok(1.0);
    }
    let s = (core.coeffs()[0] / core.leading())
        .abs()
        .powf(1.0 / n as f64);
    let balanced = core.compose_scale(s);
    let balanced = balanced.scale(1.0 / balanced.norm());
    let sylvester = sylvester_matrix(&balanced, &balanced.derivative())?;
    let size = sylvester.rows();
    let dense = DMatrix::from_fn(size, size, |i, j| sylvester[(i, j)]);
    let sigma = dense.singular_values();
    let (lo, hi) = (sigma.min(), sigma.max());
    if hi.is_nan() || hi <= 0.0 || !lo.is_finite() {
        return Err(Error::InvalidArgument(
            "Sylvester matrix is not finite".into(),
        ));
    }
    Ok((lo / hi).min(1.0))
}

/// `true` iff [`repeated_root_measure`] is at most `tol`.
pub fn has_repeated_roots(p: &Polynomial, tol: f64) -> Result<bool> {
    Ok(repeated_root_measure(p)? <= tol)
}
