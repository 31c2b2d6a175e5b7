//! Jacobians and characteristic polynomials of the controlled system.
//!
//! The controlled system with memory `N` about a `T`-cycle lives on
//! `ℝ^M`, `M = (N−1)·T + 1`. One step of the lifted map `G` shifts the state
//! and appends `a_1·f(x_M) + a_2·f(x_{M−T}) + … + a_N·f(x_1)`; the return map
//! is `F = G^T`. At the lifted cycle every term of that sum is evaluated at
//! the same orbit point, so the step Jacobian carries a single multiplier.
//!
//! Two routes to the Jacobian of `F` are provided: the chain-rule product
//! ([`jacobian_via_chain`], the definition) and the explicit entry table
//! ([`build_jacobian`]). Its characteristic polynomial has the closed form
//! `λ^M − μ·q(λ)^T` ([`char_poly_closed`]) where `μ` is the product of the
//! cycle multipliers and `q` the gain polynomial.

use crate::error::{Error, Result};
use crate::gains::GainVector;
use crate::linalg::RealMatrix;
use crate::poly::Polynomial;

/// State dimension `(N−1)·T + 1` of the lifted system.
pub fn state_dim(n: usize, t: usize) -> usize {
    (n - 1) * t + 1
}

fn check_shape(n: usize, t: usize, a: &GainVector) -> Result<()> {
    if n == 0 || t == 0 {
        return Err(Error::InvalidArgument("N and T must be at least 1".into()));
    }
    if a.len() != n {
        return Err(Error::InvalidArgument(format!(
            "expected {n} gains, got {}",
            a.len()
        )));
    }
    Ok(())
}

/// `p(λ) = λ^{(N−1)T+1} − μ·(a_1·λ^{N−1} + … + a_N)^T`.
pub fn char_poly_closed(n: usize, t: usize, a: &GainVector, mu: f64) -> Result<Polynomial> {
    check_shape(n, t, a)?;
    let q_pow = a.gain_polynomial().pow(t);
    let lead = Polynomial::monomial(1.0, state_dim(n, t));
    Ok(&lead - &q_pow.scale(mu))
}

/// Jacobian of a single step of the lifted map at a cycle point with
/// derivative `mu_at_step`.
pub fn step_jacobian(n: usize, t: usize, a: &GainVector, mu_at_step: f64) -> Result<RealMatrix> {
    check_shape(n, t, a)?;
    let m = state_dim(n, t);
    let mut s = RealMatrix::zeros(m, m);
    for i in 0..m - 1 {
        s[(i, i + 1)] = 1.0;
    }
    // a_k multiplies f(x_{M−(k−1)T}).
    for k in 1..=n {
        let col = m - (k - 1) * t;
        s[(m - 1, col - 1)] += a.get(k) * mu_at_step;
    }
    Ok(s)
}

/// `S(μ_T)·…·S(μ_1)`: the chain rule along the orbit, earliest step applied
/// first.
pub fn jacobian_via_chain(
    n: usize,
    t: usize,
    a: &GainVector,
    multipliers: &[f64],
) -> Result<RealMatrix> {
    check_shape(n, t, a)?;
    check_multipliers(t, multipliers)?;
    let mut acc = RealMatrix::identity(state_dim(n, t));
    for &mu in multipliers {
        acc = &step_jacobian(n, t, a, mu)? * &acc;
    }
    Ok(acc)
}

fn check_multipliers(t: usize, multipliers: &[f64]) -> Result<()> {
    if multipliers.len() != t {
        return Err(Error::InvalidArgument(format!(
            "expected {t} multipliers, got {}",
            multipliers.len()
        )));
    }
    Ok(())
}

/// Jacobian of `F = G^T` at the lifted cycle from the explicit entry table.
///
/// With one-based `i, j`, `B = (N−2)·T`, `s ∈ 1..=T` with `j ≡ s (mod T)`:
///
/// * `J(i, j) = 1` if `j = i + T`;
/// * `J(i, j) = a_{N−⌊(j−1)/T⌋} · a_1^{i−B−(s+1)} · μ_s⋯μ_{i−B−1}` if
///   `i ≥ B + 2` and `(j−1) mod T ≤ i − (B + 2)`;
/// * `0` otherwise.
pub fn build_jacobian(
    n: usize,
    t: usize,
    a: &GainVector,
    multipliers: &[f64],
) -> Result<RealMatrix> {
    check_shape(n, t, a)?;
    check_multipliers(t, multipliers)?;
    let m = state_dim(n, t);
    let base = (n as i64 - 2) * t as i64;
    let a1 = a.get(1);
    let mut jac = RealMatrix::zeros(m, m);
    for i in 1..=m {
        for j in 1..=m {
            let value = if j == i + t {
                1.0
            } else if i as i64 >= base + 2 {
                let residue = (j - 1) % t;
                // Last orbit step feeding row i.
                let upto = (i as i64 - base - 1) as usize;
                if residue + 1 > upto {
                    continue;
                }
                let s = residue + 1;
                let gain = a.get(n - (j - 1) / t);
                let product: f64 = multipliers[s - 1..upto].iter().product();
                gain * a1.powi((upto - s) as i32) * product
            } else {
                continue;
            };
            jac[(i - 1, j - 1)] = value;
        }
    }
    Ok(jac)
}

/// Single-step Jacobian of the proportional delayed control
/// `G(z) = (z_2, …, z_{T+1}, f(z_{T+1}) + K·(z_{T+1} − z_1))`.
pub fn morgul_step_jacobian(t: usize, mu_at_step: f64, k: f64) -> RealMatrix {
    let m = t + 1;
    let mut s = RealMatrix::zeros(m, m);
    for i in 0..m - 1 {
        s[(i, i + 1)] = 1.0;
    }
    s[(m - 1, 0)] -= k;
    s[(m - 1, m - 1)] += mu_at_step + k;
    s
}

/// Jacobian of the `T`-fold proportional-control map along the orbit.
pub fn morgul_jacobian_product(t: usize, multipliers: &[f64], k: f64) -> Result<RealMatrix> {
    if t == 0 {
        return Err(Error::InvalidArgument("T must be at least 1".into()));
    }
    check_multipliers(t, multipliers)?;
    let mut acc = RealMatrix::identity(t + 1);
    for &mu in multipliers {
        acc = &morgul_step_jacobian(t, mu, k) * &acc;
    }
    Ok(acc)
}

/// Characteristic polynomial of the proportional control
/// `λ^{T+1} + c_T·λ^T + … + c_0` from the explicit coefficient formula
/// `c_{T−ℓ} = −(−K)^ℓ · Σ_{|S|=ℓ} Π_{i∉S} (μ_i + K)`.
///
/// The inner sum over `ℓ`-subsets of the product over the complement is the
/// elementary symmetric polynomial `e_{T−ℓ}` of `μ_i + K`.
pub fn morgul_char_poly(t: usize, multipliers: &[f64], k: f64) -> Result<Polynomial> {
    if t == 0 {
        return Err(Error::InvalidArgument("T must be at least 1".into()));
    }
    check_multipliers(t, multipliers)?;
    // e[r] = r-th elementary symmetric polynomial of the shifted multipliers.
    let mut e = vec![0.0; t + 1];
    e[0] = 1.0;
    for (count, &mu) in multipliers.iter().enumerate() {
        let b = mu + k;
        for r in (1..=count + 1).rev() {
            e[r] += b * e[r - 1];
        }
    }
    let mut coeffs = vec![0.0; t + 2];
    coeffs[t + 1] = 1.0;
    for ell in 0..=t {
        coeffs[t - ell] = -(-k).powi(ell as i32) * e[t - ell];
    }
    Ok(Polynomial::new(coeffs))
}
