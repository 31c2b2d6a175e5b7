//! Simultaneous polynomial root finding (Aberth–Ehrlich) with a Newton
//! deflation fallback.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::Polynomial;

/// Sweep cap for the Aberth iteration.
pub const MAX_SWEEPS: usize = 500;
/// Relative size of a root update below which the root is considered settled.
pub const UPDATE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootMethod {
    Aberth,
    /// Aberth did not settle; roots came from Newton iteration with deflation.
    Deflation,
}

#[derive(Clone, Debug)]
pub struct RootSet {
    /// All roots with multiplicity, sorted by real then imaginary part.
    pub roots: Vec<Complex64>,
    pub method: RootMethod,
    pub sweeps: usize,
}

impl RootSet {
    pub fn reduced_precision(&self) -> bool {
        self.method == RootMethod::Deflation
    }

    pub fn max_modulus(&self) -> f64 {
        self.roots.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// All complex roots of `p`, counted with multiplicity.
pub fn poly_roots(p: &Polynomial) -> Result<RootSet> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if p.degree() == 0 {
        return Err(Error::InvalidArgument(
            "root finding needs degree at least 1".into(),
        ));
    }
    let (q, zeros) = p.strip_zero_roots();
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    let (mut method, mut sweeps) = (RootMethod::Aberth, 0);

    let coeffs: Vec<Complex64> = q
        .coeffs()
        .iter()
        .map(|&c| Complex64::new(c / q.leading(), 0.0))
        .collect();
    match q.degree() {
        0 => {}
        1 => roots.push(-coeffs[0]),
        _ => match aberth(&coeffs) {
            Some((found, n)) => {
                roots.extend(found);
                sweeps = n;
            }
            None => {
                roots.extend(newton_deflation(&coeffs));
                method = RootMethod::Deflation;
                sweeps = MAX_SWEEPS;
            }
        },
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(RootSet {
        roots,
        method,
        sweeps,
    })
}

/// `(p(z), p'(z), Σ|c_k||z|^k)` by Horner's rule; coefficients ascending.
fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let zero = Complex64::new(0.0, 0.0);
    let r = z.norm();
    coeffs
        .iter()
        .rev()
        .fold((zero, zero, 0.0), |(p, dp, bound), &c| {
            (p * z + c, dp * z + p, bound * r + c.norm())
        })
}

/// Aberth–Ehrlich iteration on a monic polynomial with nonzero constant
/// term. Returns `None` if it has not settled after [`MAX_SWEEPS`].
fn aberth(coeffs: &[Complex64]) -> Option<(Vec<Complex64>, usize)> {
    let n = coeffs.len() - 1;
    // Perturbed circle at the geometric-mean root modulus.
    let radius = coeffs[0].norm().powf(1.0 / n as f64);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + 0.4))
        .collect();
    let mut settled = vec![false; n];

    for sweep in 1..=MAX_SWEEPS {
        for i in 0..n {
            if settled[i] {
                continue;
            }
            let (p, dp, bound) = horner(coeffs, z[i]);
            if p.norm() <= 4.0 * f64::EPSILON * bound {
                settled[i] = true;
                continue;
            }
            let newton = if dp.norm() == 0.0 {
                // Stationary point; nudge off it.
                Complex64::new(1e-8 * (1.0 + z[i].norm()), 1e-8)
            } else {
                p / dp
            };
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let denom = Complex64::new(1.0, 0.0) - newton * repulsion;
            let step = if denom.norm() == 0.0 || !denom.is_finite() {
                newton
            } else {
                newton / denom
            };
            if !step.is_finite() {
                return None;
            }
            z[i] -= step;
            if step.norm() <= UPDATE_TOL * z[i].norm().max(1.0) {
                settled[i] = true;
            }
        }
        if settled.iter().all(|&s| s) {
            return Some((z, sweep));
        }
    }
    None
}

/// Newton iteration with deflation; each root is polished on the original
/// polynomial before being divided out.
fn newton_deflation(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut work = coeffs.to_vec();
    let mut roots = Vec::with_capacity(coeffs.len() - 1);
    while work.len() > 2 {
        let mut z = Complex64::new(0.4, 0.9);
        for _ in 0..200 {
            let (p, dp, _) = horner(&work, z);
            if dp.norm() == 0.0 {
                z += Complex64::new(1e-3, 1e-3);
                continue;
            }
            let step = p / dp;
            z -= step;
            if step.norm() <= UPDATE_TOL * z.norm().max(1.0) {
                break;
            }
        }
        for _ in 0..5 {
            let (p, dp, _) = horner(coeffs, z);
            if dp.norm() == 0.0 {
                break;
            }
            z -= p / dp;
        }
        roots.push(z);
        // Synthetic division by (λ − z), ascending storage.
        let m = work.len() - 1;
        let mut quotient = vec![Complex64::new(0.0, 0.0); m];
        let mut carry = work[m];
        for k in (0..m).rev() {
            quotient[k] = carry;
            carry = work[k] + carry * z;
        }
        work = quotient;
    }
    roots.push(-work[0] / work[1]);
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_roots(p: &Polynomial, expected: &[Complex64], tol: f64) {
        let set = poly_roots(p).unwrap();
        assert_eq!(set.roots.len(), expected.len());
        for e in expected {
            let nearest = set
                .roots
                .iter()
                .map(|z| (z - e).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < tol, "missing root {e}, got {:?}", set.roots);
        }
    }

    #[test]
    fn cube_roots_of_unity_pair() {
        let p = Polynomial::from_descending(&[1.0, 1.0, 1.0]);
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert_roots(&p, &[w, w.conj()], 1e-13);
        let set = poly_roots(&p).unwrap();
        for z in &set.roots {
            assert!((z.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn linear() {
        let mu = -2.5;
        let p = Polynomial::new(vec![-mu, 1.0]);
        assert_roots(&p, &[Complex64::new(mu, 0.0)], 1e-15);
    }

    #[test]
    fn cubic_unity() {
        let p = Polynomial::from_descending(&[1.0, 0.0, 0.0, -1.0]);
        let expected: Vec<_> = (0..3)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0))
            .collect();
        assert_roots(&p, &expected, 1e-13);
    }

    #[test]
    fn zero_roots_are_exact() {
        let p = Polynomial::monomial(1.0, 7);
        let set = poly_roots(&p).unwrap();
        assert_eq!(set.roots.len(), 7);
        assert!(set.roots.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn double_root() {
        let p = Polynomial::from_descending(&[1.0, -2.0, 1.0]);
        let set = poly_roots(&p).unwrap();
        for z in &set.roots {
            assert!((z - 1.0).norm() < 1e-7);
        }
    }

    #[test]
    fn residual_bound() {
        // (λ² + 0.5)(λ − 0.3)(λ + 0.9)(λ² − λ + 0.7)
        let factors = [
            Polynomial::from_descending(&[1.0, 0.0, 0.5]),
            Polynomial::from_descending(&[1.0, -0.3]),
            Polynomial::from_descending(&[1.0, 0.9]),
            Polynomial::from_descending(&[1.0, -1.0, 0.7]),
        ];
        let p = factors
            .iter()
            .fold(Polynomial::constant(1.0), |acc, f| &acc * f);
        let set = poly_roots(&p).unwrap();
        assert_eq!(set.method, RootMethod::Aberth);
        for z in &set.roots {
            assert!(p.eval_complex(*z).norm() <= 1e-10 * p.norm());
        }
    }

    #[test]
    fn deflation_fallback_agrees() {
        let p = Polynomial::from_descending(&[1.0, -1.0, 0.25, 2.0, -0.5]);
        let coeffs: Vec<Complex64> = p.coeffs().iter().map(|&c| Complex64::new(c, 0.0)).collect();
        let fallback = newton_deflation(&coeffs);
        let main = poly_roots(&p).unwrap();
        for z in &fallback {
            let nearest = main
                .roots
                .iter()
                .map(|w| (w - z).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-10);
        }
    }

    #[test]
    fn rejects_constants() {
        assert!(poly_roots(&Polynomial::zero()).is_err());
        assert!(poly_roots(&Polynomial::constant(3.0)).is_err());
    }
}
