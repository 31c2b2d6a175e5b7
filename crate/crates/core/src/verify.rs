//! Seeded self-checks of the structural identities, run by `dfc verify`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gains::GainVector;
use crate::poly::Polynomial;
use crate::roots::poly_roots;
use crate::spectrum::{
    build_jacobian, char_poly_closed, jacobian_via_chain, morgul_char_poly, morgul_jacobian_product,
};
use crate::stability::jury_stable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Characteristic polynomial of the tabulated Jacobian against the
    /// closed form.
    Lemma1,
    /// Tabulated Jacobian against the chain-rule product.
    Chain,
    /// Cyclic rotations of the multipliers leave the spectrum unchanged.
    Rotation,
    /// Jury verdict against root moduli away from the unit circle.
    Jury,
    /// Proportional control: closed form against the Jacobian product.
    Morgul,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Lemma1,
        Suite::Chain,
        Suite::Rotation,
        Suite::Jury,
        Suite::Morgul,
    ];

    pub fn tolerance(self) -> f64 {
        match self {
            Suite::Lemma1 | Suite::Rotation => 1e-8,
            Suite::Chain => 1e-12,
            Suite::Jury => 0.0,
            Suite::Morgul => 1e-10,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Lemma1 => "lemma1",
            Suite::Chain => "chain",
            Suite::Rotation => "rotation",
            Suite::Jury => "jury",
            Suite::Morgul => "morgul",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.to_string() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown suite `{s}` (expected lemma1, chain, rotation, jury, morgul or all)"
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    pub failures: usize,
    /// Largest error seen (mismatch count for `jury`).
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `|x − y| / max(1, |y|)`.
pub fn rel_err(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1.0)
}

/// Largest coefficientwise [`rel_err`]; a degree mismatch is infinite.
pub fn poly_rel_err(p: &Polynomial, q: &Polynomial) -> f64 {
    let (a, b) = (p.coeffs(), q.coeffs());
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| rel_err(*a.get(k).unwrap_or(&0.0), *b.get(k).unwrap_or(&0.0)))
        .fold(0.0, f64::max)
}

/// Uniform point of the probability simplex.
pub fn random_simplex(rng: &mut impl Rng, n: usize) -> Result<GainVector> {
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    GainVector::new(w.into_iter().map(|x| x / total).collect())
}

fn random_multipliers(rng: &mut impl Rng, t: usize) -> Vec<f64> {
    (0..t).map(|_| rng.gen_range(-3.0..=3.0)).collect()
}

pub fn run_suite(suite: Suite, trials: usize, seed: u64) -> Result<SuiteOutcome> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = suite.tolerance();
    let mut failures = 0;
    let mut max_error: f64 = 0.0;
    for _ in 0..trials {
        let err = match suite {
            Suite::Lemma1 => {
                let (n, t) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
                let a = random_simplex(&mut rng, n)?;
                let mus = random_multipliers(&mut rng, t);
                let tabulated = build_jacobian(n, t, &a, &mus)?.char_poly_faddeev()?;
                let closed = char_poly_closed(n, t, &a, mus.iter().product())?;
                poly_rel_err(&tabulated, &closed)
            }
            Suite::Chain => {
                let (n, t) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
                let a = random_simplex(&mut rng, n)?;
                let mus = random_multipliers(&mut rng, t);
                build_jacobian(n, t, &a, &mus)?.max_abs_diff(&jacobian_via_chain(n, t, &a, &mus)?)
            }
            Suite::Rotation => {
                let (n, t) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
                let a = random_simplex(&mut rng, n)?;
                let mut mus = random_multipliers(&mut rng, t);
                let base = jacobian_via_chain(n, t, &a, &mus)?.char_poly_faddeev()?;
                let mut worst: f64 = 0.0;
                for _ in 1..t {
                    mus.rotate_left(1);
                    let rotated = jacobian_via_chain(n, t, &a, &mus)?.char_poly_faddeev()?;
                    worst = worst.max(poly_rel_err(&rotated, &base));
                }
                worst
            }
            Suite::Jury => {
                let p = random_poly_off_circle(&mut rng);
                let by_roots = poly_roots(&p)?.max_modulus() < 1.0;
                f64::from(u8::from(jury_stable(&p)? != by_roots))
            }
            Suite::Morgul => {
                let t = rng.gen_range(1..=3);
                let mus = random_multipliers(&mut rng, t);
                let k = rng.gen_range(-2.0..=2.0);
                let product = morgul_jacobian_product(t, &mus, k)?.char_poly_faddeev()?;
                poly_rel_err(&morgul_char_poly(t, &mus, k)?, &product)
            }
        };
        if err.is_nan() || err > tol {
            failures += 1;
        }
        max_error = max_error.max(if err.is_nan() { f64::INFINITY } else { err });
    }
    Ok(SuiteOutcome {
        suite,
        trials,
        seed,
        failures,
        max_error,
        tolerance: tol,
        passed: failures == 0,
    })
}

/// Monic real polynomial of degree 1..=10 from random roots whose moduli
/// stay at least `1e−3` away from one.
fn random_poly_off_circle(rng: &mut impl Rng) -> Polynomial {
    let degree = rng.gen_range(1..=10);
    let mut roots: Vec<Complex64> = Vec::with_capacity(degree);
    while roots.len() < degree {
        let r: f64 = rng.gen_range(0.0..1.5);
        if (r - 1.0).abs() < 1e-3 {
            continue;
        }
        if degree - roots.len() >= 2 && rng.gen_bool(0.5) {
            let z = Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::PI));
            roots.push(z);
            roots.push(z.conj());
        } else {
            roots.push(Complex64::new(if rng.gen_bool(0.5) { r } else { -r }, 0.0));
        }
    }
    from_roots(&roots)
}

/// Real monic polynomial with the given (conjugate-closed) roots.
pub fn from_roots(roots: &[Complex64]) -> Polynomial {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &z in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (k, &ck) in c.iter().enumerate() {
            next[k + 1] += ck;
            next[k] -= ck * z;
        }
        c = next;
    }
    Polynomial::new(c.into_iter().map(|z| z.re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass() {
        for suite in Suite::ALL {
            let out = run_suite(suite, 50, 7).unwrap();
            assert!(out.passed, "{suite}: {out:?}");
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for suite in Suite::ALL {
            assert_eq!(suite.to_string().parse::<Suite>().unwrap(), suite);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn from_roots_expands() {
        let p = from_roots(&[Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.0)]);
        assert_eq!(p.coeffs(), &[-2.0, 1.0, 1.0]);
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            run_suite(Suite::Lemma1, 20, 3).unwrap(),
            run_suite(Suite::Lemma1, 20, 3).unwrap()
        );
    }
}
