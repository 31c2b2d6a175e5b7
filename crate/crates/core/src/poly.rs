//! Real-coefficient polynomials in λ, stored in ascending degree order.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `coeffs[k]` multiplies `λ^k`. Trailing (leading-degree) zeros are trimmed
/// on construction; the zero polynomial is stored as `[0.0]`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::new(vec![0.0])
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `c·λ^k`
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// Builds from coefficients listed highest degree first.
    pub fn from_descending(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().rev().copied().collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::zero();
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Integer power by repeated convolution.
    pub fn pow(&self, n: usize) -> Polynomial {
        (0..n).fold(Polynomial::constant(1.0), |acc, _| &acc * self)
    }

    /// `p(s·λ)`.
    pub fn compose_scale(&self, s: f64) -> Polynomial {
        let mut factor = 1.0;
        Polynomial::new(
            self.coeffs
                .iter()
                .map(|&c| {
                    let out = c * factor;
                    factor *= s;
                    out
                })
                .collect(),
        )
    }

    /// Divides out the highest power of λ that divides `self`, returning
    /// the cofactor and that power.
    pub fn strip_zero_roots(&self) -> (Polynomial, usize) {
        if self.is_zero() {
            return (self.clone(), 0);
        }
        let k = self.coeffs.iter().take_while(|&&c| c == 0.0).count();
        (Polynomial::new(self.coeffs[k..].to_vec()), k)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(0.0)
                        + rhs.coeffs.get(k).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial{:?}", self.coeffs)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 && !(first && k == 0) {
                continue;
            }
            let sign = if c < 0.0 { "-" } else { "+" };
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 if a == 1.0 => write!(f, "λ")?,
                1 => write!(f, "{a}λ")?,
                _ if a == 1.0 => write!(f, "λ^{k}")?,
                _ => write!(f, "{a}λ^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trims_leading_zeros() {
        let p = Polynomial::new(vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 1);
        assert!(Polynomial::new(vec![]).is_zero());
        assert!(Polynomial::new(vec![0.0, 0.0]).is_zero());
    }

    #[test]
    fn arithmetic() {
        let p = Polynomial::new(vec![1.0, 1.0]); // 1 + λ
        let q = Polynomial::new(vec![-1.0, 1.0]); // λ − 1
        assert_eq!((&p * &q).coeffs(), &[-1.0, 0.0, 1.0]);
        assert_eq!((&p + &q).coeffs(), &[0.0, 2.0]);
        assert!((&p - &p).is_zero());
        assert_eq!(p.pow(3).coeffs(), &[1.0, 3.0, 3.0, 1.0]);
        assert_eq!(p.pow(0).coeffs(), &[1.0]);
    }

    #[test]
    fn eval_and_derivative() {
        let p = Polynomial::from_descending(&[1.0, -2.0, 1.0]);
        assert_eq!(p.eval(1.0), 0.0);
        assert_eq!(p.eval(3.0), 4.0);
        assert_eq!(p.derivative().coeffs(), &[-2.0, 2.0]);
        assert!(Polynomial::constant(5.0).derivative().is_zero());
        let z = Complex64::new(0.0, 1.0);
        assert_eq!(p.eval_complex(z), Complex64::new(0.0, -2.0));
    }

    #[test]
    fn strip_and_scale() {
        let p = Polynomial::new(vec![0.0, 0.0, 3.0, 1.0]);
        let (q, k) = p.strip_zero_roots();
        assert_eq!(k, 2);
        assert_eq!(q.coeffs(), &[3.0, 1.0]);
        assert_eq!(q.compose_scale(2.0).coeffs(), &[3.0, 2.0]);
    }

    #[test]
    fn display() {
        let p = Polynomial::from_descending(&[1.0, 0.0, -0.5, 1.0]);
        assert_eq!(p.to_string(), "λ^3 - 0.5λ + 1");
        assert_eq!(Polynomial::zero().to_string(), "0");
    }
}
