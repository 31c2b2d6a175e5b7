//! Control gains `a_1..a_N` and the generators for the standard schemes.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Polynomial;

/// Allowed deviation of `Σ a_j` from 1.
pub const GAIN_SUM_TOL: f64 = 1e-12;

/// Gain coefficients `a_1..a_N` of the delayed control, summing to one.
///
/// `a_1` weights the current image `f(x(k))`, `a_j` the image `(j−1)·T`
/// steps back.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct GainVector(Vec<f64>);

impl GainVector {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one gain is required".into(),
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("gains must be finite".into()));
        }
        let sum: f64 = coeffs.iter().sum();
        if (sum - 1.0).abs() > GAIN_SUM_TOL {
            return Err(Error::GainSum { sum });
        }
        Ok(Self(coeffs))
    }

    /// `a_j = 1/N` for every `j`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    /// `a_j = 2·tan(π/(2(N+1)))·(1 − j/(N+1))·sin(πj/(N+1))`, which sums to
    /// one identically.
    pub fn dk2013(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        let m = (n + 1) as f64;
        let lead = 2.0 * (PI / (2.0 * m)).tan();
        let coeffs: Vec<f64> = (1..=n)
            .map(|j| {
                let j = j as f64;
                lead * (1.0 - j / m) * (PI * j / m).sin()
            })
            .collect();
        let sum: f64 = coeffs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::GainSum { sum });
        }
        Self::new(coeffs)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `a_j` with the one-based index used for the control law.
    pub fn get(&self, j: usize) -> f64 {
        self.0[j - 1]
    }

    /// `q(λ) = a_1·λ^{N−1} + … + a_{N−1}·λ + a_N`.
    pub fn gain_polynomial(&self) -> Polynomial {
        Polynomial::new(self.0.iter().rev().copied().collect())
    }
}

impl<'de> Deserialize<'de> for GainVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        GainVector::new(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GainScheme {
    Uniform,
    Dk2013,
}

impl GainScheme {
    pub fn gains(self, n: usize) -> Result<GainVector> {
        match self {
            GainScheme::Uniform => GainVector::uniform(n),
            GainScheme::Dk2013 => GainVector::dk2013(n),
        }
    }
}

impl fmt::Display for GainScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GainScheme::Uniform => "uniform",
            GainScheme::Dk2013 => "dk2013",
        })
    }
}

impl FromStr for GainScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(GainScheme::Uniform),
            "dk2013" => Ok(GainScheme::Dk2013),
            other => Err(Error::InvalidArgument(format!(
                "unknown gain scheme `{other}` (expected uniform or dk2013)"
            ))),
        }
    }
}
