//! Schur stability of the controlled characteristic polynomial, boundary
//! computations for the stable multiplier range, and minimal-memory search.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gains::{GainScheme, GainVector};
use crate::poly::Polynomial;
use crate::roots::poly_roots;
use crate::spectrum::char_poly_closed;

/// Default margin: Schur stable means spectral radius `< 1 − margin`.
pub const DEFAULT_MARGIN: f64 = 1e-9;
/// Half-width of the band around the unit circle reported as marginal.
pub const MARGINAL_BAND: f64 = 1e-6;
/// Relative closeness of `|a_0|` and `|a_n|` at which a Jury pivot is
/// flagged as degenerate.
const PIVOT_TOL: f64 = 1e-12;

/// Largest root modulus.
pub fn spectral_radius(p: &Polynomial) -> Result<f64> {
    Ok(poly_roots(p)?.max_modulus())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JuryVerdict {
    Stable,
    Unstable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JuryOutcome {
    pub verdict: JuryVerdict,
    /// Some reduction step had `|a_0| ≈ |a_n|`, i.e. a root on or within
    /// rounding of the unit circle; the root-modulus path should decide.
    pub degenerate: bool,
}

/// Jury table reduction.
///
/// Checks `p(1) > 0` and `(−1)^n·p(−1) > 0`, then repeatedly requires
/// `|a_0| < a_n` and replaces `p` by `(a_n·p(λ) − a_0·λ^n·p(1/λ))/λ`, whose
/// coefficients are the next pair of rows of the table.
pub fn jury_table(p: &Polynomial) -> Result<JuryOutcome> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if p.degree() == 0 {
        return Err(Error::InvalidArgument(
            "Jury test needs degree at least 1".into(),
        ));
    }
    let p = if p.leading() < 0.0 {
        p.scale(-1.0)
    } else {
        p.clone()
    };
    let n = p.degree();
    let unstable = |degenerate| JuryOutcome {
        verdict: JuryVerdict::Unstable,
        degenerate,
    };

    if p.eval(1.0) <= 0.0 {
        return Ok(unstable(p.eval(1.0) == 0.0));
    }
    let at_minus_one = if n % 2 == 0 {
        p.eval(-1.0)
    } else {
        -p.eval(-1.0)
    };
    if at_minus_one <= 0.0 {
        return Ok(unstable(at_minus_one == 0.0));
    }

    let mut row = p.into_coeffs();
    let mut degenerate = false;
    while row.len() > 1 {
        let m = row.len() - 1;
        let (a0, an) = (row[0], row[m]);
        let gap = an.abs() - a0.abs();
        if gap.abs() <= PIVOT_TOL * an.abs() {
            degenerate = true;
        }
        if gap <= 0.0 {
            return Ok(unstable(degenerate));
        }
        row = (0..m)
            .map(|k| an * row[k + 1] - a0 * row[m - k - 1])
            .collect();
    }
    Ok(JuryOutcome {
        verdict: JuryVerdict::Stable,
        degenerate,
    })
}

pub fn jury_stable(p: &Polynomial) -> Result<bool> {
    Ok(jury_table(p)?.verdict == JuryVerdict::Stable)
}

#[derive(Clone, Debug, Serialize)]
pub struct RootEntry {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
}

impl From<Complex64> for RootEntry {
    fn from(z: Complex64) -> Self {
        Self {
            re: z.re,
            im: z.im,
            modulus: z.norm(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub polynomial: Polynomial,
    pub spectral_radius: f64,
    pub schur_stable: bool,
    pub jury_verdict: bool,
    /// Spectral radius within [`MARGINAL_BAND`] of one; the boolean verdicts
    /// are not meaningful there.
    pub marginal: bool,
    pub roots: Vec<RootEntry>,
    /// Root finder fell back to deflation.
    pub reduced_precision: bool,
}

impl StabilityReport {
    pub fn new(p: &Polynomial, margin: f64) -> Result<Self> {
        let set = poly_roots(p)?;
        let rho = set.max_modulus();
        let jury = jury_table(p)?;
        Ok(Self {
            polynomial: p.clone(),
            spectral_radius: rho,
            schur_stable: rho < 1.0 - margin,
            jury_verdict: jury.verdict == JuryVerdict::Stable,
            marginal: (rho - 1.0).abs() <= MARGINAL_BAND,
            reduced_precision: set.reduced_precision(),
            roots: set.roots.into_iter().map(RootEntry::from).collect(),
        })
    }

    pub fn for_control(n: usize, t: usize, a: &GainVector, mu: f64, margin: f64) -> Result<Self> {
        Self::new(&char_poly_closed(n, t, a, mu)?, margin)
    }
}

/// Lower endpoint of the stable multiplier range for `T = 1` from the
/// boundary-crossing condition.
///
/// On `|λ| = 1` the equation `λ^N = μ·q(λ)` reads
/// `1/μ = Σ_k a_k·e^{−ikθ}`. The first crossing below `μ = 0` is at
/// `γ = 1/inf{Re Σ_k a_k e^{−ikθ} : Im Σ_k a_k e^{−ikθ} = 0}`.
/// Returns `−∞` when that infimum is non-negative.
pub fn gamma_t1(a: &GainVector, theta_grid: usize) -> Result<f64> {
    if theta_grid < 10_000 {
        return Err(Error::InvalidArgument(format!(
            "theta grid of {theta_grid} points is too coarse (need at least 10000)"
        )));
    }
    let sum = |theta: f64| -> Complex64 {
        a.as_slice()
            .iter()
            .enumerate()
            .map(|(k, &ak)| Complex64::from_polar(ak, -((k + 1) as f64) * theta))
            .sum()
    };
    let imag = |theta: f64| sum(theta).im;

    let h = 2.0 * PI / theta_grid as f64;
    // A zero counts only if Im changes sign across it on the grid scale;
    // even-order zeros (the locus touching the real axis) are contacts, not
    // crossings.
    let crosses = |theta: f64| imag(theta - 2.0 * h) * imag(theta + 2.0 * h) < 0.0;
    let mut zeros = Vec::new();
    let mut prev_theta = h;
    let mut prev = imag(prev_theta);
    for step in 2..theta_grid {
        let theta = step as f64 * h;
        let cur = imag(theta);
        let zero = if cur == 0.0 {
            Some(theta)
        } else if prev != 0.0 && prev.signum() != cur.signum() {
            let (mut lo, mut hi, mut f_lo) = (prev_theta, theta, prev);
            while hi - lo > 1e-10 {
                let mid = 0.5 * (lo + hi);
                let f_mid = imag(mid);
                if f_mid == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if f_mid.signum() == f_lo.signum() {
                    lo = mid;
                    f_lo = f_mid;
                } else {
                    hi = mid;
                }
            }
            Some(0.5 * (lo + hi))
        } else {
            None
        };
        if let Some(z) = zero.filter(|&z| crosses(z)) {
            zeros.push(z);
        }
        prev_theta = theta;
        prev = cur;
    }
    if zeros.is_empty() {
        return Err(Error::NoBoundaryCrossing);
    }
    let inf = zeros
        .iter()
        .map(|&theta| sum(theta).re)
        .fold(f64::INFINITY, f64::min);
    Ok(if inf >= 0.0 {
        f64::NEG_INFINITY
    } else {
        1.0 / inf
    })
}

/// Range of multipliers `μ` for which the controlled cycle is stable,
/// taken as the connected component of `(−∞, 1)` that contains `μ = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MuInterval {
    /// `−∞` when no crossing is found down to [`MU_SEARCH_FLOOR`]
    /// (serialised as `null`).
    #[serde(serialize_with = "serialize_bound")]
    pub lo: f64,
    pub hi: f64,
    pub scheme: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
}

fn serialize_bound<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

/// Search limit for the lower endpoint.
pub const MU_SEARCH_FLOOR: f64 = -1e6;
/// Endpoint tolerance for [`stable_mu_interval`].
pub const INTERVAL_TOL: f64 = 1e-7;

/// Stable-μ interval around `μ = 0` by marching outward and bisecting the
/// first crossing of spectral radius one.
///
/// Isolated contacts where a root touches the unit circle without leaving
/// the disc are not treated as endpoints.
pub fn stable_mu_interval(n: usize, t: usize, a: &GainVector) -> Result<MuInterval> {
    let stable =
        |mu: f64| -> Result<bool> { Ok(spectral_radius(&char_poly_closed(n, t, a, mu)?)? < 1.0) };
    let bisect = |mut inside: f64, mut outside: f64| -> Result<f64> {
        while (outside - inside).abs() > INTERVAL_TOL {
            let mid = 0.5 * (inside + outside);
            if stable(mid)? {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        Ok(0.5 * (inside + outside))
    };

    // Upward: μ = 1 always has the root λ = 1.
    let mut hi = 1.0;
    let mut last = 0.0;
    for k in 1..100 {
        let mu = k as f64 / 100.0;
        if !stable(mu)? {
            hi = bisect(last, mu)?;
            break;
        }
        last = mu;
    }
    if hi == 1.0 {
        hi = bisect(last, 1.0)?;
    }

    // Downward with a step growing with |μ|. A bracketed point where the
    // radius only touches one and the controller is stable just beyond it
    // is not a boundary.
    let mut lo = f64::NEG_INFINITY;
    let mut last = 0.0;
    while last > MU_SEARCH_FLOOR {
        let step = (0.01 * last.abs()).max(0.01);
        let mu = last - step;
        if !stable(mu)? {
            let edge = bisect(last, mu)?;
            let beyond = edge - 1e-3 * step;
            if stable(beyond)? {
                last = beyond;
                continue;
            }
            lo = edge;
            break;
        }
        last = mu;
    }
    Ok(MuInterval {
        lo,
        hi,
        scheme: "custom".into(),
        n,
        t,
    })
}

/// Verifies that the stable set on a μ-grid over `[lo, hi]` is exactly the
/// reported interval; returns the grid points where it is not.
pub fn interval_gaps(
    n: usize,
    t: usize,
    a: &GainVector,
    interval: &MuInterval,
    grid: &[f64],
) -> Result<Vec<f64>> {
    let mut bad = Vec::new();
    for &mu in grid {
        let inside =
            mu > interval.lo + 10.0 * INTERVAL_TOL && mu < interval.hi - 10.0 * INTERVAL_TOL;
        let outside =
            mu < interval.lo - 10.0 * INTERVAL_TOL || mu > interval.hi + 10.0 * INTERVAL_TOL;
        let stable = spectral_radius(&char_poly_closed(n, t, a, mu)?)? < 1.0;
        if (inside && !stable) || (outside && stable) {
            bad.push(mu);
        }
    }
    Ok(bad)
}

/// Smallest `N ≤ n_max` whose gains from `scheme` make `p` Schur stable with
/// spectral radius `< 1 − 1e−9`. Multipliers `μ ≥ 1` are never stabilisable
/// since `p(1) = 1 − μ ≤ 0`.
pub fn min_n_to_stabilize(
    t: usize,
    mu: f64,
    scheme: GainScheme,
    n_max: usize,
) -> Result<Option<usize>> {
    if t == 0 {
        return Err(Error::InvalidArgument("T must be at least 1".into()));
    }
    if mu >= 1.0 {
        return Ok(None);
    }
    for n in 1..=n_max {
        let a = scheme.gains(n)?;
        let rho = spectral_radius(&char_poly_closed(n, t, &a, mu)?)?;
        if rho < 1.0 - DEFAULT_MARGIN {
            return Ok(Some(n));
        }
    }
    Ok(None)
}
