//! Detection of periodic orbits of a scalar map and their multipliers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::MapSpec;

/// Bracket width at which bisection stops.
const BRACKET_WIDTH: f64 = 1e-12;
const NEWTON_ITERS: usize = 20;
/// Orbit residual accepted by [`multiplier_of`].
pub const ORBIT_CHECK_TOL: f64 = 1e-8;

/// A periodic orbit `x_0*, …, x_{T−1}*` with `f(x_j*) = x_{(j+1) mod T}*`,
/// anchored at its smallest point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cycle {
    #[serde(skip)]
    pub period: usize,
    pub points: Vec<f64>,
    /// `μ_j = f′(x_j*)`
    pub multipliers: Vec<f64>,
    /// `μ = μ_1⋯μ_T`
    #[serde(rename = "product")]
    pub multiplier_product: f64,
}

impl Cycle {
    /// Builds the orbit of `x0` under `f` and its multipliers.
    pub fn from_seed(m: &MapSpec, x0: f64, period: usize) -> Result<Self> {
        let mut points = Vec::with_capacity(period);
        let mut x = x0;
        for _ in 0..period {
            points.push(x);
            x = m.eval(x)?;
        }
        let anchor = points
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(i, _)| i);
        points.rotate_left(anchor);
        let multipliers = points
            .iter()
            .map(|&p| m.eval_deriv(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            period,
            multiplier_product: multipliers.iter().product(),
            points,
            multipliers,
        })
    }

    /// Largest `|f(x_j*) − x_{j+1}*| / (1 + |x_j*|)`.
    pub fn orbit_residual(&self, m: &MapSpec) -> Result<f64> {
        orbit_residual(m, &self.points)
    }

    /// Distance from `x` to the nearest orbit point.
    pub fn distance(&self, x: f64) -> f64 {
        self.points
            .iter()
            .map(|p| (x - p).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

fn orbit_residual(m: &MapSpec, points: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (j, &x) in points.iter().enumerate() {
        let next = points[(j + 1) % points.len()];
        worst = worst.max((m.eval(x)? - next).abs() / (1.0 + x.abs()));
    }
    Ok(worst)
}

/// Tolerances for [`find_cycles_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleSearch {
    /// Points closer than this are the same orbit.
    pub orbit_tol: f64,
    /// A root with `|f^d(x) − x|` below this for a proper divisor `d` of `T`
    /// has a smaller period.
    pub period_tol: f64,
}

impl Default for CycleSearch {
    fn default() -> Self {
        Self {
            orbit_tol: 1e-8,
            period_tol: 1e-8,
        }
    }
}

/// All orbits of minimal period `t` found on the map's domain.
pub fn find_cycles(m: &MapSpec, t: usize, grid_points: usize) -> Result<Vec<Cycle>> {
    find_cycles_with(m, t, grid_points, &CycleSearch::default())
}

/// Sign-change scan of `g(x) = f^T(x) − x` on a uniform grid, bisection,
/// Newton polish, minimal-period filtering and orbit deduplication.
///
/// Roots of even multiplicity (tangent bifurcations, multiplier `+1`) give
/// no sign change and can be missed; a finer grid narrows but does not
/// close that gap.
pub fn find_cycles_with(
    m: &MapSpec,
    t: usize,
    grid_points: usize,
    search: &CycleSearch,
) -> Result<Vec<Cycle>> {
    if t == 0 {
        return Err(Error::InvalidArgument("period must be at least 1".into()));
    }
    if grid_points < 100 {
        return Err(Error::InvalidArgument(format!(
            "grid of {grid_points} points is too coarse (need at least 100)"
        )));
    }
    let g = |x: f64| -> Option<f64> { m.iterate(x, t).ok().map(|y| y - x) };
    let (lo, hi) = m.domain();
    let h = (hi - lo) / (grid_points - 1) as f64;
    let xs: Vec<f64> = (0..grid_points)
        .map(|i| {
            if i + 1 == grid_points {
                hi
            } else {
                lo + i as f64 * h
            }
        })
        .collect();
    let gs: Vec<Option<f64>> = xs.iter().map(|&x| g(x)).collect();

    let mut roots = Vec::new();
    for i in 0..grid_points {
        if gs[i] == Some(0.0) {
            roots.push(xs[i]);
        }
        if i + 1 == grid_points {
            break;
        }
        if let (Some(a), Some(b)) = (gs[i], gs[i + 1]) {
            if a != 0.0 && b != 0.0 && a.signum() != b.signum() {
                if let Some(r) = bisect(&g, xs[i], xs[i + 1], a) {
                    roots.push(polish(m, t, r, xs[i], xs[i + 1]));
                }
            }
        }
    }

    let divisors: Vec<usize> = (1..t).filter(|d| t.is_multiple_of(*d)).collect();
    let mut cycles: Vec<Cycle> = Vec::new();
    for x in roots {
        if cycles.iter().any(|c| c.distance(x) <= search.orbit_tol) {
            continue;
        }
        let lower_period = divisors.iter().any(|&d| {
            m.iterate(x, d)
                .is_ok_and(|y| (y - x).abs() <= search.period_tol)
        });
        if lower_period {
            continue;
        }
        if let Ok(c) = Cycle::from_seed(m, x, t) {
            cycles.push(c);
        }
    }
    cycles.sort_by(|a, b| a.points[0].total_cmp(&b.points[0]));
    Ok(cycles)
}

fn bisect(g: &dyn Fn(f64) -> Option<f64>, mut a: f64, mut b: f64, mut ga: f64) -> Option<f64> {
    while b - a > BRACKET_WIDTH {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let gm = g(mid)?;
        if gm == 0.0 {
            return Some(mid);
        }
        if gm.signum() == ga.signum() {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    Some(0.5 * (a + b))
}

/// Newton on `f^T(x) − x` from the bisection root; keeps the bisection root
/// unless Newton converges inside the bracket to a smaller residual.
fn polish(m: &MapSpec, t: usize, start: f64, a: f64, b: f64) -> f64 {
    let residual_and_slope = |x: f64| -> Option<(f64, f64)> {
        let mut y = x;
        let mut slope = 1.0;
        for _ in 0..t {
            let d = m.eval_dual(y).ok()?;
            slope *= d.deriv;
            y = d.value;
        }
        Some((y - x, slope - 1.0))
    };
    let Some((g0, _)) = residual_and_slope(start) else {
        return start;
    };
    let mut x = start;
    for _ in 0..NEWTON_ITERS {
        let Some((gx, dg)) = residual_and_slope(x) else {
            return start;
        };
        if gx == 0.0 || dg == 0.0 {
            break;
        }
        let step = gx / dg;
        x -= step;
        if !x.is_finite() {
            return start;
        }
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
            break;
        }
    }
    let slack = 1e-9 * (1.0 + x.abs());
    match residual_and_slope(x) {
        Some((gx, _)) if x >= a - slack && x <= b + slack && gx.abs() <= g0.abs() => x,
        _ => start,
    }
}

/// Multipliers `f′(x_j)` along a verified orbit and their product.
pub fn multiplier_of(m: &MapSpec, points: &[f64]) -> Result<(Vec<f64>, f64)> {
    if points.is_empty() {
        return Err(Error::InvalidArgument(
            "an orbit needs at least one point".into(),
        ));
    }
    for (j, &x) in points.iter().enumerate() {
        let next = points[(j + 1) % points.len()];
        let residual = (m.eval(x)? - next).abs();
        if residual > ORBIT_CHECK_TOL * (1.0 + x.abs()) {
            return Err(Error::NotAnOrbit { index: j, residual });
        }
    }
    let mus = points
        .iter()
        .map(|&x| m.eval_deriv(x))
        .collect::<Result<Vec<_>>>()?;
    let product = mus.iter().product();
    Ok((mus, product))
}
