//! Simulation of the controlled system
//! `x(k+1) = a_1·f(x(k)) + a_2·f(x(k−T)) + ⋯ + a_N·f(x(k−(N−1)T))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cycles::Cycle;
use crate::error::{Error, Result};
use crate::gains::GainVector;
use crate::map::MapSpec;

/// Default convergence tolerance.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Convergence window, in multiples of the period.
pub const WINDOW_PERIODS: usize = 10;

/// A controlled run. `states` starts with the initial history, oldest first;
/// the last history entry is `x(0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub states: Vec<f64>,
    /// `u(k) = x(k+1) − f(x(k))` for `k = 0, 1, …`.
    pub controls: Vec<f64>,
    pub converged: bool,
    /// First `k` from which every state stays within `tol` of the orbit.
    pub settle_step: Option<usize>,
    /// The run stopped early on a non-finite or undefined state.
    pub diverged: bool,
    pub history_len: usize,
    pub target: Cycle,
}

impl Trajectory {
    /// `x(k)` for `k ≥ −(history_len − 1)`.
    pub fn state(&self, k: isize) -> Option<f64> {
        let i = k + self.history_len as isize - 1;
        usize::try_from(i)
            .ok()
            .and_then(|i| self.states.get(i).copied())
    }

    /// States `x(0), x(1), …`.
    pub fn evolved(&self) -> &[f64] {
        &self.states[self.history_len - 1..]
    }

    pub fn final_state(&self) -> f64 {
        *self
            .states
            .last()
            .expect("trajectory always holds its history")
    }

    /// Largest `|u(k)|` over the last `window` controls.
    pub fn max_recent_control(&self, window: usize) -> f64 {
        let from = self.controls.len().saturating_sub(window);
        self.controls[from..]
            .iter()
            .fold(0.0, |m, u| m.max(u.abs()))
    }
}

/// History of length `len` lying on the orbit, with `x(0)` at its anchor.
pub fn orbit_history(target: &Cycle, len: usize) -> Vec<f64> {
    let t = target.points.len() as isize;
    (0..len as isize)
        .map(|i| target.points[(i - (len as isize - 1)).rem_euclid(t) as usize])
        .collect()
}

/// Required history length `(N−1)T + 1`.
pub fn history_len(n: usize, t: usize) -> usize {
    (n - 1) * t + 1
}

pub fn simulate(
    m: &MapSpec,
    a: &GainVector,
    t: usize,
    init_history: &[f64],
    steps: usize,
    target: &Cycle,
    tol: f64,
) -> Result<Trajectory> {
    if t == 0 {
        return Err(Error::InvalidArgument("T must be at least 1".into()));
    }
    let h = history_len(a.len(), t);
    if init_history.len() != h {
        return Err(Error::InvalidArgument(format!(
            "initial history has {} values, (N-1)T+1 = {h} required",
            init_history.len()
        )));
    }
    if steps < WINDOW_PERIODS * t {
        return Err(Error::InvalidArgument(format!(
            "steps = {steps} is below the convergence window 10T = {}",
            WINDOW_PERIODS * t
        )));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol} must be positive"
        )));
    }
    if target.points.is_empty() {
        return Err(Error::InvalidArgument("target orbit is empty".into()));
    }
    if let Some(x) = init_history.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "initial value {x} is not finite"
        )));
    }

    let gains = a.as_slice();
    let mut states = Vec::with_capacity(h + steps);
    states.extend_from_slice(init_history);
    let mut images = Vec::with_capacity(h + steps);
    let mut controls = Vec::with_capacity(steps);
    let mut diverged = false;
    for x in init_history {
        match m.eval(*x) {
            Ok(y) => images.push(y),
            Err(_) => {
                diverged = true;
                break;
            }
        }
    }
    if !diverged {
        for _ in 0..steps {
            let c = states.len() - 1;
            let next: f64 = gains
                .iter()
                .enumerate()
                .map(|(j, aj)| aj * images[c - j * t])
                .sum();
            let image = if next.is_finite() {
                m.eval(next).ok()
            } else {
                None
            };
            let Some(image) = image else {
                diverged = true;
                break;
            };
            controls.push(next - images[c]);
            states.push(next);
            images.push(image);
        }
    }

    let settle_step = if diverged {
        None
    } else {
        let window = WINDOW_PERIODS * t;
        let outside = states.iter().rposition(|&x| target.distance(x) > tol);
        let first_inside = outside.map_or(0, |i| i + 1);
        (states.len() - first_inside >= window).then(|| first_inside.saturating_sub(h - 1))
    };
    Ok(Trajectory {
        converged: settle_step.is_some(),
        states,
        controls,
        settle_step,
        diverged,
        history_len: h,
        target: target.clone(),
    })
}

/// Fraction of constant initial histories, drawn uniformly from the map's
/// domain, whose run converges to `target`.
///
/// Sample `i` draws from ChaCha stream `i` under `seed`, so the result does
/// not depend on the number of worker threads.
#[allow(clippy::too_many_arguments)]
pub fn basin_fraction(
    m: &MapSpec,
    a: &GainVector,
    t: usize,
    target: &Cycle,
    samples: usize,
    steps: usize,
    tol: f64,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let (lo, hi) = m.domain();
    let h = history_len(a.len(), t);
    let hits = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let x0 = rng.gen_range(lo..=hi);
            simulate(m, a, t, &vec![x0; h], steps, target, tol).map(|tr| tr.converged as usize)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();
    Ok(hits as f64 / samples as f64)
}
