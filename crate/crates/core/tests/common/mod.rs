//! Test-side oracles, independent of the library's own implementations.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;

use dfc_core::GainVector;

/// `|x − y| / max(1, |y|)`.
pub fn rel_err(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1.0)
}

/// Largest coefficientwise relative error between ascending coefficient
/// lists, padding the shorter with zeros.
pub fn coeff_rel_err(got: &[f64], want: &[f64]) -> f64 {
    let n = got.len().max(want.len());
    (0..n)
        .map(|k| rel_err(*got.get(k).unwrap_or(&0.0), *want.get(k).unwrap_or(&0.0)))
        .fold(0.0, f64::max)
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Ascending coefficients of `λ^{(N−1)T+1} − μ·(a_1 λ^{N−1} + … + a_N)^T`,
/// expanded by repeated convolution.
pub fn closed_form(a: &[f64], t: usize, mu: f64) -> Vec<f64> {
    let n = a.len();
    let q: Vec<f64> = a.iter().rev().copied().collect();
    let mut qt = vec![1.0];
    for _ in 0..t {
        qt = convolve(&qt, &q);
    }
    let m = (n - 1) * t + 1;
    let mut p = vec![0.0; m + 1];
    for (k, c) in qt.iter().enumerate() {
        p[k] -= mu * c;
    }
    p[m] += 1.0;
    p
}

/// Uniform point of the probability simplex, as a gain vector.
pub fn simplex(rng: &mut impl Rng, n: usize) -> GainVector {
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    GainVector::new(w.iter().map(|x| x / total).collect()).expect("normalised weights")
}

/// Monic real polynomial (ascending) with the given conjugate-closed roots.
pub fn from_roots(roots: &[Complex64]) -> Vec<f64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &z in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (k, &ck) in c.iter().enumerate() {
            next[k + 1] += ck;
            next[k] -= ck * z;
        }
        c = next;
    }
    c.into_iter().map(|z| z.re).collect()
}

/// Dense square matrix product.
pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Smallest distance between two entries of `z`.
pub fn min_pairwise_distance(z: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            best = best.min((z[i] - z[j]).norm());
        }
    }
    best
}

/// The explicit 7×7 Jacobian for `N = T = 3`.
pub fn explicit_n3_t3(a: [f64; 3], mu: [f64; 3]) -> Vec<Vec<f64>> {
    let [a1, a2, a3] = a;
    let [m1, m2, m3] = mu;
    vec![
        vec![0., 0., 0., 1., 0., 0., 0.],
        vec![0., 0., 0., 0., 1., 0., 0.],
        vec![0., 0., 0., 0., 0., 1., 0.],
        vec![0., 0., 0., 0., 0., 0., 1.],
        vec![a3 * m1, 0., 0., a2 * m1, 0., 0., a1 * m1],
        vec![
            a1 * a3 * m1 * m2,
            a3 * m2,
            0.,
            a1 * a2 * m1 * m2,
            a2 * m2,
            0.,
            a1 * a1 * m1 * m2,
        ],
        vec![
            a1 * a1 * a3 * m1 * m2 * m3,
            a1 * a3 * m2 * m3,
            a3 * m3,
            a1 * a1 * a2 * m1 * m2 * m3,
            a1 * a2 * m2 * m3,
            a2 * m3,
            a1 * a1 * a1 * m1 * m2 * m3,
        ],
    ]
}

/// Random real polynomial for the repeated-root classifier: roots are
/// jittered points on a circle of random radius, conjugate-closed. When
/// `repeated` is set one root is duplicated with an offset of at most
/// `1e−7`. Returns ascending coefficients and the roots used.
pub fn circle_poly(rng: &mut impl Rng, repeated: bool) -> (Vec<f64>, Vec<Complex64>) {
    let degree: usize = rng.gen_range(2..=10);
    let radius = rng.gen_range(0.3..3.0);
    // Distinct base roots: either a real root to double (one extra slot) or
    // a complex pair to double (two extra slots).
    let double_pair = repeated && degree >= 4 && rng.gen_bool(0.5);
    let base = match (repeated, double_pair) {
        (false, _) => degree,
        (true, false) => degree - 1,
        (true, true) => degree - 2,
    };
    let mut roots = circle_roots(rng, base, radius, repeated && !double_pair);
    if repeated {
        let delta = rng.gen_range(0.0..=1e-7);
        if double_pair {
            let z = *roots.iter().find(|z| z.im > 0.0).expect("base has a pair");
            let w = z + Complex64::new(delta, 0.0);
            roots.push(w);
            roots.push(w.conj());
        } else {
            let r = *roots
                .iter()
                .find(|z| z.im == 0.0)
                .expect("base has a real root");
            roots.push(r + Complex64::new(delta, 0.0));
        }
    }
    (from_roots(&roots), roots)
}

fn circle_roots(rng: &mut impl Rng, count: usize, radius: f64, need_real: bool) -> Vec<Complex64> {
    let mut reals = count % 2;
    if need_real && reals == 0 {
        reals = 2;
    }
    let pairs = (count - reals) / 2;
    let mut roots = Vec::with_capacity(count);
    let spacing = std::f64::consts::PI / (pairs + 1) as f64;
    for k in 0..pairs {
        let theta = spacing * (k + 1) as f64 + rng.gen_range(-0.25..0.25) * spacing;
        let z = Complex64::from_polar(radius * rng.gen_range(0.9..1.1), theta);
        roots.push(z);
        roots.push(z.conj());
    }
    let signs = [1.0, -1.0];
    for s in signs.iter().take(reals) {
        roots.push(Complex64::new(s * radius * rng.gen_range(0.9..1.1), 0.0));
    }
    roots
}
