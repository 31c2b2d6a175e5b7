mod common;

use std::collections::BTreeMap;

use num_complex::Complex64;
use proptest::prelude::*;

use common::{closed_form, coeff_rel_err, from_roots};
use dfc_core::cycles::find_cycles;
use dfc_core::map::Builtin;
use dfc_core::roots::poly_roots;
use dfc_core::sim::{history_len, orbit_history, simulate};
use dfc_core::spectrum::{build_jacobian, char_poly_closed, jacobian_via_chain};
use dfc_core::stability::{jury_stable, min_n_to_stabilize, spectral_radius, stable_mu_interval};
use dfc_core::{GainScheme, GainVector, MapSpec, Polynomial};

fn gains(weights: &[f64]) -> GainVector {
    let total: f64 = weights.iter().sum();
    GainVector::new(weights.iter().map(|w| w / total).collect()).unwrap()
}

prop_compose! {
    fn control_case()(n in 1usize..=4, t in 1usize..=4)
        (w in prop::collection::vec(0.01f64..1.0, n),
         mus in prop::collection::vec(-3.0f64..3.0, t),
         t in Just(t)) -> (GainVector, usize, Vec<f64>) {
        (gains(&w), t, mus)
    }
}

fn expression() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        (0.1f64..5.0).prop_map(|v| format!("{v:.3}")),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) * ({b})")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (inner.clone(), 0i32..=3).prop_map(|(a, k)| format!("({a})^{k}")),
            (
                inner,
                prop::sample::select(vec!["sin", "cos", "exp", "tanh"])
            )
                .prop_map(|(a, f)| format!("{f}({a})")),
        ]
    })
}

fn central_difference(m: &MapSpec, x: f64) -> f64 {
    let h = 1e-6 * (1.0 + x.abs());
    (m.eval(x + h).unwrap() - m.eval(x - h).unwrap()) / (2.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn builtin_derivative_matches_finite_difference(
        kind in 0usize..3, p in 0.5f64..4.0, x in -1.5f64..1.5,
    ) {
        let b = match kind {
            0 => Builtin::Logistic { r: p },
            1 => Builtin::Quadratic { c: -p / 2.0 },
            _ => Builtin::Cubic { b: p },
        };
        let m = MapSpec::builtin(b);
        let d = m.eval_deriv(x).unwrap();
        let fd = central_difference(&m, x);
        prop_assert!((d - fd).abs() <= 1e-6 * (1.0 + d.abs()), "{m} at {x}: {d} vs {fd}");
    }

    #[test]
    fn expression_derivative_matches_finite_difference(src in expression(), x in -1.0f64..1.0) {
        let m = MapSpec::parse(&src, &BTreeMap::new()).unwrap();
        let d = m.eval_deriv(x).unwrap();
        let fd = central_difference(&m, x);
        let scale = 1.0 + d.abs() + m.eval(x).unwrap().abs();
        prop_assert!((d - fd).abs() <= 1e-5 * scale, "{src} at {x}: {d} vs {fd}");
    }

    #[test]
    fn expression_display_round_trips(src in expression(), x in -2.0f64..2.0) {
        let first = MapSpec::parse(&src, &BTreeMap::new()).unwrap();
        let shown = first.to_string();
        let second = MapSpec::parse(&shown, &BTreeMap::new()).unwrap();
        prop_assert_eq!(&second.to_string(), &shown);
        prop_assert_eq!(second.eval(x).unwrap(), first.eval(x).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn tabulated_jacobian_has_closed_form_polynomial((a, t, mus) in control_case()) {
        let n = a.len();
        let got = build_jacobian(n, t, &a, &mus).unwrap().char_poly_faddeev().unwrap();
        let want = closed_form(a.as_slice(), t, mus.iter().product());
        prop_assert!(coeff_rel_err(got.coeffs(), &want) <= 1e-8);
    }

    #[test]
    fn tabulated_jacobian_is_chain_product((a, t, mus) in control_case()) {
        let n = a.len();
        let table = build_jacobian(n, t, &a, &mus).unwrap();
        let chain = jacobian_via_chain(n, t, &a, &mus).unwrap();
        prop_assert!(table.max_abs_diff(&chain) <= 1e-12);
    }

    #[test]
    fn spectrum_is_rotation_invariant((a, t, mus) in control_case(), shift in 0usize..4) {
        let n = a.len();
        let base = jacobian_via_chain(n, t, &a, &mus).unwrap().char_poly_faddeev().unwrap();
        let mut rotated = mus.clone();
        rotated.rotate_left(shift % t);
        let other = jacobian_via_chain(n, t, &a, &rotated).unwrap().char_poly_faddeev().unwrap();
        prop_assert!(coeff_rel_err(other.coeffs(), base.coeffs()) <= 1e-8);
    }

    #[test]
    fn multipliers_at_least_one_are_unstable((a, t, _mus) in control_case(), mu in 1.0f64..20.0) {
        let p = char_poly_closed(a.len(), t, &a, mu).unwrap();
        prop_assert!(!jury_stable(&p).unwrap());
        prop_assert!(spectral_radius(&p).unwrap() >= 1.0 - 1e-12);
        prop_assert!(p.eval(1.0) <= 1e-12);
    }
}

#[derive(Clone, Debug)]
enum RootDraw {
    Real(f64),
    Pair(f64, f64),
}

fn off_circle_modulus() -> impl Strategy<Value = f64> {
    prop_oneof![0.0f64..0.999, 1.001f64..1.6]
}

fn root_draws() -> impl Strategy<Value = Vec<RootDraw>> {
    prop::collection::vec(
        prop_oneof![
            (off_circle_modulus(), any::<bool>()).prop_map(|(r, neg)| RootDraw::Real(if neg {
                -r
            } else {
                r
            })),
            (off_circle_modulus(), 0.0f64..std::f64::consts::PI)
                .prop_map(|(r, th)| RootDraw::Pair(r, th)),
        ],
        1..=5,
    )
}

fn expand(draws: &[RootDraw]) -> Vec<Complex64> {
    let mut roots = Vec::new();
    for d in draws {
        match *d {
            RootDraw::Real(r) => roots.push(Complex64::new(r, 0.0)),
            RootDraw::Pair(r, th) => {
                let z = Complex64::from_polar(r, th);
                roots.push(z);
                roots.push(z.conj());
            }
        }
    }
    roots
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn jury_agrees_with_generating_roots(draws in root_draws()) {
        let roots = expand(&draws);
        let inside = roots.iter().all(|z| z.norm() < 1.0);
        let p = Polynomial::new(from_roots(&roots));
        prop_assert_eq!(jury_stable(&p).unwrap(), inside);
    }

    #[test]
    fn roots_reconstruct_polynomial(
        coeffs in prop::collection::vec(-1.0f64..1.0, 2..=12), lead in 0.5f64..2.0,
    ) {
        let mut c = coeffs;
        c.push(lead);
        let p = Polynomial::new(c.clone());
        let found = poly_roots(&p).unwrap();
        prop_assert_eq!(found.roots.len(), p.degree());
        let rebuilt: Vec<f64> = from_roots(&found.roots).iter().map(|v| v * lead).collect();
        let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in rebuilt.iter().zip(&c) {
            prop_assert!((x - y).abs() <= 1e-8 * scale, "{x} vs {y}");
        }
    }
}

#[test]
fn uniform_interval_is_minus_n_to_one() {
    for n in 1..=8 {
        let i = stable_mu_interval(n, 1, &GainVector::uniform(n).unwrap()).unwrap();
        assert!((i.lo + n as f64).abs() <= 1e-4, "N={n}: lo {}", i.lo);
        assert!((i.hi - 1.0).abs() <= 1e-4, "N={n}: hi {}", i.hi);
    }
}

#[test]
fn dk2013_interval_extends_past_uniform() {
    for n in 2..=8 {
        let i = stable_mu_interval(n, 1, &GainVector::dk2013(n).unwrap()).unwrap();
        let half = std::f64::consts::PI / (2.0 * (n + 1) as f64);
        let want = -(half.cos() / half.sin()).powi(2);
        assert!(i.lo < -(n as f64), "N={n}: lo {}", i.lo);
        assert!(
            (i.lo - want).abs() <= 1e-4 * want.abs(),
            "N={n}: lo {} vs {want}",
            i.lo
        );
    }
}

#[test]
fn min_n_examples() {
    for (mu, n) in [(-1.5, 2), (-2.5, 3), (-7.5, 8)] {
        assert_eq!(
            min_n_to_stabilize(1, mu, GainScheme::Uniform, 20).unwrap(),
            Some(n)
        );
    }
    assert_eq!(
        min_n_to_stabilize(1, 1.5, GainScheme::Uniform, 20).unwrap(),
        None
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn min_n_is_monotone_and_matches_uniform_bound(m1 in 0.55f64..9.45, m2 in 0.55f64..9.45) {
        prop_assume!((m1 - m1.round()).abs() > 0.05 && (m2 - m2.round()).abs() > 0.05);
        let n1 = min_n_to_stabilize(1, -m1, GainScheme::Uniform, 12).unwrap().unwrap();
        let n2 = min_n_to_stabilize(1, -m2, GainScheme::Uniform, 12).unwrap().unwrap();
        prop_assert_eq!(n1, m1.floor() as usize + 1);
        if m1 <= m2 {
            prop_assert!(n1 <= n2);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn found_cycles_are_prime_orbits(r in 3.0f64..4.0, t in 1usize..=4) {
        let m = MapSpec::logistic(r);
        let cycles = find_cycles(&m, t, 2000).unwrap();
        prop_assert!(cycles.len() <= (1usize << t) / t);
        for c in &cycles {
            prop_assert_eq!(c.points.len(), t);
            for j in 0..t {
                let next = m.eval(c.points[j]).unwrap();
                prop_assert!((next - c.points[(j + 1) % t]).abs() <= 1e-8);
            }
            prop_assert!(c.points.iter().all(|&x| x >= c.points[0]));
            for d in (1..t).filter(|d| t % d == 0) {
                let back = m.iterate(c.points[0], d).unwrap();
                prop_assert!((back - c.points[0]).abs() > 1e-8, "period {d} divides {t}");
            }
            let product: f64 = c.points.iter().map(|&x| central_difference(&m, x)).product();
            prop_assert!((product - c.multiplier_product).abs() <= 1e-5 * (1.0 + product.abs()));
        }
    }
}

/// Target orbit for the simulator properties: the fixed point for `T = 1`,
/// the 2-cycle for `T = 2`.
fn logistic_target(r: f64, t: usize) -> (MapSpec, dfc_core::cycles::Cycle) {
    let m = MapSpec::logistic(r);
    let cycle = find_cycles(&m, t, 1000)
        .unwrap()
        .into_iter()
        .find(|c| c.points.iter().all(|&x| x > 0.0))
        .expect("orbit exists for r > 3");
    (m, cycle)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn orbit_history_needs_no_control(
        r in 3.1f64..4.0, t in 1usize..=2, w in prop::collection::vec(0.01f64..1.0, 1..=4),
    ) {
        let (m, cycle) = logistic_target(r, t);
        let a = gains(&w);
        let hist = orbit_history(&cycle, history_len(a.len(), t));
        let tr = simulate(&m, &a, t, &hist, 200, &cycle, 1e-9).unwrap();
        // Rounding grows along an orbit the control leaves unstable.
        let rho = spectral_radius(
            &char_poly_closed(a.len(), t, &a, cycle.multiplier_product).unwrap(),
        )
        .unwrap();
        let checked = if rho < 1.0 { tr.controls.len() } else { 2 * t };
        prop_assert!(tr.controls[..checked].iter().all(|u| u.abs() <= 1e-12));
    }

    #[test]
    fn linearisation_predicts_local_behaviour(
        r in 3.1f64..4.0, t in 1usize..=2, w in prop::collection::vec(0.01f64..1.0, 1..=5),
    ) {
        let (m, cycle) = logistic_target(r, t);
        let a = gains(&w);
        let rho = spectral_radius(
            &char_poly_closed(a.len(), t, &a, cycle.multiplier_product).unwrap(),
        )
        .unwrap();
        let mut hist = orbit_history(&cycle, history_len(a.len(), t));
        for x in &mut hist {
            *x += 1e-4;
        }
        if rho < 0.95 {
            let tol = 1e-8;
            let tr = simulate(&m, &a, t, &hist, 10_000, &cycle, tol).unwrap();
            prop_assert!(tr.converged, "rho {rho} but no convergence");
            prop_assert!(tr.max_recent_control(10 * t) <= 10.0 * tol);
        } else if rho > 1.05 {
            let tr = simulate(&m, &a, t, &hist, 10_000, &cycle, 1e-8).unwrap();
            let left = tr.diverged || tr.evolved().iter().any(|&x| cycle.distance(x) > 1e-2);
            prop_assert!(left, "rho {rho} but the orbit held");
        }
    }
}
