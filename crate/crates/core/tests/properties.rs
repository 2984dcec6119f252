use std::f64::consts::TAU;

use nalgebra::{Vector2, Vector3};
use normal_field::battery::{self, BatteryConfig};
use normal_field::degree::{self, CircleLoop};
use normal_field::evolute::{self, compute_index_report};
use normal_field::field;
use normal_field::surface::{self, Chart, ChartPoint, HarmonicTerm, SurfaceSpec};
use normal_field::{ClosedCurve, CurveSpec, Point2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn battery_curve(seed: u64) -> (CurveSpec, ClosedCurve) {
    battery::random_curve(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn trig_loop(coeffs: Vec<[f64; 4]>) -> impl Fn(f64) -> Vector2<f64> + Clone {
    move |t: f64| {
        coeffs
            .iter()
            .enumerate()
            .fold(Vector2::new(0.0, 0.0), |acc, (j, c)| {
                let (s, co) = (j as f64 * t).sin_cos();
                acc + Vector2::new(c[0] * co + c[1] * s, c[2] * co + c[3] * s)
            })
    }
}

fn min_norm(f: &impl Fn(f64) -> Vector2<f64>) -> f64 {
    (0..2048)
        .map(|i| f(TAU * i as f64 / 2048.0).norm())
        .fold(f64::INFINITY, f64::min)
}

fn loop_coeffs() -> impl Strategy<Value = Vec<[f64; 4]>> {
    prop::collection::vec(prop::array::uniform4(-1.0f64..1.0), 1..5)
}

fn harmonic_spec() -> impl Strategy<Value = SurfaceSpec> {
    prop::collection::vec((0u32..5, -4i32..5, -0.05f64..0.05), 0..4).prop_map(|terms| {
        let mut out = vec![HarmonicTerm(0, 0, 1.0)];
        out.extend(terms.into_iter().map(|(l, m, c)| {
            let m = m.clamp(-(l as i32), l as i32);
            let growth: f64 = ((l - m.unsigned_abs() + 1)..=(l + m.unsigned_abs()))
                .map(f64::from)
                .product();
            HarmonicTerm(l, m, c / growth)
        }));
        SurfaceSpec::RadialHarmonics(out)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn frame_is_orthonormal(seed in any::<u64>(), t in 0.0..TAU) {
        let (_, c) = battery_curve(seed);
        let f = c.frame(t);
        prop_assert!((f.tangent.norm() - 1.0).abs() < 1e-12);
        prop_assert!((f.normal.norm() - 1.0).abs() < 1e-12);
        prop_assert!(f.tangent.dot(&f.normal).abs() < 1e-12);
        prop_assert!((f.tangent.perp(&f.normal) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolute_velocity_is_normal(seed in any::<u64>(), t in 0.0..TAU) {
        let (_, c) = battery_curve(seed);
        let e = evolute::evolute(&c).unwrap();
        let v = e.velocity(t);
        let tangent = c.frame(t).tangent;
        prop_assert!(v.dot(&tangent).abs() <= 1e-9 * (1.0 + v.norm()));
    }

    #[test]
    fn reports_are_invariant_under_phase_shift(seed in any::<u64>(), shift in 0.0..TAU) {
        let (spec, c) = battery_curve(seed);
        let CurveSpec::Fourier(series) = spec else { unreachable!() };
        let shifted = ClosedCurve::strict(&CurveSpec::Fourier(series.phase_shifted(shift))).unwrap();
        let p = battery::generic_point(&c, &mut ChaCha8Rng::seed_from_u64(seed ^ 1), 1e-2);
        let a = compute_index_report(&c, p).unwrap();
        let b = compute_index_report(&shifted, p).unwrap();
        prop_assert_eq!(a.vector(), b.vector());
    }

    #[test]
    fn circle_degree_matches_preimage_count(coeffs in loop_coeffs(), direction in -3.0f64..3.0, seed in any::<u64>()) {
        let f = trig_loop(coeffs);
        prop_assume!(min_norm(&f) > 1e-2);
        let lp = CircleLoop::new(f);
        let a = degree::circle_degree(&lp).unwrap();
        let b = degree::degree_by_preimage_retrying(&lp, direction, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn relative_degree_is_additive(u in loop_coeffs(), v in loop_coeffs(), w in loop_coeffs()) {
        let (u, v, w) = (trig_loop(u), trig_loop(v), trig_loop(w));
        prop_assume!(min_norm(&u) > 1e-2 && min_norm(&v) > 1e-2 && min_norm(&w) > 1e-2);
        let uv = degree::relative_degree(&u, &v, 1024).unwrap();
        let vw = degree::relative_degree(&v, &w, 1024).unwrap();
        let wu = degree::relative_degree(&w, &u, 1024).unwrap();
        prop_assert_eq!(uv + vw + wu, 0);
    }

    #[test]
    fn degree_is_stable_under_small_homotopy(coeffs in loop_coeffs(), bump in prop::array::uniform4(-1.0f64..1.0), scale in 0.0f64..1.0) {
        let f = trig_loop(coeffs.clone());
        let m = min_norm(&f);
        prop_assume!(m > 5e-2);
        let mut moved = coeffs;
        let k = 0.4 * m * scale / 4.0;
        moved.push(bump.map(|x| x * k));
        let g = trig_loop(moved);
        let a = degree::circle_degree(&CircleLoop::new(f)).unwrap();
        let b = degree::circle_degree(&CircleLoop::new(g)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn curve_spec_round_trips(seed in any::<u64>()) {
        let (spec, _) = battery_curve(seed);
        let back = CurveSpec::from_json(&spec.to_json()).unwrap();
        let (CurveSpec::Fourier(a), CurveSpec::Fourier(b)) = (&spec, &back) else { unreachable!() };
        for (x, y) in [(&a.ax, &b.ax), (&a.bx, &b.bx), (&a.ay, &b.ay), (&a.by, &b.by)] {
            prop_assert_eq!(x.len(), y.len());
            for (p, q) in x.iter().zip(y) {
                prop_assert!((p - q).abs() <= 1e-15 * p.abs().max(1.0));
            }
        }
    }

    #[test]
    fn surface_spec_round_trips(spec in harmonic_spec()) {
        let back = SurfaceSpec::from_json(&spec.to_json()).unwrap();
        let (SurfaceSpec::RadialHarmonics(a), SurfaceSpec::RadialHarmonics(b)) = (&spec, &back) else { unreachable!() };
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            prop_assert_eq!((x.0, x.1), (y.0, y.1));
            prop_assert!((x.2 - y.2).abs() <= 1e-15 * x.2.abs().max(1.0));
        }
    }

    #[test]
    fn d2_gradient_matches_central_differences(
        spec in harmonic_spec(),
        u in 0.0..TAU,
        v in 0.6f64..2.5,
        px in -0.5f64..0.5, py in -0.5f64..0.5, pz in -0.5f64..0.5,
        equatorial in any::<bool>(),
    ) {
        let s = surface::make_surface(&spec).unwrap();
        let chart = if equatorial { Chart::Equatorial } else { Chart::Polar };
        let p = Vector3::new(px, py, pz);
        let (grad, hess) = surface::d2_derivatives(&s, &p, ChartPoint::new(chart, u, v));
        let h = 1e-5;
        let d = |du: f64, dv: f64| surface::distance_squared(&s, &p, ChartPoint::new(chart, u + du, v + dv));
        let fd = Vector2::new((d(h, 0.0) - d(-h, 0.0)) / (2.0 * h), (d(0.0, h) - d(0.0, -h)) / (2.0 * h));
        prop_assert!((grad - fd).norm() < 1e-6 * (1.0 + grad.norm()), "{grad} vs {fd}");
        let g = |du: f64, dv: f64| surface::d2_derivatives(&s, &p, ChartPoint::new(chart, u + du, v + dv)).0;
        let h2 = 1e-4;
        let col_u = (g(h2, 0.0) - g(-h2, 0.0)) / (2.0 * h2);
        let col_v = (g(0.0, h2) - g(0.0, -h2)) / (2.0 * h2);
        prop_assert!((hess.column(0) - col_u).norm() < 1e-5 * (1.0 + hess.norm()));
        prop_assert!((hess.column(1) - col_v).norm() < 1e-5 * (1.0 + hess.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn battery_is_deterministic(seed in any::<u64>()) {
        let config = BatteryConfig { curves: 2, points: 3, seed, margin: 1e-3 };
        let a = serde_json::to_string(&battery::run_battery(&config).unwrap()).unwrap();
        let b = serde_json::to_string(&battery::run_battery(&config).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn normal_map_hits_query_at_critical_points(seed in any::<u64>()) {
        let (_, c) = battery_curve(seed);
        let p: Point2 = battery::generic_point(&c, &mut ChaCha8Rng::seed_from_u64(seed), 1e-3);
        for cp in field::critical_points(&c, p).unwrap() {
            let value = field::normal_map(&c, cp.t_star, cp.rho_star);
            prop_assert!((value.point - p).norm() < 1e-8);
        }
    }
}
