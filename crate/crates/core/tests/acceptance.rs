//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use nalgebra::{Vector2, Vector3};
use normal_field::battery::{self, BatteryConfig, BatteryReport, POLE_RHOS};
use normal_field::degree::{self, CircleLoop, SphereMesh};
use normal_field::evolute::index_report;
use normal_field::field::{self, Kind};
use normal_field::sphere::{pole_index, Pole};
use normal_field::surface::{self, D2Type, SurfaceOptions, SurfaceSpec};
use normal_field::{ClosedCurve, CurveSpec, Error, Point2};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BATTERY_SEED: u64 = 20_240_601;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ellipse() -> ClosedCurve {
    ClosedCurve::strict(&CurveSpec::ellipse(2.0, 1.0)).unwrap()
}

struct TimedBattery {
    report: BatteryReport,
    elapsed: Duration,
}

fn battery() -> &'static TimedBattery {
    static CELL: OnceLock<TimedBattery> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let report = battery::run_battery(&BatteryConfig {
            curves: 50,
            points: 20,
            seed: BATTERY_SEED,
            margin: 1e-3,
        })
        .expect("battery runs");
        TimedBattery {
            report,
            elapsed: start.elapsed(),
        }
    })
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let e = ellipse();
    let cps = field::critical_points(&e, Point2::zeros()).map_err(|e| e.to_string())?;
    let expected = [
        (0.0, 2.0, Kind::Saddle),
        (FRAC_PI_2, 1.0, Kind::Centre),
        (PI, 2.0, Kind::Saddle),
        (3.0 * FRAC_PI_2, 1.0, Kind::Centre),
    ];
    ensure!(cps.len() == 4, "{} critical points", cps.len());
    for (t, rho, kind) in expected {
        let hit = cps.iter().find(|c| {
            let dt = (c.t_star - t).rem_euclid(TAU);
            dt.min(TAU - dt) < 1e-8
        });
        let Some(c) = hit else {
            return Err(format!("no critical point at t = {t}"));
        };
        ensure!(
            (c.rho_star - rho).abs() < 1e-8,
            "rho* = {} at t = {t}",
            c.rho_star
        );
        ensure!(c.kind == kind, "kind {:?} at t = {t}", c.kind);
    }
    let r = index_report(&e, Point2::zeros()).map_err(|e| e.to_string())?;
    let v: Vec<Option<i64>> = r.vector().to_vec();
    let want: Vec<Option<i64>> = [1, 3, 4, 2, 0, 2, 0, 4, 1, -1]
        .iter()
        .map(|x| Some(*x))
        .collect();
    ensure!(v == want, "index report {v:?}");
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("4 critical points, report {want:?}, {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let b = battery();
    let cases = &b.report.cases;
    ensure!(cases.len() == 1000, "{} cases", cases.len());
    let bad: Vec<_> = cases.iter().filter(|c| !c.critical_check.holds()).collect();
    ensure!(
        bad.is_empty(),
        "{} failures, first {:?}",
        bad.len(),
        bad[0].critical_check
    );
    ensure!(
        b.elapsed < Duration::from_secs(120),
        "battery took {:?}",
        b.elapsed
    );
    let total: usize = cases
        .iter()
        .map(|c| c.critical_check.saddles + c.critical_check.centres)
        .sum();
    Ok(format!(
        "1000 cases, {total} critical points, battery {:.1?}",
        b.elapsed
    ))
}

fn criterion_3() -> Outcome {
    let b = battery();
    let bad: Vec<_> = b.report.curves.iter().filter(|c| !c.poles_agree).collect();
    ensure!(
        bad.is_empty(),
        "curve {} poles {:?} r_alpha {}",
        bad[0].index,
        bad[0].poles,
        bad[0].r_alpha
    );
    for (spec, want) in [
        (CurveSpec::ellipse(2.0, 1.0), (2, 0)),
        (CurveSpec::limacon(0.5), (3, -1)),
    ] {
        let c = ClosedCurve::strict(&spec).unwrap();
        for rho0 in POLE_RHOS {
            let got = (
                pole_index(&c, Pole::North, rho0).map_err(|e| e.to_string())?,
                pole_index(&c, Pole::South, rho0).map_err(|e| e.to_string())?,
            );
            ensure!(got == want, "{spec:?} at rho0 {rho0}: {got:?}");
        }
    }
    let mut rotation = [0usize; 4];
    for c in &b.report.curves {
        rotation[c.r_alpha.clamp(0, 3) as usize] += 1;
    }
    Ok(format!(
        "50 curves x 3 pole heights; r_alpha histogram 1:{} 2:{} 3:{}; ellipse (2, 0), limacon (3, -1)",
        rotation[1], rotation[2], rotation[3]
    ))
}

fn criterion_4() -> Outcome {
    let b = battery();
    let bad: Vec<_> = b
        .report
        .cases
        .iter()
        .filter(|c| !c.quadrature_identities)
        .collect();
    ensure!(
        bad.is_empty(),
        "{} failures, first curve {} point {:?}: {:?} vs n_p {} m_p {} N_p {}",
        bad.len(),
        bad[0].curve,
        bad[0].point,
        bad[0].quadrature,
        bad[0].report.n_p,
        bad[0].report.m_p,
        bad[0].report.big_n_p
    );
    let nonzero = b
        .report
        .cases
        .iter()
        .filter(|c| c.quadrature.w_beta != 0 || c.quadrature.w_alpha != 0)
        .count();
    Ok(format!(
        "1000 cases by quadrature, {nonzero} with a nonzero winding"
    ))
}

fn criterion_5() -> Outcome {
    let b = battery();
    let bad: Vec<_> = b
        .report
        .cases
        .iter()
        .filter(|c| !c.report.checks.matrix_agrees)
        .collect();
    ensure!(
        bad.is_empty(),
        "{} mismatches, first {:?} vs {:?}",
        bad.len(),
        bad[0].report.matrix,
        bad[0].report.numeric
    );
    let bad: Vec<_> = b
        .report
        .curves
        .iter()
        .filter(|c| !c.evolute_rotation_agrees)
        .collect();
    ensure!(
        bad.is_empty(),
        "curve {}: nu {:?} r_alpha {} turning {:?}",
        bad[0].index,
        bad[0].nu,
        bad[0].r_alpha,
        bad[0].r_beta_numeric
    );
    let all_identities = b
        .report
        .cases
        .iter()
        .all(|c| c.report.all_identities_hold());
    ensure!(all_identities, "an index-report identity failed");
    Ok("1000 matrix evaluations, 50 cusp-aware turnings agree".into())
}

fn criterion_6() -> Outcome {
    let e = ellipse();
    let mut detail = Vec::new();
    for t_fold in [FRAC_PI_4, 3.0 * FRAC_PI_4] {
        let near = |p: Point2| -> Result<Vec<f64>, String> {
            let cps = field::critical_points(&e, p).map_err(|e| e.to_string())?;
            Ok(cps
                .iter()
                .map(|c| c.t_star - t_fold)
                .filter(|d| d.abs() < 0.2)
                .collect())
        };
        let mut pairs = 0;
        for eps in [1e-4, -1e-4] {
            let p = field::perturbed_query_point(&e, t_fold, eps);
            let prediction = field::predict_pair(&e, t_fold, eps).map_err(|e| e.to_string())?;
            let mut offsets = near(p)?;
            offsets.sort_by(f64::total_cmp);
            let at = format!("t {t_fold:.4}, eps {eps:+e}");
            match prediction {
                Some(pred) => {
                    ensure!(
                        offsets.len() == 2,
                        "{at}: predicted a pair, found {offsets:?}"
                    );
                    let want = [
                        pred.delta_t_minus.min(pred.delta_t_plus),
                        pred.delta_t_minus.max(pred.delta_t_plus),
                    ];
                    for (got, want) in offsets.iter().zip(want) {
                        ensure!(
                            (got - want).abs() <= 0.2 * want.abs(),
                            "{at}: offset {got} vs {want}"
                        );
                    }
                    pairs += 1;
                    detail.push(format!(
                        "{at}: dt {:.5}/{:.5} vs {:.5}/{:.5}",
                        offsets[0], offsets[1], want[0], want[1]
                    ));
                }
                None => {
                    ensure!(
                        offsets.is_empty(),
                        "{at}: no pair predicted, found {offsets:?}"
                    );
                    detail.push(format!("{at}: no pair"));
                }
            }
        }
        ensure!(
            pairs == 1,
            "t {t_fold}: {pairs} signs of epsilon produced a pair"
        );
    }
    ensure!(
        matches!(
            field::predict_pair(&e, 0.0, 1e-4),
            Err(Error::VertexDegeneracy { .. })
        ),
        "vertex fold did not raise"
    );
    Ok(format!("{}; vertex fold raises", detail.join("; ")))
}

fn random_trig_loop(rng: &mut ChaCha8Rng) -> impl Fn(f64) -> Vector2<f64> + Clone {
    loop {
        let deg: usize = rng.random_range(1..=4);
        let coeffs: Vec<[f64; 4]> = (0..=deg)
            .map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
            .collect();
        let f = move |t: f64| {
            coeffs
                .iter()
                .enumerate()
                .fold(Vector2::zeros(), |acc, (j, c)| {
                    let (s, co) = (j as f64 * t).sin_cos();
                    acc + Vector2::new(c[0] * co + c[1] * s, c[2] * co + c[3] * s)
                })
        };
        let min = (0..4096)
            .map(|i| f(TAU * i as f64 / 4096.0).norm())
            .fold(f64::INFINITY, f64::min);
        if min > 1e-2 {
            return f;
        }
    }
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(BATTERY_SEED ^ 7);
    let mut degrees = std::collections::BTreeMap::new();
    for i in 0..100 {
        let f = random_trig_loop(&mut rng);
        let lp = CircleLoop::new(f);
        let a = degree::circle_degree(&lp).map_err(|e| e.to_string())?;
        let direction = rng.random_range(-PI..PI);
        let b =
            degree::degree_by_preimage_retrying(&lp, direction, i).map_err(|e| e.to_string())?;
        ensure!(a == b, "loop {i}: lifted {a} vs preimage {b}");
        *degrees.entry(a).or_insert(0) += 1;
    }
    for i in 0..100 {
        let unit = |f: &dyn Fn(f64) -> Vector2<f64>, t: f64| f(t).normalize();
        let (u, v, w) = (
            random_trig_loop(&mut rng),
            random_trig_loop(&mut rng),
            random_trig_loop(&mut rng),
        );
        let uv = degree::relative_degree(|t| unit(&u, t), |t| unit(&v, t), 1024)
            .map_err(|e| e.to_string())?;
        let vw = degree::relative_degree(|t| unit(&v, t), |t| unit(&w, t), 1024)
            .map_err(|e| e.to_string())?;
        let wu = degree::relative_degree(|t| unit(&w, t), |t| unit(&u, t), 1024)
            .map_err(|e| e.to_string())?;
        ensure!(uv + vw + wu == 0, "triple {i}: {uv} + {vw} + {wu} != 0");
    }
    let s =
        surface::make_surface(&SurfaceSpec::ellipsoid(2.0, 1.5, 1.0)).map_err(|e| e.to_string())?;
    let inside = degree::spherical_degree(
        |w| s.position(&w),
        Vector3::new(0.3, -0.2, 0.1),
        SphereMesh::default(),
    )
    .map_err(|e| e.to_string())?;
    let outside = degree::spherical_degree(
        |w| s.position(&w),
        Vector3::new(2.5, 0.4, -0.3),
        SphereMesh::default(),
    )
    .map_err(|e| e.to_string())?;
    ensure!(
        (inside, outside) == (1, 0),
        "ellipsoid degrees {inside}/{outside}"
    );
    Ok(format!(
        "100 loops (degree histogram {degrees:?}), 100 triples, ellipsoid 1/0"
    ))
}

fn surface_integers(r: &surface::SurfaceIndexReport) -> Vec<i64> {
    vec![
        r.n_plus,
        r.n_minus,
        r.n_zero,
        r.w_beta1_p,
        r.w_beta2_p,
        r.big_n_p,
        r.index_sum,
    ]
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let s =
        surface::make_surface(&SurfaceSpec::ellipsoid(2.0, 1.5, 1.0)).map_err(|e| e.to_string())?;
    let p = Vector3::zeros();
    let opts = SurfaceOptions::default();
    let r = surface::compute_surface_report(&s, &p, &opts).map_err(|e| e.to_string())?;
    ensure!(
        r.critical_points.len() == 6,
        "{} critical points",
        r.critical_points.len()
    );
    for c in &r.critical_points {
        let pos = Vector3::from(c.position);
        let (axis, want) = match c.d2_type {
            D2Type::Maximum => (0, 2.0),
            D2Type::Saddle => (1, 1.5),
            D2Type::Minimum => (2, 1.0),
        };
        ensure!(
            (pos[axis].abs() - want).abs() < 1e-8,
            "{:?} at {:?}",
            c.d2_type,
            c.position
        );
        ensure!(
            (pos.norm() - want).abs() < 1e-8,
            "{:?} off axis at {:?}",
            c.d2_type,
            c.position
        );
    }
    ensure!(r.index_sum == 2, "index sum {}", r.index_sum);
    ensure!(
        r.n_plus + r.n_minus - r.n_zero == 2,
        "n+ + n- - n0 = {}",
        r.n_plus + r.n_minus - r.n_zero
    );
    ensure!(
        (r.w_beta1_p, r.w_beta2_p) == (1, 1),
        "sheet windings {:?}",
        (r.w_beta1_p, r.w_beta2_p)
    );
    ensure!(
        r.checks.all(),
        "failed identities: {:?}",
        r.checks.failures()
    );
    let umb = surface::umbilics_with(&s, &opts).map_err(|e| e.to_string())?;
    ensure!(umb.len() == 4, "{} umbilics", umb.len());
    ensure!(
        umb.iter().all(|u| u.position[1].abs() < 1e-6),
        "umbilic off the x-z plane"
    );

    let fine = opts.doubled();
    let r2 = surface::compute_surface_report(&s, &p, &fine).map_err(|e| e.to_string())?;
    ensure!(
        surface_integers(&r) == surface_integers(&r2),
        "doubled grid changed {:?} -> {:?}",
        surface_integers(&r),
        surface_integers(&r2)
    );
    let umb2 = surface::umbilics_with(&s, &fine).map_err(|e| e.to_string())?;
    ensure!(
        umb2.len() == umb.len(),
        "doubled grid found {} umbilics",
        umb2.len()
    );
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    Ok(format!(
        "6 critical points, w = (1, 1), solid-angle degrees {:?}, 4 umbilics, doubled grid stable, {elapsed:.1?}",
        r.sheet_degrees
    ))
}

fn criterion_9() -> Outcome {
    let segments = battery::parity_battery(BATTERY_SEED, 20).map_err(|e| e.to_string())?;
    ensure!(segments.len() == 20, "{} segments", segments.len());
    let mut crossings = 0;
    for (i, seg) in segments.iter().enumerate() {
        ensure!(!seg.crossings.is_empty(), "segment {i} has no crossing");
        ensure!(seg.holds(), "segment {i}: {:?}", seg.crossings);
        crossings += seg.crossings.len();
    }
    Ok(format!("20 segments, {crossings} crossings"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 ellipse ground truth", criterion_1),
        ("2 critical point battery", criterion_2),
        ("3 pole indices", criterion_3),
        ("4 winding identities", criterion_4),
        ("5 matrix formula", criterion_5),
        ("6 bifurcation prediction", criterion_6),
        ("7 degree oracles", criterion_7),
        ("8 surface suite", criterion_8),
        ("9 evolute-crossing parity", criterion_9),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(why) => {
                println!("criterion {name}: FAIL ({why})");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
