//! Seeded random batteries of strictly convex curves and generic query
//! points, and the per-case checks run over them.

use std::f64::consts::TAU;

use nalgebra::Vector2;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degree;
use crate::error::{Error, Result};
use crate::evolute::{self, CurveInvariants, IndexReport};
use crate::field::{self, CriticalPoint, Kind, Tolerances};
use crate::geom::{ClosedCurve, CurveSpec, FourierSeries, Point2};
use crate::roots;
use crate::sphere::{self, Pole};

/// Pole heights at which the pole indices are recomputed.
pub const POLE_RHOS: [f64; 3] = [1e3, 1e6, 1e9];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatteryConfig {
    pub curves: usize,
    pub points: usize,
    pub seed: u64,
    /// Minimum distance of a random point from the curve and its evolute.
    pub margin: f64,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            curves: 50,
            points: 20,
            seed: 0,
            margin: 1e-3,
        }
    }
}

/// Independent generator for the `index`-th item of a seeded battery.
pub fn sub_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn add_harmonic(s: &mut FourierSeries, j: i64, re: f64, im: f64) {
    let m = j.unsigned_abs() as usize;
    let sign = j.signum() as f64;
    for v in [&mut s.ax, &mut s.bx, &mut s.ay, &mut s.by] {
        if v.len() <= m {
            v.resize(m + 1, 0.0);
        }
    }
    if m == 0 {
        s.ax[0] += re;
        s.ay[0] += im;
        return;
    }
    // (re + i im) e^{i j t}
    s.ax[m] += re;
    s.bx[m] -= sign * im;
    s.ay[m] += im;
    s.by[m] += sign * re;
}

/// `z(t) = e^{irt} + c e^{i(r−1)t + iφ} + small harmonics`, `r ∈ {1, 2, 3}`.
/// Not necessarily convex; see [`random_curve`].
pub fn random_curve_spec(rng: &mut ChaCha8Rng) -> CurveSpec {
    let r: i64 = rng.random_range(1..=3);
    let mut s = FourierSeries::default();
    add_harmonic(&mut s, r, 1.0, 0.0);
    let phase = rng.random_range(0.0..TAU);
    let c = if r == 1 {
        rng.random_range(0.0..0.45)
    } else {
        rng.random_range(0.1..0.7)
    };
    let second = if r == 1 { -1 } else { r - 1 };
    add_harmonic(&mut s, second, c * phase.cos(), c * phase.sin());
    for j in -3..=r + 2 {
        if j == r || j == second {
            continue;
        }
        let amp = 0.04 / (1.0 + (j - r).abs() as f64);
        let re = rng.random_range(-amp..amp);
        let im = rng.random_range(-amp..amp);
        add_harmonic(&mut s, j, re, im);
    }
    CurveSpec::Fourier(s)
}

/// Vertices are simple: `|dk′/dt|` at each is at least `1e-3 max |k′|`.
fn has_generic_vertices(curve: &ClosedCurve) -> bool {
    let Ok(v) = crate::geom::vertices(curve) else {
        return false;
    };
    let max_rate = (0..1024)
        .map(|i| curve.curvature_rate(TAU * i as f64 / 1024.0).abs())
        .fold(0.0, f64::max);
    let h = 1e-5;
    v.count() >= 2
        && v.count() % 2 == 0
        && v.params.iter().all(|&t| {
            let second = (curve.curvature_rate(t + h) - curve.curvature_rate(t - h)) / (2.0 * h);
            second.abs() >= 1e-3 * max_rate
        })
}

/// A random curve with `k > 0` and simple vertices, by rejection.
pub fn random_curve(rng: &mut ChaCha8Rng) -> (CurveSpec, ClosedCurve) {
    loop {
        let spec = random_curve_spec(rng);
        if let Ok(curve) = ClosedCurve::strict(&spec) {
            if has_generic_vertices(&curve) {
                return (spec, curve);
            }
        }
    }
}

/// Uniform point in the curve's bounding box (enlarged by 30%) at least
/// `margin` from the curve and the evolute.
pub fn generic_point(curve: &ClosedCurve, rng: &mut ChaCha8Rng, margin: f64) -> Point2 {
    let pts: Vec<Point2> = (0..512)
        .map(|i| curve.position(TAU * i as f64 / 512.0))
        .collect();
    let (lo, hi) = pts.iter().fold(
        (
            Vector2::repeat(f64::INFINITY),
            Vector2::repeat(f64::NEG_INFINITY),
        ),
        |(lo, hi), p| (lo.inf(p), hi.sup(p)),
    );
    let centre = 0.5 * (lo + hi);
    let half = 0.65 * (hi - lo);
    loop {
        let p = Point2::new(
            rng.random_range(centre.x - half.x..centre.x + half.x),
            rng.random_range(centre.y - half.y..centre.y + half.y),
        );
        if let Ok(g) = field::genericity_report(curve, p, margin) {
            if g.passes() {
                return p;
            }
        }
    }
}

/// Finite critical points and their counting properties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointCheck {
    pub saddles: usize,
    pub centres: usize,
    /// Centres below the fold `ρ = 1/k`, saddles above.
    pub fold_rule: bool,
    pub index_sum: i64,
    /// Local planar index around each point equals `sign(1 − ρ*k)`.
    pub local_indices: bool,
}

impl CriticalPointCheck {
    pub fn holds(&self) -> bool {
        self.saddles == self.centres
            && self.saddles >= 1
            && self.fold_rule
            && self.index_sum == 0
            && self.local_indices
    }
}

/// Loop radius around a critical point that stays clear of the fold and
/// of the other critical points.
fn index_radius(cp: &CriticalPoint, all: &[CriticalPoint]) -> f64 {
    let mut r = (cp.rho_star - cp.fold_value).abs().min(0.5);
    for other in all {
        if std::ptr::eq(other, cp) {
            continue;
        }
        let dt = (other.t_star - cp.t_star).rem_euclid(TAU);
        let dt = dt.min(TAU - dt);
        r = r.min(dt.hypot(other.rho_star - cp.rho_star));
    }
    0.3 * r
}

pub fn critical_point_check(
    curve: &ClosedCurve,
    p: Point2,
    cps: &[CriticalPoint],
) -> Result<CriticalPointCheck> {
    let saddles = cps.iter().filter(|c| c.kind == Kind::Saddle).count();
    let fold_rule = cps.iter().all(|c| match c.kind {
        Kind::Centre => c.rho_star < c.fold_value,
        Kind::Saddle => c.rho_star > c.fold_value,
    });
    let mut local_indices = true;
    for cp in cps {
        let jacobian = 1.0 - cp.rho_star / cp.fold_value;
        let local = field::critical_point_index(curve, p, cp, index_radius(cp, cps))?;
        local_indices &= local == jacobian.signum() as i64;
    }
    Ok(CriticalPointCheck {
        saddles,
        centres: cps.len() - saddles,
        fold_rule,
        index_sum: cps.iter().map(|c| c.index as i64).sum(),
        local_indices,
    })
}

/// Winding numbers of the curve and of the evolute by trapezoidal
/// quadrature of `(x dy − y dx)/r²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureWindings {
    pub w_alpha: i64,
    pub w_beta: i64,
}

fn quadrature_samples(length: f64, distance: f64) -> usize {
    ((64.0 * length / distance) as usize)
        .next_power_of_two()
        .clamp(4096, 1 << 21)
}

fn loop_length(f: impl Fn(f64) -> Vector2<f64>) -> f64 {
    let n = 2048;
    (0..n)
        .map(|i| (f(TAU * (i + 1) as f64 / n as f64) - f(TAU * i as f64 / n as f64)).norm())
        .sum()
}

pub fn quadrature_windings(curve: &ClosedCurve, p: Point2) -> Result<QuadratureWindings> {
    let g = field::genericity_report(curve, p, Tolerances::default().genericity)?.into_result()?;
    let ev = evolute::evolute(curve)?;
    let w_alpha = degree::winding_by_quadrature(
        |t| curve.position(t),
        |t| curve.velocity(t),
        p,
        quadrature_samples(curve.length(), g.curve_distance),
    )?;
    let w_beta = if ev.is_degenerate() {
        0
    } else {
        degree::winding_by_quadrature(
            |t| ev.point(t),
            |t| ev.velocity(t),
            p,
            quadrature_samples(loop_length(|t| ev.point(t)), g.evolute_distance),
        )?
    };
    Ok(QuadratureWindings { w_alpha, w_beta })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatteryCase {
    pub curve: usize,
    pub point: [f64; 2],
    pub report: IndexReport,
    pub critical_check: CriticalPointCheck,
    pub quadrature: QuadratureWindings,
    /// Quadrature windings satisfy `w^β = r^α − n_p`, `w^β = r^α − N_p/2`,
    /// `w^α = r^α − m_p`.
    pub quadrature_identities: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleCheck {
    pub rho0: f64,
    #[serde(rename = "i_N")]
    pub i_north: i64,
    #[serde(rename = "i_S")]
    pub i_south: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub index: usize,
    pub spec: CurveSpec,
    pub r_alpha: i64,
    pub nu: Option<i64>,
    pub r_beta_numeric: Option<i64>,
    pub poles: Vec<PoleCheck>,
    /// `i_N = 1 + r^α`, `i_S = 1 − r^α` at every pole height.
    pub poles_agree: bool,
    /// `r^β = (ν + 2r^α)/2` against the cusp-aware turning.
    pub evolute_rotation_agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub config: BatteryConfig,
    pub curves: Vec<CurveSummary>,
    pub cases: Vec<BatteryCase>,
    pub failures: Vec<String>,
}

impl BatteryReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn run_curve(config: &BatteryConfig, index: usize) -> Result<(CurveSummary, Vec<BatteryCase>)> {
    let mut rng = sub_rng(config.seed, index as u64);
    let (spec, curve) = random_curve(&mut rng);
    let inv = CurveInvariants::compute(&curve)?;
    let poles = POLE_RHOS
        .iter()
        .map(|&rho0| {
            Ok(PoleCheck {
                rho0,
                i_north: sphere::pole_index(&curve, Pole::North, rho0)?,
                i_south: sphere::pole_index(&curve, Pole::South, rho0)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let poles_agree = poles
        .iter()
        .all(|c| c.i_north == 1 + inv.r_alpha && c.i_south == 1 - inv.r_alpha);
    let evolute_rotation_agrees = match (inv.nu, inv.r_beta_numeric) {
        (Some(nu), Some(rb)) => (nu + 2 * inv.r_alpha) % 2 == 0 && rb == (nu + 2 * inv.r_alpha) / 2,
        _ => false,
    };
    let tol = Tolerances::default();
    let cases = (0..config.points)
        .map(|_| {
            let p = generic_point(&curve, &mut rng, config.margin);
            let report = evolute::compute_index_report_with(&curve, &inv, p, &tol)?;
            let cps = field::critical_points_with(&curve, p, &tol)?;
            let critical_check = critical_point_check(&curve, p, &cps)?;
            let quadrature = quadrature_windings(&curve, p)?;
            let r = report.r_alpha;
            let quadrature_identities = quadrature.w_beta == r - report.n_p
                && 2 * quadrature.w_beta == 2 * r - report.big_n_p
                && quadrature.w_alpha == r - report.m_p;
            Ok(BatteryCase {
                curve: index,
                point: [p.x, p.y],
                report,
                critical_check,
                quadrature,
                quadrature_identities,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = CurveSummary {
        index,
        spec,
        r_alpha: inv.r_alpha,
        nu: inv.nu,
        r_beta_numeric: inv.r_beta_numeric,
        poles,
        poles_agree,
        evolute_rotation_agrees,
    };
    Ok((summary, cases))
}

/// Runs every curve-side check over `config.curves × config.points` cases.
/// Curves run in parallel; the output depends only on the configuration.
pub fn run_battery(config: &BatteryConfig) -> Result<BatteryReport> {
    let per_curve = (0..config.curves)
        .into_par_iter()
        .map(|i| run_curve(config, i))
        .collect::<Result<Vec<_>>>()?;
    let mut curves = Vec::new();
    let mut cases = Vec::new();
    let mut failures = Vec::new();
    for (summary, curve_cases) in per_curve {
        if !summary.poles_agree {
            failures.push(format!(
                "curve {}: pole indices {:?} vs r_alpha {}",
                summary.index, summary.poles, summary.r_alpha
            ));
        }
        if !summary.evolute_rotation_agrees {
            failures.push(format!(
                "curve {}: r_beta numeric {:?} vs nu {:?}, r_alpha {}",
                summary.index, summary.r_beta_numeric, summary.nu, summary.r_alpha
            ));
        }
        for case in &curve_cases {
            let at = format!("curve {} point {:?}", case.curve, case.point);
            if !case.critical_check.holds() {
                failures.push(format!("{at}: critical points {:?}", case.critical_check));
            }
            if !case.report.all_identities_hold() {
                failures.push(format!(
                    "{at}: {}",
                    case.report.checks.failures().join("; ")
                ));
            }
            if !case.quadrature_identities {
                failures.push(format!("{at}: quadrature windings {:?}", case.quadrature));
            }
        }
        curves.push(summary);
        cases.extend(curve_cases);
    }
    Ok(BatteryReport {
        config: *config,
        curves,
        cases,
        failures,
    })
}

/// One transversal crossing of the evolute by a segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// Segment parameter in `(0, 1)`.
    pub s: f64,
    /// Evolute parameter of the crossing.
    pub t: f64,
    #[serde(rename = "N_before")]
    pub big_n_before: i64,
    #[serde(rename = "N_after")]
    pub big_n_after: i64,
    pub w_beta_before: i64,
    pub w_beta_after: i64,
}

impl Crossing {
    /// `N_p` jumps by ±2 and `w^β_p` by the opposite unit.
    pub fn parity_holds(&self) -> bool {
        let dn = self.big_n_after - self.big_n_before;
        let dw = self.w_beta_after - self.w_beta_before;
        dn.abs() == 2 && dw == -dn / 2
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentParity {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub crossings: Vec<Crossing>,
}

impl SegmentParity {
    pub fn holds(&self) -> bool {
        self.crossings.iter().all(Crossing::parity_holds)
    }
}

/// Evolute parameters and segment parameters where `a + s(b − a)` meets the
/// evolute, or `None` if a crossing is not clean (tangential, at a cusp,
/// or too close to another crossing or to an endpoint).
fn segment_crossings(curve: &ClosedCurve, a: Point2, b: Point2) -> Result<Option<Vec<(f64, f64)>>> {
    let ev = evolute::evolute(curve)?;
    let d = b - a;
    let h = |t: f64| {
        let q = ev.point(t) - a;
        q.x * d.y - q.y * d.x
    };
    let found = roots::periodic_roots(&h, 8192, 1 << 16, 1e-13).roots;
    let max_speed = (0..1024)
        .map(|i| ev.velocity(TAU * i as f64 / 1024.0).norm())
        .fold(0.0, f64::max);
    let mut hits = Vec::new();
    for t in found {
        let s = (ev.point(t) - a).dot(&d) / d.norm_squared();
        if !(0.0..=1.0).contains(&s) {
            continue;
        }
        let v = ev.velocity(t);
        let sine = (v.x * d.y - v.y * d.x).abs() / (v.norm() * d.norm());
        if !(1e-3..=1.0 - 1e-3).contains(&s) || v.norm() < 1e-2 * max_speed || sine < 0.05 {
            return Ok(None);
        }
        hits.push((s, t));
    }
    hits.sort_by(|x, y| x.0.total_cmp(&y.0));
    if hits.windows(2).any(|w| (w[1].0 - w[0].0) * d.norm() < 1e-3) {
        return Ok(None);
    }
    Ok(Some(hits))
}

/// `N_p` and `w^β_p` just before and after every evolute crossing along the
/// segment `a → b`. `Ok(None)` if the segment is not cleanly transversal.
pub fn crossing_parity(curve: &ClosedCurve, a: Point2, b: Point2) -> Result<Option<SegmentParity>> {
    let Some(hits) = segment_crossings(curve, a, b)? else {
        return Ok(None);
    };
    let at = |s: f64| a + (b - a) * s;
    let probe = |s: f64| -> Result<(i64, i64)> {
        let p = at(s);
        let counts = field::segment_counts(curve, p)?;
        Ok((counts.big_n_p as i64, evolute::evolute_winding(curve, p)?))
    };
    let mut stops = vec![0.0];
    stops.extend(hits.iter().map(|h| h.0));
    stops.push(1.0);
    let mids: Vec<f64> = stops.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let values = mids.iter().map(|&s| probe(s)).collect::<Result<Vec<_>>>()?;
    let crossings = hits
        .iter()
        .enumerate()
        .map(|(i, &(s, t))| Crossing {
            s,
            t,
            big_n_before: values[i].0,
            big_n_after: values[i + 1].0,
            w_beta_before: values[i].1,
            w_beta_after: values[i + 1].1,
        })
        .collect();
    Ok(Some(SegmentParity {
        start: [a.x, a.y],
        end: [b.x, b.y],
        crossings,
    }))
}

/// A segment through the curve's neighbourhood that crosses the evolute
/// transversally at least once.
pub fn random_transversal_segment(
    curve: &ClosedCurve,
    rng: &mut ChaCha8Rng,
    margin: f64,
) -> Result<SegmentParity> {
    let size = (0..256)
        .map(|i| curve.position(TAU * i as f64 / 256.0).norm())
        .fold(0.0, f64::max);
    for _ in 0..1000 {
        let a = generic_point(curve, rng, margin);
        let angle = rng.random_range(0.0..TAU);
        let len = rng.random_range(0.5..2.0) * size;
        let b = a + len * Vector2::new(angle.cos(), angle.sin());
        if !field::genericity_report(curve, b, margin)?.passes() {
            continue;
        }
        if let Some(seg) = crossing_parity(curve, a, b)? {
            if !seg.crossings.is_empty() {
                return Ok(seg);
            }
        }
    }
    Err(Error::InvalidArgument(
        "no transversal segment found".into(),
    ))
}

/// `count` segments, each on its own random curve.
pub fn parity_battery(seed: u64, count: usize) -> Result<Vec<SegmentParity>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = sub_rng(seed, (1 << 32) + i as u64);
            let (_, curve) = random_curve(&mut rng);
            random_transversal_segment(&curve, &mut rng, 1e-3)
        })
        .collect()
}
