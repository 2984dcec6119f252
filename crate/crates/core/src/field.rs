//! The normal map `F(t, ρ) = α(t) + ρ n(t)` as a vector field on the
//! cylinder: critical points, their classification, segment counts, the
//! fold-crossing pair prediction and sampled grids for plotting.

use std::f64::consts::TAU;
use std::fmt;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::degree;
use crate::error::{Error, Result};
use crate::geom::{ClosedCurve, Point2};
use crate::roots::{self, BISECTION_TOL, DEFAULT_SAMPLES, MAX_SAMPLES};

/// Numerical margins shared by the curve-side computations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Minimum distance from the query point to the curve and its evolute.
    pub genericity: f64,
    /// Relative margin on `|1 − ρk|` below which a critical point is degenerate.
    pub degenerate: f64,
    /// Bisection width for parameter roots.
    pub bisection: f64,
    /// Initial bracketing grid.
    pub samples: usize,
    /// Bracketing grid ceiling.
    pub max_samples: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            genericity: 1e-6,
            degenerate: 1e-8,
            bisection: BISECTION_TOL,
            samples: DEFAULT_SAMPLES,
            max_samples: MAX_SAMPLES,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalMapValue {
    pub point: Point2,
    pub jacobian: f64,
}

/// `α(t) + ρ n(t)` and the Jacobian `1 − ρ k(t)`.
pub fn normal_map(curve: &ClosedCurve, t: f64, rho: f64) -> NormalMapValue {
    let f = curve.frame(t);
    NormalMapValue {
        point: f.position + rho * f.normal,
        jacobian: 1.0 - rho * f.curvature,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Centre,
    Saddle,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Centre => "centre",
            Kind::Saddle => "saddle",
        })
    }
}

/// Type of a stationary point of the distance-squared function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extremum {
    Minimum,
    Maximum,
}

/// A normal line through the query point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub t_star: f64,
    pub rho_star: f64,
    pub index: i32,
    pub kind: Kind,
    pub d2_type: Extremum,
    /// Radius of curvature `1/k(t*)`.
    pub fold_value: f64,
}

/// Why a query point failed the genericity check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "object", rename_all = "snake_case")]
pub enum GenericityViolation {
    OnCurve {
        t: f64,
        distance: f64,
    },
    OnEvolute {
        t: f64,
        distance: f64,
    },
    OnSurface {
        distance: f64,
    },
    /// `sheet` is 1 for `ρ = 1/k₁` and 2 for `ρ = 1/k₂`.
    OnFocalSheet {
        sheet: u8,
        distance: f64,
    },
}

impl fmt::Display for GenericityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenericityViolation::OnCurve { t, distance } => {
                write!(f, "on curve (distance {distance:.3e} at t = {t:.9})")
            }
            GenericityViolation::OnEvolute { t, distance } => {
                write!(f, "on evolute (distance {distance:.3e} at t = {t:.9})")
            }
            GenericityViolation::OnSurface { distance } => {
                write!(f, "on surface (distance {distance:.3e})")
            }
            GenericityViolation::OnFocalSheet { sheet, distance } => {
                write!(f, "on focal sheet {sheet} (distance {distance:.3e})")
            }
        }
    }
}

/// Distances from the query point to the curve and to its evolute.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenericityReport {
    pub curve_distance: f64,
    pub curve_t: f64,
    pub evolute_distance: f64,
    pub evolute_t: f64,
    pub tolerance: f64,
}

impl GenericityReport {
    pub fn violation(&self) -> Option<GenericityViolation> {
        if self.curve_distance <= self.tolerance {
            Some(GenericityViolation::OnCurve {
                t: self.curve_t,
                distance: self.curve_distance,
            })
        } else if self.evolute_distance <= self.tolerance {
            Some(GenericityViolation::OnEvolute {
                t: self.evolute_t,
                distance: self.evolute_distance,
            })
        } else {
            None
        }
    }

    pub fn passes(&self) -> bool {
        self.violation().is_none()
    }

    pub fn into_result(self) -> Result<Self> {
        match self.violation() {
            Some(v) => Err(Error::Genericity(v)),
            None => Ok(self),
        }
    }
}

/// Centre of curvature `α + (1/k) n`.
pub(crate) fn centre_of_curvature(curve: &ClosedCurve, t: f64) -> Point2 {
    let f = curve.frame(t);
    f.position + f.normal / f.curvature
}

fn nearest<F: Fn(f64) -> Point2>(f: F, p: Point2) -> (f64, f64) {
    let (t, d2) = roots::periodic_min(&|t| (f(t) - p).norm_squared(), 4096);
    (t, d2.max(0.0).sqrt())
}

/// Distances from `p` to the curve and to the evolute, by dense sampling
/// and golden-section refinement.
pub fn genericity_report(
    curve: &ClosedCurve,
    p: Point2,
    tolerance: f64,
) -> Result<GenericityReport> {
    curve.require_strict()?;
    let (curve_t, curve_distance) = nearest(|t| curve.position(t), p);
    let (evolute_t, evolute_distance) = nearest(|t| centre_of_curvature(curve, t), p);
    Ok(GenericityReport {
        curve_distance,
        curve_t,
        evolute_distance,
        evolute_t,
        tolerance,
    })
}

/// Passes, or reports the object the point lies on.
pub fn genericity(curve: &ClosedCurve, p: Point2) -> Result<Option<GenericityViolation>> {
    Ok(genericity_report(curve, p, Tolerances::default().genericity)?.violation())
}

/// Parameters where the normal line passes through `p`: roots of
/// `(α(t) − p) · α′(t)`, unclassified.
pub fn normal_feet(curve: &ClosedCurve, p: Point2, tol: &Tolerances) -> Vec<f64> {
    let g = |t: f64| {
        let j = curve.jet(t);
        (j.position - p).dot(&j.d1)
    };
    roots::periodic_roots(&g, tol.samples, tol.max_samples, tol.bisection).roots
}

/// Classifies the normal foot at `t`.
pub fn classify(curve: &ClosedCurve, p: Point2, t: f64, tol: &Tolerances) -> Result<CriticalPoint> {
    let f = curve.frame(t);
    let rho = -(f.position - p).dot(&f.normal);
    let rk = rho * f.curvature;
    let jacobian = 1.0 - rk;
    if jacobian.abs() <= tol.degenerate * (1.0 + rk.abs()) {
        return Err(Error::DegenerateCriticalPoint { t, rho, jacobian });
    }
    let (index, kind, d2_type) = if jacobian > 0.0 {
        (1, Kind::Centre, Extremum::Minimum)
    } else {
        (-1, Kind::Saddle, Extremum::Maximum)
    };
    Ok(CriticalPoint {
        t_star: t,
        rho_star: rho,
        index,
        kind,
        d2_type,
        fold_value: 1.0 / f.curvature,
    })
}

/// Finite critical points of the normal-map field for the query point
/// `p`, sorted by parameter.
pub fn critical_points(curve: &ClosedCurve, p: Point2) -> Result<Vec<CriticalPoint>> {
    critical_points_with(curve, p, &Tolerances::default())
}

pub fn critical_points_with(
    curve: &ClosedCurve,
    p: Point2,
    tol: &Tolerances,
) -> Result<Vec<CriticalPoint>> {
    genericity_report(curve, p, tol.genericity)?.into_result()?;
    normal_feet(curve, p, tol)
        .into_iter()
        .map(|t| classify(curve, p, t, tol))
        .collect()
}

/// Numbers of normal segments (`n_p`), of those with ρ < 0 (`m_p`), and of
/// all normals (`N_p`) through a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentCounts {
    pub n_p: usize,
    pub m_p: usize,
    #[serde(rename = "N_p")]
    pub big_n_p: usize,
}

impl SegmentCounts {
    pub fn from_points(points: &[CriticalPoint]) -> Self {
        let centres = points.iter().filter(|c| c.kind == Kind::Centre);
        SegmentCounts {
            n_p: centres.clone().count(),
            m_p: centres.filter(|c| c.rho_star < 0.0).count(),
            big_n_p: points.len(),
        }
    }
}

pub fn segment_counts(curve: &ClosedCurve, p: Point2) -> Result<SegmentCounts> {
    Ok(SegmentCounts::from_points(&critical_points(curve, p)?))
}

/// Predicted saddle–centre pair near a fold point after translating the
/// curve by `ε` along its tangent there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairPrediction {
    /// Arc-length offsets `±√(2ε/(ρ k̇))`.
    pub delta_s_plus: f64,
    pub delta_s_minus: f64,
    /// The same offsets in the curve parameter, `δs / |α′(t_fold)|`.
    pub delta_t_plus: f64,
    pub delta_t_minus: f64,
}

/// Query point equivalent to translating the curve by `ε·tangent` while the
/// origin sits at the centre of curvature of `t_fold`.
pub fn perturbed_query_point(curve: &ClosedCurve, t_fold: f64, epsilon: f64) -> Point2 {
    let f = curve.frame(t_fold);
    centre_of_curvature(curve, t_fold) - epsilon * f.tangent
}

/// Second-order prediction of the pair created when the query point leaves
/// the evolute at `t_fold`; `None` when the pair is annihilated instead.
pub fn predict_pair(
    curve: &ClosedCurve,
    t_fold: f64,
    epsilon: f64,
) -> Result<Option<PairPrediction>> {
    curve.require_strict()?;
    if !(epsilon.abs() <= 1e-2) {
        return Err(Error::InvalidArgument(format!(
            "perturbation {epsilon} outside |ε| ≤ 1e-2"
        )));
    }
    let jet = curve.jet(t_fold);
    let speed = jet.speed();
    let k = jet.curvature();
    let kdot = jet.curvature_rate() / speed;
    if kdot.abs() <= 1e-8 * k.abs().max(1.0) {
        return Err(Error::VertexDegeneracy { t: t_fold, kdot });
    }
    let rho = 1.0 / k;
    let ratio = 2.0 * epsilon / (rho * kdot);
    if ratio <= 0.0 {
        return Ok(None);
    }
    let ds = ratio.sqrt();
    Ok(Some(PairPrediction {
        delta_s_plus: ds,
        delta_s_minus: -ds,
        delta_t_plus: ds / speed,
        delta_t_minus: -ds / speed,
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub t: f64,
    pub rho: f64,
    /// `F(t, ρ) − p`.
    pub field: [f64; 2],
    pub jacobian: f64,
}

/// Uniform samples of the field over `[0, 2π] × [ρ_min, ρ_max]` (corners
/// included) and the fold curve `ρ = 1/k(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub res_t: usize,
    pub res_rho: usize,
    pub origin: [f64; 2],
    pub samples: Vec<FieldSample>,
    pub fold: Vec<[f64; 2]>,
}

pub fn field_grid(
    curve: &ClosedCurve,
    p: Point2,
    rho_min: f64,
    rho_max: f64,
    res_t: usize,
    res_rho: usize,
) -> Result<FieldGrid> {
    if res_t < 2 || res_rho < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid resolution {res_t}×{res_rho} must be at least 2×2"
        )));
    }
    if !(rho_min < rho_max) {
        return Err(Error::InvalidArgument(format!(
            "empty ρ range {rho_min}:{rho_max}"
        )));
    }
    let mut samples = Vec::with_capacity(res_t * res_rho);
    for i in 0..res_t {
        let t = TAU * i as f64 / (res_t - 1) as f64;
        let frame = curve.frame(t);
        for j in 0..res_rho {
            let rho = rho_min + (rho_max - rho_min) * j as f64 / (res_rho - 1) as f64;
            let v = frame.position + rho * frame.normal - p;
            samples.push(FieldSample {
                t,
                rho,
                field: [v.x, v.y],
                jacobian: 1.0 - rho * frame.curvature,
            });
        }
    }
    let n_fold = res_t.max(513);
    let fold = (0..n_fold)
        .map(|i| {
            let t = TAU * i as f64 / (n_fold - 1) as f64;
            [t, 1.0 / curve.curvature(t)]
        })
        .collect();
    Ok(FieldGrid {
        res_t,
        res_rho,
        origin: [p.x, p.y],
        samples,
        fold,
    })
}

/// The field `(t, ρ) ↦ F(t, ρ) − p` in cylinder coordinates.
pub fn cylinder_field(
    curve: &ClosedCurve,
    p: Point2,
) -> impl Fn(Vector2<f64>) -> Vector2<f64> + '_ {
    move |q: Vector2<f64>| normal_map(curve, q.x, q.y).point - p
}

/// Poincaré index of the normal-map field about a critical point, measured
/// on a small loop in the `(t, ρ)` plane.
pub fn critical_point_index(
    curve: &ClosedCurve,
    p: Point2,
    cp: &CriticalPoint,
    radius: f64,
) -> Result<i64> {
    degree::planar_index_shrinking(
        cylinder_field(curve, p),
        Vector2::new(cp.t_star, cp.rho_star),
        radius,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::CurveSpec;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn ellipse() -> ClosedCurve {
        ClosedCurve::strict(&CurveSpec::ellipse(2.0, 1.0)).unwrap()
    }

    #[test]
    fn normal_map_examples() {
        let c = ClosedCurve::strict(&CurveSpec::circle(1.0, Point2::zeros())).unwrap();
        let v = normal_map(&c, 0.0, 1.0);
        assert!(v.point.norm() < 1e-15 && v.jacobian.abs() < 1e-15);
        let e = ellipse();
        let v = normal_map(&e, 0.7, 0.0);
        assert_eq!(v.point, e.position(0.7));
        assert_eq!(v.jacobian, 1.0);
        assert!(normal_map(&e, 0.0, 0.5).jacobian.abs() < 1e-13);
    }

    #[test]
    fn ellipse_origin_critical_points() {
        let cps = critical_points(&ellipse(), Point2::zeros()).unwrap();
        let expected = [
            (0.0, 2.0, Kind::Saddle, 0.5),
            (FRAC_PI_2, 1.0, Kind::Centre, 4.0),
            (PI, 2.0, Kind::Saddle, 0.5),
            (3.0 * FRAC_PI_2, 1.0, Kind::Centre, 4.0),
        ];
        assert_eq!(cps.len(), 4);
        for (cp, (t, rho, kind, fold)) in cps.iter().zip(expected) {
            assert!((cp.t_star - t).abs() < 1e-9);
            assert!((cp.rho_star - rho).abs() < 1e-8);
            assert!((cp.fold_value - fold).abs() < 1e-9);
            assert_eq!(cp.kind, kind);
        }
    }

    #[test]
    fn circle_diameter() {
        let c = ClosedCurve::strict(&CurveSpec::circle(1.0, Point2::zeros())).unwrap();
        let cps = critical_points(&c, Point2::new(0.5, 0.0)).unwrap();
        assert_eq!(cps.len(), 2);
        assert_eq!(cps[0].kind, Kind::Centre);
        assert!(cps[0].t_star.abs() < 1e-9 && (cps[0].rho_star - 0.5).abs() < 1e-9);
        assert_eq!(cps[1].kind, Kind::Saddle);
        assert!((cps[1].t_star - PI).abs() < 1e-9 && (cps[1].rho_star - 1.5).abs() < 1e-9);
    }

    /// Brute-force count of sign changes of (α − p)·α′ on a fine grid.
    fn brute_force_count(curve: &ClosedCurve, p: Point2) -> usize {
        let n = 200_000;
        let g = |i: usize| {
            let j = curve.jet(TAU * (i % n) as f64 / n as f64 + 1e-7);
            (j.position - p).dot(&j.d1)
        };
        (0..n).filter(|&i| g(i) * g(i + 1) < 0.0).count()
    }

    #[test]
    fn counts_inside_and_outside_evolute() {
        let e = ellipse();
        for (p, n) in [(Point2::new(0.1, 0.0), 4), (Point2::new(5.0, 0.0), 2)] {
            assert_eq!(brute_force_count(&e, p), n);
            assert_eq!(critical_points(&e, p).unwrap().len(), n);
        }
    }

    #[test]
    fn segment_count_examples() {
        let e = ellipse();
        let s = segment_counts(&e, Point2::zeros()).unwrap();
        assert_eq!((s.n_p, s.m_p, s.big_n_p), (2, 0, 4));
        let s = segment_counts(&e, Point2::new(5.0, 0.0)).unwrap();
        assert_eq!((s.n_p, s.m_p, s.big_n_p), (1, 1, 2));
        let cps = critical_points(&e, Point2::new(5.0, 0.0)).unwrap();
        assert!((cps[0].rho_star + 3.0).abs() < 1e-8 && (cps[1].rho_star - 7.0).abs() < 1e-8);
    }

    #[test]
    fn genericity_examples() {
        let e = ellipse();
        assert_eq!(genericity(&e, Point2::zeros()).unwrap(), None);
        assert!(matches!(
            genericity(&e, Point2::new(2.0, 0.0)).unwrap(),
            Some(GenericityViolation::OnCurve { .. })
        ));
        // astroid cusp at (a² − b²)/a = 1.5
        assert!(matches!(
            genericity(&e, Point2::new(1.5, 0.0)).unwrap(),
            Some(GenericityViolation::OnEvolute { .. })
        ));
        assert!(matches!(
            critical_points(&e, Point2::new(1.5, 0.0)),
            Err(Error::Genericity(_))
        ));
    }

    #[test]
    fn degenerate_point_raises() {
        let e = ellipse();
        let p = centre_of_curvature(&e, 1.0);
        let tol = Tolerances {
            genericity: 0.0,
            ..Default::default()
        };
        // a double root of g, so classify the foot directly
        assert!(matches!(
            classify(&e, p, 1.0, &tol),
            Err(Error::DegenerateCriticalPoint { .. })
        ));
    }

    #[test]
    fn pair_prediction_sign_and_vertex() {
        let e = ellipse();
        // k decreases on (0, π/2), so ρk̇ < 0 there
        assert!(predict_pair(&e, FRAC_PI_4, 1e-4).unwrap().is_none());
        let pair = predict_pair(&e, FRAC_PI_4, -1e-4).unwrap().unwrap();
        assert!(pair.delta_s_plus > 0.0 && pair.delta_s_minus == -pair.delta_s_plus);
        assert!(predict_pair(&e, 3.0 * FRAC_PI_4, 1e-4).unwrap().is_some());
        assert!(matches!(
            predict_pair(&e, 0.0, 1e-4),
            Err(Error::VertexDegeneracy { .. })
        ));
        assert!(matches!(
            predict_pair(&e, FRAC_PI_4, 0.5),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn grid_examples() {
        let e = ellipse();
        let g = field_grid(&e, Point2::zeros(), -1.0, 1.0, 2, 2).unwrap();
        assert_eq!(g.samples.len(), 4);
        let corners: Vec<(f64, f64)> = g.samples.iter().map(|s| (s.t, s.rho)).collect();
        assert_eq!(
            corners,
            vec![(0.0, -1.0), (0.0, 1.0), (TAU, -1.0), (TAU, 1.0)]
        );
        let (lo, hi) = g.fold.iter().fold((f64::INFINITY, 0.0f64), |(l, h), f| {
            (l.min(f[1]), h.max(f[1]))
        });
        assert!((lo - 0.5).abs() < 1e-12 && (hi - 4.0).abs() < 1e-12);
        let c = ClosedCurve::strict(&CurveSpec::circle(1.0, Point2::zeros())).unwrap();
        let g = field_grid(&c, Point2::zeros(), 0.0, 2.0, 8, 3).unwrap();
        assert!(g.fold.iter().all(|f| (f[1] - 1.0).abs() < 1e-12));
        assert!(field_grid(&c, Point2::zeros(), 0.0, 2.0, 1, 3).is_err());
    }

    #[test]
    fn local_index_matches_jacobian_sign() {
        let e = ellipse();
        let p = Point2::new(0.1, 0.05);
        for cp in critical_points(&e, p).unwrap() {
            assert_eq!(
                critical_point_index(&e, p, &cp, 1e-2).unwrap(),
                cp.index as i64
            );
        }
    }
}
