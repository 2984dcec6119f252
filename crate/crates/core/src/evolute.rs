//! The evolute `β = α + (1/k) n`, its cusps and turning, and the full
//! integer report that ties the curve, its evolute and a query point
//! together.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::degree::{self, signed_angle, CircleLoop};
use crate::error::{Error, Result};
use crate::field::{self, SegmentCounts, Tolerances};
use crate::geom::{self, perp, ClosedCurve, Point2, Vertices};
use crate::sphere::{self, Pole, DEFAULT_POLE_RHO};

/// Evolute of a curve with k > 0.
#[derive(Clone, Debug)]
pub struct Evolute {
    curve: ClosedCurve,
    cusps: Option<Vertices>,
}

pub fn evolute(curve: &ClosedCurve) -> Result<Evolute> {
    curve.require_strict()?;
    let cusps = match geom::vertices(curve) {
        Ok(v) => Some(v),
        Err(Error::CircleDegeneracy) => None,
        Err(e) => return Err(e),
    };
    Ok(Evolute {
        curve: curve.clone(),
        cusps,
    })
}

impl Evolute {
    pub fn curve(&self) -> &ClosedCurve {
        &self.curve
    }

    /// True for a circle, whose evolute is a single point.
    pub fn is_degenerate(&self) -> bool {
        self.cusps.is_none()
    }

    pub fn point(&self, t: f64) -> Point2 {
        field::centre_of_curvature(&self.curve, t)
    }

    /// `β′(t) = α′ + (1/k)′ n + (1/k) n′`.
    pub fn velocity(&self, t: f64) -> Vector2<f64> {
        let jet = self.curve.jet(t);
        let speed = jet.speed();
        let tangent = jet.d1 / speed;
        let normal = perp(&tangent);
        let k = jet.curvature();
        let dn = -k * speed * tangent;
        let d_radius = -jet.curvature_rate() / (k * k);
        jet.d1 + d_radius * normal + dn / k
    }

    pub fn cusps(&self) -> Result<&[f64]> {
        self.cusps
            .as_ref()
            .map(|v| v.params.as_slice())
            .ok_or(Error::CircleDegeneracy)
    }

    /// Number of cusps, ν.
    pub fn nu(&self) -> Result<usize> {
        Ok(self.cusps()?.len())
    }
}

/// Total turning of the evolute's unit tangent over one period, in turns,
/// measured directly from `β′`. At each cusp the direction reverses; the
/// reversal is counted as a half turn in the sense in which the tangent
/// line is rotating on either side of the cusp.
pub fn cusp_aware_turning(ev: &Evolute, samples: usize) -> Result<f64> {
    if ev.is_degenerate() {
        return Err(Error::CircleDegeneracy);
    }
    let n = samples.max(64);
    let h = TAU / n as f64;
    // offset grid keeps symmetric cusps off the nodes
    let offset = 0.3713 * h;
    let dirs: Vec<Vector2<f64>> = (0..n)
        .map(|i| {
            let v = ev.velocity(offset + i as f64 * h);
            v / v.norm()
        })
        .collect();
    if dirs.iter().any(|d| !d.x.is_finite()) {
        return Err(Error::DegreeResolution(
            "evolute velocity vanishes on the sample grid".into(),
        ));
    }
    // line rotation per step (mod π) and whether the direction reversed
    let steps: Vec<(f64, bool)> = (0..n)
        .map(|i| {
            let a = signed_angle(&dirs[i], &dirs[(i + 1) % n]);
            if a.abs() > PI / 2.0 {
                (a - PI * a.signum(), true)
            } else {
                (a, false)
            }
        })
        .collect();
    let mut total = 0.0;
    for i in 0..n {
        let (line, reversed) = steps[i];
        if line.abs() > PI / 4.0 {
            return Err(Error::DegreeResolution(format!(
                "evolute tangent line turns {line:.3} in one step"
            )));
        }
        total += line;
        if reversed {
            let before = steps[(i + n - 1) % n].0;
            let after = steps[(i + 1) % n].0;
            let sense = before + line + after;
            if sense == 0.0 {
                return Err(Error::DegreeResolution(
                    "tangent line is stationary at a cusp".into(),
                ));
            }
            total += PI * sense.signum();
        }
    }
    Ok(total / TAU)
}

/// Rotation index of the evolute both from `(ν + 2 r^α)/2` and from
/// [`cusp_aware_turning`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvoluteRotation {
    pub formula: i64,
    pub numeric: i64,
}

pub fn evolute_rotation(curve: &ClosedCurve) -> Result<EvoluteRotation> {
    let ev = evolute(curve)?;
    let nu = ev.nu()? as i64;
    let r_alpha = geom::rotation_index(curve)?;
    let turns = cusp_aware_turning(&ev, 16384)?;
    let numeric = turns.round();
    if (turns - numeric).abs() >= degree::RESIDUAL_TOL {
        return Err(Error::DegreeResolution(format!(
            "evolute turning {turns:.6} is not an integer"
        )));
    }
    Ok(EvoluteRotation {
        formula: half_exact(nu + 2 * r_alpha)?,
        numeric: numeric as i64,
    })
}

/// r^β, checked against the direct turning measurement.
pub fn evolute_rotation_index(curve: &ClosedCurve) -> Result<i64> {
    let r = evolute_rotation(curve)?;
    if r.formula != r.numeric {
        return Err(Error::IdentityMismatch(format!(
            "r^β: (ν + 2r^α)/2 = {} but the evolute turns {} times",
            r.formula, r.numeric
        )));
    }
    Ok(r.formula)
}

fn half_exact(v: i64) -> Result<i64> {
    if v % 2 != 0 {
        return Err(Error::IdentityMismatch(format!("{v} is odd; cannot halve")));
    }
    Ok(v / 2)
}

/// Winding number of the evolute about `p`.
pub fn evolute_winding(curve: &ClosedCurve, p: Point2) -> Result<i64> {
    let ev = evolute(curve)?;
    evolute_winding_of(&ev, p)
}

fn evolute_winding_of(ev: &Evolute, p: Point2) -> Result<i64> {
    if ev.is_degenerate() {
        let centre = ev.point(0.0);
        let distance = (centre - p).norm();
        if distance <= degree::POINT_ON_LOOP_TOL {
            return Err(Error::PointOnCurve { t: 0.0, distance });
        }
        return Ok(0);
    }
    let lp = CircleLoop::new(|t| ev.point(t)).with_samples(2048);
    degree::winding_number(&lp, p)
}

/// The four quantities `(r^α, r^β, w^α_p, w^β_p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedIndices {
    pub r_alpha: i64,
    pub r_beta: Option<i64>,
    pub w_alpha_p: i64,
    pub w_beta_p: i64,
}

/// `(r^α, r^β, w^α_p, w^β_p) = M (i_N, ν, m_p, n_p) − 1` with
/// `M = [[1,0,0,0],[1,½,0,0],[1,0,−1,0],[1,0,0,−1]]`.
pub fn matrix_formula(i_north: i64, nu: Option<i64>, m_p: i64, n_p: i64) -> Result<DerivedIndices> {
    const TWICE_M: [[i64; 4]; 4] = [[2, 0, 0, 0], [2, 1, 0, 0], [2, 0, -2, 0], [2, 0, 0, -2]];
    let x = [i_north, nu.unwrap_or(0), m_p, n_p];
    let row = |r: usize| -> Result<i64> {
        let twice: i64 = TWICE_M[r].iter().zip(x).map(|(m, v)| m * v).sum();
        Ok(half_exact(twice)? - 1)
    };
    Ok(DerivedIndices {
        r_alpha: row(0)?,
        r_beta: match nu {
            Some(_) => Some(row(1)?),
            None => None,
        },
        w_alpha_p: row(2)?,
        w_beta_p: row(3)?,
    })
}

/// One boolean per identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityChecks {
    /// `w^β_p = r^α − n_p`
    pub evolute_winding_by_segments: bool,
    /// `w^β_p = r^α − N_p/2`
    pub evolute_winding_by_normals: bool,
    /// `w^α_p = r^α − m_p`
    pub curve_winding_by_negative_segments: bool,
    /// `i_N = 1 + r^α`, `i_S = 1 − r^α`
    pub pole_indices: bool,
    /// `r^β = (ν + 2r^α)/2`; vacuous for a circle
    pub evolute_rotation: bool,
    /// `i_N + i_S + Σ finite = 2`
    pub index_sum: bool,
    /// equal numbers of saddles and centres, at least one of each
    pub saddles_equal_centres: bool,
    /// matrix formula equals the independent numerics in every entry
    pub matrix_agrees: bool,
}

impl IdentityChecks {
    pub fn all(&self) -> bool {
        self.evolute_winding_by_segments
            && self.evolute_winding_by_normals
            && self.curve_winding_by_negative_segments
            && self.pole_indices
            && self.evolute_rotation
            && self.index_sum
            && self.saddles_equal_centres
            && self.matrix_agrees
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let named = [
            ("w_beta_p = r_alpha - n_p", self.evolute_winding_by_segments),
            (
                "w_beta_p = r_alpha - N_p/2",
                self.evolute_winding_by_normals,
            ),
            (
                "w_alpha_p = r_alpha - m_p",
                self.curve_winding_by_negative_segments,
            ),
            ("i_N = 1 + r_alpha, i_S = 1 - r_alpha", self.pole_indices),
            ("r_beta = (nu + 2 r_alpha)/2", self.evolute_rotation),
            ("i_N + i_S + finite = 2", self.index_sum),
            ("#saddles = #centres >= 1", self.saddles_equal_centres),
            ("matrix formula = numerics", self.matrix_agrees),
        ];
        named
            .iter()
            .filter(|(_, ok)| !ok)
            .map(|(n, _)| *n)
            .collect()
    }
}

/// Every integer attached to a curve and a query point, computed twice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub point: [f64; 2],
    pub r_alpha: i64,
    pub r_beta: Option<i64>,
    pub nu: Option<i64>,
    #[serde(rename = "i_N")]
    pub i_north: i64,
    #[serde(rename = "i_S")]
    pub i_south: i64,
    pub n_p: i64,
    pub m_p: i64,
    #[serde(rename = "N_p")]
    pub big_n_p: i64,
    pub w_alpha_p: i64,
    pub w_beta_p: i64,
    /// Sum of the finite Poincaré indices.
    pub finite_index_sum: i64,
    pub matrix: DerivedIndices,
    pub numeric: DerivedIndices,
    pub checks: IdentityChecks,
    pub tolerances: Tolerances,
    pub pole_rho: f64,
}

impl IndexReport {
    pub fn all_identities_hold(&self) -> bool {
        self.checks.all()
    }

    /// `Err(MatrixMismatch)` unless every identity holds.
    pub fn ensure_consistent(&self) -> Result<()> {
        if self.all_identities_hold() {
            Ok(())
        } else {
            Err(Error::MatrixMismatch(format!(
                "at ({}, {}): {}",
                self.point[0],
                self.point[1],
                self.checks.failures().join("; ")
            )))
        }
    }

    /// Entries in CSV order: r_alpha, r_beta, nu, i_N, i_S, n_p, m_p, N_p,
    /// w_alpha_p, w_beta_p.
    pub fn vector(&self) -> [Option<i64>; 10] {
        [
            Some(self.r_alpha),
            self.r_beta,
            self.nu,
            Some(self.i_north),
            Some(self.i_south),
            Some(self.n_p),
            Some(self.m_p),
            Some(self.big_n_p),
            Some(self.w_alpha_p),
            Some(self.w_beta_p),
        ]
    }
}

/// Per-curve quantities that do not depend on the query point.
#[derive(Clone, Debug)]
pub struct CurveInvariants {
    pub evolute: Evolute,
    pub r_alpha: i64,
    pub nu: Option<i64>,
    pub r_beta_numeric: Option<i64>,
    pub i_north: i64,
    pub i_south: i64,
    pub pole_rho: f64,
}

impl CurveInvariants {
    pub fn compute(curve: &ClosedCurve) -> Result<Self> {
        Self::with_pole_rho(curve, DEFAULT_POLE_RHO)
    }

    pub fn with_pole_rho(curve: &ClosedCurve, pole_rho: f64) -> Result<Self> {
        let ev = evolute(curve)?;
        let r_alpha = geom::rotation_index(curve)?;
        let (nu, r_beta_numeric) = if ev.is_degenerate() {
            (None, None)
        } else {
            let turns = cusp_aware_turning(&ev, 16384)?;
            let rounded = turns.round();
            if (turns - rounded).abs() >= degree::RESIDUAL_TOL {
                return Err(Error::DegreeResolution(format!(
                    "evolute turning {turns:.6} is not an integer"
                )));
            }
            (Some(ev.nu()? as i64), Some(rounded as i64))
        };
        Ok(CurveInvariants {
            evolute: ev,
            r_alpha,
            nu,
            r_beta_numeric,
            i_north: sphere::pole_index(curve, Pole::North, pole_rho)?,
            i_south: sphere::pole_index(curve, Pole::South, pole_rho)?,
            pole_rho,
        })
    }
}

/// Builds the report without judging it; see [`index_report`].
pub fn compute_index_report(curve: &ClosedCurve, p: Point2) -> Result<IndexReport> {
    let inv = CurveInvariants::compute(curve)?;
    compute_index_report_with(curve, &inv, p, &Tolerances::default())
}

pub fn compute_index_report_with(
    curve: &ClosedCurve,
    inv: &CurveInvariants,
    p: Point2,
    tol: &Tolerances,
) -> Result<IndexReport> {
    let cps = field::critical_points_with(curve, p, tol)?;
    let counts = SegmentCounts::from_points(&cps);
    let finite_index_sum: i64 = cps.iter().map(|c| c.index as i64).sum();
    let saddles = cps.iter().filter(|c| c.kind == field::Kind::Saddle).count();
    let (n_p, m_p, big_n_p) = (counts.n_p as i64, counts.m_p as i64, counts.big_n_p as i64);

    let matrix = matrix_formula(inv.i_north, inv.nu, m_p, n_p)?;
    let curve_loop = CircleLoop::new(|t| curve.position(t)).with_samples(2048);
    let numeric = DerivedIndices {
        r_alpha: inv.r_alpha,
        r_beta: inv.r_beta_numeric,
        w_alpha_p: degree::winding_number(&curve_loop, p)?,
        w_beta_p: evolute_winding_of(&inv.evolute, p)?,
    };

    let r = numeric.r_alpha;
    let checks = IdentityChecks {
        evolute_winding_by_segments: numeric.w_beta_p == r - n_p,
        evolute_winding_by_normals: big_n_p % 2 == 0 && numeric.w_beta_p == r - big_n_p / 2,
        curve_winding_by_negative_segments: numeric.w_alpha_p == r - m_p,
        pole_indices: inv.i_north == 1 + r && inv.i_south == 1 - r,
        evolute_rotation: match (inv.nu, numeric.r_beta) {
            (Some(nu), Some(rb)) => (nu + 2 * r) % 2 == 0 && rb == (nu + 2 * r) / 2,
            _ => true,
        },
        index_sum: inv.i_north + inv.i_south + finite_index_sum == 2,
        saddles_equal_centres: saddles == counts.n_p && saddles >= 1,
        matrix_agrees: matrix == numeric,
    };
    Ok(IndexReport {
        point: [p.x, p.y],
        r_alpha: numeric.r_alpha,
        r_beta: numeric.r_beta,
        nu: inv.nu,
        i_north: inv.i_north,
        i_south: inv.i_south,
        n_p,
        m_p,
        big_n_p,
        w_alpha_p: numeric.w_alpha_p,
        w_beta_p: numeric.w_beta_p,
        finite_index_sum,
        matrix,
        numeric,
        checks,
        tolerances: *tol,
        pole_rho: inv.pole_rho,
    })
}

/// The full report; `Err(MatrixMismatch)` if the matrix formula and the
/// independent numerics disagree anywhere.
pub fn index_report(curve: &ClosedCurve, p: Point2) -> Result<IndexReport> {
    let report = compute_index_report(curve, p)?;
    report.ensure_consistent()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::CurveSpec;

    fn ellipse() -> ClosedCurve {
        ClosedCurve::strict(&CurveSpec::ellipse(2.0, 1.0)).unwrap()
    }

    #[test]
    fn circle_evolute_is_a_point() {
        let c = ClosedCurve::strict(&CurveSpec::circle(1.0, Point2::zeros())).unwrap();
        let ev = evolute(&c).unwrap();
        assert!(ev.is_degenerate());
        assert!(ev.point(1.0).norm() < 1e-15);
        assert!(matches!(ev.nu(), Err(Error::CircleDegeneracy)));
        assert!(matches!(
            evolute_rotation_index(&c),
            Err(Error::CircleDegeneracy)
        ));
        assert_eq!(evolute_winding(&c, Point2::new(0.3, 0.0)).unwrap(), 0);
    }

    #[test]
    fn ellipse_evolute_matches_astroid() {
        let e = ellipse();
        let ev = evolute(&e).unwrap();
        for &t in &[0.0f64, 0.4, 1.3, 2.9, 5.5] {
            // ((a²−b²)/a cos³t, −(a²−b²)/b sin³t)
            let oracle = Vector2::new(1.5 * t.cos().powi(3), -3.0 * t.sin().powi(3));
            assert!((ev.point(t) - oracle).norm() < 1e-12);
        }
        assert_eq!(ev.nu().unwrap(), 4);
        assert!((ev.point(0.0).x - 1.5).abs() < 1e-12);
        assert!((ev.point(std::f64::consts::FRAC_PI_2).y + 3.0).abs() < 1e-12);
    }

    #[test]
    fn evolute_velocity_is_normal_to_curve() {
        let ev = evolute(&ClosedCurve::strict(&CurveSpec::limacon(0.5)).unwrap()).unwrap();
        for i in 0..200 {
            let t = 0.0314 * i as f64 + 0.01;
            let v = ev.velocity(t);
            let tangent = ev.curve().frame(t).tangent;
            assert!(v.dot(&tangent).abs() < 1e-8);
            let h = 1e-5;
            let fd = (ev.point(t + h) - ev.point(t - h)) / (2.0 * h);
            assert!((fd - v).norm() < 1e-6 * (1.0 + v.norm()));
        }
    }

    #[test]
    fn evolute_rotation_examples() {
        assert_eq!(evolute_rotation_index(&ellipse()).unwrap(), 3);
        let lim = ClosedCurve::strict(&CurveSpec::limacon(0.5)).unwrap();
        let r = evolute_rotation(&lim).unwrap();
        assert_eq!(r.formula, (2 + 4) / 2);
        assert_eq!(r.numeric, r.formula);
    }

    #[test]
    fn evolute_winding_examples() {
        let e = ellipse();
        assert_eq!(evolute_winding(&e, Point2::zeros()).unwrap(), -1);
        assert_eq!(evolute_winding(&e, Point2::new(5.0, 0.0)).unwrap(), 0);
    }

    #[test]
    fn matrix_formula_examples() {
        let m = matrix_formula(2, Some(4), 0, 2).unwrap();
        assert_eq!(
            (m.r_alpha, m.r_beta, m.w_alpha_p, m.w_beta_p),
            (1, Some(3), 1, -1)
        );
        let m = matrix_formula(2, Some(4), 1, 1).unwrap();
        assert_eq!(
            (m.r_alpha, m.r_beta, m.w_alpha_p, m.w_beta_p),
            (1, Some(3), 0, 0)
        );
        // the published figure: r^α = 2 so i_N = 3; point A has n = 2, m = 1
        let m = matrix_formula(3, None, 1, 2).unwrap();
        assert_eq!((m.w_alpha_p, m.w_beta_p), (1, 0));
        assert!(matrix_formula(2, Some(3), 0, 2).is_err());
    }

    #[test]
    fn ellipse_reports() {
        let e = ellipse();
        let r = index_report(&e, Point2::zeros()).unwrap();
        let v: Vec<i64> = r.vector().iter().map(|x| x.unwrap()).collect();
        assert_eq!(v, vec![1, 3, 4, 2, 0, 2, 0, 4, 1, -1]);
        let r = index_report(&e, Point2::new(5.0, 0.0)).unwrap();
        assert_eq!(
            (r.r_alpha, r.r_beta, r.w_alpha_p, r.w_beta_p),
            (1, Some(3), 0, 0)
        );
        assert_eq!((r.i_north, r.nu, r.m_p, r.n_p), (2, Some(4), 1, 1));
    }

    #[test]
    fn circle_report_skips_cusp_quantities() {
        let c = ClosedCurve::strict(&CurveSpec::circle(1.0, Point2::new(0.2, 0.1))).unwrap();
        let r = index_report(&c, Point2::new(0.5, 0.3)).unwrap();
        assert_eq!((r.nu, r.r_beta), (None, None));
        assert_eq!((r.n_p, r.w_beta_p, r.w_alpha_p), (1, 0, 1));
        let r = index_report(&c, Point2::new(4.0, 0.0)).unwrap();
        assert_eq!((r.n_p, r.m_p, r.w_alpha_p), (1, 1, 0));
    }
}
